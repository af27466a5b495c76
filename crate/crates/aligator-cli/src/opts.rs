//! Flat key-value options with flag / config-file / default precedence.
//!
//! Every option is a `--key value` flag; a `--config FILE` may supply the
//! same keys as `key = value` lines. Flags override the file, the file
//! overrides built-in defaults. Defaults are recorded when a command reads
//! them, so the header echo always shows the effective configuration.

use crate::errors::{CliError, CliResult};
use std::collections::{BTreeMap, BTreeSet};

/// Keys any command may use; unknown flags are config errors.
const KNOWN_KEYS: &[&str] = &[
    "algorithm",
    "alpha",
    "amplitude",
    "beta",
    "compare",
    "config",
    "delta",
    "eta",
    "expert-kind",
    "horizon",
    "index-order",
    "input",
    "mode",
    "n",
    "ns",
    "output",
    "rounds",
    "seed",
    "sigma",
    "signal",
    "signal-out",
    "stride",
    "target-tv",
    "trials",
    "window",
];

#[derive(Debug, Clone)]
pub struct Opts {
    values: BTreeMap<String, String>,
    consumed: BTreeSet<String>,
}

impl Opts {
    /// Parses `--key value` pairs, then folds in the config file (if any)
    /// underneath them.
    pub fn from_args(args: &[String]) -> CliResult<Self> {
        let mut flags = BTreeMap::new();
        let mut i = 0;
        while i < args.len() {
            let arg = &args[i];
            let key = arg
                .strip_prefix("--")
                .ok_or_else(|| CliError::Config(format!("expected --key, found '{arg}'")))?;
            if !KNOWN_KEYS.contains(&key) {
                return Err(CliError::Config(format!("unknown option --{key}")));
            }
            let value = args
                .get(i + 1)
                .ok_or_else(|| CliError::Config(format!("--{key} is missing a value")))?;
            flags.insert(key.to_string(), value.clone());
            i += 2;
        }
        let mut values = BTreeMap::new();
        if let Some(path) = flags.get("config") {
            for (key, value) in parse_config_file(path)? {
                values.insert(key, value);
            }
        }
        values.extend(flags);
        Ok(Opts {
            values,
            consumed: BTreeSet::new(),
        })
    }

    fn record(&mut self, key: &str, default: Option<&str>) -> Option<String> {
        self.consumed.insert(key.to_string());
        match (self.values.get(key), default) {
            (Some(v), _) => Some(v.clone()),
            (None, Some(d)) => {
                self.values.insert(key.to_string(), d.to_string());
                Some(d.to_string())
            }
            (None, None) => None,
        }
    }

    pub fn get_str(&mut self, key: &str, default: &str) -> String {
        self.record(key, Some(default)).expect("default supplied")
    }

    pub fn opt_str(&mut self, key: &str) -> Option<String> {
        self.record(key, None)
    }

    pub fn require_str(&mut self, key: &str) -> CliResult<String> {
        self.record(key, None)
            .ok_or_else(|| CliError::Config(format!("--{key} is required")))
    }

    fn parse<T: std::str::FromStr>(key: &str, raw: &str) -> CliResult<T> {
        raw.parse().map_err(|_| {
            CliError::Config(format!("--{key}: cannot parse '{raw}'"))
        })
    }

    pub fn get_f64(&mut self, key: &str, default: f64) -> CliResult<f64> {
        let raw = self.get_str(key, &format!("{default}"));
        Self::parse(key, &raw)
    }

    pub fn opt_f64(&mut self, key: &str) -> CliResult<Option<f64>> {
        self.opt_str(key).map(|raw| Self::parse(key, &raw)).transpose()
    }

    pub fn get_u64(&mut self, key: &str, default: u64) -> CliResult<u64> {
        let raw = self.get_str(key, &format!("{default}"));
        Self::parse(key, &raw)
    }

    pub fn get_usize(&mut self, key: &str, default: usize) -> CliResult<usize> {
        let raw = self.get_str(key, &format!("{default}"));
        Self::parse(key, &raw)
    }

    pub fn opt_usize(&mut self, key: &str) -> CliResult<Option<usize>> {
        self.opt_str(key).map(|raw| Self::parse(key, &raw)).transpose()
    }

    pub fn require_usize(&mut self, key: &str) -> CliResult<usize> {
        let raw = self.require_str(key)?;
        Self::parse(key, &raw)
    }

    /// Comma-separated list of positive integers.
    pub fn require_usize_list(&mut self, key: &str) -> CliResult<Vec<usize>> {
        let raw = self.require_str(key)?;
        raw.split(',')
            .map(|part| Self::parse(key, part.trim()))
            .collect()
    }

    /// `# key: value` echo lines for every option the command consumed.
    pub fn header_lines(&self, command: &str) -> Vec<String> {
        let mut lines = vec![format!("# command: {command}")];
        for (key, value) in &self.values {
            if self.consumed.contains(key) && key != "config" {
                lines.push(format!("# {key}: {value}"));
            }
        }
        lines
    }

    /// Flags the user supplied but the command never read.
    pub fn unused_keys(&self) -> Vec<String> {
        self.values
            .keys()
            .filter(|k| !self.consumed.contains(*k) && *k != "config")
            .cloned()
            .collect()
    }
}

fn parse_config_file(path: &str) -> CliResult<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read config file {path}: {e}")))?;
    let mut out = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Input(format!(
                "{path}:{}: expected 'key = value', found '{line}'",
                idx + 1
            ))
        })?;
        let key = key.trim();
        if !KNOWN_KEYS.contains(&key) {
            return Err(CliError::Config(format!(
                "{path}:{}: unknown option '{key}'",
                idx + 1
            )));
        }
        out.push((key.to_string(), value.trim().to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(pairs: &[&str]) -> Opts {
        let args: Vec<String> = pairs.iter().map(|s| s.to_string()).collect();
        Opts::from_args(&args).unwrap()
    }

    #[test]
    fn flags_parse_and_defaults_record() {
        let mut o = opts(&["--n", "128", "--sigma", "0.25"]);
        assert_eq!(o.get_u64("n", 1).unwrap(), 128);
        assert_eq!(o.get_f64("sigma", 0.0).unwrap(), 0.25);
        assert_eq!(o.get_u64("seed", 7).unwrap(), 7);
        let header = o.header_lines("simulate");
        assert!(header.contains(&"# seed: 7".to_string()));
        assert!(header.contains(&"# n: 128".to_string()));
    }

    #[test]
    fn unknown_flags_rejected() {
        let args = vec!["--bogus".to_string(), "1".to_string()];
        assert!(Opts::from_args(&args).is_err());
        let args = vec!["--n".to_string()];
        assert!(Opts::from_args(&args).is_err());
    }

    #[test]
    fn flags_override_config_file() {
        let dir = std::env::temp_dir().join("aligator_opts_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.conf");
        std::fs::write(&path, "n = 64\nsigma = 0.5\n# comment\n").unwrap();
        let mut o = opts(&[
            "--config",
            path.to_str().unwrap(),
            "--sigma",
            "0.25",
        ]);
        assert_eq!(o.get_u64("n", 1).unwrap(), 64);
        assert_eq!(o.get_f64("sigma", 0.0).unwrap(), 0.25);
    }

    #[test]
    fn lists_and_unused() {
        let mut o = opts(&["--ns", "256, 512,1024", "--alpha", "0.4"]);
        assert_eq!(o.require_usize_list("ns").unwrap(), vec![256, 512, 1024]);
        assert_eq!(o.unused_keys(), vec!["alpha".to_string()]);
    }
}
