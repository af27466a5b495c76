//! CSV reading and writing.
//!
//! Inputs need a header row; `#`-prefixed metadata lines and blank lines are
//! skipped, so command outputs round-trip as inputs. Cells are
//! comma-separated, UTF-8, LF or CRLF. Parse failures report the 1-based
//! line number.

use crate::errors::{CliError, CliResult};
use std::io::Write;

/// A parsed numeric table: column names plus row-major values.
#[derive(Debug, Clone)]
pub struct CsvTable {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.headers.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    pub fn require_column(&self, name: &str, path: &str) -> CliResult<Vec<f64>> {
        self.column(name).ok_or_else(|| {
            CliError::Input(format!(
                "{path}: missing required column '{name}' (found: {})",
                self.headers.join(",")
            ))
        })
    }
}

pub fn read_table(path: &str) -> CliResult<CsvTable> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {path}: {e}")))?;
    let mut headers: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim_end_matches('\r').trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match &headers {
            None => {
                headers = Some(line.split(',').map(|h| h.trim().to_string()).collect());
            }
            Some(hs) => {
                let cells: Vec<&str> = line.split(',').collect();
                if cells.len() != hs.len() {
                    return Err(CliError::Input(format!(
                        "{path}:{line_no}: expected {} cells, found {}",
                        hs.len(),
                        cells.len()
                    )));
                }
                let mut row = Vec::with_capacity(cells.len());
                for cell in cells {
                    let v: f64 = cell.trim().parse().map_err(|_| {
                        CliError::Input(format!(
                            "{path}:{line_no}: cannot parse '{}' as a number",
                            cell.trim()
                        ))
                    })?;
                    row.push(v);
                }
                rows.push(row);
            }
        }
    }
    let headers =
        headers.ok_or_else(|| CliError::Input(format!("{path}: no header row found")))?;
    Ok(CsvTable { headers, rows })
}

/// Destination for command output: a file or stdout.
pub struct OutputTarget {
    writer: Box<dyn Write>,
    description: String,
}

impl OutputTarget {
    pub fn create(path: Option<&str>) -> CliResult<Self> {
        match path {
            Some(p) => {
                let file = std::fs::File::create(p)
                    .map_err(|e| CliError::Input(format!("cannot create {p}: {e}")))?;
                Ok(OutputTarget {
                    writer: Box::new(std::io::BufWriter::new(file)),
                    description: p.to_string(),
                })
            }
            None => Ok(OutputTarget {
                writer: Box::new(std::io::BufWriter::new(std::io::stdout())),
                description: "stdout".to_string(),
            }),
        }
    }

    pub fn line(&mut self, text: &str) -> CliResult<()> {
        writeln!(self.writer, "{text}")
            .map_err(|e| CliError::Input(format!("cannot write to {}: {e}", self.description)))
    }

    pub fn finish(mut self) -> CliResult<()> {
        self.writer
            .flush()
            .map_err(|e| CliError::Input(format!("cannot write to {}: {e}", self.description)))
    }
}

/// Joins cells with commas; floats use the shortest round-trip format so
/// identical runs produce identical bytes.
pub fn row(cells: &[String]) -> String {
    cells.join(",")
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}
