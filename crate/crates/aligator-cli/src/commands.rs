//! The four subcommands: offline denoising, online protocol simulation,
//! rolling-origin forecasting, and the error-rate study.

use crate::csvio::{fmt_f64, read_table, row, OutputTarget};
use crate::errors::{CliError, CliResult};
use crate::opts::Opts;
use aligator::baselines::{mad_sigma, wavelet_denoise};
use aligator::bench::{rate_study, BenchAlgorithm, BenchMode, BenchParams, SignalKind};
use aligator::driver::{
    offline_eta, run_offline, AligatorConfig, ExpertKind, LossRule, ETA_FALLBACK,
};
use aligator::rng::Rng64;
use aligator::rolling::{rolling_eval, RollingConfig, RollingForecaster};
use aligator::signals::{calibrated_scale, Signal};
use aligator::variants::{build_grid, run_offline_hedged};

/// Tag XORed into the seed for the index-order stream, so index randomness
/// and noise randomness are independently reproducible.
const INDEX_STREAM_TAG: u64 = 0x8C5F_4D1A_9E3B_2706;

fn parse_expert_kind(raw: &str) -> CliResult<ExpertKind> {
    if raw == "running-average" {
        return Ok(ExpertKind::RunningAverage);
    }
    if raw == "polynomial" {
        return Ok(ExpertKind::Polynomial { degree: 1 });
    }
    if let Some(deg) = raw.strip_prefix("polynomial:") {
        let degree: usize = deg
            .parse()
            .map_err(|_| CliError::Config(format!("bad polynomial degree '{deg}'")))?;
        if degree > 8 {
            return Err(CliError::Config(format!(
                "polynomial degree {degree} too large (max 8)"
            )));
        }
        return Ok(ExpertKind::Polynomial { degree });
    }
    Err(CliError::Config(format!(
        "unknown expert kind '{raw}' (use running-average or polynomial:<d>)"
    )))
}

/// Noise level for the z-score loss rule: the flag when positive, otherwise
/// estimated from the data; `None` when even the estimate vanishes.
fn heuristic_sigma(sigma_flag: Option<f64>, ys: &[f64]) -> Option<f64> {
    match sigma_flag {
        Some(s) if s > 0.0 => Some(s),
        _ => match mad_sigma(ys) {
            Ok(s) if s > 0.0 => Some(s),
            _ => None,
        },
    }
}

fn warn_unused(opts: &Opts) {
    for key in opts.unused_keys() {
        eprintln!("warning: option --{key} is not used by this command");
    }
}

// ---------------------------------------------------------------------------
// denoise
// ---------------------------------------------------------------------------

pub fn cmd_denoise(mut opts: Opts) -> CliResult<()> {
    let input = opts.require_str("input")?;
    let output = opts.opt_str("output");
    let algorithm = opts.get_str("algorithm", "aligator");
    let expert_kind = parse_expert_kind(&opts.get_str("expert-kind", "running-average"))?;
    let eta_flag = opts.opt_f64("eta")?;
    let sigma_flag = opts.opt_f64("sigma")?;
    let compare = opts.opt_str("compare");
    opts.get_u64("seed", 0)?;
    match algorithm.as_str() {
        "aligator" | "aligator-hedged" | "aligator-heuristic" | "wavelet" => {}
        "holt" => {
            return Err(CliError::Config(
                "holt is a forecaster; use the forecast command".into(),
            ))
        }
        other => return Err(CliError::Config(format!("unknown algorithm '{other}'"))),
    }

    let table = read_table(&input)?;
    let ys = table.require_column("y", &input)?;
    if ys.is_empty() {
        return Err(CliError::Input(format!("{input}: no data rows")));
    }
    let theta = table.column("theta");
    let n = ys.len();

    let estimates: Vec<f64> = match algorithm.as_str() {
        "aligator" => {
            let mut config = AligatorConfig::offline(&ys, expert_kind);
            if let Some(eta) = eta_flag {
                config.eta = eta;
            }
            run_offline(&config, &ys, None)?.estimates
        }
        "aligator-hedged" => {
            let base = eta_flag.unwrap_or_else(|| offline_eta(&ys).unwrap_or(ETA_FALLBACK));
            let grid = build_grid(base, (n as u64).max(2));
            let template = AligatorConfig::offline(&ys, expert_kind);
            run_offline_hedged(&template, &grid, base, &ys, None)?.estimates
        }
        "aligator-heuristic" => {
            let mut config = AligatorConfig::offline(&ys, expert_kind);
            if let Some(eta) = eta_flag {
                config.eta = eta;
            }
            if let Some(sigma) = heuristic_sigma(sigma_flag, &ys) {
                config = config.with_loss_rule(LossRule::ZScore { sigma });
            }
            run_offline(&config, &ys, None)?.estimates
        }
        "wavelet" => wavelet_denoise(&ys, sigma_flag)?,
        _ => unreachable!("algorithm validated above"),
    };

    warn_unused(&opts);
    let mut out = OutputTarget::create(output.as_deref())?;
    for line in opts.header_lines("denoise") {
        out.line(&line)?;
    }
    if theta.is_some() {
        out.line("t,y,estimate,theta,sq_error")?;
    } else {
        out.line("t,y,estimate")?;
    }
    for t in 0..n {
        let mut cells = vec![
            (t + 1).to_string(),
            fmt_f64(ys[t]),
            fmt_f64(estimates[t]),
        ];
        if let Some(th) = &theta {
            let err = (estimates[t] - th[t]) * (estimates[t] - th[t]);
            cells.push(fmt_f64(th[t]));
            cells.push(fmt_f64(err));
        }
        out.line(&row(&cells))?;
    }
    out.finish()?;

    if let Some(th) = &theta {
        let cum: f64 = estimates
            .iter()
            .zip(th)
            .map(|(e, t)| (e - t) * (e - t))
            .sum();
        eprintln!("cumulative squared error: {cum}");
        eprintln!("mse: {}", cum / n as f64);
        if let Some(path) = compare {
            let ext = read_table(&path)?;
            let est = ext.require_column("estimate", &path)?;
            if est.len() != n {
                return Err(CliError::Input(format!(
                    "{path}: {} estimates for {n} samples",
                    est.len()
                )));
            }
            let cum: f64 = est.iter().zip(th).map(|(e, t)| (e - t) * (e - t)).sum();
            eprintln!("comparison cumulative squared error: {cum}");
            eprintln!("comparison mse: {}", cum / n as f64);
        }
    } else if compare.is_some() {
        eprintln!("warning: --compare needs a theta column in the input; skipped");
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

fn builtin_signal(opts: &mut Opts) -> CliResult<Signal> {
    let name = opts.get_str("signal", "doppler");
    let kind = SignalKind::parse(&name).map_err(CliError::from)?;
    let n = opts.require_usize("n")?;
    let amplitude = match opts.opt_f64("target-tv")? {
        Some(tv) => calibrated_scale(&kind.generate(2048, 1.0)?, tv)?,
        None => opts.get_f64("amplitude", 1.0)?,
    };
    Ok(kind.generate(n, amplitude)?)
}

pub fn cmd_simulate(mut opts: Opts) -> CliResult<()> {
    let output = opts.opt_str("output");
    let algorithm = opts.get_str("algorithm", "aligator");
    let expert_kind = parse_expert_kind(&opts.get_str("expert-kind", "running-average"))?;
    let sigma = opts.get_f64("sigma", 0.25)?;
    let seed = opts.get_u64("seed", 0)?;
    let order = opts.get_str("index-order", "isotonic");
    let eta_flag = opts.opt_f64("eta")?;
    let signal_out = opts.opt_str("signal-out");

    // Ground truth from an input CSV's theta column, or a built-in signal.
    let truth: Signal = match opts.opt_str("input") {
        Some(path) => {
            let table = read_table(&path)?;
            let theta = table.require_column("theta", &path)?;
            if theta.is_empty() {
                return Err(CliError::Input(format!("{path}: no data rows")));
            }
            Signal::from_values("csv", theta)
        }
        None => builtin_signal(&mut opts)?,
    };
    let n = truth.len();

    let rounds = opts.opt_usize("rounds")?.unwrap_or(n);
    let indices: Vec<u64> = match order.as_str() {
        "isotonic" => (1..=n as u64).collect(),
        "reverse" => (1..=n as u64).rev().collect(),
        "random-permutation" => {
            let mut idx: Vec<u64> = (1..=n as u64).collect();
            Rng64::with_tag(seed, INDEX_STREAM_TAG).shuffle(&mut idx);
            idx
        }
        "iid-uniform" => {
            let mut rng = Rng64::with_tag(seed, INDEX_STREAM_TAG);
            (0..rounds).map(|_| 1 + rng.next_below(n as u64)).collect()
        }
        other => {
            return Err(CliError::Config(format!(
                "unknown index order '{other}' (isotonic, reverse, random-permutation, iid-uniform)"
            )))
        }
    };
    if order != "iid-uniform" && rounds != n {
        return Err(CliError::Config(
            "--rounds is only meaningful with --index-order iid-uniform".into(),
        ));
    }

    // Fresh noise every round, so repeat queries see new draws; for the
    // isotonic order this matches position-wise noise injection exactly.
    let mut noise_rng = Rng64::new(seed);
    let ys: Vec<f64> = indices
        .iter()
        .map(|&i| truth.values()[(i - 1) as usize] + sigma * noise_rng.next_gaussian())
        .collect();

    let base_eta = eta_flag.unwrap_or_else(|| offline_eta(&ys).unwrap_or(ETA_FALLBACK));
    let trace = match algorithm.as_str() {
        "aligator" => {
            let config = AligatorConfig::new(n as u64, base_eta).with_expert_kind(expert_kind);
            aligator::driver::run_online(&config, &indices, &ys, Some(truth.values()))?
        }
        "aligator-hedged" => {
            let grid = build_grid(base_eta, (n as u64).max(2));
            let template =
                AligatorConfig::new(n as u64, base_eta).with_expert_kind(expert_kind);
            let mut hedged =
                aligator::variants::HedgedAligator::new(&template, &grid, base_eta)?;
            hedged.run(&indices, &ys, Some(truth.values()))?
        }
        "aligator-heuristic" => {
            let mut config =
                AligatorConfig::new(n as u64, base_eta).with_expert_kind(expert_kind);
            if let Some(s) = heuristic_sigma(Some(sigma).filter(|s| *s > 0.0), &ys) {
                config = config.with_loss_rule(LossRule::ZScore { sigma: s });
            }
            aligator::driver::run_online(&config, &indices, &ys, Some(truth.values()))?
        }
        other => {
            return Err(CliError::Config(format!(
                "algorithm '{other}' cannot run the online protocol"
            )))
        }
    };

    warn_unused(&opts);
    if let Some(path) = signal_out {
        let mut sig_out = OutputTarget::create(Some(&path))?;
        sig_out.line("t,theta")?;
        for (t, v) in truth.values().iter().enumerate() {
            sig_out.line(&row(&[(t + 1).to_string(), fmt_f64(*v)]))?;
        }
        sig_out.finish()?;
    }

    let mut out = OutputTarget::create(output.as_deref())?;
    for line in opts.header_lines("simulate") {
        out.line(&line)?;
    }
    out.line("t,i_t,y_t,yhat_t,theta,sq_error,cum_error")?;
    for r in 0..trace.rounds() {
        let i_t = trace.indices[r];
        out.line(&row(&[
            (r + 1).to_string(),
            i_t.to_string(),
            fmt_f64(trace.observations[r]),
            fmt_f64(trace.predictions[r]),
            fmt_f64(truth.values()[(i_t - 1) as usize]),
            fmt_f64(trace.sq_errors[r]),
            fmt_f64(trace.cum_errors[r]),
        ]))?;
    }
    out.finish()?;
    eprintln!("cumulative squared error: {}", trace.cum_error());
    Ok(())
}

// ---------------------------------------------------------------------------
// forecast
// ---------------------------------------------------------------------------

pub fn cmd_forecast(mut opts: Opts) -> CliResult<()> {
    let input = opts.require_str("input")?;
    let output = opts.opt_str("output");
    let algorithm = opts.get_str("algorithm", "aligator-hedged");
    let window = opts.require_usize("window")?;
    let horizon = opts.require_usize("horizon")?;
    let stride = opts.get_usize("stride", 1)?;
    opts.get_u64("seed", 0)?;

    let table = read_table(&input)?;
    let ys = table.require_column("y", &input)?;

    let forecaster = match algorithm.as_str() {
        "aligator" | "aligator-hedged" => {
            let degree = match parse_expert_kind(&opts.get_str("expert-kind", "polynomial:1"))? {
                ExpertKind::Polynomial { degree } => degree,
                ExpertKind::RunningAverage => 0,
            };
            RollingForecaster::HedgedAligator { degree }
        }
        "holt" => RollingForecaster::Holt {
            alpha: opts.get_f64("alpha", 0.5)?,
            beta: opts.get_f64("beta", 0.3)?,
        },
        other => {
            return Err(CliError::Config(format!(
                "algorithm '{other}' cannot forecast (use aligator-hedged or holt)"
            )))
        }
    };
    let config = RollingConfig {
        window,
        horizon,
        stride,
    };
    let report = rolling_eval(&ys, &config, forecaster)?;

    warn_unused(&opts);
    if report.origins.is_empty() {
        eprintln!(
            "warning: series of length {} leaves no origin with a {window}-sample window and {horizon}-step horizon",
            ys.len()
        );
    }
    let mut out = OutputTarget::create(output.as_deref())?;
    for line in opts.header_lines("forecast") {
        out.line(&line)?;
    }
    if let Some(mean) = report.mean_rmse {
        out.line(&format!("# mean_rmse: {mean}"))?;
    }
    out.line("origin,step,forecast,actual,origin_rmse")?;
    for origin in &report.origins {
        for (j, fc) in origin.forecasts.iter().enumerate() {
            out.line(&row(&[
                origin.origin.to_string(),
                (j + 1).to_string(),
                fmt_f64(*fc),
                fmt_f64(ys[origin.origin + j]),
                fmt_f64(origin.rmse),
            ]))?;
        }
    }
    out.finish()?;
    match report.mean_rmse {
        Some(mean) => eprintln!("average rmse over {} origins: {mean}", report.origins.len()),
        None => eprintln!("no origins evaluated"),
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

pub fn cmd_bench(mut opts: Opts) -> CliResult<()> {
    let output = opts.opt_str("output");
    let ns = opts.require_usize_list("ns")?;
    let signal = SignalKind::parse(&opts.get_str("signal", "doppler"))?;
    let sigma = opts.get_f64("sigma", 0.25)?;
    let trials = opts.get_usize("trials", 5)?;
    let seed = opts.get_u64("seed", 0)?;
    let delta = opts.get_f64("delta", aligator::driver::DEFAULT_DELTA)?;
    let mode = match opts.get_str("mode", "online").as_str() {
        "online" => BenchMode::Online,
        "offline" => BenchMode::Offline,
        other => return Err(CliError::Config(format!("unknown mode '{other}'"))),
    };
    let expert_kind = parse_expert_kind(&opts.get_str("expert-kind", "running-average"))?;
    let amplitude = match opts.opt_f64("target-tv")? {
        Some(tv) => calibrated_scale(&signal.generate(2048, 1.0)?, tv)?,
        None => opts.get_f64("amplitude", 1.0)?,
    };
    let algorithms: CliResult<Vec<BenchAlgorithm>> = opts
        .get_str("algorithm", "aligator")
        .split(',')
        .map(|name| BenchAlgorithm::parse(name.trim()).map_err(CliError::from))
        .collect();
    let algorithms = algorithms?;

    let params = BenchParams {
        signal,
        amplitude,
        ns,
        sigma,
        trials,
        algorithms,
        mode,
        seed,
        expert_kind,
        delta,
    };
    let report = rate_study(&params)?;

    warn_unused(&opts);
    let mut out = OutputTarget::create(output.as_deref())?;
    for line in opts.header_lines("bench") {
        out.line(&line)?;
    }
    for (alg, slope) in &report.slopes {
        match slope {
            Some(s) => out.line(&format!("# slope {}: {s}", alg.name()))?,
            None => out.line(&format!("# slope {}: undefined", alg.name()))?,
        }
    }
    out.line("algorithm,n,mean_cum_error,std")?;
    for p in &report.points {
        out.line(&row(&[
            p.algorithm.name().to_string(),
            p.n.to_string(),
            fmt_f64(p.mean_cum_error),
            fmt_f64(p.std),
        ]))?;
    }
    out.finish()
}
