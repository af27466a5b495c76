//! Error-rate study harness: cumulative squared error against ground truth
//! as a function of the sample count, averaged over seeded noise trials, with
//! a log-log slope fit per algorithm.

use crate::baselines::{mad_sigma, wavelet_denoise};
use crate::driver::{
    offline_eta, run_offline, run_online, theoretical_eta, AligatorConfig, ExpertKind, LossRule,
    ETA_FALLBACK,
};
use crate::signals::{add_noise, doppler, heavisine, Signal};
use crate::variants::{build_grid, run_offline_hedged, HedgedAligator};
use crate::{Error, Result};

/// Built-in ground-truth generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalKind {
    Doppler,
    Heavisine,
}

impl SignalKind {
    pub fn generate(&self, n: usize, amplitude: f64) -> Result<Signal> {
        match self {
            SignalKind::Doppler => doppler(n, amplitude),
            SignalKind::Heavisine => heavisine(n, amplitude),
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "doppler" => Ok(SignalKind::Doppler),
            "heavisine" => Ok(SignalKind::Heavisine),
            other => Err(Error::Domain(format!("unknown signal '{other}'"))),
        }
    }
}

/// Algorithms the rate study can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchAlgorithm {
    Aligator,
    AligatorHedged,
    AligatorHeuristic,
    Wavelet,
    /// Global running mean of all past observations; the classic linear
    /// estimator whose error rate the adaptive methods beat.
    RunningMean,
}

impl BenchAlgorithm {
    pub fn name(&self) -> &'static str {
        match self {
            BenchAlgorithm::Aligator => "aligator",
            BenchAlgorithm::AligatorHedged => "aligator-hedged",
            BenchAlgorithm::AligatorHeuristic => "aligator-heuristic",
            BenchAlgorithm::Wavelet => "wavelet",
            BenchAlgorithm::RunningMean => "running-mean",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "aligator" => Ok(BenchAlgorithm::Aligator),
            "aligator-hedged" => Ok(BenchAlgorithm::AligatorHedged),
            "aligator-heuristic" => Ok(BenchAlgorithm::AligatorHeuristic),
            "wavelet" => Ok(BenchAlgorithm::Wavelet),
            "running-mean" => Ok(BenchAlgorithm::RunningMean),
            other => Err(Error::Domain(format!("unknown algorithm '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchMode {
    /// Single isotonic pass; error of the online predictions.
    Online,
    /// Forward-backward averaged estimate; error of the estimate.
    Offline,
}

#[derive(Debug, Clone)]
pub struct BenchParams {
    pub signal: SignalKind,
    pub amplitude: f64,
    pub ns: Vec<usize>,
    pub sigma: f64,
    pub trials: usize,
    pub algorithms: Vec<BenchAlgorithm>,
    pub mode: BenchMode,
    pub seed: u64,
    pub expert_kind: ExpertKind,
    /// Failure probability for the theoretical learning rate in online runs.
    pub delta: f64,
}

#[derive(Debug, Clone)]
pub struct BenchPoint {
    pub algorithm: BenchAlgorithm,
    pub n: usize,
    pub mean_cum_error: f64,
    pub std: f64,
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub points: Vec<BenchPoint>,
    /// Log-log slope of mean cumulative error vs n per algorithm; `None`
    /// when any mean vanishes (slope undefined).
    pub slopes: Vec<(BenchAlgorithm, Option<f64>)>,
}

/// Stable per-(n, trial) noise seed so every algorithm sees the same data.
fn trial_seed(seed: u64, n: usize, trial: usize) -> u64 {
    seed ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (trial as u64 + 1).wrapping_mul(0xD134_2543_DE82_EF95)
}

/// Cumulative squared error of one algorithm on one noisy draw.
pub fn cum_error_single(
    algorithm: BenchAlgorithm,
    mode: BenchMode,
    truth: &Signal,
    ys: &[f64],
    sigma: f64,
    expert_kind: ExpertKind,
    delta: f64,
) -> Result<f64> {
    let n = ys.len();
    let indices: Vec<u64> = (1..=n as u64).collect();
    let theta = truth.values();
    match (algorithm, mode) {
        (BenchAlgorithm::RunningMean, _) => {
            // One global mean expert, scored online.
            let (mut sum, mut count, mut cum) = (0.0f64, 0u64, 0.0f64);
            for (t, &y) in ys.iter().enumerate() {
                let pred = if count == 0 { 0.0 } else { sum / count as f64 };
                let d = pred - theta[t];
                cum += d * d;
                sum += y;
                count += 1;
            }
            Ok(cum)
        }
        (BenchAlgorithm::Wavelet, BenchMode::Offline) => {
            let estimate = wavelet_denoise(ys, None)?;
            Ok(estimate
                .iter()
                .zip(theta)
                .map(|(e, t)| (e - t) * (e - t))
                .sum())
        }
        (BenchAlgorithm::Wavelet, BenchMode::Online) => Err(Error::Domain(
            "the wavelet baseline is offline-only".into(),
        )),
        (BenchAlgorithm::Aligator, BenchMode::Online) => {
            let eta =
                theoretical_eta(truth.bound(), sigma, n as u64, delta).unwrap_or(ETA_FALLBACK);
            let config = AligatorConfig::new(n as u64, eta).with_expert_kind(expert_kind);
            Ok(run_online(&config, &indices, ys, Some(theta))?.cum_error())
        }
        (BenchAlgorithm::Aligator, BenchMode::Offline) => {
            let config = AligatorConfig::offline(ys, expert_kind);
            Ok(run_offline(&config, ys, Some(theta))?
                .cum_error
                .expect("truth provided"))
        }
        (BenchAlgorithm::AligatorHedged, BenchMode::Online) => {
            let base =
                theoretical_eta(truth.bound(), sigma, n as u64, delta).unwrap_or(ETA_FALLBACK);
            let grid = build_grid(base, n as u64);
            let template = AligatorConfig::new(n as u64, base).with_expert_kind(expert_kind);
            let mut hedged = HedgedAligator::new(&template, &grid, base)?;
            Ok(hedged.run(&indices, ys, Some(theta))?.cum_error())
        }
        (BenchAlgorithm::AligatorHedged, BenchMode::Offline) => {
            let base = offline_eta(ys).unwrap_or(ETA_FALLBACK);
            let grid = build_grid(base, n as u64);
            let template = AligatorConfig::offline(ys, expert_kind);
            Ok(run_offline_hedged(&template, &grid, base, ys, Some(theta))?
                .cum_error
                .expect("truth provided"))
        }
        (BenchAlgorithm::AligatorHeuristic, mode) => {
            // The z-score rule needs a noise level; estimate it when the
            // configured one is zero, and degrade to the plain rule if the
            // data shows no noise at all.
            let sigma_eff = if sigma > 0.0 {
                sigma
            } else {
                mad_sigma(ys).unwrap_or(0.0)
            };
            let mut config = AligatorConfig::offline(ys, expert_kind);
            if sigma_eff > 0.0 {
                config = config.with_loss_rule(LossRule::ZScore { sigma: sigma_eff });
            }
            match mode {
                BenchMode::Online => {
                    config.n = n as u64;
                    Ok(run_online(&config, &indices, ys, Some(theta))?.cum_error())
                }
                BenchMode::Offline => Ok(run_offline(&config, ys, Some(theta))?
                    .cum_error
                    .expect("truth provided")),
            }
        }
    }
}

/// Runs the full study: per (algorithm, n), the mean and standard deviation
/// of the cumulative error over the trials, plus per-algorithm slopes.
pub fn rate_study(params: &BenchParams) -> Result<BenchReport> {
    if params.ns.is_empty() || params.trials == 0 || params.algorithms.is_empty() {
        return Err(Error::Domain(
            "rate study needs sizes, trials and algorithms".into(),
        ));
    }
    let mut points = Vec::new();
    for &algorithm in &params.algorithms {
        for &n in &params.ns {
            let truth = params.signal.generate(n, params.amplitude)?;
            let mut errors = Vec::with_capacity(params.trials);
            for trial in 0..params.trials {
                let ys = add_noise(&truth, params.sigma, trial_seed(params.seed, n, trial));
                errors.push(cum_error_single(
                    algorithm,
                    params.mode,
                    &truth,
                    &ys,
                    params.sigma,
                    params.expert_kind,
                    params.delta,
                )?);
            }
            let mean = errors.iter().sum::<f64>() / errors.len() as f64;
            let var = errors.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>()
                / errors.len() as f64;
            points.push(BenchPoint {
                algorithm,
                n,
                mean_cum_error: mean,
                std: var.sqrt(),
            });
        }
    }
    let slopes = params
        .algorithms
        .iter()
        .map(|&alg| {
            let series: Vec<(f64, f64)> = points
                .iter()
                .filter(|p| p.algorithm == alg)
                .map(|p| (p.n as f64, p.mean_cum_error))
                .collect();
            (alg, log_log_slope(&series))
        })
        .collect();
    Ok(BenchReport { points, slopes })
}

/// Least-squares slope of `ln y` against `ln x`; undefined when fewer than
/// two points or any `y <= 0`.
pub fn log_log_slope(series: &[(f64, f64)]) -> Option<f64> {
    if series.len() < 2 || series.iter().any(|&(x, y)| x <= 0.0 || y <= 0.0) {
        return None;
    }
    let pts: Vec<(f64, f64)> = series.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(sxy / sxx)
}
