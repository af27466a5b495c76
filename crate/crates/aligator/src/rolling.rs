//! Rolling-origin forecast evaluation.
//!
//! For each origin, a forecaster is trained on the trailing window, emits an
//! `h`-step forecast, and is scored by the RMSE against the actuals directly
//! after the origin; the origin then advances by the stride. The hedged
//! forecaster sets its learning-rate grid from the data: a probe pass
//! records the largest raw one-step squared loss any expert incurred, the
//! slowest rate becomes `1/(2 beta)`, the grid doubles up from there, and the
//! outer aggregation uses the same slowest rate.

use crate::baselines::{holt_fit, holt_forecast};
use crate::driver::{Aligator, AligatorConfig, ExpertKind, ETA_FALLBACK};
use crate::variants::{build_grid, data_driven_eta, HedgedAligator};
use crate::{Error, Result};

/// Multiple of the window's max |y| used to clip trend extrapolations.
///
/// The default clip (the running max observation) is right for estimation
/// but would flatten any forecast of a still-rising trend; a wide multiple
/// keeps degenerate fits bounded while leaving extrapolation room.
const FORECAST_CLIP_FACTOR: f64 = 8.0;

#[derive(Debug, Clone, Copy)]
pub struct RollingConfig {
    /// Training window length (>= 2).
    pub window: usize,
    /// Forecast horizon (>= 1).
    pub horizon: usize,
    /// Origin advance (>= 1).
    pub stride: usize,
}

/// Which forecaster a rolling evaluation trains at each origin.
#[derive(Debug, Clone, Copy)]
pub enum RollingForecaster {
    /// Hedged learner over polynomial experts with a data-driven grid.
    HedgedAligator { degree: usize },
    /// Holt exponential smoothing.
    Holt { alpha: f64, beta: f64 },
}

#[derive(Debug, Clone)]
pub struct OriginForecast {
    /// 1-based position of the last training sample.
    pub origin: usize,
    pub forecasts: Vec<f64>,
    pub rmse: f64,
}

#[derive(Debug, Clone)]
pub struct RollingReport {
    pub origins: Vec<OriginForecast>,
    /// Average of the per-origin RMSEs; `None` when no origin fit.
    pub mean_rmse: Option<f64>,
}

/// Trains the hedged learner on one window and returns its `h`-step forecast.
///
/// The window is re-indexed so that the last training point lands at
/// `2^m - 1`: cover elements of every scale end exactly there, so the awake
/// set at the cutoff holds local fits of the last 1, 2, 4, ... points. At an
/// arbitrary cutoff the awake set can collapse to the single-point interval
/// (for example at powers of two), which would reduce the forecast to the
/// last observation.
pub fn hedged_window_forecast(window_ys: &[f64], degree: usize, h: usize) -> Result<Vec<f64>> {
    let w = window_ys.len() as u64;
    let cutoff = (w + 1).next_power_of_two() - 1;
    let offset = cutoff - w;
    let nu = window_ys.iter().fold(0.0f64, |m, y| m.max(y.abs()));
    let clip = Some(if nu > 0.0 {
        FORECAST_CLIP_FACTOR * nu
    } else {
        1.0
    });
    let kind = ExpertKind::Polynomial { degree };
    let indices: Vec<u64> = (offset + 1..=cutoff).collect();

    // Probe pass to measure beta; expert predictions do not depend on the
    // learning rate, so any rate serves.
    let probe_config = AligatorConfig::new(cutoff, ETA_FALLBACK)
        .with_expert_kind(kind)
        .with_clip_bound(clip);
    let probe = Aligator::new(probe_config)?.run(&indices, window_ys, None)?;
    let base = data_driven_eta(&probe).unwrap_or(ETA_FALLBACK);

    let grid = build_grid(base, cutoff.max(2));
    let template = AligatorConfig::new(cutoff, base)
        .with_expert_kind(kind)
        .with_clip_bound(clip);
    let mut hedged = HedgedAligator::new(&template, &grid, base)?;
    hedged.run(&indices, window_ys, None)?;
    hedged.forecast(h)
}

/// Rolling-origin evaluation over a series. Origins with less history than
/// the window or without a full horizon of actuals are skipped.
pub fn rolling_eval(
    series: &[f64],
    config: &RollingConfig,
    forecaster: RollingForecaster,
) -> Result<RollingReport> {
    if config.window < 2 {
        return Err(Error::Domain("window must be at least 2".into()));
    }
    if config.horizon < 1 || config.stride < 1 {
        return Err(Error::Domain(
            "horizon and stride must be at least 1".into(),
        ));
    }
    let mut origins = Vec::new();
    let mut t = config.window;
    while t + config.horizon <= series.len() {
        let window_ys = &series[t - config.window..t];
        let forecasts = match forecaster {
            RollingForecaster::HedgedAligator { degree } => {
                hedged_window_forecast(window_ys, degree, config.horizon)?
            }
            RollingForecaster::Holt { alpha, beta } => {
                holt_forecast(&holt_fit(window_ys, alpha, beta)?, config.horizon)
            }
        };
        let actual = &series[t..t + config.horizon];
        let mse = forecasts
            .iter()
            .zip(actual)
            .map(|(f, a)| (f - a) * (f - a))
            .sum::<f64>()
            / config.horizon as f64;
        origins.push(OriginForecast {
            origin: t,
            forecasts,
            rmse: mse.sqrt(),
        });
        t += config.stride;
    }
    let mean_rmse = if origins.is_empty() {
        None
    } else {
        Some(origins.iter().map(|o| o.rmse).sum::<f64>() / origins.len() as f64)
    };
    Ok(RollingReport { origins, mean_rmse })
}
