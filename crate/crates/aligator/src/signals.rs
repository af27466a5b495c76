//! Synthetic test signals, total variation, and seeded Gaussian noise.

use crate::rng::Rng64;
use crate::{Error, Result};

/// A sampled ground-truth signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    name: String,
    values: Vec<f64>,
}

impl Signal {
    pub fn from_values(name: impl Into<String>, values: Vec<f64>) -> Self {
        Signal {
            name: name.into(),
            values,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Total variation of the samples.
    pub fn tv(&self) -> f64 {
        total_variation(&self.values)
    }

    /// Largest absolute sample.
    pub fn bound(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Sum of absolute one-step differences; zero for length <= 1.
pub fn total_variation(values: &[f64]) -> f64 {
    values.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

/// Doppler waveform sampled at `x = t/n`:
/// `amp * sqrt(x (1 - x)) * sin(2 pi 1.05 / (x + 0.05))`.
///
/// Smooth but with oscillation frequency blowing up toward the left edge, so
/// its smoothness is strongly spatially inhomogeneous.
pub fn doppler(n: usize, amplitude_scale: f64) -> Result<Signal> {
    if n < 2 {
        return Err(Error::Domain("signal length must be at least 2".into()));
    }
    let values = (1..=n)
        .map(|t| {
            let x = t as f64 / n as f64;
            amplitude_scale
                * (x * (1.0 - x)).sqrt()
                * (2.0 * std::f64::consts::PI * 1.05 / (x + 0.05)).sin()
        })
        .collect();
    Ok(Signal {
        name: "doppler".into(),
        values,
    })
}

/// Heavisine waveform sampled at `x = t/n`:
/// `amp * (4 sin(4 pi x) - sgn(x - 0.3) - sgn(0.72 - x))`.
///
/// A sine carrying two jump discontinuities, near 30% and 72% of the length.
pub fn heavisine(n: usize, amplitude_scale: f64) -> Result<Signal> {
    if n < 2 {
        return Err(Error::Domain("signal length must be at least 2".into()));
    }
    let sgn = |v: f64| {
        if v > 0.0 {
            1.0
        } else if v < 0.0 {
            -1.0
        } else {
            0.0
        }
    };
    let values = (1..=n)
        .map(|t| {
            let x = t as f64 / n as f64;
            amplitude_scale
                * (4.0 * (4.0 * std::f64::consts::PI * x).sin() - sgn(x - 0.3) - sgn(0.72 - x))
        })
        .collect();
    Ok(Signal {
        name: "heavisine".into(),
        values,
    })
}

/// Amplitude multiplier that makes the signal's sampled total variation hit
/// `target_tv`; exact because total variation is homogeneous in amplitude.
pub fn calibrated_scale(unit_signal: &Signal, target_tv: f64) -> Result<f64> {
    let tv = unit_signal.tv();
    if tv <= 0.0 {
        return Err(Error::Domain(
            "cannot calibrate a constant signal to a positive total variation".into(),
        ));
    }
    Ok(target_tv / tv)
}

/// Adds iid `N(0, sigma^2)` noise from a seeded generator.
pub fn add_noise(signal: &Signal, sigma: f64, seed: u64) -> Vec<f64> {
    let mut rng = Rng64::new(seed);
    signal
        .values
        .iter()
        .map(|&theta| theta + sigma * rng.next_gaussian())
        .collect()
}
