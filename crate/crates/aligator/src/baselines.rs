//! Comparison methods: Haar-wavelet universal soft thresholding with a MAD
//! noise estimate, and Holt (double) exponential smoothing.
//!
//! The Haar transform uses the orthonormal convention, coefficients
//! `(y1 +/- y2) / sqrt(2)`, so the universal threshold `sigma sqrt(2 ln n)`
//! applies to the detail coefficients with the raw noise level. Signals whose
//! length is not a power of two are reflect-padded on the right (mirror about
//! the last sample, which is not repeated) before the full-depth
//! decomposition; the inverse truncates back.

use crate::{Error, Result};

/// Full-depth decimated Haar analysis of a (possibly padded) signal.
#[derive(Debug, Clone)]
pub struct HaarTransform {
    /// Detail coefficients per level, finest first.
    pub levels: Vec<Vec<f64>>,
    /// Coarsest approximation (a single coefficient once fully decomposed).
    pub approx: Vec<f64>,
    pub original_length: usize,
    pub padded_length: usize,
}

fn reflect_pad(y: &[f64], target: usize) -> Vec<f64> {
    let n = y.len();
    let mut padded = y.to_vec();
    // target < 2n, so the mirror never has to bounce.
    for j in 1..=(target - n) {
        padded.push(y[n - 1 - j]);
    }
    padded
}

/// Forward orthonormal Haar transform to maximal depth on the reflect-padded
/// signal.
pub fn haar_forward(y: &[f64]) -> Result<HaarTransform> {
    if y.is_empty() {
        return Err(Error::Domain("empty signal".into()));
    }
    let n = y.len();
    let padded_length = n.next_power_of_two();
    let mut current = reflect_pad(y, padded_length);
    let mut levels = Vec::new();
    let sqrt2 = std::f64::consts::SQRT_2;
    while current.len() > 1 {
        let half = current.len() / 2;
        let mut approx = Vec::with_capacity(half);
        let mut detail = Vec::with_capacity(half);
        for i in 0..half {
            approx.push((current[2 * i] + current[2 * i + 1]) / sqrt2);
            detail.push((current[2 * i] - current[2 * i + 1]) / sqrt2);
        }
        levels.push(detail);
        current = approx;
    }
    Ok(HaarTransform {
        levels,
        approx: current,
        original_length: n,
        padded_length,
    })
}

/// Inverse of [`haar_forward`], truncated to the original length.
pub fn haar_inverse(transform: &HaarTransform) -> Vec<f64> {
    let sqrt2 = std::f64::consts::SQRT_2;
    let mut current = transform.approx.clone();
    for detail in transform.levels.iter().rev() {
        let mut next = Vec::with_capacity(current.len() * 2);
        for (a, d) in current.iter().zip(detail) {
            next.push((a + d) / sqrt2);
            next.push((a - d) / sqrt2);
        }
        current = next;
    }
    current.truncate(transform.original_length);
    current
}

/// Robust noise level: `median(|finest detail|) / 0.6745`, the Gaussian
/// consistency constant.
pub fn mad_sigma(y: &[f64]) -> Result<f64> {
    if y.len() < 2 {
        return Err(Error::Domain(
            "noise estimation needs at least 2 samples".into(),
        ));
    }
    let transform = haar_forward(y)?;
    let mut magnitudes: Vec<f64> = transform.levels[0].iter().map(|d| d.abs()).collect();
    magnitudes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = magnitudes.len();
    let median = if m % 2 == 1 {
        magnitudes[m / 2]
    } else {
        0.5 * (magnitudes[m / 2 - 1] + magnitudes[m / 2])
    };
    Ok(median / 0.6745)
}

/// Soft shrinkage `sgn(d) max(|d| - lambda, 0)`.
pub fn soft_threshold(d: f64, lambda: f64) -> f64 {
    d.signum() * (d.abs() - lambda).max(0.0)
}

/// Universal soft-thresholding estimate: threshold every detail coefficient
/// at `sigma sqrt(2 ln n)` (sigma MAD-estimated when not supplied), keep the
/// approximation, invert.
pub fn wavelet_denoise(y: &[f64], sigma: Option<f64>) -> Result<Vec<f64>> {
    if y.len() < 2 {
        return Err(Error::Domain("denoising needs at least 2 samples".into()));
    }
    let sigma = match sigma {
        Some(s) if s.is_finite() && s >= 0.0 => s,
        Some(s) => return Err(Error::Domain(format!("invalid sigma {s}"))),
        None => mad_sigma(y)?,
    };
    let lambda = sigma * (2.0 * (y.len() as f64).ln()).sqrt();
    let mut transform = haar_forward(y)?;
    for level in &mut transform.levels {
        for d in level.iter_mut() {
            *d = soft_threshold(*d, lambda);
        }
    }
    Ok(haar_inverse(&transform))
}

/// Level/trend state of Holt exponential smoothing.
#[derive(Debug, Clone, Copy)]
pub struct HoltState {
    pub level: f64,
    pub trend: f64,
    pub alpha: f64,
    pub beta: f64,
}

/// Fits Holt smoothing by the standard recursions
/// `level_t = alpha y_t + (1-alpha)(level + trend)` and
/// `trend_t = beta (level_t - level) + (1-beta) trend`,
/// initialized with `level = y_1`, `trend = y_2 - y_1`.
pub fn holt_fit(y: &[f64], alpha: f64, beta: f64) -> Result<HoltState> {
    if y.len() < 2 {
        return Err(Error::Domain("Holt fitting needs at least 2 samples".into()));
    }
    for p in [alpha, beta] {
        if !(p.is_finite() && p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!(
                "smoothing parameter {p} must lie in (0, 1)"
            )));
        }
    }
    let mut level = y[0];
    let mut trend = y[1] - y[0];
    for &yt in &y[1..] {
        let prev_level = level;
        level = alpha * yt + (1.0 - alpha) * (prev_level + trend);
        trend = beta * (level - prev_level) + (1.0 - beta) * trend;
    }
    Ok(HoltState {
        level,
        trend,
        alpha,
        beta,
    })
}

/// Linear forecasts `level + j * trend` for `j = 1..=h`.
pub fn holt_forecast(state: &HoltState, h: usize) -> Vec<f64> {
    (1..=h as u64)
        .map(|j| state.level + j as f64 * state.trend)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng64;
    use crate::signals;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn haar_two_point_convention() {
        let t = haar_forward(&[1.0, -1.0]).unwrap();
        assert_eq!(t.levels.len(), 1);
        assert_close(t.levels[0][0], std::f64::consts::SQRT_2, 1e-12);
        assert_close(t.approx[0], 0.0, 1e-12);
    }

    #[test]
    fn haar_constant_signal_has_zero_details() {
        let t = haar_forward(&[3.0; 16]).unwrap();
        for level in &t.levels {
            for d in level {
                assert_close(*d, 0.0, 1e-12);
            }
        }
    }

    #[test]
    fn haar_round_trip_various_lengths() {
        let mut rng = Rng64::new(8);
        for &n in &[1usize, 2, 3, 7, 8, 100] {
            let y: Vec<f64> = (0..n).map(|_| rng.next_range(-4.0, 4.0)).collect();
            let back = haar_inverse(&haar_forward(&y).unwrap());
            assert_eq!(back.len(), n);
            for (a, b) in y.iter().zip(&back) {
                assert_close(*a, *b, 1e-10);
            }
        }
    }

    #[test]
    fn haar_energy_conservation_on_padded_signal() {
        let mut rng = Rng64::new(12);
        for &n in &[2usize, 5, 16, 33, 100] {
            let y: Vec<f64> = (0..n).map(|_| rng.next_range(-2.0, 2.0)).collect();
            let padded = reflect_pad(&y, n.next_power_of_two());
            let energy_in: f64 = padded.iter().map(|v| v * v).sum();
            let t = haar_forward(&y).unwrap();
            let energy_out: f64 = t
                .levels
                .iter()
                .flatten()
                .chain(t.approx.iter())
                .map(|c| c * c)
                .sum();
            assert!(
                (energy_in - energy_out).abs() <= 1e-10 * energy_in.max(1.0),
                "n={n}: {energy_in} vs {energy_out}"
            );
        }
    }

    #[test]
    fn mad_sigma_examples() {
        assert_eq!(mad_sigma(&[2.0; 64]).unwrap(), 0.0);
        assert!(mad_sigma(&[1.0]).is_err());

        // Pure unit noise: estimate close to 1.
        let n = 1 << 14;
        let flat = signals::Signal::from_values("flat", vec![0.0; n]);
        let y = signals::add_noise(&flat, 1.0, 31);
        let est = mad_sigma(&y).unwrap();
        assert!((0.95..=1.05).contains(&est), "estimate {est}");

        // Noisy Doppler: the sparse detail coefficients barely move the
        // median.
        let s = signals::doppler(2048, 1.0).unwrap();
        let y = signals::add_noise(&s, 0.25, 9);
        let est = mad_sigma(&y).unwrap();
        assert!((0.2..=0.3).contains(&est), "estimate {est}");
    }

    #[test]
    fn soft_threshold_examples() {
        assert_eq!(soft_threshold(3.0, 1.0), 2.0);
        assert_eq!(soft_threshold(-0.5, 1.0), 0.0);
        assert_eq!(soft_threshold(-3.0, 1.0), -2.0);
        assert_eq!(soft_threshold(0.0, 1.0), 0.0);
    }

    #[test]
    fn wavelet_denoise_fixed_points() {
        // Constant noiseless input passes through.
        let y = vec![4.0; 32];
        let est = wavelet_denoise(&y, Some(0.0)).unwrap();
        for v in &est {
            assert_close(*v, 4.0, 1e-12);
        }

        // Huge sigma kills every detail: the output is the global mean
        // (power-of-two length, so no padding enters the mean).
        let y: Vec<f64> = (0..64).map(|i| (i as f64 * 0.37).sin() + 0.5).collect();
        let mean = y.iter().sum::<f64>() / 64.0;
        let est = wavelet_denoise(&y, Some(1e12)).unwrap();
        for v in &est {
            assert_close(*v, mean, 1e-9);
        }
    }

    #[test]
    fn wavelet_denoise_scale_equivariance() {
        let s = signals::doppler(300, 1.0).unwrap();
        let y = signals::add_noise(&s, 0.3, 17);
        let base = wavelet_denoise(&y, Some(0.3)).unwrap();
        let c = 5.0;
        let scaled_y: Vec<f64> = y.iter().map(|v| c * v).collect();
        let scaled = wavelet_denoise(&scaled_y, Some(c * 0.3)).unwrap();
        for (a, b) in base.iter().zip(&scaled) {
            assert_close(c * a, *b, 1e-9 * b.abs().max(1.0));
        }
    }

    #[test]
    fn holt_exact_on_linear_series() {
        let (a, c) = (3.0, -0.75);
        let n = 40;
        let y: Vec<f64> = (1..=n).map(|t| a + c * t as f64).collect();
        for (alpha, beta) in [(0.5, 0.3), (0.9, 0.1), (0.2, 0.8)] {
            let state = holt_fit(&y, alpha, beta).unwrap();
            let fc = holt_forecast(&state, 5);
            for (j, v) in fc.iter().enumerate() {
                let want = a + c * (n + 1 + j) as f64;
                assert_close(*v, want, 1e-9);
            }
        }
    }

    #[test]
    fn holt_hand_recursion_and_limits() {
        let state = holt_fit(&[1.0, 2.0], 0.4, 0.6).unwrap();
        assert_close(holt_forecast(&state, 1)[0], 3.0, 1e-12);

        // beta -> 0 freezes the initial trend on constant data.
        let state = holt_fit(&[5.0, 5.0, 5.0, 5.0], 0.5, 1e-9).unwrap();
        assert_close(state.trend, 0.0, 1e-6);

        assert!(holt_fit(&[1.0], 0.5, 0.5).is_err());
        assert!(holt_fit(&[1.0, 2.0], 0.0, 0.5).is_err());
        assert!(holt_fit(&[1.0, 2.0], 0.5, 1.0).is_err());
    }

    #[test]
    fn holt_affine_equivariance() {
        let mut rng = Rng64::new(2);
        let y: Vec<f64> = (0..50).map(|_| rng.next_range(-1.0, 1.0)).collect();
        let base = holt_forecast(&holt_fit(&y, 0.5, 0.3).unwrap(), 4);
        let (a, c) = (2.0, -3.0);
        let mapped: Vec<f64> = y.iter().map(|v| a + c * v).collect();
        let fc = holt_forecast(&holt_fit(&mapped, 0.5, 0.3).unwrap(), 4);
        for (orig, got) in base.iter().zip(&fc) {
            assert_close(a + c * orig, *got, 1e-9);
        }
    }
}
