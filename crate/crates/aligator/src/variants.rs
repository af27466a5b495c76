//! Practical wrappers around the core driver.
//!
//! The hedged learner runs one driver instance per learning rate on an
//! exponential grid and blends their predictions with exponentially weighted
//! averaging; squared losses are exp-concave for bounded predictions, so the
//! blend provably tracks the best grid point up to `ln(grid size) /
//! outer_eta`. The z-score loss rescaling and the data-driven slowest-rate
//! rule are the knobs used when forecasting real series.

use crate::driver::{Aligator, AligatorConfig, RunTrace};
use crate::{Error, Result};

/// Z-score style loss: `raw / (2 (sigma^2 + sigma^2 / m))`.
///
/// `m` is the number of samples behind the expert's current estimate; an
/// expert that has seen nothing is treated as `m = 1`.
pub fn heuristic_loss(raw_sq_loss: f64, sigma: f64, m: u64) -> f64 {
    let m = m.max(1) as f64;
    raw_sq_loss / (2.0 * (sigma * sigma + sigma * sigma / m))
}

/// Doubling grid from `base_eta` up to and including the first element at or
/// above `max(base_eta, log2 n)`.
pub fn build_grid(base_eta: f64, n: u64) -> Vec<f64> {
    let cap = base_eta.max((n as f64).log2());
    let mut grid = vec![base_eta];
    let mut eta = base_eta;
    while eta < cap {
        eta *= 2.0;
        grid.push(eta);
    }
    grid
}

/// Slowest grid learning rate `1 / (2 beta)` where `beta` is the largest raw
/// one-step squared loss any expert incurred during the recorded run.
pub fn data_driven_eta(trace: &RunTrace) -> Result<f64> {
    let beta = trace.max_expert_sq_loss;
    if beta <= 0.0 {
        return Err(Error::Domain(
            "degenerate run: every expert prediction was exact, rate undefined".into(),
        ));
    }
    Ok(1.0 / (2.0 * beta))
}

/// Grid of driver instances aggregated by exponentially weighted averaging.
#[derive(Debug, Clone)]
pub struct HedgedAligator {
    instances: Vec<Aligator>,
    grid: Vec<f64>,
    outer_eta: f64,
    log_w: Vec<f64>,
    /// Per-instance cumulative squared loss against observations.
    inner_cum_sq: Vec<f64>,
    /// Hedged cumulative squared loss against observations.
    hedged_cum_sq: f64,
}

impl HedgedAligator {
    /// Builds one inner instance per grid learning rate from the template
    /// config (its `eta` is replaced), with uniform outer weights.
    pub fn new(template: &AligatorConfig, grid: &[f64], outer_eta: f64) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::Domain("empty learning-rate grid".into()));
        }
        if !(outer_eta.is_finite() && outer_eta > 0.0) {
            return Err(Error::Domain(format!(
                "outer learning rate {outer_eta} must be positive"
            )));
        }
        let instances = grid
            .iter()
            .map(|&eta| {
                let mut config = template.clone();
                config.eta = eta;
                Aligator::new(config)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(HedgedAligator {
            log_w: vec![0.0; grid.len()],
            inner_cum_sq: vec![0.0; grid.len()],
            hedged_cum_sq: 0.0,
            grid: grid.to_vec(),
            instances,
            outer_eta,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn outer_eta(&self) -> f64 {
        self.outer_eta
    }

    fn outer_weights(&self) -> Vec<f64> {
        let m = self.log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let unnorm: Vec<f64> = self.log_w.iter().map(|&lw| (lw - m).exp()).collect();
        let total: f64 = unnorm.iter().sum();
        unnorm.into_iter().map(|u| u / total).collect()
    }

    /// One protocol round: every instance predicts, the outer layer plays the
    /// weighted average, everyone is fed the observation, and the outer
    /// weights decay with each instance's squared loss.
    pub fn step_feed(&mut self, i_t: u64, y_t: f64) -> Result<f64> {
        let mut preds = Vec::with_capacity(self.instances.len());
        for inst in &mut self.instances {
            preds.push(inst.step(i_t)?);
        }
        let weights = self.outer_weights();
        let prediction: f64 = if self.instances.len() == 1 {
            preds[0]
        } else {
            weights.iter().zip(&preds).map(|(w, p)| w * p).sum()
        };
        for inst in &mut self.instances {
            inst.feed(y_t)?;
        }
        for (k, &p) in preds.iter().enumerate() {
            let sq = (y_t - p) * (y_t - p);
            self.inner_cum_sq[k] += sq;
            self.log_w[k] -= self.outer_eta * sq;
        }
        // Shift logs back toward zero; the softmax is shift-invariant.
        let m = self.log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for lw in &mut self.log_w {
            *lw -= m;
        }
        self.hedged_cum_sq += (y_t - prediction) * (y_t - prediction);
        Ok(prediction)
    }

    /// Full run over aligned indices and observations; the trace scores the
    /// hedged predictions.
    pub fn run(
        &mut self,
        indices: &[u64],
        ys: &[f64],
        truth_by_position: Option<&[f64]>,
    ) -> Result<RunTrace> {
        if indices.len() != ys.len() {
            return Err(Error::Domain(format!(
                "{} indices but {} observations",
                indices.len(),
                ys.len()
            )));
        }
        let mut predictions = Vec::with_capacity(indices.len());
        let mut sq_errors = Vec::with_capacity(indices.len());
        let mut cum_errors = Vec::with_capacity(indices.len());
        let mut cum = 0.0;
        for (&i_t, &y_t) in indices.iter().zip(ys) {
            let yhat = self.step_feed(i_t, y_t)?;
            let target = match truth_by_position {
                Some(truth) => truth[(i_t - 1) as usize],
                None => y_t,
            };
            let err = (yhat - target) * (yhat - target);
            cum += err;
            predictions.push(yhat);
            sq_errors.push(err);
            cum_errors.push(cum);
        }
        Ok(RunTrace {
            indices: indices.to_vec(),
            predictions,
            observations: ys.to_vec(),
            sq_errors,
            cum_errors,
            truth_provided: truth_by_position.is_some(),
            expert_touches: self.instances.iter().map(|i| i.expert_touches()).sum(),
            max_expert_sq_loss: self
                .instances
                .iter()
                .map(|i| i.max_expert_sq_loss())
                .fold(0.0, f64::max),
        })
    }

    /// The aggregation guarantee for the rounds played so far: the hedged
    /// cumulative squared loss against observations, the best inner one, and
    /// the `ln(grid)/outer_eta` slack. The first never exceeds the sum of the
    /// other two.
    pub fn ewa_certificate(&self) -> EwaCertificate {
        let min_inner = self
            .inner_cum_sq
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        EwaCertificate {
            hedged_cum_sq: self.hedged_cum_sq,
            min_inner_cum_sq: min_inner,
            slack: (self.grid.len() as f64).ln() / self.outer_eta,
        }
    }

    /// Outer-weighted blend of the inner forecasts.
    pub fn forecast(&self, h: usize) -> Result<Vec<f64>> {
        if h < 1 {
            return Err(Error::Domain("forecast horizon must be at least 1".into()));
        }
        let weights = self.outer_weights();
        let mut out = vec![0.0; h];
        for (inst, w) in self.instances.iter().zip(&weights) {
            for (slot, v) in out.iter_mut().zip(inst.forecast(h)?) {
                *slot += w * v;
            }
        }
        Ok(out)
    }
}

/// Per-run statement of the outer aggregation guarantee.
#[derive(Debug, Clone, Copy)]
pub struct EwaCertificate {
    pub hedged_cum_sq: f64,
    pub min_inner_cum_sq: f64,
    pub slack: f64,
}

impl EwaCertificate {
    pub fn holds(&self, tol: f64) -> bool {
        self.hedged_cum_sq <= self.min_inner_cum_sq + self.slack + tol
    }
}

/// Offline estimation with the hedged learner: forward and backward hedged
/// passes averaged position by position.
pub fn run_offline_hedged(
    template: &AligatorConfig,
    grid: &[f64],
    outer_eta: f64,
    ys: &[f64],
    truth: Option<&[f64]>,
) -> Result<crate::driver::OfflineResult> {
    let n = ys.len();
    if n == 0 {
        return Err(Error::Domain("empty observation sequence".into()));
    }
    if template.n != n as u64 {
        return Err(Error::Domain(format!(
            "config horizon {} does not match sequence length {n}",
            template.n
        )));
    }
    let forward_idx: Vec<u64> = (1..=n as u64).collect();
    let backward_idx: Vec<u64> = (1..=n as u64).rev().collect();
    let backward_ys: Vec<f64> = backward_idx.iter().map(|&i| ys[(i - 1) as usize]).collect();

    let forward = HedgedAligator::new(template, grid, outer_eta)?.run(&forward_idx, ys, truth)?;
    let backward =
        HedgedAligator::new(template, grid, outer_eta)?.run(&backward_idx, &backward_ys, truth)?;

    let estimates: Vec<f64> = forward
        .predictions
        .iter()
        .zip(backward.predictions.iter().rev())
        .map(|(fwd, bwd)| 0.5 * (fwd + bwd))
        .collect();
    let cum_error = truth.map(|th| {
        estimates
            .iter()
            .zip(th)
            .map(|(e, t)| (e - t) * (e - t))
            .sum()
    });
    Ok(crate::driver::OfflineResult {
        estimates,
        forward,
        backward,
        cum_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driver::{offline_eta, run_online, ExpertKind};
    use crate::signals;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn heuristic_loss_examples() {
        assert_close(heuristic_loss(1.0, 1.0, u64::MAX), 0.5, 1e-9);
        assert_close(heuristic_loss(4.0, 0.5, 1), 4.0, 1e-12);
        assert_eq!(heuristic_loss(0.0, 3.0, 7), 0.0);
        assert_eq!(heuristic_loss(2.0, 1.0, 0), heuristic_loss(2.0, 1.0, 1));
    }

    #[test]
    fn heuristic_loss_monotone_in_sample_count() {
        // The divisor 2(sigma^2 + sigma^2/m) shrinks as m grows, so the loss
        // grows with m and approaches raw/(2 sigma^2) from below.
        let mut prev = 0.0;
        for m in [1u64, 2, 5, 10, 100, 10_000] {
            let l = heuristic_loss(3.0, 0.7, m);
            assert!(l > prev, "m={m}");
            prev = l;
        }
        assert!(prev < 3.0 / (2.0 * 0.49));
    }

    #[test]
    fn build_grid_examples() {
        assert_eq!(build_grid(1.0, 4), vec![1.0, 2.0]);
        assert_eq!(build_grid(16.0, 4), vec![16.0]);
        let g = build_grid(0.04, 1024);
        assert_eq!(g.len(), 9);
        assert_close(g[8], 10.24, 1e-12);
        assert!(g[7] < 10.0 && g[8] >= 10.0);
    }

    #[test]
    fn build_grid_invariants() {
        for &(base, n) in &[(0.01, 16u64), (0.5, 4096), (3.0, 2), (100.0, 1 << 20)] {
            let grid = build_grid(base, n);
            let cap = base.max((n as f64).log2());
            assert_eq!(grid[0], base);
            for w in grid.windows(2) {
                assert_close(w[1], 2.0 * w[0], 1e-12 * w[1].abs());
            }
            assert!(*grid.last().unwrap() >= cap);
            for e in &grid[..grid.len() - 1] {
                assert!(*e < cap);
            }
        }
    }

    #[test]
    fn data_driven_eta_examples() {
        // Constant stream c with zero noise: the only non-zero expert loss is
        // the first-round c^2 against the zero prediction.
        let c = 2.0;
        let n = 32u64;
        let config = AligatorConfig::new(n, 0.5);
        let indices: Vec<u64> = (1..=n).collect();
        let ys = vec![c; n as usize];
        let trace = run_online(&config, &indices, &ys, None).unwrap();
        assert_close(trace.max_expert_sq_loss, c * c, 1e-12);
        assert_close(data_driven_eta(&trace).unwrap(), 1.0 / (2.0 * c * c), 1e-12);

        // Single expert, single raw loss of 0.5 -> rate 1.
        let config = AligatorConfig::new(1, 0.5);
        let y = 0.5f64.sqrt();
        let trace = run_online(&config, &[1], &[y], None).unwrap();
        assert_close(data_driven_eta(&trace).unwrap(), 1.0, 1e-12);

        // Degenerate: all-zero stream, every prediction exact.
        let zeros = vec![0.0; 8];
        let config = AligatorConfig::new(8, 0.5);
        let trace = run_online(&config, &(1..=8).collect::<Vec<_>>(), &zeros, None).unwrap();
        assert!(data_driven_eta(&trace).is_err());
    }

    #[test]
    fn singleton_grid_matches_inner_instance_exactly() {
        let n = 64u64;
        let mut rng = crate::rng::Rng64::new(2);
        let ys: Vec<f64> = (0..n).map(|_| rng.next_range(-1.0, 1.0)).collect();
        let indices: Vec<u64> = (1..=n).collect();
        let config = AligatorConfig::new(n, 0.3);

        let solo = run_online(&config, &indices, &ys, None).unwrap();
        let mut hedged = HedgedAligator::new(&config, &[0.3], 0.3).unwrap();
        let blended = hedged.run(&indices, &ys, None).unwrap();
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&solo.predictions), bits(&blended.predictions));
    }

    #[test]
    fn identical_inner_predictions_keep_uniform_weights() {
        // All instances share the learning rate, so they agree every round
        // and the outer weights stay uniform.
        let n = 32u64;
        let config = AligatorConfig::new(n, 0.5);
        let mut hedged = HedgedAligator::new(&config, &[0.5, 0.5, 0.5], 1.0).unwrap();
        for t in 1..=n {
            let y = (t as f64 * 0.3).sin();
            hedged.step_feed(t, y).unwrap();
            let w = hedged.outer_weights();
            for wk in &w {
                assert_close(*wk, 1.0 / 3.0, 1e-12);
            }
        }
    }

    #[test]
    fn ewa_certificate_on_noisy_doppler() {
        let n = 2048usize;
        let signal = signals::doppler(n, 1.0).unwrap();
        let ys = signals::add_noise(&signal, 0.25, 77);
        let eta = offline_eta(&ys).unwrap();
        let grid = build_grid(eta, n as u64);
        let template = AligatorConfig::offline(&ys, ExpertKind::RunningAverage);
        let mut hedged = HedgedAligator::new(&template, &grid, eta).unwrap();
        let indices: Vec<u64> = (1..=n as u64).collect();
        hedged.run(&indices, &ys, Some(signal.values())).unwrap();
        let cert = hedged.ewa_certificate();
        assert!(
            cert.holds(1e-9),
            "hedged {} vs min inner {} + slack {}",
            cert.hedged_cum_sq,
            cert.min_inner_cum_sq,
            cert.slack
        );
    }

    #[test]
    fn offline_hedged_matches_shapes() {
        let n = 128usize;
        let signal = signals::heavisine(n, 1.0).unwrap();
        let ys = signals::add_noise(&signal, 0.3, 5);
        let eta = offline_eta(&ys).unwrap();
        let grid = build_grid(eta, n as u64);
        let template = AligatorConfig::offline(&ys, ExpertKind::RunningAverage);
        let result =
            run_offline_hedged(&template, &grid, eta, &ys, Some(signal.values())).unwrap();
        assert_eq!(result.estimates.len(), n);
        assert!(result.cum_error.unwrap().is_finite());
    }
}
