//! The online estimation driver.
//!
//! Each round the adversary reveals a query index, the driver looks up the
//! cover elements awake at that index, fetches their normalized weights from
//! the specialist pool, and predicts the weight-averaged expert prediction.
//! Once the observation arrives, every awake expert is charged the scaled
//! squared loss of the prediction it made *before* seeing the observation,
//! the pool is updated, and only then do the awake experts absorb the
//! observation. That ordering is what the regret accounting relies on and it
//! is fixed here.
//!
//! Per round only the awake experts (at most `floor(log2 n) + 1` of them) are
//! touched, so a full pass costs `O(n log n)`.

use crate::cover::{awake_set, enumerate_cover, DyadicInterval};
use crate::experts::{Expert, PolynomialExpert, RunningAverageExpert, DEFAULT_RIDGE};
use crate::saa::SpecialistPool;
use crate::variants::heuristic_loss;
use crate::{Error, Result};
use std::collections::HashMap;

/// Failure probability used for the theoretical learning rate when the
/// caller does not supply one.
pub const DEFAULT_DELTA: f64 = 0.1;

/// Learning rate when the observations are all zero and the data-driven
/// rates are undefined.
pub const ETA_FALLBACK: f64 = 0.125;

/// Which local predictor is attached to each cover element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpertKind {
    RunningAverage,
    Polynomial { degree: usize },
}

/// How raw squared prediction errors are turned into pool losses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LossRule {
    /// `eta * (y - prediction)^2` with the configured learning rate.
    EtaScaled,
    /// `(y - prediction)^2 / (2 (sigma^2 + sigma^2 / m))` where `m` is the
    /// number of samples the expert has absorbed; a z-score style rescaling
    /// that sharpens the updates of well-estimated experts.
    ZScore { sigma: f64 },
}

#[derive(Debug, Clone)]
pub struct AligatorConfig {
    /// Horizon: query indices live in `[1, n]`.
    pub n: u64,
    /// Learning rate multiplying squared losses under [`LossRule::EtaScaled`].
    pub eta: f64,
    pub expert_kind: ExpertKind,
    /// Clip for polynomial expert evaluations. `None` tracks the running
    /// maximum absolute observation.
    pub clip_bound: Option<f64>,
    /// Recorded for harness reproducibility; the driver itself is
    /// deterministic.
    pub seed: u64,
    pub loss_rule: LossRule,
}

impl AligatorConfig {
    pub fn new(n: u64, eta: f64) -> Self {
        AligatorConfig {
            n,
            eta,
            expert_kind: ExpertKind::RunningAverage,
            clip_bound: None,
            seed: 0,
            loss_rule: LossRule::EtaScaled,
        }
    }

    /// Offline configuration for a fully observed sequence: learning rate
    /// `1/(8 max|y|^2)` (falling back to 1/8 on an all-zero sequence) and the
    /// global maximum as clip bound.
    pub fn offline(ys: &[f64], expert_kind: ExpertKind) -> Self {
        let eta = offline_eta(ys).unwrap_or(ETA_FALLBACK);
        let nu = ys.iter().fold(0.0f64, |m, y| m.max(y.abs()));
        AligatorConfig {
            n: ys.len() as u64,
            eta,
            expert_kind,
            clip_bound: Some(if nu > 0.0 { nu } else { 1.0 }),
            seed: 0,
            loss_rule: LossRule::EtaScaled,
        }
    }

    pub fn with_expert_kind(mut self, kind: ExpertKind) -> Self {
        self.expert_kind = kind;
        self
    }

    pub fn with_loss_rule(mut self, rule: LossRule) -> Self {
        self.loss_rule = rule;
        self
    }

    pub fn with_clip_bound(mut self, clip: Option<f64>) -> Self {
        self.clip_bound = clip;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::Domain("horizon must be at least 1".into()));
        }
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return Err(Error::Domain(format!(
                "learning rate {} must be positive and finite",
                self.eta
            )));
        }
        if let LossRule::ZScore { sigma } = self.loss_rule {
            if !(sigma.is_finite() && sigma > 0.0) {
                return Err(Error::Domain(format!(
                    "z-score loss rule needs a positive sigma, got {sigma}"
                )));
            }
        }
        Ok(())
    }
}

/// Theoretical learning rate `1 / (8 (B + sigma sqrt(ln(2n/delta)))^2)`.
pub fn theoretical_eta(b: f64, sigma: f64, n: u64, delta: f64) -> Result<f64> {
    if !(b.is_finite() && b > 0.0) {
        return Err(Error::Domain(format!("bound B = {b} must be positive")));
    }
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::Domain(format!("sigma = {sigma} must be >= 0")));
    }
    if n < 1 {
        return Err(Error::Domain("horizon must be at least 1".into()));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!("delta = {delta} must lie in (0, 1)")));
    }
    let tail = sigma * (2.0 * n as f64 / delta).ln().sqrt();
    Ok(1.0 / (8.0 * (b + tail) * (b + tail)))
}

/// Data-driven offline learning rate `1 / (8 max|y|^2)`.
pub fn offline_eta(ys: &[f64]) -> Result<f64> {
    if ys.is_empty() {
        return Err(Error::Domain("empty observation sequence".into()));
    }
    let nu = ys.iter().fold(0.0f64, |m, y| m.max(y.abs()));
    if nu == 0.0 {
        return Err(Error::Domain(
            "all-zero observations: learning rate undefined, use the 1/8 fallback".into(),
        ));
    }
    Ok(1.0 / (8.0 * nu * nu))
}

#[derive(Debug, Clone)]
struct Pending {
    index: u64,
    awake: Vec<DyadicInterval>,
    expert_predictions: Vec<f64>,
}

/// Record of a completed run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub indices: Vec<u64>,
    pub predictions: Vec<f64>,
    pub observations: Vec<f64>,
    /// Per-round squared error against the truth when provided, otherwise
    /// against the observation.
    pub sq_errors: Vec<f64>,
    /// Running totals of `sq_errors`; non-decreasing.
    pub cum_errors: Vec<f64>,
    pub truth_provided: bool,
    /// Total awake-expert consultations over the run.
    pub expert_touches: u64,
    /// Largest raw one-step squared loss any expert incurred; feeds the
    /// data-driven learning-rate rule.
    pub max_expert_sq_loss: f64,
}

impl RunTrace {
    pub fn rounds(&self) -> usize {
        self.indices.len()
    }

    pub fn cum_error(&self) -> f64 {
        self.cum_errors.last().copied().unwrap_or(0.0)
    }
}

/// The online learner: specialist pool over the geometric cover plus a
/// lazily grown bank of local experts.
#[derive(Debug, Clone)]
pub struct Aligator {
    config: AligatorConfig,
    pool: SpecialistPool<DyadicInterval>,
    experts: HashMap<DyadicInterval, Expert>,
    pending: Option<Pending>,
    last_fed_index: Option<u64>,
    round: u64,
    nu_hat: f64,
    expert_touches: u64,
    max_expert_sq_loss: f64,
}

impl Aligator {
    pub fn new(config: AligatorConfig) -> Result<Self> {
        config.validate()?;
        let pool = SpecialistPool::new(enumerate_cover(config.n))?;
        Ok(Aligator {
            config,
            pool,
            experts: HashMap::new(),
            pending: None,
            last_fed_index: None,
            round: 1,
            nu_hat: 0.0,
            expert_touches: 0,
            max_expert_sq_loss: 0.0,
        })
    }

    pub fn config(&self) -> &AligatorConfig {
        &self.config
    }

    /// 1-based index of the upcoming round.
    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn expert_touches(&self) -> u64 {
        self.expert_touches
    }

    pub fn max_expert_sq_loss(&self) -> f64 {
        self.max_expert_sq_loss
    }

    /// Pool size `|E|`, the number of cover elements inside the horizon.
    pub fn pool_size(&self) -> usize {
        self.pool.len()
    }

    fn effective_clip(&self) -> f64 {
        self.config.clip_bound.unwrap_or(self.nu_hat)
    }

    /// Predicts for query index `i_t` and leaves the round pending until the
    /// matching [`feed`](Self::feed).
    pub fn step(&mut self, i_t: u64) -> Result<f64> {
        if self.pending.is_some() {
            return Err(Error::Protocol(
                "step called while a round is awaiting feedback".into(),
            ));
        }
        let awake = awake_set(i_t, self.config.n)?;
        let weights = self.pool.weights(&awake)?;
        let clip = self.effective_clip();
        let expert_predictions: Vec<f64> = awake
            .iter()
            .map(|iv| self.experts.get(iv).map_or(0.0, |e| e.predict(i_t, clip)))
            .collect();
        let prediction = weights
            .iter()
            .zip(&expert_predictions)
            .map(|(w, p)| w * p)
            .sum();
        self.expert_touches += awake.len() as u64;
        self.pending = Some(Pending {
            index: i_t,
            awake,
            expert_predictions,
        });
        Ok(prediction)
    }

    /// Feeds back the observation for the pending round: charges the pool
    /// with the pre-observation losses, then routes the observation to the
    /// awake experts.
    pub fn feed(&mut self, y_t: f64) -> Result<()> {
        if self.pending.is_none() {
            return Err(Error::Protocol("feed called without a pending step".into()));
        }
        if !y_t.is_finite() {
            return Err(Error::Domain(format!("non-finite observation {y_t}")));
        }
        let pending = self.pending.take().expect("pending checked above");
        let losses: Vec<f64> = pending
            .awake
            .iter()
            .zip(&pending.expert_predictions)
            .map(|(iv, &p)| {
                let raw = (y_t - p) * (y_t - p);
                self.max_expert_sq_loss = self.max_expert_sq_loss.max(raw);
                match self.config.loss_rule {
                    LossRule::EtaScaled => self.config.eta * raw,
                    LossRule::ZScore { sigma } => {
                        let m = self.experts.get(iv).map_or(0, |e| e.count()).max(1);
                        heuristic_loss(raw, sigma, m)
                    }
                }
            })
            .collect();
        self.pool.update(&pending.awake, &losses)?;
        let kind = self.config.expert_kind;
        for iv in &pending.awake {
            let expert = self
                .experts
                .entry(*iv)
                .or_insert_with(|| kind.instantiate(iv));
            expert.observe(pending.index, y_t)?;
        }
        self.nu_hat = self.nu_hat.max(y_t.abs());
        self.last_fed_index = Some(pending.index);
        self.round += 1;
        Ok(())
    }

    /// Weighted extrapolation `h` steps past the last fed query index, using
    /// the post-update weights of the awake set at that index. A fresh state
    /// forecasts zero.
    pub fn forecast(&self, h: usize) -> Result<Vec<f64>> {
        if h < 1 {
            return Err(Error::Domain("forecast horizon must be at least 1".into()));
        }
        let last = match self.last_fed_index {
            Some(t) => t,
            None => return Ok(vec![0.0; h]),
        };
        let awake = awake_set(last, self.config.n)?;
        let weights = self.pool.weights(&awake)?;
        let clip = self.effective_clip();
        let mut out = Vec::with_capacity(h);
        for j in 1..=h as u64 {
            let value = awake
                .iter()
                .zip(&weights)
                .map(|(iv, w)| {
                    w * self
                        .experts
                        .get(iv)
                        .map_or(0.0, |e| e.extrapolate(last + j, clip))
                })
                .sum();
            out.push(value);
        }
        Ok(out)
    }

    /// Runs the full step/feed loop over aligned query indices and
    /// observations. `truth_by_position`, when given, must cover the horizon
    /// and is indexed by the queried position to score each round.
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
        if let Some(truth) = truth_by_position {
            if (truth.len() as u64) < self.config.n {
                return Err(Error::Domain(
                    "truth sequence shorter than the horizon".into(),
                ));
            }
        }
        let rounds = indices.len();
        let mut predictions = Vec::with_capacity(rounds);
        let mut sq_errors = Vec::with_capacity(rounds);
        let mut cum_errors = Vec::with_capacity(rounds);
        let mut cum = 0.0;
        for (&i_t, &y_t) in indices.iter().zip(ys) {
            let yhat = self.step(i_t)?;
            self.feed(y_t)?;
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
            expert_touches: self.expert_touches,
            max_expert_sq_loss: self.max_expert_sq_loss,
        })
    }
}

impl ExpertKind {
    fn instantiate(&self, interval: &DyadicInterval) -> Expert {
        match *self {
            ExpertKind::RunningAverage => Expert::RunningAverage(RunningAverageExpert::new()),
            ExpertKind::Polynomial { degree } => Expert::Polynomial(PolynomialExpert::new(
                degree,
                interval.start(),
                interval.len(),
                DEFAULT_RIDGE,
            )),
        }
    }
}

/// One-shot online run on a fresh state.
pub fn run_online(
    config: &AligatorConfig,
    indices: &[u64],
    ys: &[f64],
    truth_by_position: Option<&[f64]>,
) -> Result<RunTrace> {
    Aligator::new(config.clone())?.run(indices, ys, truth_by_position)
}

/// Result of the two-direction offline protocol.
#[derive(Debug, Clone)]
pub struct OfflineResult {
    /// Position-wise average of the forward and backward predictions.
    pub estimates: Vec<f64>,
    pub forward: RunTrace,
    pub backward: RunTrace,
    /// Cumulative squared error of `estimates` against the truth, when given.
    pub cum_error: Option<f64>,
}

impl OfflineResult {
    pub fn mse(&self) -> Option<f64> {
        self.cum_error.map(|c| c / self.estimates.len() as f64)
    }
}

/// Offline estimation: one isotonic pass and one reverse-isotonic pass over
/// the same observations on fresh states, averaging the two prediction
/// sequences position by position.
pub fn run_offline(
    config: &AligatorConfig,
    ys: &[f64],
    truth: Option<&[f64]>,
) -> Result<OfflineResult> {
    let n = ys.len();
    if n == 0 {
        return Err(Error::Domain("empty observation sequence".into()));
    }
    if config.n != n as u64 {
        return Err(Error::Domain(format!(
            "config horizon {} does not match sequence length {n}",
            config.n
        )));
    }
    let forward_idx: Vec<u64> = (1..=n as u64).collect();
    let backward_idx: Vec<u64> = (1..=n as u64).rev().collect();
    let backward_ys: Vec<f64> = backward_idx.iter().map(|&i| ys[(i - 1) as usize]).collect();

    let forward = run_online(config, &forward_idx, ys, truth)?;
    let backward = run_online(config, &backward_idx, &backward_ys, truth)?;

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
    Ok(OfflineResult {
        estimates,
        forward,
        backward,
        cum_error,
    })
}
