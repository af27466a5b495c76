//! Specialist aggregation over sleeping experts.
//!
//! A pool of experts keeps one unnormalized weight per expert. Each round an
//! arbitrary subset is awake; the learner plays the normalized restriction of
//! the weights to the awake set, receives one loss per awake expert, and
//! rescales the awake weights by `exp(-loss)` renormalized so the awake mass
//! is unchanged. Sleeping experts keep their weight. The learner's surrogate
//! loss is the mixloss `-log(sum_k w_k exp(-loss_k))`, and the cumulative
//! mixloss regret against any expert over its awake rounds is at most
//! `log(pool size)`.
//!
//! Weights are stored in log space: losses of several hundred would underflow
//! `exp(-loss)` in double precision, while the update itself is exact
//! shift-and-renormalize arithmetic on the logs. A `+inf` loss maps to a
//! `-inf` log weight (the expert's mass is annihilated); a round whose awake
//! mass is entirely annihilated is reported as a numerical error instead of
//! propagating NaN.

use crate::{Error, Result};
use std::collections::HashMap;
use std::hash::Hash;

/// Log-sum-exp with the usual max shift; empty input gives `-inf`.
fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if m == f64::INFINITY {
        return f64::INFINITY;
    }
    m + values.map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// Sleeping-expert pool with mass-conserving multiplicative updates.
#[derive(Debug, Clone)]
pub struct SpecialistPool<K> {
    keys: Vec<K>,
    index: HashMap<K, usize>,
    log_u: Vec<f64>,
    round: u64,
}

/// One observed round: who was awake, the played distribution, the losses,
/// and the resulting mixloss.
#[derive(Debug, Clone)]
pub struct RoundRecord<K> {
    pub awake: Vec<K>,
    pub weights: Vec<f64>,
    pub losses: Vec<f64>,
    pub mixloss: f64,
}

impl<K: Eq + Hash + Clone> SpecialistPool<K> {
    /// Uniform weights `1/|S|` over a non-empty index set.
    pub fn new(index_set: impl IntoIterator<Item = K>) -> Result<Self> {
        let keys: Vec<K> = index_set.into_iter().collect();
        if keys.is_empty() {
            return Err(Error::Domain("empty specialist index set".into()));
        }
        let mut index = HashMap::with_capacity(keys.len());
        for (i, k) in keys.iter().enumerate() {
            if index.insert(k.clone(), i).is_some() {
                return Err(Error::Domain("duplicate specialist key".into()));
            }
        }
        let log_uniform = -(keys.len() as f64).ln();
        let log_u = vec![log_uniform; keys.len()];
        Ok(SpecialistPool {
            keys,
            index,
            log_u,
            round: 1,
        })
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn keys(&self) -> &[K] {
        &self.keys
    }

    /// Current unnormalized weight of one expert.
    pub fn weight_of(&self, key: &K) -> Option<f64> {
        self.index.get(key).map(|&i| self.log_u[i].exp())
    }

    /// Total unnormalized mass; invariant across updates (it starts at 1).
    pub fn total_mass(&self) -> f64 {
        log_sum_exp(self.log_u.iter().copied()).exp()
    }

    fn awake_indices(&self, awake: &[K]) -> Result<Vec<usize>> {
        if awake.is_empty() {
            return Err(Error::Domain("empty awake set".into()));
        }
        awake
            .iter()
            .map(|k| {
                self.index
                    .get(k)
                    .copied()
                    .ok_or_else(|| Error::Domain("awake key not in pool".into()))
            })
            .collect()
    }

    /// Normalized restriction of the weights to the awake set, aligned with
    /// the order of `awake`.
    pub fn weights(&self, awake: &[K]) -> Result<Vec<f64>> {
        let idx = self.awake_indices(awake)?;
        let lse = log_sum_exp(idx.iter().map(|&i| self.log_u[i]));
        if lse == f64::NEG_INFINITY {
            return Err(Error::Numerical(
                "awake mass collapsed: every awake weight is zero".into(),
            ));
        }
        Ok(idx.iter().map(|&i| (self.log_u[i] - lse).exp()).collect())
    }

    /// Multiplicative update: awake weights scale by `exp(-loss)` and are
    /// renormalized to the pre-update awake mass; sleeping weights are
    /// untouched. `losses` is aligned with `awake`.
    pub fn update(&mut self, awake: &[K], losses: &[f64]) -> Result<()> {
        if losses.len() != awake.len() {
            return Err(Error::Domain(
                "losses must be keyed exactly by the awake set".into(),
            ));
        }
        if losses.iter().any(|l| l.is_nan() || *l == f64::NEG_INFINITY) {
            return Err(Error::Domain("losses must lie in (-inf, +inf]".into()));
        }
        let idx = self.awake_indices(awake)?;
        let lse_before = log_sum_exp(idx.iter().map(|&i| self.log_u[i]));
        let lse_after = log_sum_exp(
            idx.iter()
                .zip(losses)
                .map(|(&i, &l)| self.log_u[i] - l),
        );
        if lse_before == f64::NEG_INFINITY || lse_after == f64::NEG_INFINITY {
            return Err(Error::Numerical(
                "awake mass collapsed under the given losses".into(),
            ));
        }
        let shift = lse_before - lse_after;
        for (&i, &l) in idx.iter().zip(losses) {
            self.log_u[i] = self.log_u[i] - l + shift;
        }
        self.round += 1;
        Ok(())
    }

    /// Runs one full round in protocol order (weights, mixloss, update) and
    /// returns its record.
    pub fn play_round(&mut self, awake: &[K], losses: &[f64]) -> Result<RoundRecord<K>> {
        let weights = self.weights(awake)?;
        let ml = mixloss(&weights, losses);
        self.update(awake, losses)?;
        Ok(RoundRecord {
            awake: awake.to_vec(),
            weights,
            losses: losses.to_vec(),
            mixloss: ml,
        })
    }
}

/// Mixloss `-log(sum_k w_k exp(-loss_k))` of a distribution against losses.
///
/// Lies between the smallest and largest loss carrying positive weight;
/// `+inf` only when every positively-weighted loss is `+inf`.
pub fn mixloss(weights: &[f64], losses: &[f64]) -> f64 {
    debug_assert_eq!(weights.len(), losses.len());
    let terms: Vec<f64> = weights
        .iter()
        .zip(losses)
        .map(|(&w, &l)| if w > 0.0 { w.ln() - l } else { f64::NEG_INFINITY })
        .collect();
    -log_sum_exp(terms.iter().copied())
}

/// Cumulative `mixloss - loss_j` over the rounds where `j` was awake.
///
/// The aggregation guarantee is that this never exceeds `log(pool size)`.
pub fn regret_certificate<K: Eq>(trace: &[RoundRecord<K>], j: &K) -> f64 {
    let mut total = 0.0;
    for rec in trace {
        if let Some(pos) = rec.awake.iter().position(|k| k == j) {
            total += rec.mixloss - rec.losses[pos];
        }
    }
    total
}
