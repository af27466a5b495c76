//! Adaptive estimation and online forecasting of bounded-variation signals.
//!
//! The centerpiece is [`Aligator`], an online learner that aggregates local
//! predictors (running averages or low-degree polynomial fits) attached to a
//! geometric cover of dyadic intervals, using the specialist (sleeping-expert)
//! aggregation rule with exponentially-scaled squared losses. The combination
//! keeps the regret small on every contiguous time window simultaneously,
//! which is what lets it track signals whose total variation is bounded but
//! unknown, without any hyper-parameter tuning.
//!
//! The crate also ships:
//!
//! - [`variants`]: a hedged wrapper that runs a grid of learning rates and
//!   aggregates them with exponentially weighted averaging, plus the z-score
//!   loss scaling and data-driven learning-rate rules used in practice;
//! - [`signals`]: Doppler and Heavisine test waveforms, total-variation
//!   computation, and seeded Gaussian noise;
//! - [`baselines`]: Haar-wavelet universal soft-thresholding (with MAD noise
//!   estimation) and Holt exponential smoothing;
//! - [`oracles`]: executable forms of the constructive arguments behind the
//!   guarantees, used by the test suite as independent checks;
//! - [`rolling`] and [`bench`](mod@bench): rolling-origin forecast evaluation
//!   and the error-rate study harness that back the command-line tool.

pub mod baselines;
pub mod bench;
pub mod cover;
pub mod driver;
pub mod experts;
pub mod oracles;
pub mod rng;
pub mod rolling;
pub mod saa;
pub mod signals;
pub mod variants;

pub use cover::{awake_count_unrestricted, awake_set, is_cover_element, partition};
pub use cover::{CoverPartition, DyadicInterval};
pub use driver::{offline_eta, theoretical_eta, Aligator, AligatorConfig, ExpertKind, RunTrace};
pub use saa::{mixloss, regret_certificate, RoundRecord, SpecialistPool};

use thiserror::Error;

/// Errors shared by every module in the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument lies outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// The step/feed protocol was driven out of order.
    #[error("protocol error: {0}")]
    Protocol(String),
    /// Arithmetic collapsed (all-infinite losses, dead weight mass, ...).
    #[error("numerical error: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
