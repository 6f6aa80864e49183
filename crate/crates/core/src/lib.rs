//! Population-level signaling between schools and a Bayesian university.
//!
//! A school privately observes a noisy grade for each student and commits to
//! a signaling scheme mapping observations to an accept/reject
//! recommendation; the university knows the scheme, updates on the signal
//! (and on a public test score, when one exists), and admits every student
//! whose expected quality is non-negative. This crate provides:
//!
//! - [`model`] — parameters, assumption validation, posterior utilities, and
//!   regime classification;
//! - [`schemes`] — the revealing scheme, the utility-maximizing schemes for
//!   each model variant, and the two-signal collapse of finite schemes;
//! - [`metrics`] — closed-form and scheme-evaluated utility, false positive
//!   rate, false negative rate, and university value;
//! - [`analysis`] — comparative-statics bound suites and the parameter
//!   sweeps behind the utility-ratio figures;
//! - [`oracle`] — a seeded Monte Carlo simulator and a brute-force grid
//!   search that independently confirm every closed form at desk scale.

pub mod analysis;
pub mod error;
pub mod metrics;
pub mod model;
pub mod oracle;
pub mod schemes;

pub use error::Error;
pub use metrics::OutcomeMetrics;
pub use model::{AssumptionReport, ModelParams, RegimeClassification, Sign};
pub use schemes::{GeneralScheme, SignalingScheme, Variant};

pub type Result<T> = std::result::Result<T, Error>;
