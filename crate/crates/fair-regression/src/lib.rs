//! Fair regression for continuous outcomes.
//!
//! Linear spending/outcome models are routinely evaluated only on global fit,
//! which hides systematic underprediction for specific groups. This crate
//! provides:
//!
//! * six least-squares estimators that trade a little global fit for group
//!   fairness (plain OLS, average constrained, weighted average constrained,
//!   covariance constrained, mean-residual-difference penalized, and net
//!   compensation penalized/constrained), all solved exactly through small
//!   KKT / normal-equation systems ([`estimators`], [`solver`]);
//! * a suite of group fairness measures (net compensation, mean residual
//!   difference, predictive ratios, residual covariance with the group
//!   indicator, R²) plus a pairwise group residual difference for small N
//!   ([`metrics`]);
//! * a k-fold cross-validation harness and grid runner that scores every
//!   estimator on pooled out-of-fold predictions with shared folds
//!   ([`eval`]);
//! * seeded synthetic data generators: a 100,000-row simulation population
//!   with two protected classes and three misspecification scenarios, and a
//!   two-part (any-spending × log-linear) health spending dataset
//!   ([`synth`]).
//!
//! Everything is deterministic given a seed; the generators use a
//! counter-based RNG with one substream per column so adding a column never
//! perturbs the others.
//!
//! See the `examples/` directory for runnable walkthroughs of each piece and
//! the `fairreg` binary for a batch CLI.

pub mod cli;
pub mod data;
pub mod error;
pub mod estimators;
pub mod eval;
pub mod metrics;
pub mod rng;
pub mod solver;
pub mod synth;

pub use data::{Dataset, FitResult, FitSpec, GroupView};
pub use error::Error;
pub use estimators::Estimator;
pub use metrics::MetricsReport;

/// Crate result type.
pub type Result<T> = std::result::Result<T, Error>;
