//! Random k-additive bases of `{0, …, n}`.
//!
//! The crate samples random sets under the independent (Bernoulli) and
//! fixed-size models, computes their truncated and modular k-fold sumsets with
//! word-packed shift-OR kernels, and evaluates the closed-form quantities that
//! govern the sharp threshold for the set to be a basis: exact and asymptotic
//! means of the number of uncovered targets, Poisson approximation, the
//! explicit k = 2 coupling, Stein–Chen error terms, and the q-binomial
//! counting identities behind the k ≥ 3 analysis.
//!
//! ```
//! use kbasis::model::{Mode, Model, Sampling};
//! use kbasis::experiments::run_trials;
//!
//! let model = Model::new(200, 2, 0.5, 0.3, Mode::Truncated, Sampling::Bernoulli).unwrap();
//! let stats = run_trials(&model, 50, 7).unwrap();
//! assert_eq!(stats.trials, 50);
//! ```

pub mod analytics;
pub mod bits;
pub mod cli;
pub mod counting;
pub mod coupling;
pub mod error;
pub mod experiments;
pub mod model;
pub mod quadrature;
pub mod report;
pub mod rng;
pub mod sumset;

pub use error::{Error, Result};
