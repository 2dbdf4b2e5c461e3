//! Desk-scale laboratory for representation meta-learning over finite task
//! environments.
//!
//! The pieces fit together as follows:
//!
//! * [`mod@env`] builds finite environments (distributions over finitely supported
//!   tasks) and draws task samples and n-by-m meta-samples from them.
//! * [`hypo`] holds the hypothesis machinery: coordinate-selection
//!   representations, grid-quantized affine heads, the bounded loss, and the
//!   exact/empirical risks with the per-task inner minimization.
//! * [`learner`] runs the bi-level loop: outer minimization over
//!   representations, inner minimization over heads per task, meta-testing,
//!   and Monte Carlo transfer-risk estimation.
//! * [`capacity`] computes pseudo-metrics on heads and representations,
//!   epsilon-covers and epsilon-capacities over probe measures, and evaluates
//!   the two sample-size bound formulas.
//! * [`validate`] measures the nu-scaled deviation between empirical and true
//!   losses and estimates how often the deviation exceeds its guaranteed level.
//!
//! All numeric code is generic over the [`Scalar`] type (`f32` or `f64`);
//! the `*64` aliases below fix the common double-precision entry points.

pub mod capacity;
pub mod env;
pub mod error;
pub mod hypo;
pub mod learner;
pub mod rng;
pub mod scalar;
pub mod validate;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Double-precision aliases for the main entry points.
pub type LabeledExample64 = env::LabeledExample<f64>;
pub type FiniteTask64 = env::FiniteTask<f64>;
pub type Environment64 = env::Environment<f64>;
pub type TaskSample64 = env::TaskSample<f64>;
pub type MetaSample64 = env::MetaSample<f64>;
pub type LossFn64 = hypo::LossFn<f64>;
pub type GridSpec64 = hypo::GridSpec<f64>;
pub type FamilySpec64 = hypo::FamilySpec<f64>;
pub type HypothesisFamily64 = hypo::HypothesisFamily<f64>;
pub type MetaKnowledge64 = learner::MetaKnowledge<f64>;
pub type ProbeMeasure64 = capacity::ProbeMeasure<f64>;
pub type BoundParams64 = capacity::BoundParams<f64>;
pub type GuaranteeConfig64<'a> = validate::GuaranteeConfig<'a, f64>;
