//! Online convex optimization under non-stationary environments.
//!
//! The crate provides:
//!
//! * adaptive online learners (momentum AdaGrad, its multiple-query variant,
//!   the momentum-free baseline, and projected OGD) behind one per-round
//!   stepping interface ([`optimizer`]);
//! * compact feasible regions with weighted projection ([`region`]);
//! * seeded drifting environments: square regression with a piecewise
//!   constant underlying model, and a strongly convex quadratic stream
//!   ([`mod@env`]);
//! * dynamic/static regret and the path-length regularity measures of the
//!   comparator sequence ([`metrics`]);
//! * evaluation of the corresponding dynamic-regret upper bounds
//!   ([`bounds`]);
//! * a seeded experiment harness with CSV outputs and an optional rayon
//!   fan-out over (algorithm, seed) pairs ([`harness`]).

// validation sites use `!(x > 0.0)` so that NaN fails the check too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod env;
pub mod error;
pub mod harness;
pub mod loss;
pub mod metrics;
pub mod optimizer;
pub mod region;
pub mod vector;

pub use error::{Error, Result};
pub use loss::{LossKind, LossRound};
pub use optimizer::{compute_k, AlgorithmKind, Optimizer, OptimizerConfig};
pub use region::FeasibleRegion;
pub use vector::DecisionVector;
