//! Numerical estimation of utility-fairness trade-offs.
//!
//! Given samples of features `X`, a discrete target `Y` and a discrete
//! sensitive attribute `S`, this crate estimates two frontiers in the
//! accuracy/unfairness plane:
//!
//! * the **data-space trade-off** (DST): what an encoder of `X` can reach,
//! * the **label-space trade-off** (LST): what any representation built from
//!   the joint law of `(Y, S)` can reach.
//!
//! Both are traced by sweeping a trade-off weight `λ ∈ [0, 1)` through a
//! kernel dependence objective whose encoder has a closed-form solution as a
//! generalized symmetric eigenproblem ([`encoder::solve_encoder`]), alternated
//! with SGD on a small feature extractor ([`nn`]). External representations are
//! then scored by their distance to the two frontiers ([`tradeoff`]).

pub mod data;
pub mod dependence;
pub mod encoder;
pub mod error;
pub mod kernels;
pub mod linalg;
pub mod metrics;
pub mod nn;
pub mod rng;
pub mod tradeoff;

pub use error::{FateError, Result};
pub use linalg::Matrix;
