//! First-order solvers for Wasserstein distributionally robust logistic
//! regression (DRLR).
//!
//! The library minimizes
//!
//! ```text
//! Omega(lambda, beta) = lambda*eps
//!     + (1/N) sum_i [ h(y_i b'x_i) + max(y_i b'x_i - lambda*kappa, 0) ]
//!     subject to ||beta||_inf <= lambda,
//! ```
//!
//! with `h(u) = log(1 + exp(-u))`, by golden-section search over the dual
//! radius `lambda` wrapped around a linearized proximal ADMM (LP-ADMM) for
//! the fixed-`lambda` beta-subproblem.  The beta-update inside LP-ADMM is a
//! box-constrained least-squares problem solved by one of three
//! interchangeable solvers ([`boxqp`]).  Four baseline first-order methods
//! for the same subproblem live in [`baselines`], reference classifiers in
//! [`refmodels`], and data ingestion in [`data`].

pub mod baselines;
pub mod boxqp;
pub mod data;
pub mod error;
pub mod loss;
pub mod lpadmm;
pub mod matrix;
pub mod model;
pub mod outer;
pub mod refmodels;
pub mod trace;

pub(crate) mod vecops;

pub use boxqp::BoxQpSolverKind;
pub use data::Rng;
pub use error::{Error, Result};
pub use matrix::Matrix;
pub use model::{Dataset, DrlrConfig, Solution, SolveStatus, SubproblemInstance};
pub use trace::{Trace, TraceRow};
