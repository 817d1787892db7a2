//! Mini-batch Lanczos subspace descent.
//!
//! A few Lanczos steps on the Hessian of one mini-batch component give a
//! small tridiagonal model. Its solution yields a Newton direction and its
//! smallest Ritz pair a negative-curvature direction; the two are combined
//! and backtracked on the same component. SGD baselines, a synthetic problem
//! suite and a benchmark harness share the same trace format.

pub mod directions;
pub mod harness;
pub mod error;
pub mod hvp;
pub mod lanczos;
pub mod linalg;
pub mod optimizer;
pub mod problems;
pub mod tridiag;

pub use directions::{assemble_step, compute_directions, DirectionBundle, StepRule};
pub use error::{Error, Result};
pub use hvp::{HessianScope, HvpMode, HvpOperator, LinearOperator};
pub use lanczos::{lanczos, LanczosFactorization};
pub use optimizer::{run, run_lnnc, run_sgd, Algorithm, RunConfig, RunOutcome, TraceRecord};
pub use problems::{ComponentObjective, ProblemKind, ProblemSpec};
