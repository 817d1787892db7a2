//! Optimizer drivers: the batch Lanczos subspace descent loop and SGD baselines.

mod config;
mod driver;
mod linesearch;
mod lnnc;
mod schedule;
mod sgd;
mod trace;

pub use config::{Algorithm, HessianBatch, LineSearchParams, RunConfig, Schedule};
pub use linesearch::{armijo_linesearch, LineSearchOutcome};
pub use lnnc::run_lnnc;
pub use schedule::IndexScheduler;
pub use sgd::run_sgd;
pub use trace::{RunOutcome, TraceRecord};

use crate::error::Result;
use crate::problems::ComponentObjective;

/// Dispatches on `cfg.algorithm`.
pub fn run<O: ComponentObjective + ?Sized>(obj: &O, x0: &[f64], cfg: &RunConfig) -> Result<RunOutcome> {
    match cfg.algorithm {
        Algorithm::Lnnc => run_lnnc(obj, x0, cfg),
        _ => run_sgd(obj, x0, cfg),
    }
}
