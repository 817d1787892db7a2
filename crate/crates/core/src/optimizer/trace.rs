use serde::{Deserialize, Serialize};

use super::linesearch::armijo_holds;

/// One iteration of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub k: usize,
    /// Zero-based component index.
    pub j: usize,
    pub f_j_before: f64,
    pub f_j_after: f64,
    /// Full objective after the update, on logging iterations only.
    pub full_f: Option<f64>,
    /// Accepted step length; zero when no step was taken.
    pub alpha: f64,
    /// Smallest Ritz value, for LNNC iterations that ran Lanczos.
    pub mu: Option<f64>,
    pub fallback_used: bool,
    /// Wall-clock seconds since the run started, excluding full-objective logging.
    pub elapsed: f64,
    /// Directional derivative `t^T grad f_j(x)` of the step taken.
    pub slope: f64,
}

impl TraceRecord {
    pub fn step_taken(&self) -> bool {
        self.alpha > 0.0
    }

    /// Re-checks the Armijo inequality from the logged values.
    pub fn satisfies_armijo(&self, eta: f64) -> bool {
        armijo_holds(self.f_j_after, self.f_j_before, eta, self.alpha, self.slope)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub trace: Vec<TraceRecord>,
    pub x: Vec<f64>,
    /// Set when a non-finite value stopped the run.
    pub aborted: Option<String>,
    /// Set when the full-gradient tolerance stopped the run.
    pub converged: bool,
}

impl RunOutcome {
    /// Last logged full objective.
    pub fn final_full_f(&self) -> Option<f64> {
        self.trace.iter().rev().find_map(|r| r.full_f)
    }
}
