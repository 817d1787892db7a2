use std::fmt;

use serde::{Deserialize, Serialize};

use crate::directions::{StepRule, DEFAULT_TAU_DESC, DEFAULT_TAU_NC};
use crate::error::{Error, Result};
use crate::hvp::{FdSettings, HvpMode};
use crate::lanczos::DEFAULT_BREAKDOWN_TOL;
use crate::tridiag::DEFAULT_PINV_TOL;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Algorithm {
    Lnnc,
    SgdConstant { alpha: f64 },
    /// `alpha_k = alpha0 / (1 + k / k0)`
    SgdDiminishing { alpha0: f64, k0: f64 },
    /// Armijo backtracking on the sampled component.
    SgdLinesearch,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Lnnc => "lnnc",
            Algorithm::SgdConstant { .. } => "sgd_constant",
            Algorithm::SgdDiminishing { .. } => "sgd_diminishing",
            Algorithm::SgdLinesearch => "sgd_linesearch",
        }
    }

    /// Whether every taken step passed the Armijo test.
    pub fn uses_line_search(&self) -> bool {
        matches!(self, Algorithm::Lnnc | Algorithm::SgdLinesearch)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    RoundRobin,
    /// Uniform draws from a generator seeded with the run seed.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HessianBatch {
    /// Hessian of the sampled component only.
    MiniBatch,
    /// Hessian of the full sum.
    FullBatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineSearchParams {
    pub eta: f64,
    pub rho: f64,
    pub alpha0: f64,
    pub max_backtracks: usize,
}

impl Default for LineSearchParams {
    fn default() -> Self {
        LineSearchParams { eta: 1e-4, rho: 0.5, alpha0: 1.0, max_backtracks: 30 }
    }
}

impl LineSearchParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::InvalidArgument(format!("eta must lie in (0, 1), got {}", self.eta)));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::InvalidArgument(format!("rho must lie in (0, 1), got {}", self.rho)));
        }
        if !(self.alpha0 > 0.0 && self.alpha0.is_finite()) {
            return Err(Error::InvalidArgument(format!("alpha0 must be positive, got {}", self.alpha0)));
        }
        if self.max_backtracks == 0 {
            return Err(Error::InvalidArgument("max_backtracks must be positive".into()));
        }
        Ok(())
    }
}

/// Everything a single optimizer run depends on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    pub k_max: usize,
    /// Requested Lanczos steps; clamped to the problem dimension.
    pub q: usize,
    pub schedule: Schedule,
    /// Seeds the random schedule and the curvature probe.
    pub seed: u64,
    pub step_rule: StepRule,
    pub line_search: LineSearchParams,
    pub hvp_mode: HvpMode,
    pub fd: FdSettings,
    pub hessian: HessianBatch,
    pub breakdown_tol: f64,
    pub pinv_tol: f64,
    pub tau_nc: f64,
    pub tau_desc: f64,
    /// Sampled gradients at or below this norm trigger a curvature probe
    /// instead of a Lanczos run seeded with the gradient.
    pub g_tol: f64,
    /// Stop once the full gradient norm falls to this level (checked when the
    /// full objective is logged).
    pub full_grad_tol: Option<f64>,
    /// Full-objective logging period; `None` means once per epoch.
    pub log_every: Option<usize>,
    /// Starting point; `None` uses the problem's default.
    pub x0: Option<Vec<f64>>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            algorithm: Algorithm::Lnnc,
            k_max: 1000,
            q: 5,
            schedule: Schedule::RoundRobin,
            seed: 0,
            step_rule: StepRule::SPlusD,
            line_search: LineSearchParams::default(),
            hvp_mode: HvpMode::Auto,
            fd: FdSettings::default(),
            hessian: HessianBatch::MiniBatch,
            breakdown_tol: DEFAULT_BREAKDOWN_TOL,
            pinv_tol: DEFAULT_PINV_TOL,
            tau_nc: DEFAULT_TAU_NC,
            tau_desc: DEFAULT_TAU_DESC,
            g_tol: 1e-12,
            full_grad_tol: None,
            log_every: None,
            x0: None,
        }
    }
}

impl RunConfig {
    pub fn with_algorithm(algorithm: Algorithm) -> Self {
        RunConfig { algorithm, ..Default::default() }
    }

    /// Short human-readable label, e.g. `sgd_constant(alpha=0.1)`.
    pub fn label(&self) -> String {
        match self.algorithm {
            Algorithm::Lnnc => format!("lnnc(q={},{})", self.q, self.step_rule),
            Algorithm::SgdConstant { alpha } => format!("sgd_constant(alpha={alpha})"),
            Algorithm::SgdDiminishing { alpha0, k0 } => {
                format!("sgd_diminishing(alpha0={alpha0},k0={k0})")
            }
            Algorithm::SgdLinesearch => "sgd_linesearch".to_string(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_max == 0 {
            return Err(Error::InvalidArgument("k_max must be positive".into()));
        }
        if self.q == 0 {
            return Err(Error::InvalidArgument("q must be positive".into()));
        }
        self.line_search.validate()?;
        if !(self.fd.eps0 > 0.0 && self.fd.eps0.is_finite()) {
            return Err(Error::InvalidArgument("eps0 must be positive".into()));
        }
        for (name, v) in [
            ("breakdown_tol", self.breakdown_tol),
            ("pinv_tol", self.pinv_tol),
            ("tau_nc", self.tau_nc),
            ("tau_desc", self.tau_desc),
            ("g_tol", self.g_tol),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be non-negative, got {v}")));
            }
        }
        if let Some(t) = self.full_grad_tol {
            if !(t >= 0.0) {
                return Err(Error::InvalidArgument("full_grad_tol must be non-negative".into()));
            }
        }
        if self.log_every == Some(0) {
            return Err(Error::InvalidArgument("log_every must be positive".into()));
        }
        match self.algorithm {
            Algorithm::SgdConstant { alpha } if !(alpha > 0.0 && alpha.is_finite()) => {
                Err(Error::InvalidArgument(format!("sgd alpha must be positive, got {alpha}")))
            }
            Algorithm::SgdDiminishing { alpha0, k0 }
                if !(alpha0 > 0.0 && alpha0.is_finite() && k0 > 0.0 && k0.is_finite()) =>
            {
                Err(Error::InvalidArgument("sgd alpha0 and k0 must be positive".into()))
            }
            _ => Ok(()),
        }
    }
}
