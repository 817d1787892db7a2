use std::time::{Duration, Instant};

use super::{IndexScheduler, RunConfig, RunOutcome, TraceRecord};
use crate::error::{Error, Result};
use crate::linalg::{all_finite, axpy, norm};
use crate::problems::{check_dim, full_gradient, full_value, ComponentObjective};

/// What one iteration decided to do.
pub(crate) struct Step {
    pub alpha: f64,
    pub f_after: f64,
    pub slope: f64,
    pub mu: Option<f64>,
    pub fallback_used: bool,
    /// Search direction; ignored when `alpha == 0`.
    pub direction: Vec<f64>,
}

impl Step {
    pub fn none(f_before: f64) -> Self {
        Step {
            alpha: 0.0,
            f_after: f_before,
            slope: 0.0,
            mu: None,
            fallback_used: false,
            direction: Vec::new(),
        }
    }
}

/// Iteration context handed to the per-algorithm step.
pub(crate) struct Iterate<'a> {
    pub k: usize,
    pub j: usize,
    pub x: &'a [f64],
    pub f_before: f64,
    pub g: &'a [f64],
}

/// Shared loop: scheduling, logging, timing, abort handling.
pub(crate) fn drive<O, F>(obj: &O, x0: &[f64], cfg: &RunConfig, mut step: F) -> Result<RunOutcome>
where
    O: ComponentObjective + ?Sized,
    F: FnMut(&Iterate<'_>) -> Result<Step>,
{
    cfg.validate()?;
    check_dim(obj, x0)?;
    if !all_finite(x0) {
        return Err(Error::InvalidArgument("starting point must be finite".into()));
    }
    let m = obj.components();
    let log_every = cfg.log_every.unwrap_or(m);
    let mut scheduler = IndexScheduler::new(cfg.schedule, m, cfg.seed);
    let mut x = x0.to_vec();
    let mut trace = Vec::with_capacity(cfg.k_max);
    let mut aborted = None;
    let mut converged = false;
    let start = Instant::now();
    let mut logging = Duration::ZERO;

    for k in 0..cfg.k_max {
        let j = scheduler.next_index();
        let f_before = obj.value(j, &x);
        let g = obj.gradient(j, &x);
        if !f_before.is_finite() || !all_finite(&g) {
            aborted = Some(format!("iteration {k}: non-finite value or gradient of component {j}"));
            break;
        }
        let s = match step(&Iterate { k, j, x: &x, f_before, g: &g }) {
            Ok(s) => s,
            Err(Error::NonFinite(what)) => {
                aborted = Some(format!("iteration {k}: non-finite {what}"));
                break;
            }
            Err(e) => return Err(e),
        };
        if s.alpha > 0.0 {
            axpy(s.alpha, &s.direction, &mut x);
        }
        if !s.f_after.is_finite() || !all_finite(&x) {
            aborted = Some(format!("iteration {k}: non-finite iterate"));
            break;
        }

        let mut full_f = None;
        if (k + 1) % log_every == 0 || k + 1 == cfg.k_max {
            let t0 = Instant::now();
            let f = full_value(obj, &x)?;
            if !f.is_finite() {
                aborted = Some(format!("iteration {k}: non-finite full objective"));
            }
            full_f = Some(f);
            if let Some(tol) = cfg.full_grad_tol {
                converged = norm(&full_gradient(obj, &x)?) <= tol;
            }
            logging += t0.elapsed();
        }
        trace.push(TraceRecord {
            k,
            j,
            f_j_before: f_before,
            f_j_after: s.f_after,
            full_f,
            alpha: s.alpha,
            mu: s.mu,
            fallback_used: s.fallback_used,
            elapsed: start.elapsed().saturating_sub(logging).as_secs_f64(),
            slope: s.slope,
        });
        if aborted.is_some() || converged {
            break;
        }
    }
    Ok(RunOutcome { trace, x, aborted, converged })
}
