use super::LineSearchParams;
use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::problems::{check_point, ComponentObjective};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LineSearchOutcome {
    Accepted { alpha: f64, value: f64, trials: usize },
    Failed { trials: usize },
}

/// Strict Armijo test `f_new < f0 + eta * alpha * slope`. The trace
/// verification repeats this exact expression.
#[inline]
pub(crate) fn armijo_holds(f_new: f64, f0: f64, eta: f64, alpha: f64, slope: f64) -> bool {
    f_new < f0 + eta * alpha * slope
}

/// Backtracking over `alpha0, rho alpha0, rho^2 alpha0, ...` on `f_j`.
///
/// `t` must satisfy `t^T g_j < 0`.
pub fn armijo_linesearch<O: ComponentObjective + ?Sized>(
    obj: &O,
    j: usize,
    x: &[f64],
    t: &[f64],
    g_j: &[f64],
    params: &LineSearchParams,
) -> Result<LineSearchOutcome> {
    check_point(obj, j, x)?;
    params.validate()?;
    if t.len() != x.len() || g_j.len() != x.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), actual: t.len().min(g_j.len()) });
    }
    let slope = dot(t, g_j);
    if !(slope < 0.0) {
        return Err(Error::NotDescent);
    }
    let f0 = obj.value(j, x);
    Ok(backtrack(obj, j, x, t, f0, slope, params))
}

/// Backtracking without the descent precondition; a zero slope asks for
/// plain strict decrease.
pub(crate) fn backtrack<O: ComponentObjective + ?Sized>(
    obj: &O,
    j: usize,
    x: &[f64],
    t: &[f64],
    f0: f64,
    slope: f64,
    params: &LineSearchParams,
) -> LineSearchOutcome {
    let mut alpha = params.alpha0;
    let mut trial = vec![0.0; x.len()];
    for k in 0..params.max_backtracks {
        for ((p, xi), ti) in trial.iter_mut().zip(x).zip(t) {
            *p = xi + alpha * ti;
        }
        let f_new = obj.value(j, &trial);
        if armijo_holds(f_new, f0, params.eta, alpha, slope) {
            return LineSearchOutcome::Accepted { alpha, value: f_new, trials: k + 1 };
        }
        alpha *= params.rho;
    }
    LineSearchOutcome::Failed { trials: params.max_backtracks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::IndefiniteQuadratic;

    fn half_square() -> IndefiniteQuadratic {
        IndefiniteQuadratic::new(vec![1.0], 1).unwrap()
    }

    #[test]
    fn full_step_on_half_square() {
        let p = LineSearchParams { eta: 1e-4, ..Default::default() };
        let r = armijo_linesearch(&half_square(), 0, &[1.0], &[-1.0], &[1.0], &p).unwrap();
        assert_eq!(r, LineSearchOutcome::Accepted { alpha: 1.0, value: 0.0, trials: 1 });
    }

    #[test]
    fn uphill_direction_is_rejected() {
        let p = LineSearchParams::default();
        let r = armijo_linesearch(&half_square(), 0, &[1.0], &[1.0], &[1.0], &p);
        assert!(matches!(r, Err(Error::NotDescent)));
    }

    #[test]
    fn backtracks_past_the_boundary_case() {
        // alpha = 1, 1/2 fail outright; alpha = 1/4 lands on f = 0 against a
        // bound of exactly 0, which the strict test rejects.
        let p = LineSearchParams { eta: 0.5, rho: 0.5, alpha0: 1.0, max_backtracks: 30 };
        let r = armijo_linesearch(&half_square(), 0, &[1.0], &[-4.0], &[1.0], &p).unwrap();
        assert_eq!(r, LineSearchOutcome::Accepted { alpha: 0.125, value: 0.125, trials: 4 });
    }

    #[test]
    fn reports_failure_after_budget() {
        let p = LineSearchParams { eta: 0.5, rho: 0.5, alpha0: 1.0, max_backtracks: 3 };
        let r = armijo_linesearch(&half_square(), 0, &[1.0], &[-4.0], &[1.0], &p).unwrap();
        assert_eq!(r, LineSearchOutcome::Failed { trials: 3 });
    }
}
