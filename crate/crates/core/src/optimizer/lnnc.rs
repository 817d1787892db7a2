//! Batch Lanczos subspace descent.
//!
//! Each iteration picks a component `j`, runs `q` Lanczos steps on the
//! Hessian seeded with `grad f_j(x)`, forms the Newton direction `s`, the
//! filtered direction `s_tilde` and the negative-curvature direction `d`,
//! combines them into `t` and backtracks on `f_j`.
//!
//! When `t` vanishes or is not a descent direction, or its line search fails,
//! the driver tries `d` alone (if present) and then `-g`; if every candidate
//! fails the iteration leaves `x` unchanged. A sampled gradient at or below
//! `g_tol` triggers a Lanczos run from a seeded probe vector: negative
//! curvature found there is followed with a strict-decrease search,
//! otherwise the iteration records convergence for that component.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::driver::{drive, Iterate, Step};
use super::linesearch::{backtrack, LineSearchOutcome};
use super::{HessianBatch, RunConfig, RunOutcome};
use crate::directions::{assemble_step, compute_directions, negative_curvature_direction, DirectionSettings};
use crate::error::{Error, Result};
use crate::hvp::{HessianScope, HvpOperator};
use crate::lanczos::{lanczos, LanczosFactorization};
use crate::linalg::{dot, norm};
use crate::problems::ComponentObjective;

pub fn run_lnnc<O: ComponentObjective + ?Sized>(obj: &O, x0: &[f64], cfg: &RunConfig) -> Result<RunOutcome> {
    let q = cfg.q.min(obj.dim());
    let settings = DirectionSettings { pinv_tol: cfg.pinv_tol, tau_nc: cfg.tau_nc };
    drive(obj, x0, cfg, |it| {
        let scope = match cfg.hessian {
            HessianBatch::MiniBatch => HessianScope::Component(it.j),
            HessianBatch::FullBatch => HessianScope::Full,
        };
        let op = HvpOperator::with_mode(obj, scope, it.x, cfg.hvp_mode, cfg.fd)?;

        if norm(it.g) <= cfg.g_tol {
            return probe_step(obj, it, cfg, &op, q);
        }

        let fact = lanczos(&op, it.g, q, cfg.breakdown_tol)?;
        let mut candidates: Vec<Vec<f64>> = Vec::with_capacity(3);
        let mut fallback_used = false;
        let (d, mu) = match compute_directions(&fact, &settings) {
            Ok(bundle) => {
                let choice = assemble_step(&bundle, cfg.step_rule, cfg.tau_desc);
                if choice.degeneracy.is_none() {
                    candidates.push(choice.t);
                } else {
                    fallback_used = true;
                }
                (bundle.d, bundle.mu)
            }
            Err(Error::SingularTridiagonal) => {
                fallback_used = true;
                let (d, mu, _) = negative_curvature_direction(&fact, it.g, settings.tau_nc);
                (d, mu)
            }
            Err(e) => return Err(e),
        };
        if d.iter().any(|v| *v != 0.0) {
            candidates.push(d);
        }
        candidates.push(it.g.iter().map(|v| -v).collect());

        for (rank, t) in candidates.into_iter().enumerate() {
            let slope = dot(&t, it.g);
            if slope > 0.0 {
                continue;
            }
            if let LineSearchOutcome::Accepted { alpha, value, .. } =
                backtrack(obj, it.j, it.x, &t, it.f_before, slope, &cfg.line_search)
            {
                return Ok(Step {
                    alpha,
                    f_after: value,
                    slope,
                    mu: Some(mu),
                    fallback_used: fallback_used || rank > 0,
                    direction: t,
                });
            }
        }
        Ok(Step { mu: Some(mu), fallback_used: true, ..Step::none(it.f_before) })
    })
}

/// Deterministic unit vector for iteration `k`.
fn probe_vector(seed: u64, k: usize, dim: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (k as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let n = norm(&v);
    v.into_iter().map(|x| x / n).collect()
}

fn probe_step<O: ComponentObjective + ?Sized>(
    obj: &O,
    it: &Iterate<'_>,
    cfg: &RunConfig,
    op: &HvpOperator<'_, O>,
    q: usize,
) -> Result<Step> {
    let probe = probe_vector(cfg.seed, it.k, it.x.len());
    let fact: LanczosFactorization = lanczos(op, &probe, q, cfg.breakdown_tol)?;
    let (d, mu, _) = negative_curvature_direction(&fact, it.g, cfg.tau_nc);
    if d.iter().all(|v| *v == 0.0) {
        return Ok(Step { mu: Some(mu), ..Step::none(it.f_before) });
    }
    let slope = dot(&d, it.g);
    match backtrack(obj, it.j, it.x, &d, it.f_before, slope, &cfg.line_search) {
        LineSearchOutcome::Accepted { alpha, value, .. } => Ok(Step {
            alpha,
            f_after: value,
            slope,
            mu: Some(mu),
            fallback_used: false,
            direction: d,
        }),
        LineSearchOutcome::Failed { .. } => Ok(Step { mu: Some(mu), fallback_used: true, ..Step::none(it.f_before) }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::Algorithm;
    use crate::problems::{full_gradient, IndefiniteQuadratic};

    fn cfg(k_max: usize, q: usize) -> RunConfig {
        RunConfig { k_max, q, ..RunConfig::with_algorithm(Algorithm::Lnnc) }
    }

    #[test]
    fn exact_newton_step_on_convex_quadratic() {
        let p = IndefiniteQuadratic::new(vec![2.0, 4.0], 1).unwrap();
        let out = run_lnnc(&p, &[1.0, 1.0], &cfg(1, 2)).unwrap();
        assert!(out.x.iter().all(|v| v.abs() < 1e-8), "{:?}", out.x);
        assert_eq!(out.trace[0].alpha, 1.0);
        assert!(!out.trace[0].fallback_used);
    }

    #[test]
    fn zero_gradient_start_is_left_alone() {
        let p = IndefiniteQuadratic::new(vec![2.0, 4.0], 1).unwrap();
        let out = run_lnnc(&p, &[0.0, 0.0], &cfg(3, 2)).unwrap();
        assert_eq!(out.x, vec![0.0, 0.0]);
        assert!(out.trace.iter().all(|r| r.alpha == 0.0 && r.f_j_after == r.f_j_before));
        assert!(out.trace.iter().all(|r| r.mu.unwrap() > 0.0));
    }

    #[test]
    fn exact_saddle_point_is_escaped_by_probe() {
        let p = IndefiniteQuadratic::new(vec![1.0, -1.0], 1).unwrap();
        let out = run_lnnc(&p, &[0.0, 0.0], &cfg(5, 2)).unwrap();
        assert!(out.final_full_f().unwrap() < 0.0);
        assert!(out.trace[0].alpha > 0.0);
    }

    #[test]
    fn saddle_run_takes_curvature_fallback() {
        let p = IndefiniteQuadratic::new(vec![1.0, -1.0], 1).unwrap();
        let out = run_lnnc(&p, &[1.0, 1e-6], &cfg(20, 2)).unwrap();
        assert!(out.final_full_f().unwrap() <= -10.0);
        assert!(out.trace.iter().skip(1).any(|r| r.fallback_used));
        for r in &out.trace {
            assert!(r.satisfies_armijo(1e-4));
        }
        let g = full_gradient(&p, &out.x).unwrap();
        assert!(g[1].abs() > 1.0);
    }
}
