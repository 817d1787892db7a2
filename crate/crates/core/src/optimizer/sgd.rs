use super::driver::{drive, Step};
use super::linesearch::{backtrack, LineSearchOutcome};
use super::{Algorithm, RunConfig, RunOutcome};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm};
use crate::problems::ComponentObjective;

/// Stochastic gradient descent on the sampled component, `t = -grad f_j(x)`.
pub fn run_sgd<O: ComponentObjective + ?Sized>(obj: &O, x0: &[f64], cfg: &RunConfig) -> Result<RunOutcome> {
    if cfg.algorithm == Algorithm::Lnnc {
        return Err(Error::InvalidArgument("run_sgd needs an sgd algorithm".into()));
    }
    drive(obj, x0, cfg, |it| {
        let t: Vec<f64> = it.g.iter().map(|v| -v).collect();
        let slope = dot(&t, it.g);
        let alpha = match cfg.algorithm {
            Algorithm::SgdConstant { alpha } => alpha,
            Algorithm::SgdDiminishing { alpha0, k0 } => alpha0 / (1.0 + it.k as f64 / k0),
            Algorithm::SgdLinesearch if norm(it.g) <= cfg.g_tol => return Ok(Step::none(it.f_before)),
            Algorithm::SgdLinesearch => {
                return Ok(
                    match backtrack(obj, it.j, it.x, &t, it.f_before, slope, &cfg.line_search) {
                        LineSearchOutcome::Accepted { alpha, value, .. } => Step {
                            alpha,
                            f_after: value,
                            slope,
                            mu: None,
                            fallback_used: false,
                            direction: t,
                        },
                        LineSearchOutcome::Failed { .. } => {
                            Step { fallback_used: true, ..Step::none(it.f_before) }
                        }
                    },
                );
            }
            Algorithm::Lnnc => unreachable!(),
        };
        let trial: Vec<f64> = it.x.iter().zip(&t).map(|(x, d)| x + alpha * d).collect();
        Ok(Step {
            alpha,
            f_after: obj.value(it.j, &trial),
            slope,
            mu: None,
            fallback_used: false,
            direction: t,
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::IndefiniteQuadratic;

    #[test]
    fn constant_step_on_identity_quadratic() {
        let p = IndefiniteQuadratic::new(vec![1.0, 1.0], 1).unwrap();
        let cfg = RunConfig { k_max: 1, ..RunConfig::with_algorithm(Algorithm::SgdConstant { alpha: 0.5 }) };
        let out = run_sgd(&p, &[1.0, 0.0], &cfg).unwrap();
        assert_eq!(out.x, vec![0.5, 0.0]);
    }

    #[test]
    fn diminishing_schedule() {
        let p = IndefiniteQuadratic::new(vec![1.0], 1).unwrap();
        let cfg = RunConfig {
            k_max: 4,
            ..RunConfig::with_algorithm(Algorithm::SgdDiminishing { alpha0: 1.0, k0: 1.0 })
        };
        let out = run_sgd(&p, &[1.0], &cfg).unwrap();
        let alphas: Vec<f64> = out.trace.iter().map(|r| r.alpha).collect();
        assert_eq!(alphas, vec![1.0, 0.5, 1.0 / 3.0, 0.25]);
    }

    #[test]
    fn line_search_takes_full_step_on_half_square() {
        let p = IndefiniteQuadratic::new(vec![1.0], 1).unwrap();
        let cfg = RunConfig { k_max: 1, ..RunConfig::with_algorithm(Algorithm::SgdLinesearch) };
        let out = run_sgd(&p, &[1.0], &cfg).unwrap();
        assert_eq!(out.trace[0].alpha, 1.0);
        assert_eq!(out.x, vec![0.0]);
    }

    #[test]
    fn rejects_lnnc_config() {
        let p = IndefiniteQuadratic::new(vec![1.0], 1).unwrap();
        assert!(run_sgd(&p, &[1.0], &RunConfig::default()).is_err());
    }
}
