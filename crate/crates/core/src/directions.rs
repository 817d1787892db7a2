//! Candidate search directions extracted from a Lanczos factorization and the
//! rules that combine them into a step.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lanczos::{tridiag_min_eigenpair, tridiag_solve, LanczosFactorization};
use crate::linalg::{dot, norm, scale};
use crate::tridiag::SolveFilter;

/// Default coefficient `c` of the curvature threshold `c * (1 + |alpha_1|)`.
pub const DEFAULT_TAU_NC: f64 = 1e-8;
pub const DEFAULT_TAU_DESC: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    /// `t = s + d`
    SPlusD,
    /// `t = s + ||s|| d / ||d||`
    SPlusScaledD,
    /// `t = s_tilde + d`
    StildePlusD,
}

impl StepRule {
    pub fn as_str(&self) -> &'static str {
        match self {
            StepRule::SPlusD => "s_plus_d",
            StepRule::SPlusScaledD => "s_plus_scaled_d",
            StepRule::StildePlusD => "stilde_plus_d",
        }
    }
}

impl fmt::Display for StepRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StepRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "s_plus_d" => Ok(StepRule::SPlusD),
            "s_plus_scaled_d" => Ok(StepRule::SPlusScaledD),
            "stilde_plus_d" => Ok(StepRule::StildePlusD),
            other => Err(Error::Unknown { what: "step rule", value: other.to_string() }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectionBundle {
    /// Approximate Newton direction.
    pub s: Vec<f64>,
    /// Newton direction restricted to non-negative diagonal entries of `T`.
    pub s_tilde: Vec<f64>,
    /// Unit negative-curvature direction, or all zeros.
    pub d: Vec<f64>,
    pub mu: f64,
    /// `beta_{q+1} |w_q|`.
    pub ritz_residual_bound: f64,
    /// Seed gradient the directions were computed for.
    pub g: Vec<f64>,
}

impl DirectionBundle {
    pub fn has_negative_curvature(&self) -> bool {
        self.d.iter().any(|v| *v != 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Degeneracy {
    /// `||t||` is negligible relative to `1 + ||s||`.
    Vanishing,
    /// `t^T g > -tau_desc ||t|| ||g||`.
    NotDescent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepChoice {
    pub rule: StepRule,
    pub t: Vec<f64>,
    pub degeneracy: Option<Degeneracy>,
}

/// Thresholds used when turning a factorization into directions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionSettings {
    pub pinv_tol: f64,
    /// Coefficient of the curvature threshold `tau_nc * (1 + |alpha_1|)`.
    pub tau_nc: f64,
}

impl Default for DirectionSettings {
    fn default() -> Self {
        DirectionSettings { pinv_tol: crate::tridiag::DEFAULT_PINV_TOL, tau_nc: DEFAULT_TAU_NC }
    }
}

/// `s = V y` with `T y = -V^T g`.
pub fn newton_direction(fact: &LanczosFactorization, g: &[f64], pinv_tol: f64) -> Result<Vec<f64>> {
    let rhs: Vec<f64> = fact.project(g).into_iter().map(|v| -v).collect();
    let sol = tridiag_solve(fact, &rhs, SolveFilter::None, pinv_tol)?;
    Ok(fact.lift(&sol.y))
}

/// Newton direction on the basis columns whose diagonal entry of `T` is non-negative.
pub fn filtered_direction(fact: &LanczosFactorization, g: &[f64], pinv_tol: f64) -> Vec<f64> {
    let rhs: Vec<f64> = fact.project(g).into_iter().map(|v| -v).collect();
    match tridiag_solve(fact, &rhs, SolveFilter::DropNegativeDiagonal, pinv_tol) {
        Ok(sol) => fact.lift(&sol.y),
        Err(_) => vec![0.0; fact.dim()],
    }
}

/// Returns `(d, mu, ritz_residual_bound)`. `d` is zero unless
/// `mu < -tau_nc * (1 + |alpha_1|)`, and otherwise oriented so `d^T g <= 0`.
pub fn negative_curvature_direction(
    fact: &LanczosFactorization,
    g: &[f64],
    tau_nc: f64,
) -> (Vec<f64>, f64, f64) {
    let pair = tridiag_min_eigenpair(fact);
    let last = *pair.w.last().expect("non-empty eigenvector");
    let bound = fact.beta_next * last.abs();
    let threshold = tau_nc * (1.0 + fact.alpha[0].abs());
    if pair.mu >= -threshold {
        return (vec![0.0; fact.dim()], pair.mu, bound);
    }
    let mut d = fact.lift(&pair.w);
    if dot(&d, g) > 0.0 {
        d.iter_mut().for_each(|v| *v = -*v);
    }
    (d, pair.mu, bound)
}

/// All three candidate directions for the factorization seeded with `fact.seed`.
pub fn compute_directions(
    fact: &LanczosFactorization,
    settings: &DirectionSettings,
) -> Result<DirectionBundle> {
    let g = &fact.seed;
    let s = newton_direction(fact, g, settings.pinv_tol)?;
    let all_kept = fact.alpha.iter().all(|a| *a >= 0.0);
    let s_tilde = if all_kept { s.clone() } else { filtered_direction(fact, g, settings.pinv_tol) };
    let (d, mu, ritz_residual_bound) = negative_curvature_direction(fact, g, settings.tau_nc);
    Ok(DirectionBundle { s, s_tilde, d, mu, ritz_residual_bound, g: g.clone() })
}

/// Combines the bundle according to `rule` and flags degenerate results.
pub fn assemble_step(bundle: &DirectionBundle, rule: StepRule, tau_desc: f64) -> StepChoice {
    let d_norm = norm(&bundle.d);
    let t: Vec<f64> = match rule {
        StepRule::SPlusD => bundle.s.iter().zip(&bundle.d).map(|(a, b)| a + b).collect(),
        StepRule::SPlusScaledD => {
            if d_norm == 0.0 {
                bundle.s.clone()
            } else {
                let c = norm(&bundle.s) / d_norm;
                bundle.s.iter().zip(scale(c, &bundle.d)).map(|(a, b)| a + b).collect()
            }
        }
        StepRule::StildePlusD => bundle.s_tilde.iter().zip(&bundle.d).map(|(a, b)| a + b).collect(),
    };
    let t_norm = norm(&t);
    let degeneracy = if t_norm < 1e-14 * (1.0 + norm(&bundle.s)) {
        Some(Degeneracy::Vanishing)
    } else if dot(&t, &bundle.g) > -tau_desc * t_norm * norm(&bundle.g) {
        Some(Degeneracy::NotDescent)
    } else {
        None
    };
    StepChoice { rule, t, degeneracy }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hvp::LinearOperator;
    use crate::lanczos::{lanczos, DEFAULT_BREAKDOWN_TOL};
    use crate::tridiag::DEFAULT_PINV_TOL;

    struct Diagonal(Vec<f64>);

    impl LinearOperator for Diagonal {
        fn dim(&self) -> usize {
            self.0.len()
        }
        fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
            Ok(self.0.iter().zip(v).map(|(d, x)| d * x).collect())
        }
    }

    fn bundle(diag: &[f64], g: &[f64], q: usize) -> DirectionBundle {
        let f = lanczos(&Diagonal(diag.to_vec()), g, q, DEFAULT_BREAKDOWN_TOL).unwrap();
        compute_directions(&f, &DirectionSettings::default()).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn convex_newton_step() {
        let b = bundle(&[2.0, 4.0], &[2.0, 4.0], 2);
        assert!(close(&b.s, &[-1.0, -1.0], 1e-12));
        assert_eq!(b.s_tilde, b.s);
        assert!(!b.has_negative_curvature());
    }

    #[test]
    fn identity_newton_is_steepest_descent() {
        let g = [0.5, -2.0, 1.5];
        let b = bundle(&[1.0; 3], &g, 3);
        assert!(close(&b.s, &[-0.5, 2.0, -1.5], 1e-14));
    }

    #[test]
    fn saddle_newton_and_curvature() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let b = bundle(&[1.0, -1.0], &[h, h], 2);
        assert!(close(&b.s, &[-h, h], 1e-12), "{:?}", b.s);
        assert!((b.mu + 1.0).abs() < 1e-12);
        assert!(close(&b.d, &[0.0, -1.0], 1e-12), "{:?}", b.d);
        assert!(dot(&b.d, &b.g) <= 0.0);
    }

    #[test]
    fn breakdown_hides_negative_curvature() {
        let b = bundle(&[1.0, -1.0], &[1.0, 0.0], 2);
        assert_eq!(b.d, vec![0.0, 0.0]);
        assert_eq!(b.mu, 1.0);
    }

    #[test]
    fn positive_definite_has_no_curvature_direction() {
        let b = bundle(&[1.0, 3.0, 7.0], &[1.0, 1.0, 1.0], 3);
        assert!(!b.has_negative_curvature());
        assert!(b.mu > 0.0);
    }

    #[test]
    fn filtered_direction_drops_negative_column() {
        // Decoupled T = diag(2, -1) in the standard basis.
        let f = LanczosFactorization {
            basis: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            alpha: vec![2.0, -1.0],
            beta: vec![0.0],
            beta_next: 0.0,
            next_vector: None,
            seed: vec![2.0, -5.0],
            seed_norm: 29f64.sqrt(),
            requested_q: 2,
        };
        let st = filtered_direction(&f, &f.seed, DEFAULT_PINV_TOL);
        assert!(close(&st, &[-1.0, 0.0], 1e-15));
    }

    #[test]
    fn all_negative_diagonal_gives_zero_filtered_direction() {
        let b = bundle(&[-1.0, -3.0], &[1.0, 1.0], 2);
        assert_eq!(b.s_tilde, vec![0.0, 0.0]);
    }

    fn manual(s: Vec<f64>, d: Vec<f64>, g: Vec<f64>) -> DirectionBundle {
        DirectionBundle { s_tilde: s.clone(), s, d, mu: -1.0, ritz_residual_bound: 0.0, g }
    }

    #[test]
    fn step_rules() {
        let b = manual(vec![1.0, 0.0], vec![0.0, 2.0], vec![-1.0, -1.0]);
        assert_eq!(assemble_step(&b, StepRule::SPlusD, DEFAULT_TAU_DESC).t, vec![1.0, 2.0]);
        assert_eq!(assemble_step(&b, StepRule::SPlusScaledD, DEFAULT_TAU_DESC).t, vec![1.0, 1.0]);
        assert_eq!(assemble_step(&b, StepRule::StildePlusD, DEFAULT_TAU_DESC).t, vec![1.0, 2.0]);
    }

    #[test]
    fn cancelling_step_is_flagged() {
        let b = manual(vec![0.0, -1.0], vec![0.0, 1.0], vec![0.0, -1.0]);
        let step = assemble_step(&b, StepRule::SPlusD, DEFAULT_TAU_DESC);
        assert_eq!(step.t, vec![0.0, 0.0]);
        assert_eq!(step.degeneracy, Some(Degeneracy::Vanishing));
    }

    #[test]
    fn uphill_step_is_flagged() {
        let b = manual(vec![1.0, 0.0], vec![0.0, 0.0], vec![1.0, 0.0]);
        let step = assemble_step(&b, StepRule::SPlusD, DEFAULT_TAU_DESC);
        assert_eq!(step.degeneracy, Some(Degeneracy::NotDescent));
    }

    #[test]
    fn scaled_rule_with_zero_curvature_direction_is_newton() {
        let b = manual(vec![-1.0, 0.5], vec![0.0, 0.0], vec![1.0, 0.0]);
        assert_eq!(assemble_step(&b, StepRule::SPlusScaledD, DEFAULT_TAU_DESC).t, vec![-1.0, 0.5]);
    }

    #[test]
    fn rule_parsing() {
        assert_eq!("stilde_plus_d".parse::<StepRule>().unwrap(), StepRule::StildePlusD);
        assert!("s_minus_d".parse::<StepRule>().is_err());
    }
}
