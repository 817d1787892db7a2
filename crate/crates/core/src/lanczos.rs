//! Lanczos tridiagonalization seeded with a gradient.
//!
//! Runs the three-term recurrence `A v_j = beta_j v_{j-1} + alpha_j v_j + beta_{j+1} v_{j+1}`
//! with full reorthogonalization (two passes of modified Gram-Schmidt against
//! every stored basis vector) and stops early when the Krylov space becomes
//! invariant.

use crate::error::{Error, Result};
use crate::hvp::LinearOperator;
use crate::linalg::{all_finite, axpy, dot, norm};
use crate::tridiag::{SolveFilter, SymTridiagonal, TridiagEigenPair, TridiagSolution};

/// Default coefficient `c` of the breakdown threshold `c * (1 + |alpha_1|)`.
pub const DEFAULT_BREAKDOWN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct LanczosFactorization {
    /// Orthonormal columns `v_1 .. v_q`.
    pub basis: Vec<Vec<f64>>,
    /// Diagonal of `T`.
    pub alpha: Vec<f64>,
    /// Off-diagonal of `T` (`beta_2 .. beta_q`).
    pub beta: Vec<f64>,
    /// `beta_{q+1}`; zero after breakdown.
    pub beta_next: f64,
    /// `v_{q+1}` when `beta_next > 0`.
    pub next_vector: Option<Vec<f64>>,
    pub seed: Vec<f64>,
    pub seed_norm: f64,
    pub requested_q: usize,
}

impl LanczosFactorization {
    pub fn effective_q(&self) -> usize {
        self.alpha.len()
    }

    pub fn dim(&self) -> usize {
        self.seed.len()
    }

    pub fn broke_down(&self) -> bool {
        self.effective_q() < self.requested_q
    }

    pub fn tridiagonal(&self) -> SymTridiagonal {
        SymTridiagonal::new(self.alpha.clone(), self.beta.clone())
            .expect("factorization holds a consistent finite tridiagonal")
    }

    /// `V^T u`.
    pub fn project(&self, u: &[f64]) -> Vec<f64> {
        self.basis.iter().map(|v| dot(v, u)).collect()
    }

    /// `V y`.
    pub fn lift(&self, y: &[f64]) -> Vec<f64> {
        crate::linalg::combine(&self.basis, y, self.dim())
    }
}

/// Builds up to `q` Lanczos vectors for `op` starting from `g / ||g||`.
///
/// Breakdown is declared at step `j` when `beta_{j+1} < breakdown_tol * (1 + |alpha_1|)`.
pub fn lanczos<A: LinearOperator + ?Sized>(
    op: &A,
    g: &[f64],
    q: usize,
    breakdown_tol: f64,
) -> Result<LanczosFactorization> {
    let n = op.dim();
    if g.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: g.len() });
    }
    if q == 0 || q > n {
        return Err(Error::InvalidArgument(format!("lanczos needs 1 <= q <= {n}, got {q}")));
    }
    if !(breakdown_tol >= 0.0) {
        return Err(Error::InvalidArgument("breakdown tolerance must be non-negative".into()));
    }
    if !all_finite(g) {
        return Err(Error::NonFinite("lanczos seed"));
    }
    let seed_norm = norm(g);
    if seed_norm == 0.0 {
        return Err(Error::ZeroSeed);
    }

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(q);
    let mut alpha: Vec<f64> = Vec::with_capacity(q);
    let mut beta: Vec<f64> = Vec::with_capacity(q.saturating_sub(1));
    basis.push(g.iter().map(|v| v / seed_norm).collect());
    let mut threshold = 0.0;

    loop {
        let j = basis.len() - 1;
        let mut w = op.apply(&basis[j])?;
        if !all_finite(&w) {
            return Err(Error::NonFinite("Hessian-vector product"));
        }
        if j > 0 {
            axpy(-beta[j - 1], &basis[j - 1], &mut w);
        }
        let a = dot(&basis[j], &w);
        axpy(-a, &basis[j], &mut w);
        alpha.push(a);
        if j == 0 {
            threshold = breakdown_tol * (1.0 + a.abs());
        }
        for _ in 0..2 {
            for v in &basis {
                let c = dot(v, &w);
                axpy(-c, v, &mut w);
            }
        }
        let b = norm(&w);
        if b < threshold {
            return Ok(LanczosFactorization {
                basis,
                alpha,
                beta,
                beta_next: 0.0,
                next_vector: None,
                seed: g.to_vec(),
                seed_norm,
                requested_q: q,
            });
        }
        let next: Vec<f64> = w.iter().map(|x| x / b).collect();
        if basis.len() == q {
            return Ok(LanczosFactorization {
                basis,
                alpha,
                beta,
                beta_next: b,
                next_vector: Some(next),
                seed: g.to_vec(),
                seed_norm,
                requested_q: q,
            });
        }
        beta.push(b);
        basis.push(next);
    }
}

/// Smallest Ritz value of the factorization and its unit eigenvector.
pub fn tridiag_min_eigenpair(fact: &LanczosFactorization) -> TridiagEigenPair {
    fact.tridiagonal().min_eigenpair()
}

pub fn tridiag_solve(
    fact: &LanczosFactorization,
    rhs: &[f64],
    filter: SolveFilter,
    pinv_tol: f64,
) -> Result<TridiagSolution> {
    fact.tridiagonal().solve(rhs, filter, pinv_tol)
}
