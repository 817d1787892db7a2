//! Small symmetric tridiagonal matrices: Sturm-sequence bisection, inverse
//! iteration, a full QL eigendecomposition and pseudo-inverse solves.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default relative cutoff below which eigenvalues are treated as zero in
/// pseudo-inverse solves.
pub const DEFAULT_PINV_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymTridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TridiagEigenPair {
    pub mu: f64,
    /// Unit eigenvector; its first significant entry is positive.
    pub w: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TridiagEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// `vectors[k]` pairs with `values[k]`.
    pub vectors: Vec<Vec<f64>>,
}

/// Which rows and columns of `T` take part in a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveFilter {
    None,
    /// Keep only indices whose diagonal entry is non-negative.
    DropNegativeDiagonal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TridiagSolution {
    /// Full-length solution, zero at dropped indices.
    pub y: Vec<f64>,
    /// Zero-based indices that took part in the solve.
    pub kept: Vec<usize>,
}

impl SymTridiagonal {
    /// `off[i]` couples rows `i` and `i + 1`.
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::InvalidArgument("tridiagonal matrix must be non-empty".into()));
        }
        if off.len() + 1 != diag.len() {
            return Err(Error::DimensionMismatch { expected: diag.len() - 1, actual: off.len() });
        }
        if !diag.iter().chain(&off).all(|v| v.is_finite()) {
            return Err(Error::NonFinite("tridiagonal entries"));
        }
        Ok(SymTridiagonal { diag, off })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    pub fn mat_vec(&self, v: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * v[i];
                if i > 0 {
                    s += self.off[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    s += self.off[i] * v[i + 1];
                }
                s
            })
            .collect()
    }

    /// Max absolute row sum, an upper bound on the spectral radius.
    pub fn norm_inf(&self) -> f64 {
        (0..self.len()).map(|i| self.gershgorin_radius(i) + self.diag[i].abs()).fold(0.0, f64::max)
    }

    fn gershgorin_radius(&self, i: usize) -> f64 {
        let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
        let right = if i < self.off.len() { self.off[i].abs() } else { 0.0 };
        left + right
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence count).
    pub fn count_below(&self, x: f64) -> usize {
        let pivmin = f64::MIN_POSITIVE.max(f64::EPSILON * self.norm_inf() * f64::EPSILON);
        let mut count = 0;
        let mut d = 1.0;
        for i in 0..self.len() {
            let coupling = if i > 0 { self.off[i - 1] * self.off[i - 1] / d } else { 0.0 };
            d = self.diag[i] - x - coupling;
            if d.abs() < pivmin {
                d = -pivmin;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Algebraically smallest eigenvalue by bisection on the Sturm count.
    pub fn min_eigenvalue(&self) -> f64 {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.len() {
            let r = self.gershgorin_radius(i);
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        let scale = self.norm_inf().max(f64::MIN_POSITIVE);
        lo -= f64::EPSILON * scale;
        hi += f64::EPSILON * scale;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo
                || mid >= hi
                || hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs())
                || hi - lo <= f64::EPSILON * scale
            {
                break;
            }
            if self.count_below(mid) >= 1 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Smallest eigenpair: bisection followed by inverse iteration.
    pub fn min_eigenpair(&self) -> TridiagEigenPair {
        let mu = self.min_eigenvalue();
        let n = self.len();
        if n == 1 {
            return TridiagEigenPair { mu: self.diag[0], w: vec![1.0] };
        }
        let mut z: Vec<f64> = (0..n).map(|i| 1.0 + 0.37 * i as f64).collect();
        normalize(&mut z);
        for _ in 0..4 {
            z = self.shifted_solve(mu, &z);
            normalize(&mut z);
        }
        fix_sign(&mut z);
        TridiagEigenPair { mu, w: z }
    }

    /// Solves `(T - shift I) z = b` by Gaussian elimination with partial
    /// pivoting; exactly singular pivots are perturbed, as inverse iteration
    /// requires.
    fn shifted_solve(&self, shift: f64, b: &[f64]) -> Vec<f64> {
        let n = self.len();
        let tiny = f64::EPSILON * self.norm_inf().max(f64::MIN_POSITIVE);
        // Row i holds up to three entries starting at column i after pivoting.
        let mut d: Vec<f64> = self.diag.iter().map(|a| a - shift).collect();
        let mut du: Vec<f64> = self.off.clone();
        let mut dl: Vec<f64> = self.off.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut rhs = b.to_vec();
        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let l = dl[i] / d[i];
                d[i + 1] -= l * du[i];
                rhs[i + 1] -= l * rhs[i];
                dl[i] = l;
            } else {
                let l = d[i] / dl[i];
                d[i] = dl[i];
                let tmp = d[i + 1];
                d[i + 1] = du[i] - l * tmp;
                du[i] = tmp;
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -l * du2[i];
                }
                rhs.swap(i, i + 1);
                rhs[i + 1] -= l * rhs[i];
                dl[i] = l;
            }
        }
        if d[n - 1] == 0.0 {
            d[n - 1] = tiny;
        }
        let mut z = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = rhs[i];
            if i + 1 < n {
                s -= du[i] * z[i + 1];
            }
            if i + 2 < n {
                s -= du2[i] * z[i + 2];
            }
            z[i] = s / d[i];
        }
        z
    }

    /// Full eigendecomposition by the implicit QL method.
    pub fn eigen(&self) -> TridiagEigen {
        let n = self.len();
        let mut d = self.diag.clone();
        let mut e = vec![0.0; n];
        e[..n - 1].copy_from_slice(&self.off);
        // v[k][i]: component k of eigenvector i.
        let mut v = vec![vec![0.0; n]; n];
        for (i, row) in v.iter_mut().enumerate() {
            row[i] = 1.0;
        }

        let mut f = 0.0;
        let mut tst1: f64 = 0.0;
        let eps = f64::EPSILON;
        for l in 0..n {
            tst1 = tst1.max(d[l].abs() + e[l].abs());
            let mut m = l;
            while m < n {
                if e[m].abs() <= eps * tst1 {
                    break;
                }
                m += 1;
            }
            if m > l {
                loop {
                    let g = d[l];
                    let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                    let mut r = p.hypot(1.0);
                    if p < 0.0 {
                        r = -r;
                    }
                    d[l] = e[l] / (p + r);
                    d[l + 1] = e[l] * (p + r);
                    let dl1 = d[l + 1];
                    let h = g - d[l];
                    for di in d.iter_mut().skip(l + 2) {
                        *di -= h;
                    }
                    f += h;

                    p = d[m];
                    let mut c = 1.0;
                    let mut c2 = c;
                    let mut c3 = c;
                    let el1 = e[l + 1];
                    let mut s = 0.0;
                    let mut s2 = 0.0;
                    for i in (l..m).rev() {
                        c3 = c2;
                        c2 = c;
                        s2 = s;
                        let g = c * e[i];
                        let h = c * p;
                        r = p.hypot(e[i]);
                        e[i + 1] = s * r;
                        s = e[i] / r;
                        c = p / r;
                        p = c * d[i] - s * g;
                        d[i + 1] = h + s * (c * g + s * d[i]);
                        for row in v.iter_mut() {
                            let h = row[i + 1];
                            row[i + 1] = s * row[i] + c * h;
                            row[i] = c * row[i] - s * h;
                        }
                    }
                    p = -s * s2 * c3 * el1 * e[l] / dl1;
                    e[l] = s * p;
                    d[l] = c * p;
                    if e[l].abs() <= eps * tst1 {
                        break;
                    }
                }
            }
            d[l] += f;
            e[l] = 0.0;
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
        let values = order.iter().map(|&i| d[i]).collect();
        let vectors = order
            .iter()
            .map(|&i| {
                let mut col: Vec<f64> = v.iter().map(|row| row[i]).collect();
                fix_sign(&mut col);
                col
            })
            .collect();
        TridiagEigen { values, vectors }
    }

    /// Spectral pseudo-inverse solve; eigenvalues with magnitude at or below
    /// `pinv_tol * max |lambda|` are discarded. `None` when nothing survives.
    pub fn pinv_solve(&self, rhs: &[f64], pinv_tol: f64) -> Option<Vec<f64>> {
        let eig = self.eigen();
        let largest = eig.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if largest == 0.0 || !largest.is_finite() {
            return None;
        }
        let cutoff = pinv_tol * largest;
        let mut y = vec![0.0; self.len()];
        let mut used = 0;
        for (lambda, u) in eig.values.iter().zip(&eig.vectors) {
            if lambda.abs() <= cutoff {
                continue;
            }
            used += 1;
            let coef = u.iter().zip(rhs).map(|(a, b)| a * b).sum::<f64>() / lambda;
            for (yi, ui) in y.iter_mut().zip(u) {
                *yi += coef * ui;
            }
        }
        (used > 0).then_some(y)
    }

    /// Principal submatrix on the sorted index set `kept`.
    pub fn principal_submatrix(&self, kept: &[usize]) -> Option<SymTridiagonal> {
        if kept.is_empty() {
            return None;
        }
        let diag = kept.iter().map(|&i| self.diag[i]).collect();
        let off = kept
            .windows(2)
            .map(|w| if w[1] == w[0] + 1 { self.off[w[0]] } else { 0.0 })
            .collect();
        Some(SymTridiagonal { diag, off })
    }

    /// Solves `T y = rhs`, optionally restricted to non-negative diagonal
    /// indices (the dropped entries of `y` are zero).
    pub fn solve(&self, rhs: &[f64], filter: SolveFilter, pinv_tol: f64) -> Result<TridiagSolution> {
        if rhs.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), actual: rhs.len() });
        }
        match filter {
            SolveFilter::None => {
                let y = self.pinv_solve(rhs, pinv_tol).ok_or(Error::SingularTridiagonal)?;
                Ok(TridiagSolution { y, kept: (0..self.len()).collect() })
            }
            SolveFilter::DropNegativeDiagonal => {
                let kept: Vec<usize> = (0..self.len()).filter(|&i| self.diag[i] >= 0.0).collect();
                if kept.len() == self.len() {
                    let y = self.pinv_solve(rhs, pinv_tol).unwrap_or_else(|| vec![0.0; self.len()]);
                    return Ok(TridiagSolution { y, kept });
                }
                let mut y = vec![0.0; self.len()];
                if let Some(sub) = self.principal_submatrix(&kept) {
                    let sub_rhs: Vec<f64> = kept.iter().map(|&i| rhs[i]).collect();
                    if let Some(sub_y) = sub.pinv_solve(&sub_rhs, pinv_tol) {
                        for (&i, v) in kept.iter().zip(sub_y) {
                            y[i] = v;
                        }
                    }
                }
                Ok(TridiagSolution { y, kept })
            }
        }
    }
}

fn normalize(z: &mut [f64]) {
    let n = z.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n > 0.0 {
        for v in z.iter_mut() {
            *v /= n;
        }
    }
}

/// Makes the first entry that is not negligible positive.
fn fix_sign(z: &mut [f64]) {
    let max = z.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if let Some(first) = z.iter().find(|v| v.abs() > 1e-6 * max) {
        if *first < 0.0 {
            for v in z.iter_mut() {
                *v = -*v;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(diag: &[f64], off: &[f64]) -> SymTridiagonal {
        SymTridiagonal::new(diag.to_vec(), off.to_vec()).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn decoupled_min_eigenpair() {
        let p = t(&[2.0, -3.0], &[0.0]).min_eigenpair();
        assert!((p.mu + 3.0).abs() < 1e-14);
        assert!(close(&p.w, &[0.0, 1.0], 1e-12));
    }

    #[test]
    fn off_diagonal_pair_min_eigenpair() {
        let p = t(&[0.0, 0.0], &[1.0]).min_eigenpair();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((p.mu + 1.0).abs() < 1e-14);
        assert!(close(&p.w, &[h, -h], 1e-12));
    }

    #[test]
    fn scalar_min_eigenpair() {
        let p = t(&[5.0], &[]).min_eigenpair();
        assert_eq!(p.mu, 5.0);
        assert_eq!(p.w, vec![1.0]);
    }

    #[test]
    fn sturm_count_on_known_spectrum() {
        // Eigenvalues of tridiag(-1, 2, -1) of order 4: 2 - 2 cos(k pi / 5).
        let m = t(&[2.0; 4], &[-1.0; 3]);
        let exact: Vec<f64> =
            (1..=4).map(|k| 2.0 - 2.0 * (k as f64 * std::f64::consts::PI / 5.0).cos()).collect();
        assert_eq!(m.count_below(exact[0] - 1e-9), 0);
        assert_eq!(m.count_below(exact[1] + 1e-9), 2);
        assert!((m.min_eigenvalue() - exact[0]).abs() < 1e-14);
        let eig = m.eigen();
        assert!(close(&eig.values, &exact, 1e-13));
    }

    #[test]
    fn diagonal_solve() {
        let s = t(&[2.0, 4.0], &[0.0]).solve(&[-2.0, -4.0], SolveFilter::None, DEFAULT_PINV_TOL).unwrap();
        assert!(close(&s.y, &[-1.0, -1.0], 1e-15));
        assert_eq!(s.kept, vec![0, 1]);
    }

    #[test]
    fn filtered_solve_drops_negative_diagonal() {
        let s = t(&[2.0, -1.0], &[0.0])
            .solve(&[-2.0, 5.0], SolveFilter::DropNegativeDiagonal, DEFAULT_PINV_TOL)
            .unwrap();
        assert!(close(&s.y, &[-1.0, 0.0], 1e-15));
        assert_eq!(s.kept, vec![0]);
    }

    #[test]
    fn swap_matrix_is_its_own_inverse() {
        let s = t(&[0.0, 0.0], &[1.0]).solve(&[1.0, 0.0], SolveFilter::None, DEFAULT_PINV_TOL).unwrap();
        assert!(close(&s.y, &[0.0, 1.0], 1e-14));
    }

    #[test]
    fn all_negative_diagonal_gives_empty_kept_set() {
        let s = t(&[-1.0, -2.0], &[0.5])
            .solve(&[1.0, 1.0], SolveFilter::DropNegativeDiagonal, DEFAULT_PINV_TOL)
            .unwrap();
        assert_eq!(s.y, vec![0.0, 0.0]);
        assert!(s.kept.is_empty());
    }

    #[test]
    fn zero_matrix_is_singular() {
        let r = t(&[0.0, 0.0], &[0.0]).solve(&[1.0, 1.0], SolveFilter::None, DEFAULT_PINV_TOL);
        assert!(matches!(r, Err(Error::SingularTridiagonal)));
    }

    #[test]
    fn principal_submatrix_breaks_couplings_across_gaps() {
        let m = t(&[1.0, -1.0, 2.0, 3.0], &[0.5, 0.25, 0.125]);
        let sub = m.principal_submatrix(&[0, 2, 3]).unwrap();
        assert_eq!(sub.diag(), &[1.0, 2.0, 3.0]);
        assert_eq!(sub.off(), &[0.0, 0.125]);
    }

    #[test]
    fn shifted_solve_with_pivoting() {
        let m = t(&[1e-3, 2.0, -1.0, 4.0], &[3.0, 1.0, -2.0]);
        let b = [1.0, -2.0, 0.5, 3.0];
        let z = m.shifted_solve(0.25, &b);
        let mut back = m.mat_vec(&z);
        for (bi, zi) in back.iter_mut().zip(&z) {
            *bi -= 0.25 * zi;
        }
        assert!(close(&back, &b, 1e-12));
    }
}
