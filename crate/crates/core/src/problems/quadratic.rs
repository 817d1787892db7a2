use super::ComponentObjective;
use crate::error::{Error, Result};

fn check_components(m: usize) -> Result<()> {
    if m < 1 {
        return Err(Error::InvalidArgument("component count must be at least 1".into()));
    }
    Ok(())
}

/// `f(x) = 1/2 x^T D x` with `D` diagonal, split as `f_j = f / m`.
///
/// With mixed-sign eigenvalues the origin is a saddle point.
#[derive(Debug, Clone)]
pub struct IndefiniteQuadratic {
    eigenvalues: Vec<f64>,
    components: usize,
}

impl IndefiniteQuadratic {
    pub fn new(eigenvalues: Vec<f64>, components: usize) -> Result<Self> {
        check_components(components)?;
        if eigenvalues.is_empty() {
            return Err(Error::InvalidArgument("eigenvalue list is empty".into()));
        }
        if !eigenvalues.iter().all(|e| e.is_finite()) {
            return Err(Error::InvalidArgument("eigenvalues must be finite".into()));
        }
        Ok(IndefiniteQuadratic { eigenvalues, components })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    fn weight(&self) -> f64 {
        1.0 / self.components as f64
    }
}

impl ComponentObjective for IndefiniteQuadratic {
    fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    fn components(&self) -> usize {
        self.components
    }

    fn value(&self, _j: usize, x: &[f64]) -> f64 {
        let quad: f64 = self.eigenvalues.iter().zip(x).map(|(d, xi)| d * xi * xi).sum();
        0.5 * self.weight() * quad
    }

    fn gradient(&self, _j: usize, x: &[f64]) -> Vec<f64> {
        let w = self.weight();
        self.eigenvalues.iter().zip(x).map(|(d, xi)| w * d * xi).collect()
    }

    fn exact_hvp(&self, _j: usize, _x: &[f64], v: &[f64]) -> Option<Vec<f64>> {
        let w = self.weight();
        Some(self.eigenvalues.iter().zip(v).map(|(d, vi)| w * d * vi).collect())
    }

    fn supports_exact_hvp(&self) -> bool {
        true
    }
}

/// `f(x) = 1/2 x^T A x + b^T x` with dense symmetric `A`, split as `f_j = f / m`.
#[derive(Debug, Clone)]
pub struct DenseQuadratic {
    dim: usize,
    /// Row-major `dim x dim`.
    matrix: Vec<f64>,
    linear: Vec<f64>,
    components: usize,
}

impl DenseQuadratic {
    /// `matrix` is row-major and must be symmetric.
    pub fn new(matrix: Vec<f64>, linear: Vec<f64>, components: usize) -> Result<Self> {
        check_components(components)?;
        let dim = linear.len();
        if dim == 0 || matrix.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, actual: matrix.len() });
        }
        for i in 0..dim {
            for k in 0..i {
                let (a, b) = (matrix[i * dim + k], matrix[k * dim + i]);
                if (a - b).abs() > 1e-12 * (1.0 + a.abs().max(b.abs())) {
                    return Err(Error::InvalidArgument("matrix is not symmetric".into()));
                }
            }
        }
        Ok(DenseQuadratic { dim, matrix, linear, components })
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    fn mat_vec(&self, v: &[f64]) -> Vec<f64> {
        self.matrix
            .chunks_exact(self.dim)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn weight(&self) -> f64 {
        1.0 / self.components as f64
    }
}

impl ComponentObjective for DenseQuadratic {
    fn dim(&self) -> usize {
        self.dim
    }

    fn components(&self) -> usize {
        self.components
    }

    fn value(&self, _j: usize, x: &[f64]) -> f64 {
        let ax = self.mat_vec(x);
        let quad: f64 = ax.iter().zip(x).map(|(a, b)| a * b).sum();
        let lin: f64 = self.linear.iter().zip(x).map(|(a, b)| a * b).sum();
        self.weight() * (0.5 * quad + lin)
    }

    fn gradient(&self, _j: usize, x: &[f64]) -> Vec<f64> {
        let w = self.weight();
        self.mat_vec(x).iter().zip(&self.linear).map(|(a, b)| w * (a + b)).collect()
    }

    fn exact_hvp(&self, _j: usize, _x: &[f64], v: &[f64]) -> Option<Vec<f64>> {
        let w = self.weight();
        Some(self.mat_vec(v).into_iter().map(|a| w * a).collect())
    }

    fn supports_exact_hvp(&self) -> bool {
        true
    }
}

/// `f(x) = sum_i x_i^4`, split as `f_j = f / m`.
#[derive(Debug, Clone)]
pub struct QuarticSum {
    dim: usize,
    components: usize,
}

impl QuarticSum {
    pub fn new(dim: usize, components: usize) -> Result<Self> {
        check_components(components)?;
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        Ok(QuarticSum { dim, components })
    }
}

impl ComponentObjective for QuarticSum {
    fn dim(&self) -> usize {
        self.dim
    }

    fn components(&self) -> usize {
        self.components
    }

    fn value(&self, _j: usize, x: &[f64]) -> f64 {
        x.iter().map(|v| v.powi(4)).sum::<f64>() / self.components as f64
    }

    fn gradient(&self, _j: usize, x: &[f64]) -> Vec<f64> {
        let w = 4.0 / self.components as f64;
        x.iter().map(|v| w * v.powi(3)).collect()
    }

    fn exact_hvp(&self, _j: usize, x: &[f64], v: &[f64]) -> Option<Vec<f64>> {
        let w = 12.0 / self.components as f64;
        Some(x.iter().zip(v).map(|(xi, vi)| w * xi * xi * vi).collect())
    }

    fn supports_exact_hvp(&self) -> bool {
        true
    }
}
