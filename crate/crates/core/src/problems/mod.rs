//! Finite-sum objectives `f(x) = sum_j f_j(x)` with per-component oracles.
//!
//! Component indices are zero-based throughout the crate.

mod dual;
mod mixture;
mod mlp;
mod quadratic;
mod rosenbrock;

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

pub use dual::{Dual, Scalar};
pub use mixture::LayeredGaussianMixture;
pub use mlp::MlpLeastSquares;
pub use quadratic::{DenseQuadratic, IndefiniteQuadratic, QuarticSum};
pub use rosenbrock::RosenbrockSum;

use crate::error::{Error, Result};

/// Oracle for a finite-sum objective.
///
/// The per-component methods assume `j < components()` and
/// `x.len() == dim()`; use [`check_point`] or the `full_*` helpers when the
/// input is untrusted. Implementations hold no mutable state.
pub trait ComponentObjective: Send + Sync {
    fn dim(&self) -> usize;

    fn components(&self) -> usize;

    fn value(&self, j: usize, x: &[f64]) -> f64;

    fn gradient(&self, j: usize, x: &[f64]) -> Vec<f64>;

    /// Analytic `H_j(x) v`, or `None` when the objective has no exact product.
    fn exact_hvp(&self, _j: usize, _x: &[f64], _v: &[f64]) -> Option<Vec<f64>> {
        None
    }

    fn supports_exact_hvp(&self) -> bool {
        false
    }
}

impl<T: ComponentObjective + ?Sized> ComponentObjective for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn components(&self) -> usize {
        (**self).components()
    }
    fn value(&self, j: usize, x: &[f64]) -> f64 {
        (**self).value(j, x)
    }
    fn gradient(&self, j: usize, x: &[f64]) -> Vec<f64> {
        (**self).gradient(j, x)
    }
    fn exact_hvp(&self, j: usize, x: &[f64], v: &[f64]) -> Option<Vec<f64>> {
        (**self).exact_hvp(j, x, v)
    }
    fn supports_exact_hvp(&self) -> bool {
        (**self).supports_exact_hvp()
    }
}

pub fn check_point<O: ComponentObjective + ?Sized>(obj: &O, j: usize, x: &[f64]) -> Result<()> {
    if j >= obj.components() {
        return Err(Error::ComponentOutOfRange { index: j, components: obj.components() });
    }
    check_dim(obj, x)
}

pub fn check_dim<O: ComponentObjective + ?Sized>(obj: &O, x: &[f64]) -> Result<()> {
    if x.len() != obj.dim() {
        return Err(Error::DimensionMismatch { expected: obj.dim(), actual: x.len() });
    }
    Ok(())
}

/// Exact sum of all component values.
pub fn full_value<O: ComponentObjective + ?Sized>(obj: &O, x: &[f64]) -> Result<f64> {
    check_dim(obj, x)?;
    Ok((0..obj.components()).map(|j| obj.value(j, x)).sum())
}

/// Exact sum of all component gradients.
pub fn full_gradient<O: ComponentObjective + ?Sized>(obj: &O, x: &[f64]) -> Result<Vec<f64>> {
    check_dim(obj, x)?;
    let mut g = vec![0.0; obj.dim()];
    for j in 0..obj.components() {
        for (acc, gj) in g.iter_mut().zip(obj.gradient(j, x)) {
            *acc += gj;
        }
    }
    Ok(g)
}

/// `1/2 x^T diag(eigenvalues) x` split evenly across `components`.
pub fn make_indefinite_quadratic(
    dim: usize,
    components: usize,
    eigenvalues: Vec<f64>,
) -> Result<IndefiniteQuadratic> {
    if eigenvalues.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, actual: eigenvalues.len() });
    }
    IndefiniteQuadratic::new(eigenvalues, components)
}

pub fn make_rosenbrock_sum(dim: usize, components: usize) -> Result<RosenbrockSum> {
    RosenbrockSum::new(dim, components)
}

pub fn make_layered_gaussian_mixture(spec: &ProblemSpec) -> Result<LayeredGaussianMixture> {
    if spec.kind != ProblemKind::LayeredGaussianMixture {
        return Err(Error::InvalidArgument(format!("expected layered_gaussian_mixture, got {}", spec.kind)));
    }
    LayeredGaussianMixture::from_spec(spec)
}

pub fn make_mlp_least_squares(spec: &ProblemSpec) -> Result<MlpLeastSquares> {
    if spec.kind != ProblemKind::MlpLeastSquares {
        return Err(Error::InvalidArgument(format!("expected mlp_least_squares, got {}", spec.kind)));
    }
    MlpLeastSquares::from_spec(spec)
}

/// Contiguous equal blocks of `0..n`; the last block absorbs the remainder.
pub(crate) fn partition(n: usize, m: usize) -> Vec<std::ops::Range<usize>> {
    let size = n / m;
    (0..m)
        .map(|j| {
            let start = j * size;
            let end = if j + 1 == m { n } else { start + size };
            start..end
        })
        .collect()
}

/// Wraps an objective and counts oracle calls.
#[derive(Debug, Default)]
pub struct CountingObjective<O> {
    inner: O,
    values: AtomicUsize,
    gradients: AtomicUsize,
    hvps: AtomicUsize,
}

impl<O> CountingObjective<O> {
    pub fn new(inner: O) -> Self {
        CountingObjective {
            inner,
            values: AtomicUsize::new(0),
            gradients: AtomicUsize::new(0),
            hvps: AtomicUsize::new(0),
        }
    }

    pub fn value_calls(&self) -> usize {
        self.values.load(Ordering::Relaxed)
    }

    pub fn gradient_calls(&self) -> usize {
        self.gradients.load(Ordering::Relaxed)
    }

    pub fn hvp_calls(&self) -> usize {
        self.hvps.load(Ordering::Relaxed)
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }
}

impl<O: ComponentObjective> ComponentObjective for CountingObjective<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn components(&self) -> usize {
        self.inner.components()
    }
    fn value(&self, j: usize, x: &[f64]) -> f64 {
        self.values.fetch_add(1, Ordering::Relaxed);
        self.inner.value(j, x)
    }
    fn gradient(&self, j: usize, x: &[f64]) -> Vec<f64> {
        self.gradients.fetch_add(1, Ordering::Relaxed);
        self.inner.gradient(j, x)
    }
    fn exact_hvp(&self, j: usize, x: &[f64], v: &[f64]) -> Option<Vec<f64>> {
        self.hvps.fetch_add(1, Ordering::Relaxed);
        self.inner.exact_hvp(j, x, v)
    }
    fn supports_exact_hvp(&self) -> bool {
        self.inner.supports_exact_hvp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    IndefiniteQuadratic,
    RosenbrockSum,
    LayeredGaussianMixture,
    MlpLeastSquares,
    QuarticSum,
}

impl ProblemKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProblemKind::IndefiniteQuadratic => "indefinite_quadratic",
            ProblemKind::RosenbrockSum => "rosenbrock_sum",
            ProblemKind::LayeredGaussianMixture => "layered_gaussian_mixture",
            ProblemKind::MlpLeastSquares => "mlp_least_squares",
            ProblemKind::QuarticSum => "quartic_sum",
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "indefinite_quadratic" => ProblemKind::IndefiniteQuadratic,
            "rosenbrock_sum" => ProblemKind::RosenbrockSum,
            "layered_gaussian_mixture" => ProblemKind::LayeredGaussianMixture,
            "mlp_least_squares" => ProblemKind::MlpLeastSquares,
            "quartic_sum" => ProblemKind::QuarticSum,
            other => return Err(Error::Unknown { what: "problem kind", value: other.to_string() }),
        })
    }
}

/// Declarative description of a problem instance. The seed fully determines
/// any generated data; parameters irrelevant to `kind` are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    /// Parameter dimension for quadratic, quartic and Rosenbrock problems.
    /// Derived from the architecture for the mixture and MLP problems.
    pub dim: usize,
    pub components: usize,
    pub seed: u64,
    /// Diagonal of the indefinite quadratic; empty means `[1, -1, 1, -1, ...]`.
    pub eigenvalues: Vec<f64>,
    /// Mixture: number of mixture components in each layer.
    pub layers: Vec<usize>,
    /// Mixture: dimension of each observed sample.
    pub data_dim: usize,
    /// Mixture and MLP: number of synthetic samples.
    pub samples: usize,
    /// Mixture: constant added to the likelihood inside the logarithm.
    pub likelihood_floor: f64,
    /// Mixture: spread of the hidden translations that generate the data.
    pub separation: f64,
    /// Mixture: spread of the translations in the default starting point.
    pub init_scale: f64,
    /// MLP: hidden layer widths.
    pub hidden: Vec<usize>,
    /// MLP: input width.
    pub inputs: usize,
    /// MLP: scale of the teacher network producing targets; 0 gives zero targets.
    pub teacher_scale: f64,
}

impl Default for ProblemSpec {
    fn default() -> Self {
        ProblemSpec {
            kind: ProblemKind::IndefiniteQuadratic,
            dim: 2,
            components: 1,
            seed: 0,
            eigenvalues: Vec::new(),
            layers: vec![4, 4, 4],
            data_dim: 16,
            samples: 400,
            likelihood_floor: mixture::DEFAULT_LIKELIHOOD_FLOOR,
            separation: mixture::DEFAULT_SEPARATION,
            init_scale: mixture::DEFAULT_INIT_SCALE,
            hidden: vec![8],
            inputs: 4,
            teacher_scale: 1.0,
        }
    }
}

impl ProblemSpec {
    pub fn new(kind: ProblemKind) -> Self {
        ProblemSpec { kind, ..Default::default() }
    }

    pub fn resolved_eigenvalues(&self) -> Vec<f64> {
        if self.eigenvalues.is_empty() {
            (0..self.dim).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect()
        } else {
            self.eigenvalues.clone()
        }
    }

    /// Parameter dimension of the instance this spec builds.
    pub fn param_dim(&self) -> usize {
        match self.kind {
            ProblemKind::IndefiniteQuadratic => self.resolved_eigenvalues().len(),
            ProblemKind::RosenbrockSum | ProblemKind::QuarticSum => self.dim,
            ProblemKind::LayeredGaussianMixture => {
                mixture::param_count(&self.layers, self.data_dim)
            }
            ProblemKind::MlpLeastSquares => mlp::param_count(self.inputs, &self.hidden),
        }
    }

    pub fn build(&self) -> Result<Box<dyn ComponentObjective>> {
        Ok(match self.kind {
            ProblemKind::IndefiniteQuadratic => Box::new(IndefiniteQuadratic::new(
                self.resolved_eigenvalues(),
                self.components,
            )?),
            ProblemKind::RosenbrockSum => {
                Box::new(RosenbrockSum::new(self.dim, self.components)?)
            }
            ProblemKind::QuarticSum => Box::new(QuarticSum::new(self.dim, self.components)?),
            ProblemKind::LayeredGaussianMixture => Box::new(LayeredGaussianMixture::from_spec(self)?),
            ProblemKind::MlpLeastSquares => Box::new(MlpLeastSquares::from_spec(self)?),
        })
    }

    /// Default starting point, deterministic in the seed.
    pub fn initial_point(&self) -> Vec<f64> {
        let n = self.param_dim();
        match self.kind {
            ProblemKind::IndefiniteQuadratic | ProblemKind::QuarticSum => vec![1.0; n],
            ProblemKind::RosenbrockSum => {
                (0..n).map(|i| if i % 2 == 0 { -1.2 } else { 1.0 }).collect()
            }
            ProblemKind::LayeredGaussianMixture => {
                mixture::initial_point(&self.layers, self.data_dim, self.init_scale, self.seed)
            }
            ProblemKind::MlpLeastSquares => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x5eed_0001);
                (0..n)
                    .map(|_| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        0.3 * z
                    })
                    .collect()
            }
        }
    }
}
