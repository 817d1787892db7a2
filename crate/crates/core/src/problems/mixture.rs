//! Synthetic layered Gaussian mixture.
//!
//! Each of the `L` layers owns `K_l` mixture entries, each with a logit and a
//! translation in the data space. A path picks one entry per layer; its
//! Gaussian has mean equal to the sum of the chosen translations and unit
//! covariance, and its weight is the product of the per-layer softmax
//! responsibilities. The objective is the negative log-likelihood of seeded
//! samples drawn from a hidden instance of the same model:
//!
//! ```text
//! f_i(x) = ln(1 + c) - ln(c + sum_p w_p N(y_i; m_p, I))
//! ```
//!
//! where `c` is the likelihood floor. Unit covariance keeps every density
//! below one, so each term is non-negative. Components partition the samples
//! into contiguous blocks and carry a `1/n` factor, so the full objective is
//! the mean negative log-likelihood.
//!
//! The exact Hessian-vector product is obtained by running the gradient
//! kernel on dual numbers seeded at `x + eps v`.

use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::dual::{log_sum_exp, seed, Scalar};
use super::{partition, ComponentObjective, ProblemSpec};
use crate::error::{Error, Result};

pub(crate) const DEFAULT_LIKELIHOOD_FLOOR: f64 = 1e-200;

pub(crate) const DEFAULT_SEPARATION: f64 = 2.0;
pub(crate) const DEFAULT_INIT_SCALE: f64 = 0.1;
/// Spread of the hidden per-layer logits used to generate data.
const DATA_LOGIT_STD: f64 = 0.5;

pub(crate) fn param_count(layers: &[usize], data_dim: usize) -> usize {
    layers.iter().map(|k| k * (1 + data_dim)).sum()
}

/// Default start: zero logits and small seeded translations.
pub(crate) fn initial_point(layers: &[usize], data_dim: usize, scale: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1a7e_4ed0);
    let mut x = Vec::with_capacity(param_count(layers, data_dim));
    for &k in layers {
        x.extend(std::iter::repeat_n(0.0, k));
        for _ in 0..k * data_dim {
            let z: f64 = StandardNormal.sample(&mut rng);
            x.push(scale * z);
        }
    }
    x
}

#[derive(Debug, Clone)]
pub struct LayeredGaussianMixture {
    layers: Vec<usize>,
    data_dim: usize,
    /// Start of each layer's block in the parameter vector.
    offsets: Vec<usize>,
    /// Entry chosen in every layer, for every path.
    paths: Vec<Vec<usize>>,
    samples: Vec<Vec<f64>>,
    blocks: Vec<Range<usize>>,
    floor: f64,
    dim: usize,
}

impl LayeredGaussianMixture {
    pub fn from_spec(spec: &ProblemSpec) -> Result<Self> {
        if spec.layers.len() < 2 {
            return Err(Error::InvalidArgument("layered mixture needs at least 2 layers".into()));
        }
        if spec.layers.contains(&0) || spec.data_dim == 0 {
            return Err(Error::InvalidArgument("degenerate layer width (zero)".into()));
        }
        if spec.components < 1 || spec.samples < spec.components {
            return Err(Error::InvalidArgument(format!(
                "sample count {} must be at least the component count {}",
                spec.samples, spec.components
            )));
        }
        if !(spec.separation >= 0.0 && spec.separation.is_finite()) {
            return Err(Error::InvalidArgument("separation must be finite and non-negative".into()));
        }
        if !(spec.likelihood_floor > 0.0 && spec.likelihood_floor.is_finite()) {
            return Err(Error::InvalidArgument("likelihood floor must be positive".into()));
        }

        let mut offsets = Vec::with_capacity(spec.layers.len());
        let mut off = 0;
        for &k in &spec.layers {
            offsets.push(off);
            off += k * (1 + spec.data_dim);
        }

        let mut paths = vec![Vec::new()];
        for &k in &spec.layers {
            paths = paths
                .into_iter()
                .flat_map(|p| {
                    (0..k).map(move |e| {
                        let mut q = p.clone();
                        q.push(e);
                        q
                    })
                })
                .collect();
        }

        let mut model = LayeredGaussianMixture {
            layers: spec.layers.clone(),
            data_dim: spec.data_dim,
            offsets,
            paths,
            samples: Vec::new(),
            blocks: partition(spec.samples, spec.components),
            floor: spec.likelihood_floor,
            dim: off,
        };
        model.samples = model.generate(spec.samples, spec.separation, spec.seed);
        Ok(model)
    }

    fn generate(&self, count: usize, separation: f64, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = |rng: &mut ChaCha8Rng| -> f64 { StandardNormal.sample(rng) };
        let mut weights = Vec::new();
        let mut translations = Vec::new();
        for &k in &self.layers {
            let logits: Vec<f64> = (0..k).map(|_| DATA_LOGIT_STD * normal(&mut rng)).collect();
            let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let exps: Vec<f64> = logits.iter().map(|a| (a - max).exp()).collect();
            let total: f64 = exps.iter().sum();
            weights.push(exps.into_iter().map(|e| e / total).collect::<Vec<_>>());
            translations.push(
                (0..k)
                    .map(|_| {
                        (0..self.data_dim)
                            .map(|_| separation * normal(&mut rng))
                            .collect::<Vec<_>>()
                    })
                    .collect::<Vec<_>>(),
            );
        }
        (0..count)
            .map(|_| {
                let mut y: Vec<f64> = (0..self.data_dim).map(|_| normal(&mut rng)).collect();
                for (layer, w) in weights.iter().enumerate() {
                    let u: f64 = rng.random();
                    let mut acc = 0.0;
                    let mut chosen = w.len() - 1;
                    for (e, p) in w.iter().enumerate() {
                        acc += p;
                        if u < acc {
                            chosen = e;
                            break;
                        }
                    }
                    for (yi, t) in y.iter_mut().zip(&translations[layer][chosen]) {
                        *yi += t;
                    }
                }
                y
            })
            .collect()
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.samples
    }

    pub fn likelihood_floor(&self) -> f64 {
        self.floor
    }

    fn logit(&self, layer: usize, entry: usize) -> usize {
        self.offsets[layer] + entry
    }

    fn translation(&self, layer: usize, entry: usize) -> usize {
        self.offsets[layer] + self.layers[layer] + entry * self.data_dim
    }

    /// Component value and, when requested, its gradient.
    fn evaluate<S: Scalar>(&self, j: usize, x: &[S], with_gradient: bool) -> (S, Vec<S>) {
        let dd = self.data_dim;
        let n_paths = self.paths.len();
        let log_norm = 0.5 * dd as f64 * (2.0 * std::f64::consts::PI).ln();
        let ln_floor = self.floor.ln();

        // Per-layer log-softmax of the logits.
        let log_soft: Vec<Vec<S>> = self
            .layers
            .iter()
            .enumerate()
            .map(|(l, &k)| {
                let logits: Vec<S> = (0..k).map(|e| x[self.logit(l, e)]).collect();
                let lse = log_sum_exp(&logits);
                logits.into_iter().map(|a| a - lse).collect()
            })
            .collect();

        let mut means = vec![S::cst(0.0); n_paths * dd];
        let mut log_weights = Vec::with_capacity(n_paths);
        for (p, path) in self.paths.iter().enumerate() {
            let mut lw = S::cst(0.0);
            for (l, &e) in path.iter().enumerate() {
                lw += log_soft[l][e];
                let t = self.translation(l, e);
                for d in 0..dd {
                    means[p * dd + d] += x[t + d];
                }
            }
            log_weights.push(lw);
        }

        let mut value = S::cst(0.0);
        let mut path_mass = vec![S::cst(0.0); n_paths];
        let mut path_pull = vec![S::cst(0.0); if with_gradient { n_paths * dd } else { 0 }];
        let mut terms = vec![S::cst(ln_floor); n_paths + 1];
        for i in self.blocks[j].clone() {
            let y = &self.samples[i];
            for p in 0..n_paths {
                let mut sq = S::cst(0.0);
                for d in 0..dd {
                    let r = means[p * dd + d] * -1.0 + y[d];
                    sq += r * r;
                }
                terms[p] = log_weights[p] - sq * 0.5 - log_norm;
            }
            let lse = log_sum_exp(&terms);
            value += -lse;
            if with_gradient {
                for p in 0..n_paths {
                    let r = (terms[p] - lse).exp();
                    path_mass[p] += r;
                    for d in 0..dd {
                        path_pull[p * dd + d] += r * (means[p * dd + d] * -1.0 + y[d]);
                    }
                }
            }
        }
        let scale = 1.0 / self.samples.len() as f64;
        let count = self.blocks[j].len() as f64;
        let value = (value + (1.0 + self.floor).ln() * count) * scale;
        if !with_gradient {
            return (value, Vec::new());
        }

        let mut grad = vec![S::cst(0.0); self.dim];
        let total_mass = path_mass.iter().fold(S::cst(0.0), |acc, &r| acc + r);
        for (p, path) in self.paths.iter().enumerate() {
            for (l, &e) in path.iter().enumerate() {
                grad[self.logit(l, e)] -= path_mass[p];
                let t = self.translation(l, e);
                for d in 0..dd {
                    grad[t + d] -= path_pull[p * dd + d];
                }
            }
        }
        for (l, &k) in self.layers.iter().enumerate() {
            for e in 0..k {
                grad[self.logit(l, e)] += log_soft[l][e].exp() * total_mass;
            }
        }
        for g in grad.iter_mut() {
            *g = *g * scale;
        }
        (value, grad)
    }
}

impl ComponentObjective for LayeredGaussianMixture {
    fn dim(&self) -> usize {
        self.dim
    }

    fn components(&self) -> usize {
        self.blocks.len()
    }

    fn value(&self, j: usize, x: &[f64]) -> f64 {
        self.evaluate(j, x, false).0
    }

    fn gradient(&self, j: usize, x: &[f64]) -> Vec<f64> {
        self.evaluate(j, x, true).1
    }

    fn exact_hvp(&self, j: usize, x: &[f64], v: &[f64]) -> Option<Vec<f64>> {
        let (_, grad) = self.evaluate(j, &seed(x, v), true);
        Some(grad.into_iter().map(|g| g.eps).collect())
    }

    fn supports_exact_hvp(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::ProblemKind;

    fn small() -> ProblemSpec {
        ProblemSpec {
            kind: ProblemKind::LayeredGaussianMixture,
            layers: vec![2, 3],
            data_dim: 3,
            samples: 25,
            components: 4,
            seed: 5,
            ..Default::default()
        }
    }

    #[test]
    fn layout_and_path_count() {
        let m = LayeredGaussianMixture::from_spec(&small()).unwrap();
        assert_eq!(m.dim(), 2 * 4 + 3 * 4);
        assert_eq!(m.paths.len(), 6);
        assert_eq!(m.blocks.last().unwrap().len(), 7);
    }

    #[test]
    fn rejects_degenerate_specs() {
        assert!(LayeredGaussianMixture::from_spec(&ProblemSpec { layers: vec![3], ..small() }).is_err());
        assert!(LayeredGaussianMixture::from_spec(&ProblemSpec { layers: vec![3, 0], ..small() }).is_err());
        assert!(LayeredGaussianMixture::from_spec(&ProblemSpec { samples: 3, ..small() }).is_err());
    }

    #[test]
    fn default_spec_is_about_two_hundred_parameters() {
        let spec = ProblemSpec::new(ProblemKind::LayeredGaussianMixture);
        assert_eq!(spec.param_dim(), 204);
    }
}
