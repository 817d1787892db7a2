use std::ops::Range;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{partition, ComponentObjective, ProblemSpec};
use crate::error::{Error, Result};

pub(crate) fn param_count(inputs: usize, hidden: &[usize]) -> usize {
    let mut count = 0;
    let mut fan_in = inputs;
    for &h in hidden {
        count += fan_in * h + h;
        fan_in = h;
    }
    count + fan_in + 1
}

/// Least-squares fit of a small tanh network with a scalar linear output.
///
/// Parameters are packed layer by layer as a row-major weight matrix followed
/// by its bias vector. Each component is `(1/n) sum_i 1/2 (net(z_i) - y_i)^2`
/// over its block of samples, so the full objective is the half mean squared
/// error. No exact Hessian-vector product is provided.
#[derive(Debug, Clone)]
pub struct MlpLeastSquares {
    widths: Vec<usize>,
    inputs: Vec<Vec<f64>>,
    targets: Vec<f64>,
    blocks: Vec<Range<usize>>,
    dim: usize,
}

struct Layer<'a> {
    weights: &'a [f64],
    bias: &'a [f64],
    fan_in: usize,
    fan_out: usize,
}

impl MlpLeastSquares {
    pub fn from_spec(spec: &ProblemSpec) -> Result<Self> {
        if spec.hidden.is_empty() {
            return Err(Error::InvalidArgument("empty architecture: need at least one hidden layer".into()));
        }
        if spec.inputs == 0 || spec.hidden.contains(&0) {
            return Err(Error::InvalidArgument("layer widths must be positive".into()));
        }
        if spec.components < 1 || spec.samples < spec.components {
            return Err(Error::InvalidArgument(format!(
                "sample count {} must be at least the component count {}",
                spec.samples, spec.components
            )));
        }
        let mut widths = vec![spec.inputs];
        widths.extend_from_slice(&spec.hidden);
        widths.push(1);
        let dim = param_count(spec.inputs, &spec.hidden);

        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
        let inputs: Vec<Vec<f64>> =
            (0..spec.samples).map(|_| (0..spec.inputs).map(|_| normal()).collect()).collect();
        let teacher: Vec<f64> = (0..dim).map(|_| spec.teacher_scale * normal()).collect();

        let mut problem = MlpLeastSquares {
            widths,
            inputs,
            targets: Vec::new(),
            blocks: partition(spec.samples, spec.components),
            dim,
        };
        problem.targets = problem.inputs.iter().map(|z| problem.forward(&teacher, z).0).collect();
        Ok(problem)
    }

    fn layers<'a>(&self, params: &'a [f64]) -> Vec<Layer<'a>> {
        let mut offset = 0;
        self.widths
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let weights = &params[offset..offset + fan_in * fan_out];
                offset += fan_in * fan_out;
                let bias = &params[offset..offset + fan_out];
                offset += fan_out;
                Layer { weights, bias, fan_in, fan_out }
            })
            .collect()
    }

    /// Returns the scalar output and every layer's activations (input first).
    fn forward(&self, params: &[f64], z: &[f64]) -> (f64, Vec<Vec<f64>>) {
        let layers = self.layers(params);
        let last = layers.len() - 1;
        let mut acts = vec![z.to_vec()];
        for (l, layer) in layers.iter().enumerate() {
            let input = &acts[l];
            let out: Vec<f64> = (0..layer.fan_out)
                .map(|o| {
                    let row = &layer.weights[o * layer.fan_in..(o + 1) * layer.fan_in];
                    let pre = layer.bias[o] + row.iter().zip(input).map(|(w, a)| w * a).sum::<f64>();
                    if l == last { pre } else { pre.tanh() }
                })
                .collect();
            acts.push(out);
        }
        (acts[last + 1][0], acts)
    }

    fn scale(&self) -> f64 {
        1.0 / self.targets.len() as f64
    }
}

impl ComponentObjective for MlpLeastSquares {
    fn dim(&self) -> usize {
        self.dim
    }

    fn components(&self) -> usize {
        self.blocks.len()
    }

    fn value(&self, j: usize, x: &[f64]) -> f64 {
        let sum: f64 = self.blocks[j]
            .clone()
            .map(|i| {
                let r = self.forward(x, &self.inputs[i]).0 - self.targets[i];
                0.5 * r * r
            })
            .sum();
        self.scale() * sum
    }

    fn gradient(&self, j: usize, x: &[f64]) -> Vec<f64> {
        let mut grad = vec![0.0; self.dim];
        let layers = self.layers(x);
        let last = layers.len() - 1;
        // Offsets of each layer's weights within the packed vector.
        let mut offsets = Vec::with_capacity(layers.len());
        let mut off = 0;
        for layer in &layers {
            offsets.push(off);
            off += layer.fan_in * layer.fan_out + layer.fan_out;
        }
        for i in self.blocks[j].clone() {
            let (out, acts) = self.forward(x, &self.inputs[i]);
            let mut delta = vec![self.scale() * (out - self.targets[i])];
            for l in (0..=last).rev() {
                let layer = &layers[l];
                let input = &acts[l];
                let base = offsets[l];
                for o in 0..layer.fan_out {
                    let row = base + o * layer.fan_in;
                    for (k, a) in input.iter().enumerate() {
                        grad[row + k] += delta[o] * a;
                    }
                    grad[base + layer.fan_in * layer.fan_out + o] += delta[o];
                }
                if l > 0 {
                    // Back through tanh of the previous layer's output.
                    delta = (0..layer.fan_in)
                        .map(|k| {
                            let back: f64 = (0..layer.fan_out)
                                .map(|o| layer.weights[o * layer.fan_in + k] * delta[o])
                                .sum();
                            back * (1.0 - input[k] * input[k])
                        })
                        .collect();
                }
            }
        }
        grad
    }
}
