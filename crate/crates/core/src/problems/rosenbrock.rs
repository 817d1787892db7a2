use std::ops::Range;

use super::{partition, ComponentObjective};
use crate::error::{Error, Result};

/// Extended Rosenbrock function over coordinate pairs
/// `100 (x_{2p+1} - x_{2p}^2)^2 + (1 - x_{2p})^2`. The pairs are split into
/// contiguous blocks, one per component.
#[derive(Debug, Clone)]
pub struct RosenbrockSum {
    dim: usize,
    blocks: Vec<Range<usize>>,
}

impl RosenbrockSum {
    pub fn new(dim: usize, components: usize) -> Result<Self> {
        if dim == 0 || !dim.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "rosenbrock dimension must be even and positive, got {dim}"
            )));
        }
        if components < 1 || components > dim / 2 {
            return Err(Error::InvalidArgument(format!(
                "rosenbrock needs 1 <= components <= {} pairs, got {components}",
                dim / 2
            )));
        }
        Ok(RosenbrockSum { dim, blocks: partition(dim / 2, components) })
    }
}

impl ComponentObjective for RosenbrockSum {
    fn dim(&self) -> usize {
        self.dim
    }

    fn components(&self) -> usize {
        self.blocks.len()
    }

    fn value(&self, j: usize, x: &[f64]) -> f64 {
        self.blocks[j]
            .clone()
            .map(|p| {
                let (a, b) = (x[2 * p], x[2 * p + 1]);
                let r = b - a * a;
                100.0 * r * r + (1.0 - a) * (1.0 - a)
            })
            .sum()
    }

    fn gradient(&self, j: usize, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim];
        for p in self.blocks[j].clone() {
            let (a, b) = (x[2 * p], x[2 * p + 1]);
            let r = b - a * a;
            g[2 * p] = -400.0 * a * r - 2.0 * (1.0 - a);
            g[2 * p + 1] = 200.0 * r;
        }
        g
    }

    fn exact_hvp(&self, j: usize, x: &[f64], v: &[f64]) -> Option<Vec<f64>> {
        let mut out = vec![0.0; self.dim];
        for p in self.blocks[j].clone() {
            let (a, b) = (x[2 * p], x[2 * p + 1]);
            let haa = 1200.0 * a * a - 400.0 * b + 2.0;
            let hab = -400.0 * a;
            let (va, vb) = (v[2 * p], v[2 * p + 1]);
            out[2 * p] = haa * va + hab * vb;
            out[2 * p + 1] = hab * va + 200.0 * vb;
        }
        Some(out)
    }

    fn supports_exact_hvp(&self) -> bool {
        true
    }
}
