//! Discretization of the ability noise `ε̃ ~ (0, σ²)`.

use std::num::NonZeroUsize;

use gauss_quad::hermite::GaussHermite;
use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseKind {
    /// `±σ` with probability ½ each.
    TwoPoint,
    /// Gauss–Hermite rule for a normal `ε̃`, with `nodes` points.
    GaussHermite { nodes: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub sigma: f64,
}

/// One realization of the noise with its probability weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseNode {
    pub eps: f64,
    pub weight: f64,
}

impl NoiseSpec {
    pub fn two_point(sigma: f64) -> Self {
        NoiseSpec {
            kind: NoiseKind::TwoPoint,
            sigma,
        }
    }

    pub fn gauss_hermite(nodes: usize, sigma: f64) -> Self {
        NoiseSpec {
            kind: NoiseKind::GaussHermite { nodes },
            sigma,
        }
    }

    pub fn variance(&self) -> f64 {
        self.sigma * self.sigma
    }

    /// Nodes and weights of the discrete noise law.
    ///
    /// Weights sum to one, the mean is zero and the variance is `σ²`
    /// (exactly for the two-point law, to 1e-12 for Gauss–Hermite).
    pub fn nodes(&self) -> Result<Vec<NoiseNode>> {
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(ModelError::invalid(
                "noise.sigma",
                format!("must be finite and nonnegative, got {}", self.sigma),
            ));
        }
        if let NoiseKind::GaussHermite { nodes } = self.kind {
            if nodes < 2 {
                return Err(ModelError::invalid(
                    "noise.gh_nodes",
                    format!("Gauss-Hermite needs at least 2 nodes, got {nodes}"),
                ));
            }
        }
        if self.sigma == 0.0 {
            return Ok(vec![NoiseNode {
                eps: 0.0,
                weight: 1.0,
            }]);
        }
        match self.kind {
            NoiseKind::TwoPoint => Ok(vec![
                NoiseNode {
                    eps: -self.sigma,
                    weight: 0.5,
                },
                NoiseNode {
                    eps: self.sigma,
                    weight: 0.5,
                },
            ]),
            NoiseKind::GaussHermite { nodes } => Ok(gauss_hermite_nodes(nodes, self.sigma)),
        }
    }

    /// Largest `|ε|` among the nodes.
    pub fn max_abs(&self) -> Result<f64> {
        Ok(self
            .nodes()?
            .iter()
            .map(|n| n.eps.abs())
            .fold(0.0, f64::max))
    }
}

fn gauss_hermite_nodes(n: usize, sigma: f64) -> Vec<NoiseNode> {
    let rule = GaussHermite::new(NonZeroUsize::new(n).expect("n >= 2"));
    let pairs = rule.as_node_weight_pairs();
    let scale = std::f64::consts::SQRT_2 * sigma;

    // Symmetrize mirrored pairs so the mean vanishes to rounding, then
    // renormalize to a probability law.
    let mut nodes: Vec<NoiseNode> = (0..n)
        .map(|i| {
            let j = n - 1 - i;
            let x = 0.5 * (pairs[i].0 - pairs[j].0);
            let w = 0.5 * (pairs[i].1 + pairs[j].1);
            NoiseNode {
                eps: scale * x,
                weight: w,
            }
        })
        .collect();
    if n % 2 == 1 {
        nodes[n / 2].eps = 0.0;
    }
    let total: f64 = nodes.iter().map(|n| n.weight).sum();
    for node in &mut nodes {
        node.weight /= total;
    }
    nodes
}
