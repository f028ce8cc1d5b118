use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};

/// Default number of nodes for a uniform signal grid.
pub const DEFAULT_GRID_NODES: usize = 41;

/// A signal group: signal `y` (equal to the group's mean ability) and its
/// population weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalNode {
    pub y: f64,
    pub weight: f64,
}

/// Finite discretization of the signal distribution on `[y¹, y²]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignalGrid {
    nodes: Vec<SignalNode>,
    lower: f64,
    upper: f64,
}

impl SignalGrid {
    /// `n` equally spaced, equally weighted signals spanning `[y1, y2]`.
    pub fn uniform(y1: f64, y2: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(ModelError::invalid("signals.nodes", "must be at least 1"));
        }
        if !(y1.is_finite() && y2.is_finite()) {
            return Err(ModelError::invalid("signals.y1", "bounds must be finite"));
        }
        if n == 1 && y1 != y2 {
            return Err(ModelError::invalid(
                "signals.nodes",
                "a single-node grid needs y1 == y2",
            ));
        }
        if n > 1 && y2 <= y1 {
            return Err(ModelError::invalid(
                "signals.y2",
                format!("must exceed y1 ({y1}), got {y2}"),
            ));
        }
        let weight = 1.0 / n as f64;
        let nodes = (0..n)
            .map(|i| {
                let y = if n == 1 {
                    y1
                } else if i == n - 1 {
                    y2
                } else {
                    y1 + (y2 - y1) * i as f64 / (n - 1) as f64
                };
                SignalNode { y, weight }
            })
            .collect();
        Self::from_nodes(nodes, y1, y2)
    }

    /// Explicit signals and weights; bounds default to the extreme nodes.
    pub fn from_points(points: &[(f64, f64)]) -> Result<Self> {
        let nodes: Vec<SignalNode> = points
            .iter()
            .map(|&(y, weight)| SignalNode { y, weight })
            .collect();
        let lower = nodes.first().map(|n| n.y).unwrap_or(f64::NAN);
        let upper = nodes.last().map(|n| n.y).unwrap_or(f64::NAN);
        Self::from_nodes(nodes, lower, upper)
    }

    pub fn from_nodes(nodes: Vec<SignalNode>, lower: f64, upper: f64) -> Result<Self> {
        if nodes.is_empty() {
            return Err(ModelError::invalid("signals", "grid has no nodes"));
        }
        for (i, node) in nodes.iter().enumerate() {
            if !node.y.is_finite() {
                return Err(ModelError::invalid(
                    format!("signals.points[{i}]"),
                    "signal must be finite",
                ));
            }
            if !(node.weight.is_finite() && node.weight > 0.0) {
                return Err(ModelError::invalid(
                    format!("signals.points[{i}]"),
                    format!("weight must be positive, got {}", node.weight),
                ));
            }
            if i > 0 && node.y <= nodes[i - 1].y {
                return Err(ModelError::invalid(
                    format!("signals.points[{i}]"),
                    "signals must be strictly increasing",
                ));
            }
        }
        if nodes[0].y < lower || nodes[nodes.len() - 1].y > upper {
            return Err(ModelError::invalid(
                "signals",
                format!("nodes must lie within [{lower}, {upper}]"),
            ));
        }
        let total: f64 = nodes.iter().map(|n| n.weight).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(ModelError::invalid(
                "signals",
                format!("weights must sum to 1, got {total}"),
            ));
        }
        Ok(SignalGrid {
            nodes,
            lower,
            upper,
        })
    }

    pub fn nodes(&self) -> &[SignalNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn signals(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.iter().map(|n| n.y)
    }

    /// Unconditional mean ability `Σ w_i y_i`.
    pub fn mean(&self) -> f64 {
        self.nodes.iter().map(|n| n.weight * n.y).sum()
    }

    /// Index of the node closest to `y` (ties go to the lower node).
    pub fn nearest(&self, y: f64) -> usize {
        let mut best = 0;
        for (i, n) in self.nodes.iter().enumerate() {
            if (n.y - y).abs() < (self.nodes[best].y - y).abs() {
                best = i;
            }
        }
        best
    }
}
