//! Lagrange multipliers and the primal-dual sub-gradient update.
//!
//! Capacity constraints are relaxed into the objective with one multiplier
//! per edge. After each routing iteration the multipliers move along the
//! clamped violation vector, scaled by a step of (1/k) over the 2-norm of
//! that vector. Multipliers start at zero and never decrease.

use serde::Serialize;

use crate::grid::EdgeId;
use crate::steiner::RouteTree;

/// Per-edge usage counts: how many route trees contain each edge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UsageCounts {
    counts: Vec<u32>,
}

impl UsageCounts {
    pub fn new(n_edges: usize) -> Self {
        UsageCounts {
            counts: vec![0; n_edges],
        }
    }

    /// Recount from scratch over the given route trees.
    pub fn from_trees(n_edges: usize, trees: &[RouteTree]) -> Self {
        let mut usage = UsageCounts::new(n_edges);
        for tree in trees {
            for &e in &tree.edges {
                usage.counts[e.0] += 1;
            }
        }
        usage
    }

    pub fn get(&self, e: EdgeId) -> u32 {
        self.counts[e.0]
    }

    pub fn increment(&mut self, e: EdgeId) {
        self.counts[e.0] += 1;
    }

    pub fn decrement(&mut self, e: EdgeId) {
        debug_assert!(self.counts[e.0] > 0);
        self.counts[e.0] -= 1;
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn max_usage(&self) -> u32 {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    /// Total excess over the budget, summed across edges.
    pub fn total_violation(&self, width: u32) -> u64 {
        self.counts
            .iter()
            .map(|&u| u.saturating_sub(width) as u64)
            .sum()
    }

    /// Edges currently over budget, ascending.
    pub fn violating_edges(&self, width: u32) -> Vec<EdgeId> {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &u)| u > width)
            .map(|(i, _)| EdgeId(i))
            .collect()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.counts
    }
}

/// Multiplier state across iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangeState {
    /// Per-edge multipliers, non-negative, zero before iteration 1.
    pub lambda: Vec<f64>,
    /// Iteration counter, starting at 1.
    pub k: usize,
    /// Step size applied by the most recent update.
    pub last_step: f64,
    /// Residual vector that scaled the most recent step.
    pub kkt_vector: Vec<f64>,
}

impl LagrangeState {
    pub fn new(n_edges: usize) -> Self {
        LagrangeState {
            lambda: vec![0.0; n_edges],
            k: 1,
            last_step: 0.0,
            kkt_vector: vec![0.0; n_edges],
        }
    }
}

/// Clamped violation vector: `max(0, usage - W)` per edge.
pub fn subgradient(usage: &UsageCounts, width: u32) -> Vec<f64> {
    usage
        .as_slice()
        .iter()
        .map(|&u| u.saturating_sub(width) as f64)
        .collect()
}

/// Step size (1/k) / ||T||_2, and zero at the fixed point where the
/// residual vanishes.
pub fn step_size(k: usize, kkt_vector: &[f64]) -> f64 {
    debug_assert!(k >= 1);
    let norm = kkt_vector.iter().map(|g| g * g).sum::<f64>().sqrt();
    if norm == 0.0 {
        0.0
    } else {
        (1.0 / k as f64) / norm
    }
}

/// Apply one primal-dual update: compute the sub-gradient from the current
/// usage, scale it by the step for iteration k, add it to the multipliers,
/// and advance the counter. Edges within budget keep their multiplier.
pub fn update_multipliers(state: &mut LagrangeState, usage: &UsageCounts, width: u32) {
    debug_assert_eq!(state.lambda.len(), usage.len());
    let g = subgradient(usage, width);
    let alpha = step_size(state.k, &g);
    for (lam, gi) in state.lambda.iter_mut().zip(&g) {
        *lam += alpha * gi;
    }
    state.last_step = alpha;
    state.kkt_vector = g;
    state.k += 1;
}
