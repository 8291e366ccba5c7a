//! Solution quality metrics.
//!
//! Four quantities are reported: the constraint violation (mean excess over
//! violating edges, alongside the raw excess total and the violating-edge
//! count so other aggregations can be reconstructed), the minimum channel
//! width (peak edge usage), the total wire length (edge uses across all
//! trees), and a critical-path-delay proxy (longest source-to-sink base-cost
//! path over all trees).

use std::collections::HashMap;

use serde::Serialize;

use crate::engine::Solution;
use crate::error::Error;
use crate::grid::{Instance, VertexId};
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    /// Mean excess over violating edges; 0 when feasible.
    pub abs_violation: f64,
    /// Total excess usage over the budget, summed across edges.
    pub total_excess: u64,
    /// Number of edges over budget.
    pub violating_edges: usize,
    /// Peak edge usage of the final solution.
    pub min_channel_width: u32,
    /// Total edge uses across all route trees.
    pub total_wire_length: u64,
    /// Longest source-to-sink base-cost path over all nets.
    pub critical_path_delay: f64,
    pub runtime_seconds: f64,
    pub threads: usize,
}

pub fn compute_metrics(
    solution: &Solution,
    instance: &Instance,
    runtime_seconds: f64,
    threads: usize,
) -> MetricsReport {
    let width = solution.width;
    let mut total_excess = 0u64;
    let mut violating = 0usize;
    for &u in solution.usage.as_slice() {
        if u > width {
            total_excess += (u - width) as u64;
            violating += 1;
        }
    }
    let abs_violation = if violating > 0 {
        total_excess as f64 / violating as f64
    } else {
        0.0
    };
    MetricsReport {
        abs_violation,
        total_excess,
        violating_edges: violating,
        min_channel_width: solution.usage.max_usage(),
        total_wire_length: solution.total_wire_length(),
        critical_path_delay: critical_path_delay(solution, instance),
        runtime_seconds,
        threads,
    }
}

/// Longest source-to-sink path under base costs, maximized over nets. The
/// multipliers are an optimization artifact, so they do not enter the delay.
pub fn critical_path_delay(solution: &Solution, instance: &Instance) -> f64 {
    let graph = &instance.graph;
    let mut worst: f64 = 0.0;
    for (tree, net) in solution.route_trees.iter().zip(&instance.nets) {
        let mut adjacency: HashMap<VertexId, Vec<(VertexId, f64)>> = HashMap::new();
        for &e in &tree.edges {
            let (a, b) = graph.endpoints(e);
            let w = graph.edge(e).base_cost;
            adjacency.entry(a).or_default().push((b, w));
            adjacency.entry(b).or_default().push((a, w));
        }
        let mut delay: HashMap<VertexId, f64> = HashMap::new();
        let mut stack = vec![(net.source(), 0.0)];
        while let Some((v, d)) = stack.pop() {
            if delay.contains_key(&v) {
                continue;
            }
            delay.insert(v, d);
            if let Some(nbrs) = adjacency.get(&v) {
                for &(u, w) in nbrs {
                    if !delay.contains_key(&u) {
                        stack.push((u, d + w));
                    }
                }
            }
        }
        for &sink in net.sinks() {
            if let Some(&d) = delay.get(&sink) {
                worst = worst.max(d);
            }
        }
    }
    worst
}

/// Geometric mean, exp(mean(log x)). Every value must be positive.
pub fn geo_mean(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::invalid("geo_mean of an empty list"));
    }
    if values.iter().any(|&v| v <= 0.0) {
        return Err(Error::invalid("geo_mean requires positive values"));
    }
    let log_sum: f64 = values.iter().map(|v| v.ln()).sum();
    Ok((log_sum / values.len() as f64).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Solution;
    use crate::grid::{GridGraph, Instance, Net};
    use crate::lagrange::UsageCounts;
    use crate::steiner::RouteTree;

    fn straight_net_solution() -> (Instance, Solution) {
        let g = GridGraph::build(1, 5, 1.0).unwrap();
        let edges: Vec<_> = (0..4)
            .map(|c| g.edge_between(g.vertex(0, c), g.vertex(0, c + 1)).unwrap())
            .collect();
        let net = Net::new(0, vec![g.vertex(0, 0), g.vertex(0, 4)]);
        let trees = vec![RouteTree {
            net_id: 0,
            edges: edges.clone(),
            cost: 4.0,
        }];
        let usage = UsageCounts::from_trees(g.edge_count(), &trees);
        let instance = Instance::new(g, vec![net], Some(1)).unwrap();
        let solution = Solution {
            route_trees: trees,
            usage,
            width: 1,
            initial_width: 1,
            best_feasible_width: Some(1),
            history: Vec::new(),
        };
        (instance, solution)
    }

    #[test]
    fn single_path_metrics() {
        let (instance, solution) = straight_net_solution();
        let report = compute_metrics(&solution, &instance, 0.0, 1);
        assert_eq!(report.total_wire_length, 4);
        assert_eq!(report.critical_path_delay, 4.0);
        assert_eq!(report.abs_violation, 0.0);
        assert_eq!(report.min_channel_width, 1);
    }

    #[test]
    fn single_violating_edge_contributes_excess() {
        let g = GridGraph::build(1, 2, 1.0).unwrap();
        let e = g.edge_between(g.vertex(0, 0), g.vertex(0, 1)).unwrap();
        let mut nets = Vec::new();
        let mut trees = Vec::new();
        for id in 0..43u32 {
            nets.push(Net::new(id, vec![g.vertex(0, 0), g.vertex(0, 1)]));
            trees.push(RouteTree {
                net_id: id,
                edges: vec![e],
                cost: 1.0,
            });
        }
        let usage = UsageCounts::from_trees(g.edge_count(), &trees);
        let instance = Instance::new(g, nets, Some(40)).unwrap();
        let solution = Solution {
            route_trees: trees,
            usage,
            width: 40,
            initial_width: 40,
            best_feasible_width: None,
            history: Vec::new(),
        };
        let report = compute_metrics(&solution, &instance, 0.0, 1);
        assert_eq!(report.total_excess, 3);
        assert_eq!(report.violating_edges, 1);
        assert_eq!(report.abs_violation, 3.0);
        assert_eq!(report.min_channel_width, 43);
    }

    #[test]
    fn cpd_star_takes_farthest_sink() {
        // Source at (3,4); straight arms of length 2 and 3 plus a 5-edge
        // snake to the third sink.
        let g = GridGraph::build(6, 10, 1.0).unwrap();
        let v = |r, c| g.vertex(r, c);
        let chain = |pts: &[(usize, usize)]| -> Vec<_> {
            pts.windows(2)
                .map(|w| g.edge_between(v(w[0].0, w[0].1), v(w[1].0, w[1].1)).unwrap())
                .collect()
        };
        let mut edges = chain(&[(3, 4), (2, 4), (1, 4)]);
        edges.extend(chain(&[(3, 4), (3, 5), (3, 6), (3, 7)]));
        edges.extend(chain(&[(3, 4), (4, 4), (5, 4), (5, 5), (5, 6), (5, 7)]));
        edges.sort();
        let net = Net::new(0, vec![v(3, 4), v(1, 4), v(3, 7), v(5, 7)]);
        let trees = vec![RouteTree {
            net_id: 0,
            cost: edges.len() as f64,
            edges,
        }];
        let usage = UsageCounts::from_trees(g.edge_count(), &trees);
        let instance = Instance::new(g, vec![net], None).unwrap();
        let solution = Solution {
            route_trees: trees,
            usage,
            width: 1,
            initial_width: 1,
            best_feasible_width: None,
            history: Vec::new(),
        };
        assert_eq!(critical_path_delay(&solution, &instance), 5.0);
    }

    #[test]
    fn metric_identities_on_random_solutions() {
        for seed in 0..10 {
            let inst = crate::grid::generate_synthetic(6, 6, 8, 3, seed).unwrap();
            let out = crate::engine::run_engine(
                &inst,
                &crate::engine::EngineConfig {
                    max_iter: 5,
                    ..Default::default()
                },
            )
            .unwrap();
            let report = compute_metrics(&out.solution, &inst, 0.0, 1);
            let usage_sum: u64 = out.solution.usage.as_slice().iter().map(|&u| u as u64).sum();
            assert_eq!(report.total_wire_length, usage_sum);
            assert_eq!(report.min_channel_width, out.solution.usage.max_usage());
            // Lower bound: the farthest source-sink pair at minimum edge cost.
            let g = &inst.graph;
            let mut bound: f64 = 0.0;
            for net in &inst.nets {
                let (sr, sc) = g.coords(net.source());
                for &sink in net.sinks() {
                    let (r, c) = g.coords(sink);
                    bound = bound.max((sr.abs_diff(r) + sc.abs_diff(c)) as f64);
                }
            }
            assert!(report.critical_path_delay >= bound);
        }
    }

    #[test]
    fn geo_mean_cases() {
        assert!((geo_mean(&[4.0, 9.0]).unwrap() - 6.0).abs() < 1e-12);
        assert!((geo_mean(&[7.5]).unwrap() - 7.5).abs() < 1e-12);
        assert!((geo_mean(&[2.0, 2.0, 2.0, 2.0]).unwrap() - 2.0).abs() < 1e-12);
        assert!(geo_mean(&[1.0, 0.0]).is_err());
        assert!(geo_mean(&[-1.0]).is_err());
        assert!(geo_mean(&[]).is_err());
    }
}
