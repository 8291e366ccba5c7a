//! Exhaustive reference solver for tiny instances.
//!
//! Enumerates, per net, every minimal Steiner tree (all leaves are
//! terminals), then searches the cross product for the exact minimum total
//! wire length under the capacity budget and, separately, the exact minimum
//! achievable channel width. Strictly a test harness: guarded to grids of at
//! most 4x4, 3 nets, and 3 terminals per net, and never called by the
//! engine.

use std::collections::BTreeSet;

use crate::error::Error;
use crate::grid::{EdgeId, GridGraph, Instance, VertexId};
use crate::Result;

pub const MAX_ORACLE_ROWS: usize = 4;
pub const MAX_ORACLE_COLS: usize = 4;
pub const MAX_ORACLE_NETS: usize = 3;
pub const MAX_ORACLE_TERMINALS: usize = 3;

#[derive(Debug, Clone)]
pub struct EnumerationLimits {
    /// Cap on minimal trees enumerated per net.
    pub max_trees_per_net: usize,
    /// Cap on combination-search steps.
    pub max_steps: u64,
}

impl Default for EnumerationLimits {
    fn default() -> Self {
        EnumerationLimits {
            max_trees_per_net: 500_000,
            max_steps: 50_000_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExhaustiveResult {
    /// Exact minimum total wire length subject to the capacity budget, or
    /// None when no feasible combination exists at that budget.
    pub optimal_wire_length: Option<u64>,
    /// Per-net edge sets achieving the wire-length optimum.
    pub wire_witness: Option<Vec<Vec<EdgeId>>>,
    /// Exact minimum achievable channel width over all routings.
    pub min_channel_width: u32,
    /// Per-net edge sets achieving the width optimum.
    pub width_witness: Vec<Vec<EdgeId>>,
}

/// Exhaustively solve a tiny instance. The wire-length optimum uses the
/// instance's declared width as the budget, or no effective budget when
/// absent (a budget of N_nets never binds).
pub fn enumerate_routings(
    instance: &Instance,
    limits: &EnumerationLimits,
) -> Result<ExhaustiveResult> {
    let graph = &instance.graph;
    if graph.rows() > MAX_ORACLE_ROWS || graph.cols() > MAX_ORACLE_COLS {
        return Err(Error::TooLarge(format!(
            "grid {}x{} exceeds {}x{}",
            graph.rows(),
            graph.cols(),
            MAX_ORACLE_ROWS,
            MAX_ORACLE_COLS
        )));
    }
    if instance.nets.len() > MAX_ORACLE_NETS {
        return Err(Error::TooLarge(format!(
            "{} nets exceed {}",
            instance.nets.len(),
            MAX_ORACLE_NETS
        )));
    }
    if let Some(n) = instance
        .nets
        .iter()
        .find(|n| n.terminals.len() > MAX_ORACLE_TERMINALS)
    {
        return Err(Error::TooLarge(format!(
            "net {} has {} terminals, exceeding {}",
            n.id,
            n.terminals.len(),
            MAX_ORACLE_TERMINALS
        )));
    }

    let tree_lists: Vec<Vec<Vec<EdgeId>>> = instance
        .nets
        .iter()
        .map(|net| minimal_steiner_trees(graph, &net.terminals, limits.max_trees_per_net))
        .collect::<Result<_>>()?;

    let width_budget = instance
        .initial_width
        .unwrap_or(instance.nets.len() as u32);

    let mut steps = limits.max_steps;
    let wire = min_total_wire(graph, &tree_lists, width_budget, &mut steps)?;
    let (min_width, width_witness) = min_channel_width(graph, &tree_lists, &mut steps)?;

    Ok(ExhaustiveResult {
        optimal_wire_length: wire.as_ref().map(|(len, _)| *len),
        wire_witness: wire.map(|(_, w)| w),
        min_channel_width: min_width,
        width_witness,
    })
}

/// Enumerate every minimal Steiner tree for the terminal set: connected
/// acyclic edge sets covering all terminals whose every leaf is a terminal.
/// Uses the classic include/exclude recursion on frontier edges, which
/// visits each tree exactly once.
pub fn minimal_steiner_trees(
    graph: &GridGraph,
    terminals: &[VertexId],
    max_trees: usize,
) -> Result<Vec<Vec<EdgeId>>> {
    assert!(terminals.len() >= 2);
    let root = *terminals.iter().min().unwrap();
    let terminal_set: BTreeSet<VertexId> = terminals.iter().copied().collect();

    struct Search<'a> {
        graph: &'a GridGraph,
        terminal_set: &'a BTreeSet<VertexId>,
        max_trees: usize,
        tree_edges: Vec<EdgeId>,
        in_tree: Vec<bool>,
        forbidden: Vec<bool>,
        degree: Vec<u32>,
        missing_terminals: usize,
        results: Vec<Vec<EdgeId>>,
        overflow: bool,
    }

    impl Search<'_> {
        fn frontier_pivot(&self) -> Option<(EdgeId, VertexId)> {
            let mut best: Option<(EdgeId, VertexId)> = None;
            for (v_idx, &inside) in self.in_tree.iter().enumerate() {
                if !inside {
                    continue;
                }
                for &(u, e) in self.graph.neighbors(VertexId(v_idx)) {
                    if self.in_tree[u.0] || self.forbidden[e.0] {
                        continue;
                    }
                    if best.is_none_or(|(be, _)| e < be) {
                        best = Some((e, u));
                    }
                }
            }
            best
        }

        fn recurse(&mut self) {
            if self.overflow {
                return;
            }
            if self.missing_terminals == 0 {
                // Extending a spanning tree only adds non-terminal leaves,
                // so nothing minimal lies beyond this state.
                let minimal = self.tree_edges.iter().all(|&e| {
                    let (a, b) = self.graph.endpoints(e);
                    (self.degree[a.0] > 1 || self.terminal_set.contains(&a))
                        && (self.degree[b.0] > 1 || self.terminal_set.contains(&b))
                });
                if minimal && !self.tree_edges.is_empty() {
                    if self.results.len() >= self.max_trees {
                        self.overflow = true;
                        return;
                    }
                    let mut edges = self.tree_edges.clone();
                    edges.sort();
                    self.results.push(edges);
                }
                return;
            }
            let Some((pivot, new_vertex)) = self.frontier_pivot() else {
                return;
            };

            // Include the pivot.
            self.tree_edges.push(pivot);
            self.in_tree[new_vertex.0] = true;
            let (a, b) = self.graph.endpoints(pivot);
            self.degree[a.0] += 1;
            self.degree[b.0] += 1;
            if self.terminal_set.contains(&new_vertex) {
                self.missing_terminals -= 1;
            }
            self.recurse();
            if self.terminal_set.contains(&new_vertex) {
                self.missing_terminals += 1;
            }
            self.degree[a.0] -= 1;
            self.degree[b.0] -= 1;
            self.in_tree[new_vertex.0] = false;
            self.tree_edges.pop();

            // Exclude it permanently on this branch.
            self.forbidden[pivot.0] = true;
            self.recurse();
            self.forbidden[pivot.0] = false;
        }
    }

    let mut search = Search {
        graph,
        terminal_set: &terminal_set,
        max_trees,
        tree_edges: Vec::new(),
        in_tree: vec![false; graph.vertex_count()],
        forbidden: vec![false; graph.edge_count()],
        degree: vec![0; graph.vertex_count()],
        missing_terminals: terminal_set.len() - 1,
        results: Vec::new(),
        overflow: false,
    };
    search.in_tree[root.0] = true;
    search.recurse();
    if search.overflow {
        return Err(Error::TooLarge(format!(
            "more than {max_trees} minimal trees for one net"
        )));
    }
    Ok(search.results)
}

type Witness = Vec<Vec<EdgeId>>;

fn min_total_wire(
    graph: &GridGraph,
    tree_lists: &[Vec<Vec<EdgeId>>],
    width: u32,
    steps: &mut u64,
) -> Result<Option<(u64, Witness)>> {
    // Admissible lower bound on the remaining nets: their unconstrained minima.
    let suffix_min: Vec<u64> = {
        let mins: Vec<u64> = tree_lists
            .iter()
            .map(|l| l.iter().map(|t| t.len() as u64).min().unwrap_or(0))
            .collect();
        let mut suffix = vec![0u64; mins.len() + 1];
        for i in (0..mins.len()).rev() {
            suffix[i] = suffix[i + 1] + mins[i];
        }
        suffix
    };

    let mut usage = vec![0u32; graph.edge_count()];
    let mut chosen = vec![0usize; tree_lists.len()];
    let mut best: Option<(u64, Witness)> = None;

    fn rec(
        tree_lists: &[Vec<Vec<EdgeId>>],
        suffix_min: &[u64],
        width: u32,
        i: usize,
        len_so_far: u64,
        usage: &mut [u32],
        chosen: &mut [usize],
        best: &mut Option<(u64, Witness)>,
        steps: &mut u64,
    ) -> Result<()> {
        if *steps == 0 {
            return Err(Error::TooLarge("combination search budget exhausted".into()));
        }
        *steps -= 1;
        if let Some((b, _)) = best {
            if len_so_far + suffix_min[i] >= *b {
                return Ok(());
            }
        }
        if i == tree_lists.len() {
            let witness = chosen
                .iter()
                .enumerate()
                .map(|(n, &t)| tree_lists[n][t].clone())
                .collect();
            *best = Some((len_so_far, witness));
            return Ok(());
        }
        'trees: for (t_idx, tree) in tree_lists[i].iter().enumerate() {
            for &e in tree {
                if usage[e.0] + 1 > width {
                    continue 'trees;
                }
            }
            for &e in tree {
                usage[e.0] += 1;
            }
            chosen[i] = t_idx;
            rec(
                tree_lists,
                suffix_min,
                width,
                i + 1,
                len_so_far + tree.len() as u64,
                usage,
                chosen,
                best,
                steps,
            )?;
            for &e in tree {
                usage[e.0] -= 1;
            }
        }
        Ok(())
    }

    rec(
        tree_lists,
        &suffix_min,
        width,
        0,
        0,
        &mut usage,
        &mut chosen,
        &mut best,
        steps,
    )?;
    Ok(best)
}

fn min_channel_width(
    graph: &GridGraph,
    tree_lists: &[Vec<Vec<EdgeId>>],
    steps: &mut u64,
) -> Result<(u32, Witness)> {
    let mut usage = vec![0u32; graph.edge_count()];
    let mut chosen = vec![0usize; tree_lists.len()];
    let mut best: Option<(u32, Witness)> = None;

    fn rec(
        tree_lists: &[Vec<Vec<EdgeId>>],
        i: usize,
        max_so_far: u32,
        usage: &mut [u32],
        chosen: &mut [usize],
        best: &mut Option<(u32, Witness)>,
        steps: &mut u64,
    ) -> Result<()> {
        if *steps == 0 {
            return Err(Error::TooLarge("combination search budget exhausted".into()));
        }
        *steps -= 1;
        if let Some((b, _)) = best {
            if max_so_far >= *b {
                return Ok(());
            }
        }
        if i == tree_lists.len() {
            let witness = chosen
                .iter()
                .enumerate()
                .map(|(n, &t)| tree_lists[n][t].clone())
                .collect();
            *best = Some((max_so_far, witness));
            return Ok(());
        }
        for (t_idx, tree) in tree_lists[i].iter().enumerate() {
            let mut new_max = max_so_far;
            for &e in tree {
                usage[e.0] += 1;
                new_max = new_max.max(usage[e.0]);
            }
            chosen[i] = t_idx;
            rec(tree_lists, i + 1, new_max, usage, chosen, best, steps)?;
            for &e in tree {
                usage[e.0] -= 1;
            }
        }
        Ok(())
    }

    rec(
        tree_lists,
        0,
        0,
        &mut usage,
        &mut chosen,
        &mut best,
        steps,
    )?;
    let (width, witness) = best.expect("at least one combination always exists");
    Ok((width, witness))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_instance;
    use crate::grid::generate_synthetic;
    use crate::steiner::is_tree_spanning;

    #[test]
    fn single_net_shortest_distance() {
        let inst = parse_instance("grid 3 3\nnet 0 0 0 2 1\n").unwrap();
        let res = enumerate_routings(&inst, &EnumerationLimits::default()).unwrap();
        assert_eq!(res.optimal_wire_length, Some(3));
        assert_eq!(res.min_channel_width, 1);
        let witness = res.wire_witness.unwrap();
        assert!(is_tree_spanning(
            &inst.graph,
            &witness[0],
            &inst.nets[0].terminals
        ));
    }

    #[test]
    fn crossing_nets_admit_disjoint_routes() {
        // A vertical and a horizontal net crossing mid-grid share a vertex
        // but no edge, so width 1 is achievable.
        let inst = parse_instance("grid 3 3\nwidth 1\nnet 0 0 1 2 1\nnet 1 1 0 1 2\n").unwrap();
        let res = enumerate_routings(&inst, &EnumerationLimits::default()).unwrap();
        assert_eq!(res.min_channel_width, 1);
        assert_eq!(res.optimal_wire_length, Some(4));
        for (w, net) in res.width_witness.iter().zip(&inst.nets) {
            assert!(is_tree_spanning(&inst.graph, w, &net.terminals));
        }
    }

    #[test]
    fn conflicting_nets_need_width_two() {
        // Two identical nets across a 1x2 grid must both use the only edge.
        let inst = parse_instance("grid 1 2\nwidth 1\nnet 0 0 0 0 1\nnet 1 0 0 0 1\n").unwrap();
        let res = enumerate_routings(&inst, &EnumerationLimits::default()).unwrap();
        assert_eq!(res.min_channel_width, 2);
        assert_eq!(res.optimal_wire_length, None); // infeasible at width 1
    }

    #[test]
    fn guard_rejects_large_instances() {
        let big_grid = generate_synthetic(5, 5, 1, 2, 0).unwrap();
        assert!(matches!(
            enumerate_routings(&big_grid, &EnumerationLimits::default()),
            Err(Error::TooLarge(_))
        ));
        let many_nets = generate_synthetic(4, 4, 4, 2, 0).unwrap();
        assert!(enumerate_routings(&many_nets, &EnumerationLimits::default()).is_err());
        let many_terminals = generate_synthetic(4, 4, 1, 4, 0).unwrap();
        assert!(enumerate_routings(&many_terminals, &EnumerationLimits::default()).is_err());
    }

    #[test]
    fn witnesses_achieve_reported_optima() {
        for seed in 0..20 {
            let inst = generate_synthetic(3, 4, 2, 3, seed).unwrap();
            let res = enumerate_routings(&inst, &EnumerationLimits::default()).unwrap();
            let mut usage = vec![0u32; inst.graph.edge_count()];
            for tree in &res.width_witness {
                for &e in tree {
                    usage[e.0] += 1;
                }
            }
            assert_eq!(usage.iter().max().copied().unwrap(), res.min_channel_width);
            for (tree, net) in res.width_witness.iter().zip(&inst.nets) {
                assert!(is_tree_spanning(&inst.graph, tree, &net.terminals));
            }
        }
    }

    #[test]
    fn minimal_trees_on_path_graph() {
        // On a 1xN path there is exactly one minimal tree per terminal pair.
        let g = GridGraph::build(1, 4, 1.0).unwrap();
        let trees =
            minimal_steiner_trees(&g, &[VertexId(0), VertexId(3)], 1000).unwrap();
        assert_eq!(trees.len(), 1);
        assert_eq!(trees[0].len(), 3);
    }

    #[test]
    fn minimal_tree_count_matches_simple_paths_for_two_terminals() {
        // For 2-terminal nets, minimal Steiner trees are exactly the simple
        // paths between the terminals.
        let g = GridGraph::build(3, 3, 1.0).unwrap();
        let a = g.vertex(0, 0);
        let b = g.vertex(2, 2);
        let trees = minimal_steiner_trees(&g, &[a, b], 100_000).unwrap();
        let paths = count_simple_paths(&g, a, b);
        assert_eq!(trees.len(), paths);
    }

    fn count_simple_paths(g: &GridGraph, from: VertexId, to: VertexId) -> usize {
        fn rec(g: &GridGraph, v: VertexId, to: VertexId, visited: &mut Vec<bool>) -> usize {
            if v == to {
                return 1;
            }
            let mut total = 0;
            for &(u, _) in g.neighbors(v) {
                if !visited[u.0] {
                    visited[u.0] = true;
                    total += rec(g, u, to, visited);
                    visited[u.0] = false;
                }
            }
            total
        }
        let mut visited = vec![false; g.vertex_count()];
        visited[from.0] = true;
        rec(g, from, to, &mut visited)
    }
}
