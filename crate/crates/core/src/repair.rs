//! Post-hoc repair of channel-capacity violations.
//!
//! For each edge whose usage exceeds the budget W, demand is diverted onto
//! alternate paths between the edge's endpoints. A path is admissible when
//! it avoids the edge itself and every other violating edge. The minimum
//! residual capacity along the path (Threshold) caps how many nets may be
//! diverted in one pass: q = min(Threshold, d) nets are rerouted, so no edge
//! on the path can be pushed over budget. Passes repeat until the violation
//! is gone or no admissible path remains.
//!
//! Two refinements are selectable: evaluating beta candidate paths per pass
//! and keeping the one that lets the most nets move (`beta`), and ordering
//! the diverted nets by how few new edges the replacement adds (`sort_nets`).

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use serde::Serialize;

use crate::engine::Solution;
use crate::grid::{EdgeId, GridGraph, Instance, VertexId};
use crate::steiner::{canonical_tree, dijkstra, CostView};

/// Repair tuning. `beta = 1` with `sort_nets = false` is the base heuristic;
/// the shipped default evaluates three candidate paths and sorts the nets.
#[derive(Debug, Clone, PartialEq)]
pub struct RepairConfig {
    /// Number of candidate paths evaluated per pass (>= 1).
    pub beta: usize,
    /// Divert the nets that gain the fewest new edges first.
    pub sort_nets: bool,
    /// Safety valve on passes per edge; each pass makes strict progress, so
    /// this never binds at realistic sizes.
    pub max_passes: usize,
}

impl Default for RepairConfig {
    fn default() -> Self {
        RepairConfig {
            beta: 3,
            sort_nets: true,
            max_passes: 10_000,
        }
    }
}

/// A violating edge and the nets currently routed through it.
#[derive(Debug, Clone, PartialEq)]
pub struct ViolationRecord {
    pub edge: EdgeId,
    /// Violation amount, usage - W (> 0).
    pub d: u32,
    /// Ids of the nets whose trees contain the edge, ascending.
    pub nets_using: Vec<u32>,
}

/// An admissible detour between the endpoints of a violating edge.
#[derive(Debug, Clone, PartialEq)]
pub struct AlternatePath {
    /// Edge sequence chaining from one endpoint of the repaired edge to
    /// the other; contains neither that edge nor any other violating edge.
    pub edges: Vec<EdgeId>,
    /// Minimum residual capacity along the path, min(W - usage).
    pub threshold: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RepairOutcome {
    Eliminated,
    Reduced,
    NoPath,
}

/// One inner pass: the chosen path, its threshold, and the nets moved.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepairPass {
    pub path: Vec<EdgeId>,
    pub threshold: u32,
    pub q: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeRepairRecord {
    pub edge: EdgeId,
    pub d_before: u32,
    pub passes: Vec<RepairPass>,
    pub q_total: u32,
    pub outcome: RepairOutcome,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RepairReport {
    pub entries: Vec<EdgeRepairRecord>,
}

impl RepairReport {
    pub fn count(&self, outcome: RepairOutcome) -> usize {
        self.entries.iter().filter(|e| e.outcome == outcome).count()
    }
}

/// Snapshot the nets currently using `edge`.
pub fn violation_record(solution: &Solution, edge: EdgeId) -> ViolationRecord {
    let mut nets_using: Vec<u32> = solution
        .route_trees
        .iter()
        .filter(|t| t.edges.binary_search(&edge).is_ok())
        .map(|t| t.net_id)
        .collect();
    nets_using.sort_unstable();
    ViolationRecord {
        edge,
        d: solution.usage.get(edge).saturating_sub(solution.width),
        nets_using,
    }
}

/// Find up to `beta` admissible detours around `edge`, cheapest first under
/// the effective costs. Empty when every detour crosses a violating edge.
pub fn find_alternate_paths(
    solution: &Solution,
    graph: &GridGraph,
    lambda: &[f64],
    edge: EdgeId,
    beta: usize,
) -> Vec<AlternatePath> {
    let view = CostView::new(graph, lambda);
    find_paths(&view, solution, edge, beta)
}

fn find_paths(view: &CostView, solution: &Solution, edge: EdgeId, beta: usize) -> Vec<AlternatePath> {
    let width = solution.width;
    let (src, dst) = view.graph().endpoints(edge);
    let admissible = |e: EdgeId| e != edge && solution.usage.get(e) <= width;
    k_shortest_paths(view, src, dst, beta, &admissible)
        .into_iter()
        .map(|p| {
            let threshold = compute_threshold(solution, &p.edges);
            AlternatePath {
                edges: p.edges,
                threshold,
            }
        })
        .collect()
}

/// Minimum residual capacity along a path: min over its edges of (W - usage).
pub fn compute_threshold(solution: &Solution, path: &[EdgeId]) -> u32 {
    path.iter()
        .map(|&e| solution.width.saturating_sub(solution.usage.get(e)))
        .min()
        .unwrap_or(0)
}

/// Repair one violating edge: repeatedly pick the candidate path that lets
/// the most nets move (ties: shorter path, then lower edge ids), divert
/// q = min(Threshold, d) nets onto it, and re-search until the violation is
/// eliminated or no useful path remains.
pub fn repair_edge(
    solution: &mut Solution,
    instance: &Instance,
    lambda: &[f64],
    edge: EdgeId,
    config: &RepairConfig,
) -> EdgeRepairRecord {
    let width = solution.width;
    let d_before = solution.usage.get(edge).saturating_sub(width);
    let mut record = EdgeRepairRecord {
        edge,
        d_before,
        passes: Vec::new(),
        q_total: 0,
        outcome: RepairOutcome::Eliminated,
    };
    if d_before == 0 {
        return record;
    }

    let view = CostView::new(&instance.graph, lambda);
    for _ in 0..config.max_passes {
        let d = solution.usage.get(edge).saturating_sub(width);
        if d == 0 {
            record.outcome = RepairOutcome::Eliminated;
            return record;
        }
        let candidates = find_paths(&view, solution, edge, config.beta.max(1));
        let best = candidates
            .into_iter()
            .max_by(|a, b| {
                let qa = a.threshold.min(d);
                let qb = b.threshold.min(d);
                qa.cmp(&qb)
                    .then_with(|| b.edges.len().cmp(&a.edges.len()))
                    .then_with(|| b.edges.cmp(&a.edges))
            });
        let best = match best {
            Some(p) => p,
            None => {
                record.outcome = stuck_outcome(record.q_total);
                return record;
            }
        };
        let q = best.threshold.min(d);
        if q == 0 {
            // Only saturated detours remain; a further pass would reselect
            // the same path and move nothing.
            record.outcome = stuck_outcome(record.q_total);
            return record;
        }

        let mut users: Vec<usize> = solution
            .route_trees
            .iter()
            .enumerate()
            .filter(|(_, t)| t.edges.binary_search(&edge).is_ok())
            .map(|(i, _)| i)
            .collect();
        users.sort_by_key(|&i| solution.route_trees[i].net_id);
        if config.sort_nets {
            users.sort_by_key(|&i| {
                let tree = &solution.route_trees[i];
                let new_edges = best
                    .edges
                    .iter()
                    .filter(|e| tree.edges.binary_search(e).is_err())
                    .count();
                (new_edges, tree.net_id)
            });
        }

        for &tree_idx in users.iter().take(q as usize) {
            splice(solution, instance, &view, tree_idx, edge, &best.edges);
        }
        record.passes.push(RepairPass {
            path: best.edges,
            threshold: best.threshold,
            q,
        });
        record.q_total += q;
    }
    record.outcome = stuck_outcome(record.q_total);
    record
}

fn stuck_outcome(q_total: u32) -> RepairOutcome {
    if q_total > 0 {
        RepairOutcome::Reduced
    } else {
        RepairOutcome::NoPath
    }
}

/// Run the repair over every violating edge in ascending EdgeId order.
/// Total violation never increases; edges fixed as a side effect of earlier
/// repairs are reported as eliminated with zero passes.
pub fn repair_all(
    solution: &mut Solution,
    instance: &Instance,
    lambda: &[f64],
    config: &RepairConfig,
) -> RepairReport {
    let width = solution.width;
    let initial: Vec<(EdgeId, u32)> = solution
        .usage
        .violating_edges(width)
        .into_iter()
        .map(|e| (e, solution.usage.get(e) - width))
        .collect();

    let mut report = RepairReport::default();
    for (edge, d_initial) in initial {
        let mut record = repair_edge(solution, instance, lambda, edge, config);
        record.d_before = d_initial;
        report.entries.push(record);
    }
    report
}

/// Replace `removed` with `path` in one net's tree: union the remaining tree
/// edges with the path, extract a spanning tree under effective costs, prune
/// dangling non-terminal branches, and account usage by the symmetric
/// difference.
fn splice(
    solution: &mut Solution,
    instance: &Instance,
    view: &CostView,
    tree_idx: usize,
    removed: EdgeId,
    path: &[EdgeId],
) {
    let net = &instance.nets[tree_idx];
    debug_assert_eq!(net.id, solution.route_trees[tree_idx].net_id);

    let old: Vec<EdgeId> = solution.route_trees[tree_idx].edges.clone();
    let mut union: Vec<EdgeId> = old.iter().copied().filter(|&e| e != removed).collect();
    union.extend(path.iter().copied());
    let new_edges = canonical_tree(view, union, &net.terminals);

    // Usage moves by the symmetric difference; both edge lists are sorted.
    for &e in &old {
        if new_edges.binary_search(&e).is_err() {
            solution.usage.decrement(e);
        }
    }
    for &e in &new_edges {
        if old.binary_search(&e).is_err() {
            solution.usage.increment(e);
        }
    }

    let tree = &mut solution.route_trees[tree_idx];
    tree.cost = new_edges.iter().map(|&e| view.effective_cost(e)).sum();
    tree.edges = new_edges;
}

// ---------------------------------------------------------------------------
// Yen's k shortest simple paths over the admissible subgraph
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
struct SimplePath {
    cost: f64,
    edges: Vec<EdgeId>,
    vertices: Vec<VertexId>,
}

impl PartialEq for SimplePath {
    fn eq(&self, other: &Self) -> bool {
        self.edges == other.edges
    }
}

impl Eq for SimplePath {}

impl PartialOrd for SimplePath {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SimplePath {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed (cost, edge ids) so the heap pops the cheapest path first.
        other
            .cost
            .partial_cmp(&self.cost)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.edges.cmp(&self.edges))
    }
}

fn k_shortest_paths<F>(
    view: &CostView,
    src: VertexId,
    dst: VertexId,
    k: usize,
    edge_ok: &F,
) -> Vec<SimplePath>
where
    F: Fn(EdgeId) -> bool,
{
    let mut accepted: Vec<SimplePath> = Vec::new();
    let sp = dijkstra(view, src, edge_ok, |_| true, Some(&[dst]));
    match (sp.path_to(dst), sp.vertices_to(dst)) {
        (Some((edges, cost)), Some(vertices)) => accepted.push(SimplePath {
            cost,
            edges,
            vertices,
        }),
        _ => return accepted,
    }

    let mut candidates: BinaryHeap<SimplePath> = BinaryHeap::new();
    let mut seen: HashSet<Vec<EdgeId>> = HashSet::new();
    seen.insert(accepted[0].edges.clone());

    while accepted.len() < k {
        let prev = accepted.last().unwrap().clone();
        for spur_idx in 0..prev.vertices.len() - 1 {
            let spur_node = prev.vertices[spur_idx];
            let root_edges = &prev.edges[..spur_idx];
            let root_vertices = &prev.vertices[..=spur_idx];
            let root_cost: f64 = root_edges.iter().map(|&e| view.effective_cost(e)).sum();

            let mut removed_edges: HashSet<EdgeId> = HashSet::new();
            for p in &accepted {
                if p.vertices.len() > spur_idx && p.vertices[..=spur_idx] == *root_vertices {
                    removed_edges.insert(p.edges[spur_idx]);
                }
            }
            let banned_vertices: HashSet<VertexId> =
                root_vertices[..spur_idx].iter().copied().collect();

            let spur = dijkstra(
                view,
                spur_node,
                |e| edge_ok(e) && !removed_edges.contains(&e),
                |v| !banned_vertices.contains(&v),
                Some(&[dst]),
            );
            if let (Some((spur_edges, spur_cost)), Some(spur_vertices)) =
                (spur.path_to(dst), spur.vertices_to(dst))
            {
                let mut edges = root_edges.to_vec();
                edges.extend(spur_edges);
                if !seen.insert(edges.clone()) {
                    continue;
                }
                let mut vertices = root_vertices.to_vec();
                vertices.extend(&spur_vertices[1..]);
                candidates.push(SimplePath {
                    cost: root_cost + spur_cost,
                    edges,
                    vertices,
                });
            }
        }
        match candidates.pop() {
            Some(next) => accepted.push(next),
            None => break,
        }
    }
    accepted
}
