//! Per-net routing kernel.
//!
//! A net is routed as a Steiner tree under the current effective edge costs
//! (base cost plus Lagrange multiplier): candidate Steiner vertices are found
//! by scanning vertex triples of the terminal set, then the terminals and
//! candidates are joined through a minimum spanning tree of their metric
//! closure, expanded back onto the grid.
//!
//! All tie-breaking is by lowest EdgeId / lowest VertexId so results are
//! identical across runs and thread counts.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::grid::{EdgeId, GridGraph, Net, VertexId};
use crate::Result;

/// Full triple enumeration is capped at this many terminals; larger sets are
/// sampled instead.
const FULL_TRIPLE_ENUMERATION_LIMIT: usize = 30;
/// Number of sampled triples when the terminal set exceeds the cap.
const SAMPLED_TRIPLES: usize = 27_000;
/// Candidate scan covers the whole grid up to this many vertices; above it
/// the scan is restricted to the triple's bounding box.
const EXHAUSTIVE_SCAN_VERTEX_LIMIT: usize = 10_000;

/// Read-only view of the graph under the current multipliers. The effective
/// cost of an edge is its base cost plus its multiplier; the sums are
/// materialized once per view so the routing inner loop reads one array.
pub struct CostView<'a> {
    graph: &'a GridGraph,
    effective: Vec<f64>,
}

impl<'a> CostView<'a> {
    pub fn new(graph: &'a GridGraph, lambda: &[f64]) -> Self {
        assert_eq!(lambda.len(), graph.edge_count());
        debug_assert!(lambda.iter().all(|&l| l >= 0.0), "multipliers stay non-negative");
        let effective = graph
            .edges()
            .iter()
            .zip(lambda)
            .map(|(e, l)| e.base_cost + l)
            .collect();
        CostView { graph, effective }
    }

    pub fn graph(&self) -> &'a GridGraph {
        self.graph
    }

    pub fn effective_cost(&self, e: EdgeId) -> f64 {
        self.effective[e.0]
    }
}

/// The route of one net: an edge set forming a tree that spans the net's
/// terminals. Edge membership encodes the binary decision variables.
#[derive(Debug, Clone, PartialEq)]
pub struct RouteTree {
    pub net_id: u32,
    /// Member edges, sorted ascending.
    pub edges: Vec<EdgeId>,
    /// Sum of effective costs of the member edges at routing time.
    pub cost: f64,
}

impl RouteTree {
    /// Structural validity: connected, acyclic, and covering `terminals`.
    pub fn is_valid(&self, graph: &GridGraph, terminals: &[VertexId]) -> bool {
        is_tree_spanning(graph, &self.edges, terminals)
    }
}

/// Check that `edges` forms a connected acyclic subgraph containing every
/// vertex of `terminals`.
pub fn is_tree_spanning(graph: &GridGraph, edges: &[EdgeId], terminals: &[VertexId]) -> bool {
    if edges.is_empty() {
        return false;
    }
    let mut vertices = BTreeSet::new();
    for &e in edges {
        let (a, b) = graph.endpoints(e);
        vertices.insert(a);
        vertices.insert(b);
    }
    if !terminals.iter().all(|t| vertices.contains(t)) {
        return false;
    }
    if vertices.len() != edges.len() + 1 {
        return false; // acyclicity given connectivity
    }
    let mut dsu = Dsu::new(graph.vertex_count());
    let mut components = vertices.len();
    for &e in edges {
        let (a, b) = graph.endpoints(e);
        if dsu.union(a.0, b.0) {
            components -= 1;
        }
    }
    components == 1
}

// ---------------------------------------------------------------------------
// Dijkstra with deterministic tie-breaking
// ---------------------------------------------------------------------------

/// Min-heap entry ordered by (score, vertex), smallest first.
#[derive(Copy, Clone, Debug)]
struct MinScored(f64, VertexId);

impl PartialEq for MinScored {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for MinScored {}

impl PartialOrd for MinScored {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for MinScored {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed so BinaryHeap pops the smallest (cost, vertex) first.
        // Costs are finite positive sums; NaN never occurs.
        other
            .0
            .partial_cmp(&self.0)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.1.cmp(&self.1))
    }
}

const NO_PARENT: u32 = u32::MAX;

pub(crate) struct ShortestPaths {
    pub dist: Vec<f64>,
    parent_vertex: Vec<u32>,
    parent_edge: Vec<u32>,
}

impl ShortestPaths {
    /// Walk parents from `to` back to the source, returning the edge sequence
    /// oriented source -> `to`. None if `to` is unreachable.
    pub fn path_to(&self, to: VertexId) -> Option<(Vec<EdgeId>, f64)> {
        if self.dist[to.0].is_infinite() {
            return None;
        }
        let mut edges = Vec::new();
        let mut v = to;
        while self.parent_edge[v.0] != NO_PARENT {
            edges.push(EdgeId(self.parent_edge[v.0] as usize));
            v = VertexId(self.parent_vertex[v.0] as usize);
        }
        edges.reverse();
        Some((edges, self.dist[to.0]))
    }

    /// Vertex sequence from the source to `to`, inclusive.
    pub fn vertices_to(&self, to: VertexId) -> Option<Vec<VertexId>> {
        if self.dist[to.0].is_infinite() {
            return None;
        }
        let mut vertices = vec![to];
        let mut v = to;
        while self.parent_vertex[v.0] != NO_PARENT {
            let p = VertexId(self.parent_vertex[v.0] as usize);
            vertices.push(p);
            v = p;
        }
        vertices.reverse();
        Some(vertices)
    }
}

/// Dijkstra from `source` over edges/vertices admitted by the filters.
/// Deterministic: vertices settle in (distance, vertex id) order and only
/// strict improvements relax, so equal-cost ties resolve toward the
/// earliest-settled (lowest id) parent. With `targets` given, the search
/// stops once every target has been settled; distances and parents of
/// settled vertices match the full run exactly.
pub(crate) fn dijkstra<FE, FV>(
    costs: &CostView,
    source: VertexId,
    edge_ok: FE,
    vertex_ok: FV,
    targets: Option<&[VertexId]>,
) -> ShortestPaths
where
    FE: Fn(EdgeId) -> bool,
    FV: Fn(VertexId) -> bool,
{
    let n = costs.graph().vertex_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut parent_vertex = vec![NO_PARENT; n];
    let mut parent_edge = vec![NO_PARENT; n];
    let mut heap = BinaryHeap::new();
    dist[source.0] = 0.0;
    heap.push(MinScored(0.0, source));

    let mut is_target = Vec::new();
    let mut remaining = 0usize;
    if let Some(targets) = targets {
        is_target = vec![false; n];
        for &t in targets {
            if t != source && !is_target[t.0] {
                is_target[t.0] = true;
                remaining += 1;
            }
        }
        if remaining == 0 {
            return ShortestPaths {
                dist,
                parent_vertex,
                parent_edge,
            };
        }
    }

    while let Some(MinScored(d, u)) = heap.pop() {
        if d > dist[u.0] {
            continue;
        }
        if targets.is_some() && is_target[u.0] {
            is_target[u.0] = false;
            remaining -= 1;
            if remaining == 0 {
                break;
            }
        }
        for &(v, e) in costs.graph().neighbors(u) {
            if !edge_ok(e) || !vertex_ok(v) {
                continue;
            }
            let nd = d + costs.effective_cost(e);
            if nd < dist[v.0] {
                dist[v.0] = nd;
                parent_vertex[v.0] = u.0 as u32;
                parent_edge[v.0] = e.0 as u32;
                heap.push(MinScored(nd, v));
            }
        }
    }

    ShortestPaths {
        dist,
        parent_vertex,
        parent_edge,
    }
}

pub(crate) fn dijkstra_all(costs: &CostView, source: VertexId) -> ShortestPaths {
    dijkstra(costs, source, |_| true, |_| true, None)
}

/// Minimum-effective-cost simple path between two distinct vertices.
pub fn shortest_path(
    costs: &CostView,
    from: VertexId,
    to: VertexId,
) -> Result<(Vec<EdgeId>, f64)> {
    if from == to {
        return Err(Error::invalid("shortest_path endpoints must differ"));
    }
    let sp = dijkstra(costs, from, |_| true, |_| true, Some(&[to]));
    // A grid graph is connected, so the target is always reachable.
    Ok(sp.path_to(to).expect("grid graphs are connected"))
}

// ---------------------------------------------------------------------------
// Steiner candidates
// ---------------------------------------------------------------------------

/// For each triple of terminals, find the vertex minimizing the summed
/// shortest-path distance to the three members. The vertex is kept when it
/// is not a terminal and strictly beats connecting the triple without any
/// extra vertex (the two cheapest closure edges of the triple).
pub fn find_steiner_candidates(
    costs: &CostView,
    terminals: &[VertexId],
    seed: u64,
) -> Vec<VertexId> {
    if terminals.len() < 3 {
        return Vec::new();
    }
    let mut sorted: Vec<VertexId> = terminals.to_vec();
    sorted.sort();
    sorted.dedup();
    let k = sorted.len();
    let dist: Vec<Vec<f64>> = sorted
        .iter()
        .map(|&t| dijkstra_all(costs, t).dist)
        .collect();
    let terminal_set: BTreeSet<VertexId> = sorted.iter().copied().collect();

    let triples: Vec<[usize; 3]> = if k <= FULL_TRIPLE_ENUMERATION_LIMIT {
        let mut out = Vec::new();
        for i in 0..k {
            for j in i + 1..k {
                for l in j + 1..k {
                    out.push([i, j, l]);
                }
            }
        }
        out
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..SAMPLED_TRIPLES)
            .map(|_| {
                let mut idx: Vec<usize> = rand::seq::index::sample(&mut rng, k, 3).into_vec();
                idx.sort_unstable();
                [idx[0], idx[1], idx[2]]
            })
            .collect()
    };

    let graph = costs.graph();
    let exhaustive = graph.vertex_count() <= EXHAUSTIVE_SCAN_VERTEX_LIMIT;
    let mut winners = BTreeSet::new();
    for [i, j, l] in triples {
        let d_ij = dist[i][sorted[j].0];
        let d_il = dist[i][sorted[l].0];
        let d_jl = dist[j][sorted[l].0];
        let without = d_ij + d_il + d_jl - d_ij.max(d_il).max(d_jl);

        let mut best: Option<(f64, VertexId)> = None;
        let mut consider = |v: VertexId| {
            if terminal_set.contains(&v) {
                return;
            }
            let sum = dist[i][v.0] + dist[j][v.0] + dist[l][v.0];
            match best {
                Some((bs, bv)) if sum > bs || (sum == bs && v >= bv) => {}
                _ => best = Some((sum, v)),
            }
        };
        if exhaustive {
            for v in 0..graph.vertex_count() {
                consider(VertexId(v));
            }
        } else {
            let coords = [
                graph.coords(sorted[i]),
                graph.coords(sorted[j]),
                graph.coords(sorted[l]),
            ];
            let r0 = coords.iter().map(|c| c.0).min().unwrap();
            let r1 = coords.iter().map(|c| c.0).max().unwrap();
            let c0 = coords.iter().map(|c| c.1).min().unwrap();
            let c1 = coords.iter().map(|c| c.1).max().unwrap();
            for r in r0..=r1 {
                for c in c0..=c1 {
                    consider(graph.vertex(r, c));
                }
            }
        }
        if let Some((sum, v)) = best {
            if sum < without {
                winners.insert(v);
            }
        }
    }
    winners.into_iter().collect()
}

// ---------------------------------------------------------------------------
// Metric-closure MST routing
// ---------------------------------------------------------------------------

/// Build a route tree spanning `terminals` (and optionally passing through
/// `extras`) by taking the MST of the metric closure over all the points,
/// expanding each MST edge into its underlying grid path, re-extracting a
/// spanning tree from the union, and pruning non-terminal leaves.
pub fn metric_closure_mst(
    costs: &CostView,
    net_id: u32,
    terminals: &[VertexId],
    extras: &[VertexId],
) -> RouteTree {
    debug_assert!(terminals.len() >= 2);
    let mut points: Vec<VertexId> = terminals.iter().chain(extras.iter()).copied().collect();
    points.sort();
    points.dedup();

    // Distances are symmetric, so point i only needs to settle points i+1...
    let paths: Vec<ShortestPaths> = (0..points.len())
        .map(|i| dijkstra(costs, points[i], |_| true, |_| true, Some(&points[i + 1..])))
        .collect();

    // Kruskal over the complete closure graph; ties by point indices.
    let mut closure_edges: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            closure_edges.push((paths[i].dist[points[j].0], i, j));
        }
    }
    closure_edges.sort_by(|x, y| {
        x.0.partial_cmp(&y.0)
            .unwrap_or(Ordering::Equal)
            .then(x.1.cmp(&y.1))
            .then(x.2.cmp(&y.2))
    });
    let mut dsu = Dsu::new(points.len());
    let mut union_edges: Vec<EdgeId> = Vec::new();
    for (_, i, j) in closure_edges {
        if dsu.union(i, j) {
            let (path, _) = paths[i].path_to(points[j]).expect("connected grid");
            union_edges.extend(path);
        }
    }

    let tree_edges = canonical_tree(costs, union_edges, terminals);
    let cost = tree_edges.iter().map(|&e| costs.effective_cost(e)).sum();
    RouteTree {
        net_id,
        edges: tree_edges,
        cost,
    }
}

/// Extract a spanning tree from a connected edge multiset (Kruskal on
/// effective cost, ties by EdgeId), then iteratively delete degree-1
/// vertices that are not terminals. Returns the surviving edges sorted
/// ascending.
pub(crate) fn canonical_tree(
    costs: &CostView,
    mut edges: Vec<EdgeId>,
    terminals: &[VertexId],
) -> Vec<EdgeId> {
    let graph = costs.graph();
    edges.sort();
    edges.dedup();
    edges.sort_by(|&x, &y| {
        costs
            .effective_cost(x)
            .partial_cmp(&costs.effective_cost(y))
            .unwrap_or(Ordering::Equal)
            .then(x.cmp(&y))
    });
    // DSU over the compact vertex set of the union, not the whole grid.
    let mut vertices: Vec<VertexId> = Vec::with_capacity(2 * edges.len());
    for &e in &edges {
        let (a, b) = graph.endpoints(e);
        vertices.push(a);
        vertices.push(b);
    }
    vertices.sort();
    vertices.dedup();
    let vertex_index = |v: VertexId| vertices.binary_search(&v).unwrap();
    let mut dsu = Dsu::new(vertices.len());
    let mut tree: Vec<EdgeId> = Vec::new();
    for e in edges {
        let (a, b) = graph.endpoints(e);
        if dsu.union(vertex_index(a), vertex_index(b)) {
            tree.push(e);
        }
    }

    // Peel dangling non-terminal branches leaf by leaf.
    let mut is_terminal = vec![false; vertices.len()];
    for t in terminals {
        if let Ok(i) = vertices.binary_search(t) {
            is_terminal[i] = true;
        }
    }
    let mut degree = vec![0u8; vertices.len()];
    for &e in &tree {
        let (a, b) = graph.endpoints(e);
        degree[vertex_index(a)] += 1;
        degree[vertex_index(b)] += 1;
    }
    let mut alive = vec![true; tree.len()];
    let mut queue: Vec<usize> = (0..vertices.len())
        .filter(|&i| degree[i] == 1 && !is_terminal[i])
        .collect();
    while let Some(leaf) = queue.pop() {
        // Drop the single alive edge at this leaf.
        let mut found = None;
        for (idx, &e) in tree.iter().enumerate() {
            if !alive[idx] {
                continue;
            }
            let (a, b) = graph.endpoints(e);
            if vertex_index(a) == leaf || vertex_index(b) == leaf {
                found = Some((idx, if vertex_index(a) == leaf { b } else { a }));
                break;
            }
        }
        let Some((idx, other)) = found else { continue };
        alive[idx] = false;
        degree[leaf] = 0;
        let o = vertex_index(other);
        degree[o] -= 1;
        if degree[o] == 1 && !is_terminal[o] {
            queue.push(o);
        }
    }
    let mut result: Vec<EdgeId> = tree
        .into_iter()
        .zip(&alive)
        .filter(|(_, &keep)| keep)
        .map(|(e, _)| e)
        .collect();
    result.sort();
    result
}

/// Route one net. On the first iteration the net's Steiner points are
/// computed and stored; later iterations reuse them.
pub fn route_net(costs: &CostView, net: &mut Net, first_iteration: bool, seed: u64) -> RouteTree {
    if first_iteration {
        net.steiner_points = find_steiner_candidates(costs, &net.terminals, seed);
    }
    metric_closure_mst(costs, net.id, &net.terminals, &net.steiner_points)
}

// ---------------------------------------------------------------------------
// Disjoint-set union
// ---------------------------------------------------------------------------

pub(crate) struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    pub fn new(n: usize) -> Self {
        Dsu {
            parent: (0..n).collect(),
        }
    }

    pub fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    /// Returns true if the two elements were in different sets.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra == rb {
            false
        } else {
            self.parent[ra.max(rb)] = ra.min(rb);
            true
        }
    }
}
