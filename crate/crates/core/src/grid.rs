//! Grid routing graph and problem instances.
//!
//! The routing universe is an R x C grid of vertices with undirected edges
//! between 4-neighbors. Each edge carries a positive base cost. A problem
//! instance is a graph plus a list of nets (terminal sets to be connected)
//! and an optional initial channel-width budget.

use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Error;
use crate::Result;

/// Index of a grid vertex, encoded row-major as `row * cols + col`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct VertexId(pub usize);

/// Index into the graph's edge array. Each undirected edge has exactly one id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct EdgeId(pub usize);

impl VertexId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl EdgeId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// An undirected grid edge. Endpoints are stored with `a < b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub a: VertexId,
    pub b: VertexId,
    pub base_cost: f64,
}

/// Weighted 4-neighbor grid graph. Immutable once built (edge costs may be
/// overridden before the instance is assembled, not during routing).
/// Adjacency is stored flat (CSR) so the routing inner loops stay cache
/// friendly.
#[derive(Debug, Clone, PartialEq)]
pub struct GridGraph {
    rows: usize,
    cols: usize,
    edges: Vec<Edge>,
    adj_offsets: Vec<u32>,
    adj_flat: Vec<(VertexId, EdgeId)>,
}

impl GridGraph {
    /// Build an R x C grid with a uniform base cost on every edge.
    ///
    /// The edge array is enumerated in a fixed canonical order (row-major
    /// over vertices, rightward edge before downward edge), which all
    /// deterministic tie-breaking in the routing kernels relies on.
    pub fn build(rows: usize, cols: usize, uniform_cost: f64) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("grid dimensions must be positive"));
        }
        if rows * cols < 2 {
            return Err(Error::invalid("grid must contain at least two vertices"));
        }
        if !uniform_cost.is_finite() || uniform_cost <= 0.0 {
            return Err(Error::invalid(format!(
                "edge cost must be positive and finite, got {uniform_cost}"
            )));
        }

        let n = rows * cols;
        let mut edges = Vec::with_capacity(2 * rows * cols - rows - cols);
        let mut adjacency = vec![Vec::new(); n];
        for r in 0..rows {
            for c in 0..cols {
                let v = VertexId(r * cols + c);
                if c + 1 < cols {
                    let u = VertexId(r * cols + c + 1);
                    push_edge(&mut edges, &mut adjacency, v, u, uniform_cost);
                }
                if r + 1 < rows {
                    let u = VertexId((r + 1) * cols + c);
                    push_edge(&mut edges, &mut adjacency, v, u, uniform_cost);
                }
            }
        }
        debug_assert_eq!(edges.len(), 2 * rows * cols - rows - cols);

        let mut adj_offsets = Vec::with_capacity(n + 1);
        let mut adj_flat = Vec::with_capacity(2 * edges.len());
        adj_offsets.push(0);
        for list in adjacency {
            adj_flat.extend(list);
            adj_offsets.push(adj_flat.len() as u32);
        }
        Ok(GridGraph {
            rows,
            cols,
            edges,
            adj_offsets,
            adj_flat,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn vertex_count(&self) -> usize {
        self.rows * self.cols
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Vertex id for in-range coordinates.
    pub fn vertex(&self, row: usize, col: usize) -> VertexId {
        debug_assert!(row < self.rows && col < self.cols);
        VertexId(row * self.cols + col)
    }

    pub fn try_vertex(&self, row: usize, col: usize) -> Option<VertexId> {
        if row < self.rows && col < self.cols {
            Some(VertexId(row * self.cols + col))
        } else {
            None
        }
    }

    pub fn coords(&self, v: VertexId) -> (usize, usize) {
        (v.0 / self.cols, v.0 % self.cols)
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e.0]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn endpoints(&self, e: EdgeId) -> (VertexId, VertexId) {
        let edge = &self.edges[e.0];
        (edge.a, edge.b)
    }

    /// Neighbors of `v` as `(neighbor, edge)` pairs, in ascending EdgeId order.
    pub fn neighbors(&self, v: VertexId) -> &[(VertexId, EdgeId)] {
        let lo = self.adj_offsets[v.0] as usize;
        let hi = self.adj_offsets[v.0 + 1] as usize;
        &self.adj_flat[lo..hi]
    }

    pub fn edge_between(&self, u: VertexId, v: VertexId) -> Option<EdgeId> {
        self.neighbors(u)
            .iter()
            .find(|(w, _)| *w == v)
            .map(|(_, e)| *e)
    }

    pub fn set_base_cost(&mut self, e: EdgeId, cost: f64) -> Result<()> {
        if !cost.is_finite() || cost <= 0.0 {
            return Err(Error::invalid(format!(
                "edge cost must be positive and finite, got {cost}"
            )));
        }
        self.edges[e.0].base_cost = cost;
        Ok(())
    }
}

fn push_edge(
    edges: &mut Vec<Edge>,
    adjacency: &mut [Vec<(VertexId, EdgeId)>],
    a: VertexId,
    b: VertexId,
    cost: f64,
) {
    let id = EdgeId(edges.len());
    edges.push(Edge {
        a,
        b,
        base_cost: cost,
    });
    adjacency[a.0].push((b, id));
    adjacency[b.0].push((a, id));
}

/// One routing demand: a set of terminals (first is the source) plus the
/// Steiner points accumulated for it during the first routing iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct Net {
    pub id: u32,
    pub terminals: Vec<VertexId>,
    pub steiner_points: Vec<VertexId>,
}

impl Net {
    pub fn new(id: u32, terminals: Vec<VertexId>) -> Self {
        Net {
            id,
            terminals,
            steiner_points: Vec::new(),
        }
    }

    pub fn source(&self) -> VertexId {
        self.terminals[0]
    }

    pub fn sinks(&self) -> &[VertexId] {
        &self.terminals[1..]
    }
}

/// A routing problem: graph, nets, and an optional channel-width budget.
/// `initial_width`, when present, plays the role of the externally supplied
/// minimum channel width that the engine scales by its width factor.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub graph: GridGraph,
    pub nets: Vec<Net>,
    pub initial_width: Option<u32>,
}

impl Instance {
    /// Assemble an instance, checking every net invariant against the graph.
    pub fn new(graph: GridGraph, nets: Vec<Net>, initial_width: Option<u32>) -> Result<Self> {
        if nets.is_empty() {
            return Err(Error::invalid("instance must contain at least one net"));
        }
        if initial_width == Some(0) {
            return Err(Error::invalid("width must be a positive integer"));
        }
        let n = graph.vertex_count();
        let mut seen_ids = HashSet::new();
        for net in &nets {
            if !seen_ids.insert(net.id) {
                return Err(Error::invalid(format!("duplicate net id {}", net.id)));
            }
            if net.terminals.len() < 2 {
                return Err(Error::invalid(format!(
                    "net {} must have at least two terminals",
                    net.id
                )));
            }
            let mut seen = HashSet::new();
            for &t in &net.terminals {
                if t.0 >= n {
                    return Err(Error::invalid(format!(
                        "net {} references vertex {} outside the grid",
                        net.id, t.0
                    )));
                }
                if !seen.insert(t) {
                    return Err(Error::invalid(format!(
                        "net {} lists terminal {} twice",
                        net.id, t.0
                    )));
                }
            }
            for &s in &net.steiner_points {
                if s.0 >= n || seen.contains(&s) {
                    return Err(Error::invalid(format!(
                        "net {} has an invalid Steiner point {}",
                        net.id, s.0
                    )));
                }
            }
        }
        Ok(Instance {
            graph,
            nets,
            initial_width,
        })
    }
}

/// Deterministically generate a random instance on a uniform-cost grid.
/// Terminals are drawn without replacement per net; the same seed always
/// yields the same instance.
pub fn generate_synthetic(
    rows: usize,
    cols: usize,
    n_nets: usize,
    terminals_per_net: usize,
    seed: u64,
) -> Result<Instance> {
    let graph = GridGraph::build(rows, cols, 1.0)?;
    if n_nets == 0 {
        return Err(Error::invalid("n_nets must be at least 1"));
    }
    if terminals_per_net < 2 {
        return Err(Error::invalid("terminals_per_net must be at least 2"));
    }
    if terminals_per_net > graph.vertex_count() {
        return Err(Error::invalid(format!(
            "cannot place {terminals_per_net} distinct terminals on {} vertices",
            graph.vertex_count()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nets = (0..n_nets)
        .map(|i| {
            let picks = rand::seq::index::sample(&mut rng, graph.vertex_count(), terminals_per_net);
            Net::new(i as u32, picks.iter().map(VertexId).collect())
        })
        .collect();
    Instance::new(graph, nets, None)
}
