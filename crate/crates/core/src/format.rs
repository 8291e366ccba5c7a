//! Text formats: instance files and per-net route listings.
//!
//! Instance grammar (line oriented, `#` starts a comment, blank lines
//! ignored, trailing tokens rejected):
//!
//! ```text
//! grid R C                      # required, first directive
//! width W                      # optional channel-width budget, W >= 1
//! edge R1 C1 R2 C2 COST        # optional per-edge cost override
//! net ID R1 C1 R2 C2 [R C ...] # one per net, >= 2 terminals
//! ```
//!
//! Routes files carry one `net ID: (r,c)-(r,c) ...` line per net plus a
//! `# width W` metadata comment so renderers can recover the budget.

use std::collections::HashSet;
use std::fmt::Write as _;

use crate::error::Error;
use crate::grid::{EdgeId, GridGraph, Instance, Net, VertexId};
use crate::steiner::RouteTree;
use crate::Result;

/// Parse an instance file. Unspecified edge costs default to 1.0.
pub fn parse_instance(text: &str) -> Result<Instance> {
    let mut graph: Option<GridGraph> = None;
    let mut width: Option<u32> = None;
    let mut nets: Vec<Net> = Vec::new();
    let mut overridden: HashSet<EdgeId> = HashSet::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw);
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        match tokens[0] {
            "grid" => {
                if graph.is_some() {
                    return Err(Error::parse(line_no, "duplicate grid declaration"));
                }
                if tokens.len() != 3 {
                    return Err(Error::parse(line_no, "expected: grid R C"));
                }
                let rows = parse_num::<usize>(line_no, tokens[1], "rows")?;
                let cols = parse_num::<usize>(line_no, tokens[2], "cols")?;
                graph = Some(
                    GridGraph::build(rows, cols, 1.0)
                        .map_err(|e| Error::parse(line_no, e.to_string()))?,
                );
            }
            "width" => {
                let _ = require_graph(line_no, &graph)?;
                if width.is_some() {
                    return Err(Error::parse(line_no, "duplicate width declaration"));
                }
                if tokens.len() != 2 {
                    return Err(Error::parse(line_no, "expected: width W"));
                }
                let w = parse_num::<u32>(line_no, tokens[1], "width")?;
                if w == 0 {
                    return Err(Error::parse(line_no, "width must be at least 1"));
                }
                width = Some(w);
            }
            "edge" => {
                let g = graph
                    .as_mut()
                    .ok_or_else(|| Error::parse(line_no, "edge before grid declaration"))?;
                if tokens.len() != 6 {
                    return Err(Error::parse(line_no, "expected: edge R1 C1 R2 C2 COST"));
                }
                let a = parse_vertex(line_no, g, tokens[1], tokens[2])?;
                let b = parse_vertex(line_no, g, tokens[3], tokens[4])?;
                let cost = parse_num::<f64>(line_no, tokens[5], "cost")?;
                let e = g.edge_between(a, b).ok_or_else(|| {
                    Error::parse(line_no, "edge endpoints are not grid neighbors")
                })?;
                if !overridden.insert(e) {
                    return Err(Error::parse(line_no, "edge cost specified twice"));
                }
                g.set_base_cost(e, cost)
                    .map_err(|err| Error::parse(line_no, err.to_string()))?;
            }
            "net" => {
                let g = require_graph(line_no, &graph)?;
                if tokens.len() < 6 || !(tokens.len() - 2).is_multiple_of(2) {
                    return Err(Error::parse(
                        line_no,
                        "expected: net ID R1 C1 R2 C2 [R C ...]",
                    ));
                }
                let id = parse_num::<u32>(line_no, tokens[1], "net id")?;
                let mut terminals = Vec::new();
                for pair in tokens[2..].chunks(2) {
                    terminals.push(parse_vertex(line_no, g, pair[0], pair[1])?);
                }
                nets.push(Net::new(id, terminals));
            }
            other => {
                return Err(Error::parse(line_no, format!("unknown directive `{other}`")));
            }
        }
    }

    let graph = graph.ok_or_else(|| Error::parse(0, "missing grid declaration"))?;
    Instance::new(graph, nets, width).map_err(|e| match e {
        Error::InvalidArgument(msg) => Error::parse(0, msg),
        other => other,
    })
}

/// Emit an instance in canonical form; `parse_instance(emit_instance(i))`
/// reproduces `i` exactly.
pub fn emit_instance(instance: &Instance) -> String {
    let g = &instance.graph;
    let mut out = String::new();
    writeln!(out, "grid {} {}", g.rows(), g.cols()).unwrap();
    if let Some(w) = instance.initial_width {
        writeln!(out, "width {w}").unwrap();
    }
    for edge in g.edges() {
        if edge.base_cost != 1.0 {
            let (r1, c1) = g.coords(edge.a);
            let (r2, c2) = g.coords(edge.b);
            writeln!(out, "edge {r1} {c1} {r2} {c2} {}", edge.base_cost).unwrap();
        }
    }
    for net in &instance.nets {
        write!(out, "net {}", net.id).unwrap();
        for &t in &net.terminals {
            let (r, c) = g.coords(t);
            write!(out, " {r} {c}").unwrap();
        }
        out.push('\n');
    }
    out
}

/// A parsed routes file: optional width metadata plus per-net edge lists.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutesFile {
    pub width: Option<u32>,
    pub nets: Vec<(u32, Vec<EdgeId>)>,
}

/// Emit per-net route listings with the final budget as metadata.
pub fn emit_routes(graph: &GridGraph, trees: &[RouteTree], width: u32) -> String {
    let mut out = String::new();
    writeln!(out, "# width {width}").unwrap();
    for tree in trees {
        write!(out, "net {}:", tree.net_id).unwrap();
        for &e in &tree.edges {
            let (a, b) = graph.endpoints(e);
            let (r1, c1) = graph.coords(a);
            let (r2, c2) = graph.coords(b);
            write!(out, " ({r1},{c1})-({r2},{c2})").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn parse_routes(graph: &GridGraph, text: &str) -> Result<RoutesFile> {
    let mut width = None;
    let mut nets = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = raw.trim();
        if let Some(rest) = trimmed.strip_prefix("# width ") {
            width = Some(parse_num::<u32>(line_no, rest.trim(), "width")?);
            continue;
        }
        let line = strip_comment(raw);
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let rest = line
            .strip_prefix("net ")
            .ok_or_else(|| Error::parse(line_no, "expected: net ID: (r,c)-(r,c) ..."))?;
        let (id_part, edges_part) = rest
            .split_once(':')
            .ok_or_else(|| Error::parse(line_no, "missing `:` after net id"))?;
        let id = parse_num::<u32>(line_no, id_part.trim(), "net id")?;
        let mut edges = Vec::new();
        for token in edges_part.split_whitespace() {
            edges.push(parse_edge_token(line_no, graph, token)?);
        }
        nets.push((id, edges));
    }
    Ok(RoutesFile { width, nets })
}

fn parse_edge_token(line_no: usize, graph: &GridGraph, token: &str) -> Result<EdgeId> {
    let bad = || Error::parse(line_no, format!("malformed edge `{token}`"));
    let (a, b) = token.split_once(")-(").ok_or_else(bad)?;
    let a = a.strip_prefix('(').ok_or_else(bad)?;
    let b = b.strip_suffix(')').ok_or_else(bad)?;
    let parse_coord = |s: &str| -> Result<VertexId> {
        let (r, c) = s.split_once(',').ok_or_else(bad)?;
        let r = parse_num::<usize>(line_no, r.trim(), "row")?;
        let c = parse_num::<usize>(line_no, c.trim(), "col")?;
        graph
            .try_vertex(r, c)
            .ok_or_else(|| Error::parse(line_no, format!("vertex ({r},{c}) outside the grid")))
    };
    let va = parse_coord(a)?;
    let vb = parse_coord(b)?;
    graph
        .edge_between(va, vb)
        .ok_or_else(|| Error::parse(line_no, format!("`{token}` is not a grid edge")))
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn require_graph(line_no: usize, graph: &Option<GridGraph>) -> Result<&GridGraph> {
    graph
        .as_ref()
        .ok_or_else(|| Error::parse(line_no, "directive before grid declaration"))
}

fn parse_vertex(line_no: usize, g: &GridGraph, r: &str, c: &str) -> Result<VertexId> {
    let row = parse_num::<usize>(line_no, r, "row")?;
    let col = parse_num::<usize>(line_no, c, "col")?;
    g.try_vertex(row, col).ok_or_else(|| {
        Error::parse(
            line_no,
            format!(
                "vertex ({row},{col}) outside the {}x{} grid",
                g.rows(),
                g.cols()
            ),
        )
    })
}

fn parse_num<T: std::str::FromStr>(line_no: usize, token: &str, what: &str) -> Result<T> {
    token
        .parse::<T>()
        .map_err(|_| Error::parse(line_no, format!("invalid {what} `{token}`")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn minimal_instance() {
        let inst = parse_instance("grid 2 2\nnet 0 0 0 1 1\n").unwrap();
        assert_eq!(inst.nets.len(), 1);
        assert_eq!(inst.graph.vertex_count(), 4);
        assert_eq!(inst.initial_width, None);
    }

    #[test]
    fn out_of_range_terminal() {
        let err = parse_instance("grid 3 3\nnet 0 0 0 5 5\n").unwrap_err();
        assert!(err.to_string().contains("outside"));
    }

    #[test]
    fn duplicate_net_id() {
        let err = parse_instance("grid 3 3\nnet 1 0 0 1 1\nnet 1 0 2 2 2\n").unwrap_err();
        assert!(err.to_string().contains("duplicate net id"));
    }

    #[test]
    fn too_few_terminals() {
        assert!(parse_instance("grid 3 3\nnet 0 1 1\n").is_err());
    }

    #[test]
    fn trailing_garbage_rejected() {
        assert!(parse_instance("grid 2 2 extra\nnet 0 0 0 1 1\n").is_err());
        assert!(parse_instance("grid 2 2\nwidth 3 junk\nnet 0 0 0 1 1\n").is_err());
        assert!(parse_instance("grid 2 2\nnet 0 0 0 1 1 9\n").is_err());
    }

    #[test]
    fn unknown_directive_rejected() {
        assert!(parse_instance("grid 2 2\nfrobnicate 1\nnet 0 0 0 1 1\n").is_err());
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# an instance\n\ngrid 2 3   # small\nwidth 2\nnet 0 0 0 1 2\n";
        let inst = parse_instance(text).unwrap();
        assert_eq!(inst.initial_width, Some(2));
    }

    #[test]
    fn edge_cost_override() {
        let inst = parse_instance("grid 2 2\nedge 0 0 0 1 2.5\nnet 0 0 0 1 1\n").unwrap();
        let g = &inst.graph;
        let e = g.edge_between(g.vertex(0, 0), g.vertex(0, 1)).unwrap();
        assert_eq!(g.edge(e).base_cost, 2.5);
    }

    #[test]
    fn edge_must_join_neighbors() {
        assert!(parse_instance("grid 3 3\nedge 0 0 2 2 2.0\nnet 0 0 0 1 1\n").is_err());
    }

    #[test]
    fn duplicate_edge_cost_rejected() {
        let text = "grid 2 2\nedge 0 0 0 1 2.0\nedge 0 0 0 1 3.0\nnet 0 0 0 1 1\n";
        assert!(parse_instance(text).is_err());
        // Same edge written from the other endpoint is still a duplicate.
        let text = "grid 2 2\nedge 0 0 0 1 2.0\nedge 0 1 0 0 3.0\nnet 0 0 0 1 1\n";
        assert!(parse_instance(text).is_err());
    }

    #[test]
    fn zero_width_rejected() {
        assert!(parse_instance("grid 2 2\nwidth 0\nnet 0 0 0 1 1\n").is_err());
        assert!(parse_instance("grid 2 2\nwidth -3\nnet 0 0 0 1 1\n").is_err());
    }

    #[test]
    fn routes_round_trip() {
        let g = GridGraph::build(3, 3, 1.0).unwrap();
        let e1 = g.edge_between(g.vertex(0, 0), g.vertex(0, 1)).unwrap();
        let e2 = g.edge_between(g.vertex(0, 1), g.vertex(1, 1)).unwrap();
        let trees = vec![RouteTree {
            net_id: 7,
            edges: vec![e1, e2],
            cost: 2.0,
        }];
        let text = emit_routes(&g, &trees, 4);
        let parsed = parse_routes(&g, &text).unwrap();
        assert_eq!(parsed.width, Some(4));
        assert_eq!(parsed.nets, vec![(7, vec![e1, e2])]);
    }

    proptest! {
        /// Canonical emission reparses to an equal instance.
        #[test]
        fn instance_round_trip(rows in 2usize..7, cols in 2usize..7, nets in 1usize..6, seed in 0u64..1000) {
            let mut inst = crate::grid::generate_synthetic(rows, cols, nets, 2, seed).unwrap();
            inst.initial_width = Some((seed % 5 + 1) as u32);
            let text = emit_instance(&inst);
            let reparsed = parse_instance(&text).unwrap();
            prop_assert_eq!(inst, reparsed);
        }
    }
}
