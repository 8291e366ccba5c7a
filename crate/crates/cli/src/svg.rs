//! SVG rendering of routed solutions: the grid in light gray, one color per
//! net, violating edges flagged with a bold red overlay, terminals as dots.

use std::collections::HashMap;
use std::fmt::Write as _;

use gridroute::grid::{EdgeId, Instance};

const CELL: usize = 40;
const MARGIN: usize = 24;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b", "#e377c2", "#17becf", "#bcbd22",
    "#7f7f7f", "#aec7e8",
];

/// Render an instance plus per-net routes. When `width` is known, edges
/// with usage above it are drawn bold red.
pub fn render_svg(instance: &Instance, nets: &[(u32, Vec<EdgeId>)], width: Option<u32>) -> String {
    let g = &instance.graph;
    let pixel = |rc: (usize, usize)| -> (usize, usize) {
        (MARGIN + rc.1 * CELL, MARGIN + rc.0 * CELL)
    };
    let w = 2 * MARGIN + (g.cols() - 1) * CELL;
    let h = 2 * MARGIN + (g.rows() - 1) * CELL;

    let mut usage = vec![0u32; g.edge_count()];
    for (_, edges) in nets {
        for e in edges {
            usage[e.index()] += 1;
        }
    }

    let mut svg = String::new();
    writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">"
    )
    .unwrap();
    writeln!(svg, "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>").unwrap();

    // Base grid.
    for edge in g.edges() {
        let (x1, y1) = pixel(g.coords(edge.a));
        let (x2, y2) = pixel(g.coords(edge.b));
        writeln!(
            svg,
            "<line x1=\"{x1}\" y1=\"{y1}\" x2=\"{x2}\" y2=\"{y2}\" stroke=\"#dddddd\" stroke-width=\"1\"/>"
        )
        .unwrap();
    }

    // Net routes, one color per net.
    let id_to_terminals: HashMap<u32, &[gridroute::grid::VertexId]> = instance
        .nets
        .iter()
        .map(|n| (n.id, n.terminals.as_slice()))
        .collect();
    for (i, (net_id, edges)) in nets.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        for &e in edges {
            let (a, b) = g.endpoints(e);
            let (x1, y1) = pixel(g.coords(a));
            let (x2, y2) = pixel(g.coords(b));
            writeln!(
                svg,
                "<line class=\"net\" x1=\"{x1}\" y1=\"{y1}\" x2=\"{x2}\" y2=\"{y2}\" stroke=\"{color}\" stroke-width=\"3\" stroke-opacity=\"0.65\"/>"
            )
            .unwrap();
        }
        if let Some(terminals) = id_to_terminals.get(net_id) {
            for (k, &t) in terminals.iter().enumerate() {
                let (x, y) = pixel(g.coords(t));
                let r = if k == 0 { 6 } else { 4 };
                writeln!(
                    svg,
                    "<circle cx=\"{x}\" cy=\"{y}\" r=\"{r}\" fill=\"{color}\"/>"
                )
                .unwrap();
            }
        }
    }

    // Violating edges on top, mirroring the bold-edge convention.
    if let Some(width) = width {
        for (idx, &u) in usage.iter().enumerate() {
            if u > width {
                let (a, b) = g.endpoints(EdgeId(idx));
                let (x1, y1) = pixel(g.coords(a));
                let (x2, y2) = pixel(g.coords(b));
                writeln!(
                    svg,
                    "<line class=\"violating\" x1=\"{x1}\" y1=\"{y1}\" x2=\"{x2}\" y2=\"{y2}\" stroke=\"#d62728\" stroke-width=\"6\" stroke-opacity=\"0.85\"/>"
                )
                .unwrap();
            }
        }
    }

    // Grid vertices.
    for v in 0..g.vertex_count() {
        let (x, y) = pixel(g.coords(gridroute::grid::VertexId(v)));
        writeln!(svg, "<circle cx=\"{x}\" cy=\"{y}\" r=\"1.5\" fill=\"#555555\"/>").unwrap();
    }

    svg.push_str("</svg>\n");
    svg
}
