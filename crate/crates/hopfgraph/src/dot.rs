//! Graphviz DOT export.  Parallel edges and self-loops are emitted as
//! separate edge statements; external legs become point-shaped stub nodes
//! attached with dashed lines.

use std::fmt::Write as _;

use crate::graph::Graph;
use crate::weight::{format_rat, Rat};

pub fn graph_to_dot(g: &Graph, name: &str, weight: Option<&Rat>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "graph {name} {{");
    if let Some(w) = weight {
        let _ = writeln!(out, "  label=\"weight {}\";", format_rat(w));
    }
    let _ = writeln!(out, "  node [shape=circle];");
    for v in 1..=g.vertex_count() {
        let _ = writeln!(out, "  v{v};");
    }
    for leg in g.legs() {
        let _ = writeln!(
            out,
            "  x{0} [shape=point, xlabel=\"x{0}\"];",
            leg.label.0
        );
    }
    for e in g.edges() {
        let species = if e.species.0 > 1 {
            format!(" [label=\"s{}\"]", e.species.0)
        } else {
            String::new()
        };
        let _ = writeln!(out, "  v{} -- v{}{};", e.a, e.b, species);
    }
    for leg in g.legs() {
        let _ = writeln!(out, "  v{} -- x{} [style=dashed];", leg.vertex, leg.label.0);
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::test_support::g;
    use crate::weight::rat;

    #[test]
    fn emits_loops_legs_and_weight() {
        let dot = graph_to_dot(&g(2, &[(2, 1)], &[(1, 1), (1, 2)]), "g0", Some(&rat(1, 2)));
        assert!(dot.contains("label=\"weight 1/2\""));
        assert!(dot.contains("v1 -- v1;"));
        assert!(dot.contains("v1 -- v2;"));
        assert!(dot.contains("v2 -- x1 [style=dashed];"));
        assert!(dot.starts_with("graph g0 {"));
        assert!(dot.ends_with("}\n"));
    }
}
