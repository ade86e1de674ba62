//! Graphviz rendering of a chain with its cut-graph annotations.

use std::fmt::Write;

use productform::{Analysis, DirectedGraph, FormalChain};

/// HTML-like label; `barK` is drawn as K with an overline.
fn label(text: &str) -> String {
    let escaped = text
        .replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;");
    match escaped.strip_prefix("bar") {
        Some(rest) if !rest.is_empty() => format!("<<O>{rest}</O>>"),
        _ => format!("<{escaped}>"),
    }
}

fn node_id(v: usize) -> String {
    format!("n{v}")
}

/// DOT for `c`. With `annotate >= 1`, the `C1` edges are overlaid inside one
/// cluster per component; with `annotate >= 2`, each hyperedge up to that
/// level is drawn as a point junction joined to its sources.
pub fn render(name: &str, c: &FormalChain, analysis: Option<&Analysis>, annotate: u32) -> String {
    let g: &DirectedGraph = c.graph();
    let mut out = String::new();
    let graph_name = name.replace('"', "'");
    writeln!(out, "digraph \"{graph_name}\" {{").unwrap();
    writeln!(out, "  node [shape=circle];").unwrap();
    let overlay = annotate >= 1 && analysis.is_some();
    match analysis.filter(|_| overlay) {
        Some(a) => {
            for (k, comp) in a.c1.components().iter().enumerate() {
                writeln!(out, "  subgraph cluster_c1_{k} {{").unwrap();
                writeln!(out, "    style=dashed;").unwrap();
                for v in comp.iter() {
                    writeln!(out, "    {} [label={}];", node_id(v), label(g.label(v))).unwrap();
                }
                writeln!(out, "  }}").unwrap();
            }
        }
        None => {
            for v in 0..g.node_count() {
                writeln!(out, "  {} [label={}];", node_id(v), label(g.label(v))).unwrap();
            }
        }
    }
    for (u, v) in g.edges() {
        writeln!(out, "  {} -> {};", node_id(u), node_id(v)).unwrap();
    }
    if let Some(a) = analysis.filter(|_| overlay) {
        for &(i, j) in a.c1.edges() {
            writeln!(
                out,
                "  {} -> {} [dir=none, constraint=false, color=blue, penwidth=2, class=\"c1\"];",
                node_id(i),
                node_id(j)
            )
            .unwrap();
        }
        for level in a.levels.iter().filter(|l| l.level <= annotate) {
            for (k, h) in level.hyperedges.iter().enumerate() {
                let junction = format!("h{}_{k}", level.level);
                writeln!(out, "  {junction} [shape=point, width=0.08, class=\"junction\"];").unwrap();
                for v in h.source_i.iter().chain(h.source_j.iter()) {
                    writeln!(
                        out,
                        "  {junction} -> {} [dir=none, style=dotted, constraint=false, class=\"hyperedge\"];",
                        node_id(v)
                    )
                    .unwrap();
                }
            }
        }
    }
    writeln!(out, "}}").unwrap();
    out
}
