//! Graphviz export of exterior simplex categories and flow state graphs.

use std::fmt::Write as _;

use crate::flow::CombFlow;
use crate::poset::ExtCategory;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

pub fn ext_category_dot(c: &ExtCategory) -> String {
    let mut s = String::from("digraph ext {\n  rankdir=LR;\n");
    for o in 0..c.objects.len() {
        let label = format!("{} d={}", c.object_label(o), c.degree[o]);
        let shape = if o == c.terminal { "doublecircle" } else { "ellipse" };
        let _ = writeln!(s, "  n{o} [label={}, shape={shape}];", quote(&label));
    }
    for a in &c.arrows {
        let _ = writeln!(s, "  n{} -> n{} [label={}];", a.source, a.target, quote(&format!("d{}", a.index)));
    }
    s.push_str("}\n");
    s
}

/// States with one edge per nonempty path space, labelled by its number of
/// vertices; composite pairs are dashed.
pub fn flow_dot(x: &CombFlow) -> String {
    let mut s = String::from("digraph flow {\n  rankdir=LR;\n");
    for (i, name) in x.states().iter().enumerate() {
        let _ = writeln!(s, "  s{i} [label={}];", quote(name));
    }
    for ((a, b), sp) in x.paths() {
        let covering = !x.successors(a).any(|m| m != b && x.path(m, b).is_some());
        let style = if covering { "solid" } else { "dashed" };
        let _ = writeln!(s, "  s{a} -> s{b} [label=\"{}\", style={style}];", sp.len(0));
    }
    s.push_str("}\n");
    s
}
