//! Graphviz rendering of a configuration. Grounded generators are white,
//! cues red; bonds carry `relation (phi)` labels and negative bonds are
//! dashed.

use std::fmt::Write;

use crate::kb::SemanticNetwork;
use crate::pt::{Configuration, Level};

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

pub fn export_dot(config: &Configuration, net: &SemanticNetwork) -> String {
    let mut out = String::from("digraph interpretation {\n");
    out.push_str("  node [style=filled, fontname=\"Helvetica\"];\n");
    for (i, g) in config.generators().iter().enumerate() {
        let name = net.concept_term(g.concept).unwrap_or("?");
        let (fill, shape, level) = match g.level {
            Level::Evidence => ("white", "box", "evidence"),
            Level::Hypothesis => ("white", "ellipse", "hypothesis"),
            Level::Cue => ("red", "ellipse", "cue"),
        };
        let _ = writeln!(
            out,
            "  g{i} [label={}, fillcolor={fill}, shape={shape}, tooltip={level}];",
            quote(name)
        );
    }
    for b in config.bonds() {
        let label = format!("{} ({:.2})", net.relation_label(b.relation), b.phi);
        let _ = write!(out, "  g{} -> g{} [label={}", b.from, b.to, quote(&label));
        if b.phi < 0.0 {
            out.push_str(", style=dashed");
        }
        if b.multiplicity > 1 {
            let _ = write!(out, ", penwidth={}", b.multiplicity);
        }
        out.push_str("];\n");
    }
    out.push_str("}\n");
    out
}
