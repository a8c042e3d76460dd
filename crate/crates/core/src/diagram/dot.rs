//! Graphviz rendering of diagrams: inputs on the left, outputs on the right,
//! classical wires dashed and quantum wires solid.

use std::fmt::Write;

use super::normalize::{layer, Atom};
use super::{validate, Diagram, DiagramError, WireType};

fn edge_style(w: &WireType) -> &'static str {
    if w.is_classical() {
        "dashed"
    } else {
        "solid"
    }
}

fn escape(label: &str) -> String {
    label.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Deterministic DOT text for a valid diagram.
pub fn export_dot(d: &Diagram) -> Result<String, DiagramError> {
    let (dom, cod) = validate(d)?;
    let layered = layer(d);
    let mut out = String::new();
    out.push_str("digraph diagram {\n  rankdir=LR;\n");

    let mut sources: Vec<(String, WireType)> = Vec::new();
    for (k, w) in dom.wires().iter().enumerate() {
        let _ = writeln!(out, "  in{k} [shape=point, xlabel=\"{w}\"];");
        sources.push((format!("in{k}"), *w));
    }

    let mut counter = 0usize;
    for layer in &layered.layers {
        let mut next: Vec<(String, WireType)> = Vec::new();
        let mut pos = 0usize;
        for atom in layer {
            let width = atom.dom().len();
            let inputs = &sources[pos..pos + width];
            pos += width;
            if let Atom::Id(_) = atom {
                next.extend_from_slice(inputs);
                continue;
            }
            let node = format!("n{counter}");
            counter += 1;
            let _ = writeln!(out, "  {node} [shape=box, label=\"{}\"];", escape(&atom.label()));
            for (src, w) in inputs {
                let _ = writeln!(out, "  {src} -> {node} [style={}];", edge_style(w));
            }
            for w in atom.cod() {
                next.push((node.clone(), w));
            }
        }
        sources = next;
    }

    for (k, w) in cod.wires().iter().enumerate() {
        let _ = writeln!(out, "  out{k} [shape=point, xlabel=\"{w}\"];");
        let (src, _) = &sources[k];
        let _ = writeln!(out, "  {src} -> out{k} [style={}];", edge_style(w));
    }
    out.push_str("}\n");
    Ok(out)
}
