//! Graphviz export.

use std::fmt::Write;

use crate::net::{Endpoint, InteractionSystem, Net};

/// An undirected Graphviz graph: one node per agent labelled `symbol#id`,
/// one point node per interface position, one edge per wire. Edges at a
/// principal port are bold; auxiliary ends carry their port index.
pub fn export_dot(net: &Net, system: &InteractionSystem) -> String {
    let mut out = String::from("graph net {\n  node [shape=box, fontname=\"monospace\"];\n");
    for (id, a) in net.agents() {
        let _ = writeln!(
            out,
            "  a{} [label=\"{}#{}\"];",
            id,
            system.symbol(a.symbol).display,
            id
        );
    }
    for k in 0..net.interface_len() {
        let _ = writeln!(out, "  i{k} [shape=point, xlabel=\"{k}\"];");
    }
    let node = |e: Endpoint| match e {
        Endpoint::Port(id, _) => format!("a{id}"),
        Endpoint::Free(k) => format!("i{k}"),
    };
    let mut wires: Vec<(Endpoint, Endpoint)> = Vec::new();
    for (id, a) in net.agents() {
        for (p, slot) in a.ports.iter().enumerate() {
            let here = Endpoint::Port(id, p as u8);
            match *slot {
                Some(there @ Endpoint::Port(..)) if here < there => wires.push((here, there)),
                Some(there @ Endpoint::Free(_)) => wires.push((here, there)),
                _ => {}
            }
        }
    }
    for (k, slot) in net.interface().enumerate() {
        if let Some(Endpoint::Free(j)) = slot {
            if (k as u32) < j {
                wires.push((Endpoint::Free(k as u32), Endpoint::Free(j)));
            }
        }
    }
    for (a, b) in wires {
        let mut attrs = Vec::new();
        if a.is_principal() || b.is_principal() {
            attrs.push("style=bold".to_string());
        }
        if a.is_principal() && b.is_principal() {
            attrs.push("color=red".to_string());
        }
        for (side, e) in [("taillabel", a), ("headlabel", b)] {
            if let Endpoint::Port(_, p) = e {
                if p > 0 {
                    attrs.push(format!("{side}=\"{p}\""));
                }
            }
        }
        let attrs = if attrs.is_empty() {
            String::new()
        } else {
            format!(" [{}]", attrs.join(", "))
        };
        let _ = writeln!(out, "  {} -- {}{};", node(a), node(b), attrs);
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::Program;

    fn count(dot: &str, needle: &str) -> usize {
        dot.lines().filter(|l| l.contains(needle)).count()
    }

    #[test]
    fn zero() {
        let p = Program::from_source("0").unwrap();
        let dot = export_dot(&p.net().unwrap(), &p.system);
        assert_eq!(count(&dot, "label=\"0#"), 1);
        assert_eq!(count(&dot, "shape=point"), 1);
        assert_eq!(count(&dot, " -- "), 1);
    }

    #[test]
    fn token_edge_is_active() {
        let p = Program::from_source("0").unwrap();
        let dot = export_dot(&p.initial().unwrap(), &p.system);
        assert_eq!(count(&dot, "#"), 2);
        assert_eq!(count(&dot, "color=red"), 1);
    }

    #[test]
    fn identity_application() {
        let p = Program::from_source("(\\x:nat. x) 0").unwrap();
        let dot = export_dot(&p.net().unwrap(), &p.system);
        assert_eq!(count(&dot, "#"), 3);
        assert_eq!(count(&dot, " -- "), 4);
        assert_eq!(dot, export_dot(&p.net().unwrap(), &p.system));
    }
}
