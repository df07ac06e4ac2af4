//! Graphviz rendering.
//!
//! Edges of multiplicity `omega` carry the label `ω`, finite multiplicities
//! above one carry their count. A tail ray is drawn as two dashed vertices
//! followed by an ellipsis node.

use std::fmt::Write;

use corrtail_core::{Graph, Multiplicity};

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

pub fn to_dot(g: &Graph) -> String {
    let mut out = String::from("digraph G {\n");
    for v in g.vertices() {
        writeln!(out, "  {};", quote(v)).unwrap();
    }
    for e in g.edges() {
        let label = match e.mult {
            Multiplicity::Omega => Some("ω".to_string()),
            Multiplicity::Finite(1) => None,
            Multiplicity::Finite(n) => Some(n.to_string()),
        };
        write!(
            out,
            "  {} -> {} [id={}",
            quote(&e.src),
            quote(&e.rng),
            quote(&e.id)
        )
        .unwrap();
        if let Some(l) = label {
            write!(out, ", label={}", quote(&l)).unwrap();
        }
        out.push_str("];\n");
    }
    for t in g.tails() {
        let chain = [
            (format!("{}.1", t.id), "style=dashed".to_string()),
            (format!("{}.2", t.id), "style=dashed".to_string()),
            (
                format!("{}.…", t.id),
                format!("shape=plaintext, label={}", quote("…")),
            ),
        ];
        let mut prev = t.attach.clone();
        for (name, attrs) in chain {
            writeln!(out, "  {} [{attrs}];", quote(&name)).unwrap();
            writeln!(
                out,
                "  {} -> {} [style=dashed];",
                quote(&prev),
                quote(&name)
            )
            .unwrap();
            prev = name;
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use corrtail_core::corpus::fixtures;
    use corrtail_core::transforms::add_tails;

    #[test]
    fn single_edge() {
        let d = to_dot(&fixtures::e2());
        assert_eq!(
            d,
            "digraph G {\n  \"v\";\n  \"w\";\n  \"v\" -> \"w\" [id=\"e\"];\n}\n"
        );
    }

    #[test]
    fn omega_label() {
        assert!(to_dot(&fixtures::e3()).contains("\"v\" -> \"w1\" [id=\"e1\", label=\"ω\"]"));
    }

    #[test]
    fn rays_end_in_ellipsis() {
        let d = to_dot(&add_tails(&fixtures::e1()).unwrap());
        assert!(d.contains("\"w\" -> \"ray_w.1\""));
        assert!(d.contains("\"ray_w.2\" -> \"ray_w.…\""));
        assert!(d.contains("label=\"…\""));
    }
}
