//! Desk-scale uniqueness checks: a homomorphism out of `C*(E, V)` given on
//! generators, its kernel, and the three conditions that force injectivity.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{edge_copies, gauge_failure, path_space_rep, verify_ck_relations, CKRep, GaugeGrading};
use crate::error::{Error, Result};
use crate::graph::{classify_vertices, Graph, VertexId, VertexSet};
use crate::linalg::{span_closure, Mat};
use crate::transforms::quotient_graph;

/// Where the generators of `C*(E, V)` are sent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum HomSpec {
    Identity,
    /// Onto `C*(E / H, W)`, killing `p_v` for `v` in `H`.
    Quotient {
        h: VertexSet,
    },
    /// Onto `C*(E, W)` for `V` inside `W`.
    Relative {
        w: VertexSet,
    },
    /// Explicit matrices for every vertex and edge copy.
    Matrices {
        dim: usize,
        p: BTreeMap<VertexId, Mat>,
        s: BTreeMap<String, Mat>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GiuReport {
    pub source_dim: usize,
    pub target_dim: usize,
    pub algebra_dim: usize,
    pub kernel_dim: usize,
    pub image_dim: usize,
    /// Condition (1): `rho(p_v) != 0`.
    pub vertex_condition: BTreeMap<VertexId, bool>,
    /// Condition (2): `rho(p_v - sum s_e s_e^*) != 0` for `v` in `R(E) \ V`.
    pub defect_condition: BTreeMap<VertexId, bool>,
    /// Condition (3): a diagonal gauge grading on the target making `rho`
    /// equivariant, verified as a Laurent polynomial identity.
    pub gauge_condition: bool,
    pub gauge_witness: Option<String>,
    pub conditions_hold: bool,
    /// Conditions that fail, by name.
    pub failing: Vec<String>,
    /// False exactly when all conditions hold yet the kernel is nonzero.
    pub consistent: bool,
    /// Kernel basis in the source representation.
    pub kernel_basis: Vec<Mat>,
}

fn target_rep(g: &Graph, v_set: &VertexSet, source: &CKRep, spec: &HomSpec) -> Result<CKRep> {
    match spec {
        HomSpec::Identity => Ok(source.clone()),
        HomSpec::Relative { w } => {
            if !v_set.is_subset(w) {
                return Err(Error::NotHomomorphism(format!(
                    "V = {v_set} is not inside W = {w}"
                )));
            }
            path_space_rep(g, w, None)
        }
        HomSpec::Quotient { h } => {
            let q = quotient_graph(g, h)?;
            let regular_f = classify_vertices(&q.graph)?.regular();
            let w = v_set.difference(h).intersection(&regular_f);
            let f = path_space_rep(&q.graph, &w, None)?;
            let zero = Mat::zero(f.dim);
            let p = g
                .vertices()
                .iter()
                .map(|v| {
                    (
                        v.clone(),
                        f.p.get(v).cloned().unwrap_or_else(|| zero.clone()),
                    )
                })
                .collect();
            let s = source
                .copies
                .iter()
                .map(|c| {
                    (
                        c.id.clone(),
                        f.s.get(&c.id).cloned().unwrap_or_else(|| zero.clone()),
                    )
                })
                .collect();
            Ok(CKRep {
                graph: g.clone(),
                v_set: v_set.clone(),
                dim: f.dim,
                basis: f.basis,
                p,
                s,
                copies: source.copies.clone(),
                grading: None,
            })
        }
        HomSpec::Matrices { dim, p, s } => {
            for v in g.vertices() {
                if !p.contains_key(v) {
                    return Err(Error::NotHomomorphism(format!("no image given for p_{v}")));
                }
            }
            for c in edge_copies(g)? {
                if !s.contains_key(&c.id) {
                    return Err(Error::NotHomomorphism(format!(
                        "no image given for s_{}",
                        c.id
                    )));
                }
            }
            for m in p.values().chain(s.values()) {
                if m.n() != *dim {
                    return Err(Error::SizeMismatch {
                        expected: *dim,
                        found: m.n(),
                    });
                }
            }
            Ok(CKRep {
                graph: g.clone(),
                v_set: v_set.clone(),
                dim: *dim,
                basis: (0..*dim).map(|i| i.to_string()).collect(),
                p: p.iter()
                    .filter(|(v, _)| g.has_vertex(v))
                    .map(|(v, m)| (v.clone(), m.clone()))
                    .collect(),
                s: source
                    .copies
                    .iter()
                    .map(|c| (c.id.clone(), s[&c.id].clone()))
                    .collect(),
                copies: source.copies.clone(),
                grading: None,
            })
        }
    }
}

/// Evaluates the three conditions for `rho : C*(E, V) -> target` and computes
/// `ker rho` exactly from the span of `diag(rho(x), x)`.
pub fn giu_test(g: &Graph, v_set: &VertexSet, spec: &HomSpec) -> Result<GiuReport> {
    let source = path_space_rep(g, v_set, None)?;
    let target = target_rep(g, v_set, &source, spec)?;
    let rel = verify_ck_relations(&target, v_set);
    if let Some(bad) = rel.checks.failures().first() {
        return Err(Error::NotHomomorphism(format!(
            "target violates {} (witness {})",
            bad.name,
            bad.witness.clone().unwrap_or_default()
        )));
    }

    let vertex_condition: BTreeMap<VertexId, bool> = target
        .p
        .iter()
        .map(|(v, m)| (v.clone(), !m.is_zero()))
        .collect();
    let missing = classify_vertices(g)?.regular().difference(v_set);
    let defect_condition: BTreeMap<VertexId, bool> = missing
        .base
        .iter()
        .map(|v| (v.clone(), !target.defect(v).is_zero()))
        .collect();
    let mut constraints: Vec<(&Mat, i64)> = target.p.values().map(|m| (m, 0)).collect();
    constraints.extend(target.s.values().map(|m| (m, 1)));
    let (gauge_condition, gauge_witness) = match GaugeGrading::solve(target.dim, &constraints) {
        Ok(gr) => match gauge_failure(&target, &gr) {
            None => (true, None),
            Some(w) => (false, Some(w)),
        },
        Err(w) => (false, Some(w)),
    };
    if let Some(w) = source
        .grading
        .as_ref()
        .and_then(|gr| gauge_failure(&source, gr))
    {
        return Err(Error::Verification(format!(
            "source is not gauge-graded: {w}"
        )));
    }

    let m = target.dim;
    let n = source.dim;
    let pairs: Vec<Mat> = target
        .generators()
        .iter()
        .zip(source.generators())
        .map(|(t, s)| Mat::block_diag(t, &s))
        .collect();
    let graph_span = span_closure(&pairs)?;
    let algebra_dim = source.algebra()?.dim();
    if graph_span.dim() != algebra_dim {
        return Err(Error::NotHomomorphism(format!(
            "generator assignment does not extend linearly: graph of the map has dim {} but the source algebra has dim {algebra_dim}",
            graph_span.dim()
        )));
    }
    // target coordinates of diag(t, s) come first in the flattening
    let cut = m * (m + n);
    let kernel_basis: Vec<Mat> = graph_span
        .echelon_rows()
        .iter()
        .filter(|row| row[0].0 >= cut)
        .map(|row| Mat::from_flat(m + n, row).block(m, n))
        .collect();
    let kernel_dim = kernel_basis.len();

    let mut failing = Vec::new();
    for (v, ok) in &vertex_condition {
        if !ok {
            failing.push(format!("(1) rho(p_{v}) = 0"));
        }
    }
    for (v, ok) in &defect_condition {
        if !ok {
            failing.push(format!("(2) rho(p_{v} - sum s_e s_e^*) = 0"));
        }
    }
    if !gauge_condition {
        failing.push("(3) no gauge action on the target makes rho equivariant".into());
    }
    let conditions_hold = failing.is_empty();
    Ok(GiuReport {
        source_dim: n,
        target_dim: m,
        algebra_dim,
        kernel_dim,
        image_dim: algebra_dim - kernel_dim,
        vertex_condition,
        defect_condition,
        gauge_condition,
        gauge_witness,
        conditions_hold,
        failing,
        consistent: !(conditions_hold && kernel_dim > 0),
        kernel_basis,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::fixtures;

    #[test]
    fn identity_is_injective() {
        let r = giu_test(
            &fixtures::e1(),
            &VertexSet::of(&["u", "v"]),
            &HomSpec::Identity,
        )
        .unwrap();
        assert!(r.conditions_hold && r.consistent);
        assert_eq!(r.kernel_dim, 0);
        assert_eq!(r.algebra_dim, 16);
    }

    #[test]
    fn quotient_by_everything() {
        let spec = HomSpec::Quotient {
            h: VertexSet::of(&["u", "v", "w"]),
        };
        let r = giu_test(&fixtures::e1(), &VertexSet::of(&["u", "v"]), &spec).unwrap();
        assert_eq!(r.kernel_dim, 16);
        assert!(r.vertex_condition.values().all(|ok| !ok));
        assert!(r.consistent);
    }

    #[test]
    fn relative_collapse() {
        let spec = HomSpec::Relative {
            w: VertexSet::of(&["v"]),
        };
        let r = giu_test(&fixtures::e2(), &VertexSet::new(), &spec).unwrap();
        assert_eq!((r.algebra_dim, r.kernel_dim, r.image_dim), (5, 1, 4));
        assert!(!r.defect_condition["v"]);
        assert!(r.failing.iter().any(|f| f.starts_with("(2)")));
        // the kernel is spanned by the defect at v
        let source = path_space_rep(&fixtures::e2(), &VertexSet::new(), None).unwrap();
        let mut k = crate::linalg::linear_span(&r.kernel_basis).unwrap();
        assert!(k.contains(&source.defect("v")));
    }

    #[test]
    fn matrices_must_satisfy_relations() {
        let mut p = BTreeMap::new();
        p.insert("v".to_string(), Mat::identity(1));
        p.insert("w".to_string(), Mat::identity(1));
        let mut s = BTreeMap::new();
        s.insert("e".to_string(), Mat::identity(1));
        let spec = HomSpec::Matrices { dim: 1, p, s };
        assert!(matches!(
            giu_test(&fixtures::e2(), &VertexSet::new(), &spec),
            Err(Error::NotHomomorphism(_))
        ));
    }

    #[test]
    fn rotated_target_has_no_diagonal_grading() {
        // M2 in a rotated basis: injective, but no diagonal grading exists
        let h = |a: i64, b: i64, c: i64, d: i64| {
            Mat::from_dense(vec![
                vec![crate::linalg::Q::new(a, 2), crate::linalg::Q::new(b, 2)],
                vec![crate::linalg::Q::new(c, 2), crate::linalg::Q::new(d, 2)],
            ])
            .unwrap()
        };
        let mut p = BTreeMap::new();
        p.insert("v".to_string(), h(1, 1, 1, 1));
        p.insert("w".to_string(), h(1, -1, -1, 1));
        let mut s = BTreeMap::new();
        s.insert("e".to_string(), h(1, -1, 1, -1));
        let spec = HomSpec::Matrices { dim: 2, p, s };
        let r = giu_test(&fixtures::e2(), &VertexSet::of(&["v"]), &spec).unwrap();
        assert!(!r.gauge_condition);
        assert_eq!(r.kernel_dim, 0);
        assert!(r.consistent);
    }

    #[test]
    fn unsaturated_quotient_is_rejected() {
        let spec = HomSpec::Quotient {
            h: VertexSet::of(&["w"]),
        };
        assert!(giu_test(&fixtures::e2(), &VertexSet::of(&["v"]), &spec).is_err());
    }

    #[test]
    fn spec_json() {
        let s = serde_json::to_string(&HomSpec::Relative {
            w: VertexSet::of(&["v"]),
        })
        .unwrap();
        assert_eq!(s, r#"{"kind":"relative","w":{"vertices":["v"],"rays":[]}}"#);
        let back: HomSpec =
            serde_json::from_str(r#"{"kind":"quotient","h":["u","v","w"]}"#).unwrap();
        assert_eq!(
            back,
            HomSpec::Quotient {
                h: VertexSet::of(&["u", "v", "w"])
            }
        );
    }
}
