//! Relative families as ordinary families of `E_V`, and the defect map.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{native_rep, path_space_rep, verify_ck_relations, CKRep, Checks};
use crate::error::{Error, Result};
use crate::graph::{classify_vertices, Graph, Multiplicity, VertexId, VertexSet};
use crate::linalg::{Mat, Q};
use crate::transforms::build_relative_graph;

/// `sum over sinks w of (number of paths ending at w)^2`, counting edge
/// multiplicities, by dynamic programming on the acyclic graph.
pub fn count_paths_to_sinks(g: &Graph) -> Result<u64> {
    if let Some(v) = g.find_cycle_vertex() {
        return Err(Error::Cyclic(v));
    }
    fn paths_from(
        g: &Graph,
        v: &str,
        w: &str,
        memo: &mut HashMap<(String, String), u64>,
    ) -> Result<u64> {
        if let Some(n) = memo.get(&(v.to_owned(), w.to_owned())) {
            return Ok(*n);
        }
        let mut n = u64::from(v == w);
        for e in g.out_edges(v) {
            let m = match e.mult {
                Multiplicity::Finite(m) => u64::from(m),
                Multiplicity::Omega => return Err(Error::InfiniteEmitter(e.id.clone())),
            };
            n += m * paths_from(g, &e.rng, w, memo)?;
        }
        memo.insert((v.to_owned(), w.to_owned()), n);
        Ok(n)
    }
    let class = classify_vertices(g)?;
    let mut memo = HashMap::new();
    let mut total = 0;
    for w in class.sinks() {
        let mut n = 0;
        for v in g.vertices() {
            n += paths_from(g, v, &w, &mut memo)?;
        }
        total += n * n;
    }
    Ok(total)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RelgasReport {
    pub checks: Checks,
    /// Dimension of the algebra generated by the `(E, V)`-family.
    pub dim_relative: usize,
    /// Dimension of the algebra generated by the derived `E_V`-family.
    pub dim_graph: usize,
    /// Independent path count for `E_V`.
    pub dim_count: u64,
}

impl RelgasReport {
    pub fn passed(&self) -> bool {
        self.checks.all_pass()
    }
}

/// Builds `q_w`, `t_f` from an `(E, V)`-family by the case formulas, and
/// checks they form an `E_V`-family that generates the same algebra.
pub fn verify_relgas(g: &Graph, v_set: &VertexSet) -> Result<RelgasReport> {
    let rep = path_space_rep(g, v_set, None)?;
    let rel = build_relative_graph(g, v_set)?;
    let native = native_rep(&rel.graph)?;
    let n = rep.dim;
    let missing = classify_vertices(g)?.regular().difference(v_set);
    let unprime: BTreeMap<&VertexId, &VertexId> =
        rel.vertex_prime.iter().map(|(v, p)| (p, v)).collect();
    let ranges = |v: &str| -> Mat {
        Mat::sum(
            n,
            &rep.copies
                .iter()
                .filter(|c| c.src == v)
                .map(|c| rep.s[&c.id].mul(&rep.s[&c.id].adjoint()))
                .collect::<Vec<_>>(),
        )
    };

    let mut q = BTreeMap::new();
    for w in rel.graph.vertices() {
        let m = if let Some(v) = unprime.get(w) {
            rep.p[*v].sub(&ranges(v))
        } else if missing.base.contains(w) {
            ranges(w)
        } else {
            rep.p[w].clone()
        };
        q.insert(w.clone(), m);
    }
    let mut t = BTreeMap::new();
    for c in &native.copies {
        let m = match rep.copies.iter().find(|o| o.id == c.id) {
            Some(orig) => rep.s[&orig.id].mul(&q[&c.rng]),
            None => {
                // c is a copy of some e'; use s_e with the same copy index
                let e = rel
                    .edge_prime
                    .iter()
                    .find(|(_, p)| **p == c.edge)
                    .map(|(e, _)| e)
                    .expect("primed edge");
                let orig = rep
                    .copies
                    .iter()
                    .find(|o| &o.edge == e && o.index == c.index)
                    .expect("matching copy");
                rep.s[&orig.id].mul(&q[&c.rng])
            }
        };
        t.insert(c.id.clone(), m);
    }
    let derived = CKRep {
        graph: rel.graph.clone(),
        v_set: classify_vertices(&rel.graph)?.regular(),
        dim: n,
        basis: rep.basis.clone(),
        p: q,
        s: t,
        copies: native.copies.clone(),
        grading: rep.grading.clone(),
    };

    let mut checks = Checks::default();
    let ck = verify_ck_relations(&derived, &derived.v_set);
    for c in ck.checks.0 {
        checks.record(format!("E_V family: {}", c.name), c.pass, || {
            c.witness.unwrap_or_default()
        });
    }
    for (w, m) in &derived.p {
        checks.record(
            format!("q_{w} equals path-space projection"),
            *m == native.p[w],
            || w.clone(),
        );
    }
    for (f, m) in &derived.s {
        checks.record(
            format!("t_{f} equals path-space shift"),
            *m == native.s[f],
            || f.clone(),
        );
    }
    for v in &missing.base {
        let vp = &rel.vertex_prime[v];
        let sum = derived.p[v].add(&derived.p[vp]);
        checks.record(format!("p_{v} = q_{v} + q_{vp}"), sum == rep.p[v], || {
            v.clone()
        });
    }
    for c in &rep.copies {
        let mut sum = derived.s[&c.id].clone();
        if let Some(ep) = rel.edge_prime.get(&c.edge) {
            let pc = derived
                .copies
                .iter()
                .find(|d| &d.edge == ep && d.index == c.index)
                .expect("primed copy");
            sum = sum.add(&derived.s[&pc.id]);
            checks.record(
                format!("s_{0} = t_{0} + t_{1}", c.id, pc.id),
                sum == rep.s[&c.id],
                || c.id.clone(),
            );
        } else {
            checks.record(format!("s_{0} = t_{0}", c.id), sum == rep.s[&c.id], || {
                c.id.clone()
            });
        }
    }
    let dim_relative = rep.algebra()?.dim();
    let dim_graph = derived.algebra()?.dim();
    let dim_count = count_paths_to_sinks(&rel.graph)?;
    checks.record(
        "dim C*(E,V) = dim C*(E_V)",
        dim_relative == dim_graph,
        || format!("{dim_relative} vs {dim_graph}"),
    );
    checks.record(
        "dim C*(E_V) = path count",
        dim_graph as u64 == dim_count,
        || format!("{dim_graph} vs {dim_count}"),
    );
    Ok(RelgasReport {
        checks,
        dim_relative,
        dim_graph,
        dim_count,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TkEntry {
    pub rank: usize,
    pub zero: bool,
    pub in_v: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TkReport {
    pub values: BTreeMap<VertexId, TkEntry>,
    pub checks: Checks,
}

impl TkReport {
    pub fn passed(&self) -> bool {
        self.checks.all_pass()
    }
}

/// `T(delta_v) = p_v - sum s_e s_e^*` on the vertices of `k`, checked to be
/// multiplicative and to vanish exactly on the relative set of `rep`.
pub fn defect_and_tk(rep: &CKRep, k: &VertexSet) -> Result<TkReport> {
    k.check_within(&rep.graph)?;
    let tk: BTreeMap<&VertexId, Mat> = k.base.iter().map(|v| (v, rep.defect(v))).collect();
    let mut checks = Checks::default();
    let mut values = BTreeMap::new();
    for (v, m) in &tk {
        let in_v = rep.v_set.contains(v);
        let zero = m.is_zero();
        checks.record(
            format!("T(delta_{v}) = 0 iff {v} in V"),
            zero == in_v,
            || v.to_string(),
        );
        values.insert(
            (*v).clone(),
            TkEntry {
                rank: m.rank(),
                zero,
                in_v,
            },
        );
    }
    for (v, a) in &tk {
        for (w, b) in &tk {
            let expected = if v == w {
                (*a).clone()
            } else {
                Mat::zero(rep.dim)
            };
            checks.record(
                format!("T(delta_{v}) T(delta_{w}) = T(delta_{v} delta_{w})"),
                a.mul(b) == expected,
                || format!("{v},{w}"),
            );
        }
    }
    // a = sum c_v delta_v with distinct coefficients; T(a)^2 = T(a^2)
    let coeff: Vec<Q> = (1..=tk.len() as i64).map(Q::from_integer).collect();
    let ta = tk
        .values()
        .zip(&coeff)
        .fold(Mat::zero(rep.dim), |acc, (m, c)| acc.add(&m.scale(*c)));
    let ta2 = tk
        .values()
        .zip(&coeff)
        .fold(Mat::zero(rep.dim), |acc, (m, c)| acc.add(&m.scale(c * c)));
    checks.record(
        "T(a)^2 = T(a^2) on a generic element",
        ta.mul(&ta) == ta2,
        String::new,
    );
    Ok(TkReport { values, checks })
}
