//! Cuntz-Krieger families as exact matrices on path spaces.

mod giu;
mod relgas;
mod tails;

pub use giu::{giu_test, GiuReport, HomSpec};
pub use relgas::{
    count_paths_to_sinks, defect_and_tk, verify_relgas, RelgasReport, TkEntry, TkReport,
};
pub use tails::{
    extend_representation, verify_corner, verify_tail_relation_lemmas, CornerReport, Extension,
    TailLemmaReport,
};

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{classify_vertices, Graph, Multiplicity, VertexId, VertexSet};
use crate::linalg::{span_closure, Mat, SpannedAlgebra};
use crate::transforms::{build_relative_graph, truncate_tails};

/// Largest path basis a representation may have.
pub const MAX_BASIS: usize = 40;

/// One copy of an edge of multiplicity `m`; copies of `e` are `e#1..e#m`
/// unless `m = 1`, in which case the copy is `e` itself.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeCopy {
    pub id: String,
    pub edge: String,
    pub index: u32,
    pub src: VertexId,
    pub rng: VertexId,
}

pub fn edge_copies(g: &Graph) -> Result<Vec<EdgeCopy>> {
    let mut out = Vec::new();
    for e in g.edges() {
        let m = match e.mult {
            Multiplicity::Finite(m) => m,
            Multiplicity::Omega => return Err(Error::InfiniteEmitter(e.id.clone())),
        };
        for k in 1..=m {
            out.push(EdgeCopy {
                id: if m == 1 {
                    e.id.clone()
                } else {
                    format!("{}#{k}", e.id)
                },
                edge: e.id.clone(),
                index: k,
                src: e.src.clone(),
                rng: e.rng.clone(),
            });
        }
    }
    Ok(out)
}

/// A finite path `start, e1 e2 ... ek` read left to right.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Path {
    pub start: VertexId,
    pub edges: Vec<String>,
}

impl std::fmt::Display for Path {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.edges.is_empty() {
            write!(f, "({})", self.start)
        } else {
            write!(f, "({})", self.edges.join(" "))
        }
    }
}

/// `U_z = diag(z^degree)`; a family is gauge-graded when conjugation
/// multiplies each edge operator by `z` and fixes each vertex projection.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GaugeGrading {
    pub degree: Vec<i64>,
}

impl GaugeGrading {
    /// Checks `U_z M U_z^* = z^k M` as an identity of Laurent polynomials:
    /// the entry `(i, j)` of the left side is `z^(d_i - d_j) M_ij`.
    pub fn scales(&self, m: &Mat, k: i64) -> std::result::Result<(), (usize, usize)> {
        for (i, j, _) in m.entries() {
            if self.degree[i] - self.degree[j] != k {
                return Err((i, j));
            }
        }
        Ok(())
    }

    /// Solves for an integer grading making every `(matrix, k)` pair scale
    /// by `z^k`; unconstrained components get degree 0.
    pub fn solve(n: usize, constraints: &[(&Mat, i64)]) -> std::result::Result<Self, String> {
        let mut adj: Vec<Vec<(usize, i64)>> = vec![Vec::new(); n];
        for (m, k) in constraints {
            for (i, j, _) in m.entries() {
                adj[j].push((i, *k));
                adj[i].push((j, -*k));
            }
        }
        let mut degree: Vec<Option<i64>> = vec![None; n];
        for root in 0..n {
            if degree[root].is_some() {
                continue;
            }
            degree[root] = Some(0);
            let mut stack = vec![root];
            while let Some(j) = stack.pop() {
                let dj = degree[j].expect("visited");
                for &(i, k) in &adj[j] {
                    match degree[i] {
                        None => {
                            degree[i] = Some(dj + k);
                            stack.push(i);
                        }
                        Some(di) if di != dj + k => {
                            return Err(format!(
                                "basis vectors {i} and {j} need degree gap {k} and {}",
                                di - dj
                            ));
                        }
                        Some(_) => {}
                    }
                }
            }
        }
        Ok(GaugeGrading {
            degree: degree.into_iter().map(|d| d.unwrap_or(0)).collect(),
        })
    }
}

/// A Cuntz-Krieger family of `graph` on `C^dim`: a projection per vertex and
/// a partial isometry per edge copy.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CKRep {
    pub graph: Graph,
    /// The relative set the family was built for.
    pub v_set: VertexSet,
    pub dim: usize,
    /// Labels of the basis vectors.
    pub basis: Vec<String>,
    pub p: BTreeMap<VertexId, Mat>,
    pub s: BTreeMap<String, Mat>,
    pub copies: Vec<EdgeCopy>,
    pub grading: Option<GaugeGrading>,
}

impl CKRep {
    /// Vertex projections and edge operators, in a fixed order.
    pub fn generators(&self) -> Vec<Mat> {
        self.p.values().chain(self.s.values()).cloned().collect()
    }

    /// `p_v - sum_{s(e)=v} s_e s_e^*`.
    pub fn defect(&self, v: &str) -> Mat {
        let ranges = self
            .copies
            .iter()
            .filter(|c| c.src == v)
            .map(|c| {
                let s = &self.s[&c.id];
                s.mul(&s.adjoint())
            })
            .fold(Mat::zero(self.dim), |a, m| a.add(&m));
        self.p[v].sub(&ranges)
    }

    pub fn algebra(&self) -> Result<SpannedAlgebra> {
        if self.dim == 0 {
            return span_closure(&[Mat::zero(0)]);
        }
        span_closure(&self.generators())
    }
}

fn check_rep_graph(g: &Graph) -> Result<()> {
    g.ensure_valid()?;
    if !g.is_ray_free() {
        return Err(Error::HasTails);
    }
    if let Some(e) = g.edges().iter().find(|e| e.mult.is_omega()) {
        return Err(Error::InfiniteEmitter(e.id.clone()));
    }
    if let Some(v) = g.find_cycle_vertex() {
        return Err(Error::Cyclic(v));
    }
    Ok(())
}

/// All paths ending at sinks, ordered by sink, then length, then edges.
pub fn sink_paths(g: &Graph, copies: &[EdgeCopy]) -> Result<Vec<Path>> {
    let class = classify_vertices(g)?;
    let mut out = Vec::new();
    for w in class.sinks() {
        let mut layer = vec![Path {
            start: w.clone(),
            edges: Vec::new(),
        }];
        while !layer.is_empty() {
            let mut next = Vec::new();
            for p in &layer {
                for c in copies.iter().filter(|c| c.rng == p.start) {
                    let mut edges = vec![c.id.clone()];
                    edges.extend(p.edges.iter().cloned());
                    next.push(Path {
                        start: c.src.clone(),
                        edges,
                    });
                }
            }
            out.append(&mut layer);
            if out.len() > MAX_BASIS {
                return Err(Error::Budget {
                    what: "path basis size",
                    limit: MAX_BASIS,
                    actual: out.len() + next.len(),
                });
            }
            next.sort();
            layer = next;
        }
    }
    Ok(out)
}

/// The Cuntz-Krieger `g`-family on paths ending at sinks: `S_e` prepends `e`,
/// `P_v` keeps paths starting at `v`. Relations hold at every non-sink.
pub fn native_rep(g: &Graph) -> Result<CKRep> {
    check_rep_graph(g)?;
    let copies = edge_copies(g)?;
    let paths = sink_paths(g, &copies)?;
    let n = paths.len();
    let index: HashMap<&Path, usize> = paths.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let mut p = BTreeMap::new();
    for v in g.vertices() {
        let ones = paths
            .iter()
            .enumerate()
            .filter(|(_, q)| &q.start == v)
            .map(|(i, _)| i);
        p.insert(v.clone(), Mat::diagonal(n, ones));
    }
    let mut s = BTreeMap::new();
    for c in &copies {
        let mut m = Mat::zero(n);
        for (j, q) in paths.iter().enumerate() {
            if q.start == c.rng {
                let mut edges = vec![c.id.clone()];
                edges.extend(q.edges.iter().cloned());
                let longer = Path {
                    start: c.src.clone(),
                    edges,
                };
                m = m.add(&Mat::unit(n, index[&longer], j));
            }
        }
        s.insert(c.id.clone(), m);
    }
    Ok(CKRep {
        graph: g.clone(),
        v_set: classify_vertices(g)?.regular(),
        dim: n,
        basis: paths.iter().map(ToString::to_string).collect(),
        p,
        s,
        copies,
        grading: Some(GaugeGrading {
            degree: paths.iter().map(|q| q.edges.len() as i64).collect(),
        }),
    })
}

/// The `(g, V)`-family obtained from the path representation of `E_V` by
/// `p_v = q_v + q_v'` and `s_e = t_e + t_e'`. With `tail_depth`, rays are
/// first truncated at that depth.
pub fn path_space_rep(g: &Graph, v_set: &VertexSet, tail_depth: Option<usize>) -> Result<CKRep> {
    let g = match tail_depth {
        Some(d) => truncate_tails(g, d)?.graph,
        None => g.clone(),
    };
    check_rep_graph(&g)?;
    let rel = build_relative_graph(&g, v_set)?;
    let native = native_rep(&rel.graph)?;
    let n = native.dim;
    let mut p = BTreeMap::new();
    for v in g.vertices() {
        let mut m = native.p[v].clone();
        if let Some(vp) = rel.vertex_prime.get(v) {
            m = m.add(&native.p[vp]);
        }
        p.insert(v.clone(), m);
    }
    let copies = edge_copies(&g)?;
    let prime_copy = |c: &EdgeCopy| -> Option<String> {
        let ep = rel.edge_prime.get(&c.edge)?;
        let e = rel.graph.edge(ep)?;
        Some(if e.mult == Multiplicity::Finite(1) {
            ep.clone()
        } else {
            format!("{ep}#{}", c.index)
        })
    };
    let mut s = BTreeMap::new();
    for c in &copies {
        let mut m = native.s[&c.id].clone();
        if let Some(cp) = prime_copy(c) {
            m = m.add(&native.s[&cp]);
        }
        s.insert(c.id.clone(), m);
    }
    Ok(CKRep {
        graph: g,
        v_set: v_set.clone(),
        dim: n,
        basis: native.basis,
        p,
        s,
        copies,
        grading: native.grading,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub witness: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checks(pub Vec<Check>);

impl Checks {
    pub fn record(
        &mut self,
        name: impl Into<String>,
        pass: bool,
        witness: impl FnOnce() -> String,
    ) {
        self.0.push(Check {
            name: name.into(),
            pass,
            witness: (!pass).then(witness),
        });
    }

    pub fn all_pass(&self) -> bool {
        self.0.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.0.iter().filter(|c| !c.pass).collect()
    }

    pub fn extend(&mut self, other: Checks) {
        self.0.extend(other.0);
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CkReport {
    pub checks: Checks,
    /// Rank of `p_v - sum s_e s_e^*` at each `v` in `R \ V`.
    pub defect_rank: BTreeMap<VertexId, usize>,
    /// Whether every vertex of `R \ V` has a nonzero defect.
    pub strict: bool,
    pub gauge: Option<String>,
}

impl CkReport {
    pub fn holds(&self) -> bool {
        self.checks.all_pass()
    }
}

/// Exact checks of the `(E, V)`-family relations: projections, mutual
/// orthogonality, `s_e^* s_e = p_r(e)`, `s_e s_e^* <= p_s(e)` with mutually
/// orthogonal ranges, and `p_v = sum s_e s_e^*` on `V`.
pub fn verify_ck_relations(rep: &CKRep, v_set: &VertexSet) -> CkReport {
    let mut checks = Checks::default();
    let ps: Vec<(&VertexId, &Mat)> = rep.p.iter().collect();
    for (v, m) in &ps {
        checks.record(format!("projection p_{v}"), m.is_projection(), || {
            v.to_string()
        });
    }
    for (a, (v, pv)) in ps.iter().enumerate() {
        for (w, pw) in &ps[a + 1..] {
            checks.record(
                format!("orthogonal p_{v} p_{w}"),
                pv.mul(pw).is_zero(),
                || format!("{v},{w}"),
            );
        }
    }
    for c in &rep.copies {
        let s = &rep.s[&c.id];
        let sts = s.adjoint().mul(s);
        checks.record(
            format!("(1) s_{0}^* s_{0} = p_{1}", c.id, c.rng),
            sts == rep.p[&c.rng],
            || c.id.clone(),
        );
        let range = s.mul(&s.adjoint());
        checks.record(
            format!("(2) s_{0} s_{0}^* <= p_{1}", c.id, c.src),
            rep.p[&c.src].mul(&range) == range,
            || c.id.clone(),
        );
    }
    for (a, c) in rep.copies.iter().enumerate() {
        for d in &rep.copies[a + 1..] {
            let cross = rep.s[&c.id].adjoint().mul(&rep.s[&d.id]);
            checks.record(
                format!("(2) s_{}^* s_{} = 0", c.id, d.id),
                cross.is_zero(),
                || format!("{},{}", c.id, d.id),
            );
        }
    }
    for v in &v_set.base {
        if rep.p.contains_key(v) {
            checks.record(
                format!("(3) p_{v} = sum s_e s_e^*"),
                rep.defect(v).is_zero(),
                || v.clone(),
            );
        } else {
            checks.record(format!("(3) p_{v} = sum s_e s_e^*"), false, || {
                format!("unknown vertex {v}")
            });
        }
    }
    let mut defect_rank = BTreeMap::new();
    if let Ok(class) = classify_vertices(&rep.graph) {
        for v in class.regular().base.difference(&v_set.base) {
            defect_rank.insert(v.clone(), rep.defect(v).rank());
        }
    }
    let strict = defect_rank.values().all(|r| *r > 0);
    let gauge = rep.grading.as_ref().and_then(|gr| gauge_failure(rep, gr));
    CkReport {
        checks,
        defect_rank,
        strict,
        gauge,
    }
}

/// First generator violating the gauge identity, if any.
pub fn gauge_failure(rep: &CKRep, gr: &GaugeGrading) -> Option<String> {
    for (v, m) in &rep.p {
        if let Err((i, j)) = gr.scales(m, 0) {
            return Some(format!("p_{v} entry ({i},{j}) is not gauge-invariant"));
        }
    }
    for (e, m) in &rep.s {
        if let Err((i, j)) = gr.scales(m, 1) {
            return Some(format!("s_{e} entry ({i},{j}) does not scale by z"));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::fixtures;
    use crate::graph::Edge;

    #[test]
    fn e2_full_relative_set() {
        let rep = path_space_rep(&fixtures::e2(), &VertexSet::of(&["v"]), None).unwrap();
        assert_eq!(rep.basis, vec!["(w)", "(e)"]);
        assert_eq!(rep.algebra().unwrap().dim(), 4);
        let r = verify_ck_relations(&rep, &rep.v_set);
        assert!(r.holds(), "{:?}", r.checks.failures());
        assert!(r.defect_rank.is_empty());
        assert!(r.gauge.is_none());
    }

    #[test]
    fn e2_empty_relative_set() {
        let rep = path_space_rep(&fixtures::e2(), &VertexSet::new(), None).unwrap();
        assert_eq!(rep.basis, vec!["(v')", "(w)", "(e)"]);
        assert_eq!(rep.algebra().unwrap().dim(), 5);
        let r = verify_ck_relations(&rep, &rep.v_set);
        assert!(r.holds());
        assert_eq!(r.defect_rank["v"], 1);
        assert!(r.strict);
    }

    #[test]
    fn e1_is_m4() {
        let rep = path_space_rep(&fixtures::e1(), &VertexSet::of(&["u", "v"]), None).unwrap();
        assert_eq!(rep.basis, vec!["(w)", "(f)", "(g)", "(e g)"]);
        assert_eq!(rep.algebra().unwrap().dim(), 16);
    }

    #[test]
    fn zeroed_edge_breaks_condition_one() {
        let mut rep = path_space_rep(&fixtures::e2(), &VertexSet::of(&["v"]), None).unwrap();
        rep.s.insert("e".into(), Mat::zero(rep.dim));
        let r = verify_ck_relations(&rep, &rep.v_set);
        let f = r.checks.failures();
        assert!(f
            .iter()
            .any(|c| c.name.starts_with("(1)") && c.witness.as_deref() == Some("e")));
    }

    #[test]
    fn multiplicities_become_copies() {
        let g = Graph::from_parts(
            &["a", "b"],
            vec![Edge::new("x", "a", "b", Multiplicity::Finite(2))],
        );
        let rep = path_space_rep(&g, &VertexSet::of(&["a"]), None).unwrap();
        assert_eq!(rep.s.keys().collect::<Vec<_>>(), vec!["x#1", "x#2"]);
        assert_eq!(rep.dim, 3);
        assert_eq!(rep.algebra().unwrap().dim(), 9);
        assert!(verify_ck_relations(&rep, &rep.v_set).holds());
    }

    #[test]
    fn rejects_cycles_omega_and_irregular_sets() {
        assert!(matches!(
            path_space_rep(&fixtures::c5(), &VertexSet::new(), None),
            Err(Error::Cyclic(_))
        ));
        assert!(matches!(
            path_space_rep(&fixtures::e3(), &VertexSet::new(), None),
            Err(Error::InfiniteEmitter(_))
        ));
        assert!(matches!(
            path_space_rep(&fixtures::e2(), &VertexSet::of(&["w"]), None),
            Err(Error::NotRegular(_))
        ));
    }

    #[test]
    fn truncated_tail_rep() {
        let g = crate::transforms::add_tails(&fixtures::z()).unwrap();
        let rep = path_space_rep(&g, &VertexSet::of(&["z"]), Some(2)).unwrap();
        // r.1 is regular and outside V, so E_V gains a sink r.1'
        assert_eq!(rep.dim, 5);
        assert_eq!(rep.algebra().unwrap().dim(), 13);
        assert!(verify_ck_relations(&rep, &rep.v_set).holds());
        let full = path_space_rep(&g, &VertexSet::of(&["z", "ray_z.1"]), Some(2)).unwrap();
        assert_eq!(full.dim, 3);
    }

    #[test]
    fn grading_solver() {
        let rep = path_space_rep(&fixtures::e1(), &VertexSet::new(), None).unwrap();
        let mut cons: Vec<(&Mat, i64)> = rep.p.values().map(|m| (m, 0)).collect();
        cons.extend(rep.s.values().map(|m| (m, 1)));
        let gr = GaugeGrading::solve(rep.dim, &cons).unwrap();
        assert!(gauge_failure(&rep, &gr).is_none());
        // a unitary that is not a shift cannot be graded
        let swap = Mat::unit(2, 0, 1).add(&Mat::unit(2, 1, 0));
        assert!(GaugeGrading::solve(2, &[(&swap, 1)]).is_err());
    }
}
