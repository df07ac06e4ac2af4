//! The graph correspondence `X(E)` over `A = C_0(E^0)`, read through edge
//! supports: the ideals `ker phi`, `J(X)`, `J_X`, the invariance predicates,
//! quotients and the tail extension `Y = X + T` over `B = A + T`.
//!
//! Ideals of `A` are vertex sets; a ray in a set stands for all of its
//! vertices. Submodules of `X` are edge supports.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{
    classify_vertices, correspondence_property_table, Graph, Multiplicity, PropertyTable, VertexId,
    VertexSet,
};
use crate::transforms::{fresh_id, quotient_graph, truncate_tails};

pub type IdealOfA = VertexSet;

/// One element of the edge basis of `X`: an ordinary edge, the first edge of
/// a ray (leaving its attachment vertex) or the remaining edges of a ray.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "id")]
pub enum EdgeSupport {
    Edge(String),
    RayFirst(String),
    RayInner(String),
}

pub type ModuleSupport = BTreeSet<EdgeSupport>;

fn add_mult(a: Option<Multiplicity>, b: Multiplicity) -> Multiplicity {
    match (a, b) {
        (None, m) => m,
        (Some(Multiplicity::Finite(x)), Multiplicity::Finite(y)) => Multiplicity::Finite(x + y),
        _ => Multiplicity::Omega,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphCorrespondence {
    pub graph: Graph,
    /// `out_mult[v][w]`: total multiplicity of edges `v -> w`.
    pub out_mult: BTreeMap<VertexId, BTreeMap<VertexId, Multiplicity>>,
    /// Transpose of `out_mult`: support of `<x, x>_A` at `v`.
    pub in_mult: BTreeMap<VertexId, BTreeMap<VertexId, Multiplicity>>,
    pub properties: PropertyTable,
}

pub fn build_graph_correspondence(g: &Graph) -> Result<GraphCorrespondence> {
    g.ensure_valid()?;
    let mut out_mult: BTreeMap<VertexId, BTreeMap<VertexId, Multiplicity>> = g
        .vertices()
        .iter()
        .map(|v| (v.clone(), BTreeMap::new()))
        .collect();
    let mut in_mult = out_mult.clone();
    for e in g.edges() {
        let row = out_mult.get_mut(&e.src).expect("validated");
        let m = add_mult(row.get(&e.rng).copied(), e.mult);
        row.insert(e.rng.clone(), m);
        in_mult
            .get_mut(&e.rng)
            .expect("validated")
            .insert(e.src.clone(), m);
    }
    Ok(GraphCorrespondence {
        graph: g.clone(),
        out_mult,
        in_mult,
        properties: correspondence_property_table(g)?,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ideals {
    pub ker_phi: IdealOfA,
    pub j_big: IdealOfA,
    pub j_x: IdealOfA,
}

impl GraphCorrespondence {
    /// `phi(delta_v) = 0`.
    fn annihilates(&self, v: &str) -> bool {
        self.out_mult[v].is_empty() && self.graph.ray_at(v).is_none()
    }

    /// `phi(delta_v)` is a finite sum of rank-one operators.
    fn compact_at(&self, v: &str) -> bool {
        !self.out_mult[v].values().any(|m| m.is_omega())
    }

    /// Edge support of `phi(C_0(I)) X`.
    pub fn left_support(&self, i: &IdealOfA) -> ModuleSupport {
        let mut out: ModuleSupport = self
            .graph
            .edges()
            .iter()
            .filter(|e| i.base.contains(&e.src))
            .map(|e| EdgeSupport::Edge(e.id.clone()))
            .collect();
        for t in self.graph.tails() {
            if i.base.contains(&t.attach) {
                out.insert(EdgeSupport::RayFirst(t.id.clone()));
            }
            if i.rays.contains(&t.id) {
                out.insert(EdgeSupport::RayInner(t.id.clone()));
            }
        }
        out
    }

    /// Edge support of `X C_0(I) = { x : <x, y>_A in I for all y }`.
    pub fn range_support(&self, i: &IdealOfA) -> ModuleSupport {
        let mut out: ModuleSupport = self
            .graph
            .edges()
            .iter()
            .filter(|e| i.base.contains(&e.rng))
            .map(|e| EdgeSupport::Edge(e.id.clone()))
            .collect();
        for t in self.graph.tails() {
            if i.rays.contains(&t.id) {
                out.insert(EdgeSupport::RayFirst(t.id.clone()));
                out.insert(EdgeSupport::RayInner(t.id.clone()));
            }
        }
        out
    }

    /// The atoms of `A`: single ordinary vertices and whole rays.
    fn atoms(&self) -> Vec<IdealOfA> {
        self.graph
            .vertices()
            .iter()
            .map(|v| VertexSet::of(&[v.as_str()]))
            .chain(
                self.graph
                    .tails()
                    .iter()
                    .map(|t| VertexSet::new().with_rays(&[t.id.as_str()])),
            )
            .collect()
    }
}

pub fn compute_ideals(x: &GraphCorrespondence) -> Ideals {
    let mut ker_phi = VertexSet::new();
    let mut j_big = VertexSet::new();
    for v in x.graph.vertices() {
        if x.annihilates(v) {
            ker_phi.base.insert(v.clone());
        }
        if x.compact_at(v) {
            j_big.base.insert(v.clone());
        }
    }
    // every ray vertex emits exactly one edge
    j_big.rays = x.graph.tails().iter().map(|t| t.id.clone()).collect();
    let all = x.graph.full_set();
    let ker_perp = all.difference(&ker_phi);
    let j_x = j_big.intersection(&ker_perp);
    Ideals {
        ker_phi,
        j_big,
        j_x,
    }
}

/// `phi(I) X` is contained in `X I`.
pub fn is_x_invariant(x: &GraphCorrespondence, i: &IdealOfA) -> bool {
    x.left_support(i).is_subset(&x.range_support(i))
}

/// Every `a` in `J_X` with `phi(a) X` inside `X I` lies in `I`; checked on
/// the atoms of `J_X`, which suffices since both sides are supports.
pub fn is_x_saturated(x: &GraphCorrespondence, i: &IdealOfA) -> bool {
    let j_x = compute_ideals(x).j_x;
    let xi = x.range_support(i);
    x.atoms()
        .into_iter()
        .filter(|a| a.is_subset(&j_x))
        .all(|a| !x.left_support(&a).is_subset(&xi) || a.is_subset(i))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuotientReport {
    pub quotient: GraphCorrespondence,
    /// Image of `J_X` in `A / I`.
    pub q_jx: IdealOfA,
    /// `J_{X / XI}`, computed on the quotient graph.
    pub j_quotient: IdealOfA,
    pub contained: bool,
    pub equal: bool,
    /// `phi(A)` lies in the compacts.
    pub compact_action: bool,
    /// `ker phi` has a complement; always true over `C_0(E^0)`.
    pub kernel_complemented: bool,
    pub failed_hypothesis: Option<String>,
}

pub fn quotient_correspondence(x: &GraphCorrespondence, i: &IdealOfA) -> Result<QuotientReport> {
    i.check_within(&x.graph)?;
    if !is_x_invariant(x, i) {
        return Err(Error::NotInvariantSaturated(format!(
            "{i} is not X-invariant"
        )));
    }
    if !is_x_saturated(x, i) {
        return Err(Error::NotInvariantSaturated(format!(
            "{i} is not X-saturated"
        )));
    }
    let f = quotient_graph(&x.graph, i)?;
    let quotient = build_graph_correspondence(&f.graph)?;
    let q_jx = compute_ideals(x).j_x.difference(i);
    let j_quotient = compute_ideals(&quotient).j_x;
    let contained = q_jx.is_subset(&j_quotient);
    let equal = q_jx == j_quotient;
    let compact_action = x.properties.row_finite;
    let failed_hypothesis = (!equal && !compact_action).then(|| {
        format!(
            "hypothesis (1) phi(A) in K(X) fails: infinite emitters {:?}",
            classify_vertices(&x.graph)
                .map(|c| c.infinite_emitters())
                .unwrap_or_default()
        )
    });
    if !equal && compact_action {
        return Err(Error::Verification(format!(
            "q(J_X) = {q_jx} differs from J of the quotient = {j_quotient} although phi(A) is compact"
        )));
    }
    Ok(QuotientReport {
        quotient,
        q_jx,
        j_quotient,
        contained,
        equal,
        compact_action,
        kernel_complemented: true,
        failed_hypothesis,
    })
}

/// An element of the coefficient algebra `B = A + T`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BElem {
    /// `delta_v` in `A`.
    A(VertexId),
    /// `epsilon_i(delta_w)` in `T`, for a sink `w` and `i >= 1`.
    T(VertexId, usize),
}

/// An element of the module `Y = X + T`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum YElem {
    /// `delta_f` in `X`.
    X(String),
    /// `epsilon_i(delta_w)` in `T`.
    T(VertexId, usize),
}

/// `Y = X + T` over `B = A + T` with `T = (ker phi)^(N)`, kept symbolic:
/// `T` is described by its blocks, one per sink, indexed by `i >= 1`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TailedCorrespondence {
    pub base: GraphCorrespondence,
    /// Sink to the ray id it gets in the graph picture.
    pub tail_blocks: BTreeMap<VertexId, String>,
}

pub fn add_tail_correspondence(x: &GraphCorrespondence) -> TailedCorrespondence {
    let ker = compute_ideals(x).ker_phi;
    let mut taken: BTreeSet<String> = x
        .graph
        .vertices()
        .iter()
        .cloned()
        .chain(x.graph.edges().iter().map(|e| e.id.clone()))
        .chain(x.graph.tails().iter().map(|t| t.id.clone()))
        .collect();
    let mut tail_blocks = BTreeMap::new();
    for w in ker.base {
        let id = fresh_id(format!("ray_{w}"), &taken);
        taken.insert(id.clone());
        tail_blocks.insert(w, id);
    }
    TailedCorrespondence {
        base: x.clone(),
        tail_blocks,
    }
}

/// Finite picture of a correspondence up to a tail depth: basis elements,
/// left action pairs `(b, y)` with `phi(delta_b) y = y`, ranges and
/// multiplicities.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub b: BTreeSet<BElem>,
    pub y: BTreeMap<YElem, Multiplicity>,
    pub left: BTreeSet<(BElem, YElem)>,
    pub range: BTreeMap<YElem, BElem>,
}

impl TailedCorrespondence {
    /// `epsilon_i(f)`: the `i`-th placement of the sink `w` in `T`.
    pub fn epsilon(&self, w: &str, i: usize) -> Option<YElem> {
        (i >= 1 && self.tail_blocks.contains_key(w)).then(|| YElem::T(w.to_owned(), i))
    }

    /// `phi_B(b) y != 0`: `A` acts on `X` through sources and on the first
    /// tail slot; the `i`-th slot of `T` acts on the `(i+1)`-th.
    pub fn acts(&self, b: &BElem, y: &YElem) -> bool {
        match (b, y) {
            (BElem::A(v), YElem::X(f)) => self.base.graph.edge(f).is_some_and(|e| &e.src == v),
            (BElem::A(v), YElem::T(w, 1)) => v == w,
            (BElem::T(w, i), YElem::T(w2, j)) => w == w2 && i + 1 == *j,
            _ => false,
        }
    }

    /// Support of `<y, y>_B`.
    pub fn range(&self, y: &YElem) -> Option<BElem> {
        match y {
            YElem::X(f) => self.base.graph.edge(f).map(|e| BElem::A(e.rng.clone())),
            YElem::T(w, i) => Some(BElem::T(w.clone(), *i)),
        }
    }

    pub fn window(&self, depth: usize) -> Window {
        let mut b: BTreeSet<BElem> = self
            .base
            .graph
            .vertices()
            .iter()
            .map(|v| BElem::A(v.clone()))
            .collect();
        let mut y: BTreeMap<YElem, Multiplicity> = self
            .base
            .graph
            .edges()
            .iter()
            .map(|e| (YElem::X(e.id.clone()), e.mult))
            .collect();
        for w in self.tail_blocks.keys() {
            for i in 1..=depth {
                b.insert(BElem::T(w.clone(), i));
                y.insert(YElem::T(w.clone(), i), Multiplicity::Finite(1));
            }
        }
        let mut left = BTreeSet::new();
        for bb in &b {
            for yy in y.keys() {
                if self.acts(bb, yy) {
                    left.insert((bb.clone(), yy.clone()));
                }
            }
        }
        let range = y
            .keys()
            .map(|yy| (yy.clone(), self.range(yy).expect("window element")))
            .collect();
        Window { b, y, left, range }
    }
}

/// The same window read off the graph correspondence of a graph with rays,
/// by truncating the rays at `depth` and renaming chain vertices and edges
/// to tail placements.
pub fn graph_window(g: &Graph, depth: usize) -> Result<Window> {
    let tr = truncate_tails(g, depth)?;
    let x = build_graph_correspondence(&tr.graph)?;
    let mut vname: BTreeMap<VertexId, BElem> = BTreeMap::new();
    let mut ename: BTreeMap<String, YElem> = BTreeMap::new();
    for ((ray, k), v) in &tr.ray_vertices {
        vname.insert(v.clone(), BElem::T(tr.attach[ray].clone(), *k));
    }
    for ((ray, k), e) in &tr.ray_edges {
        ename.insert(e.clone(), YElem::T(tr.attach[ray].clone(), *k));
    }
    let bv = |v: &VertexId| vname.get(v).cloned().unwrap_or_else(|| BElem::A(v.clone()));
    let ye = |e: &String| ename.get(e).cloned().unwrap_or_else(|| YElem::X(e.clone()));
    let b = x.graph.vertices().iter().map(bv).collect();
    let y = x
        .graph
        .edges()
        .iter()
        .map(|e| (ye(&e.id), e.mult))
        .collect();
    let left = x
        .graph
        .edges()
        .iter()
        .map(|e| (bv(&e.src), ye(&e.id)))
        .collect();
    let range = x
        .graph
        .edges()
        .iter()
        .map(|e| (ye(&e.id), bv(&e.rng)))
        .collect();
    Ok(Window { b, y, left, range })
}

/// Compares the symbolic `Y` over `B` with the graph correspondence of the
/// tailed graph on the window of the given depth.
pub fn compare_with_tailed_graph(
    y: &TailedCorrespondence,
    tailed: &Graph,
    depth: usize,
) -> Result<()> {
    let ours = y.window(depth);
    let theirs = graph_window(tailed, depth)?;
    let diff = |what: &str, a: String, b: String| {
        Err(Error::Verification(format!(
            "{what}: symbolic {a} vs graph {b}"
        )))
    };
    if ours.b != theirs.b {
        return diff(
            "coefficient basis",
            format!("{:?}", ours.b),
            format!("{:?}", theirs.b),
        );
    }
    if ours.y != theirs.y {
        return diff(
            "module basis",
            format!("{:?}", ours.y),
            format!("{:?}", theirs.y),
        );
    }
    if ours.left != theirs.left {
        let a: Vec<_> = ours.left.symmetric_difference(&theirs.left).collect();
        return diff("left action", format!("{a:?}"), "differs".into());
    }
    if ours.range != theirs.range {
        return diff(
            "inner product",
            format!("{:?}", ours.range),
            format!("{:?}", theirs.range),
        );
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub phi_b_injective: bool,
    /// `B` elements annihilated by `phi_B` on the window, if any.
    pub phi_b_kernel: Vec<BElem>,
    /// `J(Y)` on the ordinary vertices, computed from supports of `Y`.
    pub j_y: VertexSet,
    /// `J_X` joined with `ker phi`, plus all tail blocks.
    pub decomposition: VertexSet,
    pub j_y_matches: bool,
    pub counterexample: Option<String>,
}

/// Checks on a window of `depth` tail slots that `phi_B` is injective and
/// that `J(Y)` is exactly `J_X + ker phi` plus the tail blocks.
pub fn check_tail_lemmas(y: &TailedCorrespondence, depth: usize) -> LemmaReport {
    let w = y.window(depth.max(2));
    let slots = depth.max(2);
    // the last slot in the window acts on a slot outside it
    let phi_b_kernel: Vec<BElem> =
        w.b.iter()
            .filter(|b| !matches!(b, BElem::T(_, i) if *i == slots))
            .filter(|b| !w.left.iter().any(|(bb, _)| bb == *b))
            .cloned()
            .collect();

    let ideals = compute_ideals(&y.base);
    let mut j_y = VertexSet::new();
    for v in y.base.graph.vertices() {
        let infinite = w
            .left
            .iter()
            .any(|(b, e)| b == &BElem::A(v.clone()) && w.y[e].is_omega());
        if !infinite {
            j_y.base.insert(v.clone());
        }
    }
    j_y.rays = y.tail_blocks.values().cloned().collect();
    let mut decomposition = ideals.j_x.union(&ideals.ker_phi);
    decomposition.rays = y.tail_blocks.values().cloned().collect();
    let j_y_matches = j_y == decomposition;
    let counterexample = if !phi_b_kernel.is_empty() {
        Some(format!("phi_B kills {phi_b_kernel:?}"))
    } else if !j_y_matches {
        Some(format!(
            "J(Y) = {j_y} but J_X + ker phi + tails = {decomposition}"
        ))
    } else {
        None
    };
    LemmaReport {
        phi_b_injective: phi_b_kernel.is_empty(),
        phi_b_kernel,
        j_y,
        decomposition,
        j_y_matches,
        counterexample,
    }
}
