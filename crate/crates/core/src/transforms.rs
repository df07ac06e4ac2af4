//! Graph-level constructions: adding tails, truncating them, the relative
//! graph `E_V`, quotients by saturated hereditary sets, closures and the
//! relative set of a subgraph.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::graph::{
    classify_vertices, Degree, Edge, Graph, Multiplicity, TailRay, VertexId, VertexSet, VertexTag,
};

/// Appends `'` to `base` until it is not taken.
pub(crate) fn fresh_id(base: String, taken: &BTreeSet<String>) -> String {
    let mut id = base;
    while taken.contains(&id) {
        id.push('\'');
    }
    id
}

fn taken_ids(g: &Graph) -> BTreeSet<String> {
    g.vertices()
        .iter()
        .cloned()
        .chain(g.edges().iter().map(|e| e.id.clone()))
        .chain(g.tails().iter().map(|t| t.id.clone()))
        .collect()
}

/// Attaches one fresh ray at every sink. Sink-free graphs are returned as is.
pub fn add_tails(g: &Graph) -> Result<Graph> {
    let class = classify_vertices(g)?;
    let mut taken = taken_ids(g);
    let mut rays = Vec::new();
    for w in class.sinks() {
        let id = fresh_id(format!("ray_{w}"), &taken);
        taken.insert(id.clone());
        rays.push(TailRay { id, attach: w });
    }
    Ok(g.clone().with_tails(rays))
}

/// A graph whose rays were replaced by finite chains, with the names used.
#[derive(Clone, Debug)]
pub struct Truncation {
    pub graph: Graph,
    pub depth: usize,
    /// `(ray id, k)` for `1 <= k <= depth` to the chain vertex.
    pub ray_vertices: BTreeMap<(String, usize), VertexId>,
    /// `(ray id, k)` to the chain edge entering the `k`-th chain vertex.
    pub ray_edges: BTreeMap<(String, usize), String>,
    /// Ray id to its attachment vertex.
    pub attach: BTreeMap<String, VertexId>,
}

/// Replaces every ray by an ordinary chain of `depth` vertices; the last one
/// is a sink.
pub fn truncate_tails(g: &Graph, depth: usize) -> Result<Truncation> {
    g.ensure_valid()?;
    if depth == 0 {
        return Err(Error::ZeroDepth);
    }
    let mut taken = taken_ids(g);
    let mut vertices: Vec<VertexId> = g.vertices().to_vec();
    let mut edges: Vec<Edge> = g.edges().to_vec();
    let mut ray_vertices = BTreeMap::new();
    let mut ray_edges = BTreeMap::new();
    let mut attach = BTreeMap::new();
    for t in g.tails() {
        attach.insert(t.id.clone(), t.attach.clone());
        let mut prev = t.attach.clone();
        for k in 1..=depth {
            let v = fresh_id(format!("{}.{k}", t.id), &taken);
            taken.insert(v.clone());
            let e = fresh_id(format!("{}.e{k}", t.id), &taken);
            taken.insert(e.clone());
            edges.push(Edge::single(&e, &prev, &v));
            vertices.push(v.clone());
            ray_vertices.insert((t.id.clone(), k), v.clone());
            ray_edges.insert((t.id.clone(), k), e);
            prev = v;
        }
    }
    Ok(Truncation {
        graph: Graph::new(vertices, edges, Vec::new()),
        depth,
        ray_vertices,
        ray_edges,
        attach,
    })
}

/// `E_V` together with the names given to primed vertices and edges.
#[derive(Clone, Debug)]
pub struct RelativeGraph {
    pub graph: Graph,
    /// `v -> v'` for `v` in `R(E) \ V`.
    pub vertex_prime: BTreeMap<VertexId, VertexId>,
    /// `e -> e'` for edges with `r(e)` in `R(E) \ V`.
    pub edge_prime: BTreeMap<String, String>,
}

/// Builds `E_V`: a new sink `v'` for each `v` in `R(E) \ V`, and a copy `e'`
/// of every edge entering such a `v`, redirected to `v'`.
pub fn build_relative_graph(g: &Graph, v_set: &VertexSet) -> Result<RelativeGraph> {
    if !g.is_ray_free() {
        return Err(Error::HasTails);
    }
    let class = classify_vertices(g)?;
    v_set.check_within(g)?;
    let regular = class.regular();
    let bad: Vec<String> = v_set.base.difference(&regular.base).cloned().collect();
    if !bad.is_empty() {
        return Err(Error::NotRegular(bad));
    }
    let missing: BTreeSet<VertexId> = regular.base.difference(&v_set.base).cloned().collect();
    let mut taken = taken_ids(g);
    let mut vertices = g.vertices().to_vec();
    let mut edges = g.edges().to_vec();
    let mut vertex_prime = BTreeMap::new();
    for v in &missing {
        let p = fresh_id(format!("{v}'"), &taken);
        taken.insert(p.clone());
        vertices.push(p.clone());
        vertex_prime.insert(v.clone(), p);
    }
    let mut edge_prime = BTreeMap::new();
    for e in g.edges() {
        if let Some(target) = vertex_prime.get(&e.rng) {
            let p = fresh_id(format!("{}'", e.id), &taken);
            taken.insert(p.clone());
            edges.push(Edge::new(&p, &e.src, target, e.mult));
            edge_prime.insert(e.id.clone(), p);
        }
    }
    Ok(RelativeGraph {
        graph: Graph::new(vertices, edges, Vec::new()),
        vertex_prime,
        edge_prime,
    })
}

/// Vertices reachable in one step, plus whether a ray leaves `v`.
fn targets<'a>(g: &'a Graph, v: &'a str) -> impl Iterator<Item = &'a str> + 'a {
    g.out_edges(v).map(|e| e.rng.as_str())
}

/// Graph predicate: closed under following edges from source to range.
pub fn is_hereditary(g: &Graph, s: &VertexSet) -> bool {
    s.base.iter().all(|v| {
        targets(g, v).all(|w| s.base.contains(w))
            && g.ray_at(v).is_none_or(|t| s.rays.contains(&t.id))
    })
}

/// Whether every target of `v` (ray included) lies in `s`.
fn all_targets_in(g: &Graph, v: &str, s: &VertexSet) -> bool {
    targets(g, v).all(|w| s.base.contains(w)) && g.ray_at(v).is_none_or(|t| s.rays.contains(&t.id))
}

/// Graph predicate: every regular vertex whose targets all lie in `s` is in `s`.
///
/// Ray vertices outside `s` are never forced since the ray never re-enters
/// `s`; a ray inside `s` imposes nothing.
pub fn is_saturated(g: &Graph, s: &VertexSet) -> bool {
    g.vertices()
        .iter()
        .all(|v| s.base.contains(v) || !is_regular(g, v) || !all_targets_in(g, v, s))
}

fn is_regular(g: &Graph, v: &str) -> bool {
    matches!(g.out_degree(v), Degree::Finite(n) if n > 0)
}

pub fn hereditary_closure(g: &Graph, s: &VertexSet) -> Result<VertexSet> {
    g.ensure_valid()?;
    s.check_within(g)?;
    let mut out = s.clone();
    let mut stack: Vec<VertexId> = out.base.iter().cloned().collect();
    while let Some(v) = stack.pop() {
        if let Some(t) = g.ray_at(&v) {
            out.rays.insert(t.id.clone());
        }
        for w in targets(g, &v) {
            if out.base.insert(w.to_owned()) {
                stack.push(w.to_owned());
            }
        }
    }
    Ok(out)
}

/// Smallest saturated superset of `s`. On hereditary input the result is
/// hereditary as well.
pub fn saturation_closure(g: &Graph, s: &VertexSet) -> Result<VertexSet> {
    g.ensure_valid()?;
    s.check_within(g)?;
    let mut out = s.clone();
    loop {
        let forced: Vec<VertexId> = g
            .vertices()
            .iter()
            .filter(|v| !out.base.contains(*v) && is_regular(g, v) && all_targets_in(g, v, &out))
            .cloned()
            .collect();
        if forced.is_empty() {
            return Ok(out);
        }
        out.base.extend(forced);
    }
}

/// `saturation(hereditary(s))`, the smallest saturated hereditary superset.
pub fn saturated_hereditary_closure(g: &Graph, s: &VertexSet) -> Result<VertexSet> {
    saturation_closure(g, &hereditary_closure(g, s)?)
}

#[derive(Clone, Debug)]
pub struct Quotient {
    pub graph: Graph,
    /// Infinite emitters left with finitely many (but some) edges outside `H`.
    pub b_h: VertexSet,
    /// `R(F) \ B_H`.
    pub relative_set: VertexSet,
}

/// The graph `F = E / H` with the breaking vertices `B_H` and the relative
/// set describing the quotient algebra as `C*(F, R(F) \ B_H)`.
pub fn quotient_graph(g: &Graph, h: &VertexSet) -> Result<Quotient> {
    g.ensure_valid()?;
    h.check_within(g)?;
    if !is_hereditary(g, h) {
        return Err(Error::NotHereditarySaturated(format!(
            "{h} is not hereditary"
        )));
    }
    if !is_saturated(g, h) {
        return Err(Error::NotHereditarySaturated(format!(
            "{h} is not saturated"
        )));
    }
    let vertices: Vec<VertexId> = g
        .vertices()
        .iter()
        .filter(|v| !h.base.contains(*v))
        .cloned()
        .collect();
    let edges: Vec<Edge> = g
        .edges()
        .iter()
        .filter(|e| !h.base.contains(&e.rng))
        .cloned()
        .collect();
    let tails: Vec<TailRay> = g
        .tails()
        .iter()
        .filter(|t| !h.rays.contains(&t.id))
        .cloned()
        .collect();
    let class = classify_vertices(g)?;
    let mut b_h = VertexSet::new();
    for v in class.infinite_emitters() {
        let out = edges
            .iter()
            .filter(|e| e.src == v)
            .fold(Degree::Finite(0), |d, e| d.plus(e.mult));
        if matches!(out, Degree::Finite(n) if n > 0) {
            b_h.base.insert(v);
        }
    }
    let graph = Graph::new(vertices, edges, tails);
    let relative_set = classify_vertices(&graph)?.regular().difference(&b_h);
    Ok(Quotient {
        graph,
        b_h,
        relative_set,
    })
}

fn mult_le(a: Multiplicity, b: Multiplicity) -> bool {
    match (a, b) {
        (_, Multiplicity::Omega) => true,
        (Multiplicity::Omega, Multiplicity::Finite(_)) => false,
        (Multiplicity::Finite(x), Multiplicity::Finite(y)) => x <= y,
    }
}

/// `V = { v in R(F) : s_F^-1(v) = s^-1(v) }` for a subgraph `F` of `E`.
pub fn subgraph_relative_set(g: &Graph, f: &Graph) -> Result<VertexSet> {
    g.ensure_valid()?;
    f.ensure_valid()?;
    for v in f.vertices() {
        if !g.has_vertex(v) {
            return Err(Error::NotSubgraph(format!(
                "vertex {v} not in the ambient graph"
            )));
        }
    }
    for e in f.edges() {
        match g.edge(&e.id) {
            Some(ge) if ge.src == e.src && ge.rng == e.rng && mult_le(e.mult, ge.mult) => {}
            _ => {
                return Err(Error::NotSubgraph(format!(
                    "edge {} not in the ambient graph",
                    e.id
                )))
            }
        }
    }
    for t in f.tails() {
        if g.ray(&t.id).map(|r| &r.attach) != Some(&t.attach) {
            return Err(Error::NotSubgraph(format!(
                "ray {} not in the ambient graph",
                t.id
            )));
        }
    }
    let class = classify_vertices(f)?;
    let mut out = VertexSet::new();
    for (v, tag) in &class.tags {
        if *tag != VertexTag::Regular {
            continue;
        }
        let edges_kept = g
            .out_edges(v)
            .all(|ge| f.edge(&ge.id).is_some_and(|fe| fe.mult == ge.mult));
        let ray_kept = g.ray_at(v).is_none_or(|t| f.ray(&t.id).is_some());
        if edges_kept && ray_kept {
            out.base.insert(v.clone());
        }
    }
    out.rays = class.rays;
    Ok(out)
}
