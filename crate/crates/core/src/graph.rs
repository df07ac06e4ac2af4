//! Finite directed graphs with edge multiplicities and symbolic tail rays.
//!
//! A [`Graph`] stores ordinary vertices and edges plus a list of tail rays.
//! A ray attached at `v` stands for the infinite chain `v -> v1 -> v2 -> ...`
//! of fresh vertices joined by single edges; ray vertices are addressed as
//! `(ray id, depth)` with `depth >= 1` and are never materialised.
//!
//! Parallel edges are stored once with a [`Multiplicity`]; `Omega` models an
//! edge repeated infinitely often, which is how infinite emitters enter the
//! model.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type VertexId = String;

/// Number of parallel copies of an edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Multiplicity {
    Finite(u32),
    Omega,
}

impl Multiplicity {
    pub fn is_omega(self) -> bool {
        matches!(self, Multiplicity::Omega)
    }

    /// Finite copy count, `None` for `Omega`.
    pub fn finite(self) -> Option<u32> {
        match self {
            Multiplicity::Finite(n) => Some(n),
            Multiplicity::Omega => None,
        }
    }
}

impl fmt::Display for Multiplicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Multiplicity::Finite(n) => write!(f, "{n}"),
            Multiplicity::Omega => f.write_str("ω"),
        }
    }
}

impl Serialize for Multiplicity {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Multiplicity::Finite(n) => s.serialize_u32(*n),
            Multiplicity::Omega => s.serialize_str("omega"),
        }
    }
}

impl<'de> Deserialize<'de> for Multiplicity {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u32),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(n) => Ok(Multiplicity::Finite(n)),
            Raw::Str(s) if s == "omega" => Ok(Multiplicity::Omega),
            Raw::Str(s) => Err(serde::de::Error::custom(format!(
                "multiplicity must be a positive integer or \"omega\", got {s:?}"
            ))),
        }
    }
}

/// Out-degree of a vertex, counted with multiplicity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Degree {
    Finite(u64),
    Infinite,
}

impl Degree {
    pub fn plus(self, m: Multiplicity) -> Degree {
        match (self, m) {
            (Degree::Finite(a), Multiplicity::Finite(b)) => Degree::Finite(a + u64::from(b)),
            _ => Degree::Infinite,
        }
    }

    pub fn is_zero(self) -> bool {
        self == Degree::Finite(0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub id: String,
    pub src: VertexId,
    pub rng: VertexId,
    pub mult: Multiplicity,
}

impl Edge {
    pub fn new(id: &str, src: &str, rng: &str, mult: Multiplicity) -> Self {
        Edge {
            id: id.to_owned(),
            src: src.to_owned(),
            rng: rng.to_owned(),
            mult,
        }
    }

    pub fn single(id: &str, src: &str, rng: &str) -> Self {
        Self::new(id, src, rng, Multiplicity::Finite(1))
    }
}

/// An infinite chain `attach -> (id,1) -> (id,2) -> ...`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TailRay {
    pub id: String,
    pub attach: VertexId,
}

/// A finite directed graph with multiplicities and symbolic tail rays.
///
/// Construction never fails; call [`Graph::validate`] (or any operation with
/// a validity precondition) to check the invariants.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Graph {
    vertices: Vec<VertexId>,
    edges: Vec<Edge>,
    tails: Vec<TailRay>,
}

#[derive(Serialize, Deserialize)]
struct GraphDoc {
    vertices: Vec<VertexId>,
    edges: Vec<Edge>,
    #[serde(default)]
    tails: Vec<TailRay>,
}

impl Serialize for Graph {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GraphDoc {
            vertices: self.vertices.clone(),
            edges: self.edges.clone(),
            tails: self.tails.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Graph {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = GraphDoc::deserialize(d)?;
        Ok(Graph::new(doc.vertices, doc.edges, doc.tails))
    }
}

impl Graph {
    /// Builds a graph in canonical form: vertices, edges and tails sorted by id.
    pub fn new(mut vertices: Vec<VertexId>, mut edges: Vec<Edge>, mut tails: Vec<TailRay>) -> Self {
        vertices.sort();
        edges.sort_by(|a, b| a.id.cmp(&b.id));
        tails.sort_by(|a, b| a.id.cmp(&b.id));
        Graph {
            vertices,
            edges,
            tails,
        }
    }

    pub fn empty() -> Self {
        Graph::new(Vec::new(), Vec::new(), Vec::new())
    }

    pub fn from_parts<V: AsRef<str>>(vertices: &[V], edges: Vec<Edge>) -> Self {
        Graph::new(
            vertices.iter().map(|v| v.as_ref().to_owned()).collect(),
            edges,
            Vec::new(),
        )
    }

    pub fn with_tails(mut self, tails: Vec<TailRay>) -> Self {
        self.tails.extend(tails);
        Graph::new(self.vertices, self.edges, self.tails)
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn tails(&self) -> &[TailRay] {
        &self.tails
    }

    pub fn has_vertex(&self, v: &str) -> bool {
        self.vertices
            .binary_search_by(|x| x.as_str().cmp(v))
            .is_ok()
    }

    pub fn edge(&self, id: &str) -> Option<&Edge> {
        self.edges
            .binary_search_by(|e| e.id.as_str().cmp(id))
            .ok()
            .map(|i| &self.edges[i])
    }

    pub fn ray(&self, id: &str) -> Option<&TailRay> {
        self.tails.iter().find(|t| t.id == id)
    }

    pub fn ray_at(&self, v: &str) -> Option<&TailRay> {
        self.tails.iter().find(|t| t.attach == v)
    }

    pub fn is_ray_free(&self) -> bool {
        self.tails.is_empty()
    }

    pub fn has_omega(&self) -> bool {
        self.edges.iter().any(|e| e.mult.is_omega())
    }

    pub fn out_edges<'a>(&'a self, v: &'a str) -> impl Iterator<Item = &'a Edge> + 'a {
        self.edges.iter().filter(move |e| e.src == v)
    }

    pub fn in_edges<'a>(&'a self, v: &'a str) -> impl Iterator<Item = &'a Edge> + 'a {
        self.edges.iter().filter(move |e| e.rng == v)
    }

    /// `|s^-1(v)|` counted with multiplicity, including the first edge of a
    /// ray attached at `v`.
    pub fn out_degree(&self, v: &str) -> Degree {
        let base = self
            .out_edges(v)
            .fold(Degree::Finite(0), |d, e| d.plus(e.mult));
        if self.ray_at(v).is_some() {
            base.plus(Multiplicity::Finite(1))
        } else {
            base
        }
    }

    /// Edge-count total with multiplicity, `None` if any edge is `Omega`.
    pub fn edge_count(&self) -> Option<u64> {
        self.edges
            .iter()
            .try_fold(0u64, |acc, e| e.mult.finite().map(|m| acc + u64::from(m)))
    }

    /// Finds a vertex on a directed cycle of ordinary edges, if any.
    pub fn find_cycle_vertex(&self) -> Option<VertexId> {
        // Kahn's algorithm; leftovers lie on or upstream of a cycle.
        let mut indeg: BTreeMap<&str, usize> =
            self.vertices.iter().map(|v| (v.as_str(), 0)).collect();
        for e in &self.edges {
            if let Some(d) = indeg.get_mut(e.rng.as_str()) {
                *d += 1;
            }
        }
        let mut stack: Vec<&str> = indeg
            .iter()
            .filter(|(_, d)| **d == 0)
            .map(|(v, _)| *v)
            .collect();
        let mut removed = BTreeSet::new();
        while let Some(v) = stack.pop() {
            removed.insert(v);
            for e in self.out_edges(v) {
                let d = indeg.get_mut(e.rng.as_str()).expect("validated");
                *d -= 1;
                if *d == 0 {
                    stack.push(e.rng.as_str());
                }
            }
        }
        self.vertices
            .iter()
            .find(|v| !removed.contains(v.as_str()))
            .cloned()
    }

    pub fn is_acyclic(&self) -> bool {
        self.find_cycle_vertex().is_none()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph serialises")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Graph> {
        serde_json::from_str(s)
    }

    /// Reports every invariant violation; never fails.
    pub fn validate(&self) -> ValidationReport {
        let mut out = Vec::new();
        let mut push = |kind, detail: String| out.push(Violation { kind, detail });

        for w in self.vertices.windows(2) {
            if w[0] == w[1] {
                push(ViolationKind::DuplicateVertex, w[0].clone());
            }
        }
        for w in self.edges.windows(2) {
            if w[0].id == w[1].id {
                push(ViolationKind::DuplicateEdgeId, w[0].id.clone());
            }
        }
        for w in self.tails.windows(2) {
            if w[0].id == w[1].id {
                push(ViolationKind::DuplicateRayId, w[0].id.clone());
            }
        }
        for e in &self.edges {
            if !self.has_vertex(&e.src) {
                push(ViolationKind::DanglingSrc, format!("{} -> {}", e.id, e.src));
            }
            if !self.has_vertex(&e.rng) {
                push(ViolationKind::DanglingRng, format!("{} -> {}", e.id, e.rng));
            }
            if e.mult == Multiplicity::Finite(0) {
                push(ViolationKind::ZeroMultiplicity, e.id.clone());
            }
        }
        let mut attached = BTreeSet::new();
        for t in &self.tails {
            if !self.has_vertex(&t.attach) {
                push(
                    ViolationKind::DanglingRayAttachment,
                    format!("{} -> {}", t.id, t.attach),
                );
            }
            if !attached.insert(t.attach.as_str()) {
                push(ViolationKind::DuplicateRayAttachment, t.attach.clone());
            }
        }
        ValidationReport { violations: out }
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.is_ok() {
            Ok(())
        } else {
            Err(Error::InvalidGraph(report))
        }
    }

    pub fn full_set(&self) -> VertexSet {
        VertexSet {
            base: self.vertices.iter().cloned().collect(),
            rays: self.tails.iter().map(|t| t.id.clone()).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    DuplicateVertex,
    DuplicateEdgeId,
    DuplicateRayId,
    DanglingSrc,
    DanglingRng,
    ZeroMultiplicity,
    DanglingRayAttachment,
    DuplicateRayAttachment,
}

impl ViolationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationKind::DuplicateVertex => "duplicate vertex",
            ViolationKind::DuplicateEdgeId => "duplicate edge id",
            ViolationKind::DuplicateRayId => "duplicate ray id",
            ViolationKind::DanglingSrc => "dangling src",
            ViolationKind::DanglingRng => "dangling rng",
            ViolationKind::ZeroMultiplicity => "zero multiplicity",
            ViolationKind::DanglingRayAttachment => "dangling ray attachment",
            ViolationKind::DuplicateRayAttachment => "duplicate ray attachment",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{} ({})", v.kind.as_str(), v.detail)?;
        }
        Ok(())
    }
}

/// Functional form of the validity check.
pub fn validate_graph(g: &Graph) -> ValidationReport {
    g.validate()
}

/// A set of vertices: ordinary vertices plus whole tail rays.
///
/// Also read as the ideal `C_0(support)` of `A = C_0(E^0)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct VertexSet {
    #[serde(rename = "vertices")]
    pub base: BTreeSet<VertexId>,
    pub rays: BTreeSet<String>,
}

impl<'de> Deserialize<'de> for VertexSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Bare(Vec<VertexId>),
            Full {
                vertices: Vec<VertexId>,
                #[serde(default)]
                rays: Vec<String>,
            },
        }
        Ok(match Raw::deserialize(d)? {
            Raw::Bare(v) => VertexSet::from_iter(v),
            Raw::Full { vertices, rays } => VertexSet {
                base: vertices.into_iter().collect(),
                rays: rays.into_iter().collect(),
            },
        })
    }
}

impl<S: Into<VertexId>> FromIterator<S> for VertexSet {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        VertexSet {
            base: iter.into_iter().map(Into::into).collect(),
            rays: BTreeSet::new(),
        }
    }
}

impl VertexSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn of(vs: &[&str]) -> Self {
        vs.iter().map(|v| v.to_string()).collect()
    }

    pub fn with_rays(mut self, rays: &[&str]) -> Self {
        self.rays.extend(rays.iter().map(|r| r.to_string()));
        self
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty() && self.rays.is_empty()
    }

    pub fn contains(&self, v: &str) -> bool {
        self.base.contains(v)
    }

    pub fn contains_ray(&self, r: &str) -> bool {
        self.rays.contains(r)
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.base.is_subset(&other.base) && self.rays.is_subset(&other.rays)
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        VertexSet {
            base: self.base.union(&other.base).cloned().collect(),
            rays: self.rays.union(&other.rays).cloned().collect(),
        }
    }

    pub fn intersection(&self, other: &VertexSet) -> VertexSet {
        VertexSet {
            base: self.base.intersection(&other.base).cloned().collect(),
            rays: self.rays.intersection(&other.rays).cloned().collect(),
        }
    }

    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        VertexSet {
            base: self.base.difference(&other.base).cloned().collect(),
            rays: self.rays.difference(&other.rays).cloned().collect(),
        }
    }

    /// Number of ordinary vertices plus number of whole rays.
    pub fn weight(&self) -> usize {
        self.base.len() + self.rays.len()
    }

    /// Ordering key: by weight, then lexicographically on the member list.
    pub fn sort_key(&self) -> (usize, Vec<String>) {
        let mut names: Vec<String> = self.base.iter().cloned().collect();
        names.extend(self.rays.iter().map(|r| format!("ray:{r}")));
        (self.weight(), names)
    }

    /// Checks the set only references vertices and rays of `g`.
    pub fn check_within(&self, g: &Graph) -> Result<()> {
        if let Some(v) = self.base.iter().find(|v| !g.has_vertex(v)) {
            return Err(Error::UnknownVertex(v.clone()));
        }
        if let Some(r) = self.rays.iter().find(|r| g.ray(r).is_none()) {
            return Err(Error::UnknownVertex(r.clone()));
        }
        Ok(())
    }
}

impl fmt::Display for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        let mut first = true;
        for v in &self.base {
            if !first {
                f.write_str(",")?;
            }
            first = false;
            f.write_str(v)?;
        }
        for r in &self.rays {
            if !first {
                f.write_str(",")?;
            }
            first = false;
            write!(f, "ray({r})")?;
        }
        f.write_str("}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VertexTag {
    Sink,
    Regular,
    InfiniteEmitter,
}

/// Per-vertex classification of the ordinary vertices; ray vertices are
/// always regular and never sources.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexClass {
    pub tags: BTreeMap<VertexId, VertexTag>,
    pub sources: BTreeSet<VertexId>,
    pub rays: BTreeSet<String>,
}

impl VertexClass {
    pub fn tag(&self, v: &str) -> Option<VertexTag> {
        self.tags.get(v).copied()
    }

    fn with_tag(&self, pred: impl Fn(VertexTag) -> bool) -> BTreeSet<VertexId> {
        self.tags
            .iter()
            .filter(|(_, t)| pred(**t))
            .map(|(v, _)| v.clone())
            .collect()
    }

    pub fn sinks(&self) -> BTreeSet<VertexId> {
        self.with_tag(|t| t == VertexTag::Sink)
    }

    pub fn infinite_emitters(&self) -> BTreeSet<VertexId> {
        self.with_tag(|t| t == VertexTag::InfiniteEmitter)
    }

    /// `R(E)`, including every ray.
    pub fn regular(&self) -> VertexSet {
        VertexSet {
            base: self.with_tag(|t| t == VertexTag::Regular),
            rays: self.rays.clone(),
        }
    }

    /// Vertices emitting finitely many edges (sinks and regular vertices).
    pub fn finite_emitters(&self) -> VertexSet {
        VertexSet {
            base: self.with_tag(|t| t != VertexTag::InfiniteEmitter),
            rays: self.rays.clone(),
        }
    }
}

pub fn classify_vertices(g: &Graph) -> Result<VertexClass> {
    g.ensure_valid()?;
    let mut has_in: BTreeSet<&str> = BTreeSet::new();
    for e in g.edges() {
        has_in.insert(e.rng.as_str());
    }
    let tags = g
        .vertices()
        .iter()
        .map(|v| {
            let tag = match g.out_degree(v) {
                Degree::Finite(0) => VertexTag::Sink,
                Degree::Finite(_) => VertexTag::Regular,
                Degree::Infinite => VertexTag::InfiniteEmitter,
            };
            (v.clone(), tag)
        })
        .collect();
    let sources = g
        .vertices()
        .iter()
        .filter(|v| !has_in.contains(v.as_str()))
        .cloned()
        .collect();
    Ok(VertexClass {
        tags,
        sources,
        rays: g.tails().iter().map(|t| t.id.clone()).collect(),
    })
}

/// The graph/correspondence dictionary: properties of `X(E)` read off `E`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyTable {
    /// `phi(delta_v)` is compact iff `v` emits finitely many edges.
    pub phi_delta_compact: BTreeMap<VertexId, bool>,
    /// `phi(A)` lies in the compacts iff `E` is row-finite.
    pub row_finite: bool,
    /// `phi` is injective iff `E` has no sinks.
    pub phi_injective: bool,
    /// `X(E)` is full iff `E` has no sources.
    pub full: bool,
    /// `X(E)` is always essential.
    pub essential: bool,
}

pub fn correspondence_property_table(g: &Graph) -> Result<PropertyTable> {
    let class = classify_vertices(g)?;
    let phi_delta_compact: BTreeMap<_, _> = class
        .tags
        .iter()
        .map(|(v, t)| (v.clone(), *t != VertexTag::InfiniteEmitter))
        .collect();
    Ok(PropertyTable {
        row_finite: phi_delta_compact.values().all(|b| *b),
        phi_delta_compact,
        phi_injective: class.sinks().is_empty(),
        full: class.sources.is_empty(),
        essential: true,
    })
}
