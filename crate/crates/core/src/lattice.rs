//! The lattice of saturated hereditary vertex sets and its behaviour under
//! adding tails.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{classify_vertices, Degree, Graph, VertexSet};
use crate::transforms::{add_tails, saturated_hereditary_closure};

pub const MAX_VERTICES: usize = 16;
pub const MAX_RAYS: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdealLattice {
    /// Sorted by (weight, lexicographic).
    pub elements: Vec<VertexSet>,
    pub meet: Vec<Vec<usize>>,
    pub join: Vec<Vec<usize>>,
    pub row_finite: bool,
}

impl IdealLattice {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.elements[i].is_subset(&self.elements[j])
    }

    pub fn index_of(&self, s: &VertexSet) -> Option<usize> {
        self.elements.iter().position(|e| e == s)
    }

    /// Covering pairs `(i, j)`: `i < j` with nothing strictly between.
    pub fn hasse_edges(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i == j || !self.leq(i, j) {
                    continue;
                }
                let covered = (0..n).any(|k| k != i && k != j && self.leq(i, k) && self.leq(k, j));
                if !covered {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

/// All saturated hereditary sets of `g`, by exhaustive subset search with
/// hereditary pruning.
pub fn enumerate_saturated_hereditary(g: &Graph) -> Result<IdealLattice> {
    let class = classify_vertices(g)?;
    let n = g.vertices().len();
    if n > MAX_VERTICES {
        return Err(Error::Budget {
            what: "ordinary vertex count",
            limit: MAX_VERTICES,
            actual: n,
        });
    }
    if g.tails().len() > MAX_RAYS {
        return Err(Error::Budget {
            what: "ray count",
            limit: MAX_RAYS,
            actual: g.tails().len(),
        });
    }
    let idx: BTreeMap<&str, usize> = g
        .vertices()
        .iter()
        .enumerate()
        .map(|(i, v)| (v.as_str(), i))
        .collect();
    let mut succ = vec![0u32; n];
    for e in g.edges() {
        succ[idx[e.src.as_str()]] |= 1 << idx[e.rng.as_str()];
    }
    // ray index attached at each vertex
    let ray_of: Vec<Option<usize>> = g
        .vertices()
        .iter()
        .map(|v| g.tails().iter().position(|t| &t.attach == v))
        .collect();
    let regular: Vec<bool> = g
        .vertices()
        .iter()
        .map(|v| matches!(g.out_degree(v), Degree::Finite(k) if k > 0))
        .collect();

    let mut elements = Vec::new();
    for mask in 0u32..(1u32 << n) {
        let hereditary = (0..n).all(|v| mask & (1 << v) == 0 || succ[v] & !mask == 0);
        if !hereditary {
            continue;
        }
        let mut forced = 0u32;
        let mut free = Vec::new();
        for (t, ray) in g.tails().iter().enumerate() {
            if mask & (1 << idx[ray.attach.as_str()]) != 0 {
                forced |= 1 << t;
            } else {
                free.push(t);
            }
        }
        for choice in 0u32..(1u32 << free.len()) {
            let mut rays = forced;
            for (k, &t) in free.iter().enumerate() {
                if choice & (1 << k) != 0 {
                    rays |= 1 << t;
                }
            }
            let saturated = (0..n).all(|v| {
                if mask & (1 << v) != 0 || !regular[v] {
                    return true;
                }
                let targets_in = succ[v] & !mask == 0;
                let ray_in = ray_of[v].is_none_or(|t| rays & (1 << t) != 0);
                !(targets_in && ray_in)
            });
            if saturated {
                elements.push(VertexSet {
                    base: (0..n)
                        .filter(|v| mask & (1 << v) != 0)
                        .map(|v| g.vertices()[v].clone())
                        .collect(),
                    rays: (0..g.tails().len())
                        .filter(|t| rays & (1 << t) != 0)
                        .map(|t| g.tails()[t].id.clone())
                        .collect(),
                });
            }
        }
    }
    elements.sort_by_key(VertexSet::sort_key);

    let m = elements.len();
    let position: BTreeMap<&VertexSet, usize> =
        elements.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let mut meet = vec![vec![0; m]; m];
    let mut join = vec![vec![0; m]; m];
    for i in 0..m {
        for j in 0..m {
            let lo = elements[i].intersection(&elements[j]);
            meet[i][j] = *position.get(&lo).ok_or_else(|| {
                Error::Verification(format!(
                    "meet {lo} of {} and {} not in lattice",
                    elements[i], elements[j]
                ))
            })?;
            let hi = saturated_hereditary_closure(g, &elements[i].union(&elements[j]))?;
            join[i][j] = *position.get(&hi).ok_or_else(|| {
                Error::Verification(format!(
                    "join {hi} of {} and {} not in lattice",
                    elements[i], elements[j]
                ))
            })?;
        }
    }
    let row_finite = class.infinite_emitters().is_empty();
    Ok(IdealLattice {
        elements,
        meet,
        join,
        row_finite,
    })
}

/// A verified order isomorphism between the lattices of `g` and
/// `add_tails(g)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LatticeIso {
    pub source: IdealLattice,
    pub target: IdealLattice,
    /// `map[i]` is the target index of source element `i`.
    pub map: Vec<usize>,
}

/// `H -> H` plus the rays attached at sinks in `H`, checked to be an order
/// isomorphism onto the lattice of `add_tails(g)`.
pub fn tails_lattice_map(g: &Graph) -> Result<LatticeIso> {
    if !g.is_ray_free() {
        return Err(Error::HasTails);
    }
    let tailed = add_tails(g)?;
    let source = enumerate_saturated_hereditary(g)?;
    let target = enumerate_saturated_hereditary(&tailed)?;
    let mut map = Vec::with_capacity(source.len());
    for h in &source.elements {
        let mut image = h.clone();
        for t in tailed.tails() {
            if h.contains(&t.attach) {
                image.rays.insert(t.id.clone());
            }
        }
        let j = target.index_of(&image).ok_or_else(|| {
            Error::Verification(format!(
                "image {image} of {h} is not saturated hereditary in add_tails"
            ))
        })?;
        map.push(j);
    }
    let mut hit = vec![false; target.len()];
    for (i, &j) in map.iter().enumerate() {
        if std::mem::replace(&mut hit[j], true) {
            return Err(Error::Verification(format!(
                "map not injective: {} collides at {}",
                source.elements[i], target.elements[j]
            )));
        }
    }
    if let Some(j) = hit.iter().position(|h| !h) {
        return Err(Error::Verification(format!(
            "map not surjective: {} has no preimage",
            target.elements[j]
        )));
    }
    for a in 0..source.len() {
        for b in 0..source.len() {
            if source.leq(a, b) != target.leq(map[a], map[b]) {
                return Err(Error::Verification(format!(
                    "order not preserved between {} and {}",
                    source.elements[a], source.elements[b]
                )));
            }
        }
    }
    Ok(LatticeIso {
        source,
        target,
        map,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LatticeReport {
    pub count: usize,
    pub elements: Vec<VertexSet>,
    pub hasse: Vec<(usize, usize)>,
    pub meet: Vec<Vec<usize>>,
    pub join: Vec<Vec<usize>>,
    pub note: Option<String>,
}

pub fn lattice_report(l: &IdealLattice) -> LatticeReport {
    let note = (!l.row_finite).then(|| {
        "graph is not row-finite: only the saturated hereditary layer is listed; \
         gauge-invariant ideals also depend on breaking vertices"
            .to_string()
    });
    LatticeReport {
        count: l.len(),
        elements: l.elements.clone(),
        hasse: l.hasse_edges(),
        meet: l.meet.clone(),
        join: l.join.clone(),
        note,
    }
}
