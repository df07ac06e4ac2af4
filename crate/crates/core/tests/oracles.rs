//! Library results against independent brute-force computations.

use std::collections::BTreeMap;

use corrtail_core::ck::{count_paths_to_sinks, edge_copies, path_space_rep, sink_paths};
use corrtail_core::corpus::{exhaustive, fixtures, ExhaustiveSpec};
use corrtail_core::lattice::enumerate_saturated_hereditary;
use corrtail_core::transforms::{is_hereditary, is_saturated, saturated_hereditary_closure};
use corrtail_core::{Graph, Multiplicity, VertexSet};

fn small_corpus() -> Vec<(String, Graph)> {
    let mut out = exhaustive(&ExhaustiveSpec {
        min_vertices: 1,
        max_vertices: 3,
        max_mult: 2,
        omega: true,
        loops: true,
    });
    out.extend(fixtures::all().into_iter().map(|(n, g)| (n.to_string(), g)));
    out
}

fn dag_corpus() -> Vec<(String, Graph)> {
    exhaustive(&ExhaustiveSpec {
        min_vertices: 1,
        max_vertices: 4,
        max_mult: 2,
        omega: false,
        loops: false,
    })
    .into_iter()
    .filter(|(_, g)| g.is_acyclic())
    .collect()
}

fn all_subsets(g: &Graph) -> Vec<VertexSet> {
    let vs = g.vertices();
    (0u32..1 << vs.len())
        .map(|m| {
            (0..vs.len())
                .filter(|i| m >> i & 1 == 1)
                .map(|i| vs[i].clone())
                .collect()
        })
        .collect()
}

/// Out-neighbours counted with multiplicity, straight from the edge list.
fn out_mults(g: &Graph, v: &str) -> Vec<(String, Multiplicity)> {
    g.edges()
        .iter()
        .filter(|e| e.src == v)
        .map(|e| (e.rng.clone(), e.mult))
        .collect()
}

fn brute_hereditary(g: &Graph, s: &VertexSet) -> bool {
    s.base
        .iter()
        .all(|v| out_mults(g, v).iter().all(|(w, _)| s.base.contains(w)))
}

fn brute_saturated(g: &Graph, s: &VertexSet) -> bool {
    g.vertices().iter().all(|v| {
        let out = out_mults(g, v);
        let regular = !out.is_empty() && out.iter().all(|(_, m)| !m.is_omega());
        s.base.contains(v) || !regular || out.iter().any(|(w, _)| !s.base.contains(w))
    })
}

#[test]
fn predicates_match_definitions() {
    for (id, g) in small_corpus() {
        for s in all_subsets(&g) {
            assert_eq!(is_hereditary(&g, &s), brute_hereditary(&g, &s), "{id} {s}");
            assert_eq!(is_saturated(&g, &s), brute_saturated(&g, &s), "{id} {s}");
        }
    }
}

#[test]
fn lattice_matches_subset_filter() {
    for (id, g) in small_corpus() {
        let mut brute: Vec<VertexSet> = all_subsets(&g)
            .into_iter()
            .filter(|s| brute_hereditary(&g, s) && brute_saturated(&g, s))
            .collect();
        let mut ours = enumerate_saturated_hereditary(&g).unwrap().elements;
        brute.sort();
        ours.sort();
        assert_eq!(ours, brute, "{id}");
    }
}

#[test]
fn closure_is_least_saturated_hereditary_superset() {
    for (id, g) in small_corpus() {
        let lattice: Vec<VertexSet> = all_subsets(&g)
            .into_iter()
            .filter(|s| brute_hereditary(&g, s) && brute_saturated(&g, s))
            .collect();
        for s in all_subsets(&g) {
            let least = lattice
                .iter()
                .filter(|h| s.is_subset(h))
                .fold(g.full_set(), |acc, h| acc.intersection(h));
            assert_eq!(
                saturated_hereditary_closure(&g, &s).unwrap(),
                least,
                "{id} {s}"
            );
        }
    }
}

/// Every path as a sequence of `(edge id, copy)`, by depth-first search.
fn enumerate_paths(g: &Graph) -> Vec<(String, Vec<(String, u32)>)> {
    fn go(
        g: &Graph,
        start: &str,
        v: &str,
        path: &mut Vec<(String, u32)>,
        out: &mut Vec<(String, Vec<(String, u32)>)>,
    ) {
        out.push((start.to_owned(), path.clone()));
        for e in g.edges().iter().filter(|e| e.src == v) {
            let Multiplicity::Finite(m) = e.mult else {
                unreachable!()
            };
            for k in 0..m {
                path.push((e.id.clone(), k));
                go(g, start, &e.rng, path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    for v in g.vertices() {
        go(g, v, v, &mut Vec::new(), &mut out);
    }
    out
}

fn end_of(g: &Graph, start: &str, path: &[(String, u32)]) -> String {
    path.last()
        .map_or(start.to_owned(), |(e, _)| g.edge(e).unwrap().rng.clone())
}

#[test]
fn path_counts_match_enumeration() {
    for (id, g) in dag_corpus() {
        let paths = enumerate_paths(&g);
        let mut per_sink: BTreeMap<String, u64> = BTreeMap::new();
        for (start, p) in &paths {
            let end = end_of(&g, start, p);
            if out_mults(&g, &end).is_empty() {
                *per_sink.entry(end).or_default() += 1;
            }
        }
        let expected: u64 = per_sink.values().map(|n| n * n).sum();
        assert_eq!(count_paths_to_sinks(&g).unwrap(), expected, "{id}");

        let basis = sink_paths(&g, &edge_copies(&g).unwrap()).unwrap();
        assert_eq!(basis.len() as u64, per_sink.values().sum::<u64>(), "{id}");
    }
}

#[test]
fn relative_dims_match_block_count() {
    for (id, g) in dag_corpus()
        .into_iter()
        .filter(|(_, g)| g.vertices().len() <= 3)
    {
        let paths = enumerate_paths(&g);
        let mut ending: BTreeMap<String, u64> = BTreeMap::new();
        for (start, p) in &paths {
            *ending.entry(end_of(&g, start, p)).or_default() += 1;
        }
        let regular: VertexSet = g
            .vertices()
            .iter()
            .filter(|v| !out_mults(&g, v).is_empty())
            .cloned()
            .collect();
        for v_set in all_subsets(&g)
            .into_iter()
            .filter(|s| s.is_subset(&regular))
        {
            // one matrix block per sink and per regular vertex outside V
            let expected: u64 = g
                .vertices()
                .iter()
                .filter(|v| !regular.contains(v) || !v_set.contains(v))
                .map(|v| ending[v] * ending[v])
                .sum();
            let rep = path_space_rep(&g, &v_set, None).unwrap();
            assert_eq!(
                rep.algebra().unwrap().dim() as u64,
                expected,
                "{id} V = {v_set}"
            );
        }
    }
}
