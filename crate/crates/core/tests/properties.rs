use proptest::prelude::*;

use corrtail_core::ck::{path_space_rep, verify_ck_relations, MAX_BASIS};
use corrtail_core::lattice::{enumerate_saturated_hereditary, tails_lattice_map};
use corrtail_core::linalg::{span_closure, Mat, Q};
use corrtail_core::transforms::{
    add_tails, build_relative_graph, hereditary_closure, is_hereditary, is_saturated,
    saturated_hereditary_closure, truncate_tails,
};
use corrtail_core::{classify_vertices, Edge, Error, Graph, Multiplicity, VertexSet};

const NAMES: [&str; 6] = ["a", "b", "c", "d", "e", "f"];

fn graph_from(n: usize, cells: &[Option<Multiplicity>], dag: bool) -> Graph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if dag && j <= i {
                continue;
            }
            if let Some(m) = cells[i * n + j] {
                let id = format!("{}{}", NAMES[i], NAMES[j]);
                edges.push(Edge::new(&id, NAMES[i], NAMES[j], m));
            }
        }
    }
    Graph::from_parts(&NAMES[..n], edges)
}

fn mult(omega: bool) -> impl Strategy<Value = Option<Multiplicity>> {
    let w = if omega { 1 } else { 0 };
    prop_oneof![
        6 => Just(None),
        3 => Just(Some(Multiplicity::Finite(1))),
        1 => Just(Some(Multiplicity::Finite(2))),
        w => Just(Some(Multiplicity::Omega)),
    ]
}

fn any_graph() -> impl Strategy<Value = Graph> {
    (1usize..=6).prop_flat_map(|n| {
        prop::collection::vec(mult(true), n * n).prop_map(move |c| graph_from(n, &c, false))
    })
}

/// Acyclic graphs with finitely many edges: edges only go up the vertex order.
fn dag() -> impl Strategy<Value = Graph> {
    (1usize..=5).prop_flat_map(|n| {
        prop::collection::vec(mult(false), n * n).prop_map(move |c| graph_from(n, &c, true))
    })
}

fn with_subset(g: impl Strategy<Value = Graph>) -> impl Strategy<Value = (Graph, VertexSet)> {
    g.prop_flat_map(|g| {
        let n = g.vertices().len();
        prop::collection::vec(any::<bool>(), n).prop_map(move |bits| {
            let s: VertexSet = g
                .vertices()
                .iter()
                .zip(&bits)
                .filter(|(_, b)| **b)
                .map(|(v, _)| v.clone())
                .collect();
            (g.clone(), s)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn closures_are_closed_and_minimal((g, s) in with_subset(any_graph())) {
        let h = hereditary_closure(&g, &s).unwrap();
        prop_assert!(s.is_subset(&h));
        prop_assert!(is_hereditary(&g, &h));
        prop_assert_eq!(hereditary_closure(&g, &h).unwrap(), h.clone());

        let sh = saturated_hereditary_closure(&g, &s).unwrap();
        prop_assert!(is_hereditary(&g, &sh) && is_saturated(&g, &sh));
        let lattice = enumerate_saturated_hereditary(&g).unwrap();
        for e in lattice.elements.iter().filter(|e| s.is_subset(e)) {
            prop_assert!(sh.is_subset(e));
        }
        prop_assert!(lattice.index_of(&sh).is_some());
    }

    #[test]
    fn lattice_is_closed_under_meet_and_join(g in any_graph()) {
        let l = enumerate_saturated_hereditary(&g).unwrap();
        for i in 0..l.len() {
            for j in 0..l.len() {
                let m = &l.elements[l.meet[i][j]];
                prop_assert_eq!(m, &l.elements[i].intersection(&l.elements[j]));
                let join = &l.elements[l.join[i][j]];
                prop_assert!(l.elements[i].is_subset(join) && l.elements[j].is_subset(join));
            }
        }
    }

    #[test]
    fn adding_tails(g in any_graph()) {
        let t = add_tails(&g).unwrap();
        let class = classify_vertices(&t).unwrap();
        prop_assert!(class.sinks().is_empty());
        prop_assert_eq!(add_tails(&t).unwrap(), t.clone());
        let sinks = classify_vertices(&g).unwrap().sinks();
        let attached: std::collections::BTreeSet<_> = t.tails().iter().map(|r| r.attach.clone()).collect();
        prop_assert_eq!(attached, sinks);
        prop_assert!(tails_lattice_map(&g).is_ok());
        let tr = truncate_tails(&t, 2).unwrap();
        prop_assert_eq!(tr.graph.vertices().len(), g.vertices().len() + 2 * t.tails().len());
        prop_assert!(tr.graph.is_ray_free());
    }

    #[test]
    fn relative_graph_counts((g, s) in with_subset(any_graph())) {
        let regular = classify_vertices(&g).unwrap().regular();
        let v_set = s.intersection(&regular);
        let rel = build_relative_graph(&g, &v_set).unwrap();
        let missing = regular.difference(&v_set);
        prop_assert_eq!(rel.graph.vertices().len(), g.vertices().len() + missing.base.len());
        let entering = g.edges().iter().filter(|e| missing.base.contains(&e.rng)).count();
        prop_assert_eq!(rel.graph.edges().len(), g.edges().len() + entering);
        for v in &missing.base {
            prop_assert_eq!(rel.graph.out_edges(&rel.vertex_prime[v]).count(), 0);
        }
        prop_assert_eq!(build_relative_graph(&g, &regular).unwrap().graph, g.clone());
    }

    #[test]
    fn json_round_trip((g, s) in with_subset(any_graph())) {
        let json = g.to_json();
        let back = Graph::from_json(&json).unwrap();
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(back.to_json(), json);
        let t = add_tails(&g).unwrap();
        prop_assert_eq!(Graph::from_json(&t.to_json()).unwrap(), t);
        let sj = serde_json::to_string(&s).unwrap();
        prop_assert_eq!(serde_json::from_str::<VertexSet>(&sj).unwrap(), s);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn path_representations_satisfy_relations((g, s) in with_subset(dag())) {
        let regular = classify_vertices(&g).unwrap().regular();
        let v_set = s.intersection(&regular);
        match path_space_rep(&g, &v_set, None) {
            Ok(rep) => {
                let r = verify_ck_relations(&rep, &v_set);
                prop_assert!(r.holds(), "{:?}", r.checks.failures());
                prop_assert!(r.strict);
            }
            Err(Error::Budget { actual, .. }) => prop_assert!(actual > MAX_BASIS),
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn adjoint_reverses_products(a in small_matrix(), b in small_matrix()) {
        prop_assert_eq!(a.mul(&b).adjoint(), b.adjoint().mul(&a.adjoint()));
        prop_assert_eq!(a.add(&b).sub(&b), a.clone());
        let back: Mat = serde_json::from_str(&serde_json::to_string(&a).unwrap()).unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn matrix_units_span_everything(n in 1usize..=4) {
        let gens: Vec<Mat> = (0..n).flat_map(|i| (0..n).map(move |j| Mat::unit(n, i, j))).collect();
        prop_assert_eq!(span_closure(&gens).unwrap().dim(), n * n);
    }
}

fn small_matrix() -> impl Strategy<Value = Mat> {
    prop::collection::vec((-3i64..=3, 1i64..=3), 9).prop_map(|v| {
        let rows = v
            .chunks(3)
            .map(|r| r.iter().map(|&(p, q)| Q::new(p, q)).collect())
            .collect();
        Mat::from_dense(rows).unwrap()
    })
}
