//! Graph corpora: named fixtures, exhaustive enumeration up to isomorphism,
//! and seeded random graphs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{Edge, Graph, Multiplicity};

pub mod fixtures {
    use super::*;

    /// `u -> v`, `u -> w`, `v -> w` (edges `e`, `f`, `g`).
    pub fn e1() -> Graph {
        Graph::from_parts(
            &["u", "v", "w"],
            vec![
                Edge::single("e", "u", "v"),
                Edge::single("f", "u", "w"),
                Edge::single("g", "v", "w"),
            ],
        )
    }

    /// A single edge `e: v -> w`.
    pub fn e2() -> Graph {
        Graph::from_parts(&["v", "w"], vec![Edge::single("e", "v", "w")])
    }

    /// `v` emits infinitely many edges to `w1` and one to `w2`.
    pub fn e3() -> Graph {
        Graph::from_parts(
            &["v", "w1", "w2"],
            vec![
                Edge::new("e1", "v", "w1", Multiplicity::Omega),
                Edge::single("e2", "v", "w2"),
            ],
        )
    }

    /// One vertex with one loop.
    pub fn c5() -> Graph {
        Graph::from_parts(&["v"], vec![Edge::single("e", "v", "v")])
    }

    /// A single isolated vertex.
    pub fn z() -> Graph {
        Graph::from_parts(&["z"], vec![])
    }

    pub fn all() -> Vec<(&'static str, Graph)> {
        vec![
            ("E1", e1()),
            ("E2", e2()),
            ("E3", e3()),
            ("C5", c5()),
            ("z", z()),
        ]
    }

    pub fn by_name(name: &str) -> Option<Graph> {
        all()
            .into_iter()
            .find(|(n, _)| n.eq_ignore_ascii_case(name))
            .map(|(_, g)| g)
    }
}

/// Every graph on `min_vertices..=max_vertices` vertices, up to isomorphism,
/// with each ordered vertex pair carrying multiplicity `0..=max_mult`
/// (optionally `Omega`), loops optional.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExhaustiveSpec {
    pub min_vertices: usize,
    pub max_vertices: usize,
    pub max_mult: u32,
    pub omega: bool,
    pub loops: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomSpec {
    pub count: usize,
    pub seed: u64,
    pub min_vertices: usize,
    pub max_vertices: usize,
    pub edge_probability: f64,
    pub omega_probability: f64,
}

impl RandomSpec {
    pub fn standard(count: usize, seed: u64) -> Self {
        RandomSpec {
            count,
            seed,
            min_vertices: 2,
            max_vertices: 8,
            edge_probability: 0.3,
            omega_probability: 0.05,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub fixtures: bool,
    pub exhaustive: Vec<ExhaustiveSpec>,
    pub random: Option<RandomSpec>,
}

pub const DEFAULT_SEED: u64 = 20_030_601;

impl CorpusSpec {
    pub fn fixtures_only() -> Self {
        CorpusSpec {
            fixtures: true,
            exhaustive: Vec::new(),
            random: None,
        }
    }

    /// The corpus the acceptance suite runs on: fixtures; every graph on at
    /// most three vertices with loops and multiplicities in `{0,1,2,omega}`;
    /// every loop-free graph on four vertices with multiplicities in
    /// `{0,1,2}`; and 50 random graphs.
    pub fn standard(seed: u64) -> Self {
        CorpusSpec {
            fixtures: true,
            exhaustive: vec![
                ExhaustiveSpec {
                    min_vertices: 1,
                    max_vertices: 3,
                    max_mult: 2,
                    omega: true,
                    loops: true,
                },
                ExhaustiveSpec {
                    min_vertices: 4,
                    max_vertices: 4,
                    max_mult: 2,
                    omega: false,
                    loops: false,
                },
            ],
            random: Some(RandomSpec::standard(50, seed)),
        }
    }

    pub fn generate(&self) -> Vec<(String, Graph)> {
        let mut out: Vec<(String, Graph)> = Vec::new();
        if self.fixtures {
            out.extend(
                fixtures::all()
                    .into_iter()
                    .map(|(n, g)| (format!("fixture-{n}"), g)),
            );
        }
        for spec in &self.exhaustive {
            out.extend(exhaustive(spec));
        }
        if let Some(r) = &self.random {
            out.extend(random_graphs(r));
        }
        out
    }
}

const NAMES: [&str; 8] = ["a", "b", "c", "d", "e", "f", "g", "h"];

fn cells(n: usize, loops: bool) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if loops || i != j {
                out.push((i, j));
            }
        }
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for i in 0..n {
            if !prefix.contains(&i) {
                prefix.push(i);
                go(prefix, n, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), n, &mut out);
    out
}

/// Multiplicity code: `0` is no edge, `1..=max` finite, `max+1` is omega.
fn graph_from_code(n: usize, cells: &[(usize, usize)], code: &[u8], max_mult: u32) -> Graph {
    let mut edges = Vec::new();
    for (&(i, j), &c) in cells.iter().zip(code) {
        if c == 0 {
            continue;
        }
        let mult = if u32::from(c) > max_mult {
            Multiplicity::Omega
        } else {
            Multiplicity::Finite(u32::from(c))
        };
        let id = format!("{}{}", NAMES[i], NAMES[j]);
        edges.push(Edge::new(&id, NAMES[i], NAMES[j], mult));
    }
    Graph::from_parts(&NAMES[..n], edges)
}

/// Enumerates one representative (the lexicographically least labelling)
/// per isomorphism class.
pub fn exhaustive(spec: &ExhaustiveSpec) -> Vec<(String, Graph)> {
    assert!(
        spec.max_vertices <= NAMES.len(),
        "at most {} vertices",
        NAMES.len()
    );
    let mut out = Vec::new();
    for n in spec.min_vertices.max(1)..=spec.max_vertices {
        let cells = cells(n, spec.loops);
        let index: Vec<Vec<usize>> = {
            let mut idx = vec![vec![usize::MAX; n]; n];
            for (k, &(i, j)) in cells.iter().enumerate() {
                idx[i][j] = k;
            }
            idx
        };
        let perms = permutations(n);
        let base = spec.max_mult as u8 + 1 + u8::from(spec.omega);
        let total = (base as u64).pow(cells.len() as u32);
        let mut code = vec![0u8; cells.len()];
        let mut image = vec![0u8; cells.len()];
        for _ in 0..total {
            let minimal = perms.iter().all(|p| {
                for (k, &(i, j)) in cells.iter().enumerate() {
                    image[index[p[i]][p[j]]] = code[k];
                }
                image >= code
            });
            if minimal {
                let tag: String = code.iter().map(|c| char::from(b'0' + c)).collect();
                out.push((
                    format!("ex-n{n}-{tag}"),
                    graph_from_code(n, &cells, &code, spec.max_mult),
                ));
            }
            // odometer increment
            for c in code.iter_mut() {
                *c += 1;
                if *c < base {
                    break;
                }
                *c = 0;
            }
        }
    }
    out
}

pub fn random_graphs(spec: &RandomSpec) -> Vec<(String, Graph)> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    (0..spec.count)
        .map(|i| {
            let n = rng.gen_range(spec.min_vertices..=spec.max_vertices.min(NAMES.len()));
            let mut edges = Vec::new();
            for a in &NAMES[..n] {
                for b in &NAMES[..n] {
                    if rng.gen_bool(spec.edge_probability) {
                        let mult = if rng.gen_bool(spec.omega_probability) {
                            Multiplicity::Omega
                        } else {
                            Multiplicity::Finite(rng.gen_range(1..=2))
                        };
                        edges.push(Edge::new(&format!("{a}{b}"), a, b, mult));
                    }
                }
            }
            (
                format!("rand-{}-{i:02}", spec.seed),
                Graph::from_parts(&NAMES[..n], edges),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count(n: usize, mult: u32, omega: bool, loops: bool) -> usize {
        exhaustive(&ExhaustiveSpec {
            min_vertices: n,
            max_vertices: n,
            max_mult: mult,
            omega,
            loops,
        })
        .len()
    }

    #[test]
    fn known_isomorphism_class_counts() {
        // simple digraphs without loops: 1, 3, 16 classes on 1, 2, 3 vertices
        assert_eq!(count(1, 1, false, false), 1);
        assert_eq!(count(2, 1, false, false), 3);
        assert_eq!(count(3, 1, false, false), 16);
        // with loops allowed: 2, 10, 104
        assert_eq!(count(1, 1, false, true), 2);
        assert_eq!(count(2, 1, false, true), 10);
        assert_eq!(count(3, 1, false, true), 104);
        // 218 simple digraphs on 4 vertices
        assert_eq!(count(4, 1, false, false), 218);
    }

    #[test]
    fn exhaustive_graphs_are_valid_and_distinct() {
        let gs = exhaustive(&ExhaustiveSpec {
            min_vertices: 1,
            max_vertices: 2,
            max_mult: 2,
            omega: true,
            loops: true,
        });
        for (_, g) in &gs {
            assert!(g.validate().is_ok());
        }
        let ids: std::collections::BTreeSet<_> = gs.iter().map(|(i, _)| i.clone()).collect();
        assert_eq!(ids.len(), gs.len());
    }

    #[test]
    fn random_is_deterministic() {
        let spec = RandomSpec::standard(10, 7);
        assert_eq!(random_graphs(&spec), random_graphs(&spec));
        let other = random_graphs(&RandomSpec::standard(10, 8));
        assert_ne!(random_graphs(&spec), other);
        for (_, g) in random_graphs(&spec) {
            assert!(g.validate().is_ok());
            assert!((2..=8).contains(&g.vertices().len()));
        }
    }
}
