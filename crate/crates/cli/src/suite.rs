//! The verification suite: every check of every criterion on every graph of
//! a corpus, with counterexamples and budget skips recorded per instance.

use std::collections::BTreeMap;
use std::thread;

use serde::{Deserialize, Serialize};

use corrtail_core::ck::{
    defect_and_tk, giu_test, path_space_rep, verify_corner, verify_relgas,
    verify_tail_relation_lemmas, HomSpec,
};
use corrtail_core::corpus::CorpusSpec;
use corrtail_core::correspondence::{
    add_tail_correspondence, build_graph_correspondence, check_tail_lemmas,
    compare_with_tailed_graph, compute_ideals, is_x_invariant, is_x_saturated,
};
use corrtail_core::lattice::{enumerate_saturated_hereditary, tails_lattice_map};
use corrtail_core::transforms::{add_tails, build_relative_graph, is_hereditary, is_saturated};
use corrtail_core::{classify_vertices, Degree, Error, Graph, Multiplicity, VertexSet};

pub const CRITERIA: [(u8, &str); 10] = [
    (1, "transform invariants"),
    (2, "lattice isomorphism under adding tails"),
    (3, "module predicates agree with graph predicates"),
    (4, "ideal formulas"),
    (5, "tail lemmas"),
    (6, "relative graph algebras"),
    (7, "full corner"),
    (8, "uniqueness harness"),
    (9, "defect homomorphism"),
    (10, "serialization"),
];

/// Largest vertex count for which every vertex subset is tried.
pub const MAX_SUBSET_VERTICES: usize = 12;
/// Failures kept per instance and criterion; the rest are only counted.
const MAX_FAILURES: usize = 3;

/// Deliberate defects for checking that the suite notices them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// The graph-side saturation predicate forces a vertex in as soon as
    /// one of its targets is in the set, instead of all of them.
    BreakSaturation,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteOptions {
    pub depths: Vec<usize>,
    pub fault: Option<Fault>,
    pub threads: usize,
    /// Criteria to run; all of them when empty.
    pub only: Vec<u8>,
}

impl SuiteOptions {
    fn runs(&self, criterion: u8) -> bool {
        self.only.is_empty() || self.only.contains(&criterion)
    }
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            depths: vec![1, 2, 3],
            fault: None,
            threads: thread::available_parallelism().map_or(1, |n| n.get()),
            only: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub instance: String,
    pub criterion: u8,
    pub check: String,
    pub counterexample: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Skip {
    pub instance: String,
    pub criterion: u8,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriterionSummary {
    pub name: String,
    /// Instances on which the criterion ran at least one check.
    pub instances: usize,
    pub checks: usize,
    pub failures: usize,
    pub skips: usize,
}

impl CriterionSummary {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub corpus: CorpusSpec,
    pub seed: Option<u64>,
    pub fault: Option<Fault>,
    pub instances: usize,
    /// Finite acyclic graphs without infinite emitters, on which the
    /// representation checks run.
    pub representable: usize,
    pub criteria: BTreeMap<u8, CriterionSummary>,
    pub failures: Vec<Failure>,
    pub skips: Vec<Skip>,
    pub passed: bool,
}

#[derive(Default)]
struct Tally {
    checks: usize,
    failures: usize,
    skips: usize,
}

struct Instance<'a> {
    id: &'a str,
    tallies: BTreeMap<u8, Tally>,
    failures: Vec<Failure>,
    skips: Vec<Skip>,
    representable: bool,
}

impl<'a> Instance<'a> {
    fn new(id: &'a str) -> Self {
        Instance {
            id,
            tallies: BTreeMap::new(),
            failures: Vec::new(),
            skips: Vec::new(),
            representable: false,
        }
    }

    fn check(
        &mut self,
        criterion: u8,
        name: impl Into<String>,
        pass: bool,
        witness: impl FnOnce() -> String,
    ) {
        let t = self.tallies.entry(criterion).or_default();
        t.checks += 1;
        if !pass {
            t.failures += 1;
            if t.failures <= MAX_FAILURES {
                self.failures.push(Failure {
                    instance: self.id.to_owned(),
                    criterion,
                    check: name.into(),
                    counterexample: witness(),
                });
            }
        }
    }

    fn skip(&mut self, criterion: u8, reason: String) {
        self.tallies.entry(criterion).or_default().skips += 1;
        self.skips.push(Skip {
            instance: self.id.to_owned(),
            criterion,
            reason,
        });
    }

    /// Records an operation result: budget errors become skips, other
    /// errors failures.
    fn outcome<T>(&mut self, criterion: u8, name: &str, r: corrtail_core::Result<T>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e @ Error::Budget { .. }) => {
                self.skip(criterion, format!("{name}: {e}"));
                None
            }
            Err(e) => {
                self.check(criterion, name, false, || e.to_string());
                None
            }
        }
    }
}

fn subsets(s: &VertexSet) -> Vec<VertexSet> {
    let items: Vec<&String> = s.base.iter().collect();
    (0u32..1 << items.len())
        .map(|mask| {
            items
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, v)| (*v).clone())
                .collect()
        })
        .collect()
}

fn broken_saturation(g: &Graph, s: &VertexSet) -> bool {
    g.vertices().iter().all(|v| {
        s.base.contains(v)
            || !matches!(g.out_degree(v), Degree::Finite(n) if n > 0)
            || !g.out_edges(v).any(|e| s.base.contains(&e.rng))
    })
}

fn transforms(inst: &mut Instance, g: &Graph) {
    let Some(tailed) = inst.outcome(1, "add_tails", add_tails(g)) else {
        return;
    };
    if let Some(class) = inst.outcome(1, "classify add_tails", classify_vertices(&tailed)) {
        let sinks = class.sinks();
        inst.check(1, "add_tails has no sinks", sinks.is_empty(), || {
            format!("{sinks:?}")
        });
    }
    if let Some(again) = inst.outcome(1, "add_tails twice", add_tails(&tailed)) {
        inst.check(1, "add_tails is idempotent", again == tailed, || {
            again.to_json()
        });
    }
    let Some(class) = inst.outcome(1, "classify", classify_vertices(g)) else {
        return;
    };
    let regular = class.regular();
    if let Some(rel) = inst.outcome(1, "relative graph at R", build_relative_graph(g, &regular)) {
        inst.check(1, "E_R = E", rel.graph == *g, || rel.graph.to_json());
    }
    if regular.base.len() > MAX_SUBSET_VERTICES {
        inst.skip(1, format!("{} regular vertices", regular.base.len()));
        return;
    }
    for v_set in subsets(&regular) {
        let Some(rel) = inst.outcome(1, "relative graph", build_relative_graph(g, &v_set)) else {
            continue;
        };
        let missing = regular.difference(&v_set);
        let entering = g
            .edges()
            .iter()
            .filter(|e| missing.base.contains(&e.rng))
            .count();
        let nv = g.vertices().len() + missing.base.len();
        let ne = g.edges().len() + entering;
        inst.check(
            1,
            "E_V vertex count",
            rel.graph.vertices().len() == nv,
            || {
                format!(
                    "V = {v_set}: {} vertices, expected {nv}",
                    rel.graph.vertices().len()
                )
            },
        );
        inst.check(1, "E_V edge count", rel.graph.edges().len() == ne, || {
            format!(
                "V = {v_set}: {} edges, expected {ne}",
                rel.graph.edges().len()
            )
        });
        let mult_kept = rel.edge_prime.iter().all(|(e, p)| {
            let (a, b) = (g.edge(e), rel.graph.edge(p));
            matches!((a, b), (Some(a), Some(b)) if a.mult == b.mult && a.src == b.src && b.rng == rel.vertex_prime[&a.rng])
        });
        inst.check(
            1,
            "primed edges copy source and multiplicity",
            mult_kept,
            || v_set.to_string(),
        );
    }
}

fn lattice(inst: &mut Instance, g: &Graph) {
    if let Some(iso) = inst.outcome(2, "tails_lattice_map", tails_lattice_map(g)) {
        inst.check(
            2,
            "order isomorphism",
            iso.source.len() == iso.target.len(),
            || format!("{} vs {}", iso.source.len(), iso.target.len()),
        );
    }
}

fn oracle(inst: &mut Instance, g: &Graph, fault: Option<Fault>) {
    let n = g.vertices().len();
    if n > MAX_SUBSET_VERTICES {
        inst.skip(3, format!("{n} vertices"));
        return;
    }
    let Some(x) = inst.outcome(3, "correspondence", build_graph_correspondence(g)) else {
        return;
    };
    let graph_saturated: fn(&Graph, &VertexSet) -> bool = match fault {
        Some(Fault::BreakSaturation) => broken_saturation,
        None => is_saturated,
    };
    for w in subsets(&g.full_set()) {
        let inv = is_x_invariant(&x, &w);
        let sat = is_x_saturated(&x, &w);
        let her = is_hereditary(g, &w);
        let gsat = graph_saturated(g, &w);
        inst.check(3, "X-invariant iff hereditary", inv == her, || {
            format!("W = {w}: invariant {inv}, hereditary {her}")
        });
        inst.check(3, "X-saturated iff saturated", sat == gsat, || {
            format!("W = {w}: X-saturated {sat}, saturated {gsat}")
        });
        inst.check(
            3,
            "invariant and saturated iff saturated hereditary",
            (inv && sat) == (her && gsat),
            || format!("W = {w}"),
        );
    }
}

fn ideal_formulas(inst: &mut Instance, g: &Graph) {
    let Some(x) = inst.outcome(4, "correspondence", build_graph_correspondence(g)) else {
        return;
    };
    let ideals = compute_ideals(&x);
    // out-degrees summed directly from the edge list
    let mut sinks = VertexSet::new();
    let mut finite = VertexSet::new();
    let mut regular = VertexSet::new();
    for v in g.vertices() {
        let mults: Vec<Multiplicity> = g
            .edges()
            .iter()
            .filter(|e| &e.src == v)
            .map(|e| e.mult)
            .collect();
        let omega = mults.iter().any(|m| m.is_omega());
        if mults.is_empty() {
            sinks.base.insert(v.clone());
        }
        if !omega {
            finite.base.insert(v.clone());
        }
        if !omega && !mults.is_empty() {
            regular.base.insert(v.clone());
        }
    }
    inst.check(4, "ker phi is the sinks", ideals.ker_phi == sinks, || {
        format!("{} vs {sinks}", ideals.ker_phi)
    });
    inst.check(
        4,
        "J(X) is the finite emitters",
        ideals.j_big == finite,
        || format!("{} vs {finite}", ideals.j_big),
    );
    inst.check(
        4,
        "J_X is the regular vertices",
        ideals.j_x == regular,
        || format!("{} vs {regular}", ideals.j_x),
    );
}

fn tail_lemmas(inst: &mut Instance, g: &Graph, depths: &[usize]) {
    let Some(x) = inst.outcome(5, "correspondence", build_graph_correspondence(g)) else {
        return;
    };
    let y = add_tail_correspondence(&x);
    let Some(tailed) = inst.outcome(5, "add_tails", add_tails(g)) else {
        return;
    };
    for &d in depths {
        let r = check_tail_lemmas(&y, d);
        inst.check(
            5,
            format!("phi_B injective (window {d})"),
            r.phi_b_injective,
            || r.counterexample.clone().unwrap_or_default(),
        );
        inst.check(
            5,
            format!("J(Y) decomposition (window {d})"),
            r.j_y_matches,
            || r.counterexample.clone().unwrap_or_default(),
        );
        let cmp = compare_with_tailed_graph(&y, &tailed, d);
        inst.check(
            5,
            format!("tailed correspondence is X(add_tails) (window {d})"),
            cmp.is_ok(),
            || cmp.err().map(|e| e.to_string()).unwrap_or_default(),
        );
    }
}

fn representation_suites(inst: &mut Instance, g: &Graph, opts: &SuiteOptions) {
    let Some(class) = inst.outcome(6, "classify", classify_vertices(g)) else {
        return;
    };
    let regular = class.regular();
    let v_sets = subsets(&regular);

    for &d in &opts.depths {
        if !opts.runs(5) {
            break;
        }
        if let Some(r) = inst.outcome(
            5,
            &format!("tail relations depth {d}"),
            verify_tail_relation_lemmas(g, d),
        ) {
            inst.check(
                5,
                format!("tail relation identities (depth {d})"),
                r.passed(),
                || format!("{:?}", r.checks.failures()),
            );
        }
    }
    for &d in &opts.depths {
        if !opts.runs(7) {
            break;
        }
        if let Some(r) = inst.outcome(7, &format!("corner depth {d}"), verify_corner(g, d)) {
            inst.check(
                7,
                format!("corner relations, span and fullness (depth {d})"),
                r.passed(),
                || format!("{:?}", r.checks.failures()),
            );
        }
    }

    for v_set in &v_sets {
        if !opts.runs(6) {
            break;
        }
        if let Some(r) = inst.outcome(6, "relgas", verify_relgas(g, v_set)) {
            inst.check(
                6,
                format!("relative family is an E_V family (V = {v_set})"),
                r.passed(),
                || format!("{:?}", r.checks.failures()),
            );
        }
    }
    for v_set in &v_sets {
        if !opts.runs(8) {
            break;
        }
        if let Some(r) = inst.outcome(8, "identity", giu_test(g, v_set, &HomSpec::Identity)) {
            inst.check(
                8,
                format!("identity satisfies (1)-(3) with zero kernel (V = {v_set})"),
                r.conditions_hold && r.kernel_dim == 0,
                || format!("failing {:?}, kernel {}", r.failing, r.kernel_dim),
            );
        }
    }
    for v_set in &v_sets {
        if !opts.runs(9) {
            break;
        }
        if let Some(rep) = inst.outcome(9, "path representation", path_space_rep(g, v_set, None)) {
            if let Some(r) = inst.outcome(9, "defect map", defect_and_tk(&rep, &g.full_set())) {
                inst.check(
                    9,
                    format!("T_K multiplicative (V = {v_set})"),
                    r.passed(),
                    || format!("{:?}", r.checks.failures()),
                );
            }
        }
    }
    if !opts.runs(8) {
        return;
    }
    let Some(lattice) = inst.outcome(8, "lattice", enumerate_saturated_hereditary(g)) else {
        return;
    };
    for h in lattice.elements.iter().filter(|h| !h.is_empty()) {
        let spec = HomSpec::Quotient { h: h.clone() };
        if let Some(r) = inst.outcome(8, "quotient", giu_test(g, &regular, &spec)) {
            let violated = r
                .failing
                .iter()
                .any(|f| f.starts_with("(1)") || f.starts_with("(2)"));
            inst.check(
                8,
                format!("quotient by {h} violates (1) or (2) with nonzero kernel"),
                violated && r.kernel_dim > 0,
                || format!("failing {:?}, kernel {}", r.failing, r.kernel_dim),
            );
            inst.check(
                8,
                "no nonzero kernel with all conditions",
                r.consistent,
                || h.to_string(),
            );
        }
    }
}

fn serialization(inst: &mut Instance, g: &Graph) {
    let json = g.to_json();
    match Graph::from_json(&json) {
        Ok(back) => {
            inst.check(10, "parse of emit is the identity", back == *g, || {
                json.clone()
            });
            inst.check(10, "emit is stable", back.to_json() == json, || {
                json.clone()
            });
        }
        Err(e) => inst.check(10, "emitted JSON parses", false, || e.to_string()),
    }
}

/// Finite acyclic graphs with finitely many edges have finite-dimensional
/// path representations; everything else is outside the representation checks.
pub fn is_representable(g: &Graph) -> bool {
    g.is_acyclic() && !g.has_omega() && g.is_ray_free()
}

fn run_instance<'a>(id: &'a str, g: &Graph, opts: &SuiteOptions) -> Instance<'a> {
    let mut inst = Instance::new(id);
    inst.representable = is_representable(g);
    if opts.runs(1) {
        transforms(&mut inst, g);
    }
    if opts.runs(2) {
        lattice(&mut inst, g);
    }
    if opts.runs(3) {
        oracle(&mut inst, g, opts.fault);
    }
    if opts.runs(4) {
        ideal_formulas(&mut inst, g);
    }
    if opts.runs(5) {
        tail_lemmas(&mut inst, g, &opts.depths);
    }
    if inst.representable && (5..=9).any(|c| opts.runs(c)) {
        representation_suites(&mut inst, g, opts);
    }
    if opts.runs(10) {
        serialization(&mut inst, g);
    }
    inst
}

pub fn run_suite(corpus: &CorpusSpec, opts: &SuiteOptions) -> SuiteReport {
    let mut graphs = corpus.generate();
    graphs.sort_by(|a, b| a.0.cmp(&b.0));
    run_graphs(corpus, &graphs, opts)
}

/// Runs the suite on an explicit list of instances; the report is sorted
/// by instance id whatever the thread schedule.
pub fn run_graphs(
    corpus: &CorpusSpec,
    graphs: &[(String, Graph)],
    opts: &SuiteOptions,
) -> SuiteReport {
    let threads = opts.threads.max(1);
    let chunk = graphs.len().div_ceil(threads).max(1);
    let mut done: Vec<Instance> = thread::scope(|s| {
        let handles: Vec<_> = graphs
            .chunks(chunk)
            .map(|part| {
                s.spawn(move || {
                    part.iter()
                        .map(|(id, g)| run_instance(id, g, opts))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("suite worker panicked"))
            .collect()
    });
    done.sort_by(|a, b| a.id.cmp(b.id));

    let mut criteria: BTreeMap<u8, CriterionSummary> = CRITERIA
        .iter()
        .map(|(c, name)| {
            (
                *c,
                CriterionSummary {
                    name: (*name).to_owned(),
                    ..Default::default()
                },
            )
        })
        .collect();
    let mut failures = Vec::new();
    let mut skips = Vec::new();
    let mut representable = 0;
    for inst in done {
        representable += usize::from(inst.representable);
        for (c, t) in inst.tallies {
            let s = criteria.get_mut(&c).expect("known criterion");
            s.instances += usize::from(t.checks > 0);
            s.checks += t.checks;
            s.failures += t.failures;
            s.skips += t.skips;
        }
        failures.extend(inst.failures);
        skips.extend(inst.skips);
    }
    let passed = criteria.values().all(CriterionSummary::passed);
    SuiteReport {
        corpus: corpus.clone(),
        seed: corpus.random.as_ref().map(|r| r.seed),
        fault: opts.fault,
        instances: graphs.len(),
        representable,
        criteria,
        failures,
        skips,
        passed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use corrtail_core::corpus::fixtures;

    #[test]
    fn fixtures_pass() {
        let r = run_suite(&CorpusSpec::fixtures_only(), &SuiteOptions::default());
        assert!(r.passed, "{:#?}", r.failures);
        assert_eq!(r.instances, 5);
        assert!(r.skips.is_empty(), "{:?}", r.skips);
    }

    #[test]
    fn broken_saturation_is_caught_on_e1() {
        let opts = SuiteOptions {
            fault: Some(Fault::BreakSaturation),
            ..Default::default()
        };
        let graphs = vec![("E1".to_string(), fixtures::e1())];
        let r = run_graphs(&CorpusSpec::fixtures_only(), &graphs, &opts);
        assert!(!r.passed);
        assert!(r.failures.iter().all(|f| f.criterion == 3));
        assert!(r.failures[0].counterexample.contains("W = "));
    }
}
