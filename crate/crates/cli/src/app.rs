//! Argument parsing and subcommand dispatch for the `corrtail` binary.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use corrtail_core::ck::{
    defect_and_tk, giu_test, path_space_rep, verify_ck_relations, verify_corner, verify_relgas,
    verify_tail_relation_lemmas, HomSpec,
};
use corrtail_core::corpus::{CorpusSpec, DEFAULT_SEED};
use corrtail_core::correspondence::{
    add_tail_correspondence, build_graph_correspondence, check_tail_lemmas,
    compare_with_tailed_graph, compute_ideals, is_x_invariant, is_x_saturated,
    quotient_correspondence,
};
use corrtail_core::lattice::{enumerate_saturated_hereditary, lattice_report, tails_lattice_map};
use corrtail_core::transforms::{add_tails, build_relative_graph, quotient_graph, truncate_tails};
use corrtail_core::{Graph, VertexSet};

use crate::dot::to_dot;
use crate::suite::{run_suite, Fault, SuiteOptions};

pub const SEED_VAR: &str = "CORRTAIL_SEED";

/// Exact verification toolkit for graphs with tails, graph correspondences
/// and relative graph algebras.
#[derive(Debug, Parser)]
#[command(name = "corrtail", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Apply a graph transformation and write the resulting graph.
    Transform(TransformArgs),
    /// Enumerate the lattice of saturated hereditary vertex sets.
    Lattice(LatticeArgs),
    /// Ideals and quotients of the graph correspondence, and its tails.
    Corr(CorrArgs),
    /// Build and verify path-space representations of relative graph algebras.
    Rep(RepArgs),
    /// Run every check over a graph corpus; exits nonzero if any check fails.
    Suite(SuiteArgs),
    /// Print a graph as canonical JSON or Graphviz DOT.
    Export(ExportArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TransformOp {
    AddTails,
    Truncate,
    Relative,
    Quotient,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    #[arg(long, value_enum)]
    pub op: TransformOp,
    /// Input graph (JSON).
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Vertex set for `relative` (the set V) and `quotient` (the set H).
    #[arg(long)]
    pub set: Option<PathBuf>,
    /// Number of ray vertices kept by `truncate`.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Output graph; stdout if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the result as DOT.
    #[arg(long)]
    pub dot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LatticeArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Also verify the order isomorphism with the lattice of the tailed graph.
    #[arg(long)]
    pub verify_tails: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CorrOp {
    Ideals,
    Invariant,
    Saturated,
    Quotient,
    AddTail,
    CheckLemmas,
}

#[derive(Debug, Args)]
pub struct CorrArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub op: CorrOp,
    /// Ideal of the coefficient algebra, given by its vertex support.
    #[arg(long)]
    pub set: Option<PathBuf>,
    /// Window size for `add-tail` and `check-lemmas`.
    #[arg(long, default_value_t = 3)]
    pub depth: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RepOp {
    Build,
    Verify,
    Relgas,
    Corner,
    Giu,
    Tk,
    TailLemmas,
}

#[derive(Debug, Args)]
pub struct RepArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// The relative set V; all regular vertices if omitted.
    #[arg(long)]
    pub set: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub op: RepOp,
    /// Tail depth: truncation depth for `build`/`verify`, extension depth
    /// for `corner` and `tail-lemmas`.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Homomorphism for `giu` (JSON, `{"kind": "identity" | "quotient" |
    /// "relative" | "matrices", ...}`); identity if omitted.
    #[arg(long)]
    pub hom: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// The bundled fixtures only.
    Fixtures,
    /// Fixtures, exhaustive small graphs and 50 random graphs.
    Standard,
}

#[derive(Debug, Args)]
pub struct SuiteArgs {
    /// Corpus description (JSON); overrides --preset.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "standard")]
    pub preset: Preset,
    /// Seed for the random part of the corpus.
    #[arg(long, env = SEED_VAR)]
    pub seed: Option<u64>,
    /// Inject a known defect to check the suite catches it.
    #[arg(long, value_enum)]
    pub fault: Option<FaultArg>,
    /// Largest tail depth checked.
    #[arg(long, default_value_t = 3)]
    pub max_depth: usize,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Run only these criteria (comma separated numbers 1-10).
    #[arg(long, value_delimiter = ',', value_parser = clap::value_parser!(u8).range(1..=10))]
    pub only: Vec<u8>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FaultArg {
    BreakSaturation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Dot,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn read_graph(path: &Path) -> Result<Graph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let g = Graph::from_json(&text).with_context(|| format!("parsing graph {}", path.display()))?;
    g.ensure_valid()?;
    Ok(g)
}

fn read_set(path: &Path) -> Result<VertexSet> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing vertex set {}", path.display()))
}

fn require_set(path: &Option<PathBuf>, op: &str) -> Result<VertexSet> {
    match path {
        Some(p) => read_set(p),
        None => bail!("--set is required for {op}"),
    }
}

fn emit_text(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit<T: Serialize>(out: &Option<PathBuf>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit_text(out, &text)
}

fn transform(a: &TransformArgs) -> Result<i32> {
    let g = read_graph(&a.input)?;
    let result = match a.op {
        TransformOp::AddTails => add_tails(&g)?,
        TransformOp::Truncate => {
            let Some(d) = a.depth else {
                bail!("--depth is required for truncate")
            };
            truncate_tails(&g, d)?.graph
        }
        TransformOp::Relative => build_relative_graph(&g, &require_set(&a.set, "relative")?)?.graph,
        TransformOp::Quotient => quotient_graph(&g, &require_set(&a.set, "quotient")?)?.graph,
    };
    emit_text(&a.out, &(result.to_json() + "\n"))?;
    if let Some(p) = &a.dot {
        fs::write(p, to_dot(&result)).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(0)
}

fn lattice(a: &LatticeArgs) -> Result<i32> {
    let g = read_graph(&a.input)?;
    let l = enumerate_saturated_hereditary(&g)?;
    let report = lattice_report(&l);
    if a.verify_tails {
        let iso = tails_lattice_map(&g)?;
        emit(
            &a.out,
            &json!({ "lattice": report, "tails_map": iso.map, "tails_lattice": lattice_report(&iso.target) }),
        )?;
    } else {
        emit(&a.out, &report)?;
    }
    Ok(0)
}

fn corr(a: &CorrArgs) -> Result<i32> {
    let g = read_graph(&a.input)?;
    let x = build_graph_correspondence(&g)?;
    match a.op {
        CorrOp::Ideals => emit(&a.out, &compute_ideals(&x))?,
        CorrOp::Invariant => {
            let i = require_set(&a.set, "invariant")?;
            i.check_within(&g)?;
            emit(
                &a.out,
                &json!({ "set": i, "invariant": is_x_invariant(&x, &i) }),
            )?;
        }
        CorrOp::Saturated => {
            let i = require_set(&a.set, "saturated")?;
            i.check_within(&g)?;
            emit(
                &a.out,
                &json!({ "set": i, "saturated": is_x_saturated(&x, &i) }),
            )?;
        }
        CorrOp::Quotient => emit(
            &a.out,
            &quotient_correspondence(&x, &require_set(&a.set, "quotient")?)?,
        )?,
        CorrOp::AddTail => {
            let y = add_tail_correspondence(&x);
            let agrees = compare_with_tailed_graph(&y, &add_tails(&g)?, a.depth);
            emit(
                &a.out,
                &json!({
                    "tail_blocks": y.tail_blocks,
                    "window": y.window(a.depth),
                    "matches_tailed_graph": agrees.is_ok(),
                    "mismatch": agrees.err().map(|e| e.to_string()),
                }),
            )?;
        }
        CorrOp::CheckLemmas => {
            let r = check_tail_lemmas(&add_tail_correspondence(&x), a.depth);
            emit(&a.out, &r)?;
            return Ok(if r.counterexample.is_none() { 0 } else { 1 });
        }
    }
    Ok(0)
}

fn rep(a: &RepArgs) -> Result<i32> {
    let g = read_graph(&a.input)?;
    let v_set = match &a.set {
        Some(p) => read_set(p)?,
        None => corrtail_core::classify_vertices(&g)?.regular(),
    };
    let need_depth = |op: &str| {
        a.depth
            .with_context(|| format!("--depth is required for {op}"))
    };
    let passed = match a.op {
        RepOp::Build => {
            emit(&a.out, &path_space_rep(&g, &v_set, a.depth)?)?;
            true
        }
        RepOp::Verify => {
            let rep = path_space_rep(&g, &v_set, a.depth)?;
            let r = verify_ck_relations(&rep, &rep.v_set);
            emit(&a.out, &r)?;
            r.holds()
        }
        RepOp::Relgas => {
            let r = verify_relgas(&g, &v_set)?;
            emit(&a.out, &r)?;
            r.passed()
        }
        RepOp::Corner => {
            let r = verify_corner(&g, need_depth("corner")?)?;
            emit(&a.out, &r)?;
            r.passed()
        }
        RepOp::TailLemmas => {
            let r = verify_tail_relation_lemmas(&g, need_depth("tail-lemmas")?)?;
            emit(&a.out, &r)?;
            r.passed()
        }
        RepOp::Giu => {
            let spec: HomSpec = match &a.hom {
                Some(p) => serde_json::from_str(&fs::read_to_string(p)?)
                    .with_context(|| format!("parsing homomorphism {}", p.display()))?,
                None => HomSpec::Identity,
            };
            let r = giu_test(&g, &v_set, &spec)?;
            emit(&a.out, &r)?;
            r.consistent
        }
        RepOp::Tk => {
            let rep = path_space_rep(&g, &v_set, None)?;
            let r = defect_and_tk(&rep, &g.full_set())?;
            emit(&a.out, &r)?;
            r.passed()
        }
    };
    Ok(if passed { 0 } else { 1 })
}

fn suite(a: &SuiteArgs) -> Result<i32> {
    let seed = a.seed.unwrap_or(DEFAULT_SEED);
    let mut corpus = match &a.corpus {
        Some(p) => serde_json::from_str(&fs::read_to_string(p)?)
            .with_context(|| format!("parsing corpus {}", p.display()))?,
        None => match a.preset {
            Preset::Fixtures => CorpusSpec::fixtures_only(),
            Preset::Standard => CorpusSpec::standard(seed),
        },
    };
    if let (Some(s), Some(r)) = (a.seed, corpus.random.as_mut()) {
        r.seed = s;
    }
    let mut opts = SuiteOptions {
        depths: (1..=a.max_depth).collect(),
        fault: a
            .fault
            .map(|FaultArg::BreakSaturation| Fault::BreakSaturation),
        only: a.only.clone(),
        ..Default::default()
    };
    if let Some(t) = a.threads {
        opts.threads = t;
    }
    let report = run_suite(&corpus, &opts);
    emit(&a.out, &report)?;
    for (c, s) in &report.criteria {
        eprintln!(
            "criterion {c:>2} {:<48} {} ({} checks on {} instances, {} failures, {} skips)",
            s.name,
            if s.passed() { "pass" } else { "FAIL" },
            s.checks,
            s.instances,
            s.failures,
            s.skips
        );
    }
    eprintln!(
        "{} instances, {} representable",
        report.instances, report.representable
    );
    Ok(if report.passed { 0 } else { 1 })
}

fn export(a: &ExportArgs) -> Result<i32> {
    let g = read_graph(&a.input)?;
    let text = match a.format {
        Format::Json => g.to_json() + "\n",
        Format::Dot => to_dot(&g),
    };
    emit_text(&a.out, &text)?;
    Ok(0)
}

/// Runs a parsed command and returns the process exit code.
pub fn run(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Transform(a) => transform(a),
        Command::Lattice(a) => lattice(a),
        Command::Corr(a) => corr(a),
        Command::Rep(a) => rep(a),
        Command::Suite(a) => suite(a),
        Command::Export(a) => export(a),
    }
}
