use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use corrtail_core::corpus::fixtures;
use corrtail_core::transforms::add_tails;
use corrtail_core::Graph;
use serde_json::Value;

fn corrtail(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_corrtail"))
        .args(args)
        .env_remove("CORRTAIL_SEED")
        .output()
        .expect("run corrtail")
}

fn write_graph(dir: &Path, name: &str, g: &Graph) -> String {
    let p = dir.join(name);
    fs::write(&p, g.to_json()).unwrap();
    p.to_str().unwrap().to_owned()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn export_dot_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let e2 = write_graph(dir.path(), "e2.json", &fixtures::e2());
    let dot = stdout(&corrtail(&["export", "--in", &e2, "--format", "dot"]));
    assert!(dot.starts_with("digraph"));
    assert_eq!(dot.lines().filter(|l| l.trim().ends_with("\";")).count(), 2);

    let tailed = write_graph(dir.path(), "t.json", &add_tails(&fixtures::e1()).unwrap());
    let dot = stdout(&corrtail(&["export", "--in", &tailed, "--format", "dot"]));
    assert!(dot.contains("label=\"…\""));

    let e3 = write_graph(dir.path(), "e3.json", &fixtures::e3());
    let json = stdout(&corrtail(&["export", "--in", &e3]));
    assert_eq!(json.trim_end(), fixtures::e3().to_json());

    let bad = corrtail(&["export", "--in", &e3, "--format", "yaml"]);
    assert!(!bad.status.success());
}

#[test]
fn transform_and_lattice() {
    let dir = tempfile::tempdir().unwrap();
    let e1 = write_graph(dir.path(), "e1.json", &fixtures::e1());
    let out = dir.path().join("out.json");
    let dot = dir.path().join("out.dot");
    let o = corrtail(&[
        "transform",
        "--op",
        "add-tails",
        "--in",
        &e1,
        "--out",
        out.to_str().unwrap(),
        "--dot",
        dot.to_str().unwrap(),
    ]);
    stdout(&o);
    let g = Graph::from_json(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(g, add_tails(&fixtures::e1()).unwrap());
    assert!(fs::read_to_string(&dot).unwrap().contains("ray_w"));

    let set = dir.path().join("v.json");
    fs::write(&set, r#"["u"]"#).unwrap();
    let rel: Value = serde_json::from_str(&stdout(&corrtail(&[
        "transform",
        "--op",
        "relative",
        "--in",
        &e1,
        "--set",
        set.to_str().unwrap(),
    ])))
    .unwrap();
    assert_eq!(rel["vertices"].as_array().unwrap().len(), 4);

    let l: Value = serde_json::from_str(&stdout(&corrtail(&[
        "lattice",
        "--in",
        &e1,
        "--verify-tails",
    ])))
    .unwrap();
    assert_eq!(l["lattice"]["count"], 2);
    assert_eq!(l["tails_map"], serde_json::json!([0, 1]));
}

#[test]
fn corr_and_rep() {
    let dir = tempfile::tempdir().unwrap();
    let e1 = write_graph(dir.path(), "e1.json", &fixtures::e1());
    let ideals: Value =
        serde_json::from_str(&stdout(&corrtail(&["corr", "--in", &e1, "--op", "ideals"]))).unwrap();
    assert_eq!(ideals["j_x"]["vertices"], serde_json::json!(["u", "v"]));
    stdout(&corrtail(&["corr", "--in", &e1, "--op", "check-lemmas"]));

    let e2 = write_graph(dir.path(), "e2.json", &fixtures::e2());
    let empty = dir.path().join("empty.json");
    fs::write(&empty, "[]").unwrap();
    let r: Value = serde_json::from_str(&stdout(&corrtail(&[
        "rep",
        "--in",
        &e2,
        "--set",
        empty.to_str().unwrap(),
        "--op",
        "relgas",
    ])))
    .unwrap();
    assert_eq!(r["dim_relative"], 5);

    let hom = dir.path().join("hom.json");
    fs::write(&hom, r#"{"kind":"relative","w":["v"]}"#).unwrap();
    let r: Value = serde_json::from_str(&stdout(&corrtail(&[
        "rep",
        "--in",
        &e2,
        "--set",
        empty.to_str().unwrap(),
        "--op",
        "giu",
        "--hom",
        hom.to_str().unwrap(),
    ])))
    .unwrap();
    assert_eq!(r["kernel_dim"], 1);

    let cyclic = write_graph(dir.path(), "c5.json", &fixtures::c5());
    let o = corrtail(&["rep", "--in", &cyclic, "--op", "build"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn suite_exit_codes_and_seed() {
    let ok = corrtail(&["suite", "--preset", "fixtures"]);
    let report: Value = serde_json::from_str(&stdout(&ok)).unwrap();
    assert_eq!(report["instances"], 5);
    assert_eq!(report["passed"], true);

    let broken = corrtail(&[
        "suite",
        "--preset",
        "fixtures",
        "--fault",
        "break-saturation",
    ]);
    assert_eq!(broken.status.code(), Some(1));
    let report: Value = serde_json::from_slice(&broken.stdout).unwrap();
    assert!(report["failures"][0]["counterexample"]
        .as_str()
        .unwrap()
        .contains("W = "));

    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.json");
    fs::write(
        &corpus,
        r#"{"fixtures":false,"exhaustive":[],"random":{"count":3,"seed":1,"min_vertices":2,"max_vertices":4,"edge_probability":0.3,"omega_probability":0.05}}"#,
    )
    .unwrap();
    let seeded = Command::new(env!("CARGO_BIN_EXE_corrtail"))
        .args(["suite", "--corpus", corpus.to_str().unwrap()])
        .env("CORRTAIL_SEED", "77")
        .output()
        .unwrap();
    let report: Value = serde_json::from_str(&stdout(&seeded)).unwrap();
    assert_eq!(report["seed"], 77);
    assert_eq!(report["instances"], 3);
}

#[test]
fn help_lists_subcommands() {
    let help = stdout(&corrtail(&["--help"]));
    for cmd in ["transform", "lattice", "corr", "rep", "suite", "export"] {
        assert!(help.contains(cmd), "{cmd}");
    }
}
