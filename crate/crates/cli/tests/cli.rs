use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

const SWAP: &str = r#"{
  "domain": ["0", "1"],
  "relations": {
    "rho": { "arity": 2, "entries": [
      { "tuple": ["0", "1"], "weight": "2" },
      { "tuple": ["1", "0"], "weight": "1" }
    ] }
  }
}"#;

fn cut_structure(weights: [&str; 4]) -> String {
    json!({
        "domain": ["0", "1"],
        "relations": { "cut": { "arity": 2, "entries": [
            { "tuple": ["0", "0"], "weight": weights[0] },
            { "tuple": ["0", "1"], "weight": weights[1] },
            { "tuple": ["1", "0"], "weight": weights[2] },
            { "tuple": ["1", "1"], "weight": weights[3] }
        ] } }
    })
    .to_string()
}

/// max, min, and the two projections with weights 1, 1, -1, -1.
fn submodular_wos() -> String {
    let table = |f: fn(u8, u8) -> u8| {
        let mut t = serde_json::Map::new();
        for a in 0..2u8 {
            for b in 0..2u8 {
                t.insert(format!("{a},{b}"), json!(f(a, b).to_string()));
            }
        }
        json!({ "arity": 2, "table": t })
    };
    json!({
        "domain": ["0", "1"],
        "operations": [table(|a, b| a.max(b)), table(|a, b| a.min(b)), table(|a, _| a), table(|_, b| b)],
        "weights": { "0": "1", "1": "1", "2": "-1", "3": "-1" }
    })
    .to_string()
}

struct Env {
    dir: TempDir,
}

impl Env {
    fn new() -> Self {
        Env { dir: TempDir::new().unwrap() }
    }

    fn file(&self, name: &str, text: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        fs::write(&p, text).unwrap();
        p
    }

    fn out(&self, sub: &str) -> PathBuf {
        self.dir.path().join(sub)
    }

    fn run(&self, out: &str, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_vcsp-mch")).arg("--out").arg(self.out(out)).args(args).output().unwrap()
    }
}

fn stdout_json(o: &Output) -> Value {
    let text = String::from_utf8_lossy(&o.stdout);
    serde_json::from_str(text.lines().last().unwrap_or("null")).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn built(env: &Env) -> PathBuf {
    let s = env.file("swap.json", SWAP);
    let o = env.run("build", &["build", p(&s)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    env.out("build").join("encoding.json")
}

#[test]
fn build_running_example() {
    let env = Env::new();
    let s = env.file("swap.json", SWAP);
    let o = env.run("a", &["build", p(&s)]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["vertices"], 24);
    assert_eq!(v["edges"], 24);
    assert_eq!(v["levels"], json!([2, 6, 8, 6, 2]));
    let dot = fs::read_to_string(env.out("a").join("encoding.dot")).unwrap();
    assert!(dot.starts_with("digraph"));
    let again = env.run("b", &["build", p(&s)]);
    assert!(again.status.success());
    for f in ["encoding.json", "encoding.dot"] {
        assert_eq!(fs::read(env.out("a").join(f)).unwrap(), fs::read(env.out("b").join(f)).unwrap());
    }
}

#[test]
fn build_collapses_two_relations() {
    let env = Env::new();
    let two = json!({
        "domain": ["0", "1"],
        "relations": {
            "rho": { "arity": 2, "entries": [
                { "tuple": ["0", "1"], "weight": "2" }, { "tuple": ["1", "0"], "weight": "1" } ] },
            "one": { "arity": 1, "entries": [ { "tuple": ["1"], "weight": "0" } ] }
        }
    });
    let s = env.file("two.json", &two.to_string());
    let o = env.run("o", &["build", p(&s)]);
    assert!(o.status.success());
    assert_eq!(stdout_json(&o)["collapsed"], true);
    let enc: Value = serde_json::from_str(&fs::read_to_string(env.out("o").join("encoding.json")).unwrap()).unwrap();
    assert_eq!(enc["n"], 3);
    assert_eq!(enc["scope_map"]["blocks"].as_array().unwrap().len(), 2);
}

#[test]
fn empty_relation_is_a_usage_error() {
    let env = Env::new();
    let s = env.file("e.json", r#"{"domain":["a"],"relations":{"r":{"arity":1,"entries":[]}}}"#);
    let o = env.run("o", &["build", p(&s)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("relations.r"));
}

#[test]
fn malformed_json_reports_the_line() {
    let env = Env::new();
    let s = env.file("bad.json", "{\n\"domain\": [,\n}");
    let o = env.run("o", &["build", p(&s)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn forward_then_solve_both_sides() {
    let env = Env::new();
    let enc = built(&env);
    let inst = env.file(
        "inst.json",
        r#"{"variables":["x","y"],"constraints":[{"relation":"rho","scope":["x","y"],"weight":"1"}]}"#,
    );
    let s = env.file("swap.json", SWAP);
    let o = env.run("f", &["reduce", "--fwd", p(&inst), p(&enc)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mch = env.out("f").join("forward.mch.json");
    let lhs = env.run("s1", &["solve", "--vcsp", p(&inst), "--structure", p(&s)]);
    let rhs = env.run("s2", &["solve", "--mch", p(&mch), "--encoding", p(&enc)]);
    assert_eq!(stdout_json(&lhs)["optimum"], "1");
    assert_eq!(stdout_json(&rhs)["optimum"], "1");
    assert_eq!(stdout_json(&lhs)["assignment"], json!({ "x": "1", "y": "0" }));

    let back = env.run("b", &["reduce", "--bwd", p(&mch), p(&enc)]);
    assert_eq!(stdout_json(&back)["status"], "reduced");
    let red = env.out("b").join("backward.json");
    let solved = env.run("s3", &["solve", "--reduced", p(&red)]);
    assert_eq!(stdout_json(&solved)["optimum"], "1");
}

#[test]
fn backward_fixed_outcomes() {
    let env = Env::new();
    let enc = built(&env);
    // A directed triangle has no leveling.
    let tri =
        env.file("tri.json", r#"{"graph":{"vertices":["a","b","c"],"edges":[["a","b"],["b","c"],["c","a"]]},"W":{}}"#);
    let o = env.run("n", &["reduce", "--bwd", p(&tri), p(&enc)]);
    assert_eq!(stdout_json(&o)["status"], "fixed_no");
    let short = env.file("short.json", r#"{"graph":{"vertices":["a","b"],"edges":[["a","b"]]},"W":{"b":"5"}}"#);
    let o = env.run("y", &["reduce", "--bwd", p(&short), p(&enc)]);
    assert_eq!(stdout_json(&o)["status"], "fixed_yes");
    let v: Value = serde_json::from_str(&fs::read_to_string(env.out("y").join("backward.json")).unwrap()).unwrap();
    assert_eq!(v["offset"], "0");
}

#[test]
fn verify_is_deterministic_and_passes() {
    let env = Env::new();
    let args = ["--seed", "11", "verify", "--forward-pairs", "15", "--backward-pairs", "15", "--corpus-relations", "5"];
    let a = env.run("a", &args);
    let b = env.run("b", &args);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let ra = fs::read(env.out("a").join("report.jsonl")).unwrap();
    assert_eq!(ra, fs::read(env.out("b").join("report.jsonl")).unwrap());
    assert_eq!(String::from_utf8_lossy(&ra).lines().count(), 30);
}

#[test]
fn injected_fault_fails_verification() {
    let env = Env::new();
    let o =
        env.run("o", &["--fault-inject", "drop-gadget-edge", "verify", "--roundtrip", "fwd", "--forward-pairs", "20"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout_json(&o)["fail"].as_u64().unwrap() > 0);
    assert!(fs::read_dir(env.out("o").join("counterexamples")).unwrap().count() > 0);
}

#[test]
fn tiny_budget_is_surfaced() {
    let env = Env::new();
    let o = env.run("o", &["--budget", "2", "verify", "--forward-pairs", "5", "--backward-pairs", "5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout_json(&o)["budget_exceeded"].as_u64().unwrap() > 0);
}

#[test]
fn submodularity_check() {
    let env = Env::new();
    let wos = env.file("wos.json", &submodular_wos());
    let good = env.file("cut.json", &cut_structure(["1", "0", "0", "1"]));
    let sub = env.file("sub.json", &cut_structure(["0", "1", "1", "0"]));
    let o = env.run("a", &["algebra", "--check-wpol", p(&wos), p(&sub)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let o = env.run("b", &["algebra", "--check-wpol", p(&wos), p(&good)]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout_json(&o)["relations"]["cut"]["weighted_polymorphism"], false);
}

#[test]
fn extend_submodular_set() {
    let env = Env::new();
    let wos = env.file("wos.json", &submodular_wos());
    let s = env.file("sub.json", &cut_structure(["0", "1", "1", "0"]));
    let o = env.run("b", &["build", p(&s)]);
    assert!(o.status.success());
    let enc = env.out("b").join("encoding.json");
    let o = env.run("x", &["algebra", "--extend", p(&wos), p(&enc)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert_eq!(v["transferred"], true);
    assert_eq!(v["templates"]["0"]["on_vertices"], json!(["wnu", "cyclic", "symmetric"]));
    assert!(env.out("x").join("extended_wos.json").exists());
}

#[test]
fn running_example_is_a_core_but_not_rigid() {
    let env = Env::new();
    let s = env.file("swap.json", SWAP);
    let o = env.run("c", &["algebra", "--core", p(&s)]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["verdict"], "core, not rigid");
    assert_eq!(v["witness"], json!(["1", "0"]));
    assert_eq!(v["encoding_rigid"], false);
}

#[test]
fn missing_subcommand_is_a_usage_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_vcsp-mch")).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}
