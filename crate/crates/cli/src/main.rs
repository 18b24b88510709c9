use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use vcsp_mch::algebra::{
    is_core, is_weighted_polymorphism, satisfied_templates, transfer_weighted_polymorphism, Template,
};
use vcsp_mch::cost::format_rational;
use vcsp_mch::encoding::{is_rigid_core_pair, EncodedDigraph};
use vcsp_mch::harness::{run_verify, Roundtrip, RunConfig};
use vcsp_mch::io::{
    encoding_from_json, encoding_to_dot, encoding_to_json, instance_from_json, mch_from_json, mch_to_json,
    outcome_to_json, parse_json, reduced_from_json, structure_from_json, to_pretty, wos_from_json, wos_to_json,
    ReducedFile,
};
use vcsp_mch::oracle::{brute_force_mch, brute_force_vcsp, PairStatus, SearchBudget};
use vcsp_mch::reduce::{backward_reduce, forward_reduce_with, Fault};
use vcsp_mch::structure::collapse_to_single_relation;
use vcsp_mch::{build_encoding, ExtCost};

/// Reductions between valued CSPs and minimum-cost digraph homomorphism,
/// certified by exhaustive oracles.
#[derive(Parser)]
#[command(name = "vcsp-mch", version)]
struct Cli {
    /// Seed for generated corpora.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Search-tree nodes allowed per oracle call.
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Deliberately break the forward reduction (testing only).
    #[arg(long, global = true, value_enum, hide = true)]
    fault_inject: Option<FaultArg>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    DropGadgetEdge,
}

#[derive(Subcommand)]
enum Cmd {
    /// Encode a weighted structure as a leveled digraph with unary costs.
    Build { structure: PathBuf },
    /// Run the forward or the backward reduction.
    Reduce(ReduceArgs),
    /// Solve an instance exhaustively.
    Solve(SolveArgs),
    /// Check seeded random round trips against the oracles.
    Verify(VerifyArgs),
    /// Weighted polymorphism checks, extension to the encoding, and cores.
    Algebra(AlgebraArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false, id = "direction")]
struct Direction {
    /// VCSP instance to turn into a min-cost homomorphism instance.
    #[arg(long)]
    fwd: Option<PathBuf>,
    /// Min-cost homomorphism instance to turn into a VCSP instance.
    #[arg(long)]
    bwd: Option<PathBuf>,
}

#[derive(Args)]
struct ReduceArgs {
    #[command(flatten)]
    dir: Direction,
    /// Encoding written by `build`.
    encoding: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    /// VCSP instance; needs --structure.
    #[arg(long, requires = "structure", conflicts_with_all = ["mch", "reduced"])]
    vcsp: Option<PathBuf>,
    #[arg(long)]
    structure: Option<PathBuf>,
    /// Min-cost homomorphism instance; needs --encoding.
    #[arg(long, requires = "encoding", conflicts_with = "reduced")]
    mch: Option<PathBuf>,
    #[arg(long)]
    encoding: Option<PathBuf>,
    /// Output of `reduce --bwd`.
    #[arg(long)]
    reduced: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum RoundtripArg {
    Fwd,
    Bwd,
    Both,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value = "both")]
    roundtrip: RoundtripArg,
    #[arg(long, default_value_t = 100)]
    forward_pairs: usize,
    #[arg(long, default_value_t = 100)]
    backward_pairs: usize,
    #[arg(long, default_value_t = 50)]
    corpus_relations: usize,
    /// Compare optima only, skipping per-solution correspondence.
    #[arg(long)]
    optima_only: bool,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct AlgebraArgs {
    /// WOS and STRUCTURE files.
    #[arg(long, num_args = 2, value_names = ["WOS", "STRUCTURE"])]
    check_wpol: Option<Vec<PathBuf>>,
    /// WOS and ENCODING files.
    #[arg(long, num_args = 2, value_names = ["WOS", "ENCODING"])]
    extend: Option<Vec<PathBuf>>,
    /// STRUCTURE file.
    #[arg(long, value_name = "STRUCTURE")]
    core: Option<PathBuf>,
}

/// Usage and parse problems exit with 2; failed checks with 1.
enum Failure {
    Usage(anyhow::Error),
    Check(String),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Usage(e.into())
    }
}

type CmdResult = Result<(), Failure>;

fn read_json(path: &Path) -> anyhow::Result<Value> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_json(&text).with_context(|| format!("in {}", path.display()))
}

fn write(dir: &Path, name: &str, contents: &str) -> anyhow::Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn budget(cli: &Cli) -> SearchBudget {
    cli.budget.map_or_else(SearchBudget::default, SearchBudget::new)
}

fn load_encoding(path: &Path) -> anyhow::Result<(EncodedDigraph, String)> {
    encoding_from_json(&read_json(path)?).with_context(|| format!("in {}", path.display()))
}

fn cmd_build(cli: &Cli, structure: &Path) -> CmdResult {
    let ws = structure_from_json(&read_json(structure)?).with_context(|| format!("in {}", structure.display()))?;
    let (collapsed, scope_map) = collapse_to_single_relation(&ws)?;
    let (name, rho) = &collapsed.relations()[0];
    let e = build_encoding(rho);
    let json_path = write(&cli.out, "encoding.json", &to_pretty(&encoding_to_json(&e, name, Some(&scope_map))))?;
    write(&cli.out, "encoding.dot", &encoding_to_dot(&e))?;
    let summary = json!({
        "vertices": e.vertex_count(),
        "edges": e.digraph().edge_count(),
        "levels": e.graph.level_profile(),
        "collapsed": !scope_map.is_identity(),
        "file": json_path.display().to_string(),
    });
    println!("{}", serde_json::to_string(&summary)?);
    Ok(())
}

fn cmd_reduce(cli: &Cli, args: &ReduceArgs) -> CmdResult {
    let (e, rel_name) = load_encoding(&args.encoding)?;
    if let Some(path) = &args.dir.fwd {
        let inst = instance_from_json(&read_json(path)?, "$").with_context(|| format!("in {}", path.display()))?;
        if let Some(c) = inst.constraints.iter().find(|c| c.relation != rel_name) {
            return Err(anyhow!("constraint uses relation {:?} but the encoding is of {rel_name:?}", c.relation).into());
        }
        let fault = match cli.fault_inject {
            Some(FaultArg::DropGadgetEdge) => Fault::DropGadgetEdge,
            None => Fault::None,
        };
        let m = forward_reduce_with(&inst, &e, fault)?;
        let out = write(&cli.out, "forward.mch.json", &to_pretty(&mch_to_json(&m)))?;
        println!("{}", json!({ "vertices": m.graph.vertex_count(), "file": out.display().to_string() }));
    }
    if let Some(path) = &args.dir.bwd {
        let m = mch_from_json(&read_json(path)?).with_context(|| format!("in {}", path.display()))?;
        let outcome = backward_reduce(&m, &e)?;
        let v = outcome_to_json(&outcome, &e, &m.graph);
        let out = write(&cli.out, "backward.json", &to_pretty(&v))?;
        println!("{}", json!({ "status": v["status"], "file": out.display().to_string() }));
    }
    Ok(())
}

fn cmd_solve(cli: &Cli, args: &SolveArgs) -> CmdResult {
    let b = budget(cli);
    let result = if let (Some(ip), Some(sp)) = (&args.vcsp, &args.structure) {
        let ws = structure_from_json(&read_json(sp)?).with_context(|| format!("in {}", sp.display()))?;
        let inst = instance_from_json(&read_json(ip)?, "$").with_context(|| format!("in {}", ip.display()))?;
        inst.validate(&ws)?;
        let (cost, sol) = brute_force_vcsp(&inst, &ws, &b)?;
        let assignment = sol.map(|h| {
            let mut m = Map::new();
            for (x, &d) in inst.variables.iter().zip(&h.0) {
                m.insert(x.clone(), json!(ws.domain()[d]));
            }
            Value::Object(m)
        });
        json!({ "optimum": cost.to_string(), "assignment": assignment })
    } else if let (Some(mp), Some(ep)) = (&args.mch, &args.encoding) {
        let (e, _) = load_encoding(ep)?;
        let m = mch_from_json(&read_json(mp)?).with_context(|| format!("in {}", mp.display()))?;
        let (cost, hom) = brute_force_mch(&m, e.digraph(), &e.u, &b)?;
        let hom = hom.map(|h| {
            let mut map = Map::new();
            for (v, &t) in h.iter().enumerate() {
                map.insert(m.graph.name(v).to_string(), json!(e.digraph().name(t)));
            }
            Value::Object(map)
        });
        json!({ "optimum": cost.to_string(), "homomorphism": hom })
    } else if let Some(rp) = &args.reduced {
        let cost = match reduced_from_json(&read_json(rp)?).with_context(|| format!("in {}", rp.display()))? {
            ReducedFile::Instance { structure, instance, offset } => {
                brute_force_vcsp(&instance, &structure, &b)?.0 + ExtCost::Finite(offset)
            }
            ReducedFile::Unsat => ExtCost::Infinite,
            ReducedFile::Constant(c) => ExtCost::Finite(c),
        };
        json!({ "optimum": cost.to_string() })
    } else {
        return Err(anyhow!("give --vcsp with --structure, --mch with --encoding, or --reduced").into());
    };
    write(&cli.out, "solution.json", &to_pretty(&result))?;
    println!("{}", serde_json::to_string(&result)?);
    Ok(())
}

fn cmd_verify(cli: &Cli, args: &VerifyArgs) -> CmdResult {
    let cfg = RunConfig {
        seed: cli.seed,
        budget: budget(cli),
        roundtrip: match args.roundtrip {
            RoundtripArg::Fwd => Roundtrip::Forward,
            RoundtripArg::Bwd => Roundtrip::Backward,
            RoundtripArg::Both => Roundtrip::Both,
        },
        forward_pairs: args.forward_pairs,
        backward_pairs: args.backward_pairs,
        corpus_relations: args.corpus_relations,
        correspond: !args.optima_only,
        fault: match cli.fault_inject {
            Some(FaultArg::DropGadgetEdge) => Fault::DropGadgetEdge,
            None => Fault::None,
        },
    };
    let report = run_verify(&cfg)?;
    write(&cli.out, "report.jsonl", &report.jsonl())?;
    for c in &report.counterexamples {
        write(&cli.out.join("counterexamples"), &format!("{}.json", c.id), &to_pretty(&c.file))?;
    }
    let summary = json!({
        "pairs": report.records.len(),
        "pass": report.count(PairStatus::Pass),
        "fail": report.count(PairStatus::Fail),
        "budget_exceeded": report.count(PairStatus::BudgetExceeded),
    });
    println!("{}", serde_json::to_string(&summary)?);
    for c in &report.counterexamples {
        eprintln!("{}: {}", c.id, c.detail);
    }
    if report.all_passed() {
        Ok(())
    } else {
        let bad = report.records.len() - report.count(PairStatus::Pass);
        Err(Failure::Check(format!("{bad} of {} pairs did not pass", report.records.len())))
    }
}

fn template_names(ts: &[Template]) -> Vec<&'static str> {
    ts.iter().map(|t| t.name()).collect()
}

fn cmd_algebra(cli: &Cli, args: &AlgebraArgs) -> CmdResult {
    if let Some(paths) = &args.check_wpol {
        let (wos, labels) =
            wos_from_json(&read_json(&paths[0])?).with_context(|| format!("in {}", paths[0].display()))?;
        let ws = structure_from_json(&read_json(&paths[1])?).with_context(|| format!("in {}", paths[1].display()))?;
        if labels != ws.domain() {
            return Err(anyhow!("operation domain {labels:?} differs from structure domain {:?}", ws.domain()).into());
        }
        let mut results = Map::new();
        let mut ok = true;
        for (name, rho) in ws.relations() {
            let r = is_weighted_polymorphism(&wos, rho);
            ok &= r.is_ok();
            let v = match r {
                Ok(()) => json!({ "weighted_polymorphism": true }),
                Err(w) => json!({ "weighted_polymorphism": false, "violation": format!("{w:?}") }),
            };
            results.insert(name.clone(), v);
        }
        let report = json!({ "relations": results });
        write(&cli.out, "algebra.json", &to_pretty(&report))?;
        println!("{}", serde_json::to_string(&report)?);
        if !ok {
            return Err(Failure::Check("not a weighted polymorphism".into()));
        }
    }
    if let Some(paths) = &args.extend {
        let (wos, labels) =
            wos_from_json(&read_json(&paths[0])?).with_context(|| format!("in {}", paths[0].display()))?;
        let (e, _) = load_encoding(&paths[1])?;
        if labels != e.domain() {
            return Err(anyhow!("operation domain {labels:?} differs from the encoded domain {:?}", e.domain()).into());
        }
        let (ext, report) = match transfer_weighted_polymorphism(&wos, &e, &[]) {
            Ok(x) => x,
            Err(err) => {
                let v = json!({ "transferred": false, "error": err.to_string() });
                write(&cli.out, "algebra.json", &to_pretty(&v))?;
                println!("{}", serde_json::to_string(&v)?);
                return Err(Failure::Check(err.to_string()));
            }
        };
        write(&cli.out, "extended_wos.json", &to_pretty(&wos_to_json(&ext, e.digraph().names())))?;
        let mut templates = Map::new();
        for (i, f) in wos.ops.iter().enumerate().filter(|(_, f)| !f.is_projection()) {
            let on_v: Vec<&str> = report.preserved.get(&i).map(|t| template_names(t)).unwrap_or_default();
            templates.insert(
                i.to_string(),
                json!({ "on_domain": template_names(&satisfied_templates(f)), "on_vertices": on_v }),
            );
        }
        let idem: Map<String, Value> = report.idempotent_on_v.iter().map(|(i, b)| (i.to_string(), json!(b))).collect();
        let v = json!({
            "transferred": true,
            "vertices": e.vertex_count(),
            "checked_tuples": report.checked_tuples,
            "templates": templates,
            "idempotent_on_vertices": idem,
        });
        write(&cli.out, "algebra.json", &to_pretty(&v))?;
        println!("{}", serde_json::to_string(&v)?);
    }
    if let Some(path) = &args.core {
        let ws = structure_from_json(&read_json(path)?).with_context(|| format!("in {}", path.display()))?;
        let (collapsed, _) = collapse_to_single_relation(&ws)?;
        let rho = &collapsed.relations()[0].1;
        let e = build_encoding(rho);
        let core = is_core(&collapsed, 1 << 20)?;
        let rig = is_rigid_core_pair(rho, &e, &budget(cli))?;
        let verdict = match (core, rig.structure_rigid) {
            (_, true) => "rigid core",
            (true, false) => "core, not rigid",
            (false, false) => "not a core",
        };
        let label = |t: &[usize], names: &[String]| t.iter().map(|&x| names[x].clone()).collect::<Vec<_>>();
        let v = json!({
            "verdict": verdict,
            "core": core,
            "rigid": rig.structure_rigid,
            "encoding_rigid": rig.digraph_rigid,
            "witness": rig.structure_witness.as_ref().map(|t| label(t, rho.domain())),
            "encoding_witness": rig.digraph_witness.as_ref().map(|t| label(t, e.digraph().names())),
            "u_support": (0..e.vertex_count())
                .filter(|&v| !ExtCost::Finite(e.u[v].clone()).is_zero())
                .map(|v| (e.digraph().name(v).to_string(), json!(format_rational(&e.u[v]))))
                .collect::<Map<String, Value>>(),
        });
        write(&cli.out, "algebra.json", &to_pretty(&v))?;
        println!("{}", serde_json::to_string(&v)?);
    }
    Ok(())
}

fn run(cli: &Cli) -> CmdResult {
    match &cli.cmd {
        Cmd::Build { structure } => cmd_build(cli, structure),
        Cmd::Reduce(a) => cmd_reduce(cli, a),
        Cmd::Solve(a) => cmd_solve(cli, a),
        Cmd::Verify(a) => cmd_verify(cli, a),
        Cmd::Algebra(a) => cmd_algebra(cli, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }
}
