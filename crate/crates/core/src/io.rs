//! JSON interchange formats and DOT emission.
//!
//! Every writer inserts keys in a fixed order, so equal inputs give
//! byte-identical files. Readers report the offending field as a dotted path.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use num::Zero;
use serde_json::{json, Map, Value};

use crate::algebra::{Operation, WeightedOperationSet};
use crate::cost::{format_rational, parse_rational, parse_weight, ExtCost, Rational};
use crate::digraph::{Digraph, LeveledDigraph};
use crate::encoding::{build_encoding, EncodedDigraph, Role};
use crate::oracle::PairRecord;
use crate::reduce::{BackwardOutcome, MinCostHomInstance, RHO0};
use crate::structure::{ScopeMap, VcspInstance, WeightedRelation, WeightedStructure};
use crate::{Error, Result};

fn bad(path: &str, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("{path}: {msg}"))
}

/// Parses JSON text; syntax errors carry line and column.
pub fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("line {} column {}: {e}", e.line(), e.column())))
}

/// Pretty JSON with a trailing newline.
pub fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values always serialize");
    s.push('\n');
    s
}

fn get<'a>(v: &'a Value, path: &str, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| bad(path, format!("missing field {key:?}")))
}

fn as_obj<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| bad(path, "expected an object"))
}

fn as_arr<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| bad(path, "expected an array"))
}

fn as_str<'a>(v: &'a Value, path: &str) -> Result<&'a str> {
    v.as_str().ok_or_else(|| bad(path, "expected a string"))
}

fn as_usize(v: &Value, path: &str) -> Result<usize> {
    v.as_u64().map(|x| x as usize).ok_or_else(|| bad(path, "expected a non-negative integer"))
}

fn strings(v: &Value, path: &str) -> Result<Vec<String>> {
    as_arr(v, path)?.iter().enumerate().map(|(i, x)| as_str(x, &format!("{path}[{i}]")).map(str::to_string)).collect()
}

fn weight(v: &Value, path: &str) -> Result<Rational> {
    parse_weight(as_str(v, path)?).map_err(|e| bad(path, e))
}

fn rational_str(v: &Rational) -> Value {
    Value::String(format_rational(v))
}

// ---- weighted structures ----

pub fn relation_to_json(rho: &WeightedRelation) -> Value {
    let entries: Vec<Value> = rho
        .entries()
        .map(|(t, w)| {
            let labels: Vec<&str> = t.iter().map(|&x| rho.domain()[x].as_str()).collect();
            json!({ "tuple": labels, "weight": format_rational(w) })
        })
        .collect();
    json!({ "arity": rho.arity(), "entries": entries })
}

pub fn structure_to_json(ws: &WeightedStructure) -> Value {
    let mut rels = Map::new();
    for (name, rho) in ws.relations() {
        rels.insert(name.clone(), relation_to_json(rho));
    }
    json!({ "domain": ws.domain(), "relations": rels })
}

pub fn structure_from_json(v: &Value) -> Result<WeightedStructure> {
    let domain = strings(get(v, "$", "domain")?, "domain")?;
    let index: HashMap<&str, usize> = domain.iter().enumerate().map(|(i, d)| (d.as_str(), i)).collect();
    let mut relations = Vec::new();
    for (name, rel) in as_obj(get(v, "$", "relations")?, "relations")? {
        let path = format!("relations.{name}");
        let arity = as_usize(get(rel, &path, "arity")?, &format!("{path}.arity"))?;
        let mut entries = Vec::new();
        for (i, entry) in as_arr(get(rel, &path, "entries")?, &format!("{path}.entries"))?.iter().enumerate() {
            let ep = format!("{path}.entries[{i}]");
            let labels = strings(get(entry, &ep, "tuple")?, &format!("{ep}.tuple"))?;
            let tuple = labels
                .iter()
                .map(|l| {
                    index
                        .get(l.as_str())
                        .copied()
                        .ok_or_else(|| bad(&format!("{ep}.tuple"), format!("unknown label {l:?}")))
                })
                .collect::<Result<Vec<usize>>>()?;
            entries.push((tuple, weight(get(entry, &ep, "weight")?, &format!("{ep}.weight"))?));
        }
        let rho = WeightedRelation::new(domain.clone(), arity, entries).map_err(|e| bad(&path, e))?;
        relations.push((name.clone(), rho));
    }
    if relations.is_empty() {
        return Err(bad("relations", "no relations"));
    }
    WeightedStructure::new(domain, relations).map_err(|e| bad("$", e))
}

pub fn scope_map_to_json(s: &ScopeMap) -> Value {
    let blocks: Vec<Value> =
        s.blocks.iter().map(|b| json!({ "relation": b.relation, "offset": b.offset, "arity": b.arity })).collect();
    json!({ "product": s.product_name, "blocks": blocks })
}

// ---- digraphs and instances ----

pub fn digraph_to_json(g: &Digraph) -> Value {
    let edges: Vec<Value> = g.edges().map(|(a, b)| json!([g.name(a), g.name(b)])).collect();
    json!({ "vertices": g.names(), "edges": edges })
}

pub fn digraph_from_json(v: &Value, path: &str) -> Result<Digraph> {
    let vertices = strings(get(v, path, "vertices")?, &format!("{path}.vertices"))?;
    let mut edges = Vec::new();
    for (i, e) in as_arr(get(v, path, "edges")?, &format!("{path}.edges"))?.iter().enumerate() {
        let ep = format!("{path}.edges[{i}]");
        let pair = strings(e, &ep)?;
        if pair.len() != 2 {
            return Err(bad(&ep, "an edge has exactly two endpoints"));
        }
        edges.push((pair[0].clone(), pair[1].clone()));
    }
    Digraph::from_names(vertices, edges).map_err(|e| bad(path, e))
}

pub fn instance_to_json(inst: &VcspInstance) -> Value {
    let constraints: Vec<Value> = inst
        .constraints
        .iter()
        .map(|c| {
            let scope: Vec<&str> = c.scope.iter().map(|&x| inst.variables[x].as_str()).collect();
            json!({ "relation": c.relation, "scope": scope, "weight": format_rational(&c.weight) })
        })
        .collect();
    json!({ "variables": inst.variables, "constraints": constraints })
}

pub fn instance_from_json(v: &Value, path: &str) -> Result<VcspInstance> {
    let variables = strings(get(v, path, "variables")?, &format!("{path}.variables"))?;
    let index: HashMap<&str, usize> = variables.iter().enumerate().map(|(i, x)| (x.as_str(), i)).collect();
    if index.len() != variables.len() {
        return Err(bad(&format!("{path}.variables"), "duplicate variable"));
    }
    let mut inst = VcspInstance::new(variables.clone());
    for (i, c) in as_arr(get(v, path, "constraints")?, &format!("{path}.constraints"))?.iter().enumerate() {
        let cp = format!("{path}.constraints[{i}]");
        let relation = as_str(get(c, &cp, "relation")?, &format!("{cp}.relation"))?;
        let scope = strings(get(c, &cp, "scope")?, &format!("{cp}.scope"))?
            .iter()
            .map(|x| {
                index
                    .get(x.as_str())
                    .copied()
                    .ok_or_else(|| bad(&format!("{cp}.scope"), format!("unknown variable {x:?}")))
            })
            .collect::<Result<Vec<usize>>>()?;
        let w = match c.get("weight") {
            Some(w) => weight(w, &format!("{cp}.weight"))?,
            None => Rational::from_integer(1.into()),
        };
        inst.add(relation, scope, w);
    }
    Ok(inst)
}

pub fn mch_to_json(m: &MinCostHomInstance) -> Value {
    let mut w = Map::new();
    for (&v, x) in &m.weights {
        w.insert(m.graph.name(v).to_string(), rational_str(x));
    }
    json!({ "graph": digraph_to_json(&m.graph), "W": w })
}

pub fn mch_from_json(v: &Value) -> Result<MinCostHomInstance> {
    let graph = digraph_from_json(get(v, "$", "graph")?, "graph")?;
    let mut weights = BTreeMap::new();
    if let Some(w) = v.get("W") {
        for (name, x) in as_obj(w, "W")? {
            let p = format!("W.{name}");
            let idx = graph.index_of(name).ok_or_else(|| bad(&p, "unknown vertex"))?;
            weights.insert(idx, weight(x, &p)?);
        }
    }
    MinCostHomInstance::new(graph, weights).map_err(|e| bad("$", e))
}

// ---- encodings ----

fn role_name(r: Role) -> &'static str {
    match r {
        Role::Base { .. } => "base",
        Role::Tuple { .. } => "tuple",
        Role::Path { .. } => "path",
    }
}

/// The encoding together with the relation it was built from, so a reader
/// can rebuild and cross-check it.
pub fn encoding_to_json(e: &EncodedDigraph, relation_name: &str, scope_map: Option<&ScopeMap>) -> Value {
    let g = e.digraph();
    let mut levels = Map::new();
    let mut roles = Map::new();
    let mut u = Map::new();
    for v in 0..g.vertex_count() {
        levels.insert(g.name(v).to_string(), json!(e.graph.levels[v]));
        roles.insert(g.name(v).to_string(), json!(role_name(e.roles[v])));
        if !e.u[v].is_zero() {
            u.insert(g.name(v).to_string(), rational_str(&e.u[v]));
        }
    }
    let ws = WeightedStructure::single(relation_name, e.rho.clone());
    let mut out = Map::new();
    out.insert("structure".into(), structure_to_json(&ws));
    if let Some(s) = scope_map.filter(|s| !s.is_identity()) {
        out.insert("scope_map".into(), scope_map_to_json(s));
    }
    out.insert("n".into(), json!(e.n()));
    out.insert("m".into(), json!(e.m()));
    out.insert("graph".into(), digraph_to_json(g));
    out.insert("levels".into(), Value::Object(levels));
    out.insert("roles".into(), Value::Object(roles));
    out.insert("u".into(), Value::Object(u));
    Value::Object(out)
}

/// Rebuilds the encoding from its relation and checks the stored graph.
pub fn encoding_from_json(v: &Value) -> Result<(EncodedDigraph, String)> {
    let ws = structure_from_json(get(v, "$", "structure")?).map_err(|e| bad("structure", e))?;
    let [(name, rho)] = ws.relations() else {
        return Err(bad("structure.relations", "an encoding has exactly one relation"));
    };
    let e = build_encoding(rho);
    if let Some(g) = v.get("graph") {
        let stored = digraph_from_json(g, "graph")?;
        if stored.names() != e.digraph().names() || !stored.edges().eq(e.digraph().edges()) {
            return Err(bad("graph", "does not match the encoding of the stored relation"));
        }
    }
    Ok((e, name.clone()))
}

// ---- backward reduction output ----

/// Backward output keyed by the vertex names of the input graph `g`.
pub fn outcome_to_json(out: &BackwardOutcome, e: &EncodedDigraph, g: &Digraph) -> Value {
    match out {
        BackwardOutcome::Reduced(r) => {
            let mut base = Map::new();
            for (&v, &x) in &r.base_vars {
                base.insert(g.name(v).to_string(), json!(r.instance.variables[x]));
            }
            let mut tops = Map::new();
            for (&v, xs) in &r.top_vars {
                let val = match xs {
                    Some(xs) => json!(xs.iter().map(|&x| r.instance.variables[x].as_str()).collect::<Vec<_>>()),
                    None => Value::Null,
                };
                tops.insert(g.name(v).to_string(), val);
            }
            json!({
                "status": "reduced",
                "structure": structure_to_json(&r.structure),
                "instance": instance_to_json(&r.instance),
                "offset": format_rational(&r.offset),
                "base_vars": base,
                "top_vars": tops,
            })
        }
        BackwardOutcome::FixedNo { reason } => {
            let mut m = Map::new();
            m.insert("status".into(), json!("fixed_no"));
            m.insert("reason".into(), json!(reason));
            match BackwardOutcome::fixed_no_instance(e) {
                Some(inst) => {
                    let ws =
                        WeightedStructure::new(e.domain().to_vec(), vec![(RHO0.to_string(), e.rho.zero_weighted())])
                            .expect("same domain");
                    m.insert("structure".into(), structure_to_json(&ws));
                    m.insert("instance".into(), instance_to_json(&inst));
                }
                None => {
                    m.insert("unsat".into(), json!(true));
                }
            }
            Value::Object(m)
        }
        BackwardOutcome::FixedYes { offset } => json!({ "status": "fixed_yes", "offset": format_rational(offset) }),
    }
}

/// A reduced file as read back for solving.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReducedFile {
    Instance { structure: WeightedStructure, instance: VcspInstance, offset: Rational },
    Unsat,
    Constant(Rational),
}

pub fn reduced_from_json(v: &Value) -> Result<ReducedFile> {
    let status = as_str(get(v, "$", "status")?, "status")?;
    let offset = match v.get("offset") {
        Some(x) => parse_rational(as_str(x, "offset")?).map_err(|e| bad("offset", e))?,
        None => Rational::zero(),
    };
    match status {
        "fixed_yes" => Ok(ReducedFile::Constant(offset)),
        "fixed_no" if v.get("unsat").is_some() => Ok(ReducedFile::Unsat),
        "reduced" | "fixed_no" => {
            let structure = structure_from_json(get(v, "$", "structure")?).map_err(|e| bad("structure", e))?;
            let instance = instance_from_json(get(v, "$", "instance")?, "instance")?;
            instance.validate(&structure).map_err(|e| bad("instance", e))?;
            Ok(ReducedFile::Instance { structure, instance, offset })
        }
        other => Err(bad("status", format!("unknown status {other:?}"))),
    }
}

// ---- operations ----

fn table_key(args: &[usize], labels: &[String]) -> String {
    args.iter().map(|&a| labels[a].as_str()).collect::<Vec<_>>().join(",")
}

/// Splits a `"x1,…,xk"` key into `k` labels; labels may themselves contain
/// commas, so the split is matched against the label set.
fn split_key(key: &str, k: usize, index: &HashMap<&str, usize>) -> Option<Vec<usize>> {
    fn go(rest: &str, k: usize, index: &HashMap<&str, usize>, acc: &mut Vec<usize>, found: &mut Vec<Vec<usize>>) {
        if found.len() > 1 {
            return;
        }
        if k == 1 {
            if let Some(&x) = index.get(rest) {
                acc.push(x);
                found.push(acc.clone());
                acc.pop();
            }
            return;
        }
        for (i, _) in rest.match_indices(',') {
            if let Some(&x) = index.get(&rest[..i]) {
                acc.push(x);
                go(&rest[i + 1..], k - 1, index, acc, found);
                acc.pop();
            }
        }
    }
    let mut found = Vec::new();
    go(key, k, index, &mut Vec::new(), &mut found);
    (found.len() == 1).then(|| found.pop().unwrap())
}

pub fn operation_to_json(f: &Operation, labels: &[String]) -> Value {
    let mut table = Map::new();
    let mut args = vec![0; f.arity()];
    for (idx, &y) in f.table().iter().enumerate() {
        let mut r = idx;
        for a in args.iter_mut().rev() {
            *a = r % f.size();
            r /= f.size();
        }
        table.insert(table_key(&args, labels), json!(labels[y]));
    }
    json!({ "arity": f.arity(), "table": table })
}

pub fn operation_from_json(v: &Value, labels: &[String], path: &str) -> Result<Operation> {
    let k = as_usize(get(v, path, "arity")?, &format!("{path}.arity"))?;
    if k == 0 {
        return Err(bad(&format!("{path}.arity"), "arity must be positive"));
    }
    let index: HashMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let size = labels.len();
    let cells = size.checked_pow(k as u32).ok_or_else(|| bad(path, "table too large"))?;
    let mut table = vec![None; cells];
    for (key, y) in as_obj(get(v, path, "table")?, &format!("{path}.table"))? {
        let kp = format!("{path}.table.{key}");
        let args = split_key(key, k, &index).ok_or_else(|| bad(&kp, "key is not a unique tuple of labels"))?;
        let y = as_str(y, &kp)?;
        let y = *index.get(y).ok_or_else(|| bad(&kp, format!("unknown label {y:?}")))?;
        table[args.iter().fold(0, |acc, &a| acc * size + a)] = Some(y);
    }
    let table = table
        .into_iter()
        .collect::<Option<Vec<usize>>>()
        .ok_or_else(|| bad(&format!("{path}.table"), format!("table must list all {cells} argument tuples")))?;
    Operation::new(k, size, table).map_err(|e| bad(path, e))
}

pub fn wos_to_json(wos: &WeightedOperationSet, labels: &[String]) -> Value {
    let ops: Vec<Value> = wos.ops.iter().map(|f| operation_to_json(f, labels)).collect();
    let mut weights = Map::new();
    for (i, w) in wos.weights.iter().enumerate() {
        weights.insert(i.to_string(), rational_str(w));
    }
    json!({ "domain": labels, "operations": ops, "weights": weights })
}

/// Reads a weighted operation set; weights may be signed.
pub fn wos_from_json(v: &Value) -> Result<(WeightedOperationSet, Vec<String>)> {
    let labels = strings(get(v, "$", "domain")?, "domain")?;
    let ops = as_arr(get(v, "$", "operations")?, "operations")?
        .iter()
        .enumerate()
        .map(|(i, f)| operation_from_json(f, &labels, &format!("operations[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    let wmap = as_obj(get(v, "$", "weights")?, "weights")?;
    let mut weights = vec![Rational::zero(); ops.len()];
    for (key, w) in wmap {
        let p = format!("weights.{key}");
        let i: usize = key.parse().map_err(|_| bad(&p, "key must be an operation index"))?;
        if i >= ops.len() {
            return Err(bad(&p, "no such operation"));
        }
        weights[i] = parse_rational(as_str(w, &p)?).map_err(|e| bad(&p, e))?;
    }
    let wos = WeightedOperationSet::new(ops, weights).map_err(|e| bad("$", e))?;
    Ok((wos, labels))
}

// ---- reports ----

/// One JSONL record; keys in a fixed order.
pub fn record_to_json(r: &PairRecord) -> Value {
    let mut m = Map::new();
    m.insert("id".into(), json!(r.id));
    m.insert("kind".into(), serde_json::to_value(r.kind).expect("unit enum"));
    m.insert("status".into(), serde_json::to_value(r.status).expect("unit enum"));
    m.insert("lhs".into(), json!(r.lhs.to_string()));
    m.insert("rhs".into(), json!(r.rhs.to_string()));
    m.insert("offset".into(), rational_str(&r.offset));
    if let Some(d) = &r.detail {
        m.insert("detail".into(), json!(d));
    }
    Value::Object(m)
}

pub fn records_to_jsonl(records: &[PairRecord]) -> String {
    let mut s = String::new();
    for r in records {
        s.push_str(&serde_json::to_string(&record_to_json(r)).expect("values always serialize"));
        s.push('\n');
    }
    s
}

pub fn cost_json(c: &ExtCost) -> Value {
    json!(c.to_string())
}

// ---- DOT ----

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// A leveled digraph drawn bottom-up with one rank per level. Filled nodes
/// are those listed in `filled`; `labels` adds a second line to a node.
pub fn leveled_dot(g: &LeveledDigraph, filled: &[bool], labels: &BTreeMap<usize, String>) -> String {
    let d = &g.graph;
    let mut s = String::from("digraph G {\n  rankdir=BT;\n  node [shape=circle, fontsize=10];\n");
    for level in 0..=g.height {
        let members = g.vertices_at(level);
        if members.is_empty() {
            continue;
        }
        let _ = write!(s, "  {{ rank=same;");
        for v in members {
            let _ = write!(s, " {};", quote(d.name(v)));
        }
        s.push_str(" }\n");
    }
    for v in 0..d.vertex_count() {
        let mut attrs = Vec::new();
        if let Some(l) = labels.get(&v) {
            attrs.push(format!("label={}", quote(&format!("{}\n{l}", d.name(v)))));
        }
        if filled.get(v).copied().unwrap_or(false) {
            attrs.push("style=filled".into());
            attrs.push("fillcolor=gray".into());
        }
        if !attrs.is_empty() {
            let _ = writeln!(s, "  {} [{}];", quote(d.name(v)), attrs.join(", "));
        }
    }
    for (a, b) in d.edges() {
        let _ = writeln!(s, "  {} -> {};", quote(d.name(a)), quote(d.name(b)));
    }
    s.push_str("}\n");
    s
}

/// Bases and tuples filled; support vertices of `u` labelled with their cost.
pub fn encoding_to_dot(e: &EncodedDigraph) -> String {
    let filled: Vec<bool> = e.roles.iter().map(|r| !matches!(r, Role::Path { .. })).collect();
    let labels = (0..e.vertex_count())
        .filter(|&v| !e.u[v].is_zero())
        .map(|v| (v, format!("u={}", format_rational(&e.u[v]))))
        .collect();
    leveled_dot(&e.graph, &filled, &labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::int;
    use crate::structure::two_point_swap_relation;

    #[test]
    fn structure_round_trip() {
        let ws = WeightedStructure::single("rho", two_point_swap_relation());
        let v = structure_to_json(&ws);
        assert_eq!(structure_from_json(&v).unwrap(), ws);
        let text = to_pretty(&v);
        assert_eq!(to_pretty(&parse_json(&text).unwrap()), text);
    }

    #[test]
    fn bad_weight_names_its_field() {
        let text = r#"{"domain":["a"],"relations":{"r":{"arity":1,"entries":[{"tuple":["a"],"weight":"inf"}]}}}"#;
        let err = structure_from_json(&parse_json(text).unwrap()).unwrap_err().to_string();
        assert!(err.contains("relations.r.entries[0].weight"), "{err}");
    }

    #[test]
    fn syntax_error_has_line() {
        let err = parse_json("{\n  \"a\": ,\n}").unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
    }

    #[test]
    fn empty_relation_is_rejected() {
        let text = r#"{"domain":["a"],"relations":{"r":{"arity":1,"entries":[]}}}"#;
        assert!(structure_from_json(&parse_json(text).unwrap()).is_err());
    }

    #[test]
    fn instance_and_mch_round_trip() {
        let mut inst = VcspInstance::new(vec!["x".into(), "y".into()]);
        inst.add("rho", vec![0, 1], int(3));
        assert_eq!(instance_from_json(&instance_to_json(&inst), "$").unwrap(), inst);
        let g = Digraph::from_names(vec!["a".into(), "b".into()], vec![("a".into(), "b".into())]).unwrap();
        let m = MinCostHomInstance::new(g, BTreeMap::from([(1, int(2))])).unwrap();
        assert_eq!(mch_from_json(&mch_to_json(&m)).unwrap(), m);
    }

    #[test]
    fn encoding_round_trip_checks_graph() {
        let e = build_encoding(&two_point_swap_relation());
        let mut v = encoding_to_json(&e, "rho", None);
        let (back, name) = encoding_from_json(&v).unwrap();
        assert_eq!(name, "rho");
        assert_eq!(back.digraph().names(), e.digraph().names());
        v["graph"]["edges"].as_array_mut().unwrap().pop();
        assert!(encoding_from_json(&v).is_err());
    }

    #[test]
    fn operation_keys_with_commas_parse() {
        let labels: Vec<String> = vec!["(0,1)".into(), "(1,0)".into(), "x".into()];
        let f = Operation::from_fn(2, 3, |a| a[0].max(a[1]));
        let v = operation_to_json(&f, &labels);
        assert_eq!(operation_from_json(&v, &labels, "$").unwrap(), f);
    }

    #[test]
    fn wos_round_trip() {
        let wos = crate::algebra::submodularity_wos(2);
        let labels = vec!["0".to_string(), "1".to_string()];
        let (back, l) = wos_from_json(&wos_to_json(&wos, &labels)).unwrap();
        assert_eq!(l, labels);
        assert_eq!(back.ops, wos.ops);
        assert_eq!(back.weights, wos.weights);
    }

    #[test]
    fn dot_has_one_rank_per_level() {
        let e = build_encoding(&two_point_swap_relation());
        let dot = encoding_to_dot(&e);
        assert_eq!(dot.matches("rank=same").count(), e.m() + 1);
        assert!(dot.contains("u=2"));
        assert_eq!(dot.matches(" -> ").count(), 24);
    }
}
