//! Certifying reductions pair by pair against the exhaustive solvers.

use std::collections::BTreeMap;

use num::Zero;
use serde::{Deserialize, Serialize};

use super::{brute_force_mch, brute_force_mch_restricted, brute_force_vcsp, enumerate_vcsp_solutions, SearchBudget};
use crate::cost::{ExtCost, Rational};
use crate::encoding::EncodedDigraph;
use crate::reduce::{
    backward_reduce, forward_reduce_with, variable_vertex_name, BackwardOutcome, Fault, MinCostHomInstance,
};
use crate::structure::{eval_instance, Assignment, VcspInstance, WeightedStructure};
use crate::{Error, Result};

/// Largest number of projections tried one by one in a correspondence check.
pub const PROJECTION_LIMIT: u64 = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairKind {
    Forward,
    Backward,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairStatus {
    Pass,
    Fail,
    BudgetExceeded,
}

/// One checked pair: `lhs` is the original optimum, `rhs` the reduced one,
/// and the pair passes when `lhs = rhs + offset` and the correspondence holds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairRecord {
    pub id: String,
    pub kind: PairKind,
    pub status: PairStatus,
    pub lhs: ExtCost,
    pub rhs: ExtCost,
    pub offset: Rational,
    pub detail: Option<String>,
}

impl PairRecord {
    fn new(id: &str, kind: PairKind) -> Self {
        PairRecord {
            id: id.to_string(),
            kind,
            status: PairStatus::Pass,
            lhs: ExtCost::Infinite,
            rhs: ExtCost::Infinite,
            offset: Rational::zero(),
            detail: None,
        }
    }

    fn fail(mut self, detail: String) -> Self {
        self.status = PairStatus::Fail;
        self.detail = Some(detail);
        self
    }

    pub fn passed(&self) -> bool {
        self.status == PairStatus::Pass
    }
}

fn budget_or<T>(rec: &PairRecord, r: Result<T>) -> Result<std::result::Result<T, PairRecord>> {
    match r {
        Ok(x) => Ok(Ok(x)),
        Err(Error::BudgetExceeded { limit }) => {
            let mut rec = rec.clone();
            rec.status = PairStatus::BudgetExceeded;
            rec.detail = Some(format!("budget of {limit} exceeded"));
            Ok(Err(rec))
        }
        Err(e) => Err(e),
    }
}

macro_rules! within_budget {
    ($rec:expr, $e:expr) => {
        match budget_or(&$rec, $e)? {
            Ok(x) => x,
            Err(r) => return Ok(r),
        }
    };
}

/// A pair to certify.
#[derive(Clone, Debug)]
pub enum Pair<'a> {
    Forward { id: String, inst: VcspInstance, ws: &'a WeightedStructure, e: &'a EncodedDigraph, fault: Fault },
    Backward { id: String, m: MinCostHomInstance, e: &'a EncodedDigraph },
}

/// Checks `VCSP optimum = MCH optimum of the forward output` and, when
/// `correspond` is set, that each assignment costs the same as the cheapest
/// homomorphism sending every variable vertex to its value.
pub fn check_forward(
    id: &str,
    inst: &VcspInstance,
    ws: &WeightedStructure,
    e: &EncodedDigraph,
    fault: Fault,
    correspond: bool,
    budget: &SearchBudget,
) -> Result<PairRecord> {
    let mut rec = PairRecord::new(id, PairKind::Forward);
    rec.lhs = within_budget!(rec, brute_force_vcsp(inst, ws, budget)).0;
    let m = forward_reduce_with(inst, e, fault)?;
    rec.rhs = within_budget!(rec, brute_force_mch(&m, e.digraph(), &e.u, budget)).0;
    if rec.lhs != rec.rhs {
        let detail = format!("VCSP optimum {} but MCH optimum {}", rec.lhs, rec.rhs);
        return Ok(rec.fail(detail));
    }
    if correspond {
        let pins: Vec<usize> = inst
            .variables
            .iter()
            .map(|x| m.graph.index_of(&variable_vertex_name(x)).expect("variable vertex exists"))
            .collect();
        let nd = e.domain().len();
        let count = (nd as u64).checked_pow(inst.variables.len() as u32);
        if count.is_some_and(|c| c <= PROJECTION_LIMIT) {
            let mut vals = vec![0usize; inst.variables.len()];
            loop {
                let want = eval_instance(inst, ws, &Assignment(vals.clone()))?;
                let pinned: Vec<(usize, usize)> = pins.iter().zip(&vals).map(|(&v, &d)| (v, e.base(d))).collect();
                let got = within_budget!(rec, pinned_optimum(&m, e, &pinned, budget));
                if want != got {
                    let detail = format!("assignment {vals:?} costs {want} but its homomorphisms cost {got}");
                    return Ok(rec.fail(detail));
                }
                if !advance(&mut vals, nd) {
                    break;
                }
            }
        }
    }
    Ok(rec)
}

/// Odometer step over `{0..base}^len`; false after the last tuple.
fn advance(vals: &mut [usize], base: usize) -> bool {
    for slot in vals.iter_mut().rev() {
        *slot += 1;
        if *slot < base {
            return true;
        }
        *slot = 0;
    }
    false
}

fn pinned_optimum(
    m: &MinCostHomInstance,
    e: &EncodedDigraph,
    pins: &[(usize, usize)],
    budget: &SearchBudget,
) -> Result<ExtCost> {
    let nv = e.vertex_count();
    let mut allowed = vec![vec![true; nv]; m.graph.vertex_count()];
    for &(v, t) in pins {
        allowed[v] = (0..nv).map(|x| x == t).collect();
    }
    Ok(brute_force_mch_restricted(m, e.digraph(), &e.u, Some(&allowed), budget)?.0)
}

/// Checks `MCH optimum = reduced optimum + offset` including the fixed
/// outcomes and, when `correspond` is set, runs [`correspondence_check`].
pub fn check_backward(
    id: &str,
    m: &MinCostHomInstance,
    e: &EncodedDigraph,
    correspond: bool,
    budget: &SearchBudget,
) -> Result<PairRecord> {
    let mut rec = PairRecord::new(id, PairKind::Backward);
    rec.lhs = within_budget!(rec, brute_force_mch(m, e.digraph(), &e.u, budget)).0;
    let out = backward_reduce(m, e)?;
    match &out {
        BackwardOutcome::FixedNo { .. } => rec.rhs = ExtCost::Infinite,
        BackwardOutcome::FixedYes { offset } => {
            rec.rhs = ExtCost::zero();
            rec.offset = offset.clone();
        }
        BackwardOutcome::Reduced(r) => {
            rec.rhs = within_budget!(rec, brute_force_vcsp(&r.instance, &r.structure, budget)).0;
            rec.offset = r.offset.clone();
        }
    }
    let total = rec.rhs.clone() + ExtCost::Finite(rec.offset.clone());
    if rec.lhs != total {
        let detail = format!("MCH optimum {} but reduced optimum {} plus offset {}", rec.lhs, rec.rhs, rec.offset);
        return Ok(rec.fail(detail));
    }
    if correspond {
        if let Err(detail) = within_budget!(rec, correspondence_check(m, e, &out, budget)) {
            return Ok(rec.fail(detail));
        }
    }
    Ok(rec)
}

/// Compares, projection by projection onto the remaining base and top
/// vertices, the cheapest homomorphism with the cheapest reduced solution
/// plus offset. Discarded tops are left free on both sides. Every reduced
/// solution is checked; the converse direction runs when the projection
/// space is at most [`PROJECTION_LIMIT`].
pub fn correspondence_check(
    m: &MinCostHomInstance,
    e: &EncodedDigraph,
    out: &BackwardOutcome,
    budget: &SearchBudget,
) -> Result<std::result::Result<(), String>> {
    let BackwardOutcome::Reduced(r) = out else {
        return Ok(Ok(()));
    };
    let bases: Vec<(usize, usize)> = r.base_vars.iter().map(|(&v, &x)| (v, x)).collect();
    let tops: Vec<(usize, Vec<usize>)> = r.top_vars.iter().filter_map(|(&v, x)| x.clone().map(|x| (v, x))).collect();
    let offset = ExtCost::Finite(r.offset.clone());

    // Projection: base images then tuple indices of tops.
    let mut reduced: BTreeMap<Vec<usize>, ExtCost> = BTreeMap::new();
    for (a, cost) in enumerate_vcsp_solutions(&r.instance, &r.structure, budget)? {
        let mut key: Vec<usize> = bases.iter().map(|&(_, x)| a.0[x]).collect();
        for (_, vars) in &tops {
            let t: Vec<usize> = vars.iter().map(|&x| a.0[x]).collect();
            match e.tuple_index(&t) {
                Some(i) => key.push(i),
                None => return Ok(Err(format!("reduced solution {:?} puts {t:?} outside R", a.0))),
            }
        }
        let c = ExtCost::Finite(cost) + offset.clone();
        let slot = reduced.entry(key).or_insert(ExtCost::Infinite);
        if c < *slot {
            *slot = c;
        }
    }
    let pins_of = |key: &[usize]| -> Vec<(usize, usize)> {
        let mut pins: Vec<(usize, usize)> = bases.iter().zip(key).map(|(&(v, _), &d)| (v, e.base(d))).collect();
        pins.extend(tops.iter().zip(&key[bases.len()..]).map(|((v, _), &r)| (*v, e.tuple_vertex(r))));
        pins
    };
    for (key, want) in &reduced {
        let got = pinned_optimum(m, e, &pins_of(key), budget)?;
        if got != *want {
            return Ok(Err(format!("projection {key:?}: reduced cost {want}, homomorphisms cost {got}")));
        }
    }
    let nd = e.domain().len() as u64;
    let nr = e.tuples.len() as u64;
    let space = nd
        .checked_pow(bases.len() as u32)
        .and_then(|a| nr.checked_pow(tops.len() as u32).and_then(|b| a.checked_mul(b)));
    if space.is_some_and(|s| s <= PROJECTION_LIMIT) {
        let radix: Vec<usize> = bases.iter().map(|_| nd as usize).chain(tops.iter().map(|_| nr as usize)).collect();
        let mut key = vec![0usize; radix.len()];
        loop {
            if !reduced.contains_key(&key) {
                let got = pinned_optimum(m, e, &pins_of(&key), budget)?;
                if got.is_finite() {
                    return Ok(Err(format!("projection {key:?} has homomorphisms but no reduced solution")));
                }
            }
            let mut i = key.len();
            let more = loop {
                if i == 0 {
                    break false;
                }
                i -= 1;
                key[i] += 1;
                if key[i] < radix[i] {
                    break true;
                }
                key[i] = 0;
            };
            if !more {
                break;
            }
        }
    }
    Ok(Ok(()))
}

/// Greedy single-element deletion: repeatedly takes the first smaller
/// candidate that still fails, until none does.
pub fn shrink<T: Clone>(mut x: T, smaller: impl Fn(&T) -> Vec<T>, fails: impl Fn(&T) -> bool) -> T {
    'outer: loop {
        for y in smaller(&x) {
            if fails(&y) {
                x = y;
                continue 'outer;
            }
        }
        return x;
    }
}

/// Instances with one constraint removed, then with one unused variable
/// removed.
pub fn forward_deletions(inst: &VcspInstance) -> Vec<VcspInstance> {
    let mut out = Vec::new();
    for c in 0..inst.constraints.len() {
        let mut y = inst.clone();
        y.constraints.remove(c);
        out.push(y);
    }
    for v in 0..inst.variables.len() {
        if inst.constraints.iter().any(|c| c.scope.contains(&v)) {
            continue;
        }
        let mut y = inst.clone();
        y.variables.remove(v);
        for c in &mut y.constraints {
            for x in &mut c.scope {
                if *x > v {
                    *x -= 1;
                }
            }
        }
        out.push(y);
    }
    out
}

/// Instances with one vertex (and its edges and weight) removed.
pub fn backward_deletions(m: &MinCostHomInstance) -> Vec<MinCostHomInstance> {
    let n = m.graph.vertex_count();
    (0..n)
        .map(|v| {
            let keep: Vec<usize> = (0..n).filter(|&x| x != v).collect();
            let (graph, map) = m.graph.induced(&keep);
            let weights =
                map.iter().enumerate().filter_map(|(i, old)| m.weights.get(old).map(|w| (i, w.clone()))).collect();
            MinCostHomInstance { graph, weights }
        })
        .collect()
}

pub fn check_pair(pair: &Pair<'_>, correspond: bool, budget: &SearchBudget) -> Result<PairRecord> {
    match pair {
        Pair::Forward { id, inst, ws, e, fault } => check_forward(id, inst, ws, e, *fault, correspond, budget),
        Pair::Backward { id, m, e } => check_backward(id, m, e, correspond, budget),
    }
}

/// Checks every pair; on the first failure, shrinks it and reports the
/// minimized counterexample.
pub fn verify_equivalence(pairs: &[Pair<'_>], budget: &SearchBudget) -> Result<Vec<PairRecord>> {
    let mut records = Vec::with_capacity(pairs.len());
    for pair in pairs {
        let rec = check_pair(pair, true, budget)?;
        if rec.status == PairStatus::Fail {
            let fails = |p: &Pair<'_>| check_pair(p, true, budget).is_ok_and(|r| r.status == PairStatus::Fail);
            let small = shrink(pair.clone(), |p| smaller_pairs(p), fails);
            return Err(Error::EquivalenceViolation(format!(
                "{}: {}; minimized counterexample: {}",
                rec.id,
                rec.detail.unwrap_or_default(),
                describe(&small)
            )));
        }
        records.push(rec);
    }
    Ok(records)
}

fn smaller_pairs<'a>(p: &Pair<'a>) -> Vec<Pair<'a>> {
    match p {
        Pair::Forward { id, inst, ws, e, fault } => forward_deletions(inst)
            .into_iter()
            .map(|inst| Pair::Forward { id: id.clone(), inst, ws, e, fault: *fault })
            .collect(),
        Pair::Backward { id, m, e } => {
            backward_deletions(m).into_iter().map(|m| Pair::Backward { id: id.clone(), m, e }).collect()
        }
    }
}

/// Short human-readable form of a pair's problem.
pub fn describe(p: &Pair<'_>) -> String {
    match p {
        Pair::Forward { inst, .. } => {
            let cons: Vec<String> = inst
                .constraints
                .iter()
                .map(|c| {
                    let scope: Vec<&str> = c.scope.iter().map(|&x| inst.variables[x].as_str()).collect();
                    format!("{}·{}({})", c.weight, c.relation, scope.join(","))
                })
                .collect();
            format!("variables [{}], constraints [{}]", inst.variables.join(","), cons.join(", "))
        }
        Pair::Backward { m, .. } => {
            let g = &m.graph;
            let edges: Vec<String> = g.edges().map(|(a, b)| format!("{}→{}", g.name(a), g.name(b))).collect();
            let w: Vec<String> = m.weights.iter().map(|(&v, x)| format!("{}:{x}", g.name(v))).collect();
            format!("vertices [{}], edges [{}], W [{}]", g.names().join(","), edges.join(", "), w.join(", "))
        }
    }
}
