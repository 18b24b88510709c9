//! Exhaustive reference solvers. Everything here is exponential and guarded
//! by a [`SearchBudget`]; the polynomial algorithms elsewhere are certified
//! against these.

mod equivalence;
mod hom;

pub use equivalence::{
    backward_deletions, check_backward, check_forward, check_pair, correspondence_check, describe, forward_deletions,
    shrink, verify_equivalence, Pair, PairKind, PairRecord, PairStatus, PROJECTION_LIMIT,
};

use std::collections::{BTreeMap, BTreeSet};

use hom::{level_domains, HomSearch};

use crate::cost::{ExtCost, Rational};
use crate::digraph::Digraph;
use crate::reduce::MinCostHomInstance;
use crate::structure::{Assignment, VcspInstance, WeightedStructure};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchBudget {
    /// Search-tree nodes per oracle call.
    pub max_nodes: u64,
    /// Cap on the raw assignment space (`|D|^vars`) of one independent part,
    /// and on the number of results an enumeration may return.
    pub max_assignments: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { max_nodes: 50_000_000, max_assignments: 1 << 34 }
    }
}

impl SearchBudget {
    pub fn new(max_nodes: u64) -> Self {
        SearchBudget { max_nodes, ..Self::default() }
    }

    pub(crate) fn counter(&self) -> Counter {
        Counter { used: 0, limit: self.max_nodes }
    }
}

pub(crate) struct Counter {
    used: u64,
    limit: u64,
}

impl Counter {
    pub fn tick(&mut self) -> Result<()> {
        self.used += 1;
        if self.used > self.limit {
            return Err(Error::BudgetExceeded { limit: self.limit });
        }
        Ok(())
    }
}

fn space_guard(base: usize, exp: usize, budget: &SearchBudget) -> Result<()> {
    let mut total: u64 = 1;
    for _ in 0..exp {
        total = total.saturating_mul(base as u64);
        if total > budget.max_assignments {
            return Err(Error::BudgetExceeded { limit: budget.max_assignments });
        }
    }
    Ok(())
}

/// All homomorphisms `x → a` in lexicographic order, with level pruning when
/// both digraphs are balanced.
pub fn enumerate_homomorphisms(x: &Digraph, a: &Digraph, budget: &SearchBudget) -> Result<Vec<Vec<usize>>> {
    let search = HomSearch::new(x, a);
    let dom = level_domains(x, a).unwrap_or_else(|| search.full_domains());
    let mut out = Vec::new();
    let mut overflow = false;
    search.search(dom, &mut budget.counter(), &mut |h| {
        out.push(h.to_vec());
        overflow = out.len() as u64 > budget.max_assignments;
        !overflow
    })?;
    if overflow {
        return Err(Error::BudgetExceeded { limit: budget.max_assignments });
    }
    Ok(out)
}

/// As [`enumerate_homomorphisms`] but by plain backtracking, for cross-checks.
pub fn enumerate_homomorphisms_unpruned(x: &Digraph, a: &Digraph, budget: &SearchBudget) -> Result<Vec<Vec<usize>>> {
    let search = HomSearch::new(x, a);
    let mut out = Vec::new();
    let mut overflow = false;
    search.search_unpruned(&mut budget.counter(), &mut |h| {
        out.push(h.to_vec());
        overflow = out.len() as u64 > budget.max_assignments;
        !overflow
    })?;
    if overflow {
        return Err(Error::BudgetExceeded { limit: budget.max_assignments });
    }
    Ok(out)
}

/// The lexicographically first homomorphism `x → a` whose image of each
/// vertex lies in `allowed[v]`, if any.
pub fn find_homomorphism(
    x: &Digraph,
    a: &Digraph,
    allowed: Option<&[Vec<bool>]>,
    budget: &SearchBudget,
) -> Result<Option<Vec<usize>>> {
    let search = HomSearch::new(x, a);
    let mut dom = level_domains(x, a).unwrap_or_else(|| search.full_domains());
    if let Some(allowed) = allowed {
        for (d, al) in dom.iter_mut().zip(allowed) {
            for (b, &ok) in d.iter_mut().zip(al) {
                *b &= ok;
            }
        }
    }
    let mut found = None;
    search.search(dom, &mut budget.counter(), &mut |h| {
        found = Some(h.to_vec());
        false
    })?;
    Ok(found)
}

/// Exact VCSP optimum by exhaustive search on each connected part of the
/// constraint graph; ties go to the lexicographically smallest assignment,
/// and variables in no constraint take the first label.
pub fn brute_force_vcsp(
    inst: &VcspInstance,
    w: &WeightedStructure,
    budget: &SearchBudget,
) -> Result<(ExtCost, Option<Assignment>)> {
    inst.validate(w)?;
    let nd = w.domain().len();
    let parts = constraint_parts(inst);
    let mut full = vec![0usize; inst.variables.len()];
    let mut total = ExtCost::zero();
    for (vars, cons) in parts {
        space_guard(nd, vars.len(), budget)?;
        match best_in_part(inst, w, &vars, &cons, budget)? {
            None => return Ok((ExtCost::Infinite, None)),
            Some((cost, vals)) => {
                total += ExtCost::Finite(cost);
                for (&v, &d) in vars.iter().zip(&vals) {
                    full[v] = d;
                }
            }
        }
    }
    Ok((total, Some(Assignment(full))))
}

/// Every finite-cost assignment with its cost, in lexicographic order.
pub fn enumerate_vcsp_solutions(
    inst: &VcspInstance,
    w: &WeightedStructure,
    budget: &SearchBudget,
) -> Result<Vec<(Assignment, Rational)>> {
    inst.validate(w)?;
    let nd = w.domain().len();
    space_guard(nd, inst.variables.len(), budget)?;
    let mut counter = budget.counter();
    let mut out = Vec::new();
    let mut vals = vec![0usize; inst.variables.len()];
    let by_last = constraints_by_last_var(
        inst,
        &(0..inst.variables.len()).collect::<Vec<_>>(),
        &(0..inst.constraints.len()).collect::<Vec<_>>(),
    );
    enumerate_rec(inst, w, 0, &mut vals, Rational::from_integer(0.into()), &by_last, &mut counter, &mut |v, c| {
        out.push((Assignment(v.to_vec()), c.clone()));
    })?;
    Ok(out)
}

/// Groups variables and constraints into connected parts; variables are
/// sorted inside a part and parts are ordered by their first variable.
fn constraint_parts(inst: &VcspInstance) -> Vec<(Vec<usize>, Vec<usize>)> {
    let nv = inst.variables.len();
    let mut parent: Vec<usize> = (0..nv).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let next = p[y];
            p[y] = r;
            y = next;
        }
        r
    }
    for c in &inst.constraints {
        for win in c.scope.windows(2) {
            let (a, b) = (find(&mut parent, win[0]), find(&mut parent, win[1]));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: BTreeMap<usize, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for v in 0..nv {
        let r = find(&mut parent, v);
        groups.entry(r).or_default().0.push(v);
    }
    for (ci, c) in inst.constraints.iter().enumerate() {
        if let Some(&v) = c.scope.first() {
            let r = find(&mut parent, v);
            groups.get_mut(&r).expect("variable group").1.push(ci);
        }
    }
    groups.into_values().collect()
}

/// For each position in `vars`, the constraints whose scope is complete
/// once that variable is assigned.
fn constraints_by_last_var(inst: &VcspInstance, vars: &[usize], cons: &[usize]) -> Vec<Vec<usize>> {
    let pos: BTreeMap<usize, usize> = vars.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut by_last = vec![Vec::new(); vars.len()];
    for &ci in cons {
        let last = inst.constraints[ci].scope.iter().map(|v| pos[v]).max();
        if let Some(l) = last {
            by_last[l].push(ci);
        }
    }
    by_last
}

fn partial_cost(
    inst: &VcspInstance,
    w: &WeightedStructure,
    ci: usize,
    value_of: impl Fn(usize) -> usize,
) -> Option<Rational> {
    let c = &inst.constraints[ci];
    let rel = w.relation(&c.relation).expect("validated");
    let image: Vec<usize> = c.scope.iter().map(|&v| value_of(v)).collect();
    rel.get(&image).map(|x| x * &c.weight)
}

#[allow(clippy::too_many_arguments)]
fn enumerate_rec(
    inst: &VcspInstance,
    w: &WeightedStructure,
    i: usize,
    vals: &mut Vec<usize>,
    cost: Rational,
    by_last: &[Vec<usize>],
    counter: &mut Counter,
    emit: &mut dyn FnMut(&[usize], &Rational),
) -> Result<()> {
    counter.tick()?;
    if i == vals.len() {
        emit(vals, &cost);
        return Ok(());
    }
    for d in 0..w.domain().len() {
        vals[i] = d;
        let mut c = cost.clone();
        let mut ok = true;
        for &ci in &by_last[i] {
            match partial_cost(inst, w, ci, |v| vals[v]) {
                Some(x) => c += x,
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            enumerate_rec(inst, w, i + 1, vals, c, by_last, counter, emit)?;
        }
    }
    Ok(())
}

/// Lexicographic branch and bound over one part; pruning only on `≥ best`,
/// which never discards a lexicographically earlier optimum.
fn best_in_part(
    inst: &VcspInstance,
    w: &WeightedStructure,
    vars: &[usize],
    cons: &[usize],
    budget: &SearchBudget,
) -> Result<Option<(Rational, Vec<usize>)>> {
    let by_last = constraints_by_last_var(inst, vars, cons);
    let pos: BTreeMap<usize, usize> = vars.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut counter = budget.counter();
    let mut best: Option<(Rational, Vec<usize>)> = None;
    let mut vals = vec![0usize; vars.len()];
    #[allow(clippy::too_many_arguments)]
    fn rec(
        i: usize,
        vals: &mut Vec<usize>,
        cost: Rational,
        inst: &VcspInstance,
        w: &WeightedStructure,
        by_last: &[Vec<usize>],
        pos: &BTreeMap<usize, usize>,
        counter: &mut Counter,
        best: &mut Option<(Rational, Vec<usize>)>,
    ) -> Result<()> {
        counter.tick()?;
        if best.as_ref().is_some_and(|(b, _)| cost >= *b) {
            return Ok(());
        }
        if i == vals.len() {
            *best = Some((cost, vals.clone()));
            return Ok(());
        }
        for d in 0..w.domain().len() {
            vals[i] = d;
            let mut c = cost.clone();
            let mut ok = true;
            for &ci in &by_last[i] {
                match partial_cost(inst, w, ci, |v| vals[pos[&v]]) {
                    Some(x) => c += x,
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                rec(i + 1, vals, c, inst, w, by_last, pos, counter, best)?;
            }
        }
        Ok(())
    }
    rec(0, &mut vals, Rational::from_integer(0.into()), inst, w, &by_last, &pos, &mut counter, &mut best)?;
    Ok(best)
}

/// Exact minimum of `Σ W(x)·u(h(x))` over homomorphisms `G → target`.
///
/// Per connected component of `G`, the weighted vertices are assigned
/// classes of target vertices sharing one `u` value, in order of total
/// cost, and the first class assignment admitting a homomorphism wins.
pub fn brute_force_mch(
    m: &MinCostHomInstance,
    target: &Digraph,
    u: &[Rational],
    budget: &SearchBudget,
) -> Result<(ExtCost, Option<Vec<usize>>)> {
    brute_force_mch_restricted(m, target, u, None, budget)
}

/// As [`brute_force_mch`], with the image of each vertex `v` limited to
/// `allowed[v]`.
pub fn brute_force_mch_restricted(
    m: &MinCostHomInstance,
    target: &Digraph,
    u: &[Rational],
    allowed: Option<&[Vec<bool>]>,
    budget: &SearchBudget,
) -> Result<(ExtCost, Option<Vec<usize>>)> {
    if u.len() != target.vertex_count() {
        return Err(Error::Structure("u must cover every target vertex".into()));
    }
    let g = &m.graph;
    let mut levels = level_domains(g, target);
    if let Some(allowed) = allowed {
        let dom = levels.get_or_insert_with(|| vec![vec![true; target.vertex_count()]; g.vertex_count()]);
        for (d, al) in dom.iter_mut().zip(allowed) {
            for (b, &ok) in d.iter_mut().zip(al) {
                *b &= ok;
            }
        }
    }
    let mut classes: BTreeMap<Rational, Vec<usize>> = BTreeMap::new();
    for (v, val) in u.iter().enumerate() {
        classes.entry(val.clone()).or_default().push(v);
    }
    let classes: Vec<(Rational, BTreeSet<usize>)> =
        classes.into_iter().map(|(k, v)| (k, v.into_iter().collect())).collect();
    let mut hom = vec![0usize; g.vertex_count()];
    let mut total = Rational::from_integer(0.into());
    for comp in g.weak_components() {
        let (sub, map) = g.induced(&comp);
        let search = HomSearch::new(&sub, target);
        let base: Vec<Vec<bool>> = match &levels {
            Some(l) => map.iter().map(|&v| l[v].clone()).collect(),
            None => search.full_domains(),
        };
        let weighted: Vec<(usize, Rational)> = map
            .iter()
            .enumerate()
            .filter_map(|(i, v)| {
                m.weights.get(v).filter(|x| **x != Rational::from_integer(0.into())).map(|x| (i, x.clone()))
            })
            .collect();
        let combos = (classes.len() as u64)
            .checked_pow(weighted.len() as u32)
            .filter(|&c| c <= budget.max_nodes)
            .ok_or(Error::BudgetExceeded { limit: budget.max_nodes })?;
        let mut choices: Vec<(Rational, Vec<usize>)> = (0..combos)
            .map(|mut idx| {
                let mut pick = vec![0usize; weighted.len()];
                for slot in pick.iter_mut().rev() {
                    *slot = (idx % classes.len() as u64) as usize;
                    idx /= classes.len() as u64;
                }
                let cost = weighted.iter().zip(&pick).map(|((_, x), &c)| x * &classes[c].0).sum();
                (cost, pick)
            })
            .collect();
        choices.sort();
        let mut counter = budget.counter();
        let mut found = None;
        for (cost, pick) in choices {
            let mut dom = base.clone();
            for ((i, _), &c) in weighted.iter().zip(&pick) {
                for (s, b) in dom[*i].iter_mut().enumerate() {
                    *b &= classes[c].1.contains(&s);
                }
            }
            let mut h = None;
            search.search(dom, &mut counter, &mut |x| {
                h = Some(x.to_vec());
                false
            })?;
            if let Some(h) = h {
                found = Some((cost, h));
                break;
            }
        }
        let Some((cost, h)) = found else {
            return Ok((ExtCost::Infinite, None));
        };
        total += cost;
        for (i, &v) in map.iter().enumerate() {
            hom[v] = h[i];
        }
    }
    Ok((ExtCost::Finite(total), Some(hom)))
}

/// Cost of a given map, or `None` if it is not a homomorphism.
pub fn mch_cost(m: &MinCostHomInstance, target: &Digraph, u: &[Rational], hom: &[usize]) -> Option<Rational> {
    if !m.graph.edges().all(|(a, b)| target.has_edge(hom[a], hom[b])) {
        return None;
    }
    Some(m.weights.iter().map(|(&v, x)| x * &u[hom[v]]).sum())
}
