use std::collections::{BTreeMap, BTreeSet};
use std::ops::ControlFlow;

use num::Zero;

use super::MinCostHomInstance;
use crate::cost::Rational;
use crate::digraph::{
    build_q_s, compute_levels, fan_min_cost, gamma, internal_components, path_csp_satisfiable, Apex, Endpoint, Fan,
    FanOutcome, LeveledDigraph,
};
use crate::encoding::EncodedDigraph;
use crate::structure::{VcspInstance, WeightedStructure};
use crate::{Error, Result};

/// Relation names of `w𝔸′`.
pub const RHO: &str = "rho";
pub const RHO0: &str = "rho0";

/// Result of the backward reduction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BackwardOutcome {
    Reduced(ReducedVCSP),
    /// No homomorphism exists.
    FixedNo {
        reason: String,
    },
    /// Every component was solved directly; the optimum is `offset`.
    FixedYes {
        offset: Rational,
    },
}

impl BackwardOutcome {
    /// The canonical infeasible instance over `w𝔸′`: a single variable under
    /// `ρ₀(x,…,x)`. It exists only when `R` has no constant tuple; otherwise
    /// every `ρ₀`-instance is satisfiable and a marker must be used instead.
    pub fn fixed_no_instance(e: &EncodedDigraph) -> Option<VcspInstance> {
        let constant = e.tuples.iter().any(|t| t.iter().all(|&x| x == t[0]));
        (!constant).then(|| {
            let mut inst = VcspInstance::new(vec!["x".into()]);
            inst.add(RHO0, vec![0; e.n()], Rational::zero());
            inst
        })
    }
}

/// A `VCSP(w𝔸′)` instance with the cost of solved short components.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducedVCSP {
    /// Domain `D` with relations [`RHO`] and [`RHO0`].
    pub structure: WeightedStructure,
    pub instance: VcspInstance,
    pub offset: Rational,
    /// Variable of each remaining base vertex of `G`.
    pub base_vars: BTreeMap<usize, usize>,
    /// Tuple variables of each remaining top vertex of `G`; `None` when its
    /// tuple was discarded as unconstrained.
    pub top_vars: BTreeMap<usize, Option<Vec<usize>>>,
}

/// Output of stage 1: `G` leveled, with weights only on vertices at the top
/// level of their component.
#[derive(Clone, Debug)]
pub struct Stage1 {
    pub graph: LeveledDigraph,
    pub weights: BTreeMap<usize, Rational>,
    pub pruned: Vec<usize>,
}

/// Rejects unbalanced inputs and inputs taller than `m`; drops weights that
/// can never meet the support of `u`.
pub fn stage1_check(m: &MinCostHomInstance, e: &EncodedDigraph) -> ControlFlow<BackwardOutcome, Stage1> {
    let graph = match compute_levels(&m.graph) {
        Ok(g) => g,
        Err(err) => return ControlFlow::Break(BackwardOutcome::FixedNo { reason: err.to_string() }),
    };
    if graph.height > e.m() {
        return ControlFlow::Break(BackwardOutcome::FixedNo {
            reason: format!("height {} exceeds {}", graph.height, e.m()),
        });
    }
    let mut weights = BTreeMap::new();
    let mut pruned = Vec::new();
    for (&v, w) in &m.weights {
        let top = graph.component_height[graph.component_of[v]];
        if w.is_zero() {
            continue;
        }
        if graph.levels[v] == top {
            weights.insert(v, w.clone());
        } else {
            pruned.push(v);
        }
    }
    ControlFlow::Continue(Stage1 { graph, weights, pruned })
}

/// Every fan of `𝔇` with all paths into one tuple vertex, then every fan with
/// all paths out of one base vertex, each with `u` restricted to it.
pub fn maximal_fans(e: &EncodedDigraph) -> Result<Vec<(Fan, Vec<Rational>)>> {
    let nd = e.domain().len();
    let nr = e.tuples.len();
    let mut out = Vec::with_capacity(nd + nr);
    let mut push = |apex: Apex, pairs: Vec<(usize, usize)>| -> Result<()> {
        let paths = pairs.iter().map(|&(d, r)| e.path_spec(d, r)).collect();
        let fan = Fan::new(apex, paths)?;
        let mut u = vec![Rational::zero(); fan.vertex_count()];
        for (i, &(d, r)) in pairs.iter().enumerate() {
            for (p, &x) in e.path(d, r).iter().enumerate() {
                u[fan.embed[i][p]] = e.u[x].clone();
            }
        }
        out.push((fan, u));
        Ok(())
    };
    for r in 0..nr {
        push(Apex::Terminal, (0..nd).map(|d| (d, r)).collect())?;
    }
    for d in 0..nd {
        push(Apex::Initial, (0..nr).map(|r| (d, r)).collect())?;
    }
    Ok(out)
}

/// The components of height `m`, re-indexed, with the offset paid for the
/// short ones.
#[derive(Clone, Debug)]
pub struct Stage2 {
    pub graph: LeveledDigraph,
    /// Original vertex of each remaining vertex.
    pub map: Vec<usize>,
    pub weights: BTreeMap<usize, Rational>,
    pub offset: Rational,
}

/// Solves each component shorter than `m` optimally over the maximal fans
/// and removes it, adding its cost to the offset.
pub fn stage2_short_components(s1: &Stage1, e: &EncodedDigraph) -> Result<ControlFlow<BackwardOutcome, Stage2>> {
    let g = &s1.graph;
    let m = e.m();
    let mut offset = Rational::zero();
    let mut keep = Vec::new();
    let mut fans = None;
    for (c, comp) in g.components.iter().enumerate() {
        if g.component_height[c] == m {
            keep.extend(comp.iter().copied());
            continue;
        }
        let fans = match &fans {
            Some(f) => f,
            None => fans.insert(maximal_fans(e)?),
        };
        let (h, map) = g.component(c);
        let w: BTreeMap<usize, Rational> =
            map.iter().enumerate().filter_map(|(i, v)| s1.weights.get(v).map(|x| (i, x.clone()))).collect();
        let mut best: Option<Rational> = None;
        for (fan, u) in fans {
            let cost = match fan_min_cost(&h, &w, fan, u)? {
                FanOutcome::Optimum { cost, .. } => cost,
                FanOutcome::NoOptimisationImpact { .. } => Rational::zero(),
                FanOutcome::Infeasible => continue,
            };
            if best.as_ref().is_none_or(|b| cost < *b) {
                best = Some(cost);
            }
        }
        match best {
            Some(cost) => offset += cost,
            None => {
                return Ok(ControlFlow::Break(BackwardOutcome::FixedNo {
                    reason: format!("short component containing {} maps nowhere", g.graph.name(comp[0])),
                }))
            }
        }
    }
    if keep.is_empty() {
        return Ok(ControlFlow::Break(BackwardOutcome::FixedYes { offset }));
    }
    keep.sort_unstable();
    let (sub, _) = g.graph.induced(&keep);
    let graph = compute_levels(&sub)?;
    let local: BTreeMap<usize, usize> = keep.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let weights = s1.weights.iter().filter_map(|(v, w)| local.get(v).map(|&i| (i, w.clone()))).collect();
    Ok(ControlFlow::Continue(Stage2 { graph, map: keep, weights, offset }))
}

/// A base vertex of the remaining digraph, or a fresh placeholder.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Base(usize),
    Fresh(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Equality {
    /// Two top vertices sharing an internal component.
    Top(usize, usize),
    /// Two base vertices sharing an internal component.
    Base(usize, usize),
}

/// Tuples of vertex sets and equalities from which the instance is built.
/// All vertex indices are local to the remaining digraph.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BPrime {
    /// One tuple per top vertex `e`; coordinate `i` holds what `h(e)_i` must
    /// equal.
    pub top_tuples: Vec<(usize, Vec<BTreeSet<Node>>)>,
    /// One tuple per internal component without top attachments, keyed by
    /// its least base vertex.
    pub base_tuples: Vec<(usize, Vec<BTreeSet<Node>>)>,
    pub equalities: Vec<Equality>,
    /// Names of the fresh vertices.
    pub fresh: Vec<String>,
}

impl BPrime {
    fn fresh(&mut self, name: String) -> Node {
        self.fresh.push(name);
        Node::Fresh(self.fresh.len() - 1)
    }
}

/// Builds the tuples and equalities for a digraph of height exactly `m`.
/// Internal components not satisfiable in `Q_{[n]}` make the instance a NO.
pub fn stage3a_build_bprime(g: &LeveledDigraph, e: &EncodedDigraph) -> Result<ControlFlow<BackwardOutcome, BPrime>> {
    let n = e.n();
    let m = e.m();
    if g.height != m {
        return Err(Error::Structure(format!("stage 3a needs height {m}, got {}", g.height)));
    }
    let full = build_q_s(n, &(1..=n).collect())?;
    let comps = internal_components(g);
    let mut gammas = Vec::with_capacity(comps.len());
    for c in &comps {
        let (h, pins, _) = c.closure(g);
        let resolved: Vec<(usize, usize)> =
            pins.iter().map(|&(v, end)| (v, if end == Endpoint::Initial { full.iota() } else { full.tau() })).collect();
        if path_csp_satisfiable(&h, &full, &resolved)?.is_none() {
            return Ok(ControlFlow::Break(BackwardOutcome::FixedNo {
                reason: format!("internal component at {} fits no path", g.graph.name(c.vertices[0])),
            }));
        }
        gammas.push(gamma(&h, n, &pins)?);
    }

    let mut bp = BPrime::default();
    // One fresh vertex per component without base attachments, shared by
    // every coordinate in its Γ.
    let shared: Vec<Option<Node>> = comps
        .iter()
        .enumerate()
        .map(|(ci, c)| {
            (c.base_attachments.is_empty() && !c.top_attachments.is_empty()).then(|| bp.fresh(format!("_c{ci}")))
        })
        .collect();

    let tops: Vec<usize> = (0..g.graph.vertex_count()).filter(|&v| g.levels[v] == m).collect();
    for &t in &tops {
        let mut tuple = Vec::with_capacity(n);
        for i in 1..=n {
            let mut set = BTreeSet::new();
            for (ci, c) in comps.iter().enumerate() {
                if c.top_attachments.contains(&t) && gammas[ci].contains(&i) {
                    match shared[ci] {
                        Some(x) => {
                            set.insert(x);
                        }
                        None => set.extend(c.base_attachments.iter().map(|&b| Node::Base(b))),
                    }
                }
            }
            if set.is_empty() {
                set.insert(bp.fresh(format!("_t{}.{i}", g.graph.name(t))));
            }
            tuple.push(set);
        }
        bp.top_tuples.push((t, tuple));
    }

    for (ci, c) in comps.iter().enumerate() {
        if !c.top_attachments.is_empty() || c.base_attachments.is_empty() {
            continue;
        }
        let bases: BTreeSet<Node> = c.base_attachments.iter().map(|&b| Node::Base(b)).collect();
        let tuple = (1..=n)
            .map(|i| {
                if gammas[ci].contains(&i) {
                    bases.clone()
                } else {
                    BTreeSet::from([bp.fresh(format!("_b{ci}.{i}"))])
                }
            })
            .collect();
        let origin = *c.base_attachments.iter().next().expect("non-empty");
        bp.base_tuples.push((origin, tuple));
    }

    for c in &comps {
        for (set, wrap) in [
            (&c.top_attachments, Equality::Top as fn(usize, usize) -> Equality),
            (&c.base_attachments, Equality::Base as fn(usize, usize) -> Equality),
        ] {
            let mut it = set.iter();
            if let Some(&first) = it.next() {
                bp.equalities.extend(it.map(|&x| wrap(first, x)));
            }
        }
    }
    bp.equalities.sort_unstable();
    bp.equalities.dedup();
    Ok(ControlFlow::Continue(bp))
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Quotients `B′` by its equality graph and emits a `ρ₀` constraint per
/// surviving tuple and a `ρ` constraint per weighted tuple.
///
/// `names` labels the base vertices; `weights` are keyed by top vertex.
pub fn stage3b_build_instance(
    bp: &BPrime,
    weights: &BTreeMap<usize, Rational>,
    e: &EncodedDigraph,
    names: &dyn Fn(usize) -> String,
    offset: Rational,
) -> ReducedVCSP {
    // Nodes are numbered bases first (by vertex), then fresh.
    let mut bases: BTreeSet<usize> = BTreeSet::new();
    for (_, t) in bp.top_tuples.iter().chain(&bp.base_tuples) {
        for set in t {
            bases.extend(set.iter().filter_map(|x| if let Node::Base(b) = x { Some(*b) } else { None }));
        }
    }
    for eq in &bp.equalities {
        if let Equality::Base(a, b) = *eq {
            bases.extend([a, b]);
        }
    }
    let base_list: Vec<usize> = bases.iter().copied().collect();
    let base_pos: BTreeMap<usize, usize> = base_list.iter().enumerate().map(|(i, &b)| (b, i)).collect();
    let id = |x: &Node| match *x {
        Node::Base(b) => base_pos[&b],
        Node::Fresh(f) => base_list.len() + f,
    };
    let mut uf = UnionFind((0..base_list.len() + bp.fresh.len()).collect());

    for (_, t) in bp.top_tuples.iter().chain(&bp.base_tuples) {
        for set in t {
            let mut it = set.iter();
            if let Some(first) = it.next() {
                for x in it {
                    uf.union(id(first), id(x));
                }
            }
        }
    }
    let top_index: BTreeMap<usize, usize> = bp.top_tuples.iter().enumerate().map(|(i, (t, _))| (*t, i)).collect();
    for eq in &bp.equalities {
        match *eq {
            Equality::Base(a, b) => uf.union(base_pos[&a], base_pos[&b]),
            Equality::Top(a, b) => {
                let (ta, tb) = (&bp.top_tuples[top_index[&a]].1, &bp.top_tuples[top_index[&b]].1);
                for (sa, sb) in ta.iter().zip(tb) {
                    uf.union(id(sa.iter().next().expect("non-empty")), id(sb.iter().next().expect("non-empty")));
                }
            }
        }
    }

    let class = |uf: &mut UnionFind, set: &BTreeSet<Node>| uf.find(id(set.iter().next().expect("non-empty")));
    // Quotient tuples keyed by class roots; weights summed over subscripts.
    let mut keyed: BTreeMap<Vec<usize>, Rational> = BTreeMap::new();
    let mut top_keys: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (t, tuple) in &bp.top_tuples {
        let key: Vec<usize> = tuple.iter().map(|s| class(&mut uf, s)).collect();
        *keyed.entry(key.clone()).or_insert_with(Rational::zero) +=
            weights.get(t).cloned().unwrap_or_else(Rational::zero);
        top_keys.insert(*t, key);
    }
    for (_, tuple) in &bp.base_tuples {
        let key: Vec<usize> = tuple.iter().map(|s| class(&mut uf, s)).collect();
        keyed.entry(key).or_insert_with(Rational::zero);
    }

    let has_base: BTreeSet<usize> = (0..base_list.len()).map(|i| uf.find(i)).collect();
    let survives = |key: &Vec<usize>, w: &Rational| {
        let distinct: BTreeSet<&usize> = key.iter().collect();
        let all_fresh = key.iter().all(|c| !has_base.contains(c));
        !(all_fresh && distinct.len() == key.len() && w.is_zero())
    };
    let mut roots: BTreeSet<usize> = has_base.clone();
    for (key, w) in &keyed {
        if survives(key, w) {
            roots.extend(key.iter().copied());
        }
    }
    // Roots are least members, so variables follow base order, then fresh.
    let var_of: BTreeMap<usize, usize> = roots.iter().enumerate().map(|(i, &r)| (r, i)).collect();
    let var_names: Vec<String> = roots
        .iter()
        .map(|&r| if r < base_list.len() { names(base_list[r]) } else { bp.fresh[r - base_list.len()].clone() })
        .collect();

    let mut instance = VcspInstance::new(var_names);
    for (key, w) in &keyed {
        if !survives(key, w) {
            continue;
        }
        let scope: Vec<usize> = key.iter().map(|c| var_of[c]).collect();
        instance.add(RHO0, scope.clone(), Rational::zero());
        if !w.is_zero() {
            instance.add(RHO, scope, w.clone());
        }
    }
    let base_vars = base_list.iter().enumerate().map(|(i, &b)| (b, var_of[&uf.find(i)])).collect();
    let top_vars = top_keys
        .into_iter()
        .map(|(t, key)| {
            let w = &keyed[&key];
            (t, survives(&key, w).then(|| key.iter().map(|c| var_of[c]).collect()))
        })
        .collect();

    let structure = WeightedStructure::new(
        e.domain().to_vec(),
        vec![(RHO.to_string(), e.rho.clone()), (RHO0.to_string(), e.rho.zero_weighted())],
    )
    .expect("one domain, distinct names");
    ReducedVCSP { structure, instance, offset, base_vars, top_vars }
}

/// Runs stages 1, 2, 3a and 3b.
pub fn backward_reduce(m: &MinCostHomInstance, e: &EncodedDigraph) -> Result<BackwardOutcome> {
    let s1 = match stage1_check(m, e) {
        ControlFlow::Continue(s) => s,
        ControlFlow::Break(out) => return Ok(out),
    };
    let s2 = match stage2_short_components(&s1, e)? {
        ControlFlow::Continue(s) => s,
        ControlFlow::Break(out) => return Ok(out),
    };
    let bp = match stage3a_build_bprime(&s2.graph, e)? {
        ControlFlow::Continue(b) => b,
        ControlFlow::Break(out) => return Ok(out),
    };
    let names = |v: usize| m.graph.name(s2.map[v]).to_string();
    let mut red = stage3b_build_instance(&bp, &s2.weights, e, &names, s2.offset.clone());
    red.base_vars = red.base_vars.into_iter().map(|(v, x)| (s2.map[v], x)).collect();
    red.top_vars = red.top_vars.into_iter().map(|(v, x)| (s2.map[v], x)).collect();
    Ok(BackwardOutcome::Reduced(red))
}
