//! Extending operations of `ρ` to operations on the vertices of `𝔇`.

use std::collections::{BTreeMap, VecDeque};

use num::{Signed, Zero};

use super::identities::{check_identities, satisfied_templates, IdentitySet, Template};
use super::{
    decode, digraph_polymorphism_witness, for_each_tuple, is_weighted_polymorphism, Operation, WeightedOperationSet,
};
use crate::cost::Rational;
use crate::digraph::{BlockKind, QPath};
use crate::encoding::{EncodedDigraph, Role};
use crate::{Error, Result};

/// Largest `|V|^k` index space materialized for `𝔇^k`.
pub const POWER_GUARD: usize = 1 << 22;

/// `ε` and the linear order `⊑` on the vertices of `𝔇`.
///
/// `≼₁` is declaration order on `D` and `≼` is lexicographic on `(d, r)`, which
/// keeps every `d`-block contiguous.
#[derive(Clone, Debug)]
pub struct VertexOrder {
    /// `ε(v)` as a pair `(d, r)`.
    pub eps: Vec<(usize, usize)>,
    /// Position of each vertex in `⊑`.
    pub rank: Vec<usize>,
    /// Vertices in `⊑` order.
    pub sorted: Vec<usize>,
}

impl VertexOrder {
    pub fn less(&self, x: usize, y: usize) -> bool {
        self.rank[x] < self.rank[y]
    }

    pub fn min_of(&self, vs: impl IntoIterator<Item = usize>) -> Option<usize> {
        vs.into_iter().min_by_key(|&v| self.rank[v])
    }
}

pub fn build_vertex_order(e: &EncodedDigraph) -> Result<VertexOrder> {
    let nv = e.vertex_count();
    let eps: Vec<(usize, usize)> = (0..nv).map(|v| e.pairs_containing(v)[0]).collect();
    let key = |v: usize| {
        let (d, r) = eps[v];
        let pos = e.position_on(v, d, r).expect("ε(v) contains v");
        (e.graph.levels[v], e.pair_index(d, r), pos)
    };
    let keys: Vec<_> = (0..nv).map(key).collect();
    let mut sorted: Vec<usize> = (0..nv).collect();
    sorted.sort_by_key(|&v| keys[v]);
    if let Some(w) = sorted.windows(2).find(|w| keys[w[0]] >= keys[w[1]]) {
        let names = e.digraph();
        return Err(Error::TotalityViolation(format!("{} and {} share a key", names.name(w[0]), names.name(w[1]))));
    }
    if let Some(w) = sorted.windows(2).find(|w| e.graph.levels[w[0]] > e.graph.levels[w[1]]) {
        return Err(Error::TotalityViolation(format!("order disagrees with levels at {}", e.digraph().name(w[1]))));
    }
    let mut rank = vec![0; nv];
    for (i, &v) in sorted.iter().enumerate() {
        rank[v] = i;
    }
    Ok(VertexOrder { eps, rank, sorted })
}

/// The weakly connected component `Δ_k` of `𝔇^k` containing the diagonal.
#[derive(Clone, Debug)]
pub struct DiagonalComponent {
    pub k: usize,
    size: usize,
    member: Vec<bool>,
}

impl DiagonalComponent {
    fn index(&self, c: &[usize]) -> usize {
        c.iter().fold(0, |acc, &x| acc * self.size + x)
    }

    pub fn contains(&self, c: &[usize]) -> bool {
        self.member[self.index(c)]
    }

    pub fn len(&self) -> usize {
        self.member.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Visits each tuple of the Cartesian product of `lists`.
fn for_each_product(lists: &[&[usize]], mut f: impl FnMut(&[usize])) {
    if lists.iter().any(|l| l.is_empty()) {
        return;
    }
    let mut pick = vec![0; lists.len()];
    let mut cur: Vec<usize> = lists.iter().map(|l| l[0]).collect();
    loop {
        f(&cur);
        let mut i = lists.len();
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            pick[i] += 1;
            if pick[i] < lists[i].len() {
                cur[i] = lists[i][pick[i]];
                break;
            }
            pick[i] = 0;
            cur[i] = lists[i][0];
        }
    }
}

/// Computes `Δ_k` by search from the diagonal and checks the cited facts:
/// `D^k, R^k ⊆ Δ_k`, members of `Δ_k` have equal levels, and equal-level
/// tuples outside `Δ_k` are isolated.
pub fn diagonal_component(e: &EncodedDigraph, k: usize) -> Result<DiagonalComponent> {
    let g = e.digraph();
    let size = g.vertex_count();
    let total = size
        .checked_pow(k as u32)
        .filter(|&t| t <= POWER_GUARD)
        .ok_or_else(|| Error::SizeGuard(format!("{size}^{k} tuples exceed {POWER_GUARD}")))?;
    let mut dc = DiagonalComponent { k, size, member: vec![false; total] };
    let mut queue = VecDeque::new();
    for v in 0..size {
        let i = dc.index(&vec![v; k]);
        dc.member[i] = true;
        queue.push_back(i);
    }
    let mut c = vec![0; k];
    while let Some(i) = queue.pop_front() {
        decode(i, size, &mut c);
        let outs: Vec<&[usize]> = c.iter().map(|&x| g.out_neighbors(x)).collect();
        let ins: Vec<&[usize]> = c.iter().map(|&x| g.in_neighbors(x)).collect();
        for lists in [outs, ins] {
            for_each_product(&lists, |d| {
                let j = dc.index(d);
                if !dc.member[j] {
                    dc.member[j] = true;
                    queue.push_back(j);
                }
            });
        }
    }

    let lvl = &e.graph.levels;
    let nd = e.domain().len();
    let nr = e.tuples.len();
    let mut fail = None;
    for_each_tuple(nd, k, |c| {
        let inside = dc.contains(c);
        if !inside {
            fail = Some(format!("base tuple {c:?} outside Δ_{k}"));
        }
        inside
    });
    for_each_tuple(nr, k, |c| {
        let t: Vec<usize> = c.iter().map(|&r| e.tuple_vertex(r)).collect();
        let inside = dc.contains(&t);
        if !inside {
            fail = Some(format!("tuple-vertex tuple {t:?} outside Δ_{k}"));
        }
        inside
    });
    if fail.is_none() {
        for i in 0..total {
            decode(i, size, &mut c);
            let level_eq = c.iter().all(|&x| lvl[x] == lvl[c[0]]);
            if dc.member[i] && !level_eq {
                fail = Some(format!("{c:?} in Δ_{k} has unequal levels"));
                break;
            }
            if !dc.member[i] && level_eq {
                let has_out = c.iter().all(|&x| !g.out_neighbors(x).is_empty());
                let has_in = c.iter().all(|&x| !g.in_neighbors(x).is_empty());
                if has_out || has_in {
                    fail = Some(format!("equal-level {c:?} outside Δ_{k} is not isolated"));
                    break;
                }
            }
        }
    }
    match fail {
        Some(msg) => Err(Error::LemmaCheckFailed(msg)),
        None => Ok(dc),
    }
}

/// Shared data for extending several operations of one arity over one `𝔇`.
pub struct Extender<'a> {
    e: &'a EncodedDigraph,
    ord: &'a VertexOrder,
    delta: &'a DiagonalComponent,
    specs: Vec<QPath>,
}

impl<'a> Extender<'a> {
    pub fn new(e: &'a EncodedDigraph, ord: &'a VertexOrder, delta: &'a DiagonalComponent) -> Self {
        let nr = e.tuples.len();
        let specs = (0..e.domain().len() * nr).map(|p| e.path_spec(p / nr, p % nr)).collect();
        Extender { e, ord, delta, specs }
    }

    fn spec(&self, (d, r): (usize, usize)) -> &QPath {
        &self.specs[self.e.pair_index(d, r)]
    }

    /// `f^𝔇(c)` by Cases 1 to 3.
    fn apply(&self, f: &Operation, c: &[usize]) -> Result<usize> {
        let e = self.e;
        let nd = e.domain().len();
        if c.iter().all(|&x| e.is_base(x)) {
            return Ok(e.base(f.apply(c)));
        }
        if c.iter().all(|&x| e.is_tuple(x)) {
            let rows: Vec<&[usize]> = c.iter().map(|&x| e.tuples[x - nd].as_slice()).collect();
            let image = f.apply_rows(&rows);
            let r = e
                .tuple_index(&image)
                .ok_or_else(|| Error::PolymorphismCheckFailed(format!("componentwise image {image:?} is not in R")))?;
            return Ok(e.tuple_vertex(r));
        }
        if !self.delta.contains(c) {
            return Ok(self.ord.min_of(c.iter().copied()).expect("k ≥ 1"));
        }
        self.case_two(f, c)
    }

    fn case_two(&self, f: &Operation, c: &[usize]) -> Result<usize> {
        let e = self.e;
        let eps: Vec<(usize, usize)> = c.iter().map(|&x| self.ord.eps[x]).collect();
        let pos: Vec<usize> = c
            .iter()
            .map(|&x| match e.roles[x] {
                Role::Path { pos, .. } => Ok(pos),
                _ => Err(Error::LemmaCheckFailed(format!("{c:?} in Δ mixes path and endpoint vertices"))),
            })
            .collect::<Result<_>>()?;
        let ds: Vec<usize> = eps.iter().map(|p| p.0).collect();
        let rows: Vec<&[usize]> = eps.iter().map(|p| e.tuples[p.1].as_slice()).collect();
        let image = f.apply_rows(&rows);
        let r = e
            .tuple_index(&image)
            .ok_or_else(|| Error::PolymorphismCheckFailed(format!("componentwise image {image:?} is not in R")))?;
        let target = (f.apply(&ds), r);

        let specs: Vec<&QPath> = eps.iter().map(|&p| self.spec(p)).collect();
        let within = |l: usize, i: usize| {
            let b = specs[i].block(l);
            b.start <= pos[i] && pos[i] <= b.end
        };
        let l = (1..=e.n())
            .find(|&l| (0..c.len()).all(|i| within(l, i)))
            .ok_or_else(|| Error::LemmaCheckFailed(format!("no block holds every coordinate of {c:?}")))?;

        let q = self.spec(target);
        let block = q.block(l);
        let path = e.path(target.0, target.1);
        let level = e.graph.levels[c[0]];
        let out = match block.kind {
            BlockKind::Edge => {
                let p = if q.levels[block.start] == level { block.start } else { block.end };
                path[p]
            }
            BlockKind::Zigzag => {
                // Offsets from the block start name 00, 01, 10, 11; the meet of
                // the zigzag coordinates is the one closest to 00, and under 2c
                // the ⊑-least transported vertex is the one closest to ι.
                let offset = (0..c.len())
                    .filter(|&i| specs[i].block(l).kind == BlockKind::Zigzag)
                    .map(|i| pos[i] - specs[i].block(l).start)
                    .min()
                    .ok_or_else(|| Error::LemmaCheckFailed(format!("zigzag block {l} over edge blocks at {c:?}")))?;
                path[block.start + offset]
            }
        };
        if e.graph.levels[out] != level {
            return Err(Error::PolymorphismCheckFailed(format!("level changed at {c:?}")));
        }
        Ok(out)
    }

    /// Extends `f` to `V^𝔇` and checks that the result is a polymorphism of
    /// `𝔇` and never lands in `R` unless every argument is in `R`.
    pub fn extend(&self, f: &Operation) -> Result<Operation> {
        let e = self.e;
        let k = f.arity();
        if k != self.delta.k || f.size() != e.domain().len() {
            return Err(Error::Structure("operation does not match the encoding or Δ arity".into()));
        }
        if let Some(i) = f.projection_index() {
            return Ok(Operation::projection(k, e.vertex_count(), i));
        }
        let nv = e.vertex_count();
        let mut table = Vec::with_capacity(nv.pow(k as u32));
        let mut err = None;
        for_each_tuple(nv, k, |c| match self.apply(f, c) {
            Ok(y) => {
                table.push(y);
                true
            }
            Err(x) => {
                err = Some(x);
                false
            }
        });
        if let Some(x) = err {
            return Err(x);
        }
        let out = Operation::new(k, nv, table)?;
        if let Some(w) = digraph_polymorphism_witness(&out, e.digraph()) {
            let g = e.digraph();
            let shown: Vec<String> = w.iter().map(|&(a, b)| format!("{}→{}", g.name(a), g.name(b))).collect();
            return Err(Error::PolymorphismCheckFailed(format!("edges {shown:?} map to a non-edge")));
        }
        let mut leak = None;
        for_each_tuple(nv, k, |c| {
            if e.is_tuple(out.apply(c)) && !c.iter().all(|&x| e.is_tuple(x)) {
                leak = Some(c.to_vec());
                false
            } else {
                true
            }
        });
        if let Some(c) = leak {
            let names: Vec<&str> = c.iter().map(|&x| e.digraph().name(x)).collect();
            return Err(Error::RangeLeakIntoR(format!("{names:?}")));
        }
        Ok(out)
    }
}

/// Extends a polymorphism `f` of `R` to a polymorphism of `𝔇`.
pub fn extend_operation(f: &Operation, e: &EncodedDigraph, ord: &VertexOrder) -> Result<Operation> {
    let delta = diagonal_component(e, f.arity())?;
    Extender::new(e, ord, &delta).extend(f)
}

/// What the transfer verified beyond the weighted-polymorphism conditions.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TransferReport {
    /// Templates each non-projection satisfies on `D`, re-verified on `V^𝔇`
    /// (idempotency excluded).
    pub preserved: BTreeMap<usize, Vec<Template>>,
    /// For operations idempotent on `D`: whether the extension is idempotent
    /// on all of `V^𝔇`. Reported, not required.
    pub idempotent_on_v: BTreeMap<usize, bool>,
    /// Argument tuples checked against the `u` inequality.
    pub checked_tuples: u64,
}

/// Carries a weighted polymorphism of `ρ` over to `(𝔇, u)`: projections stay
/// projections, other operations are extended, weights are copied. Identity
/// sets in `sigma` refer to carrier indices and must hold on `D`.
pub fn transfer_weighted_polymorphism(
    wos: &WeightedOperationSet,
    e: &EncodedDigraph,
    sigma: &[IdentitySet],
) -> Result<(WeightedOperationSet, TransferReport)> {
    let fail = Error::TransferVerificationFailed;
    is_weighted_polymorphism(wos, &e.rho).map_err(|v| fail(format!("not a weighted polymorphism of ρ: {v:?}")))?;
    for s in sigma {
        let ops: Vec<&Operation> = symbols(wos, s)?;
        if let Err(x) = check_identities(&ops, s) {
            return Err(Error::Structure(format!("identity set fails on D: {x:?}")));
        }
    }
    let k = wos.arity();
    let ord = build_vertex_order(e)?;
    let delta = diagonal_component(e, k)?;
    let ext = Extender::new(e, &ord, &delta);
    let ops = wos.ops.iter().map(|f| ext.extend(f)).collect::<Result<Vec<_>>>()?;
    let out = WeightedOperationSet { ops, weights: wos.weights.clone() };
    if let Some(msg) = out.shape_violation() {
        return Err(fail(msg));
    }

    let mut report = TransferReport::default();
    let nv = e.vertex_count();
    let mut bad = None;
    for_each_tuple(nv, k, |c| {
        report.checked_tuples += 1;
        let sum: Rational =
            out.ops.iter().zip(&out.weights).filter(|(_, w)| !w.is_zero()).map(|(f, w)| w * &e.u[f.apply(c)]).sum();
        if sum.is_positive() {
            bad = Some(c.to_vec());
            false
        } else {
            true
        }
    });
    if let Some(c) = bad {
        let names: Vec<&str> = c.iter().map(|&x| e.digraph().name(x)).collect();
        return Err(fail(format!("u inequality fails at {names:?}")));
    }

    for (i, f) in wos.ops.iter().enumerate() {
        if f.is_projection() {
            continue;
        }
        let held = satisfied_templates(f);
        let mut kept = Vec::new();
        for t in held {
            let ok = check_identities(&[&out.ops[i]], &t.identities(k)).is_ok();
            if t == Template::Idempotent {
                report.idempotent_on_v.insert(i, ok);
            } else if ok {
                kept.push(t);
            } else {
                return Err(fail(format!("operation {i} loses the {} identities", t.name())));
            }
        }
        report.preserved.insert(i, kept);
    }
    for s in sigma {
        let ops = symbols(&out, s)?;
        if let Err(x) = check_identities(&ops, s) {
            return Err(fail(format!("identity set fails on V: {x:?}")));
        }
    }
    Ok((out, report))
}

/// Operations named by the symbols of `s`, which index the carrier.
fn symbols<'w>(wos: &'w WeightedOperationSet, s: &IdentitySet) -> Result<Vec<&'w Operation>> {
    (0..s.arities.len())
        .map(|i| wos.ops.get(i).ok_or_else(|| Error::Structure(format!("identity symbol {i} outside the carrier"))))
        .collect()
}
