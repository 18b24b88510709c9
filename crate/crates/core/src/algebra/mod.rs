//! Operations, polymorphisms and weighted polymorphisms, identities, and the
//! extension of polymorphisms from a relation to its encoding.

mod extend;
mod identities;

pub use extend::{
    build_vertex_order, diagonal_component, extend_operation, transfer_weighted_polymorphism, DiagonalComponent,
    Extender, TransferReport, VertexOrder, POWER_GUARD,
};
pub use identities::{check_identities, satisfied_templates, Identity, IdentityFailure, IdentitySet, Template, Term};

use std::collections::BTreeSet;

use num::{Signed, Zero};

use crate::cost::Rational;
use crate::digraph::Digraph;
use crate::oracle::{enumerate_homomorphisms, SearchBudget};
use crate::structure::{Tuple, WeightedRelation, WeightedStructure};
use crate::{Error, Result};

/// A total `k`-ary operation on `{0, …, size−1}` stored as a table in
/// row-major order (first argument most significant).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Operation {
    arity: usize,
    size: usize,
    table: Vec<usize>,
}

impl Operation {
    pub fn new(arity: usize, size: usize, table: Vec<usize>) -> Result<Self> {
        let expect =
            size.checked_pow(arity as u32).ok_or_else(|| Error::SizeGuard("operation table too large".into()))?;
        if arity == 0 || table.len() != expect {
            return Err(Error::Structure(format!(
                "table of a {arity}-ary operation on {size} points needs {expect} entries"
            )));
        }
        if let Some(bad) = table.iter().find(|&&y| y >= size) {
            return Err(Error::Structure(format!("table value {bad} outside 0..{size}")));
        }
        Ok(Operation { arity, size, table })
    }

    pub fn from_fn(arity: usize, size: usize, f: impl Fn(&[usize]) -> usize) -> Self {
        let mut args = vec![0; arity];
        let table = (0..size.pow(arity as u32))
            .map(|idx| {
                decode(idx, size, &mut args);
                f(&args)
            })
            .collect();
        Operation { arity, size, table }
    }

    pub fn projection(arity: usize, size: usize, i: usize) -> Self {
        Self::from_fn(arity, size, |x| x[i])
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn apply(&self, args: &[usize]) -> usize {
        debug_assert_eq!(args.len(), self.arity);
        self.table[args.iter().fold(0, |acc, &x| acc * self.size + x)]
    }

    /// The coordinate this operation projects onto, if it is a projection.
    pub fn projection_index(&self) -> Option<usize> {
        let mut args = vec![0; self.arity];
        (0..self.arity).find(|&i| {
            (0..self.table.len()).all(|idx| {
                decode(idx, self.size, &mut args);
                self.table[idx] == args[i]
            })
        })
    }

    pub fn is_projection(&self) -> bool {
        self.projection_index().is_some()
    }

    /// Table of a unary operation.
    pub fn unary_table(&self) -> Vec<usize> {
        assert_eq!(self.arity, 1);
        self.table.clone()
    }

    /// Applies the operation coordinatewise to `k` tuples of equal length.
    pub fn apply_rows(&self, rows: &[&[usize]]) -> Vec<usize> {
        let len = rows.first().map_or(0, |r| r.len());
        let mut args = vec![0; self.arity];
        (0..len)
            .map(|j| {
                for (a, r) in args.iter_mut().zip(rows) {
                    *a = r[j];
                }
                self.apply(&args)
            })
            .collect()
    }
}

/// Writes the base-`size` digits of `idx` into `out`, most significant first.
pub(crate) fn decode(mut idx: usize, size: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = idx % size;
        idx /= size;
    }
}

/// Calls `f` on every `k`-tuple of indices below `n`, in lexicographic order.
pub(crate) fn for_each_tuple(n: usize, k: usize, mut f: impl FnMut(&[usize]) -> bool) {
    let mut cur = vec![0usize; k];
    if n == 0 && k > 0 {
        return;
    }
    loop {
        if !f(&cur) {
            return;
        }
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < n {
                break;
            }
            cur[i] = 0;
        }
    }
}

/// A finite list of same-arity operations with signed rational weights.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedOperationSet {
    pub ops: Vec<Operation>,
    pub weights: Vec<Rational>,
}

impl WeightedOperationSet {
    pub fn new(ops: Vec<Operation>, weights: Vec<Rational>) -> Result<Self> {
        let wos = WeightedOperationSet { ops, weights };
        if let Some(msg) = wos.shape_violation() {
            return Err(Error::Structure(msg));
        }
        Ok(wos)
    }

    pub fn arity(&self) -> usize {
        self.ops.first().map_or(0, Operation::arity)
    }

    /// First violation of: equal arity and size, `Σ ω = 0`, and `ω(f) < 0`
    /// only on projections.
    pub fn shape_violation(&self) -> Option<String> {
        if self.ops.is_empty() || self.ops.len() != self.weights.len() {
            return Some("need one weight per operation and at least one operation".into());
        }
        let (k, s) = (self.ops[0].arity, self.ops[0].size);
        if self.ops.iter().any(|f| f.arity != k || f.size != s) {
            return Some("operations differ in arity or domain".into());
        }
        let total: Rational = self.weights.iter().sum();
        if !total.is_zero() {
            return Some(format!("weights sum to {total}, not 0"));
        }
        if let Some(i) = (0..self.ops.len()).find(|&i| self.weights[i].is_negative() && !self.ops[i].is_projection()) {
            return Some(format!("operation {i} has negative weight but is not a projection"));
        }
        None
    }
}

/// A failed weighted-polymorphism check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WpolViolation {
    Shape(String),
    /// Operation `op` sends the argument tuples outside the relation.
    NotPolymorphism {
        op: usize,
        args: Vec<Tuple>,
    },
    /// The weighted sum is positive on these arguments.
    Inequality {
        args: Vec<Tuple>,
        sum: Rational,
    },
}

/// A tuple of `R^k` whose coordinatewise image under `f` leaves `R`.
pub fn polymorphism_witness(f: &Operation, tuples: &BTreeSet<Tuple>) -> Option<Vec<Tuple>> {
    let list: Vec<&Tuple> = tuples.iter().collect();
    let mut witness = None;
    for_each_tuple(list.len(), f.arity, |pick| {
        let rows: Vec<&[usize]> = pick.iter().map(|&i| list[i].as_slice()).collect();
        if tuples.contains(&f.apply_rows(&rows)) {
            true
        } else {
            witness = Some(pick.iter().map(|&i| list[i].clone()).collect());
            false
        }
    });
    witness
}

pub fn is_polymorphism(f: &Operation, rho: &WeightedRelation) -> bool {
    f.size == rho.domain().len() && polymorphism_witness(f, &crate::structure::feas(rho)).is_none()
}

/// Whether `f` maps every `k`-tuple of edges of `g` to an edge.
pub fn is_polymorphism_of_digraph(f: &Operation, g: &Digraph) -> bool {
    digraph_polymorphism_witness(f, g).is_none()
}

pub fn digraph_polymorphism_witness(f: &Operation, g: &Digraph) -> Option<Vec<(usize, usize)>> {
    if f.size != g.vertex_count() {
        return Some(Vec::new());
    }
    let edges: Vec<(usize, usize)> = g.edges().collect();
    let mut witness = None;
    let mut tails = vec![0; f.arity];
    let mut heads = vec![0; f.arity];
    for_each_tuple(edges.len(), f.arity, |pick| {
        for (j, &i) in pick.iter().enumerate() {
            tails[j] = edges[i].0;
            heads[j] = edges[i].1;
        }
        if g.has_edge(f.apply(&tails), f.apply(&heads)) {
            true
        } else {
            witness = Some(pick.iter().map(|&i| edges[i]).collect());
            false
        }
    });
    witness
}

/// Checks the weighted-polymorphism conditions of `wos` for `rho` exactly.
pub fn is_weighted_polymorphism(wos: &WeightedOperationSet, rho: &WeightedRelation) -> Result<(), WpolViolation> {
    if let Some(msg) = wos.shape_violation() {
        return Err(WpolViolation::Shape(msg));
    }
    if wos.ops[0].size != rho.domain().len() {
        return Err(WpolViolation::Shape("operations and relation differ in domain".into()));
    }
    let rel = crate::structure::feas(rho);
    for (i, f) in wos.ops.iter().enumerate() {
        if !wos.weights[i].is_zero() {
            if let Some(args) = polymorphism_witness(f, &rel) {
                return Err(WpolViolation::NotPolymorphism { op: i, args });
            }
        }
    }
    let list: Vec<&Tuple> = rel.iter().collect();
    let mut bad = None;
    for_each_tuple(list.len(), wos.arity(), |pick| {
        let rows: Vec<&[usize]> = pick.iter().map(|&i| list[i].as_slice()).collect();
        let sum: Rational = wos
            .ops
            .iter()
            .zip(&wos.weights)
            .filter(|(_, w)| !w.is_zero())
            .map(|(f, w)| w * rho.get(&f.apply_rows(&rows)).expect("polymorphism"))
            .sum();
        if sum.is_positive() {
            bad = Some(WpolViolation::Inequality { args: pick.iter().map(|&i| list[i].clone()).collect(), sum });
            false
        } else {
            true
        }
    });
    bad.map_or(Ok(()), Err)
}

/// The `(∨, ∧, Pr₁, Pr₂)` set with weights `(1, 1, −1, −1)` on the chain
/// `0 < 1 < … < size−1`; a weighted polymorphism exactly of submodular costs.
pub fn submodularity_wos(size: usize) -> WeightedOperationSet {
    let one = Rational::from_integer(1.into());
    WeightedOperationSet::new(
        vec![
            Operation::from_fn(2, size, |x| x[0].max(x[1])),
            Operation::from_fn(2, size, |x| x[0].min(x[1])),
            Operation::projection(2, size, 0),
            Operation::projection(2, size, 1),
        ],
        vec![one.clone(), one.clone(), -one.clone(), -one],
    )
    .expect("well-formed")
}

/// Every unary operation preserving `rho`'s relation.
pub fn unary_polymorphisms_of_relation(rho: &WeightedRelation, guard: u64) -> Result<Vec<Operation>> {
    let ws = WeightedStructure::single("rho", rho.clone());
    unary_polymorphisms(&ws, guard)
}

/// Every unary operation preserving all relations of `ws`; refuses when
/// `|D|^|D|` exceeds `guard`.
pub fn unary_polymorphisms(ws: &WeightedStructure, guard: u64) -> Result<Vec<Operation>> {
    let nd = ws.domain().len();
    let space = (nd as u64).checked_pow(nd as u32).filter(|&s| s <= guard);
    if space.is_none() {
        return Err(Error::SizeGuard(format!("{nd}^{nd} unary maps exceed the guard {guard}")));
    }
    let rels: Vec<BTreeSet<Tuple>> = ws.relations().iter().map(|(_, r)| crate::structure::feas(r)).collect();
    let mut out = Vec::new();
    for_each_tuple(nd, nd, |table| {
        let f = Operation { arity: 1, size: nd, table: table.to_vec() };
        if rels.iter().all(|rel| polymorphism_witness(&f, rel).is_none()) {
            out.push(f);
        }
        true
    });
    Ok(out)
}

/// Endomorphisms of `g` as unary operations on its vertices.
pub fn unary_polymorphisms_of_digraph(g: &Digraph, budget: &SearchBudget) -> Result<Vec<Operation>> {
    Ok(enumerate_homomorphisms(g, g, budget)?
        .into_iter()
        .map(|table| Operation { arity: 1, size: g.vertex_count(), table })
        .collect())
}

/// Only the identity preserves every relation.
pub fn is_rigid_core(ws: &WeightedStructure, guard: u64) -> Result<bool> {
    Ok(unary_polymorphisms(ws, guard)?.len() == 1)
}

/// Every unary polymorphism is a bijection.
pub fn is_core(ws: &WeightedStructure, guard: u64) -> Result<bool> {
    Ok(unary_polymorphisms(ws, guard)?.iter().all(|f| {
        let image: BTreeSet<usize> = f.table.iter().copied().collect();
        image.len() == f.size
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::{int, rat};
    use crate::structure::two_point_swap_relation;

    fn chain_relation(costs: [i64; 4]) -> WeightedRelation {
        WeightedRelation::from_labels(
            &["0", "1"],
            &[
                (&["0", "0"], int(costs[0])),
                (&["0", "1"], int(costs[1])),
                (&["1", "0"], int(costs[2])),
                (&["1", "1"], int(costs[3])),
            ],
        )
        .unwrap()
    }

    #[test]
    fn projections_preserve_everything() {
        let rho = two_point_swap_relation();
        for i in 0..3 {
            assert!(is_polymorphism(&Operation::projection(3, 2, i), &rho));
        }
    }

    #[test]
    fn min_breaks_the_swap_relation() {
        let min = Operation::from_fn(2, 2, |x| x[0].min(x[1]));
        assert!(!is_polymorphism(&min, &two_point_swap_relation()));
    }

    #[test]
    fn swap_preserves_the_swap_relation() {
        let swap = Operation::new(1, 2, vec![1, 0]).unwrap();
        assert!(is_polymorphism(&swap, &two_point_swap_relation()));
    }

    #[test]
    fn cut_function_is_submodular() {
        assert_eq!(is_weighted_polymorphism(&submodularity_wos(2), &chain_relation([0, 1, 1, 0])), Ok(()));
    }

    #[test]
    fn product_function_is_not_submodular() {
        // x·y: ρ(1,1) + ρ(0,0) = 1 exceeds ρ(0,1) + ρ(1,0) = 0.
        let verdict = is_weighted_polymorphism(&submodularity_wos(2), &chain_relation([0, 0, 0, 1]));
        assert!(matches!(verdict, Err(WpolViolation::Inequality { .. })));
    }

    #[test]
    fn equality_preferring_function_is_not_submodular() {
        let verdict = is_weighted_polymorphism(&submodularity_wos(2), &chain_relation([1, 0, 0, 1]));
        match verdict {
            Err(WpolViolation::Inequality { args, sum }) => {
                assert_eq!(args, vec![vec![0, 1], vec![1, 0]]);
                assert_eq!(sum, int(2));
            }
            other => panic!("expected an inequality violation, got {other:?}"),
        }
    }

    #[test]
    fn zero_projection_set_is_vacuous() {
        let wos = WeightedOperationSet::new(
            vec![Operation::projection(2, 2, 0), Operation::projection(2, 2, 1)],
            vec![int(0), int(0)],
        )
        .unwrap();
        assert_eq!(is_weighted_polymorphism(&wos, &two_point_swap_relation()), Ok(()));
    }

    #[test]
    fn negative_weight_on_non_projection_is_rejected() {
        let min = Operation::from_fn(2, 2, |x| x[0].min(x[1]));
        let err = WeightedOperationSet::new(vec![min, Operation::projection(2, 2, 0)], vec![rat(-1, 2), rat(1, 2)]);
        assert!(err.is_err());
    }

    #[test]
    fn unary_polymorphisms_of_running_example() {
        let ws = WeightedStructure::single("rho", two_point_swap_relation());
        let tables: Vec<Vec<usize>> = unary_polymorphisms(&ws, 100).unwrap().iter().map(|f| f.unary_table()).collect();
        assert_eq!(tables, vec![vec![0, 1], vec![1, 0]]);
        assert!(is_core(&ws, 100).unwrap());
        assert!(!is_rigid_core(&ws, 100).unwrap());
    }

    #[test]
    fn single_tuple_relation_is_rigid() {
        let rho = WeightedRelation::from_labels(&["0", "1"], &[(&["0", "1"], int(1))]).unwrap();
        assert!(is_rigid_core(&WeightedStructure::single("rho", rho), 100).unwrap());
    }

    #[test]
    fn singleton_domain_is_rigid() {
        let rho = WeightedRelation::from_labels(&["a"], &[(&["a", "a"], int(0))]).unwrap();
        assert!(is_rigid_core(&WeightedStructure::single("rho", rho), 100).unwrap());
    }

    #[test]
    fn size_guard_applies() {
        let ws = WeightedStructure::single("rho", two_point_swap_relation());
        assert!(matches!(unary_polymorphisms(&ws, 3), Err(Error::SizeGuard(_))));
    }

    #[test]
    fn two_cycle_has_identity_and_swap() {
        let g = Digraph::from_names(["a".into(), "b".into()], [("a".into(), "b".into()), ("b".into(), "a".into())])
            .unwrap();
        let tables: Vec<Vec<usize>> = unary_polymorphisms_of_digraph(&g, &SearchBudget::default())
            .unwrap()
            .iter()
            .map(|f| f.unary_table())
            .collect();
        assert_eq!(tables, vec![vec![0, 1], vec![1, 0]]);
    }
}
