//! Weighted relations, weighted structures and VCSP instances over them.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use num::Zero;

use crate::cost::{ExtCost, Rational};
use crate::{Error, Result};

/// A tuple of domain indices (positions in the declared domain order).
pub type Tuple = Vec<usize>;

/// A partial map from `n`-tuples over the domain to finite non-negative costs.
///
/// Tuples that are absent are undefined (cost `∞`); the key set is the
/// underlying relation `R`, which is never empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedRelation {
    arity: usize,
    domain: Vec<String>,
    entries: BTreeMap<Tuple, Rational>,
}

impl WeightedRelation {
    pub fn new(
        domain: Vec<String>,
        arity: usize,
        entries: impl IntoIterator<Item = (Tuple, Rational)>,
    ) -> Result<Self> {
        if arity == 0 {
            return Err(Error::Structure("relation arity must be positive".into()));
        }
        let mut map = BTreeMap::new();
        for (t, w) in entries {
            if t.len() != arity {
                return Err(Error::Structure(format!("tuple {t:?} has length {} but arity is {arity}", t.len())));
            }
            if let Some(&bad) = t.iter().find(|&&c| c >= domain.len()) {
                return Err(Error::Structure(format!("tuple component {bad} outside the domain")));
            }
            if w < Rational::zero() {
                return Err(Error::Structure(format!("negative weight on {t:?}")));
            }
            if map.insert(t.clone(), w).is_some() {
                return Err(Error::Structure(format!("duplicate tuple {t:?}")));
            }
        }
        if map.is_empty() {
            return Err(Error::Structure("relation has no tuples".into()));
        }
        Ok(WeightedRelation { arity, domain, entries: map })
    }

    /// Builds a relation from labelled tuples, e.g. `[("0","1"), 2]`.
    pub fn from_labels(domain: &[&str], entries: &[(&[&str], Rational)]) -> Result<Self> {
        let dom: Vec<String> = domain.iter().map(|s| s.to_string()).collect();
        let arity = entries.first().map(|(t, _)| t.len()).unwrap_or(0);
        let mut out = Vec::new();
        for (t, w) in entries {
            let idx = t
                .iter()
                .map(|l| {
                    dom.iter().position(|d| d == l).ok_or_else(|| Error::Structure(format!("unknown label {l:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            out.push((idx, w.clone()));
        }
        WeightedRelation::new(dom, arity, out)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn domain(&self) -> &[String] {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, t: &[usize]) -> Option<&Rational> {
        self.entries.get(t)
    }

    pub fn contains(&self, t: &[usize]) -> bool {
        self.entries.contains_key(t)
    }

    /// Cost of the extended cost function: `ρ(t)` or `∞` when undefined.
    pub fn cost(&self, t: &[usize]) -> ExtCost {
        match self.entries.get(t) {
            Some(w) => ExtCost::Finite(w.clone()),
            None => ExtCost::Infinite,
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Tuple, &Rational)> {
        self.entries.iter()
    }

    /// Tuples of `R` in lexicographic order.
    pub fn tuples(&self) -> impl Iterator<Item = &Tuple> {
        self.entries.keys()
    }

    pub fn position(&self, t: &[usize]) -> Option<usize> {
        self.entries.keys().position(|k| k.as_slice() == t)
    }

    pub fn min_weight(&self) -> Rational {
        self.entries.values().min().cloned().unwrap_or_else(Rational::zero)
    }

    /// The same relation with every weight set to zero.
    pub fn zero_weighted(&self) -> WeightedRelation {
        WeightedRelation {
            arity: self.arity,
            domain: self.domain.clone(),
            entries: self.entries.keys().map(|k| (k.clone(), Rational::zero())).collect(),
        }
    }

    pub fn format_tuple(&self, t: &[usize]) -> String {
        let parts: Vec<&str> = t.iter().map(|&c| self.domain[c].as_str()).collect();
        format!("({})", parts.join(","))
    }
}

/// The feasibility relation: the key set of `rho`, weights dropped.
pub fn feas(rho: &WeightedRelation) -> BTreeSet<Tuple> {
    rho.entries.keys().cloned().collect()
}

/// Direct product of relations over one domain: tuples concatenate in input
/// order and weights add.
pub fn direct_product(rhos: &[&WeightedRelation]) -> Result<WeightedRelation> {
    let first = rhos.first().ok_or_else(|| Error::Structure("direct product of an empty list".into()))?;
    if let Some(r) = rhos.iter().find(|r| r.domain != first.domain) {
        return Err(Error::Structure(format!("mixed domains {:?} and {:?} in direct product", first.domain, r.domain)));
    }
    let mut acc: Vec<(Tuple, Rational)> = vec![(Vec::new(), Rational::zero())];
    for r in rhos {
        let mut next = Vec::with_capacity(acc.len() * r.len());
        for (prefix, w) in &acc {
            for (t, v) in r.entries() {
                let mut joined = prefix.clone();
                joined.extend_from_slice(t);
                next.push((joined, w + v));
            }
        }
        acc = next;
    }
    let arity = rhos.iter().map(|r| r.arity).sum();
    WeightedRelation::new(first.domain.clone(), arity, acc)
}

/// A domain together with named weighted relations, all over that domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedStructure {
    domain: Vec<String>,
    relations: Vec<(String, WeightedRelation)>,
}

impl WeightedStructure {
    pub fn new(domain: Vec<String>, relations: Vec<(String, WeightedRelation)>) -> Result<Self> {
        if domain.is_empty() {
            return Err(Error::Structure("empty domain".into()));
        }
        let distinct: HashSet<&String> = domain.iter().collect();
        if distinct.len() != domain.len() {
            return Err(Error::Structure("duplicate domain label".into()));
        }
        let mut names = HashSet::new();
        for (name, rel) in &relations {
            if !names.insert(name.as_str()) {
                return Err(Error::Structure(format!("duplicate relation name {name:?}")));
            }
            if rel.domain != domain {
                return Err(Error::Structure(format!("relation {name:?} uses a different domain")));
            }
        }
        Ok(WeightedStructure { domain, relations })
    }

    pub fn single(name: &str, rho: WeightedRelation) -> Self {
        WeightedStructure { domain: rho.domain.clone(), relations: vec![(name.to_string(), rho)] }
    }

    pub fn domain(&self) -> &[String] {
        &self.domain
    }

    pub fn relations(&self) -> &[(String, WeightedRelation)] {
        &self.relations
    }

    pub fn relation(&self, name: &str) -> Option<&WeightedRelation> {
        self.relations.iter().find(|(n, _)| n == name).map(|(_, r)| r)
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.domain.iter().position(|d| d == label)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub relation: String,
    /// Indices into the instance's variable list.
    pub scope: Vec<usize>,
    pub weight: Rational,
}

/// `f(x) = Σ wᵢ · ρᵢ(xᵢ)` over a fixed list of variables.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct VcspInstance {
    pub variables: Vec<String>,
    pub constraints: Vec<Constraint>,
}

impl VcspInstance {
    pub fn new(variables: Vec<String>) -> Self {
        VcspInstance { variables, constraints: Vec::new() }
    }

    pub fn add(&mut self, relation: &str, scope: Vec<usize>, weight: Rational) {
        self.constraints.push(Constraint { relation: relation.to_string(), scope, weight });
    }

    /// Checks every constraint against the structure's signature.
    pub fn validate(&self, w: &WeightedStructure) -> Result<()> {
        for (i, c) in self.constraints.iter().enumerate() {
            let rel = w
                .relation(&c.relation)
                .ok_or_else(|| Error::Structure(format!("constraint {i} uses unknown relation {:?}", c.relation)))?;
            if rel.arity() != c.scope.len() {
                return Err(Error::Structure(format!(
                    "constraint {i}: scope length {} but {:?} has arity {}",
                    c.scope.len(),
                    c.relation,
                    rel.arity()
                )));
            }
            if let Some(&v) = c.scope.iter().find(|&&v| v >= self.variables.len()) {
                return Err(Error::Structure(format!("constraint {i}: unknown variable {v}")));
            }
            if c.weight < Rational::zero() {
                return Err(Error::Structure(format!("constraint {i}: negative weight")));
            }
        }
        Ok(())
    }
}

/// A total map from variables (by index) to domain indices.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Assignment(pub Vec<usize>);

impl Assignment {
    pub fn value(&self, var: usize) -> usize {
        self.0[var]
    }
}

/// Evaluates `Σ wᵢ · ρᵢ(h(scopeᵢ))` exactly; an undefined tuple gives `∞`.
pub fn eval_instance(inst: &VcspInstance, w: &WeightedStructure, h: &Assignment) -> Result<ExtCost> {
    inst.validate(w)?;
    if h.0.len() != inst.variables.len() {
        return Err(Error::Structure("assignment is not total".into()));
    }
    if h.0.iter().any(|&d| d >= w.domain().len()) {
        return Err(Error::Structure("assignment leaves the domain".into()));
    }
    let mut total = ExtCost::zero();
    let mut image = Vec::new();
    for c in &inst.constraints {
        let rel = w.relation(&c.relation).expect("validated");
        image.clear();
        image.extend(c.scope.iter().map(|&v| h.0[v]));
        match rel.get(&image) {
            Some(val) => total += ExtCost::Finite(val * &c.weight),
            None => return Ok(ExtCost::Infinite),
        }
    }
    Ok(total)
}

/// Coordinate blocks of a collapsed structure: relation `name` occupies
/// coordinates `offset .. offset + arity` of the product relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScopeMap {
    pub product_name: String,
    pub blocks: Vec<ScopeBlock>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScopeBlock {
    pub relation: String,
    pub offset: usize,
    pub arity: usize,
}

impl ScopeMap {
    pub fn is_identity(&self) -> bool {
        self.blocks.len() == 1
    }

    /// Rewrites an instance over the original structure into one over the
    /// collapsed structure. Each constraint keeps its scope in its own block
    /// and gets fresh padding variables in every other block.
    ///
    /// Padding blocks still pay `ρₖ(pad)`, so the rewritten optimum equals the
    /// original optimum plus the returned constant
    /// `Σ_c w_c · Σ_{k≠j(c)} min ρₖ`, and optimal assignments correspond.
    pub fn rewrite_instance(
        &self,
        inst: &VcspInstance,
        original: &WeightedStructure,
    ) -> Result<(VcspInstance, Rational)> {
        inst.validate(original)?;
        if self.is_identity() {
            let mut out = inst.clone();
            for c in &mut out.constraints {
                c.relation = self.product_name.clone();
            }
            return Ok((out, Rational::zero()));
        }
        let mut out = VcspInstance::new(inst.variables.clone());
        let taken: HashSet<String> = inst.variables.iter().cloned().collect();
        let mut offset = Rational::zero();
        for (ci, c) in inst.constraints.iter().enumerate() {
            let total: usize = self.blocks.iter().map(|b| b.arity).sum();
            let mut scope = vec![usize::MAX; total];
            for b in &self.blocks {
                if b.relation == c.relation {
                    scope[b.offset..b.offset + b.arity].copy_from_slice(&c.scope);
                } else {
                    let rel = original.relation(&b.relation).expect("block relation");
                    offset += &c.weight * rel.min_weight();
                    for i in 0..b.arity {
                        let mut name = format!("pad:{ci}:{}:{i}", b.relation);
                        while taken.contains(&name) {
                            name.push('\'');
                        }
                        scope[b.offset + i] = out.variables.len();
                        out.variables.push(name);
                    }
                }
            }
            out.add(&self.product_name, scope, c.weight.clone());
        }
        Ok((out, offset))
    }
}

/// Replaces all relations by their direct product (in declared order).
pub fn collapse_to_single_relation(w: &WeightedStructure) -> Result<(WeightedStructure, ScopeMap)> {
    if w.relations.is_empty() {
        return Err(Error::Structure("structure has no relations".into()));
    }
    let mut offset = 0;
    let mut blocks = Vec::new();
    for (name, rel) in &w.relations {
        blocks.push(ScopeBlock { relation: name.clone(), offset, arity: rel.arity() });
        offset += rel.arity();
    }
    if w.relations.len() == 1 {
        let name = w.relations[0].0.clone();
        return Ok((w.clone(), ScopeMap { product_name: name, blocks }));
    }
    let rels: Vec<&WeightedRelation> = w.relations.iter().map(|(_, r)| r).collect();
    let product = direct_product(&rels)?;
    let name = w.relations.iter().map(|(n, _)| n.as_str()).collect::<Vec<_>>().join("*");
    let collapsed = WeightedStructure::new(w.domain.clone(), vec![(name.clone(), product)])?;
    Ok((collapsed, ScopeMap { product_name: name, blocks }))
}

/// The binary relation `ρ(0,1) = 2`, `ρ(1,0) = 1` on `{0, 1}`, undefined
/// elsewhere; the running example of the test suites.
pub fn two_point_swap_relation() -> WeightedRelation {
    use crate::cost::int;
    WeightedRelation::from_labels(&["0", "1"], &[(&["0", "1"], int(2)), (&["1", "0"], int(1))]).expect("valid relation")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::{int, rat};

    fn rho() -> WeightedRelation {
        two_point_swap_relation()
    }

    fn max_cut() -> WeightedRelation {
        WeightedRelation::from_labels(
            &["0", "1"],
            &[(&["0", "0"], int(1)), (&["0", "1"], int(0)), (&["1", "0"], int(0)), (&["1", "1"], int(1))],
        )
        .unwrap()
    }

    #[test]
    fn eval_single_constraint() {
        let w = WeightedStructure::single("rho", rho());
        let mut inst = VcspInstance::new(vec!["x".into(), "y".into()]);
        inst.add("rho", vec![0, 1], int(1));
        assert_eq!(eval_instance(&inst, &w, &Assignment(vec![1, 0])).unwrap(), ExtCost::from_int(1));
        assert_eq!(eval_instance(&inst, &w, &Assignment(vec![0, 0])).unwrap(), ExtCost::Infinite);
        let empty = VcspInstance::new(vec!["x".into()]);
        assert_eq!(eval_instance(&empty, &w, &Assignment(vec![1])).unwrap(), ExtCost::zero());
    }

    #[test]
    fn eval_rejects_malformed() {
        let w = WeightedStructure::single("rho", rho());
        let mut inst = VcspInstance::new(vec!["x".into()]);
        inst.add("sigma", vec![0, 0], int(1));
        assert!(matches!(eval_instance(&inst, &w, &Assignment(vec![0])), Err(Error::Structure(_))));
        let mut inst = VcspInstance::new(vec!["x".into()]);
        inst.add("rho", vec![0], int(1));
        assert!(matches!(eval_instance(&inst, &w, &Assignment(vec![0])), Err(Error::Structure(_))));
    }

    #[test]
    fn zero_weight_constraint_still_forbids() {
        let w = WeightedStructure::single("rho", rho());
        let mut inst = VcspInstance::new(vec!["x".into()]);
        inst.add("rho", vec![0, 0], int(0));
        assert_eq!(eval_instance(&inst, &w, &Assignment(vec![0])).unwrap(), ExtCost::Infinite);
    }

    #[test]
    fn product_of_one_is_identity() {
        let r = rho();
        assert_eq!(direct_product(&[&r]).unwrap(), r);
    }

    #[test]
    fn product_of_two_copies() {
        let r = rho();
        let p = direct_product(&[&r, &r]).unwrap();
        assert_eq!(p.arity(), 4);
        assert_eq!(p.len(), 4);
        // (0,1) has weight 2, (1,0) has weight 1.
        assert_eq!(p.get(&[0, 1, 1, 0]), Some(&int(3)));
        assert_eq!(p.get(&[1, 0, 1, 0]), Some(&int(2)));
        assert_eq!(p.get(&[0, 1, 0, 1]), Some(&int(4)));
    }

    #[test]
    fn product_with_max_cut_has_eight_tuples() {
        let p = direct_product(&[&max_cut(), &rho()]).unwrap();
        assert_eq!(p.len(), 8);
        assert_eq!(p.get(&[0, 0, 0, 1]), Some(&int(3)));
        assert_eq!(p.get(&[0, 1, 1, 0]), Some(&int(1)));
    }

    #[test]
    fn product_rejects_mixed_domains() {
        let other = WeightedRelation::from_labels(&["a", "b"], &[(&["a"], int(0))]).unwrap();
        assert!(matches!(direct_product(&[&rho(), &other]), Err(Error::Structure(_))));
    }

    #[test]
    fn feas_is_key_set() {
        let f = feas(&rho());
        assert_eq!(f.into_iter().collect::<Vec<_>>(), vec![vec![0, 1], vec![1, 0]]);
        assert_eq!(feas(&max_cut()).len(), 4);
        let p = direct_product(&[&rho(), &max_cut()]).unwrap();
        let expect: BTreeSet<Tuple> = feas(&rho())
            .iter()
            .flat_map(|a| {
                feas(&max_cut()).into_iter().map(move |b| {
                    let mut t = a.clone();
                    t.extend(b);
                    t
                })
            })
            .collect();
        assert_eq!(feas(&p), expect);
    }

    #[test]
    fn collapse_single_relation_is_identity() {
        let w = WeightedStructure::single("rho", rho());
        let (c, map) = collapse_to_single_relation(&w).unwrap();
        assert_eq!(c, w);
        assert!(map.is_identity());
    }

    #[test]
    fn collapse_with_unary_relation() {
        let unary = WeightedRelation::from_labels(&["0", "1"], &[(&["0"], rat(1, 2)), (&["1"], int(0))]).unwrap();
        let w = WeightedStructure::new(vec!["0".into(), "1".into()], vec![("rho".into(), rho()), ("u".into(), unary)])
            .unwrap();
        let (c, map) = collapse_to_single_relation(&w).unwrap();
        assert_eq!(c.relations().len(), 1);
        assert_eq!(c.relations()[0].1.arity(), 3);
        assert_eq!(c.relations()[0].1.len(), 4);
        assert_eq!(map.blocks[1].offset, 2);
    }

    #[test]
    fn rejects_empty_relation() {
        assert!(WeightedRelation::new(vec!["0".into()], 1, vec![]).is_err());
    }
}
