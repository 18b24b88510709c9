//! Reductions between `VCSP(w𝔸)` and `MinCostHom(𝔇, u)`.
//!
//! [`forward_reduce`] replaces variables and constraints by path gadgets in
//! `𝔇`. [`backward_reduce`] turns an arbitrary input digraph into an instance
//! over `w𝔸′` (the relation plus its zero-weighted copy), solving short
//! components directly and reporting their cost as an additive offset.

mod backward;

pub use backward::{
    backward_reduce, maximal_fans, stage1_check, stage2_short_components, stage3a_build_bprime, stage3b_build_instance,
    BPrime, BackwardOutcome, Equality, Node, ReducedVCSP, Stage1, Stage2, RHO, RHO0,
};

use std::collections::{BTreeMap, BTreeSet};

use num::{Signed, Zero};

use crate::cost::Rational;
use crate::digraph::{build_q_s, Digraph};
use crate::encoding::EncodedDigraph;
use crate::structure::VcspInstance;
use crate::{Error, Result};

/// An input digraph `G` with sparse weights `W`; a vertex `x` costs
/// `W(x)·u(h(x))`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MinCostHomInstance {
    pub graph: Digraph,
    pub weights: BTreeMap<usize, Rational>,
}

impl MinCostHomInstance {
    pub fn new(graph: Digraph, weights: BTreeMap<usize, Rational>) -> Result<Self> {
        if let Some((v, _)) = weights.iter().find(|(&v, _)| v >= graph.vertex_count()) {
            return Err(Error::Structure(format!("weight on unknown vertex {v}")));
        }
        if let Some((v, w)) = weights.iter().find(|(_, w)| w.is_negative()) {
            return Err(Error::Structure(format!("negative weight {w} on {}", graph.name(*v))));
        }
        Ok(MinCostHomInstance { graph, weights })
    }

    pub fn weight(&self, v: usize) -> Rational {
        self.weights.get(&v).cloned().unwrap_or_else(Rational::zero)
    }
}

/// Deliberate defects for checking that the verifier notices them.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Fault {
    #[default]
    None,
    /// Drops the first edge of the first path of the first constraint gadget.
    DropGadgetEdge,
}

/// Name of the vertex standing for variable `var` in the forward output.
pub fn variable_vertex_name(var: &str) -> String {
    format!("x:{var}")
}

/// Builds the gadget digraph: a copy of `Q_∅` rooted at each variable, and
/// per constraint `n` paths `Q_{i}` from its scope to a fresh apex weighted
/// by the constraint weight.
pub fn forward_reduce(inst: &VcspInstance, e: &EncodedDigraph) -> Result<MinCostHomInstance> {
    forward_reduce_with(inst, e, Fault::None)
}

pub fn forward_reduce_with(inst: &VcspInstance, e: &EncodedDigraph, fault: Fault) -> Result<MinCostHomInstance> {
    let n = e.n();
    let distinct: BTreeSet<&String> = inst.variables.iter().collect();
    if distinct.len() != inst.variables.len() {
        return Err(Error::Structure("duplicate variable names".into()));
    }
    for (c, con) in inst.constraints.iter().enumerate() {
        if con.scope.len() != n {
            return Err(Error::Structure(format!(
                "constraint {c} has arity {}, the relation has {n}",
                con.scope.len()
            )));
        }
        if let Some(x) = con.scope.iter().find(|&&x| x >= inst.variables.len()) {
            return Err(Error::Structure(format!("constraint {c} uses unknown variable {x}")));
        }
        if con.weight.is_negative() {
            return Err(Error::Structure(format!("constraint {c} has negative weight")));
        }
    }

    let mut g = Digraph::new();
    let q_empty = build_q_s(n, &BTreeSet::new())?;
    let mut var_vertex = Vec::with_capacity(inst.variables.len());
    for name in &inst.variables {
        let root = variable_vertex_name(name);
        let map: Vec<usize> = (0..q_empty.len())
            .map(|p| {
                if p == 0 {
                    g.add_vertex(root.clone())
                } else {
                    g.add_vertex(format!("{root}/{}", q_empty.graph.name(p)))
                }
            })
            .collect();
        for (a, b) in q_empty.graph.edges() {
            g.add_edge(map[a], map[b]);
        }
        var_vertex.push(map[0]);
    }

    let mut weights = BTreeMap::new();
    for (c, con) in inst.constraints.iter().enumerate() {
        let apex = g.add_vertex(format!("y{c}"));
        for i in 1..=n {
            let q = build_q_s(n, &BTreeSet::from([i]))?;
            let map: Vec<usize> = (0..q.len())
                .map(|p| match p {
                    0 => var_vertex[con.scope[i - 1]],
                    p if p == q.tau() => apex,
                    p => g.add_vertex(format!("g{c}.{i}/{}", q.graph.name(p))),
                })
                .collect();
            for (a, b) in q.graph.edges() {
                let skip = fault == Fault::DropGadgetEdge && c == 0 && i == 1 && a.min(b) == 0;
                if !skip {
                    g.add_edge(map[a], map[b]);
                }
            }
        }
        if !con.weight.is_zero() {
            *weights.entry(apex).or_insert_with(Rational::zero) += &con.weight;
        }
    }
    Ok(MinCostHomInstance { graph: g, weights })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::{int, ExtCost};
    use crate::encoding::build_encoding;
    use crate::oracle::{brute_force_mch, brute_force_vcsp, SearchBudget};
    use crate::structure::{two_point_swap_relation, WeightedStructure};

    fn one_constraint(weight: i64) -> VcspInstance {
        let mut inst = VcspInstance::new(vec!["x".into(), "y".into()]);
        inst.add("rho", vec![0, 1], int(weight));
        inst
    }

    fn optima(inst: &VcspInstance) -> (ExtCost, ExtCost) {
        let rho = two_point_swap_relation();
        let e = build_encoding(&rho);
        let ws = WeightedStructure::single("rho", rho);
        let budget = SearchBudget::default();
        let lhs = brute_force_vcsp(inst, &ws, &budget).unwrap().0;
        let mch = forward_reduce(inst, &e).unwrap();
        let rhs = brute_force_mch(&mch, e.digraph(), &e.u, &budget).unwrap().0;
        (lhs, rhs)
    }

    #[test]
    fn single_constraint_matches() {
        assert_eq!(optima(&one_constraint(1)), (ExtCost::from_int(1), ExtCost::from_int(1)));
    }

    #[test]
    fn weight_two_doubles() {
        assert_eq!(optima(&one_constraint(2)), (ExtCost::from_int(2), ExtCost::from_int(2)));
    }

    #[test]
    fn lone_variable_costs_nothing() {
        let inst = VcspInstance::new(vec!["x".into()]);
        assert_eq!(optima(&inst), (ExtCost::zero(), ExtCost::zero()));
    }

    #[test]
    fn repeated_variable_is_infeasible_on_both_sides() {
        let mut inst = VcspInstance::new(vec!["x".into()]);
        inst.add("rho", vec![0, 0], int(1));
        assert_eq!(optima(&inst), (ExtCost::Infinite, ExtCost::Infinite));
    }

    #[test]
    fn output_size_is_linear() {
        let e = build_encoding(&two_point_swap_relation());
        let mch = forward_reduce(&one_constraint(1), &e).unwrap();
        // Two Q_∅ copies of 9 vertices; two Q_{i} of 7 vertices each sharing
        // ι with a copy and τ with the apex.
        assert_eq!(mch.graph.vertex_count(), 2 * 9 + 1 + 2 * 5);
        assert_eq!(mch.weights.len(), 1);
    }

    #[test]
    fn fault_drops_one_edge() {
        let e = build_encoding(&two_point_swap_relation());
        let good = forward_reduce(&one_constraint(1), &e).unwrap();
        let bad = forward_reduce_with(&one_constraint(1), &e, Fault::DropGadgetEdge).unwrap();
        assert_eq!(good.graph.edge_count(), bad.graph.edge_count() + 1);
    }

    #[test]
    fn wrong_arity_is_rejected() {
        let e = build_encoding(&two_point_swap_relation());
        let mut inst = VcspInstance::new(vec!["x".into()]);
        inst.add("rho", vec![0], int(1));
        assert!(forward_reduce(&inst, &e).is_err());
    }
}
