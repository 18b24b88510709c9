use proptest::prelude::*;

use vcsp_mch::algebra::{submodularity_wos, Operation, WeightedOperationSet};
use vcsp_mch::cost::int;
use vcsp_mch::digraph::{fan_min_cost, FanOutcome};
use vcsp_mch::encoding::{expected_size, verify_encoding};
use vcsp_mch::gen::{random_fan_instance, random_instance, random_mch_instance, random_relation, rng, RelationShape};
use vcsp_mch::io::{
    encoding_from_json, encoding_to_json, instance_from_json, instance_to_json, mch_from_json, mch_to_json, parse_json,
    structure_from_json, structure_to_json, to_pretty, wos_from_json, wos_to_json,
};
use vcsp_mch::oracle::{brute_force_mch, brute_force_vcsp, SearchBudget};
use vcsp_mch::reduce::{forward_reduce, MinCostHomInstance};
use vcsp_mch::{build_encoding, ExtCost, WeightedStructure};

fn reparse(v: &serde_json::Value) -> serde_json::Value {
    parse_json(&to_pretty(v)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn encodings_satisfy_their_invariants(seed in any::<u64>()) {
        let rho = random_relation(&mut rng(seed), RelationShape::CORPUS);
        let e = build_encoding(&rho);
        verify_encoding(&e).unwrap();
        let (v, ed) = expected_size(rho.arity(), rho.domain().len(), rho.len());
        prop_assert_eq!(e.vertex_count(), v);
        prop_assert_eq!(e.digraph().edge_count(), ed);
        // u is the relation's weight on tuple vertices and zero elsewhere.
        for (x, ux) in e.u.iter().enumerate() {
            let want = if e.is_tuple(x) {
                rho.get(&e.tuples[(0..e.tuples.len()).find(|&r| e.tuple_vertex(r) == x).unwrap()]).cloned().unwrap()
            } else {
                int(0)
            };
            prop_assert_eq!(ux, &want);
        }
    }

    #[test]
    fn structure_and_instance_survive_json(seed in any::<u64>()) {
        let mut r = rng(seed);
        let ws = WeightedStructure::single("rho", random_relation(&mut r, RelationShape::CORPUS));
        let inst = random_instance(&mut r, &ws, 5, 4);
        let back = structure_from_json(&reparse(&structure_to_json(&ws))).unwrap();
        prop_assert_eq!(&back, &ws);
        let inst_back = instance_from_json(&reparse(&instance_to_json(&inst)), "instance").unwrap();
        prop_assert_eq!(
            brute_force_vcsp(&inst_back, &ws, &SearchBudget::default()).unwrap().0,
            brute_force_vcsp(&inst, &ws, &SearchBudget::default()).unwrap().0
        );
        prop_assert_eq!(instance_to_json(&inst_back), instance_to_json(&inst));
    }

    #[test]
    fn encodings_and_mch_inputs_survive_json(seed in any::<u64>()) {
        let mut r = rng(seed);
        let rho = random_relation(&mut r, RelationShape::FORWARD);
        let e = build_encoding(&rho);
        let (back, name) = encoding_from_json(&reparse(&encoding_to_json(&e, "rho", None))).unwrap();
        prop_assert_eq!(name, "rho");
        prop_assert_eq!(back.digraph(), e.digraph());
        prop_assert_eq!(&back.u, &e.u);
        let m = random_mch_instance(&mut r, &e, 20);
        let m_back: MinCostHomInstance = mch_from_json(&reparse(&mch_to_json(&m))).unwrap();
        prop_assert_eq!(mch_to_json(&m_back), mch_to_json(&m));
    }

    #[test]
    fn forward_reduction_keeps_the_optimum(seed in any::<u64>()) {
        let mut r = rng(seed);
        let rho = random_relation(&mut r, RelationShape::FORWARD);
        let e = build_encoding(&rho);
        let ws = WeightedStructure::single("rho", rho);
        let inst = random_instance(&mut r, &ws, 3, 3);
        let m = forward_reduce(&inst, &e).unwrap();
        let budget = SearchBudget::default();
        let lhs = brute_force_vcsp(&inst, &ws, &budget).unwrap().0;
        let rhs = brute_force_mch(&m, e.digraph(), &e.u, &budget).unwrap().0;
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn fan_solver_matches_brute_force(seed in any::<u64>()) {
        let (fan, u, h, w) = random_fan_instance(&mut rng(seed), 9);
        let m = MinCostHomInstance { graph: h.graph.clone(), weights: w.clone() };
        let (oracle, _) = brute_force_mch(&m, &fan.graph.graph, &u, &SearchBudget::default()).unwrap();
        let got = match fan_min_cost(&h, &w, &fan, &u).unwrap() {
            FanOutcome::Optimum { cost, .. } => ExtCost::Finite(cost),
            FanOutcome::NoOptimisationImpact { .. } => ExtCost::zero(),
            FanOutcome::Infeasible => ExtCost::Infinite,
        };
        prop_assert_eq!(got, oracle);
    }
}

#[test]
fn weighted_operation_sets_survive_json() {
    let wos = submodularity_wos(3);
    let labels: Vec<String> = ["lo", "mid", "hi"].map(String::from).to_vec();
    let (back, back_labels) = wos_from_json(&reparse(&wos_to_json(&wos, &labels))).unwrap();
    assert_eq!(back, wos);
    assert_eq!(back_labels, labels);
}

#[test]
fn negative_weight_off_a_projection_is_rejected() {
    let max = Operation::from_fn(2, 2, |x| x[0].max(x[1]));
    let bad = WeightedOperationSet::new(vec![max, Operation::projection(2, 2, 0)], vec![int(-1), int(1)]);
    assert!(bad.is_err());
}
