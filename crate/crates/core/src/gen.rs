//! Seeded random corpora. All generators draw from a caller-supplied
//! [`ChaCha8Rng`], so a seed fixes every corpus.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::{is_polymorphism, Operation};
use crate::cost::{int, rat, Rational};
use crate::digraph::{build_q_s, compute_levels, Apex, Digraph, Fan, LeveledDigraph};
use crate::encoding::EncodedDigraph;
use crate::reduce::MinCostHomInstance;
use crate::structure::{VcspInstance, WeightedRelation, WeightedStructure};

pub use rand::SeedableRng;
pub type Rng64 = ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Size limits for [`random_relation`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RelationShape {
    pub max_arity: usize,
    pub max_domain: usize,
    pub max_tuples: usize,
}

impl RelationShape {
    /// The encoding corpus: `n ≤ 3`, `|D| ≤ 3`, `|R| ≤ 5`.
    pub const CORPUS: RelationShape = RelationShape { max_arity: 3, max_domain: 3, max_tuples: 5 };
    /// Forward round trips: `n ≤ 2`, `|D| ≤ 3`, `|R| ≤ 4`.
    pub const FORWARD: RelationShape = RelationShape { max_arity: 2, max_domain: 3, max_tuples: 4 };
}

/// Small non-negative weights, including zero and a half.
pub fn random_weight(rng: &mut impl Rng) -> Rational {
    match rng.gen_range(0..5) {
        0 => int(0),
        1 => rat(1, 2),
        k => int(k as i64 - 1),
    }
}

pub fn random_relation(rng: &mut impl Rng, shape: RelationShape) -> WeightedRelation {
    let n = rng.gen_range(1..=shape.max_arity);
    let nd = rng.gen_range(2..=shape.max_domain.max(2));
    let domain: Vec<String> = (0..nd).map(|d| d.to_string()).collect();
    let total = nd.pow(n as u32);
    let k = rng.gen_range(1..=shape.max_tuples.min(total));
    let mut all: Vec<usize> = (0..total).collect();
    all.shuffle(rng);
    let entries = all[..k].iter().map(|&idx| {
        let mut t = vec![0; n];
        let mut r = idx;
        for c in t.iter_mut().rev() {
            *c = r % nd;
            r /= nd;
        }
        (t, random_weight(rng))
    });
    WeightedRelation::new(domain, n, entries.collect::<Vec<_>>()).expect("valid by construction")
}

/// A single-relation structure named `rho` with a random instance of at most
/// `max_vars` variables and `max_constraints` constraints.
pub fn random_instance(
    rng: &mut impl Rng,
    ws: &WeightedStructure,
    max_vars: usize,
    max_constraints: usize,
) -> VcspInstance {
    let nv = rng.gen_range(1..=max_vars);
    let mut inst = VcspInstance::new((0..nv).map(|i| format!("v{i}")).collect());
    for _ in 0..rng.gen_range(0..=max_constraints) {
        let (name, rho) = ws.relations().choose(rng).expect("non-empty structure");
        let scope = (0..rho.arity()).map(|_| rng.gen_range(0..nv)).collect();
        inst.add(name, scope, random_weight(rng));
    }
    inst
}

/// A random oriented tree on `nv` vertices; trees are always balanced.
pub fn random_tree(rng: &mut impl Rng, nv: usize, prefix: &str) -> Digraph {
    let mut g = Digraph::new();
    for i in 0..nv {
        g.add_vertex(format!("{prefix}{i}"));
    }
    for v in 1..nv {
        let p = rng.gen_range(0..v);
        if rng.gen_bool(0.5) {
            g.add_edge(p, v);
        } else {
            g.add_edge(v, p);
        }
    }
    g
}

/// A connected balanced digraph with at most `max_vertices` vertices and
/// height at most `max_height`: a random tree, sometimes with one extra edge
/// that keeps it balanced.
pub fn random_balanced_component(rng: &mut impl Rng, max_vertices: usize, max_height: usize) -> LeveledDigraph {
    loop {
        let nv = rng.gen_range(1..=max_vertices);
        let mut g = random_tree(rng, nv, "h");
        let l = compute_levels(&g).expect("trees are balanced");
        if l.height > max_height {
            continue;
        }
        if nv > 2 && rng.gen_bool(0.3) {
            let pairs: Vec<(usize, usize)> = (0..nv)
                .flat_map(|a| (0..nv).map(move |b| (a, b)))
                .filter(|&(a, b)| l.levels[b] == l.levels[a] + 1 && !g.has_edge(a, b))
                .collect();
            if let Some(&(a, b)) = pairs.choose(rng) {
                g.add_edge(a, b);
            }
        }
        return compute_levels(&g).expect("level-respecting edge keeps balance");
    }
}

/// A contiguous stretch of one path of `𝔇`, with vertex names prefixed, and
/// whether it starts at the path's base.
pub fn random_sub_path(rng: &mut impl Rng, e: &EncodedDigraph, prefix: &str) -> (Digraph, bool) {
    let nd = e.domain().len();
    let d = rng.gen_range(0..nd);
    let r = rng.gen_range(0..e.tuples.len());
    let path = e.path(d, r);
    let a = rng.gen_range(0..path.len());
    let b = rng.gen_range(a..path.len());
    let g = e.digraph();
    let keep: BTreeSet<usize> = path[a..=b].iter().copied().collect();
    let names: Vec<String> = path[a..=b].iter().map(|&v| format!("{prefix}{}", g.name(v))).collect();
    let edges = g
        .edges()
        .filter(|(x, y)| keep.contains(x) && keep.contains(y))
        .map(|(x, y)| (format!("{prefix}{}", g.name(x)), format!("{prefix}{}", g.name(y))));
    (Digraph::from_names(names, edges.collect::<Vec<_>>()).expect("sub-path of a simple path"), a == 0)
}

fn copy_into(g: &mut Digraph, piece: &Digraph) -> Vec<usize> {
    let map: Vec<usize> = piece.names().iter().map(|n| g.add_vertex(n.clone())).collect();
    for (a, b) in piece.edges() {
        g.add_edge(map[a], map[b]);
    }
    map
}

/// An input for the backward reduction over `e` with at most `max_vertices`
/// vertices: constraint gadgets (a fresh apex with paths `Q_{i}` from
/// shared root vertices), copies of `Q_∅` on the roots, stretches of paths
/// of `𝔇`, and small oriented trees, with random weights.
pub fn random_mch_instance(rng: &mut impl Rng, e: &EncodedDigraph, max_vertices: usize) -> MinCostHomInstance {
    let n = e.n();
    let mut g = Digraph::new();
    let roots: Vec<usize> = (0..rng.gen_range(1..=n.max(2))).map(|i| g.add_vertex(format!("x{i}"))).collect();
    let pieces = rng.gen_range(1..=4);
    let q_single: Vec<_> = (1..=n).map(|i| build_q_s(n, &BTreeSet::from([i])).expect("valid n")).collect();
    let q_empty = build_q_s(n, &BTreeSet::new()).expect("valid n");
    let gadget_size: usize = q_single.iter().map(|q| q.len() - 2).sum::<usize>() + 1;
    let mut apexes = Vec::new();
    for c in 0..pieces {
        let room = max_vertices.saturating_sub(g.vertex_count());
        match rng.gen_range(0..7) {
            0..=2 if room >= gadget_size => {
                let apex = g.add_vertex(format!("y{c}"));
                apexes.push(apex);
                for (i, q) in q_single.iter().enumerate() {
                    let root = *roots.choose(rng).expect("at least one root");
                    let map: Vec<usize> = (0..q.len())
                        .map(|p| match p {
                            0 => root,
                            p if p == q.tau() => apex,
                            p => g.add_vertex(format!("g{c}.{}/{}", i + 1, q.graph.name(p))),
                        })
                        .collect();
                    for (a, b) in q.graph.edges() {
                        g.add_edge(map[a], map[b]);
                    }
                }
            }
            3 if room >= q_empty.len() - 1 => {
                let root = *roots.choose(rng).expect("at least one root");
                let map: Vec<usize> = (0..q_empty.len())
                    .map(|p| if p == 0 { root } else { g.add_vertex(format!("e{c}/{}", q_empty.graph.name(p))) })
                    .collect();
                for (a, b) in q_empty.graph.edges() {
                    g.add_edge(map[a], map[b]);
                }
            }
            4 | 5 => {
                let (piece, from_base) = random_sub_path(rng, e, &format!("s{c}:"));
                // A stretch starting at a base may hang off a shared root.
                let glue = from_base && rng.gen_bool(0.5);
                if piece.vertex_count() - usize::from(glue) <= room {
                    if glue {
                        let root = *roots.choose(rng).expect("at least one root");
                        let map: Vec<usize> = (0..piece.vertex_count())
                            .map(|p| if p == 0 { root } else { g.add_vertex(piece.name(p).to_string()) })
                            .collect();
                        for (a, b) in piece.edges() {
                            g.add_edge(map[a], map[b]);
                        }
                    } else {
                        copy_into(&mut g, &piece);
                    }
                }
            }
            _ => {
                let nv = rng.gen_range(1..=room.clamp(1, 6));
                if nv <= room {
                    copy_into(&mut g, &random_tree(rng, nv, &format!("t{c}.")));
                }
            }
        }
    }
    let nv = g.vertex_count();
    let mut weights = BTreeMap::new();
    for &a in &apexes {
        if rng.gen_bool(0.8) {
            weights.insert(a, random_weight(rng));
        }
    }
    for _ in 0..rng.gen_range(0..=2) {
        let v = rng.gen_range(0..nv);
        weights.insert(v, random_weight(rng));
    }
    // Weights at the top levels are the ones that can meet the support of u.
    if let Ok(l) = compute_levels(&g) {
        for v in (0..nv).filter(|&v| l.levels[v] == l.component_height[l.component_of[v]]) {
            if rng.gen_bool(0.3) {
                weights.insert(v, random_weight(rng));
            }
        }
    }
    MinCostHomInstance { graph: g, weights }
}

/// A fan of at most three paths over `n ≤ 2`, a connected input below its
/// height with at most `max_vertices` vertices, weights on the input, and
/// `u` supported on the fan's top level.
///
/// Most inputs are connected pieces of the fan itself, which reach the top
/// level and so carry cost; the rest are random components, which are often
/// infeasible.
pub fn random_fan_instance(
    rng: &mut impl Rng,
    max_vertices: usize,
) -> (Fan, Vec<Rational>, LeveledDigraph, BTreeMap<usize, Rational>) {
    let n = rng.gen_range(1..=2);
    let apex = if rng.gen_bool(0.5) { Apex::Initial } else { Apex::Terminal };
    let k = rng.gen_range(1..=3);
    let paths = (0..k)
        .map(|_| {
            // Without Q_[n] in the fan, tall inputs cannot always fold down.
            let set: BTreeSet<usize> = (1..=n).filter(|_| rng.gen_bool(0.3)).collect();
            build_q_s(n, &set).expect("valid n")
        })
        .collect();
    let fan = Fan::new(apex, paths).expect("paths share n");
    let m = fan.height();
    let u: Vec<Rational> = (0..fan.vertex_count())
        .map(|v| if fan.graph.levels[v] == m { int(rng.gen_range(0..4)) } else { int(0) })
        .collect();
    let h = if rng.gen_bool(0.6) {
        random_fan_piece(rng, &fan, max_vertices)
    } else {
        loop {
            let h = random_balanced_component(rng, max_vertices, m - 1);
            if h.height + 1 == m || rng.gen_bool(0.2) {
                break h;
            }
        }
    };
    let mut w = BTreeMap::new();
    for v in 0..h.graph.vertex_count() {
        if rng.gen_bool(0.5) {
            w.insert(v, random_weight(rng));
        }
    }
    (fan, u, h, w)
}

/// A connected induced subgraph of the fan grown from a random vertex,
/// strictly shorter than the fan and usually exactly one level shorter, so
/// that it has little room to slide away from the top.
fn random_fan_piece(rng: &mut impl Rng, fan: &Fan, max_vertices: usize) -> LeveledDigraph {
    let g = &fan.graph.graph;
    let tallest = rng.gen_bool(0.7);
    loop {
        let size = rng.gen_range(1..=max_vertices.max(1));
        let mut keep = vec![rng.gen_range(0..g.vertex_count())];
        while keep.len() < size {
            let frontier: Vec<usize> =
                keep.iter().flat_map(|&v| g.neighbors(v)).filter(|w| !keep.contains(w)).collect();
            let Some(&w) = frontier.choose(rng) else { break };
            keep.push(w);
        }
        keep.sort_unstable();
        let (sub, _) = g.induced(&keep);
        let piece = compute_levels(&sub).expect("subgraph of a balanced digraph is balanced");
        if piece.height < fan.height() && (!tallest || piece.height + 1 == fan.height()) {
            return piece;
        }
    }
}

/// A random relation together with an idempotent commutative binary
/// polymorphism of it, picked uniformly among all such operations.
pub fn random_commutative_polymorphism(rng: &mut impl Rng, shape: RelationShape) -> (WeightedRelation, Operation) {
    loop {
        let rho = random_relation(rng, shape);
        let nd = rho.domain().len();
        let pairs: Vec<(usize, usize)> = (0..nd).flat_map(|a| (a + 1..nd).map(move |b| (a, b))).collect();
        let mut found = Vec::new();
        for code in 0..nd.pow(pairs.len() as u32) {
            let mut choice = BTreeMap::new();
            let mut c = code;
            for &p in &pairs {
                choice.insert(p, c % nd);
                c /= nd;
            }
            let f =
                Operation::from_fn(
                    2,
                    nd,
                    |x| {
                        if x[0] == x[1] {
                            x[0]
                        } else {
                            choice[&(x[0].min(x[1]), x[0].max(x[1]))]
                        }
                    },
                );
            if is_polymorphism(&f, &rho) {
                found.push(f);
            }
        }
        if let Some(f) = found.choose(rng) {
            return (rho, f.clone());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::build_encoding;

    #[test]
    fn same_seed_same_relation() {
        let a = random_relation(&mut rng(5), RelationShape::CORPUS);
        let b = random_relation(&mut rng(5), RelationShape::CORPUS);
        assert_eq!(a, b);
    }

    #[test]
    fn relations_respect_shape() {
        let mut r = rng(1);
        for _ in 0..200 {
            let rho = random_relation(&mut r, RelationShape::CORPUS);
            assert!(rho.arity() <= 3 && rho.domain().len() <= 3 && rho.len() <= 5);
        }
    }

    #[test]
    fn mch_instances_fit() {
        let e = build_encoding(&crate::structure::two_point_swap_relation());
        let mut r = rng(2);
        for _ in 0..100 {
            let m = random_mch_instance(&mut r, &e, 30);
            assert!(m.graph.vertex_count() <= 30, "{}", m.graph.vertex_count());
        }
    }

    #[test]
    fn components_are_connected_and_short() {
        let mut r = rng(3);
        for _ in 0..100 {
            let h = random_balanced_component(&mut r, 12, 4);
            assert!(h.is_connected() && h.height <= 4 && h.graph.vertex_count() <= 12);
        }
    }

    #[test]
    fn commutative_polymorphisms_are_commutative() {
        let mut r = rng(4);
        for _ in 0..10 {
            let (rho, f) = random_commutative_polymorphism(&mut r, RelationShape::CORPUS);
            assert!(is_polymorphism(&f, &rho));
            for a in 0..f.size() {
                assert_eq!(f.apply(&[a, a]), a);
                for b in 0..f.size() {
                    assert_eq!(f.apply(&[a, b]), f.apply(&[b, a]));
                }
            }
        }
    }
}
