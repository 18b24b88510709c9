//! The digraph `𝔇` and unary cost `u` encoding a single weighted relation.
//!
//! Vertices are `D ∪ R` (levels `0` and `n + 2`), and every pair
//! `(d, r) ∈ D × R` is joined by its own copy of `Q_{i : d = r_i}`.

use std::collections::BTreeSet;

use crate::algebra::unary_polymorphisms_of_relation;
use crate::cost::Rational;
use crate::digraph::{build_q_s, compute_levels, Digraph, LeveledDigraph, QPath};
use crate::oracle::{find_homomorphism, SearchBudget};
use crate::structure::{Tuple, WeightedRelation};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Role {
    Base {
        d: usize,
    },
    Tuple {
        r: usize,
    },
    /// Interior vertex at position `pos` of the path for `(d, r)`, carrying
    /// the `(block, k)` label of that position in `Q_S`.
    Path {
        d: usize,
        r: usize,
        block: usize,
        k: usize,
        pos: usize,
    },
}

#[derive(Clone, Debug)]
pub struct EncodedDigraph {
    pub rho: WeightedRelation,
    /// `R` in canonical (lexicographic) order.
    pub tuples: Vec<Tuple>,
    pub graph: LeveledDigraph,
    pub roles: Vec<Role>,
    pub u: Vec<Rational>,
    /// Vertices of the path for `(d, r)` from `ι = d` to `τ = r`, indexed by
    /// [`EncodedDigraph::pair_index`].
    pub paths: Vec<Vec<usize>>,
}

impl EncodedDigraph {
    pub fn n(&self) -> usize {
        self.rho.arity()
    }

    /// Height of `𝔇`.
    pub fn m(&self) -> usize {
        self.n() + 2
    }

    pub fn domain(&self) -> &[String] {
        self.rho.domain()
    }

    pub fn digraph(&self) -> &Digraph {
        &self.graph.graph
    }

    pub fn vertex_count(&self) -> usize {
        self.roles.len()
    }

    pub fn base(&self, d: usize) -> usize {
        d
    }

    pub fn tuple_vertex(&self, r: usize) -> usize {
        self.domain().len() + r
    }

    pub fn pair_index(&self, d: usize, r: usize) -> usize {
        d * self.tuples.len() + r
    }

    pub fn path(&self, d: usize, r: usize) -> &[usize] {
        &self.paths[self.pair_index(d, r)]
    }

    pub fn path_set(&self, d: usize, r: usize) -> BTreeSet<usize> {
        let t = &self.tuples[r];
        (1..=self.n()).filter(|&i| t[i - 1] == d).collect()
    }

    pub fn path_spec(&self, d: usize, r: usize) -> QPath {
        build_q_s(self.n(), &self.path_set(d, r)).expect("S ⊆ 1..=n")
    }

    pub fn is_tuple(&self, v: usize) -> bool {
        matches!(self.roles[v], Role::Tuple { .. })
    }

    pub fn is_base(&self, v: usize) -> bool {
        matches!(self.roles[v], Role::Base { .. })
    }

    pub fn tuple_index(&self, t: &[usize]) -> Option<usize> {
        self.tuples.iter().position(|x| x.as_slice() == t)
    }

    /// Pairs `(d, r)` whose path contains `v`, in `(d, r)` order.
    pub fn pairs_containing(&self, v: usize) -> Vec<(usize, usize)> {
        match self.roles[v] {
            Role::Base { d } => (0..self.tuples.len()).map(|r| (d, r)).collect(),
            Role::Tuple { r } => (0..self.domain().len()).map(|d| (d, r)).collect(),
            Role::Path { d, r, .. } => vec![(d, r)],
        }
    }

    /// Position of `v` along the path for `(d, r)`.
    pub fn position_on(&self, v: usize, d: usize, r: usize) -> Option<usize> {
        self.path(d, r).iter().position(|&x| x == v)
    }

    pub fn tuple_label(&self, r: usize) -> String {
        self.rho.format_tuple(&self.tuples[r])
    }
}

/// Builds `(𝔇, u)` for `rho` with canonical vertex names: `b:d` for bases,
/// `t:(…)` for tuples and `p:d|(…)|l|k` for path interiors.
pub fn build_encoding(rho: &WeightedRelation) -> EncodedDigraph {
    let dom = rho.domain().to_vec();
    let tuples: Vec<Tuple> = rho.tuples().cloned().collect();
    let n = rho.arity();
    let mut g = Digraph::new();
    let mut roles = Vec::new();
    for (d, label) in dom.iter().enumerate() {
        g.add_vertex(format!("b:{label}"));
        roles.push(Role::Base { d });
    }
    for (r, t) in tuples.iter().enumerate() {
        g.add_vertex(format!("t:{}", rho.format_tuple(t)));
        roles.push(Role::Tuple { r });
    }
    let mut paths = Vec::with_capacity(dom.len() * tuples.len());
    for d in 0..dom.len() {
        for (r, t) in tuples.iter().enumerate() {
            let set: BTreeSet<usize> = (1..=n).filter(|&i| t[i - 1] == d).collect();
            let q = build_q_s(n, &set).expect("S ⊆ 1..=n");
            let tuple_str = rho.format_tuple(t);
            let vertices: Vec<usize> = (0..q.len())
                .map(|pos| {
                    if pos == q.iota() {
                        d
                    } else if pos == q.tau() {
                        dom.len() + r
                    } else {
                        let (block, k) = q.labels[pos];
                        roles.push(Role::Path { d, r, block, k, pos });
                        g.add_vertex(format!("p:{}|{tuple_str}|{block}|{k}", dom[d]))
                    }
                })
                .collect();
            for (a, b) in q.graph.edges() {
                g.add_edge(vertices[a], vertices[b]);
            }
            paths.push(vertices);
        }
    }
    let graph = compute_levels(&g).expect("encoding is balanced by construction");
    let u = (0..roles.len())
        .map(|v| match roles[v] {
            Role::Tuple { r } => rho.get(&tuples[r]).expect("tuple of R").clone(),
            _ => Rational::from_integer(0.into()),
        })
        .collect();
    EncodedDigraph { rho: rho.clone(), tuples, graph, roles, u, paths }
}

/// `(3n+1)|R||D| + (1−2n)|R| + |D|` vertices and `(3n+2)|R||D| − 2n|R|` edges.
pub fn expected_size(n: usize, nd: usize, nr: usize) -> (usize, usize) {
    let (n, nd, nr) = (n as i64, nd as i64, nr as i64);
    let v = (3 * n + 1) * nr * nd + (1 - 2 * n) * nr + nd;
    let e = (3 * n + 2) * nr * nd - 2 * n * nr;
    (v as usize, e as usize)
}

fn violation(msg: impl Into<String>) -> Error {
    Error::EncodingViolation(msg.into())
}

/// Checks every structural invariant of an encoding, reporting the first
/// violation; small encodings also get the rigidity biconditional.
pub fn verify_encoding(e: &EncodedDigraph) -> Result<()> {
    let g = e.digraph();
    let (n, nd, nr) = (e.n(), e.domain().len(), e.tuples.len());
    let m = e.m();
    if e.roles.len() != g.vertex_count() || e.u.len() != g.vertex_count() {
        return Err(violation("roles and u must cover every vertex"));
    }
    for d in 0..nd {
        for r in 0..nr {
            let q = e.path_spec(d, r);
            let path = e.path(d, r);
            if path.len() != q.len() || path[q.iota()] != e.base(d) || path[q.tau()] != e.tuple_vertex(r) {
                return Err(violation(format!(
                    "path for ({}, {}) has wrong endpoints",
                    e.domain()[d],
                    e.tuple_label(r)
                )));
            }
            for (a, b) in q.graph.edges() {
                if !g.has_edge(path[a], path[b]) {
                    return Err(violation(format!(
                        "path for ({}, {}) is missing edge {} → {}",
                        e.domain()[d],
                        e.tuple_label(r),
                        g.name(path[a]),
                        g.name(path[b])
                    )));
                }
            }
        }
    }
    let leveled = compute_levels(g).map_err(|err| violation(format!("not balanced: {err}")))?;
    if !leveled.is_connected() || leveled.height != m {
        return Err(violation(format!("expected one component of height {m}, got height {}", leveled.height)));
    }
    if leveled.levels != e.graph.levels {
        return Err(violation("stored levels are stale"));
    }
    for v in 0..g.vertex_count() {
        let lvl = leveled.levels[v];
        match e.roles[v] {
            Role::Base { .. } if lvl != 0 => return Err(violation(format!("base {} not on level 0", g.name(v)))),
            Role::Tuple { .. } if lvl != m => return Err(violation(format!("tuple {} not on level {m}", g.name(v)))),
            _ => {}
        }
    }
    let (ev, ee) = expected_size(n, nd, nr);
    if g.vertex_count() != ev || g.edge_count() != ee {
        return Err(violation(format!(
            "size ({}, {}) differs from formula ({ev}, {ee})",
            g.vertex_count(),
            g.edge_count()
        )));
    }
    for v in 0..g.vertex_count() {
        let expect = match e.roles[v] {
            Role::Tuple { r } => e.rho.get(&e.tuples[r]).cloned().unwrap_or_default(),
            _ => Rational::from_integer(0.into()),
        };
        if e.u[v] != expect {
            return Err(violation(format!("u({}) = {} but expected {expect}", g.name(v), e.u[v])));
        }
    }
    if nd <= 3 && g.vertex_count() <= 160 {
        is_rigid_core_pair(&e.rho, e, &SearchBudget::default())?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RigidityReport {
    pub structure_rigid: bool,
    pub digraph_rigid: bool,
    /// A non-identity unary polymorphism of `R` as a table over `D`.
    pub structure_witness: Option<Vec<usize>>,
    /// A non-identity endomorphism of `𝔇`.
    pub digraph_witness: Option<Vec<usize>>,
}

/// Rigidity of the relation and of its encoding, which must agree.
///
/// Non-identity endomorphisms of `𝔇` are searched for by forcing one base or
/// tuple vertex onto another vertex of its level: an endomorphism fixing all
/// of `D ∪ R` fixes every path as well, since each path is the only route
/// between its endpoints and no `Q_S` maps onto itself non-trivially with
/// both ends fixed.
pub fn is_rigid_core_pair(rho: &WeightedRelation, e: &EncodedDigraph, budget: &SearchBudget) -> Result<RigidityReport> {
    let nd = rho.domain().len();
    let identity: Vec<usize> = (0..nd).collect();
    let structure_witness =
        unary_polymorphisms_of_relation(rho, 1 << 20)?.into_iter().map(|op| op.unary_table()).find(|t| *t != identity);
    let g = e.digraph();
    let nv = g.vertex_count();
    let mut digraph_witness = None;
    let movable = (0..nd).map(|d| e.base(d)).chain((0..e.tuples.len()).map(|r| e.tuple_vertex(r)));
    'outer: for v in movable {
        for w in e.graph.vertices_at(e.graph.levels[v]) {
            if w == v {
                continue;
            }
            let allowed: Vec<Vec<bool>> = (0..nv).map(|x| (0..nv).map(|y| x != v || y == w).collect()).collect();
            if let Some(h) = find_homomorphism(g, g, Some(&allowed), budget)? {
                digraph_witness = Some(h);
                break 'outer;
            }
        }
    }
    let report = RigidityReport {
        structure_rigid: structure_witness.is_none(),
        digraph_rigid: digraph_witness.is_none(),
        structure_witness,
        digraph_witness,
    };
    if report.structure_rigid != report.digraph_rigid {
        return Err(Error::BiconditionalViolation { structure: report.structure_rigid, digraph: report.digraph_rigid });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::int;
    use crate::structure::two_point_swap_relation;

    #[test]
    fn running_example_sizes_and_profile() {
        let e = build_encoding(&two_point_swap_relation());
        assert_eq!(e.vertex_count(), 24);
        assert_eq!(e.digraph().edge_count(), 24);
        assert_eq!(e.graph.level_profile(), vec![2, 6, 8, 6, 2]);
        let u_of = |name: &str| e.u[e.digraph().index_of(name).unwrap()].clone();
        assert_eq!(u_of("t:(0,1)"), int(2));
        assert_eq!(u_of("t:(1,0)"), int(1));
        assert_eq!(e.u.iter().filter(|x| **x != int(0)).count(), 2);
        verify_encoding(&e).unwrap();
    }

    #[test]
    fn path_names_are_canonical() {
        let e = build_encoding(&two_point_swap_relation());
        assert!(e.digraph().index_of("b:0").is_some());
        assert!(e.digraph().index_of("p:0|(0,1)|0|1").is_some());
        // d = 0 agrees with (0,1) in coordinate 1 only: block 1 is an edge.
        assert!(e.digraph().index_of("p:0|(0,1)|1|1").is_some());
        assert!(e.digraph().index_of("p:0|(0,1)|2|3").is_some());
        assert!(e.digraph().index_of("p:0|(0,1)|1|2").is_none());
    }

    #[test]
    fn deleted_edge_is_detected() {
        let mut e = build_encoding(&two_point_swap_relation());
        let (a, b) = e.digraph().edges().nth(5).unwrap();
        e.graph.graph.remove_edge(a, b);
        assert!(matches!(verify_encoding(&e), Err(Error::EncodingViolation(_))));
    }

    #[test]
    fn widened_u_is_detected() {
        let mut e = build_encoding(&two_point_swap_relation());
        let v = e.roles.iter().position(|r| matches!(r, Role::Path { .. })).unwrap();
        e.u[v] = int(1);
        assert!(matches!(verify_encoding(&e), Err(Error::EncodingViolation(_))));
    }

    #[test]
    fn running_example_is_core_not_rigid() {
        let rho = two_point_swap_relation();
        let e = build_encoding(&rho);
        let rep = is_rigid_core_pair(&rho, &e, &SearchBudget::default()).unwrap();
        assert!(!rep.structure_rigid && !rep.digraph_rigid);
        assert_eq!(rep.structure_witness, Some(vec![1, 0]));
        let h = rep.digraph_witness.unwrap();
        assert_eq!(h[e.base(0)], e.base(1));
        assert_eq!(h[e.base(1)], e.base(0));
    }

    #[test]
    fn single_tuple_is_rigid() {
        let rho = WeightedRelation::from_labels(&["0", "1"], &[(&["0", "1"], int(1))]).unwrap();
        let e = build_encoding(&rho);
        let rep = is_rigid_core_pair(&rho, &e, &SearchBudget::default()).unwrap();
        assert!(rep.structure_rigid && rep.digraph_rigid);
    }
}
