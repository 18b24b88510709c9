//! Digraphs, leveling of balanced digraphs, the oriented paths `Q_S`, and
//! the polynomial solvers for path and fan targets.

mod components;
mod fan;
mod path;
mod sat;

pub use components::{internal_components, InternalComponent};
pub use fan::{fan_min_cost, Apex, Fan, FanOutcome};
pub use path::{build_q_s, BlockKind, BlockSpan, QPath};
pub use sat::{ac_min_solve, gamma, path_csp_satisfiable, Endpoint};

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::{Error, Result};

/// A finite digraph with named vertices and set semantics on edges.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Digraph {
    names: Vec<String>,
    index: HashMap<String, usize>,
    edges: BTreeSet<(usize, usize)>,
    out: Vec<Vec<usize>>,
    inn: Vec<Vec<usize>>,
}

impl Digraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_names(
        vertices: impl IntoIterator<Item = String>,
        edges: impl IntoIterator<Item = (String, String)>,
    ) -> Result<Self> {
        let mut g = Digraph::new();
        for v in vertices {
            if g.index.contains_key(&v) {
                return Err(Error::Structure(format!("duplicate vertex {v:?}")));
            }
            g.add_vertex(v);
        }
        for (a, b) in edges {
            let ia = g.lookup(&a)?;
            let ib = g.lookup(&b)?;
            g.add_edge(ia, ib);
        }
        Ok(g)
    }

    fn lookup(&self, name: &str) -> Result<usize> {
        self.index.get(name).copied().ok_or_else(|| Error::Structure(format!("edge endpoint {name:?} is not a vertex")))
    }

    /// Adds a vertex, returning the existing index if the name is taken.
    pub fn add_vertex(&mut self, name: impl Into<String>) -> usize {
        let name = name.into();
        if let Some(&i) = self.index.get(&name) {
            return i;
        }
        let i = self.names.len();
        self.index.insert(name.clone(), i);
        self.names.push(name);
        self.out.push(Vec::new());
        self.inn.push(Vec::new());
        i
    }

    pub fn add_edge(&mut self, a: usize, b: usize) -> bool {
        if !self.edges.insert((a, b)) {
            return false;
        }
        self.out[a].push(b);
        self.inn[b].push(a);
        true
    }

    pub fn remove_edge(&mut self, a: usize, b: usize) -> bool {
        if !self.edges.remove(&(a, b)) {
            return false;
        }
        self.out[a].retain(|&x| x != b);
        self.inn[b].retain(|&x| x != a);
        true
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a, b))
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn out_neighbors(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    pub fn in_neighbors(&self, v: usize) -> &[usize] {
        &self.inn[v]
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.out[v].iter().chain(self.inn[v].iter()).copied()
    }

    /// Weakly connected components, each sorted, ordered by smallest vertex.
    pub fn weak_components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.vertex_count()];
        let mut comps = Vec::new();
        for s in 0..self.vertex_count() {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut queue = VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                for w in self.neighbors(v) {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                        queue.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    /// The induced subgraph on `keep` (in the given order) and the map from
    /// new indices back to old ones.
    pub fn induced(&self, keep: &[usize]) -> (Digraph, Vec<usize>) {
        let mut g = Digraph::new();
        let mut local = HashMap::new();
        for &v in keep {
            local.insert(v, g.add_vertex(self.names[v].clone()));
        }
        for &v in keep {
            for &w in &self.out[v] {
                if let Some(&lw) = local.get(&w) {
                    g.add_edge(local[&v], lw);
                }
            }
        }
        (g, keep.to_vec())
    }

    /// Disjoint union; vertices of `other` are renamed with `prefix`.
    pub fn append(&mut self, other: &Digraph, prefix: &str) -> Vec<usize> {
        let map: Vec<usize> = other.names.iter().map(|n| self.add_vertex(format!("{prefix}{n}"))).collect();
        for (a, b) in other.edges() {
            self.add_edge(map[a], map[b]);
        }
        map
    }
}

/// A balanced digraph with its level function.
///
/// Every weakly connected component is leveled independently with minimum
/// level 0, so `lvl(b) = lvl(a) + 1` for every edge `(a, b)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeveledDigraph {
    pub graph: Digraph,
    pub levels: Vec<usize>,
    pub component_of: Vec<usize>,
    pub components: Vec<Vec<usize>>,
    pub component_height: Vec<usize>,
    pub height: usize,
}

impl LeveledDigraph {
    pub fn level(&self, v: usize) -> usize {
        self.levels[v]
    }

    pub fn is_connected(&self) -> bool {
        self.components.len() <= 1
    }

    /// Number of vertices on each level, from level 0 up.
    pub fn level_profile(&self) -> Vec<usize> {
        let mut prof = vec![0; self.height + 1];
        if self.graph.vertex_count() == 0 {
            return Vec::new();
        }
        for &l in &self.levels {
            prof[l] += 1;
        }
        prof
    }

    pub fn vertices_at(&self, level: usize) -> Vec<usize> {
        (0..self.levels.len()).filter(|&v| self.levels[v] == level).collect()
    }

    /// One component as a standalone leveled digraph plus the index map.
    pub fn component(&self, c: usize) -> (LeveledDigraph, Vec<usize>) {
        let (g, map) = self.graph.induced(&self.components[c]);
        let leveled = compute_levels(&g).expect("component of a balanced digraph is balanced");
        (leveled, map)
    }

    /// Re-checks the leveling; used by tests and encoding verification.
    pub fn check(&self) -> bool {
        self.graph.edges().all(|(a, b)| self.levels[b] == self.levels[a] + 1)
            && self.components.iter().all(|c| c.iter().any(|&v| self.levels[v] == 0))
    }
}

/// Levels every weakly connected component, or reports a closed walk of
/// non-zero net length.
pub fn compute_levels(g: &Digraph) -> Result<LeveledDigraph> {
    let n = g.vertex_count();
    if let Some((a, _)) = g.edges().find(|&(a, b)| a == b) {
        let name = g.name(a).to_string();
        return Err(Error::NotBalanced { witness: vec![name.clone(), name] });
    }
    let mut pot: Vec<Option<i64>> = vec![None; n];
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut component_of = vec![usize::MAX; n];
    let mut components = Vec::new();
    for root in 0..n {
        if pot[root].is_some() {
            continue;
        }
        let cid = components.len();
        pot[root] = Some(0);
        component_of[root] = cid;
        let mut comp = vec![root];
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            let pv = pot[v].unwrap();
            let steps = g.out[v].iter().map(|&w| (w, 1)).chain(g.inn[v].iter().map(|&w| (w, -1)));
            for (w, d) in steps {
                match pot[w] {
                    None => {
                        pot[w] = Some(pv + d);
                        parent[w] = Some(v);
                        component_of[w] = cid;
                        comp.push(w);
                        queue.push_back(w);
                    }
                    Some(pw) if pw != pv + d => {
                        return Err(Error::NotBalanced { witness: witness_walk(g, &parent, v, w) });
                    }
                    Some(_) => {}
                }
            }
        }
        let min = comp.iter().map(|&v| pot[v].unwrap()).min().unwrap();
        for &v in &comp {
            pot[v] = Some(pot[v].unwrap() - min);
        }
        comp.sort_unstable();
        components.push(comp);
    }
    let levels: Vec<usize> = pot.into_iter().map(|p| p.unwrap() as usize).collect();
    let component_height: Vec<usize> =
        components.iter().map(|c| c.iter().map(|&v| levels[v]).max().unwrap_or(0)).collect();
    let height = component_height.iter().copied().max().unwrap_or(0);
    Ok(LeveledDigraph { graph: g.clone(), levels, component_of, components, component_height, height })
}

/// Closed walk root → … → v → w → … → root through the BFS tree.
fn witness_walk(g: &Digraph, parent: &[Option<usize>], v: usize, w: usize) -> Vec<String> {
    let chain = |mut x: usize| {
        let mut c = vec![x];
        while let Some(p) = parent[x] {
            c.push(p);
            x = p;
        }
        c
    };
    let mut to_v = chain(v);
    to_v.reverse();
    let from_w = chain(w);
    to_v.into_iter().chain(from_w).map(|x| g.name(x).to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn digraph(n: usize, edges: &[(usize, usize)]) -> Digraph {
        Digraph::from_names(
            (0..n).map(|i| format!("v{i}")),
            edges.iter().map(|&(a, b)| (format!("v{a}"), format!("v{b}"))),
        )
        .unwrap()
    }

    fn net_length(g: &Digraph, walk: &[String]) -> i64 {
        walk.windows(2)
            .map(|p| {
                let a = g.index_of(&p[0]).unwrap();
                let b = g.index_of(&p[1]).unwrap();
                if g.has_edge(a, b) {
                    1
                } else {
                    assert!(g.has_edge(b, a), "walk step is not an edge");
                    -1
                }
            })
            .sum()
    }

    #[test]
    fn single_vertex_is_balanced() {
        let l = compute_levels(&digraph(1, &[])).unwrap();
        assert_eq!(l.height, 0);
        assert_eq!(l.levels, vec![0]);
    }

    #[test]
    fn directed_triangle_is_not_balanced() {
        let g = digraph(3, &[(0, 1), (1, 2), (2, 0)]);
        match compute_levels(&g) {
            Err(Error::NotBalanced { witness }) => {
                assert_eq!(witness.first(), witness.last());
                assert_eq!(net_length(&g, &witness).abs(), 3);
            }
            other => panic!("expected NotBalanced, got {other:?}"),
        }
    }

    #[test]
    fn self_loop_is_not_balanced() {
        assert!(matches!(compute_levels(&digraph(1, &[(0, 0)])), Err(Error::NotBalanced { .. })));
    }

    #[test]
    fn unbalanced_oriented_cycle_witness() {
        // v0→v1→v2 against the shortcut v0→v2.
        let g = digraph(3, &[(0, 1), (1, 2), (0, 2)]);
        match compute_levels(&g) {
            Err(Error::NotBalanced { witness }) => assert_ne!(net_length(&g, &witness), 0),
            other => panic!("expected NotBalanced, got {other:?}"),
        }
    }

    #[test]
    fn components_level_independently() {
        let g = digraph(5, &[(1, 0), (2, 0), (3, 4)]);
        let l = compute_levels(&g).unwrap();
        assert_eq!(l.levels, vec![1, 0, 0, 0, 1]);
        assert_eq!(l.components.len(), 2);
        assert!(l.check());
        let again = compute_levels(&l.graph).unwrap();
        assert_eq!(again, l);
    }
}
