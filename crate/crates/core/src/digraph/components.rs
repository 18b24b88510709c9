use std::collections::BTreeSet;

use super::{compute_levels, Digraph, Endpoint, LeveledDigraph};

/// A weakly connected component of `G` after deleting levels `0` and `m`,
/// with the deleted vertices it is adjacent to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InternalComponent {
    pub vertices: Vec<usize>,
    pub top_attachments: BTreeSet<usize>,
    pub base_attachments: BTreeSet<usize>,
}

/// Internal components of `g` relative to its overall height, ordered by
/// smallest vertex.
pub fn internal_components(g: &LeveledDigraph) -> Vec<InternalComponent> {
    let m = g.height;
    let inner: Vec<usize> = (0..g.graph.vertex_count()).filter(|&v| g.levels[v] > 0 && g.levels[v] < m).collect();
    let (sub, map) = g.graph.induced(&inner);
    sub.weak_components()
        .into_iter()
        .map(|comp| {
            let vertices: Vec<usize> = comp.iter().map(|&i| map[i]).collect();
            let mut top_attachments = BTreeSet::new();
            let mut base_attachments = BTreeSet::new();
            for &v in &vertices {
                for w in g.graph.neighbors(v) {
                    if g.levels[w] == m {
                        top_attachments.insert(w);
                    } else if g.levels[w] == 0 {
                        base_attachments.insert(w);
                    }
                }
            }
            InternalComponent { vertices, top_attachments, base_attachments }
        })
        .collect()
}

impl InternalComponent {
    /// The component together with its attachments, leveled as a standalone
    /// digraph, with base attachments pinned to `ι` and top attachments to
    /// `τ`. The third value maps local indices back to `g`.
    pub fn closure(&self, g: &LeveledDigraph) -> (LeveledDigraph, Vec<(usize, Endpoint)>, Vec<usize>) {
        let keep: Vec<usize> =
            self.base_attachments.iter().chain(&self.vertices).chain(&self.top_attachments).copied().collect();
        let (sub, map) = g.graph.induced(&keep);
        // Attachments only matter through their edges into the component.
        let mut graph = Digraph::new();
        for name in sub.names() {
            graph.add_vertex(name.clone());
        }
        let inner: BTreeSet<usize> =
            (self.base_attachments.len()..self.base_attachments.len() + self.vertices.len()).collect();
        for (a, b) in sub.edges() {
            if inner.contains(&a) || inner.contains(&b) {
                graph.add_edge(a, b);
            }
        }
        let leveled = compute_levels(&graph).expect("subgraph of a balanced digraph is balanced");
        let pins = (0..keep.len())
            .filter(|i| !inner.contains(i))
            .map(|i| {
                let end = if i < self.base_attachments.len() { Endpoint::Initial } else { Endpoint::Terminal };
                (i, end)
            })
            .collect();
        (leveled, pins, map)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::{build_q_s, gamma};

    #[test]
    fn path_interior_is_one_component() {
        let set: BTreeSet<usize> = [2].into();
        let q = build_q_s(2, &set).unwrap();
        let comps = internal_components(&q.leveled());
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].vertices.len(), q.len() - 2);
        assert_eq!(comps[0].base_attachments, [q.iota()].into());
        assert_eq!(comps[0].top_attachments, [q.tau()].into());
        let (cl, pins, _) = comps[0].closure(&q.leveled());
        assert_eq!(cl.graph.vertex_count(), q.len());
        assert_eq!(gamma(&cl, 2, &pins).unwrap(), set);
    }

    #[test]
    fn height_one_has_no_internal_components() {
        let g = Digraph::from_names(["a".into(), "b".into()], [("a".into(), "b".into())]).unwrap();
        assert!(internal_components(&compute_levels(&g).unwrap()).is_empty());
    }
}
