use std::collections::BTreeSet;

use super::{compute_levels, Digraph, LeveledDigraph};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BlockKind {
    /// `•→•`
    Edge,
    /// `•→•←•→•`
    Zigzag,
}

/// Positions `start..=end` of one block along a path. Block 0 and block
/// `n + 1` are the bracketing single edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockSpan {
    pub index: usize,
    pub kind: BlockKind,
    pub start: usize,
    pub end: usize,
}

/// The oriented path `Q_S` of height `n + 2`: a single edge, then for each
/// `l = 1..=n` a single edge if `l ∈ S` or a zigzag otherwise, then a single
/// edge. Vertex `i` of [`QPath::graph`] is the `i`-th vertex from `ι`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QPath {
    pub n: usize,
    pub set: BTreeSet<usize>,
    pub graph: Digraph,
    pub levels: Vec<usize>,
    pub blocks: Vec<BlockSpan>,
    /// `(block, k)` label of each position; `ι` is `(0, 0)`.
    pub labels: Vec<(usize, usize)>,
}

impl QPath {
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn iota(&self) -> usize {
        0
    }

    pub fn tau(&self) -> usize {
        self.len() - 1
    }

    pub fn height(&self) -> usize {
        self.n + 2
    }

    pub fn block(&self, l: usize) -> &BlockSpan {
        &self.blocks[l]
    }

    /// Blocks `1..=n` whose span contains `pos`; boundary vertices lie in two.
    pub fn inner_blocks_containing(&self, pos: usize) -> impl Iterator<Item = usize> + '_ {
        self.blocks[1..=self.n].iter().filter(move |b| b.start <= pos && pos <= b.end).map(|b| b.index)
    }

    pub fn positions_at(&self, level: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&p| self.levels[p] == level)
    }

    pub fn leveled(&self) -> LeveledDigraph {
        compute_levels(&self.graph).expect("Q_S is balanced")
    }
}

/// Orientation of each step along `Q_S` (`true` = forward edge), block spans
/// and `(block, k)` labels.
pub(crate) fn q_shape(n: usize, set: &BTreeSet<usize>) -> (Vec<bool>, Vec<BlockSpan>, Vec<(usize, usize)>) {
    let mut steps = vec![true];
    let mut labels = vec![(0, 0), (0, 1)];
    let mut blocks = vec![BlockSpan { index: 0, kind: BlockKind::Edge, start: 0, end: 1 }];
    for l in 1..=n {
        let start = steps.len();
        let kind = if set.contains(&l) {
            steps.push(true);
            labels.push((l, 1));
            BlockKind::Edge
        } else {
            steps.extend([true, false, true]);
            labels.extend([(l, 1), (l, 2), (l, 3)]);
            BlockKind::Zigzag
        };
        blocks.push(BlockSpan { index: l, kind, start, end: steps.len() });
    }
    let start = steps.len();
    steps.push(true);
    labels.push((n + 1, 1));
    blocks.push(BlockSpan { index: n + 1, kind: BlockKind::Edge, start, end: start + 1 });
    (steps, blocks, labels)
}

pub(crate) fn levels_of_steps(steps: &[bool]) -> Vec<usize> {
    let mut lv = vec![0i64];
    for &f in steps {
        let last = *lv.last().unwrap();
        lv.push(if f { last + 1 } else { last - 1 });
    }
    lv.into_iter().map(|l| l as usize).collect()
}

/// Builds `Q_S` with vertices named `q{l}/{k}`.
pub fn build_q_s(n: usize, set: &BTreeSet<usize>) -> Result<QPath> {
    if let Some(bad) = set.iter().find(|&&l| l == 0 || l > n) {
        return Err(Error::Structure(format!("S contains {bad}, outside 1..={n}")));
    }
    let (steps, blocks, labels) = q_shape(n, set);
    let mut graph = Digraph::new();
    for &(l, k) in &labels {
        graph.add_vertex(format!("q{l}/{k}"));
    }
    for (i, &fwd) in steps.iter().enumerate() {
        if fwd {
            graph.add_edge(i, i + 1);
        } else {
            graph.add_edge(i + 1, i);
        }
    }
    Ok(QPath { n, set: set.clone(), graph, levels: levels_of_steps(&steps), blocks, labels })
}
