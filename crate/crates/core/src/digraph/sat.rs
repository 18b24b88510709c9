use std::collections::{BTreeSet, VecDeque};

use super::{build_q_s, Digraph, LeveledDigraph, QPath};
use crate::{Error, Result};

/// Arc consistency over the edges of `h`, then each vertex takes the
/// lowest-`rank` value left in its domain.
///
/// Complete whenever the target's edge relation is closed under the
/// coordinatewise minimum for `rank` (true for `Q_S` ranked by level and
/// then by distance from `ι`): a non-empty arc-consistent domain set always
/// contains the pointwise-minimal homomorphism. Panics if the extracted map
/// is not a homomorphism, which can only happen when that closure fails.
pub fn ac_min_solve(h: &Digraph, target: &Digraph, rank: &[usize], domains: Vec<Vec<usize>>) -> Option<Vec<usize>> {
    let nt = target.vertex_count();
    let mut dom: Vec<Vec<bool>> = domains
        .iter()
        .map(|d| {
            let mut bits = vec![false; nt];
            for &x in d {
                bits[x] = true;
            }
            bits
        })
        .collect();
    let mut size: Vec<usize> = dom.iter().map(|d| d.iter().filter(|&&b| b).count()).collect();
    if size.contains(&0) {
        return None;
    }
    let edges: Vec<(usize, usize)> = h.edges().collect();
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); h.vertex_count()];
    for (i, &(a, b)) in edges.iter().enumerate() {
        incident[a].push(i);
        incident[b].push(i);
    }
    let mut queued = vec![true; edges.len()];
    let mut queue: VecDeque<usize> = (0..edges.len()).collect();
    while let Some(e) = queue.pop_front() {
        queued[e] = false;
        let (a, b) = edges[e];
        let mut changed = Vec::new();
        for x in 0..nt {
            if dom[a][x] && !target.out_neighbors(x).iter().any(|&y| dom[b][y]) {
                dom[a][x] = false;
                size[a] -= 1;
                if !changed.contains(&a) {
                    changed.push(a);
                }
            }
        }
        for y in 0..nt {
            if dom[b][y] && !target.in_neighbors(y).iter().any(|&x| dom[a][x]) {
                dom[b][y] = false;
                size[b] -= 1;
                if !changed.contains(&b) {
                    changed.push(b);
                }
            }
        }
        for v in changed {
            if size[v] == 0 {
                return None;
            }
            for &f in &incident[v] {
                if f != e && !queued[f] {
                    queued[f] = true;
                    queue.push_back(f);
                }
            }
        }
    }
    let hom: Vec<usize> = dom.iter().map(|d| (0..nt).filter(|&x| d[x]).min_by_key(|&x| rank[x]).unwrap()).collect();
    assert!(
        edges.iter().all(|&(a, b)| target.has_edge(hom[a], hom[b])),
        "minimum extraction produced a non-homomorphism; target is not min-closed under rank"
    );
    Some(hom)
}

/// `(level, distance from ι)` rank of path positions.
pub(crate) fn path_rank(q: &QPath) -> Vec<usize> {
    let mut order: Vec<usize> = (0..q.len()).collect();
    order.sort_by_key(|&p| (q.levels[p], p));
    let mut rank = vec![0; q.len()];
    for (r, &p) in order.iter().enumerate() {
        rank[p] = r;
    }
    rank
}

/// Solves `g → q` with vertex `v` placed on level `levels[v] + offset`;
/// `allow(v, p)` further restricts the candidate positions.
pub(crate) fn solve_at_offset(
    g: &Digraph,
    levels: &[usize],
    q: &QPath,
    offset: usize,
    allow: impl Fn(usize, usize) -> bool,
) -> Option<Vec<usize>> {
    let domains: Vec<Vec<usize>> =
        (0..g.vertex_count()).map(|v| q.positions_at(levels[v] + offset).filter(|&p| allow(v, p)).collect()).collect();
    ac_min_solve(g, &q.graph, &path_rank(q), domains)
}

/// Decides whether the connected balanced digraph `h` maps to the path `q`
/// with each `(vertex, position)` pin respected, and returns the pointwise
/// ⊑-minimal homomorphism when one exists.
pub fn path_csp_satisfiable(h: &LeveledDigraph, q: &QPath, pins: &[(usize, usize)]) -> Result<Option<Vec<usize>>> {
    if !h.is_connected() {
        return Err(Error::Structure("path satisfiability needs a connected input".into()));
    }
    if h.graph.vertex_count() == 0 {
        return Ok(Some(Vec::new()));
    }
    if h.height > q.height() {
        return Ok(None);
    }
    let offsets: Vec<usize> = match pins.first() {
        Some(&(v, p)) => {
            let off = q.levels[p] as i64 - h.levels[v] as i64;
            if off < 0 || off as usize + h.height > q.height() {
                return Ok(None);
            }
            vec![off as usize]
        }
        None => (0..=q.height() - h.height).collect(),
    };
    for off in offsets {
        let allow = |v: usize, p: usize| pins.iter().all(|&(pv, pp)| pv != v || pp == p);
        if let Some(hom) = solve_at_offset(&h.graph, &h.levels, q, off, allow) {
            return Ok(Some(hom));
        }
    }
    Ok(None)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Endpoint {
    Initial,
    Terminal,
}

fn resolve(q: &QPath, pins: &[(usize, Endpoint)]) -> Vec<(usize, usize)> {
    pins.iter().map(|&(v, e)| (v, if e == Endpoint::Initial { q.iota() } else { q.tau() })).collect()
}

/// `Γ(h)`: the inclusion-minimal `S ⊆ {1..n}` with `h` satisfiable in `Q_S`
/// (endpoint pins are carried into every `Q_S`).
///
/// Computed as `{ i : h ↛ Q_{[n]∖{i}} }` and then confirmed by checking
/// `h → Q_Γ`; a failed confirmation means the satisfiable sets are not
/// closed under intersection and is reported as `MonotonicityViolation`.
pub fn gamma(h: &LeveledDigraph, n: usize, pins: &[(usize, Endpoint)]) -> Result<BTreeSet<usize>> {
    let sat = |set: &BTreeSet<usize>| -> Result<bool> {
        let q = build_q_s(n, set)?;
        Ok(path_csp_satisfiable(h, &q, &resolve(&q, pins))?.is_some())
    };
    let full: BTreeSet<usize> = (1..=n).collect();
    if !sat(&full)? {
        return Err(Error::NotSatisfiableAnywhere);
    }
    let mut result = BTreeSet::new();
    for i in 1..=n {
        let mut without = full.clone();
        without.remove(&i);
        if !sat(&without)? {
            result.insert(i);
        }
    }
    if !sat(&result)? {
        return Err(Error::MonotonicityViolation(format!("leave-one-out set {result:?} is not satisfiable")));
    }
    Ok(result)
}
