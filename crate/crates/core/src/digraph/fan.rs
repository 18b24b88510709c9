use std::collections::{BTreeMap, BTreeSet};

use super::sat::solve_at_offset;
use super::{compute_levels, Digraph, LeveledDigraph, QPath};
use crate::cost::Rational;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Apex {
    /// Paths share `ι`.
    Initial,
    /// Paths share `τ`.
    Terminal,
}

/// Paths `Q_{S_1} … Q_{S_l}` of a common `n` amalgamated at one endpoint.
#[derive(Clone, Debug)]
pub struct Fan {
    pub apex: Apex,
    pub paths: Vec<QPath>,
    pub graph: LeveledDigraph,
    pub apex_vertex: usize,
    /// `embed[i][p]` is the fan vertex at position `p` of path `i`.
    pub embed: Vec<Vec<usize>>,
}

impl Fan {
    pub fn new(apex: Apex, paths: Vec<QPath>) -> Result<Fan> {
        let Some(first) = paths.first() else {
            return Err(Error::Structure("a fan needs at least one path".into()));
        };
        if paths.iter().any(|q| q.n != first.n) {
            return Err(Error::Structure("fan paths must share n".into()));
        }
        let mut g = Digraph::new();
        let apex_vertex = g.add_vertex("v");
        let mut embed = Vec::with_capacity(paths.len());
        for (i, q) in paths.iter().enumerate() {
            let shared = if apex == Apex::Initial { q.iota() } else { q.tau() };
            let map: Vec<usize> = (0..q.len())
                .map(|p| if p == shared { apex_vertex } else { g.add_vertex(format!("f{i}:{}", q.graph.name(p))) })
                .collect();
            for (a, b) in q.graph.edges() {
                g.add_edge(map[a], map[b]);
            }
            embed.push(map);
        }
        let graph = compute_levels(&g)?;
        Ok(Fan { apex, paths, graph, apex_vertex, embed })
    }

    pub fn height(&self) -> usize {
        self.paths[0].height()
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.graph.vertex_count()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FanOutcome {
    Optimum {
        cost: Rational,
        hom: Vec<usize>,
    },
    /// Feasible, and some optimal solution costs nothing.
    NoOptimisationImpact {
        hom: Vec<usize>,
    },
    Infeasible,
}

/// Minimum of `Σ W(x)·u(hom(x))` over homomorphisms of the connected digraph
/// `h` into `fan`, for `h` strictly shorter than the fan.
///
/// Solutions inside a single path are found per path and level offset.
/// Solutions spreading over several paths must send the extreme level of `h`
/// to the apex; the remaining components are then placed independently with
/// their apex neighbours pinned next to the apex.
pub fn fan_min_cost(
    h: &LeveledDigraph,
    w: &BTreeMap<usize, Rational>,
    fan: &Fan,
    u: &[Rational],
) -> Result<FanOutcome> {
    let m = fan.height();
    if u.len() != fan.vertex_count() {
        return Err(Error::FanPrecondition("u must cover every fan vertex".into()));
    }
    if let Some(v) = (0..u.len()).find(|&v| u[v] != Rational::from_integer(0.into()) && fan.graph.levels[v] != m) {
        return Err(Error::FanPrecondition(format!(
            "u is non-zero below the top level at {}",
            fan.graph.graph.name(v)
        )));
    }
    if !h.is_connected() {
        return Err(Error::FanPrecondition("input must be connected".into()));
    }
    if h.height >= m && h.graph.vertex_count() > 0 {
        return Err(Error::FanPrecondition(format!("input height {} is not below {m}", h.height)));
    }
    let nh = h.graph.vertex_count();
    if nh == 0 {
        return Ok(FanOutcome::NoOptimisationImpact { hom: Vec::new() });
    }
    let weight_at =
        |lvl: usize| -> Rational { w.iter().filter(|(&v, _)| h.levels[v] == lvl).map(|(_, x)| x.clone()).sum() };
    let mut best: Option<(Rational, Vec<usize>)> = None;
    let mut offer = |cost: Rational, hom: Vec<usize>| {
        if best.as_ref().is_none_or(|(c, _)| cost < *c) {
            best = Some((cost, hom));
        }
    };

    for (i, q) in fan.paths.iter().enumerate() {
        for off in 0..=m - h.height {
            if let Some(pos) = solve_at_offset(&h.graph, &h.levels, q, off, |_, _| true) {
                let cost = if off + h.height == m {
                    weight_at(h.height) * &u[fan.embed[i][q.tau()]]
                } else {
                    Rational::from_integer(0.into())
                };
                offer(cost, pos.iter().map(|&p| fan.embed[i][p]).collect());
            }
        }
    }

    let (extreme, off) = match fan.apex {
        Apex::Terminal => (h.height, m - h.height),
        Apex::Initial => (0, 0),
    };
    if let Some(hom) = through_apex(h, fan, extreme, off) {
        let cost = if fan.apex == Apex::Terminal {
            weight_at(extreme) * &u[fan.apex_vertex]
        } else {
            Rational::from_integer(0.into())
        };
        offer(cost, hom);
    }

    Ok(match best {
        None => FanOutcome::Infeasible,
        Some((cost, hom)) if cost == Rational::from_integer(0.into()) => FanOutcome::NoOptimisationImpact { hom },
        Some((cost, hom)) => FanOutcome::Optimum { cost, hom },
    })
}

/// Sends every vertex on level `extreme` of `h` to the apex and places each
/// remaining component in some path.
fn through_apex(h: &LeveledDigraph, fan: &Fan, extreme: usize, off: usize) -> Option<Vec<usize>> {
    let nh = h.graph.vertex_count();
    let at_apex: BTreeSet<usize> = (0..nh).filter(|&v| h.levels[v] == extreme).collect();
    let mut hom = vec![usize::MAX; nh];
    for &v in &at_apex {
        hom[v] = fan.apex_vertex;
    }
    let rest: Vec<usize> = (0..nh).filter(|v| !at_apex.contains(v)).collect();
    let (sub, map) = h.graph.induced(&rest);
    for comp in sub.weak_components() {
        let (cg, cmap) = sub.induced(&comp);
        let verts: Vec<usize> = cmap.iter().map(|&i| map[i]).collect();
        let levels: Vec<usize> = verts.iter().map(|&v| h.levels[v]).collect();
        let touches: Vec<bool> = verts.iter().map(|&v| h.graph.neighbors(v).any(|x| at_apex.contains(&x))).collect();
        let placed = fan.paths.iter().enumerate().find_map(|(i, q)| {
            let (apex_pos, next) = match fan.apex {
                Apex::Terminal => (q.tau(), q.tau() - 1),
                Apex::Initial => (q.iota(), q.iota() + 1),
            };
            let allow = |v: usize, p: usize| p != apex_pos && (!touches[v] || p == next);
            solve_at_offset(&cg, &levels, q, off, allow).map(|pos| (i, pos))
        });
        let (i, pos) = placed?;
        for (k, &v) in verts.iter().enumerate() {
            hom[v] = fan.embed[i][pos[k]];
        }
    }
    Some(hom)
}
