use super::Counter;
use crate::digraph::{compute_levels, Digraph};
use crate::Result;

/// Homomorphism search `x → a` with arc consistency maintained at every node.
pub(crate) struct HomSearch<'a> {
    x: &'a Digraph,
    a: &'a Digraph,
    edges: Vec<(usize, usize)>,
    incident: Vec<Vec<usize>>,
}

pub(crate) type Domains = Vec<Vec<bool>>;

impl<'a> HomSearch<'a> {
    pub fn new(x: &'a Digraph, a: &'a Digraph) -> Self {
        let edges: Vec<(usize, usize)> = x.edges().collect();
        let mut incident = vec![Vec::new(); x.vertex_count()];
        for (i, &(p, q)) in edges.iter().enumerate() {
            incident[p].push(i);
            if q != p {
                incident[q].push(i);
            }
        }
        HomSearch { x, a, edges, incident }
    }

    pub fn full_domains(&self) -> Domains {
        vec![vec![true; self.a.vertex_count()]; self.x.vertex_count()]
    }

    /// AC-3 over all edges; false on a wipe-out.
    fn propagate(&self, dom: &mut Domains, start: impl Iterator<Item = usize>) -> bool {
        let na = self.a.vertex_count();
        let mut queued = vec![false; self.edges.len()];
        let mut queue = std::collections::VecDeque::new();
        for e in start {
            if !queued[e] {
                queued[e] = true;
                queue.push_back(e);
            }
        }
        while let Some(e) = queue.pop_front() {
            queued[e] = false;
            let (p, q) = self.edges[e];
            let mut changed: Vec<usize> = Vec::new();
            for s in 0..na {
                if dom[p][s] && !self.a.out_neighbors(s).iter().any(|&t| dom[q][t]) {
                    dom[p][s] = false;
                    if !changed.contains(&p) {
                        changed.push(p);
                    }
                }
            }
            for t in 0..na {
                if dom[q][t] && !self.a.in_neighbors(t).iter().any(|&s| dom[p][s]) {
                    dom[q][t] = false;
                    if !changed.contains(&q) {
                        changed.push(q);
                    }
                }
            }
            for v in changed {
                if !dom[v].iter().any(|&b| b) {
                    return false;
                }
                for &f in &self.incident[v] {
                    if !queued[f] {
                        queued[f] = true;
                        queue.push_back(f);
                    }
                }
            }
        }
        true
    }

    /// Visits every homomorphism inside `dom` in lexicographic order until
    /// `visit` returns false. Returns whether the visit was stopped early.
    pub fn search(
        &self,
        mut dom: Domains,
        counter: &mut Counter,
        visit: &mut dyn FnMut(&[usize]) -> bool,
    ) -> Result<bool> {
        if dom.iter().any(|d| !d.iter().any(|&b| b)) {
            return Ok(false);
        }
        if !self.propagate(&mut dom, 0..self.edges.len()) {
            return Ok(false);
        }
        self.recurse(dom, counter, visit)
    }

    fn recurse(&self, dom: Domains, counter: &mut Counter, visit: &mut dyn FnMut(&[usize]) -> bool) -> Result<bool> {
        counter.tick()?;
        let branch = (0..dom.len()).find(|&v| dom[v].iter().filter(|&&b| b).count() > 1);
        let Some(v) = branch else {
            let hom: Vec<usize> = dom.iter().map(|d| d.iter().position(|&b| b).expect("non-empty")).collect();
            return Ok(!visit(&hom));
        };
        for s in 0..self.a.vertex_count() {
            if !dom[v][s] {
                continue;
            }
            let mut child = dom.clone();
            child[v].iter_mut().enumerate().for_each(|(t, b)| *b = t == s);
            if self.propagate(&mut child, self.incident[v].iter().copied()) && self.recurse(child, counter, visit)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Plain backtracking in index order, checking only edges between
    /// already assigned vertices. Shares nothing with the propagating search.
    pub fn search_unpruned(&self, counter: &mut Counter, visit: &mut dyn FnMut(&[usize]) -> bool) -> Result<bool> {
        let mut hom = Vec::with_capacity(self.x.vertex_count());
        self.plain(&mut hom, counter, visit)
    }

    fn plain(
        &self,
        hom: &mut Vec<usize>,
        counter: &mut Counter,
        visit: &mut dyn FnMut(&[usize]) -> bool,
    ) -> Result<bool> {
        counter.tick()?;
        let v = hom.len();
        if v == self.x.vertex_count() {
            return Ok(!visit(hom));
        }
        for s in 0..self.a.vertex_count() {
            let ok = self.incident[v].iter().all(|&e| {
                let (p, q) = self.edges[e];
                let img = |w: usize| {
                    if w == v {
                        Some(s)
                    } else if w < v {
                        Some(hom[w])
                    } else {
                        None
                    }
                };
                match (img(p), img(q)) {
                    (Some(i), Some(j)) => self.a.has_edge(i, j),
                    _ => true,
                }
            });
            if ok {
                hom.push(s);
                let stop = self.plain(hom, counter, visit)?;
                hom.pop();
                if stop {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }
}

/// Level-respecting candidate sets when both digraphs are balanced: a vertex
/// on level `l` of an `x`-component of height `h` can only reach a vertex on
/// level `l + off` of an `a`-component of height at least `h + off`.
pub(crate) fn level_domains(x: &Digraph, a: &Digraph) -> Option<Domains> {
    let lx = compute_levels(x).ok()?;
    let la = compute_levels(a).ok()?;
    Some(
        (0..x.vertex_count())
            .map(|v| {
                let lv = lx.levels[v];
                let hv = lx.component_height[lx.component_of[v]];
                (0..a.vertex_count())
                    .map(|s| {
                        let ls = la.levels[s];
                        let hs = la.component_height[la.component_of[s]];
                        ls >= lv && ls - lv + hv <= hs
                    })
                    .collect()
            })
            .collect(),
    )
}
