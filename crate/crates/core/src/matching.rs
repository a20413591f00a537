//! Maximum-cardinality matching in general graphs (Edmonds' blossom method).

use std::collections::VecDeque;

const NONE: usize = usize::MAX;

/// Undirected simple graph on vertices `0..n`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
    edges: usize,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Graph { adj: vec![Vec::new(); n], edges: 0 }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = Graph::new(n);
        for &(u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    /// Adds `{u, v}`; self-loops and duplicates are ignored.
    pub fn add_edge(&mut self, u: usize, v: usize) {
        if u == v || self.adj[u].contains(&v) {
            return;
        }
        self.adj[u].push(v);
        self.adj[v].push(u);
        self.edges += 1;
    }

    /// Adds `{u, v}` without the duplicate check; callers guarantee each
    /// pair is offered once.
    pub(crate) fn push_edge_unchecked(&mut self, u: usize, v: usize) {
        self.adj[u].push(v);
        self.adj[v].push(u);
        self.edges += 1;
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].contains(&v)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matching {
    pub pairs: Vec<(usize, usize)>,
    /// Set when augmenting paths were searched exhaustively.
    pub maximum: bool,
}

impl Matching {
    pub fn size(&self) -> usize {
        self.pairs.len()
    }

    /// Pairs are edges of `g` and no vertex appears twice.
    pub fn is_valid_for(&self, g: &Graph) -> bool {
        let mut used = vec![false; g.vertex_count()];
        for &(u, v) in &self.pairs {
            if u >= used.len() || v >= used.len() || used[u] || used[v] || !g.has_edge(u, v) {
                return false;
            }
            used[u] = true;
            used[v] = true;
        }
        true
    }
}

fn greedy(g: &Graph, mate: &mut [usize]) {
    // lowest-degree vertices first leaves more room for the rest
    let mut order: Vec<usize> = (0..g.vertex_count()).collect();
    order.sort_by_key(|&v| (g.adj[v].len(), v));
    for v in order {
        if mate[v] != NONE {
            continue;
        }
        if let Some(&u) = g.adj[v].iter().filter(|&&u| mate[u] == NONE).min_by_key(|&&u| (g.adj[u].len(), u)) {
            mate[v] = u;
            mate[u] = v;
        }
    }
}

struct Blossom<'a> {
    g: &'a Graph,
    mate: Vec<usize>,
    parent: Vec<usize>,
    base: Vec<usize>,
    used: Vec<bool>,
    in_blossom: Vec<bool>,
    queue: VecDeque<usize>,
}

impl<'a> Blossom<'a> {
    fn lca(&self, mut a: usize, mut b: usize) -> usize {
        let mut seen = vec![false; self.g.vertex_count()];
        loop {
            a = self.base[a];
            seen[a] = true;
            if self.mate[a] == NONE {
                break;
            }
            a = self.parent[self.mate[a]];
        }
        loop {
            b = self.base[b];
            if seen[b] {
                return b;
            }
            b = self.parent[self.mate[b]];
        }
    }

    fn mark_path(&mut self, mut v: usize, b: usize, mut child: usize) {
        while self.base[v] != b {
            self.in_blossom[self.base[v]] = true;
            self.in_blossom[self.base[self.mate[v]]] = true;
            self.parent[v] = child;
            child = self.mate[v];
            v = self.parent[self.mate[v]];
        }
    }

    /// Breadth-first search for an augmenting path from `root`; returns its
    /// free endpoint.
    fn find_path(&mut self, root: usize) -> Option<usize> {
        let n = self.g.vertex_count();
        self.used.iter_mut().for_each(|u| *u = false);
        self.parent.iter_mut().for_each(|p| *p = NONE);
        for (i, b) in self.base.iter_mut().enumerate() {
            *b = i;
        }
        self.used[root] = true;
        self.queue.clear();
        self.queue.push_back(root);
        while let Some(v) = self.queue.pop_front() {
            for idx in 0..self.g.adj[v].len() {
                let to = self.g.adj[v][idx];
                if self.base[v] == self.base[to] || self.mate[v] == to {
                    continue;
                }
                if to == root || (self.mate[to] != NONE && self.parent[self.mate[to]] != NONE) {
                    let cur = self.lca(v, to);
                    self.in_blossom.iter_mut().for_each(|b| *b = false);
                    self.mark_path(v, cur, to);
                    self.mark_path(to, cur, v);
                    for i in 0..n {
                        if self.in_blossom[self.base[i]] {
                            self.base[i] = cur;
                            if !self.used[i] {
                                self.used[i] = true;
                                self.queue.push_back(i);
                            }
                        }
                    }
                } else if self.parent[to] == NONE {
                    self.parent[to] = v;
                    if self.mate[to] == NONE {
                        return Some(to);
                    }
                    let next = self.mate[to];
                    self.used[next] = true;
                    self.queue.push_back(next);
                }
            }
        }
        None
    }

    fn augment(&mut self, mut v: usize) {
        while v != NONE {
            let pv = self.parent[v];
            let ppv = self.mate[pv];
            self.mate[v] = pv;
            self.mate[pv] = v;
            v = ppv;
        }
    }
}

fn pairs_from_mates(mate: &[usize]) -> Vec<(usize, usize)> {
    mate.iter()
        .enumerate()
        .filter(|&(v, &u)| u != NONE && v < u)
        .map(|(v, &u)| (v, u))
        .collect()
}

/// A maximum matching of `g`.
pub fn max_matching(g: &Graph) -> Matching {
    matching_with_limit(g, usize::MAX)
}

/// Greedy matching improved by at most `max_searches` augmenting-path
/// searches. `maximum` is set only when every exposed vertex was searched.
pub fn matching_with_limit(g: &Graph, max_searches: usize) -> Matching {
    let n = g.vertex_count();
    let mut state = Blossom {
        g,
        mate: vec![NONE; n],
        parent: vec![NONE; n],
        base: (0..n).collect(),
        used: vec![false; n],
        in_blossom: vec![false; n],
        queue: VecDeque::new(),
    };
    greedy(g, &mut state.mate);
    let mut searches = 0;
    let mut complete = true;
    for root in 0..n {
        if state.mate[root] != NONE || g.adj[root].is_empty() {
            continue;
        }
        if searches == max_searches {
            complete = false;
            break;
        }
        searches += 1;
        if let Some(end) = state.find_path(root) {
            state.augment(end);
        }
    }
    Matching { pairs: pairs_from_mates(&state.mate), maximum: complete }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_graph() {
        let m = max_matching(&Graph::new(5));
        assert_eq!(m.size(), 0);
        assert!(m.maximum);
    }

    #[test]
    fn odd_cycle_needs_blossom() {
        // 5-cycle with a pendant: greedy can strand the pendant
        let g = Graph::from_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 5)]);
        let m = max_matching(&g);
        assert_eq!(m.size(), 3);
        assert!(m.is_valid_for(&g));
    }

    #[test]
    fn petersen_is_perfect() {
        let outer: Vec<(usize, usize)> = (0..5).map(|i| (i, (i + 1) % 5)).collect();
        let spokes: Vec<(usize, usize)> = (0..5).map(|i| (i, i + 5)).collect();
        let inner: Vec<(usize, usize)> = (0..5).map(|i| (5 + i, 5 + (i + 2) % 5)).collect();
        let edges: Vec<_> = outer.into_iter().chain(spokes).chain(inner).collect();
        let g = Graph::from_edges(10, &edges);
        assert_eq!(max_matching(&g).size(), 5);
    }

    #[test]
    fn limited_search_is_flagged() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]);
        let m = matching_with_limit(&g, 0);
        assert!(m.is_valid_for(&g));
        assert_eq!(max_matching(&g).size(), 2);
    }

    #[test]
    fn duplicates_and_loops_are_dropped() {
        let mut g = Graph::new(3);
        g.add_edge(0, 1);
        g.add_edge(1, 0);
        g.add_edge(2, 2);
        assert_eq!(g.edge_count(), 1);
    }
}
