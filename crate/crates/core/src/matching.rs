//! Maximum cardinality matching by augmenting paths with blossom contraction.

use std::collections::VecDeque;

use crate::graph::WeightedGraph;

const NONE: usize = usize::MAX;

/// `mate[v]` for a maximum matching of the graph given by adjacency lists.
pub fn maximum_matching(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut mate = vec![NONE; n];
    // Greedy start.
    for v in 0..n {
        if mate[v] == NONE {
            if let Some(&w) = adj[v].iter().find(|&&w| mate[w] == NONE && w != v) {
                mate[v] = w;
                mate[w] = v;
            }
        }
    }
    let mut search = Search::new(n);
    for root in 0..n {
        if mate[root] == NONE {
            if let Some(end) = search.find_augmenting_path(adj, &mate, root) {
                // Flip along the alternating path ending at `end`.
                let mut v = end;
                while v != NONE {
                    let pv = search.parent[v];
                    let next = mate[pv];
                    mate[v] = pv;
                    mate[pv] = v;
                    v = next;
                }
            }
        }
    }
    mate
}

struct Search {
    parent: Vec<usize>,
    base: Vec<usize>,
    used: Vec<bool>,
    blossom: Vec<bool>,
    queue: VecDeque<usize>,
}

impl Search {
    fn new(n: usize) -> Self {
        Search {
            parent: vec![NONE; n],
            base: (0..n).collect(),
            used: vec![false; n],
            blossom: vec![false; n],
            queue: VecDeque::new(),
        }
    }

    fn lca(&self, mate: &[usize], mut a: usize, mut b: usize) -> usize {
        let mut seen = vec![false; mate.len()];
        loop {
            a = self.base[a];
            seen[a] = true;
            if mate[a] == NONE {
                break;
            }
            a = self.parent[mate[a]];
        }
        loop {
            b = self.base[b];
            if seen[b] {
                return b;
            }
            b = self.parent[mate[b]];
        }
    }

    fn mark_path(&mut self, mate: &[usize], mut v: usize, b: usize, mut child: usize) {
        while self.base[v] != b {
            self.blossom[self.base[v]] = true;
            self.blossom[self.base[mate[v]]] = true;
            self.parent[v] = child;
            child = mate[v];
            v = self.parent[mate[v]];
        }
    }

    fn find_augmenting_path(&mut self, adj: &[Vec<usize>], mate: &[usize], root: usize) -> Option<usize> {
        let n = adj.len();
        self.used.iter_mut().for_each(|x| *x = false);
        self.parent.iter_mut().for_each(|x| *x = NONE);
        for (i, b) in self.base.iter_mut().enumerate() {
            *b = i;
        }
        self.used[root] = true;
        self.queue.clear();
        self.queue.push_back(root);
        while let Some(v) = self.queue.pop_front() {
            for &to in &adj[v] {
                if self.base[v] == self.base[to] || mate[v] == to {
                    continue;
                }
                if to == root || (mate[to] != NONE && self.parent[mate[to]] != NONE) {
                    let cur = self.lca(mate, v, to);
                    self.blossom.iter_mut().for_each(|x| *x = false);
                    self.mark_path(mate, v, cur, to);
                    self.mark_path(mate, to, cur, v);
                    for i in 0..n {
                        if self.blossom[self.base[i]] {
                            self.base[i] = cur;
                            if !self.used[i] {
                                self.used[i] = true;
                                self.queue.push_back(i);
                            }
                        }
                    }
                } else if self.parent[to] == NONE {
                    self.parent[to] = v;
                    if mate[to] == NONE {
                        return Some(to);
                    }
                    let m = mate[to];
                    self.used[m] = true;
                    self.queue.push_back(m);
                }
            }
        }
        None
    }
}

/// Edges `(u, v)`, `u < v`, of a maximum matching of `g`.
pub fn exact_matching(g: &WeightedGraph) -> Vec<(usize, usize)> {
    let adj: Vec<Vec<usize>> = (0..g.vertex_count()).map(|v| g.neighbors(v).to_vec()).collect();
    let mate = maximum_matching(&adj);
    (0..mate.len())
        .filter(|&v| mate[v] != NONE && v < mate[v])
        .map(|v| (v, mate[v]))
        .collect()
}

/// `m(G) = |M| / |V(G)|` for a maximum matching `M`.
pub fn matching_number(g: &WeightedGraph) -> f64 {
    exact_matching(g).len() as f64 / g.vertex_count() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{cycle, grid, path, random_regular};

    fn brute_force(n: usize, edges: &[(usize, usize)]) -> usize {
        let m = edges.len();
        let mut best = 0;
        for mask in 0u32..(1 << m) {
            let mut used = 0u64;
            let mut ok = true;
            for (i, &(u, v)) in edges.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    if used >> u & 1 == 1 || used >> v & 1 == 1 {
                        ok = false;
                        break;
                    }
                    used |= 1 << u | 1 << v;
                }
            }
            if ok {
                best = best.max(mask.count_ones() as usize);
            }
        }
        let _ = n;
        best
    }

    fn is_matching(g: &WeightedGraph, m: &[(usize, usize)]) -> bool {
        let mut seen = vec![false; g.vertex_count()];
        m.iter().all(|&(u, v)| {
            let fresh = !seen[u] && !seen[v] && g.is_adjacent(u, v);
            seen[u] = true;
            seen[v] = true;
            fresh
        })
    }

    #[test]
    fn examples() {
        assert_eq!(matching_number(&path(2).unwrap()), 0.5);
        let c6 = cycle(6).unwrap();
        assert_eq!(brute_force(6, &c6.edges()), 3);
        assert_eq!(matching_number(&c6), 0.5);
    }

    #[test]
    fn petersen_has_a_perfect_matching() {
        let mut edges = Vec::new();
        for i in 0..5 {
            edges.push((i, (i + 1) % 5));
            edges.push((i, i + 5));
            edges.push((5 + i, 5 + (i + 2) % 5));
        }
        let g = WeightedGraph::uniform(10, &edges, 3).unwrap();
        let m = exact_matching(&g);
        assert!(is_matching(&g, &m));
        assert_eq!(m.len(), 5);
        assert_eq!(brute_force(10, &g.edges()), 5);
    }

    #[test]
    fn odd_cycles_need_blossoms() {
        // Two triangles joined by a path: greedy choices must be undone.
        let g = WeightedGraph::uniform(
            8,
            &[(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (5, 7)],
            3,
        )
        .unwrap();
        assert_eq!(exact_matching(&g).len(), brute_force(8, &g.edges()));
    }

    #[test]
    fn agrees_with_brute_force_on_small_random_graphs() {
        for seed in 0..20 {
            let g = random_regular(10, 3, seed).unwrap();
            let m = exact_matching(&g);
            assert!(is_matching(&g, &m));
            assert_eq!(m.len(), brute_force(10, &g.edges()), "seed {seed}");
        }
    }

    #[test]
    fn grids_and_paths() {
        assert_eq!(exact_matching(&grid(10, 10).unwrap()).len(), 50);
        assert_eq!(exact_matching(&grid(3, 3).unwrap()).len(), 4);
        for n in 1..12 {
            assert_eq!(exact_matching(&path(n).unwrap()).len(), n / 2);
        }
    }
}
