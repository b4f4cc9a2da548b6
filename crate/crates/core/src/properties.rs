//! Graph properties closed under subgraphs and disjoint unions, with
//! membership tests and witnesses of violation.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Colorings enumerated by the `k`-colorability check before giving up.
pub const MAX_COLORINGS: f64 = 1e7;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case")]
pub enum PropertySpec {
    Forest,
    Bipartite,
    /// No subgraph (not necessarily induced) isomorphic to `H`.
    HFree { n: usize, edges: Vec<(usize, usize)> },
    KColorable { k: usize },
}

impl PropertySpec {
    pub fn h_free(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::InvalidParameter("H must have at least one edge".into()));
        }
        for &(u, v) in &edges {
            if u >= n || v >= n || u == v {
                return Err(Error::InvalidParameter(format!("bad edge ({u}, {v}) in H")));
            }
        }
        Ok(PropertySpec::HFree { n, edges })
    }

    pub fn triangle_free() -> Self {
        PropertySpec::HFree {
            n: 3,
            edges: vec![(0, 1), (1, 2), (0, 2)],
        }
    }

    pub fn description(&self) -> String {
        match self {
            PropertySpec::Forest => "acyclic".into(),
            PropertySpec::Bipartite => "no odd cycle".into(),
            PropertySpec::HFree { n, edges } => {
                format!("no subgraph isomorphic to H ({n} vertices, {} edges)", edges.len())
            }
            PropertySpec::KColorable { k } => format!("properly {k}-colorable"),
        }
    }

    /// Whether the graph with the given edges on `n` vertices has the property.
    pub fn holds(&self, n: usize, edges: &[(usize, usize)]) -> Result<bool> {
        let g = EdgeGraph::new(n, edges.to_vec());
        let all = g.all_alive();
        Ok(match self {
            PropertySpec::KColorable { k } => min_monochromatic_cost(&g, all, *k, &vec![1.0; g.m()])?.0 == 0.0,
            _ => g.violation(self, all).is_none(),
        })
    }
}

impl fmt::Display for PropertySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PropertySpec::Forest => f.write_str("forest"),
            PropertySpec::Bipartite => f.write_str("bipartite"),
            PropertySpec::HFree { n, .. } => write!(f, "h_free({n})"),
            PropertySpec::KColorable { k } => write!(f, "{k}_colorable"),
        }
    }
}

/// Small graph with indexed edges; edge subsets are bitmasks.
#[derive(Clone, Debug)]
pub(crate) struct EdgeGraph {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    /// `(neighbour, edge index)` per vertex.
    pub inc: Vec<Vec<(usize, usize)>>,
}

impl EdgeGraph {
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Self {
        let mut inc = vec![Vec::new(); n];
        for (i, &(u, v)) in edges.iter().enumerate() {
            inc[u].push((v, i));
            inc[v].push((u, i));
        }
        EdgeGraph { n, edges, inc }
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn all_alive(&self) -> Vec<bool> {
        vec![true; self.m()]
    }

    /// Edge indices of a structure that every member of `P` must break, or
    /// `None` if the alive subgraph has the property. Not used for
    /// `k`-colorability, which has no local witness.
    pub fn violation(&self, p: &PropertySpec, alive: Vec<bool>) -> Option<Vec<usize>> {
        match p {
            PropertySpec::Forest => self.shortest_cycle(&alive, false),
            PropertySpec::Bipartite => self.shortest_cycle(&alive, true),
            PropertySpec::HFree { n, edges } => self.find_copy(*n, edges, &alive),
            PropertySpec::KColorable { .. } => None,
        }
    }

    /// Shortest cycle (or shortest odd cycle) among alive edges, as edge indices.
    fn shortest_cycle(&self, alive: &[bool], odd: bool) -> Option<Vec<usize>> {
        let mut best: Option<Vec<usize>> = None;
        let mut dist = vec![usize::MAX; self.n];
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; self.n];
        for root in 0..self.n {
            dist.iter_mut().for_each(|d| *d = usize::MAX);
            parent.iter_mut().for_each(|p| *p = None);
            dist[root] = 0;
            let mut queue = VecDeque::from([root]);
            while let Some(u) = queue.pop_front() {
                if let Some(b) = &best {
                    if 2 * dist[u] + 1 >= b.len() {
                        break;
                    }
                }
                for &(w, e) in &self.inc[u] {
                    if !alive[e] || parent[u].map(|(_, pe)| pe) == Some(e) {
                        continue;
                    }
                    if dist[w] == usize::MAX {
                        dist[w] = dist[u] + 1;
                        parent[w] = Some((u, e));
                        queue.push_back(w);
                    } else if !odd || dist[w] == dist[u] {
                        // Edge closing a cycle through the lowest common ancestor.
                        let mut cycle = vec![e];
                        let (mut a, mut b) = (u, w);
                        while a != b {
                            if dist[a] >= dist[b] {
                                let (pa, pe) = parent[a].expect("non-root has a parent");
                                cycle.push(pe);
                                a = pa;
                            } else {
                                let (pb, pe) = parent[b].expect("non-root has a parent");
                                cycle.push(pe);
                                b = pb;
                            }
                        }
                        if best.as_ref().is_none_or(|c| cycle.len() < c.len()) {
                            best = Some(cycle);
                        }
                    }
                }
            }
        }
        best
    }

    /// Edges of some subgraph copy of `H` among alive edges.
    fn find_copy(&self, hn: usize, h_edges: &[(usize, usize)], alive: &[bool]) -> Option<Vec<usize>> {
        if hn > self.n {
            return None;
        }
        let mut h_adj = vec![Vec::new(); hn];
        for &(a, b) in h_edges {
            h_adj[a].push(b);
            h_adj[b].push(a);
        }
        // Map H vertices in an order where each (if possible) touches an earlier one.
        let mut order = Vec::with_capacity(hn);
        let mut placed = vec![false; hn];
        while order.len() < hn {
            let next = (0..hn)
                .filter(|&a| !placed[a])
                .max_by_key(|&a| (h_adj[a].iter().filter(|&&b| placed[b]).count(), h_adj[a].len()))
                .expect("unplaced vertex exists");
            placed[next] = true;
            order.push(next);
        }
        let mut edge_between = std::collections::HashMap::new();
        for (i, &(u, v)) in self.edges.iter().enumerate() {
            if alive[i] {
                edge_between.insert((u.min(v), u.max(v)), i);
            }
        }
        let mut image = vec![usize::MAX; hn];
        let mut used = vec![false; self.n];
        fn assign(
            depth: usize,
            order: &[usize],
            h_adj: &[Vec<usize>],
            n: usize,
            edge_between: &std::collections::HashMap<(usize, usize), usize>,
            image: &mut [usize],
            used: &mut [bool],
        ) -> bool {
            if depth == order.len() {
                return true;
            }
            let a = order[depth];
            for x in 0..n {
                if used[x] {
                    continue;
                }
                let fits = h_adj[a].iter().all(|&b| {
                    image[b] == usize::MAX || edge_between.contains_key(&(x.min(image[b]), x.max(image[b])))
                });
                if !fits {
                    continue;
                }
                image[a] = x;
                used[x] = true;
                if assign(depth + 1, order, h_adj, n, edge_between, image, used) {
                    return true;
                }
                image[a] = usize::MAX;
                used[x] = false;
            }
            false
        }
        if !assign(0, &order, &h_adj, self.n, &edge_between, &mut image, &mut used) {
            return None;
        }
        Some(
            h_edges
                .iter()
                .map(|&(a, b)| edge_between[&(image[a].min(image[b]), image[a].max(image[b]))])
                .collect(),
        )
    }
}

/// Minimum total cost of monochromatic alive edges over all `k`-colorings,
/// with the edges of one optimal coloring.
pub(crate) fn min_monochromatic_cost(
    g: &EdgeGraph,
    alive: Vec<bool>,
    k: usize,
    cost: &[f64],
) -> Result<(f64, Vec<usize>)> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if g.n == 0 {
        return Ok((0.0, Vec::new()));
    }
    if (k as f64).powi(g.n as i32 - 1) > MAX_COLORINGS {
        return Err(Error::TooLarge(format!(
            "{k}-colorings of {} vertices exceed the enumeration limit",
            g.n
        )));
    }
    let mut colors = vec![0usize; g.n];
    let mut best = (f64::INFINITY, Vec::new());
    fn go(
        v: usize,
        used: usize,
        g: &EdgeGraph,
        alive: &[bool],
        k: usize,
        cost: &[f64],
        acc: f64,
        colors: &mut [usize],
        best: &mut (f64, Vec<usize>),
    ) {
        if acc >= best.0 {
            return;
        }
        if v == g.n {
            let mono = (0..g.m())
                .filter(|&e| alive[e] && colors[g.edges[e].0] == colors[g.edges[e].1])
                .collect();
            *best = (acc, mono);
            return;
        }
        // Symmetry: the next vertex uses at most one new color.
        for c in 0..k.min(used + 1) {
            colors[v] = c;
            let extra: f64 = g.inc[v]
                .iter()
                .filter(|&&(w, e)| w < v && alive[e] && colors[w] == c)
                .map(|&(_, e)| cost[e])
                .sum();
            go(v + 1, used.max(c + 1), g, alive, k, cost, acc + extra, colors, best);
        }
    }
    go(0, 0, g, &alive, k, cost, 0.0, &mut colors, &mut best);
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle_edges(n: usize) -> Vec<(usize, usize)> {
        (0..n).map(|i| (i, (i + 1) % n)).collect()
    }

    #[test]
    fn membership() {
        let tri = cycle_edges(3);
        let sq = cycle_edges(4);
        assert!(!PropertySpec::Forest.holds(3, &tri).unwrap());
        assert!(PropertySpec::Forest.holds(4, &[(0, 1), (1, 2), (1, 3)]).unwrap());
        assert!(PropertySpec::Bipartite.holds(4, &sq).unwrap());
        assert!(!PropertySpec::Bipartite.holds(5, &cycle_edges(5)).unwrap());
        assert!(!PropertySpec::triangle_free().holds(3, &tri).unwrap());
        assert!(PropertySpec::triangle_free().holds(4, &sq).unwrap());
        assert!(PropertySpec::KColorable { k: 2 }.holds(4, &sq).unwrap());
        assert!(!PropertySpec::KColorable { k: 2 }.holds(3, &tri).unwrap());
        assert!(PropertySpec::KColorable { k: 3 }.holds(3, &tri).unwrap());
    }

    #[test]
    fn shortest_cycle_is_found() {
        // A square sharing an edge with a pentagon.
        let edges = vec![(0, 1), (1, 2), (2, 3), (3, 0), (0, 4), (4, 5), (5, 6), (6, 1)];
        let g = EdgeGraph::new(7, edges);
        let c = g.violation(&PropertySpec::Forest, g.all_alive()).unwrap();
        assert_eq!(c.len(), 4);
        let odd = g.violation(&PropertySpec::Bipartite, g.all_alive());
        // 0-1-2-3 is even, 0-4-5-6-1 with 0-1 is a pentagon.
        assert_eq!(odd.unwrap().len(), 5);
    }

    #[test]
    fn copy_of_h_uses_alive_edges_only() {
        let g = EdgeGraph::new(4, vec![(0, 1), (1, 2), (0, 2), (2, 3)]);
        let p = PropertySpec::triangle_free();
        assert_eq!(g.violation(&p, g.all_alive()).unwrap().len(), 3);
        assert!(g.violation(&p, vec![true, false, true, true]).is_none());
    }

    #[test]
    fn serde_shape() {
        let p: PropertySpec = serde_json::from_str(r#"{"id":"k_colorable","k":3}"#).unwrap();
        assert_eq!(p, PropertySpec::KColorable { k: 3 });
        let f: PropertySpec = serde_json::from_str(r#"{"id":"forest"}"#).unwrap();
        assert_eq!(f, PropertySpec::Forest);
        assert!(PropertySpec::h_free(2, vec![]).is_err());
    }
}
