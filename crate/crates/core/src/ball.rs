//! Rooted, vertex-labeled balls `B_r(G, x)`.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::label::{truncate_label, FixedPointLabel};

/// A rooted ball with local vertex ids. Vertex 0 is the root and ids are in
/// breadth-first order, so depths are non-decreasing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledBall {
    pub radius: usize,
    pub depths: Vec<usize>,
    /// Induced edges `(u, v)` with `u < v`.
    pub edges: Vec<(usize, usize)>,
    /// `p(y) / p(root)` truncated at a fixed number of digits.
    pub labels: Vec<FixedPointLabel>,
    /// Optional per-vertex random bits used by local rules.
    pub decorations: Option<Vec<u64>>,
}

impl LabeledBall {
    /// Builds a ball from local edges and labels; depths are recomputed by BFS
    /// from vertex 0. Fails if the graph is disconnected, the root label is not
    /// exactly one, or some vertex lies beyond `radius`.
    pub fn from_parts(
        vertex_count: usize,
        edges: Vec<(usize, usize)>,
        labels: Vec<FixedPointLabel>,
        radius: usize,
    ) -> Result<Self> {
        if vertex_count == 0 || labels.len() != vertex_count {
            return Err(Error::InvalidParameter("ball needs one label per vertex".into()));
        }
        if labels[0] != FixedPointLabel::one(labels[0].scale_digits) {
            return Err(Error::InvalidParameter("root label must be exactly 1".into()));
        }
        let mut adj = vec![Vec::new(); vertex_count];
        let mut norm = Vec::with_capacity(edges.len());
        for &(u, v) in &edges {
            if u >= vertex_count || v >= vertex_count || u == v {
                return Err(Error::InvalidParameter(format!("bad ball edge ({u}, {v})")));
            }
            adj[u].push(v);
            adj[v].push(u);
            norm.push((u.min(v), u.max(v)));
        }
        norm.sort_unstable();
        norm.dedup();
        let mut depths = vec![usize::MAX; vertex_count];
        depths[0] = 0;
        let mut queue = VecDeque::from([0]);
        while let Some(u) = queue.pop_front() {
            for &w in &adj[u] {
                if depths[w] == usize::MAX {
                    depths[w] = depths[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        if depths.iter().any(|&d| d == usize::MAX || d > radius) {
            return Err(Error::InvalidParameter(
                "ball must be connected and within its radius".into(),
            ));
        }
        Ok(LabeledBall {
            radius,
            depths,
            edges: norm,
            labels,
            decorations: None,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.depths.len()
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertex_count()];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    pub fn root_degree(&self) -> usize {
        self.edges.iter().filter(|&&(u, _)| u == 0).count()
    }

    pub fn with_decorations(mut self, bits: Vec<u64>) -> Self {
        assert_eq!(bits.len(), self.vertex_count());
        self.decorations = Some(bits);
        self
    }

    /// Same ball with every label forced to one (the classical unlabeled ball).
    pub fn unlabeled(mut self) -> Self {
        for l in &mut self.labels {
            *l = FixedPointLabel::one(l.scale_digits);
        }
        self
    }

    /// Relabels local ids: vertex `v` becomes `perm[v]`. `perm[0]` must be 0.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm[0], 0, "the root must stay at local id 0");
        let n = self.vertex_count();
        let mut depths = vec![0; n];
        let mut labels = self.labels.clone();
        let mut decorations = self.decorations.clone();
        for v in 0..n {
            depths[perm[v]] = self.depths[v];
            labels[perm[v]] = self.labels[v];
            if let (Some(out), Some(src)) = (decorations.as_mut(), self.decorations.as_ref()) {
                out[perm[v]] = src[v];
            }
        }
        let mut edges: Vec<_> = self
            .edges
            .iter()
            .map(|&(u, v)| (perm[u].min(perm[v]), perm[u].max(perm[v])))
            .collect();
        edges.sort_unstable();
        LabeledBall {
            radius: self.radius,
            depths,
            edges,
            labels,
            decorations,
        }
    }
}

/// Extracts `B_r(G, x)` with labels `p(y)/p(x)` truncated at `t` digits.
pub fn extract_ball(g: &WeightedGraph, x: usize, r: usize, t: u32) -> LabeledBall {
    extract_ball_mapped(g, x, r, t).0
}

/// Like [`extract_ball`], also returning the graph vertex behind each local id.
pub fn extract_ball_mapped(
    g: &WeightedGraph,
    x: usize,
    r: usize,
    t: u32,
) -> (LabeledBall, Vec<usize>) {
    let mut vertices = vec![x];
    let mut depths = vec![0usize];
    let mut local = std::collections::HashMap::new();
    local.insert(x, 0usize);
    let mut head = 0;
    while head < vertices.len() {
        let u = vertices[head];
        let du = depths[head];
        head += 1;
        if du == r {
            continue;
        }
        for &w in g.neighbors(u) {
            if let std::collections::hash_map::Entry::Vacant(e) = local.entry(w) {
                e.insert(vertices.len());
                vertices.push(w);
                depths.push(du + 1);
            }
        }
    }
    let mut edges = Vec::new();
    for (i, &u) in vertices.iter().enumerate() {
        for &w in g.neighbors(u) {
            if let Some(&j) = local.get(&w) {
                if i < j {
                    edges.push((i, j));
                }
            }
        }
    }
    edges.sort_unstable();
    let root_lw = g.log_weight(x);
    let labels = vertices
        .iter()
        .enumerate()
        .map(|(i, &y)| {
            if i == 0 {
                FixedPointLabel::one(t)
            } else {
                truncate_label((g.log_weight(y) - root_lw).exp(), t)
            }
        })
        .collect();
    (
        LabeledBall {
            radius: r,
            depths,
            edges,
            labels,
            decorations: None,
        },
        vertices,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;

    #[test]
    fn radius_zero_is_the_root() {
        let g = build_graph(&[(0, 1), (1, 2)], vec![0.0, 0.3, 0.1], 2, 2.0).unwrap();
        let b = extract_ball(&g, 1, 0, 2);
        assert_eq!(b.vertex_count(), 1);
        assert!(b.edges.is_empty());
        assert_eq!(b.labels[0].to_string(), "1.00");
    }

    #[test]
    fn uniform_path_center() {
        let g = WeightedGraph::uniform(5, &[(0, 1), (1, 2), (2, 3), (3, 4)], 2).unwrap();
        let b = extract_ball(&g, 2, 1, 2);
        assert_eq!(b.vertex_count(), 3);
        assert_eq!(b.edges, vec![(0, 1), (0, 2)]);
        assert!(b.labels.iter().all(|l| l.to_string() == "1.00"));
    }

    #[test]
    fn closing_edge_of_short_cycle_is_included() {
        let edges: Vec<_> = (0..5).map(|i| (i, (i + 1) % 5)).collect();
        let g = WeightedGraph::uniform(5, &edges, 2).unwrap();
        let b = extract_ball(&g, 0, 2, 1);
        assert_eq!(b.vertex_count(), 5);
        assert_eq!(b.edges.len(), 5);
    }

    #[test]
    fn from_parts_validates() {
        let one = FixedPointLabel::one(2);
        assert!(LabeledBall::from_parts(3, vec![(0, 1), (1, 2)], vec![one; 3], 2).is_ok());
        assert!(LabeledBall::from_parts(3, vec![(0, 1), (1, 2)], vec![one; 3], 1).is_err());
        assert!(LabeledBall::from_parts(3, vec![(0, 1)], vec![one; 3], 2).is_err());
        let half = truncate_label(0.5, 2);
        assert!(LabeledBall::from_parts(2, vec![(0, 1)], vec![half, one], 1).is_err());
    }
}
