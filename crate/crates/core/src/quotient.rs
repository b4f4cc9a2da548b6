//! Trees described by an equitable partition of their vertices.
//!
//! The binary trees `T_n` have `2^n - 1` vertices, far too many to store for
//! the depths that matter, but every automorphism class (a layer) is described
//! by a weight and a neighbour profile. Because the graph is a tree, the ball
//! around any vertex is the non-backtracking unfolding of this profile, so all
//! ball statistics and entropies are computable from the classes alone.

use crate::ball::LabeledBall;
use crate::error::{Error, Result};
use crate::label::{truncate_label, FixedPointLabel};

#[derive(Clone, Debug, PartialEq)]
pub struct TreeQuotient {
    /// Natural log of the number of vertices in each class.
    log_sizes: Vec<f64>,
    log_weights: Vec<f64>,
    /// `(class, multiplicity)` neighbour profile of one vertex of each class.
    profiles: Vec<Vec<(usize, usize)>>,
    degree_bound: usize,
    ratio_bound: f64,
}

impl TreeQuotient {
    /// Builds a quotient from class sizes (as logs), weights and neighbour
    /// profiles. Checks that edge counts agree in both directions.
    pub fn new(
        log_sizes: Vec<f64>,
        log_weights: Vec<f64>,
        profiles: Vec<Vec<(usize, usize)>>,
        degree_bound: usize,
        ratio_bound: f64,
    ) -> Result<Self> {
        let m = log_sizes.len();
        if m == 0 || log_weights.len() != m || profiles.len() != m {
            return Err(Error::InvalidParameter("quotient needs one entry per class".into()));
        }
        let log_k = ratio_bound.ln();
        for (c, profile) in profiles.iter().enumerate() {
            let degree: usize = profile.iter().map(|&(_, k)| k).sum();
            if degree > degree_bound {
                return Err(Error::DegreeExceeded {
                    vertex: c,
                    degree,
                    bound: degree_bound,
                });
            }
            for &(j, k) in profile {
                if j >= m {
                    return Err(Error::VertexOutOfRange { vertex: j, n: m });
                }
                let back = profiles[j]
                    .iter()
                    .find(|&&(i, _)| i == c)
                    .map(|&(_, k)| k)
                    .unwrap_or(0);
                let lhs = log_sizes[c] + (k as f64).ln();
                let rhs = log_sizes[j] + (back as f64).ln();
                if back == 0 || (lhs - rhs).abs() > 1e-9 * lhs.abs().max(1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "classes {c} and {j} disagree on their edge count"
                    )));
                }
                let diff = (log_weights[j] - log_weights[c]).abs();
                if diff > log_k + 1e-9 * log_k.max(1.0) {
                    return Err(Error::RatioBoundViolated {
                        u: c,
                        v: j,
                        ratio: diff.exp(),
                        bound: ratio_bound,
                    });
                }
            }
        }
        Ok(TreeQuotient {
            log_sizes,
            log_weights,
            profiles,
            degree_bound,
            ratio_bound,
        })
    }

    /// The layers of the binary tree `T_n` with weights `exp(-beta * layer)`.
    pub fn binary_tree(depth: usize, beta: f64) -> Result<Self> {
        if depth == 0 || !(beta >= 0.0) {
            return Err(Error::InvalidParameter("need depth >= 1 and beta >= 0".into()));
        }
        let log_sizes = (0..depth).map(|i| i as f64 * std::f64::consts::LN_2).collect();
        let log_weights: Vec<f64> = (0..depth).map(|i| -beta * i as f64).collect();
        let profiles = (0..depth)
            .map(|i| {
                let mut p = Vec::new();
                if i > 0 {
                    p.push((i - 1, 1));
                }
                if i + 1 < depth {
                    p.push((i + 1, 2));
                }
                p
            })
            .collect();
        // Same expression as `minimal_ratio_bound` on the materialized tree.
        let k = (1..depth)
            .map(|i| (log_weights[i - 1] - log_weights[i]).abs())
            .fold(0.0, f64::max)
            .exp()
            .max(crate::graph::MIN_RATIO_BOUND);
        Self::new(log_sizes, log_weights, profiles, 3, k)
    }

    pub fn class_count(&self) -> usize {
        self.log_sizes.len()
    }

    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    pub fn ratio_bound(&self) -> f64 {
        self.ratio_bound
    }

    pub fn log_weight(&self, class: usize) -> f64 {
        self.log_weights[class]
    }

    pub fn profile(&self, class: usize) -> &[(usize, usize)] {
        &self.profiles[class]
    }

    /// Natural log of the total number of vertices.
    pub fn log_vertex_count(&self) -> f64 {
        log_sum_exp(self.log_sizes.iter().copied())
    }

    fn log_normalizer(&self) -> f64 {
        log_sum_exp(self.log_sizes.iter().zip(&self.log_weights).map(|(s, w)| s + w))
    }

    /// Probability of a single vertex of the class.
    pub fn vertex_probability(&self, class: usize) -> f64 {
        (self.log_weights[class] - self.log_normalizer()).exp()
    }

    /// Total probability of each class.
    pub fn class_masses(&self) -> Vec<f64> {
        let z = self.log_normalizer();
        self.log_sizes
            .iter()
            .zip(&self.log_weights)
            .map(|(s, w)| (s + w - z).exp())
            .collect()
    }

    /// Fraction of vertices (counting measure) in each class.
    pub fn class_fractions(&self) -> Vec<f64> {
        let z = self.log_vertex_count();
        self.log_sizes.iter().map(|s| (s - z).exp()).collect()
    }

    /// Ball of radius `r` around any vertex of `class`, as the non-backtracking
    /// unfolding of the neighbour profiles.
    pub fn ball(&self, class: usize, r: usize, t: u32) -> LabeledBall {
        // (class, parent node, depth)
        let mut nodes: Vec<(usize, Option<usize>, usize)> = vec![(class, None, 0)];
        let mut edges = Vec::new();
        let mut head = 0;
        while head < nodes.len() {
            let (c, parent, depth) = nodes[head];
            if depth < r {
                let parent_class = parent.map(|p| nodes[p].0);
                let mut skipped = false;
                for &(j, k) in &self.profiles[c] {
                    for _ in 0..k {
                        if !skipped && Some(j) == parent_class {
                            skipped = true;
                            continue;
                        }
                        edges.push((head, nodes.len()));
                        nodes.push((j, Some(head), depth + 1));
                    }
                }
            }
            head += 1;
        }
        let root_lw = self.log_weights[class];
        let labels = nodes
            .iter()
            .enumerate()
            .map(|(i, &(c, _, _))| {
                if i == 0 {
                    FixedPointLabel::one(t)
                } else {
                    truncate_label((self.log_weights[c] - root_lw).exp(), t)
                }
            })
            .collect();
        LabeledBall {
            radius: r,
            depths: nodes.iter().map(|n| n.2).collect(),
            edges,
            labels,
            decorations: None,
        }
    }

    /// `Σ_v -p(v) ln p(v)` summed class by class.
    pub fn vertex_entropy(&self) -> f64 {
        let z = self.log_normalizer();
        self.class_masses()
            .iter()
            .zip(&self.log_weights)
            .map(|(mass, w)| if *mass > 0.0 { -mass * (w - z) } else { 0.0 })
            .sum()
    }

    /// `Σ_v p(v) Σ_{y ~ v} -ln(p(y)/p(v))` summed class by class.
    pub fn edge_entropy(&self) -> f64 {
        self.class_masses()
            .iter()
            .enumerate()
            .map(|(c, mass)| {
                let out: f64 = self.profiles[c]
                    .iter()
                    .map(|&(j, k)| -(k as f64) * (self.log_weights[j] - self.log_weights[c]))
                    .sum();
                mass * out
            })
            .sum()
    }
}

pub(crate) fn log_sum_exp<I: Iterator<Item = f64> + Clone>(values: I) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    #[test]
    fn critical_layer_masses_are_uniform() {
        let q = TreeQuotient::binary_tree(100, LN_2).unwrap();
        for m in q.class_masses() {
            assert!((m - 0.01).abs() < 1e-12);
        }
    }

    #[test]
    fn interior_ball_has_one_heavy_and_two_light_neighbours() {
        let q = TreeQuotient::binary_tree(10, LN_2).unwrap();
        let b = q.ball(5, 1, 2);
        let mut labels: Vec<String> = b.labels[1..].iter().map(|l| l.to_string()).collect();
        labels.sort();
        assert_eq!(labels, vec!["0.50", "0.50", "2.00"]);
    }

    #[test]
    fn inconsistent_profiles_are_rejected() {
        let err = TreeQuotient::new(
            vec![0.0, 0.0],
            vec![0.0, 0.0],
            vec![vec![(1, 2)], vec![(0, 1)]],
            3,
            2.0,
        );
        assert!(err.is_err());
    }
}
