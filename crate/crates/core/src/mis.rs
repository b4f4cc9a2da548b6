//! Exact maximum-weight independent sets: a dynamic program on forests, a
//! frontier dynamic program along a vertex order for other graphs, and
//! exhaustive search for small ones.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

/// Largest frontier the order-based dynamic program accepts.
pub const MAX_FRONTIER: usize = 20;
/// Largest graph searched exhaustively.
pub const MAX_EXHAUSTIVE: usize = 20;

/// Maximum-`p`-weight independent set `I` and `i(G, p_G) = p(I)`.
pub fn exact_weighted_mis(g: &WeightedGraph) -> Result<(Vec<usize>, f64)> {
    let adj: Vec<Vec<usize>> = (0..g.vertex_count()).map(|v| g.neighbors(v).to_vec()).collect();
    let set = max_weight_independent_set(&adj, g.probabilities())?;
    let value = g.mass(set.iter().copied());
    Ok((set, value))
}

/// Maximum-weight independent set of the graph given by adjacency lists,
/// solved component by component. Vertices are returned in increasing order.
pub fn max_weight_independent_set(adj: &[Vec<usize>], weights: &[f64]) -> Result<Vec<usize>> {
    let n = adj.len();
    let mut comp = vec![usize::MAX; n];
    let mut result = Vec::new();
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        let mut members = vec![s];
        comp[s] = s;
        let mut i = 0;
        while i < members.len() {
            let u = members[i];
            i += 1;
            for &w in &adj[u] {
                if comp[w] == usize::MAX {
                    comp[w] = s;
                    members.push(w);
                }
            }
        }
        members.sort_unstable();
        let local: HashMap<usize, usize> = members.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let sub_adj: Vec<Vec<usize>> = members
            .iter()
            .map(|&v| adj[v].iter().map(|w| local[w]).collect())
            .collect();
        let sub_w: Vec<f64> = members.iter().map(|&v| weights[v]).collect();
        let edge_count: usize = sub_adj.iter().map(Vec::len).sum::<usize>() / 2;
        let chosen = if edge_count + 1 == members.len() {
            tree_mis(&sub_adj, &sub_w)
        } else if members.len() <= MAX_EXHAUSTIVE {
            exhaustive_mis(&sub_adj, &sub_w)
        } else {
            frontier_mis(&sub_adj, &sub_w)?
        };
        result.extend(chosen.into_iter().map(|i| members[i]));
    }
    result.sort_unstable();
    Ok(result)
}

/// Dynamic program on a tree rooted at vertex 0.
fn tree_mis(adj: &[Vec<usize>], w: &[f64]) -> Vec<usize> {
    let n = adj.len();
    let mut parent = vec![usize::MAX; n];
    let mut order = vec![0];
    parent[0] = 0;
    let mut i = 0;
    while i < order.len() {
        let u = order[i];
        i += 1;
        for &c in &adj[u] {
            if parent[c] == usize::MAX {
                parent[c] = u;
                order.push(c);
            }
        }
    }
    let mut take = w.to_vec();
    let mut skip = vec![0.0; n];
    for &u in order.iter().rev() {
        for &c in &adj[u] {
            if c != 0 && parent[c] == u {
                take[u] += skip[c];
                skip[u] += take[c].max(skip[c]);
            }
        }
    }
    let mut chosen = vec![false; n];
    for &u in &order {
        let parent_taken = u != 0 && chosen[parent[u]];
        chosen[u] = !parent_taken && take[u] >= skip[u];
    }
    (0..n).filter(|&v| chosen[v]).collect()
}

/// Branching on the lowest-index candidate: exclude it, or include it and drop
/// its neighbours.
fn exhaustive_mis(adj: &[Vec<usize>], w: &[f64]) -> Vec<usize> {
    let n = adj.len();
    let nbr: Vec<u32> = adj.iter().map(|l| l.iter().fold(0u32, |m, &v| m | 1 << v)).collect();
    fn go(cand: u32, acc: f64, set: u32, nbr: &[u32], w: &[f64], best: &mut (f64, u32)) {
        if cand == 0 {
            if acc > best.0 {
                *best = (acc, set);
            }
            return;
        }
        let rest: f64 = (0..32).filter(|&i| cand >> i & 1 == 1).map(|i| w[i]).sum();
        if acc + rest <= best.0 {
            return;
        }
        let v = cand.trailing_zeros() as usize;
        go(cand & !(1 << v) & !nbr[v], acc + w[v], set | 1 << v, nbr, w, best);
        go(cand & !(1 << v), acc, set, nbr, w, best);
    }
    let mut best = (-1.0, 0u32);
    go(if n == 32 { u32::MAX } else { (1u32 << n) - 1 }, 0.0, 0, &nbr, w, &mut best);
    (0..n).filter(|&i| best.1 >> i & 1 == 1).collect()
}

/// Greedy vertex order keeping the set of processed vertices with unprocessed
/// neighbours small; returns the order and its largest frontier.
fn frontier_order(adj: &[Vec<usize>], start: usize) -> (Vec<usize>, usize) {
    let n = adj.len();
    let mut done = vec![false; n];
    let mut processed_nbrs = vec![0usize; n];
    let mut open_nbrs: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut order = Vec::with_capacity(n);
    let mut frontier = 0usize;
    let mut widest = 0;
    let mut next = start;
    for _ in 0..n {
        let v = next;
        done[v] = true;
        order.push(v);
        open_nbrs[v] -= processed_nbrs[v];
        if open_nbrs[v] > 0 {
            frontier += 1;
        }
        for &w in &adj[v] {
            processed_nbrs[w] += 1;
            if done[w] {
                open_nbrs[w] -= 1;
                if open_nbrs[w] == 0 {
                    frontier -= 1;
                }
            }
        }
        widest = widest.max(frontier);
        // Prefer the vertex closing the most frontier vertices, then the one
        // with the fewest unprocessed neighbours.
        let candidate = (0..n)
            .filter(|&u| !done[u])
            .max_by(|&a, &b| {
                let key = |u: usize| {
                    let closes = adj[u].iter().filter(|&&x| done[x] && open_nbrs[x] == 1).count();
                    let fresh = adj[u].iter().filter(|&&x| !done[x]).count();
                    (processed_nbrs[u] > 0, closes, std::cmp::Reverse(fresh), std::cmp::Reverse(u))
                };
                key(a).cmp(&key(b))
            });
        match candidate {
            Some(u) => next = u,
            None => break,
        }
    }
    (order, widest)
}

fn frontier_mis(adj: &[Vec<usize>], w: &[f64]) -> Result<Vec<usize>> {
    let n = adj.len();
    let mut starts: Vec<usize> = (0..n).collect();
    starts.sort_by_key(|&v| (adj[v].len(), v));
    let (order, widest) = starts
        .iter()
        .take(8)
        .map(|&s| frontier_order(adj, s))
        .min_by_key(|(_, width)| *width)
        .expect("component is non-empty");
    if widest > MAX_FRONTIER {
        return Err(Error::TooLarge(format!(
            "frontier of {widest} vertices exceeds {MAX_FRONTIER}"
        )));
    }
    let mut pos = vec![usize::MAX; n];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    // Entries per step: (frontier mask, value, previous entry, chosen).
    let mut steps: Vec<Vec<(u32, f64, usize, bool)>> = Vec::with_capacity(n);
    let mut frontier: Vec<usize> = Vec::new();
    let mut prev: Vec<(u32, f64, usize, bool)> = vec![(0, 0.0, usize::MAX, false)];
    for (step, &v) in order.iter().enumerate() {
        let conflict: u32 = frontier
            .iter()
            .enumerate()
            .filter(|&(_, &f)| adj[v].contains(&f))
            .fold(0, |m, (i, _)| m | 1 << i);
        // Frontier after adding v and dropping vertices with no later neighbour.
        let mut next_frontier: Vec<usize> = frontier.clone();
        next_frontier.push(v);
        let keep: Vec<bool> = next_frontier
            .iter()
            .map(|&f| adj[f].iter().any(|&x| pos[x] > step))
            .collect();
        let remap = |mask: u32| -> u32 {
            let mut out = 0;
            let mut j = 0;
            for (i, &k) in keep.iter().enumerate() {
                if k {
                    if mask >> i & 1 == 1 {
                        out |= 1 << j;
                    }
                    j += 1;
                }
            }
            out
        };
        let mut index: HashMap<u32, usize> = HashMap::new();
        let mut entries: Vec<(u32, f64, usize, bool)> = Vec::new();
        let v_bit = 1u32 << frontier.len();
        for (pi, &(mask, value, _, _)) in prev.iter().enumerate() {
            let mut options = vec![(mask, value, false)];
            if mask & conflict == 0 {
                options.push((mask | v_bit, value + w[v], true));
            }
            for (m, val, chosen) in options {
                let key = remap(m);
                match index.get(&key) {
                    Some(&at) => {
                        if val > entries[at].1 {
                            entries[at] = (key, val, pi, chosen);
                        }
                    }
                    None => {
                        index.insert(key, entries.len());
                        entries.push((key, val, pi, chosen));
                    }
                }
            }
        }
        frontier = next_frontier
            .into_iter()
            .zip(&keep)
            .filter(|(_, &k)| k)
            .map(|(f, _)| f)
            .collect();
        // steps[k] holds the entries before order[k] is processed.
        steps.push(std::mem::replace(&mut prev, entries));
    }
    steps.push(prev);
    // Walk back from the best final entry.
    let (mut at, _) = steps[n]
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, e)| if e.1 > bv { (i, e.1) } else { (bi, bv) });
    let mut chosen = Vec::new();
    for step in (0..n).rev() {
        let (_, _, parent, took) = steps[step + 1][at];
        if took {
            chosen.push(order[step]);
        }
        at = parent;
    }
    chosen.sort_unstable();
    Ok(chosen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{cycle, grid, path, random_regular};

    fn brute(adj: &[Vec<usize>], w: &[f64]) -> f64 {
        let n = adj.len();
        let mut best: f64 = 0.0;
        for mask in 0u32..(1 << n) {
            let ok = (0..n).all(|v| mask >> v & 1 == 0 || adj[v].iter().all(|&u| mask >> u & 1 == 0));
            if ok {
                best = best.max((0..n).filter(|&v| mask >> v & 1 == 1).map(|v| w[v]).sum());
            }
        }
        best
    }

    fn adjacency(g: &WeightedGraph) -> Vec<Vec<usize>> {
        (0..g.vertex_count()).map(|v| g.neighbors(v).to_vec()).collect()
    }

    fn is_independent(adj: &[Vec<usize>], set: &[usize]) -> bool {
        set.iter().all(|&v| adj[v].iter().all(|u| !set.contains(u)))
    }

    #[test]
    fn examples() {
        let empty = WeightedGraph::uniform(4, &[], 1).unwrap();
        let (set, i) = exact_weighted_mis(&empty).unwrap();
        assert_eq!(set, vec![0, 1, 2, 3]);
        assert!((i - 1.0).abs() < 1e-15);

        let (_, i) = exact_weighted_mis(&cycle(5).unwrap()).unwrap();
        assert!((i - 0.4).abs() < 1e-15);

        let lw = vec![0.5f64.ln(), 0.2f64.ln(), 0.3f64.ln()];
        let g = WeightedGraph::with_tight_bounds(&[(0, 1), (1, 2)], lw).unwrap();
        let (set, i) = exact_weighted_mis(&g).unwrap();
        assert_eq!(set, vec![0, 2]);
        assert!((i - 0.8).abs() < 1e-12);
    }

    #[test]
    fn heavy_star_center() {
        // Center 0.6, four leaves 0.1 each.
        let lw = vec![6f64.ln(), 0.0, 0.0, 0.0, 0.0];
        let g = WeightedGraph::with_tight_bounds(&[(0, 1), (0, 2), (0, 3), (0, 4)], lw).unwrap();
        let (set, i) = exact_weighted_mis(&g).unwrap();
        assert_eq!(set, vec![0]);
        assert!((i - 0.6).abs() < 1e-12);
    }

    #[test]
    fn tree_dp_matches_brute_force() {
        for n in 1..=14 {
            let g = path(n).unwrap();
            let adj = adjacency(&g);
            let w: Vec<f64> = (0..n).map(|i| 1.0 + ((i * 7) % 5) as f64).collect();
            let set = tree_mis(&adj, &w);
            assert!(is_independent(&adj, &set));
            let v: f64 = set.iter().map(|&i| w[i]).sum();
            assert!((v - brute(&adj, &w)).abs() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn frontier_dp_matches_brute_force() {
        for seed in 0..10 {
            let g = random_regular(16, 3, seed).unwrap();
            let adj = adjacency(&g);
            let w: Vec<f64> = (0..16).map(|i| 1.0 + ((i * 13 + seed as usize) % 7) as f64).collect();
            let set = frontier_mis(&adj, &w).unwrap();
            assert!(is_independent(&adj, &set));
            let v: f64 = set.iter().map(|&i| w[i]).sum();
            assert!((v - brute(&adj, &w)).abs() < 1e-12, "seed {seed}");
            let ex: f64 = exhaustive_mis(&adj, &w).iter().map(|&i| w[i]).sum();
            assert!((ex - v).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_independence() {
        let g = grid(12, 12).unwrap();
        let (set, i) = exact_weighted_mis(&g).unwrap();
        assert!(is_independent(&adjacency(&g), &set));
        assert!((i - 0.5).abs() < 1e-12);
    }
}
