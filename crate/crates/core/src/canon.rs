//! Canonical forms for rooted labeled balls and for small unrooted graphs.
//!
//! Rooted balls are canonicalized in two stages. Pendant trees (everything that
//! disappears when non-root leaves are repeatedly removed) are encoded bottom-up
//! as sorted nested byte strings and folded into the color of the vertex they
//! hang from. What remains, the 2-core plus the path to the root, is ordered by
//! iterated partition refinement with individualization, keeping the
//! lexicographically least encoding over all leaves of the search tree.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::ball::LabeledBall;

/// Canonical byte string of a rooted labeled ball.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalBallKey(pub Vec<u8>);

/// Canonical byte string of an unrooted, unlabeled graph.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GraphKey(pub Vec<u8>);

macro_rules! hex_key {
    ($name:ident) => {
        impl $name {
            pub fn to_hex(&self) -> String {
                hex::encode(&self.0)
            }

            pub fn from_hex(text: &str) -> Result<Self, hex::FromHexError> {
                Ok($name(hex::decode(text)?))
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let hex = self.to_hex();
                if hex.len() > 24 {
                    write!(f, "{}({}..)", stringify!($name), &hex[..24])
                } else {
                    write!(f, "{}({})", stringify!($name), hex)
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.to_hex())
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(&self.to_hex())
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let text = String::deserialize(d)?;
                $name::from_hex(&text).map_err(serde::de::Error::custom)
            }
        }
    };
}

hex_key!(CanonicalBallKey);
hex_key!(GraphKey);

fn push_len(out: &mut Vec<u8>, len: usize) {
    out.extend_from_slice(&(len as u32).to_be_bytes());
}

fn vertex_color(ball: &LabeledBall, v: usize) -> Vec<u8> {
    let mut c = Vec::with_capacity(24);
    c.extend_from_slice(&(ball.depths[v] as u32).to_be_bytes());
    c.extend_from_slice(&ball.labels[v].scaled_value.to_be_bytes());
    c.push(ball.labels[v].scale_digits as u8);
    match &ball.decorations {
        Some(bits) => {
            c.push(1);
            c.extend_from_slice(&bits[v].to_be_bytes());
        }
        None => c.push(0),
    }
    c
}

/// Canonical key of a rooted labeled ball: equal keys iff there is a
/// root-, depth-, label- and decoration-preserving isomorphism.
pub fn canonicalize(ball: &LabeledBall) -> CanonicalBallKey {
    let n = ball.vertex_count();
    let adj = ball.adjacency();
    let colors: Vec<Vec<u8>> = (0..n).map(|v| vertex_color(ball, v)).collect();

    // Peel pendant trees.
    let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut removed = vec![false; n];
    let mut pending: Vec<Vec<Vec<u8>>> = vec![Vec::new(); n];
    let mut stack: Vec<usize> = (1..n).filter(|&v| degree[v] == 1).collect();
    while let Some(v) = stack.pop() {
        if removed[v] || degree[v] != 1 {
            continue;
        }
        removed[v] = true;
        let code = tree_code(&colors[v], std::mem::take(&mut pending[v]));
        let parent = adj[v]
            .iter()
            .copied()
            .find(|&w| !removed[w])
            .expect("a leaf keeps one live neighbour");
        pending[parent].push(code);
        degree[parent] -= 1;
        if parent != 0 && degree[parent] == 1 {
            stack.push(parent);
        }
    }

    let core: Vec<usize> = (0..n).filter(|&v| !removed[v]).collect();
    let mut index = vec![usize::MAX; n];
    for (i, &v) in core.iter().enumerate() {
        index[v] = i;
    }
    let core_adj: Vec<Vec<usize>> = core
        .iter()
        .map(|&v| adj[v].iter().filter(|&&w| !removed[w]).map(|&w| index[w]).collect())
        .collect();
    let core_colors: Vec<Vec<u8>> = core
        .iter()
        .map(|&v| tree_code(&colors[v], std::mem::take(&mut pending[v])))
        .collect();

    let mut key = b"RB".to_vec();
    push_len(&mut key, n);
    push_len(&mut key, core.len());
    key.extend(canonical_encoding(&core_adj, &core_colors));
    CanonicalBallKey(key)
}

fn tree_code(color: &[u8], mut children: Vec<Vec<u8>>) -> Vec<u8> {
    children.sort_unstable();
    let mut out = Vec::with_capacity(color.len() + 8 + children.iter().map(|c| c.len() + 4).sum::<usize>());
    push_len(&mut out, color.len());
    out.extend_from_slice(color);
    push_len(&mut out, children.len());
    for c in children {
        push_len(&mut out, c.len());
        out.extend(c);
    }
    out
}

/// Canonical key of an unrooted simple graph given by adjacency lists.
pub fn canonical_graph_key(adj: &[Vec<usize>]) -> GraphKey {
    let colors = vec![Vec::new(); adj.len()];
    let mut key = b"UG".to_vec();
    push_len(&mut key, adj.len());
    key.extend(canonical_encoding(adj, &colors));
    GraphKey(key)
}

/// Least encoding over all discrete refinements of the color partition.
fn canonical_encoding(adj: &[Vec<usize>], colors: &[Vec<u8>]) -> Vec<u8> {
    let n = adj.len();
    if n == 0 {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| colors[a].cmp(&colors[b]));
    let mut cells: Vec<Vec<usize>> = Vec::new();
    for &v in &order {
        match cells.last_mut() {
            Some(cell) if colors[cell[0]] == colors[v] => cell.push(v),
            _ => cells.push(vec![v]),
        }
    }
    let mut search = Search {
        adj,
        colors,
        best: None,
    };
    search.run(cells);
    search.best.expect("search reaches at least one leaf")
}

struct Search<'a> {
    adj: &'a [Vec<usize>],
    colors: &'a [Vec<u8>],
    best: Option<Vec<u8>>,
}

impl Search<'_> {
    fn run(&mut self, cells: Vec<Vec<usize>>) {
        let cells = refine(self.adj, cells);
        let Some(target) = cells.iter().position(|c| c.len() > 1) else {
            let order: Vec<usize> = cells.iter().map(|c| c[0]).collect();
            let enc = self.encode(&order);
            if self.best.as_ref().is_none_or(|b| enc < *b) {
                self.best = Some(enc);
            }
            return;
        };
        let mut tried: Vec<usize> = Vec::new();
        for &v in &cells[target] {
            if tried.iter().any(|&u| self.twins(u, v)) {
                continue;
            }
            tried.push(v);
            let mut next = Vec::with_capacity(cells.len() + 1);
            next.extend_from_slice(&cells[..target]);
            next.push(vec![v]);
            next.push(cells[target].iter().copied().filter(|&w| w != v).collect());
            next.extend_from_slice(&cells[target + 1..]);
            self.run(next);
        }
    }

    /// Whether swapping `u` and `v` is an automorphism (same cell, same
    /// neighbourhood apart from each other).
    fn twins(&self, u: usize, v: usize) -> bool {
        let mut a: Vec<usize> = self.adj[u].iter().copied().filter(|&w| w != v).collect();
        let mut b: Vec<usize> = self.adj[v].iter().copied().filter(|&w| w != u).collect();
        a.sort_unstable();
        b.sort_unstable();
        a == b
    }

    fn encode(&self, order: &[usize]) -> Vec<u8> {
        let n = order.len();
        let mut pos = vec![0usize; n];
        for (i, &v) in order.iter().enumerate() {
            pos[v] = i;
        }
        let mut out = Vec::new();
        for &v in order {
            push_len(&mut out, self.colors[v].len());
            out.extend_from_slice(&self.colors[v]);
            let mut nbrs: Vec<usize> = self.adj[v].iter().map(|&w| pos[w]).collect();
            nbrs.sort_unstable();
            push_len(&mut out, nbrs.len());
            for p in nbrs {
                push_len(&mut out, p);
            }
        }
        out
    }
}

/// Refines an ordered partition until it is equitable. Cells are split by the
/// sorted list of cell indices of each vertex's neighbours; subcells keep the
/// order of their signatures, so the result is isomorphism-invariant.
fn refine(adj: &[Vec<usize>], mut cells: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut cell_of = vec![0usize; n];
    loop {
        for (i, cell) in cells.iter().enumerate() {
            for &v in cell {
                cell_of[v] = i;
            }
        }
        let mut changed = false;
        let mut next = Vec::with_capacity(cells.len());
        for cell in cells {
            if cell.len() == 1 {
                next.push(cell);
                continue;
            }
            let mut keyed: Vec<(Vec<usize>, usize)> = cell
                .iter()
                .map(|&v| {
                    let mut sig: Vec<usize> = adj[v].iter().map(|&w| cell_of[w]).collect();
                    sig.sort_unstable();
                    (sig, v)
                })
                .collect();
            keyed.sort();
            let mut groups = 0;
            let mut last: Option<Vec<usize>> = None;
            for (sig, v) in keyed {
                if last.as_ref() == Some(&sig) {
                    next.last_mut().expect("group opened").push(v);
                } else {
                    next.push(vec![v]);
                    last = Some(sig);
                    groups += 1;
                }
            }
            if groups > 1 {
                changed = true;
            }
        }
        cells = next;
        if !changed {
            return cells;
        }
    }
}
