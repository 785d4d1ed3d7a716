use serde::{Deserialize, Serialize};

use super::DisjointSet;
use crate::{Error, Point, Result};

/// Point sets up to this size use Kruskal on the complete graph; larger ones
/// use dense Prim.
const KRUSKAL_LIMIT: usize = 2000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MstEdge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

/// Finite death scales of 0-dimensional Rips persistence, sorted descending.
/// The single essential class is implicit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PersistenceDiagram0 {
    pub deaths: Vec<f64>,
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Euclidean minimum spanning tree, edges in non-decreasing weight order.
pub fn minimum_spanning_tree(points: &[Point]) -> Vec<MstEdge> {
    let mut edges = if points.len() <= KRUSKAL_LIMIT {
        kruskal(points)
    } else {
        prim(points)
    };
    edges.sort_by(|x, y| x.weight.total_cmp(&y.weight).then(x.a.cmp(&y.a)).then(x.b.cmp(&y.b)));
    edges
}

fn kruskal(points: &[Point]) -> Vec<MstEdge> {
    let n = points.len();
    let mut all = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for a in 0..n {
        for b in a + 1..n {
            all.push(MstEdge {
                a,
                b,
                weight: distance(&points[a], &points[b]),
            });
        }
    }
    all.sort_unstable_by(|x, y| x.weight.total_cmp(&y.weight).then(x.a.cmp(&y.a)).then(x.b.cmp(&y.b)));
    let mut ds = DisjointSet::new(n);
    let mut tree = Vec::with_capacity(n.saturating_sub(1));
    for e in all {
        if ds.union(e.a, e.b) {
            tree.push(e);
            if tree.len() + 1 == n {
                break;
            }
        }
    }
    tree
}

fn prim(points: &[Point]) -> Vec<MstEdge> {
    let n = points.len();
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut from = vec![0usize; n];
    let mut tree = Vec::with_capacity(n.saturating_sub(1));
    let mut current = 0;
    in_tree[0] = true;
    for _ in 1..n {
        let mut next = usize::MAX;
        let mut next_w = f64::INFINITY;
        for v in 0..n {
            if in_tree[v] {
                continue;
            }
            let w = distance(&points[current], &points[v]);
            if w < best[v] {
                best[v] = w;
                from[v] = current;
            }
            if best[v] < next_w || next == usize::MAX {
                next_w = best[v];
                next = v;
            }
        }
        in_tree[next] = true;
        let (a, b) = (from[next].min(next), from[next].max(next));
        tree.push(MstEdge { a, b, weight: next_w });
        current = next;
    }
    tree
}

/// Single-linkage merge heights of the Vietoris–Rips filtration.
pub fn persistence0(points: &[Point]) -> Result<PersistenceDiagram0> {
    if points.len() < 2 {
        return Err(Error::EmptyInput("persistence needs at least two points"));
    }
    let mut deaths: Vec<f64> = minimum_spanning_tree(points)
        .into_iter()
        .map(|e| e.weight)
        .collect();
    deaths.sort_by(|a, b| b.total_cmp(a));
    Ok(PersistenceDiagram0 { deaths })
}
