#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sublinear_core::AttributedGraph;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Attributes uniform in [-1, 1], each edge present with probability 1/2.
pub fn random_graph(rng: &mut ChaCha8Rng, order: usize, d: usize) -> AttributedGraph {
    let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..d).map(|_| rng.random_range(-1.0..1.0)).collect() };
    let nodes: Vec<Vec<f64>> = (0..order).map(|_| draw(rng)).collect();
    let mut g = AttributedGraph::from_nodes(d, &nodes).unwrap();
    for i in 0..order {
        for j in i + 1..order {
            if rng.random_bool(0.5) {
                let mut a = draw(rng);
                if a.iter().all(|&v| v == 0.0) {
                    a[0] = 0.5;
                }
                g.add_edge(i, j, &a).unwrap();
            }
        }
    }
    g
}

fn attr(g: &AttributedGraph, i: usize, j: usize) -> Option<&[f64]> {
    if i == j {
        Some(g.node(i))
    } else {
        g.edge(i, j)
    }
}

fn inner(a: Option<&[f64]>, b: Option<&[f64]>) -> f64 {
    match (a, b) {
        (Some(a), Some(b)) => a.iter().zip(b).map(|(p, q)| p * q).sum(),
        _ => 0.0,
    }
}

/// Correspondence kernel of an explicit list of matched pairs `(i, r)`.
pub fn kernel(x: &AttributedGraph, y: &AttributedGraph, pairs: &[(usize, usize)]) -> f64 {
    let mut k = 0.0;
    for &(i, r) in pairs {
        for &(j, s) in pairs {
            k += inner(attr(x, i, j), attr(y, r, s));
        }
    }
    k
}

/// Maximum of the kernel over every injective map from the nodes of the
/// smaller graph into the larger one. Unmatched nodes only contribute zero
/// terms, so maximal matches cover every match matrix.
pub fn oracle_sdp(x: &AttributedGraph, y: &AttributedGraph) -> f64 {
    if x.order() == 0 || y.order() == 0 {
        return 0.0;
    }
    let swap = x.order() > y.order();
    let (small, large) = if swap { (y, x) } else { (x, y) };
    let mut best = f64::NEG_INFINITY;
    let mut used = vec![false; large.order()];
    let mut pairs = Vec::with_capacity(small.order());
    extend(small, large, swap, x, y, &mut used, &mut pairs, &mut best);
    best
}

#[allow(clippy::too_many_arguments)]
fn extend(
    small: &AttributedGraph,
    large: &AttributedGraph,
    swap: bool,
    x: &AttributedGraph,
    y: &AttributedGraph,
    used: &mut [bool],
    pairs: &mut Vec<(usize, usize)>,
    best: &mut f64,
) {
    let i = pairs.len();
    if i == small.order() {
        let oriented: Vec<(usize, usize)> = if swap {
            pairs.iter().map(|&(a, b)| (b, a)).collect()
        } else {
            pairs.clone()
        };
        *best = best.max(kernel(x, y, &oriented));
        return;
    }
    for r in 0..large.order() {
        if !used[r] {
            used[r] = true;
            pairs.push((i, r));
            extend(small, large, swap, x, y, used, pairs, best);
            pairs.pop();
            used[r] = false;
        }
    }
}

pub fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// Random graph with order drawn uniformly from `lo..=hi`.
pub fn random_sized(rng: &mut ChaCha8Rng, lo: usize, hi: usize, d: usize) -> AttributedGraph {
    let n = rng.random_range(lo..=hi);
    random_graph(rng, n, d)
}
