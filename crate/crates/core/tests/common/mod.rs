#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sublinear_core::{AttributedGraph, Permutation};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random graph with attributes uniform in [-2, 2] and edge probability 1/2.
pub fn random_graph(rng: &mut ChaCha8Rng, order: usize, d: usize) -> AttributedGraph {
    let nodes: Vec<Vec<f64>> = (0..order)
        .map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect())
        .collect();
    let mut g = AttributedGraph::from_nodes(d, &nodes).unwrap();
    for i in 0..order {
        for j in i + 1..order {
            if rng.random_bool(0.5) {
                let mut a: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
                if a.iter().all(|&v| v == 0.0) {
                    a[0] = 1.0;
                }
                g.add_edge(i, j, &a).unwrap();
            }
        }
    }
    g
}

pub fn random_permutation(rng: &mut ChaCha8Rng, n: usize) -> Permutation {
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        p.swap(i, j);
    }
    Permutation::new(p).unwrap()
}

/// Attribute of the (i, j) slot read straight off the graph, zero for
/// non-edges and for nodes beyond the order.
fn slot(g: &AttributedGraph, i: usize, j: usize) -> Vec<f64> {
    let d = g.attr_dim();
    if i >= g.order() || j >= g.order() {
        return vec![0.0; d];
    }
    if i == j {
        return g.node(i).to_vec();
    }
    g.edge(i, j).map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; d])
}

/// Brute-force sublinear dot product: every 0/1 match matrix derived from a
/// permutation of the common order, kernel expanded as the quadruple sum
/// Σ_{i,j,r,s} m_ir m_js <x_ij, y_rs>.
pub fn oracle_sdp(x: &AttributedGraph, y: &AttributedGraph) -> f64 {
    let n = x.order().max(y.order());
    let mut best = f64::NEG_INFINITY;
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        let mut mm = vec![vec![0.0; y.order()]; x.order()];
        for i in 0..x.order() {
            if perm[i] < y.order() {
                mm[i][perm[i]] = 1.0;
            }
        }
        let mut k = 0.0;
        for i in 0..x.order() {
            for j in 0..x.order() {
                for r in 0..y.order() {
                    for s in 0..y.order() {
                        let w = mm[i][r] * mm[j][s];
                        if w != 0.0 {
                            let a = slot(x, i, j);
                            let b = slot(y, r, s);
                            k += w * a.iter().zip(&b).map(|(p, q)| p * q).sum::<f64>();
                        }
                    }
                }
            }
        }
        best = best.max(k);
        if !next_permutation(&mut perm) {
            break;
        }
    }
    if n == 0 {
        0.0
    } else {
        best
    }
}

/// All representations of `g` as vectors (one per permutation).
pub fn all_representations(g: &AttributedGraph) -> Vec<Vec<f64>> {
    let n = g.order();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    loop {
        let p = Permutation::new(perm.clone()).unwrap();
        out.push(g.to_representation().apply_permutation(&p).unwrap().into_cells());
        if !next_permutation(&mut perm) {
            break;
        }
    }
    out
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
