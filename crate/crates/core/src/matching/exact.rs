use alloc::vec;
use alloc::vec::Vec;

use super::{check_pair, pair_kernel, MatchMatrix, MatchResult};
use crate::error::{Error, Result};
use crate::graph::{dot, Representation};

/// Exhaustive search over all permutations of the padded common order.
///
/// The search sums in floating point; leaves within `1e-13 * |x| * |y|` of
/// the running best are re-scored with the correctly rounded kernel, so the
/// result does not depend on node numbering. Among maximizers the
/// lexicographically smallest permutation wins.
pub fn exact_match(rx: &Representation, ry: &Representation, max_order: usize) -> Result<MatchResult> {
    check_pair(rx, ry)?;
    let (m, k) = (rx.order(), ry.order());
    let n = m.max(k);
    if n > max_order {
        return Err(Error::Capacity {
            order: n,
            max: max_order,
        });
    }

    let table = PairTable::new(rx, ry, n);
    let tol = 1e-13 * libm::sqrt(rx.norm_squared() * ry.norm_squared());
    let mut search = Search {
        rx,
        ry,
        table: &table,
        n,
        tol,
        perm: vec![0; n],
        used: vec![false; n],
        best: f64::NEG_INFINITY,
        best_exact: f64::NEG_INFINITY,
        best_perm: (0..n).collect(),
    };
    if n > 0 {
        search.descend(0, 0.0);
    }

    let matching = MatchMatrix::from_padded(m, k, &search.best_perm);
    Ok(MatchResult {
        value: if n == 0 { 0.0 } else { search.best_exact },
        matching,
        exact: true,
    })
}

/// `<x_ij, y_rs>` for all index quadruples of the padded order; padded
/// entries are zero.
struct PairTable {
    n: usize,
    values: Vec<f64>,
}

impl PairTable {
    fn new(rx: &Representation, ry: &Representation, n: usize) -> Self {
        let (m, k) = (rx.order(), ry.order());
        let mut values = vec![0.0; n * n * n * n];
        for i in 0..m {
            for j in 0..m {
                let xc = rx.cell(i, j);
                if xc.iter().all(|&v| v == 0.0) {
                    continue;
                }
                for r in 0..k {
                    for s in 0..k {
                        values[((i * n + j) * n + r) * n + s] = dot(xc, ry.cell(r, s));
                    }
                }
            }
        }
        Self { n, values }
    }

    #[inline]
    fn get(&self, i: usize, j: usize, r: usize, s: usize) -> f64 {
        self.values[((i * self.n + j) * self.n + r) * self.n + s]
    }
}

struct Search<'a> {
    rx: &'a Representation,
    ry: &'a Representation,
    table: &'a PairTable,
    n: usize,
    tol: f64,
    perm: Vec<usize>,
    used: Vec<bool>,
    best: f64,
    best_exact: f64,
    best_perm: Vec<usize>,
}

impl Search<'_> {
    fn exact_value(&self) -> f64 {
        let (m, k) = (self.rx.order(), self.ry.order());
        let pairs: Vec<(usize, usize)> = (0..m)
            .filter(|&i| self.perm[i] < k)
            .map(|i| (i, self.perm[i]))
            .collect();
        pair_kernel(self.rx, self.ry, &pairs)
    }

    // Candidates are tried in ascending order, so leaves are visited in
    // lexicographic order of the permutation.
    fn descend(&mut self, depth: usize, partial: f64) {
        for t in 0..self.n {
            if self.used[t] {
                continue;
            }
            let mut gain = self.table.get(depth, depth, t, t);
            for j in 0..depth {
                let pj = self.perm[j];
                gain += self.table.get(depth, j, t, pj) + self.table.get(j, depth, pj, t);
            }
            self.perm[depth] = t;
            let value = partial + gain;
            if depth + 1 == self.n {
                if value >= self.best - self.tol {
                    let exact = self.exact_value();
                    if value > self.best + self.tol || exact > self.best_exact {
                        self.best = value;
                        self.best_exact = exact;
                        self.best_perm.copy_from_slice(&self.perm);
                    }
                }
            } else {
                self.used[t] = true;
                self.descend(depth + 1, value);
                self.used[t] = false;
            }
        }
    }
}
