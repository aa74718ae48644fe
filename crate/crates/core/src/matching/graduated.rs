//! Graduated assignment: deterministic annealing over soft match matrices.
//!
//! At inverse temperature `beta` the soft match is set to
//! `exp(beta * Q / |Q|_max)` where `Q_ir = Σ_{j≠i, s≠r} m_js <x_ij, y_rs> + <x_ii, y_rr>`
//! is the compatibility of pairing node `i` with node `r` under the current
//! soft match, then balanced by Sinkhorn iterations. When orders differ, the
//! smaller side is required to be fully matched and a single slack row (or
//! column) absorbs the unmatched mass of the larger side. The final soft
//! matrix is discretized greedily and optionally polished by pairwise swaps.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::{check_pair, kernel_value, GaParams, MatchMatrix, MatchResult};
use crate::error::{invalid, Result};
use crate::graph::{dot, Representation};

pub fn graduated_match(rx: &Representation, ry: &Representation, params: &GaParams) -> Result<MatchResult> {
    check_pair(rx, ry)?;
    params.validate()?;
    if !rx.as_slice().iter().chain(ry.as_slice()).all(|v| v.is_finite()) {
        return Err(invalid("non-finite attribute values"));
    }
    let (m, k) = (rx.order(), ry.order());
    let compat = Compat::new(rx, ry);

    let assignment = if m == 0 || k == 0 {
        vec![None; m]
    } else {
        let soft = anneal(&compat, params);
        let mut hard = discretize(&soft, m, k);
        if params.local_search {
            polish(&compat, &mut hard, k);
        }
        hard
    };

    let matching = MatchMatrix::new(m, k, assignment)?;
    let value = kernel_value(rx, ry, &matching)?;
    Ok(MatchResult {
        value,
        matching,
        exact: false,
    })
}

struct Compat {
    m: usize,
    k: usize,
    // <x_ii, y_rr>, m x k
    node: Vec<f64>,
    // <x_ij, y_rs> for i != j, r != s; zero elsewhere
    edge: Vec<f64>,
    scale: f64,
}

impl Compat {
    fn new(rx: &Representation, ry: &Representation) -> Self {
        let (m, k) = (rx.order(), ry.order());
        let mut node = vec![0.0; m * k];
        let mut edge = vec![0.0; m * m * k * k];
        for i in 0..m {
            for r in 0..k {
                node[i * k + r] = dot(rx.cell(i, i), ry.cell(r, r));
            }
            for j in 0..m {
                if i == j {
                    continue;
                }
                let xc = rx.cell(i, j);
                if xc.iter().all(|&v| v == 0.0) {
                    continue;
                }
                for r in 0..k {
                    for s in 0..k {
                        if r != s {
                            edge[((i * m + j) * k + r) * k + s] = dot(xc, ry.cell(r, s));
                        }
                    }
                }
            }
        }
        let scale = libm::sqrt(rx.norm_squared() * ry.norm_squared());
        Self {
            m,
            k,
            node,
            edge,
            scale,
        }
    }

    #[inline]
    fn edge(&self, i: usize, j: usize, r: usize, s: usize) -> f64 {
        self.edge[((i * self.m + j) * self.k + r) * self.k + s]
    }

    fn hard_value(&self, assignment: &[Option<usize>]) -> f64 {
        let mut total = 0.0;
        for (i, a) in assignment.iter().enumerate() {
            let Some(r) = *a else { continue };
            total += self.node[i * self.k + r];
            for (j, b) in assignment.iter().enumerate() {
                if let (true, Some(s)) = (i != j, *b) {
                    total += self.edge(i, j, r, s);
                }
            }
        }
        total
    }
}

/// Soft match of shape `rows x cols`, the real block being `m x k`.
struct Soft {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl Soft {
    #[inline]
    fn at(&self, i: usize, r: usize) -> f64 {
        self.values[i * self.cols + r]
    }
}

fn anneal(c: &Compat, p: &GaParams) -> Soft {
    let (m, k) = (c.m, c.k);
    let rows = m + usize::from(m < k);
    let cols = k + usize::from(m > k);
    let init = 1.0 / m.max(k) as f64;
    let mut soft = Soft {
        rows,
        cols,
        values: vec![init; rows * cols],
    };
    let mut q = vec![0.0; m * k];

    let mut beta = p.beta_start;
    while beta <= p.beta_max {
        for _ in 0..p.assignment_rounds_max {
            compatibility(c, &soft, &mut q);
            let qmax = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let qscale = q.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
            let mut next = Soft {
                rows,
                cols,
                values: vec![0.0; rows * cols],
            };
            for i in 0..rows {
                for r in 0..cols {
                    let qir = if i < m && r < k { q[i * k + r] } else { 0.0 };
                    next.values[i * cols + r] = if qscale > 0.0 {
                        libm::exp(beta * (qir - qmax) / qscale)
                    } else {
                        1.0
                    };
                }
            }
            sinkhorn(&mut next, m, k, p);
            let change = (0..m)
                .flat_map(|i| (0..k).map(move |r| (i, r)))
                .fold(0.0_f64, |a, (i, r)| a.max((next.at(i, r) - soft.at(i, r)).abs()));
            soft = next;
            if change < p.sinkhorn_tol {
                break;
            }
        }
        beta *= p.beta_rate;
    }
    soft
}

fn compatibility(c: &Compat, soft: &Soft, q: &mut [f64]) {
    let (m, k) = (c.m, c.k);
    for i in 0..m {
        for r in 0..k {
            let mut acc = c.node[i * k + r];
            for j in 0..m {
                if j == i {
                    continue;
                }
                for s in 0..k {
                    let w = soft.at(j, s);
                    if w != 0.0 {
                        acc += w * c.edge(i, j, r, s);
                    }
                }
            }
            q[i * k + r] = acc;
        }
    }
}

// Real rows sum to one over all columns, real columns sum to one over all
// rows. A slack row or column is never normalized on its own.
fn sinkhorn(s: &mut Soft, m: usize, k: usize, p: &GaParams) {
    let (rows, cols) = (s.rows, s.cols);
    for _ in 0..p.sinkhorn_max_iters {
        for i in 0..m {
            let row = &mut s.values[i * cols..(i + 1) * cols];
            let sum: f64 = row.iter().sum();
            if sum > 0.0 {
                row.iter_mut().for_each(|v| *v /= sum);
            }
        }
        for r in 0..k {
            let sum: f64 = (0..rows).map(|i| s.values[i * cols + r]).sum();
            if sum > 0.0 {
                for i in 0..rows {
                    s.values[i * cols + r] /= sum;
                }
            }
        }
        let worst = (0..m)
            .map(|i| (s.values[i * cols..(i + 1) * cols].iter().sum::<f64>() - 1.0).abs())
            .fold(0.0_f64, f64::max);
        if worst < p.sinkhorn_tol {
            break;
        }
    }
}

/// Repeatedly takes the largest remaining entry of the real block; ties go
/// to the smallest row, then column.
fn discretize(soft: &Soft, m: usize, k: usize) -> Vec<Option<usize>> {
    let mut cells: Vec<(usize, usize)> = (0..m).flat_map(|i| (0..k).map(move |r| (i, r))).collect();
    cells.sort_by(|&(i, r), &(j, s)| {
        soft.at(j, s)
            .partial_cmp(&soft.at(i, r))
            .unwrap_or(Ordering::Equal)
            .then((i, r).cmp(&(j, s)))
    });
    let mut assignment = vec![None; m];
    let mut col_used = vec![false; k];
    let mut left = m.min(k);
    for (i, r) in cells {
        if left == 0 {
            break;
        }
        if assignment[i].is_none() && !col_used[r] {
            assignment[i] = Some(r);
            col_used[r] = true;
            left -= 1;
        }
    }
    assignment
}

/// First-improvement hill climbing over swaps of two rows' targets and moves
/// of a row onto an unused column (or of a column onto an unused row).
fn polish(c: &Compat, assignment: &mut [Option<usize>], k: usize) {
    let m = assignment.len();
    let tol = 1e-12 * c.scale.max(f64::MIN_POSITIVE);
    let mut current = c.hard_value(assignment);
    for _ in 0..64 {
        let mut improved = false;
        for i in 0..m {
            for j in i + 1..m {
                if assignment[i].is_none() && assignment[j].is_none() {
                    continue;
                }
                assignment.swap(i, j);
                let v = c.hard_value(assignment);
                if v > current + tol {
                    current = v;
                    improved = true;
                } else {
                    assignment.swap(i, j);
                }
            }
            if m < k && assignment[i].is_some() {
                for r in 0..k {
                    if assignment.contains(&Some(r)) {
                        continue;
                    }
                    let old = assignment[i];
                    assignment[i] = Some(r);
                    let v = c.hard_value(assignment);
                    if v > current + tol {
                        current = v;
                        improved = true;
                    } else {
                        assignment[i] = old;
                    }
                }
            }
        }
        if !improved {
            break;
        }
    }
}
