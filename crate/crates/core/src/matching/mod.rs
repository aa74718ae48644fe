//! The sublinear dot product `X·Y`: the correspondence kernel maximized over
//! one-to-one node matches.
//!
//! Two solvers are provided. [`exact_sdp`] enumerates every permutation of
//! the common padded order and is the reference. [`ga_sdp`] runs graduated
//! assignment (softassign with Sinkhorn balancing) and always returns a
//! feasible match, so its value is a lower bound on the exact one.
//!
//! Match matrices use rows for the nodes of the first argument and columns
//! for the nodes of the second.

mod exact;
mod graduated;

use core::sync::atomic::{AtomicUsize, Ordering};

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::{AttributedGraph, Representation};
use crate::numeric::ExactSum;

pub use exact::exact_match;
pub use graduated::graduated_match;

/// Partial injective map from rows (nodes of X) to columns (nodes of Y)
/// covering `min(rows, cols)` pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchMatrix {
    rows: usize,
    cols: usize,
    assignment: Vec<Option<usize>>,
}

impl MatchMatrix {
    pub fn new(rows: usize, cols: usize, assignment: Vec<Option<usize>>) -> Result<Self> {
        if assignment.len() != rows {
            return Err(Error::Size {
                expected: rows,
                found: assignment.len(),
            });
        }
        let mut taken = vec![false; cols];
        let mut count = 0;
        for &c in assignment.iter().flatten() {
            if c >= cols || taken[c] {
                return Err(invalid(format!("column {c} assigned twice or out of range")));
            }
            taken[c] = true;
            count += 1;
        }
        if count != rows.min(cols) {
            return Err(invalid(format!(
                "match covers {count} pairs, expected {}",
                rows.min(cols)
            )));
        }
        Ok(Self {
            rows,
            cols,
            assignment,
        })
    }

    /// Restricts a permutation of the padded order to the real rows/columns.
    pub(crate) fn from_padded(rows: usize, cols: usize, perm: &[usize]) -> Self {
        let assignment = perm[..rows]
            .iter()
            .map(|&c| (c < cols).then_some(c))
            .collect();
        Self {
            rows,
            cols,
            assignment,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: n,
            cols: n,
            assignment: (0..n).map(Some).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize) -> Option<usize> {
        self.assignment[row]
    }

    /// Assigned `(row, col)` pairs in row order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.assignment
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.map(|c| (i, c)))
    }

    pub fn transpose(&self) -> Self {
        let mut assignment = vec![None; self.cols];
        for (i, c) in self.pairs() {
            assignment[c] = Some(i);
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            assignment,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchMethod {
    Exact,
    Graduated,
}

/// Annealing schedule and balancing tolerances for graduated assignment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaParams {
    pub beta_start: f64,
    pub beta_rate: f64,
    pub beta_max: f64,
    pub sinkhorn_max_iters: usize,
    pub sinkhorn_tol: f64,
    pub assignment_rounds_max: usize,
    /// Pairwise-swap hill climbing on the discretized match.
    pub local_search: bool,
}

impl Default for GaParams {
    fn default() -> Self {
        Self {
            beta_start: 0.5,
            beta_rate: 1.075,
            beta_max: 10.0,
            sinkhorn_max_iters: 30,
            sinkhorn_tol: 0.005,
            assignment_rounds_max: 4,
            local_search: true,
        }
    }
}

impl GaParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.beta_start > 0.0
            && self.beta_rate > 1.0
            && self.beta_max > self.beta_start
            && self.sinkhorn_tol > 0.0
            && self.sinkhorn_max_iters >= 1
            && self.assignment_rounds_max >= 1;
        if ok {
            Ok(())
        } else {
            Err(invalid(format!("invalid graduated assignment parameters {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MatcherConfig {
    pub method: MatchMethod,
    pub exact_max_order: usize,
    pub ga: GaParams,
}

impl Default for MatcherConfig {
    fn default() -> Self {
        Self {
            method: MatchMethod::Exact,
            exact_max_order: 8,
            ga: GaParams::default(),
        }
    }
}

impl MatcherConfig {
    pub fn exact() -> Self {
        Self::default()
    }

    pub fn graduated() -> Self {
        Self {
            method: MatchMethod::Graduated,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.exact_max_order < 1 {
            return Err(invalid("exact_max_order must be at least 1"));
        }
        self.ga.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    /// Kernel value recomputed at `matching`.
    pub value: f64,
    pub matching: MatchMatrix,
    /// True iff produced by exhaustive enumeration.
    pub exact: bool,
}

/// Counts solver invocations; shared by reference between callers that want
/// to account for matching work.
#[derive(Debug, Default)]
pub struct MatchStats {
    calls: AtomicUsize,
}

impl MatchStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }

    pub(crate) fn record(&self) {
        self.calls.fetch_add(1, Ordering::Relaxed);
    }
}

/// `k_M(X, Y) = Σ m_ir m_js <x_ij, y_rs>` over the assigned pairs.
pub fn kernel_value(rx: &Representation, ry: &Representation, m: &MatchMatrix) -> Result<f64> {
    check_pair(rx, ry)?;
    if m.rows() != rx.order() || m.cols() != ry.order() {
        return Err(Error::Size {
            expected: rx.order() * ry.order(),
            found: m.rows() * m.cols(),
        });
    }
    let pairs: Vec<(usize, usize)> = m.pairs().collect();
    Ok(pair_kernel(rx, ry, &pairs))
}

/// Correctly rounded kernel over explicit pairs, so the value depends only
/// on the set of matched cells and not on node numbering or argument order.
pub(crate) fn pair_kernel(rx: &Representation, ry: &Representation, pairs: &[(usize, usize)]) -> f64 {
    let mut total = ExactSum::new();
    for &(i, r) in pairs {
        for &(j, s) in pairs {
            for (a, b) in rx.cell(i, j).iter().zip(ry.cell(r, s)) {
                total.add(a * b);
            }
        }
    }
    total.value()
}

pub(crate) fn check_pair(rx: &Representation, ry: &Representation) -> Result<()> {
    if rx.attr_dim() != ry.attr_dim() {
        return Err(Error::DimensionMismatch {
            expected: rx.attr_dim(),
            found: ry.attr_dim(),
        });
    }
    Ok(())
}

/// Dispatches on the configured method.
///
/// With `MatchMethod::Exact` an order above the cap is a capacity error
/// rather than a silent fallback.
pub fn match_representations(
    rx: &Representation,
    ry: &Representation,
    cfg: &MatcherConfig,
) -> Result<MatchResult> {
    match cfg.method {
        MatchMethod::Exact => exact_match(rx, ry, cfg.exact_max_order),
        MatchMethod::Graduated => graduated_match(rx, ry, &cfg.ga),
    }
}

pub(crate) fn match_tracked(
    rx: &Representation,
    ry: &Representation,
    cfg: &MatcherConfig,
    stats: Option<&MatchStats>,
) -> Result<MatchResult> {
    if let Some(s) = stats {
        s.record();
    }
    match_representations(rx, ry, cfg)
}

pub fn exact_sdp(x: &AttributedGraph, y: &AttributedGraph, max_order: usize) -> Result<MatchResult> {
    exact_match(&x.to_representation(), &y.to_representation(), max_order)
}

pub fn ga_sdp(x: &AttributedGraph, y: &AttributedGraph, params: &GaParams) -> Result<MatchResult> {
    x.ensure_finite()?;
    y.ensure_finite()?;
    graduated_match(&x.to_representation(), &y.to_representation(), params)
}

pub fn sdp(x: &AttributedGraph, y: &AttributedGraph, cfg: &MatcherConfig) -> Result<MatchResult> {
    match cfg.method {
        MatchMethod::Exact => exact_sdp(x, y, cfg.exact_max_order),
        MatchMethod::Graduated => ga_sdp(x, y, &cfg.ga),
    }
}

/// Representation of `x` reordered onto the node slots of `rw`, such that
/// `<rw, aligned> = rw · x`.
///
/// The result has the order of `rw`: nodes of `x` beyond that order are left
/// out and missing nodes are zero.
pub fn optimal_align(
    rw: &Representation,
    x: &AttributedGraph,
    cfg: &MatcherConfig,
) -> Result<Representation> {
    align_tracked(rw, &x.to_representation(), cfg, None).map(|(aligned, _)| aligned)
}

pub(crate) fn align_tracked(
    rw: &Representation,
    rx: &Representation,
    cfg: &MatcherConfig,
    stats: Option<&MatchStats>,
) -> Result<(Representation, f64)> {
    let res = match_tracked(rw, rx, cfg, stats)?;
    let n = rw.order();
    let mut out = Representation::zeros(n, rw.attr_dim());
    let pairs: Vec<(usize, usize)> = res.matching.pairs().collect();
    for &(r, i) in &pairs {
        for &(s, j) in &pairs {
            out.cell_mut(r, s).copy_from_slice(rx.cell(i, j));
        }
    }
    Ok((out, res.value))
}

/// Orbit distance `sqrt(X·X - 2 X·Y + Y·Y)`, radicand clamped at zero.
///
/// Self products use the representation norm, which equals `X·X` exactly.
pub fn induced_distance(x: &AttributedGraph, y: &AttributedGraph, cfg: &MatcherConfig) -> Result<f64> {
    distance_tracked(&x.to_representation(), &y.to_representation(), cfg, None)
}

pub(crate) fn distance_tracked(
    rx: &Representation,
    ry: &Representation,
    cfg: &MatcherConfig,
    stats: Option<&MatchStats>,
) -> Result<f64> {
    let xy = match_tracked(rx, ry, cfg, stats)?.value;
    let sq = rx.norm_squared() - 2.0 * xy + ry.norm_squared();
    Ok(libm::sqrt(sq.max(0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Permutation;

    fn x() -> AttributedGraph {
        AttributedGraph::from_parts(1, &[[1.0], [2.0]], &[(0, 1, vec![1.0])]).unwrap()
    }

    fn y() -> AttributedGraph {
        AttributedGraph::from_parts(1, &[[2.0], [1.0]], &[(0, 1, vec![1.0])]).unwrap()
    }

    #[test]
    fn kernel_examples() {
        let a = AttributedGraph::from_nodes(1, &[[3.0]]).unwrap().to_representation();
        let b = AttributedGraph::from_nodes(1, &[[2.0]]).unwrap().to_representation();
        assert_eq!(kernel_value(&a, &b, &MatchMatrix::identity(1)).unwrap(), 6.0);

        let (rx, ry) = (x().to_representation(), y().to_representation());
        let swap = MatchMatrix::new(2, 2, vec![Some(1), Some(0)]).unwrap();
        assert_eq!(kernel_value(&rx, &ry, &MatchMatrix::identity(2)).unwrap(), 6.0);
        assert_eq!(kernel_value(&rx, &ry, &swap).unwrap(), 7.0);

        let zero = Representation::zeros(2, 1);
        assert_eq!(kernel_value(&rx, &zero, &swap).unwrap(), 0.0);
    }

    #[test]
    fn kernel_shape_errors() {
        let rx = x().to_representation();
        assert!(kernel_value(&rx, &rx, &MatchMatrix::identity(3)).is_err());
        let other = Representation::zeros(2, 2);
        assert!(matches!(
            kernel_value(&rx, &other, &MatchMatrix::identity(2)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn match_matrix_constraints() {
        assert!(MatchMatrix::new(2, 3, vec![Some(0), Some(0)]).is_err());
        assert!(MatchMatrix::new(2, 3, vec![Some(0), None]).is_err());
        assert!(MatchMatrix::new(3, 2, vec![Some(1), None, Some(0)]).is_ok());
        let m = MatchMatrix::new(3, 2, vec![Some(1), None, Some(0)]).unwrap();
        assert_eq!(m.transpose().transpose(), m);
    }

    #[test]
    fn exact_examples() {
        let r = exact_sdp(&x(), &x(), 8).unwrap();
        assert_eq!(r.value, 7.0);
        assert!(r.exact);
        assert_eq!(r.matching, MatchMatrix::identity(2));

        let r = exact_sdp(&x(), &y(), 8).unwrap();
        assert_eq!(r.value, 7.0);
        assert_eq!(r.matching.get(0), Some(1));

        let zero = AttributedGraph::empty(1, 3).unwrap();
        assert_eq!(exact_sdp(&x(), &zero, 8).unwrap().value, 0.0);
    }

    #[test]
    fn dispatch() {
        let r = sdp(&x(), &y(), &MatcherConfig::exact()).unwrap();
        assert!(r.exact);
        let r = sdp(&x(), &y(), &MatcherConfig::graduated()).unwrap();
        assert!(!r.exact);
        assert_eq!(r.value, 7.0);
        let big = AttributedGraph::empty(1, 20).unwrap();
        assert!(matches!(
            sdp(&big, &x(), &MatcherConfig::exact()),
            Err(Error::Capacity { order: 20, max: 8 })
        ));
    }

    #[test]
    fn ga_single_node() {
        let a = AttributedGraph::from_nodes(2, &[[1.0, -2.0]]).unwrap();
        let b = AttributedGraph::from_nodes(2, &[[0.5, 3.0]]).unwrap();
        let g = ga_sdp(&a, &b, &GaParams::default()).unwrap();
        let e = exact_sdp(&a, &b, 8).unwrap();
        assert_eq!(g.value, e.value);
        assert_eq!(g.matching, e.matching);
    }

    #[test]
    fn ga_rejects_non_finite() {
        let a = AttributedGraph::from_nodes(1, &[[f64::NAN]]).unwrap();
        assert!(ga_sdp(&a, &x(), &GaParams::default()).is_err());
    }

    #[test]
    fn align_examples() {
        let cfg = MatcherConfig::exact();
        let zero = Representation::zeros(2, 1);
        assert_eq!(optimal_align(&zero, &x(), &cfg).unwrap(), x().to_representation());

        let rw = x().to_representation();
        let a = optimal_align(&rw, &x(), &cfg).unwrap();
        assert_eq!(rw.dot(&a).unwrap(), rw.norm_squared());

        let a = optimal_align(&rw, &y(), &cfg).unwrap();
        let swapped = y()
            .to_representation()
            .apply_permutation(&Permutation::new(vec![1, 0]).unwrap())
            .unwrap();
        assert_eq!(a, swapped);
    }

    #[test]
    fn align_pads_and_truncates() {
        let cfg = MatcherConfig::exact();
        let rw = Representation::zeros(3, 1);
        let a = optimal_align(&rw, &x(), &cfg).unwrap();
        assert_eq!(a.order(), 3);
        assert_eq!(a.norm_squared(), x().to_representation().norm_squared());

        let rw1 = AttributedGraph::from_nodes(1, &[[1.0]]).unwrap().to_representation();
        let a = optimal_align(&rw1, &x(), &cfg).unwrap();
        assert_eq!(a.as_slice(), [2.0]);
    }

    #[test]
    fn distance_examples() {
        let cfg = MatcherConfig::exact();
        assert_eq!(induced_distance(&x(), &x(), &cfg).unwrap(), 0.0);
        assert_eq!(induced_distance(&x(), &y(), &cfg).unwrap(), 0.0);
        let p = x().permuted(&Permutation::new(vec![1, 0]).unwrap()).unwrap();
        assert_eq!(induced_distance(&x(), &p, &cfg).unwrap(), 0.0);
        let single = AttributedGraph::from_nodes(1, &[[3.0]]).unwrap();
        let other = AttributedGraph::from_nodes(1, &[[1.0]]).unwrap();
        assert_eq!(induced_distance(&single, &other, &cfg).unwrap(), 2.0);
    }
}
