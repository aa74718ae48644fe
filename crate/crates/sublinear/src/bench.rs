//! Exact versus graduated-assignment matching on sampled graph pairs.

use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sublinear_core::{exact_sdp, ga_sdp, AttributedGraph, GaParams};

use crate::dataset::Dataset;
use crate::error::{validation, Result};
use crate::synthetic::{random_graph, SyntheticSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchSpec {
    pub pairs: usize,
    /// Used only when pairs are generated rather than drawn from a dataset.
    pub order_range: (usize, usize),
    pub attr_dim: usize,
    pub edge_density: f64,
    pub seed: u64,
    pub exact_max_order: usize,
    pub ga: GaParams,
}

impl Default for BenchSpec {
    fn default() -> Self {
        Self {
            pairs: 100,
            order_range: (3, 6),
            attr_dim: 2,
            edge_density: 0.5,
            seed: 0,
            exact_max_order: 8,
            ga: GaParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub pairs: usize,
    pub exact_seconds: f64,
    pub graduated_seconds: f64,
    /// Pairs where graduated assignment reached the exact value (1e-9 relative).
    pub attained: usize,
    pub attainment_rate: f64,
    /// `exact - graduated`, which must never be negative beyond rounding.
    pub gap_min: f64,
    pub gap_mean: f64,
    pub gap_max: f64,
    pub relative_gap_mean: f64,
    /// Pairs with `graduated > exact + 1e-9`.
    pub violations: usize,
}

impl BenchReport {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let per = |s: f64| 1e6 * s / self.pairs.max(1) as f64;
        let _ = writeln!(out, "pairs {}", self.pairs);
        let _ = writeln!(
            out,
            "{:>10} {:>12} {:>14}",
            "matcher", "total s", "per pair us"
        );
        let _ = writeln!(out, "{:>10} {:>12.4} {:>14.1}", "exact", self.exact_seconds, per(self.exact_seconds));
        let _ = writeln!(
            out,
            "{:>10} {:>12.4} {:>14.1}",
            "graduated",
            self.graduated_seconds,
            per(self.graduated_seconds)
        );
        let _ = writeln!(
            out,
            "optimum attained {}/{} ({:.3}); gap min {:.3e} mean {:.3e} max {:.3e}; relative mean {:.3e}; violations {}",
            self.attained,
            self.pairs,
            self.attainment_rate,
            self.gap_min,
            self.gap_mean,
            self.gap_max,
            self.relative_gap_mean,
            self.violations
        );
        out
    }
}

/// Random pairs from the generator behind [`crate::synthetic`].
pub fn generated_pairs(spec: &BenchSpec) -> Result<Vec<(AttributedGraph, AttributedGraph)>> {
    let (lo, hi) = spec.order_range;
    if lo < 1 || lo > hi || hi > spec.exact_max_order {
        return Err(validation("bench order range must satisfy 1 <= min <= max <= exact max order"));
    }
    let gen = SyntheticSpec {
        attr_dim: spec.attr_dim,
        edge_density: spec.edge_density,
        ..SyntheticSpec::default()
    };
    if spec.attr_dim == 0 || !(spec.edge_density > 0.0 && spec.edge_density <= 1.0) {
        return Err(validation("bench needs attr_dim >= 1 and edge density in (0, 1]"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    Ok((0..spec.pairs)
        .map(|_| {
            let (a, b) = (rng.random_range(lo..=hi), rng.random_range(lo..=hi));
            (random_graph(&mut rng, &gen, a), random_graph(&mut rng, &gen, b))
        })
        .collect())
}

/// Pairs drawn uniformly (with replacement) from every split of `ds`.
pub fn dataset_pairs(ds: &Dataset, pairs: usize, seed: u64) -> Result<Vec<(AttributedGraph, AttributedGraph)>> {
    let graphs: Vec<&AttributedGraph> = ds.splits.iter().flat_map(|s| &s.records).map(|r| &r.graph).collect();
    if graphs.is_empty() {
        return Err(validation("dataset holds no graphs"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..pairs)
        .map(|_| {
            let a = graphs[rng.random_range(0..graphs.len())].clone();
            let b = graphs[rng.random_range(0..graphs.len())].clone();
            (a, b)
        })
        .collect())
}

pub fn run_bench(
    pairs: &[(AttributedGraph, AttributedGraph)],
    exact_max_order: usize,
    ga: &GaParams,
) -> Result<BenchReport> {
    if pairs.is_empty() {
        return Err(validation("bench needs at least one pair"));
    }
    ga.validate()?;
    let t = Instant::now();
    let exact = pairs
        .iter()
        .map(|(x, y)| exact_sdp(x, y, exact_max_order).map(|r| r.value))
        .collect::<sublinear_core::Result<Vec<_>>>()?;
    let exact_seconds = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let graduated = pairs
        .iter()
        .map(|(x, y)| ga_sdp(x, y, ga).map(|r| r.value))
        .collect::<sublinear_core::Result<Vec<_>>>()?;
    let graduated_seconds = t.elapsed().as_secs_f64();

    let n = pairs.len() as f64;
    let mut attained = 0;
    let mut violations = 0;
    let (mut gmin, mut gmax, mut gsum, mut rsum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0.0);
    for (&e, &g) in exact.iter().zip(&graduated) {
        let scale = e.abs().max(1e-300);
        let gap = e - g;
        if gap.abs() <= 1e-9 * scale.max(1.0) {
            attained += 1;
        }
        if g > e + 1e-9 {
            violations += 1;
        }
        gmin = gmin.min(gap);
        gmax = gmax.max(gap);
        gsum += gap;
        rsum += if e.abs() > 0.0 { gap / e.abs() } else { 0.0 };
    }
    Ok(BenchReport {
        pairs: pairs.len(),
        exact_seconds,
        graduated_seconds,
        attained,
        attainment_rate: attained as f64 / n,
        gap_min: gmin,
        gap_mean: gsum / n,
        gap_max: gmax,
        relative_gap_mean: rsum / n,
        violations,
    })
}
