//! Synthetic datasets that a planted sublinear model separates with a known
//! margin.
//!
//! A weight graph `W*` and bias `b*` are drawn at random. Candidate graphs
//! are labeled by the sign of `f*(X) = W*·X + b*` (exact matcher) and kept
//! only when `|f*(X)| / sqrt(W*·W*) >= margin`, so the normalized planted
//! model separates every kept example with at least that margin.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sublinear_core::{seed::derive_seed, AttributedGraph, MatcherConfig, SublinearModel};

use crate::dataset::{Dataset, GraphRecord, Provenance};
use crate::error::{validation, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSpec {
    pub name: String,
    pub n_train: usize,
    pub n_validation: usize,
    pub n_test: usize,
    /// Inclusive `[min, max]` node counts.
    pub order_range: (usize, usize),
    pub attr_dim: usize,
    pub planted_order: usize,
    pub planted_margin: f64,
    pub edge_density: f64,
    pub attribute_scale: f64,
    /// Probability of flipping each kept label after generation.
    pub label_noise: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            name: "synthetic".into(),
            n_train: 100,
            n_validation: 50,
            n_test: 50,
            order_range: (3, 6),
            attr_dim: 2,
            planted_order: 4,
            planted_margin: 0.25,
            edge_density: 0.5,
            attribute_scale: 1.0,
            label_noise: 0.0,
            seed: 0,
        }
    }
}

const EXACT_CAP: usize = 8;
const PILOT: usize = 200;
const MIN_ATTEMPTS: usize = 2000;
const MAX_REJECTION: f64 = 0.999;

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.order_range;
        let bad = |m: &str| Err(validation(format!("synthetic spec: {m}")));
        if lo < 1 || lo > hi || hi > EXACT_CAP {
            return bad("order range must satisfy 1 <= min <= max <= 8");
        }
        if self.planted_order < 1 || self.planted_order > EXACT_CAP {
            return bad("planted order must be within 1..=8");
        }
        if self.attr_dim < 1 {
            return bad("attribute dimension must be at least 1");
        }
        if !(self.planted_margin > 0.0) || !self.planted_margin.is_finite() {
            return bad("planted margin must be positive");
        }
        if !(self.edge_density > 0.0 && self.edge_density <= 1.0) {
            return bad("edge density must lie in (0, 1]");
        }
        if !(self.attribute_scale > 0.0) {
            return bad("attribute scale must be positive");
        }
        if !(0.0..=1.0).contains(&self.label_noise) {
            return bad("label noise must lie in [0, 1]");
        }
        for n in [self.n_train, self.n_validation, self.n_test] {
            if n == 1 {
                return bad("non-empty splits need at least two examples to hold both classes");
            }
        }
        Ok(())
    }
}

pub(crate) fn random_graph(rng: &mut ChaCha8Rng, spec: &SyntheticSpec, order: usize) -> AttributedGraph {
    let s = spec.attribute_scale;
    let d = spec.attr_dim;
    let sample = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..d).map(|_| rng.random_range(-s..=s)).collect() };
    let nodes: Vec<Vec<f64>> = (0..order).map(|_| sample(rng)).collect();
    let mut g = AttributedGraph::from_nodes(d, &nodes).expect("dimension checked");
    for i in 0..order {
        for j in i + 1..order {
            if rng.random_bool(spec.edge_density) {
                let a = sample(rng);
                if a.iter().any(|&v| v != 0.0) {
                    g.add_edge(i, j, &a).expect("valid edge");
                }
            }
        }
    }
    g
}

/// Dataset plus the planted model that certifies its margin.
pub struct Synthetic {
    pub dataset: Dataset,
    pub planted: SublinearModel,
    /// Smallest `y * f*(X) / sqrt(W*·W*)` over all examples before label
    /// noise.
    pub achieved_margin: f64,
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Synthetic> {
    spec.validate()?;
    let matcher = MatcherConfig::exact();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (lo, hi) = spec.order_range;

    let mut weight = random_graph(&mut rng, spec, spec.planted_order);
    while weight.to_representation().norm_squared() == 0.0 {
        weight = random_graph(&mut rng, spec, spec.planted_order);
    }
    let probe = SublinearModel::from_graph(&weight, 0.0, matcher);
    let norm = probe.weight_norm();

    // bias: uniform draw, re-centred on a pilot quantile when one class
    // would fall under 20 %
    let mut pilot = Vec::with_capacity(PILOT);
    for _ in 0..PILOT {
        let order = rng.random_range(lo..=hi);
        pilot.push(probe.evaluate(&random_graph(&mut rng, spec, order))?);
    }
    pilot.sort_by(f64::total_cmp);
    let mut bias = rng.random_range(-1.0..=1.0);
    let positive = pilot.iter().filter(|&&s| s + bias >= 0.0).count() as f64 / PILOT as f64;
    if positive.min(1.0 - positive) < 0.2 {
        let q = rng.random_range(0.3..=0.7);
        bias = -pilot[((PILOT - 1) as f64 * q).round() as usize];
    }
    let planted = SublinearModel::from_graph(&weight, bias, matcher);

    let sizes = [
        ("train", spec.n_train),
        ("validation", spec.n_validation),
        ("test", spec.n_test),
    ];
    let total: usize = sizes.iter().map(|s| s.1).sum();
    let budget = MIN_ATTEMPTS.max(1000 * total);
    let mut attempts = 0usize;
    let mut accepted = 0usize;
    let mut achieved = f64::INFINITY;
    let mut splits = Vec::new();
    let mut balance = Vec::new();

    for (name, n) in sizes {
        let mut records = Vec::with_capacity(n);
        let mut counts = [0usize; 2];
        while records.len() < n {
            attempts += 1;
            if attempts > budget
                || (attempts >= MIN_ATTEMPTS
                    && 1.0 - accepted as f64 / attempts as f64 > MAX_REJECTION)
            {
                return Err(Error::Infeasible(format!(
                    "accepted {accepted} of {attempts} candidates at margin {}; try a smaller margin",
                    spec.planted_margin
                )));
            }
            let order = rng.random_range(lo..=hi);
            let g = random_graph(&mut rng, spec, order);
            let f = planted.evaluate(&g)?;
            let margin = f.abs() / norm;
            if margin < spec.planted_margin {
                continue;
            }
            let class = usize::from(f < 0.0);
            // cap each class at n - 1 so both are present
            if counts[class] + 1 >= n {
                continue;
            }
            counts[class] += 1;
            accepted += 1;
            achieved = achieved.min(margin);
            records.push(GraphRecord {
                id: format!("{name}-{}", records.len()),
                class,
                graph: g,
            });
        }
        balance.push(serde_json::json!({"split": name, "pos": counts[0], "neg": counts[1]}));
        splits.push((name, records));
    }

    let mut flipped = 0usize;
    if spec.label_noise > 0.0 {
        let mut noise = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, &[0x6e6f69]));
        for (_, records) in &mut splits {
            for r in records.iter_mut() {
                if noise.random_bool(spec.label_noise) {
                    r.class = 1 - r.class;
                    flipped += 1;
                }
            }
        }
    }

    let dataset = Dataset {
        name: spec.name.clone(),
        attr_dim: spec.attr_dim,
        classes: vec!["pos".into(), "neg".into()],
        splits: splits
            .into_iter()
            .map(|(name, records)| crate::dataset::Split {
                name: name.to_string(),
                records,
            })
            .collect(),
        provenance: Provenance {
            source: "synthetic".into(),
            generator: Some(serde_json::to_value(spec)?),
            seed: Some(spec.seed),
            notes: Some(serde_json::json!({
                "class_balance": balance,
                "achieved_margin": achieved,
                "planted_bias": bias,
                "planted_norm": norm,
                "attempts": attempts,
                "flipped_labels": flipped,
            })),
            ..Provenance::default()
        },
    };
    dataset.validate()?;
    Ok(Synthetic {
        dataset,
        planted,
        achieved_margin: achieved,
    })
}
