//! Perceptron and margin perceptron training by stochastic subgradient
//! steps on the lifted hinge risk.
//!
//! Each step aligns the example to the current weight representation, scores
//! it, and on a margin violation (`y * score <= margin`) moves the weights
//! along `+eta * y * x` and the bias along `+eta * y`. A margin of zero gives
//! the classic perceptron.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::{AttributedGraph, Representation};
use crate::matching::{align_tracked, distance_tracked, MatchStats, MatcherConfig};
use crate::model::{sign_of, OvaModel, SublinearModel};
use crate::seed::derive_seed;

/// A graph with its target: `i8` (`+1`/`-1`) for binary tasks, a class index
/// for multiclass ones.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledExample<L> {
    pub graph: AttributedGraph,
    pub label: L,
}

impl<L> LabeledExample<L> {
    pub fn new(graph: AttributedGraph, label: L) -> Self {
        Self { graph, label }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub margin: f64,
    pub max_epochs: usize,
    /// Order of the weight graph; defaults to the largest training graph.
    pub weight_order: Option<usize>,
    pub seed: u64,
    pub matcher: MatcherConfig,
    pub shuffle: bool,
    pub stop_when_separated: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            margin: 0.0,
            max_epochs: 200,
            weight_order: None,
            seed: 0,
            matcher: MatcherConfig::default(),
            shuffle: true,
            stop_when_separated: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(invalid("learning rate must be positive"));
        }
        if !(self.margin >= 0.0) || !self.margin.is_finite() {
            return Err(invalid("margin must be non-negative"));
        }
        if self.max_epochs == 0 {
            return Err(invalid("max_epochs must be at least 1"));
        }
        if self.weight_order == Some(0) {
            return Err(invalid("weight order must be at least 1"));
        }
        self.matcher.validate()
    }
}

/// Statistics of one pass over the training set, gathered online: each
/// example contributes its loss and error before its own update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub updates: usize,
    pub errors: usize,
    pub risk: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainTrace {
    pub epochs: Vec<EpochRecord>,
    pub total_updates: usize,
    pub converged: bool,
    pub final_epoch: usize,
    pub matcher_calls: usize,
}

/// `max(0, margin - y * score)`.
pub fn hinge_loss(score: f64, y: i8, margin: f64) -> f64 {
    (margin - f64::from(y) * score).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub updated: bool,
    /// Hinge loss before the update.
    pub loss: f64,
    /// `w·x + b` before the update.
    pub score: f64,
}

/// One stochastic subgradient step on a single example, in place.
#[allow(clippy::too_many_arguments)]
pub fn subgradient_step(
    weights: &mut Representation,
    bias: &mut f64,
    graph: &AttributedGraph,
    y: i8,
    learning_rate: f64,
    margin: f64,
    matcher: &MatcherConfig,
) -> Result<StepOutcome> {
    step_rep(
        weights,
        bias,
        &graph.to_representation(),
        y,
        learning_rate,
        margin,
        matcher,
        None,
    )
}

#[allow(clippy::too_many_arguments)]
fn step_rep(
    weights: &mut Representation,
    bias: &mut f64,
    rx: &Representation,
    y: i8,
    learning_rate: f64,
    margin: f64,
    matcher: &MatcherConfig,
    stats: Option<&MatchStats>,
) -> Result<StepOutcome> {
    if y != 1 && y != -1 {
        return Err(invalid("binary labels must be +1 or -1"));
    }
    if rx.attr_dim() != weights.attr_dim() {
        return Err(Error::DimensionMismatch {
            expected: weights.attr_dim(),
            found: rx.attr_dim(),
        });
    }
    let (aligned, value) = align_tracked(weights, rx, matcher, stats)?;
    let score = value + *bias;
    let yf = f64::from(y);
    let loss = hinge_loss(score, y, margin);
    let updated = yf * score <= margin;
    if updated {
        weights.add_scaled(learning_rate * yf, &aligned)?;
        *bias += learning_rate * yf;
    }
    Ok(StepOutcome {
        updated,
        loss,
        score,
    })
}

/// Trains a binary sublinear classifier from a zero weight graph.
///
/// Stops after the first epoch without margin violations (when
/// `stop_when_separated`) or after `max_epochs`.
pub fn train_binary(
    data: &[LabeledExample<i8>],
    cfg: &TrainConfig,
) -> Result<(SublinearModel, TrainTrace)> {
    cfg.validate()?;
    let first = data.first().ok_or(Error::EmptyDataset)?;
    let attr_dim = first.graph.attr_dim();
    let mut reps = Vec::with_capacity(data.len());
    for ex in data {
        if ex.graph.attr_dim() != attr_dim {
            return Err(Error::DimensionMismatch {
                expected: attr_dim,
                found: ex.graph.attr_dim(),
            });
        }
        ex.graph.ensure_finite()?;
        if ex.label != 1 && ex.label != -1 {
            return Err(invalid("binary labels must be +1 or -1"));
        }
        reps.push(ex.graph.to_representation());
    }
    let order = cfg
        .weight_order
        .unwrap_or_else(|| data.iter().map(|e| e.graph.order()).max().unwrap_or(1))
        .max(1);

    let mut weights = Representation::zeros(order, attr_dim);
    let mut bias = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut visit: Vec<usize> = (0..data.len()).collect();
    let stats = MatchStats::new();
    let mut trace = TrainTrace::default();

    for epoch in 1..=cfg.max_epochs {
        if cfg.shuffle {
            visit.shuffle(&mut rng);
        }
        let mut record = EpochRecord {
            epoch,
            updates: 0,
            errors: 0,
            risk: 0.0,
        };
        for &idx in &visit {
            let y = data[idx].label;
            let out = step_rep(
                &mut weights,
                &mut bias,
                &reps[idx],
                y,
                cfg.learning_rate,
                cfg.margin,
                &cfg.matcher,
                Some(&stats),
            )?;
            record.risk += out.loss;
            record.updates += usize::from(out.updated);
            record.errors += usize::from(sign_of(out.score) != y);
        }
        record.risk /= data.len() as f64;
        trace.total_updates += record.updates;
        trace.final_epoch = epoch;
        trace.epochs.push(record);
        if record.updates == 0 {
            trace.converged = true;
            if cfg.stop_when_separated {
                break;
            }
        } else {
            trace.converged = false;
        }
    }
    trace.matcher_calls = stats.calls();
    let model = SublinearModel::new(weights, bias, cfg.matcher)?;
    Ok((model, trace))
}

/// Trains one binary member per class (`+1` for the class, `-1` for the
/// rest), each with its own seed derived from `cfg.seed` and the class index.
pub fn train_one_vs_all(
    data: &[LabeledExample<usize>],
    classes: &[String],
    cfg: &TrainConfig,
) -> Result<(OvaModel, Vec<TrainTrace>)> {
    if classes.len() < 2 {
        return Err(invalid("one-against-all training needs at least two classes"));
    }
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if let Some(ex) = data.iter().find(|e| e.label >= classes.len()) {
        return Err(invalid(alloc::format!("class index {} out of range", ex.label)));
    }
    let order = cfg
        .weight_order
        .unwrap_or_else(|| data.iter().map(|e| e.graph.order()).max().unwrap_or(1));
    let mut members = Vec::with_capacity(classes.len());
    let mut traces = Vec::with_capacity(classes.len());
    for c in 0..classes.len() {
        let binary: Vec<LabeledExample<i8>> = data
            .iter()
            .map(|e| LabeledExample::new(e.graph.clone(), if e.label == c { 1 } else { -1 }))
            .collect();
        let member_cfg = TrainConfig {
            seed: derive_seed(cfg.seed, &[c as u64]),
            weight_order: Some(order),
            ..cfg.clone()
        };
        let (model, trace) = train_binary(&binary, &member_cfg)?;
        members.push(model);
        traces.push(trace);
    }
    Ok((OvaModel::new(classes.to_vec(), members)?, traces))
}

/// Mean hinge loss of `model` over `data`.
pub fn empirical_risk(model: &SublinearModel, data: &[LabeledExample<i8>], margin: f64) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut total = 0.0;
    for ex in data {
        total += hinge_loss(model.evaluate(&ex.graph)?, ex.label, margin);
    }
    Ok(total / data.len() as f64)
}

/// Majority vote among the `k` nearest training graphs under the induced
/// distance.
///
/// Distance ties keep training-set order; vote ties go to the smallest class
/// index.
pub fn knn_classify(
    train: &[LabeledExample<usize>],
    x: &AttributedGraph,
    k: usize,
    matcher: &MatcherConfig,
    stats: Option<&MatchStats>,
) -> Result<usize> {
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if k == 0 {
        return Err(invalid("k must be at least 1"));
    }
    let rx = x.to_representation();
    let mut dists = Vec::with_capacity(train.len());
    for (i, ex) in train.iter().enumerate() {
        let d = distance_tracked(&ex.graph.to_representation(), &rx, matcher, stats)?;
        dists.push((d, i));
    }
    dists.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let n_classes = train.iter().map(|e| e.label).max().unwrap_or(0) + 1;
    let mut votes = vec![0usize; n_classes];
    for &(_, i) in dists.iter().take(k) {
        votes[train[i].label] += 1;
    }
    let mut best = 0;
    for (c, &v) in votes.iter().enumerate() {
        if v > votes[best] {
            best = c;
        }
    }
    Ok(best)
}
