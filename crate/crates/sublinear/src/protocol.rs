//! Two-stage experimental protocol.
//!
//! Stage 1 picks hyperparameters on the validation split: the learning rate
//! `eta` over `eta_grid` with the classic perceptron criterion, then (margin
//! perceptron only) the margin `lambda` over `lambda_grid` with `eta` fixed
//! at the selected value. Each grid point is trained on the train split and
//! scored on validation `repeats` times; the best mean wins, ties going to
//! the smaller value. Stage 2 retrains on train + validation with the
//! selected values and scores the test split, again `repeats` times.
//!
//! The nearest-neighbour baseline is deterministic and runs once against
//! train + validation.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sublinear_core::{
    knn_classify, seed::derive_seed, train_binary, train_one_vs_all, LabeledExample, MatchStats,
    MatcherConfig, TrainConfig,
};

use crate::dataset::{Dataset, GraphRecord};
use crate::error::{validation, Result};
use crate::persist::Classifier;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Perceptron,
    MarginPerceptron,
    Knn,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Perceptron => "perceptron",
            Algorithm::MarginPerceptron => "margin_perceptron",
            Algorithm::Knn => "knn",
        }
    }
}

/// Training settings the protocol does not search over.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainOverrides {
    pub max_epochs: usize,
    pub weight_order: Option<usize>,
    pub shuffle: bool,
    pub stop_when_separated: bool,
}

impl Default for TrainOverrides {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            max_epochs: t.max_epochs,
            weight_order: t.weight_order,
            shuffle: t.shuffle,
            stop_when_separated: t.stop_when_separated,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProtocolConfig {
    pub algorithm: Algorithm,
    pub eta_grid: Vec<f64>,
    pub lambda_grid: Vec<f64>,
    pub repeats: usize,
    pub seed: u64,
    pub matcher: MatcherConfig,
    pub train: TrainOverrides,
    /// Neighbours for the `knn` algorithm.
    pub k: usize,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::MarginPerceptron,
            eta_grid: vec![0.01, 0.05, 0.1, 0.3, 0.5, 0.7, 0.9],
            lambda_grid: vec![0.01, 0.05, 0.075, 0.1, 0.125, 0.15, 0.2],
            repeats: 10,
            seed: 0,
            matcher: MatcherConfig::default(),
            train: TrainOverrides::default(),
            k: 1,
        }
    }
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        if self.eta_grid.is_empty() || self.lambda_grid.is_empty() {
            return Err(validation("hyperparameter grids must be non-empty"));
        }
        if self.eta_grid.iter().any(|&e| !(e.is_finite() && e > 0.0)) {
            return Err(validation("learning rates must be positive and finite"));
        }
        if self.lambda_grid.iter().any(|&l| !(l.is_finite() && l >= 0.0)) {
            return Err(validation("margins must be non-negative and finite"));
        }
        if self.repeats == 0 {
            return Err(validation("repeats must be at least 1"));
        }
        if self.k == 0 {
            return Err(validation("k must be at least 1"));
        }
        self.train_config(0.1, 0.0, 0).validate()?;
        Ok(())
    }

    fn train_config(&self, eta: f64, margin: f64, seed: u64) -> TrainConfig {
        TrainConfig {
            learning_rate: eta,
            margin,
            max_epochs: self.train.max_epochs,
            weight_order: self.train.weight_order,
            seed,
            matcher: self.matcher,
            shuffle: self.train.shuffle,
            stop_when_separated: self.train.stop_when_separated,
        }
    }
}

/// Mean, sample standard deviation and maximum of a list of accuracies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub accuracies: Vec<f64>,
    pub mean: f64,
    pub sd: f64,
    pub max: f64,
}

impl Summary {
    pub fn new(accuracies: Vec<f64>) -> Self {
        let n = accuracies.len() as f64;
        let mean = accuracies.iter().sum::<f64>() / n;
        let sd = if accuracies.len() < 2 {
            0.0
        } else {
            (accuracies.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        let max = accuracies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self {
            accuracies,
            mean,
            sd,
            max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub value: f64,
    pub validation: Summary,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CallAccounting {
    pub training: usize,
    pub prediction: usize,
    pub test_prediction: usize,
    /// Stage-2 prediction calls divided by the number of test predictions.
    pub per_test_graph: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolReport {
    pub dataset: String,
    pub algorithm: Algorithm,
    pub classes: Vec<String>,
    /// `binary`, `one_vs_all` or `knn`.
    pub scheme: String,
    pub split_sizes: [usize; 3],
    pub config: ProtocolConfig,
    pub eta_search: Vec<GridPoint>,
    pub lambda_search: Vec<GridPoint>,
    pub selected_eta: Option<f64>,
    pub selected_lambda: Option<f64>,
    pub test: Summary,
    pub matcher_calls: CallAccounting,
    pub wall_time_seconds: f64,
}

impl ProtocolReport {
    /// JSON with the wall time zeroed, for comparing runs.
    pub fn canonical_json(&self) -> Result<String> {
        let mut r = self.clone();
        r.wall_time_seconds = 0.0;
        Ok(serde_json::to_string_pretty(&r)?)
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "dataset {} | {} | {} | {} classes | train/validation/test {}/{}/{}",
            self.dataset,
            self.algorithm.as_str(),
            self.scheme,
            self.classes.len(),
            self.split_sizes[0],
            self.split_sizes[1],
            self.split_sizes[2]
        );
        for (label, grid, chosen) in [
            ("eta", &self.eta_search, self.selected_eta),
            ("lambda", &self.lambda_search, self.selected_lambda),
        ] {
            if grid.is_empty() {
                continue;
            }
            let _ = writeln!(out, "{:>8} {:>10} {:>10} {:>10}", label, "val mean", "val sd", "val max");
            for p in grid {
                let mark = if Some(p.value) == chosen { " *" } else { "" };
                let _ = writeln!(
                    out,
                    "{:>8} {:>10.4} {:>10.4} {:>10.4}{}",
                    p.value, p.validation.mean, p.validation.sd, p.validation.max, mark
                );
            }
        }
        let _ = writeln!(
            out,
            "test accuracy over {} run(s): mean {:.4}  sd {:.4}  max {:.4}",
            self.test.accuracies.len(),
            self.test.mean,
            self.test.sd,
            self.test.max
        );
        let _ = writeln!(
            out,
            "matcher calls: training {}  prediction {}  per test graph {}",
            self.matcher_calls.training, self.matcher_calls.prediction, self.matcher_calls.per_test_graph
        );
        let _ = writeln!(out, "wall time {:.2}s", self.wall_time_seconds);
        out
    }
}

const STAGE_ETA: u64 = 1;
const STAGE_LAMBDA: u64 = 2;
const STAGE_TEST: u64 = 3;

struct Cell {
    accuracy: f64,
    training_calls: usize,
    prediction_calls: usize,
}

struct Task<'a> {
    classes: &'a [String],
    train: &'a [LabeledExample<usize>],
    eval: &'a [GraphRecord],
}

impl Task<'_> {
    fn run(&self, cfg: &TrainConfig) -> Result<Cell> {
        let (classifier, training_calls) = if self.classes.len() == 2 {
            let binary: Vec<LabeledExample<i8>> = self
                .train
                .iter()
                .map(|e| LabeledExample::new(e.graph.clone(), if e.label == 0 { 1 } else { -1 }))
                .collect();
            let (model, trace) = train_binary(&binary, cfg)?;
            let c = Classifier::Binary {
                classes: self.classes.to_vec(),
                model,
            };
            (c, trace.matcher_calls)
        } else {
            let (model, traces) = train_one_vs_all(self.train, self.classes, cfg)?;
            (Classifier::OneVsAll(model), traces.iter().map(|t| t.matcher_calls).sum())
        };
        let stats = MatchStats::new();
        let mut correct = 0usize;
        for r in self.eval {
            correct += usize::from(classifier.predict(&r.graph, Some(&stats))? == r.class);
        }
        Ok(Cell {
            accuracy: correct as f64 / self.eval.len() as f64,
            training_calls,
            prediction_calls: stats.calls(),
        })
    }
}

#[derive(Default)]
struct Tally {
    training: usize,
    prediction: usize,
}

/// Runs `repeats` cells for each grid value in parallel and summarizes them
/// in grid order.
fn grid_stage(
    task: &Task<'_>,
    cfg: &ProtocolConfig,
    stage: u64,
    values: &[f64],
    make: impl Fn(f64, u64) -> TrainConfig + Sync,
    tally: &mut Tally,
) -> Result<Vec<GridPoint>> {
    let cells: Vec<(usize, usize)> = (0..values.len())
        .flat_map(|c| (0..cfg.repeats).map(move |r| (c, r)))
        .collect();
    let results = cells
        .par_iter()
        .map(|&(c, r)| task.run(&make(values[c], derive_seed(cfg.seed, &[stage, c as u64, r as u64]))))
        .collect::<Vec<Result<Cell>>>();
    let mut accs = vec![Vec::with_capacity(cfg.repeats); values.len()];
    for (&(c, _), res) in cells.iter().zip(results) {
        let cell = res?;
        tally.training += cell.training_calls;
        tally.prediction += cell.prediction_calls;
        accs[c].push(cell.accuracy);
    }
    Ok(values
        .iter()
        .zip(accs)
        .map(|(&value, a)| GridPoint {
            value,
            validation: Summary::new(a),
        })
        .collect())
}

/// Best mean; ties go to the smaller value.
fn select(points: &[GridPoint]) -> f64 {
    let mut best = &points[0];
    for p in &points[1..] {
        let m = p.validation.mean;
        if m > best.validation.mean || (m == best.validation.mean && p.value < best.value) {
            best = p;
        }
    }
    best.value
}

fn check_split<'a>(ds: &'a Dataset, name: &str) -> Result<&'a [GraphRecord]> {
    let split = ds.require_split(name)?;
    if split.is_empty() {
        return Err(validation(format!("split `{name}` is empty")));
    }
    Ok(&split.records)
}

pub fn run_protocol(dataset: &Dataset, cfg: &ProtocolConfig) -> Result<ProtocolReport> {
    cfg.validate()?;
    dataset.validate()?;
    let start = Instant::now();
    let train = check_split(dataset, "train")?;
    let val = check_split(dataset, "validation")?;
    let test = check_split(dataset, "test")?;
    let present = {
        let mut seen = vec![false; dataset.classes.len()];
        train.iter().for_each(|r| seen[r.class] = true);
        seen.iter().filter(|&&s| s).count()
    };
    if present < 2 {
        return Err(validation("train split holds a single class"));
    }
    let to_examples = |rs: &[GraphRecord]| -> Vec<LabeledExample<usize>> {
        rs.iter().map(|r| LabeledExample::new(r.graph.clone(), r.class)).collect()
    };
    let train_ex = to_examples(train);
    let mut full_ex = train_ex.clone();
    full_ex.extend(to_examples(val));

    let classes = &dataset.classes;
    let scheme = match (cfg.algorithm, classes.len()) {
        (Algorithm::Knn, _) => "knn",
        (_, 2) => "binary",
        _ => "one_vs_all",
    };
    let mut tally = Tally::default();
    let mut eta_search = Vec::new();
    let mut lambda_search = Vec::new();
    let mut selected_eta = None;
    let mut selected_lambda = None;
    let test_prediction;

    let test_summary = if cfg.algorithm == Algorithm::Knn {
        let results = test
            .par_iter()
            .map(|r| {
                let stats = MatchStats::new();
                let p = knn_classify(&full_ex, &r.graph, cfg.k, &cfg.matcher, Some(&stats))?;
                Ok((p == r.class, stats.calls()))
            })
            .collect::<Vec<Result<(bool, usize)>>>();
        let mut correct = 0usize;
        for res in results {
            let (ok, calls) = res?;
            correct += usize::from(ok);
            tally.prediction += calls;
        }
        test_prediction = tally.prediction;
        Summary::new(vec![correct as f64 / test.len() as f64])
    } else {
        let stage1 = Task {
            classes,
            train: &train_ex,
            eval: val,
        };
        eta_search = grid_stage(
            &stage1,
            cfg,
            STAGE_ETA,
            &cfg.eta_grid,
            |eta, seed| cfg.train_config(eta, 0.0, seed),
            &mut tally,
        )?;
        let eta = select(&eta_search);
        selected_eta = Some(eta);
        let lambda = if cfg.algorithm == Algorithm::MarginPerceptron {
            lambda_search = grid_stage(
                &stage1,
                cfg,
                STAGE_LAMBDA,
                &cfg.lambda_grid,
                |lambda, seed| cfg.train_config(eta, lambda, seed),
                &mut tally,
            )?;
            let l = select(&lambda_search);
            selected_lambda = Some(l);
            l
        } else {
            0.0
        };
        let stage2 = Task {
            classes,
            train: &full_ex,
            eval: test,
        };
        let before = tally.prediction;
        let point = grid_stage(
            &stage2,
            cfg,
            STAGE_TEST,
            &[lambda],
            |lambda, seed| cfg.train_config(eta, lambda, seed),
            &mut tally,
        )?;
        test_prediction = tally.prediction - before;
        point.into_iter().next().expect("one grid point").validation
    };

    let runs = test_summary.accuracies.len() * test.len();
    Ok(ProtocolReport {
        dataset: dataset.name.clone(),
        algorithm: cfg.algorithm,
        classes: classes.clone(),
        scheme: scheme.into(),
        split_sizes: [train.len(), val.len(), test.len()],
        config: cfg.clone(),
        eta_search,
        lambda_search,
        selected_eta,
        selected_lambda,
        test: test_summary,
        matcher_calls: CallAccounting {
            training: tally.training,
            prediction: tally.prediction,
            test_prediction,
            per_test_graph: test_prediction as f64 / runs as f64,
        },
        wall_time_seconds: start.elapsed().as_secs_f64(),
    })
}
