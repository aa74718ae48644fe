//! Accuracy and confusion matrices.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sublinear_core::MatchStats;

use crate::dataset::GraphRecord;
use crate::error::{validation, Result};
use crate::persist::Classifier;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub classes: Vec<String>,
    pub total: usize,
    pub correct: usize,
    pub accuracy: f64,
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<usize>>,
    pub matcher_calls: usize,
}

impl Evaluation {
    pub fn from_predictions(classes: &[String], truth: &[usize], predicted: &[usize]) -> Result<Self> {
        if truth.len() != predicted.len() {
            return Err(validation("prediction count differs from label count"));
        }
        if truth.is_empty() {
            return Err(validation("cannot evaluate an empty split"));
        }
        let k = classes.len();
        let mut confusion = vec![vec![0usize; k]; k];
        for (&t, &p) in truth.iter().zip(predicted) {
            if t >= k || p >= k {
                return Err(validation(format!("class index out of range for {k} classes")));
            }
            confusion[t][p] += 1;
        }
        let correct = (0..k).map(|c| confusion[c][c]).sum();
        Ok(Self {
            classes: classes.to_vec(),
            total: truth.len(),
            correct,
            accuracy: correct as f64 / truth.len() as f64,
            confusion,
            matcher_calls: 0,
        })
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "accuracy {:.4} ({}/{}), matcher calls {}",
            self.accuracy, self.correct, self.total, self.matcher_calls
        );
        let width = self
            .classes
            .iter()
            .map(|c| c.len())
            .chain(self.confusion.iter().flatten().map(|v| v.to_string().len()))
            .chain(["true\\pred".len()])
            .max()
            .unwrap_or(1);
        let _ = write!(out, "{:>width$}", "true\\pred");
        for c in &self.classes {
            let _ = write!(out, " {c:>width$}");
        }
        out.push('\n');
        for (c, row) in self.classes.iter().zip(&self.confusion) {
            let _ = write!(out, "{c:>width$}");
            for v in row {
                let _ = write!(out, " {v:>width$}");
            }
            out.push('\n');
        }
        out
    }
}

/// Classifies every record and tallies the result.
pub fn evaluate(classifier: &Classifier, records: &[GraphRecord]) -> Result<Evaluation> {
    let stats = MatchStats::new();
    let predicted = records
        .iter()
        .map(|r| classifier.predict(&r.graph, Some(&stats)))
        .collect::<Result<Vec<_>>>()?;
    let truth: Vec<usize> = records.iter().map(|r| r.class).collect();
    let mut e = Evaluation::from_predictions(classifier.classes(), &truth, &predicted)?;
    e.matcher_calls = stats.calls();
    Ok(e)
}
