//! Sublinear classifiers `f(X) = W·X + b` and their one-against-all
//! combination.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::graph::{AttributedGraph, Representation};
use crate::matching::{match_tracked, MatchStats, MatcherConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct SublinearModel {
    weight_graph: AttributedGraph,
    weight_rep: Representation,
    bias: f64,
    matcher: MatcherConfig,
}

impl SublinearModel {
    /// Builds a model around a working representation of the weight graph.
    pub fn new(weight_rep: Representation, bias: f64, matcher: MatcherConfig) -> Result<Self> {
        let weight_graph = AttributedGraph::from_representation(&weight_rep)?;
        Ok(Self {
            weight_graph,
            weight_rep,
            bias,
            matcher,
        })
    }

    pub fn from_graph(weight: &AttributedGraph, bias: f64, matcher: MatcherConfig) -> Self {
        Self {
            weight_graph: weight.clone(),
            weight_rep: weight.to_representation(),
            bias,
            matcher,
        }
    }

    /// Zero weight graph of the given order.
    pub fn zero(order: usize, attr_dim: usize, bias: f64, matcher: MatcherConfig) -> Result<Self> {
        Self::new(Representation::zeros(order, attr_dim), bias, matcher)
    }

    pub fn weight_graph(&self) -> &AttributedGraph {
        &self.weight_graph
    }

    pub fn weight_rep(&self) -> &Representation {
        &self.weight_rep
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn matcher(&self) -> &MatcherConfig {
        &self.matcher
    }

    pub fn attr_dim(&self) -> usize {
        self.weight_rep.attr_dim()
    }

    pub fn with_matcher(mut self, matcher: MatcherConfig) -> Self {
        self.matcher = matcher;
        self
    }

    /// `W·X + b`.
    pub fn evaluate(&self, x: &AttributedGraph) -> Result<f64> {
        self.evaluate_tracked(x, None)
    }

    pub fn evaluate_tracked(&self, x: &AttributedGraph, stats: Option<&MatchStats>) -> Result<f64> {
        self.evaluate_rep(&x.to_representation(), stats)
    }

    pub(crate) fn evaluate_rep(&self, rx: &Representation, stats: Option<&MatchStats>) -> Result<f64> {
        if rx.attr_dim() != self.attr_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.attr_dim(),
                found: rx.attr_dim(),
            });
        }
        Ok(match_tracked(&self.weight_rep, rx, &self.matcher, stats)?.value + self.bias)
    }

    /// `+1` when `f(X) >= 0`, otherwise `-1`.
    pub fn classify(&self, x: &AttributedGraph) -> Result<i8> {
        Ok(sign_of(self.evaluate(x)?))
    }

    /// `sqrt(W·W)`, the Euclidean norm of any representation of `W`.
    pub fn weight_norm(&self) -> f64 {
        self.weight_rep.norm()
    }

    /// Signed distance `b / sqrt(W·W)` of the decision surface from the zero
    /// graph.
    pub fn origin_distance(&self) -> Result<f64> {
        Ok(self.bias / self.nonzero_norm()?)
    }

    /// `f(X) / sqrt(W·W)`, a lower bound on the distance of `X` to the
    /// decision surface.
    pub fn margin_lower_bound(&self, x: &AttributedGraph) -> Result<f64> {
        let norm = self.nonzero_norm()?;
        Ok(self.evaluate(x)? / norm)
    }

    fn nonzero_norm(&self) -> Result<f64> {
        let norm = self.weight_norm();
        if norm > 0.0 {
            Ok(norm)
        } else {
            Err(Error::DegenerateModel)
        }
    }
}

pub fn sign_of(score: f64) -> i8 {
    if score >= 0.0 {
        1
    } else {
        -1
    }
}

/// One binary member per class; predictions take the argmax of the member
/// discriminants.
#[derive(Debug, Clone, PartialEq)]
pub struct OvaModel {
    classes: Vec<String>,
    members: Vec<SublinearModel>,
}

impl OvaModel {
    pub fn new(classes: Vec<String>, members: Vec<SublinearModel>) -> Result<Self> {
        if classes.len() != members.len() {
            return Err(Error::Size {
                expected: classes.len(),
                found: members.len(),
            });
        }
        if classes.is_empty() {
            return Err(invalid("one-against-all model needs at least one class"));
        }
        let d = members[0].attr_dim();
        if let Some(m) = members.iter().find(|m| m.attr_dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: m.attr_dim(),
            });
        }
        Ok(Self { classes, members })
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn members(&self) -> &[SublinearModel] {
        &self.members
    }

    pub fn scores(&self, x: &AttributedGraph, stats: Option<&MatchStats>) -> Result<Vec<f64>> {
        let rx = x.to_representation();
        self.members.iter().map(|m| m.evaluate_rep(&rx, stats)).collect()
    }

    /// Index of the winning class; ties go to the lowest index.
    pub fn predict(&self, x: &AttributedGraph) -> Result<usize> {
        self.predict_tracked(x, None)
    }

    pub fn predict_tracked(&self, x: &AttributedGraph, stats: Option<&MatchStats>) -> Result<usize> {
        Ok(argmax(&self.scores(x, stats)?))
    }
}

pub(crate) fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}
