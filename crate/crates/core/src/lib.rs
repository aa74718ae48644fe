//! Sublinear classifiers on attributed graphs.
//!
//! Graphs are compared through the sublinear dot product: the correspondence
//! kernel `Σ m_ir m_js <x_ij, y_rs>` maximized over one-to-one node matches.
//! A classifier `f(X) = W·X + b` uses a weight graph `W` in place of a weight
//! vector and is trained by perceptron-style subgradient steps on aligned
//! representations.
//!
//! The crate is `no_std` and only needs `alloc`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod error;
pub mod graph;
pub mod learning;
pub mod matching;
pub mod model;
mod numeric;
pub mod seed;

pub use error::{Error, Result};
pub use graph::{AttributedGraph, Permutation, Representation};
pub use learning::{
    empirical_risk, hinge_loss, knn_classify, subgradient_step, train_binary, train_one_vs_all,
    EpochRecord, LabeledExample, StepOutcome, TrainConfig, TrainTrace,
};
pub use matching::{
    exact_sdp, ga_sdp, induced_distance, kernel_value, optimal_align, sdp, GaParams, MatchMatrix,
    MatchMethod, MatchResult, MatchStats, MatcherConfig,
};
pub use model::{OvaModel, SublinearModel};
