//! Data formats, experiment protocol and tooling around `sublinear-core`.

pub mod bench;
pub mod dataset;
pub mod error;
pub mod evaluate;
pub mod gxl;
pub mod persist;
pub mod protocol;
pub mod synthetic;

pub use error::{Error, Result};
