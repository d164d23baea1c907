//! Benchmark and verification harness for the multi-scale online learning
//! toolkit: adversarial stream generators, a plain Hedge baseline, the
//! experiment runner with CSV/JSON reports, and the enumeration / Monte
//! Carlo verification suites.

// Guards written as `!(x > 0.0)` must stay negated: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiment;
pub mod hedge;
pub mod report;
pub mod stream;
pub mod verify;

pub use config::{Adversary, ExperimentConfig, Preset};
pub use error::{HarnessError, Result};
