//! Parameter-free online learning through multi-scale expert aggregation.
//!
//! The core of the crate is a follow-the-perturbed-leader algorithm for
//! prediction with expert advice in which expert `i` incurs losses in its own
//! range `[-c_i, c_i]`; regret against expert `i` scales with `c_i` rather
//! than with the largest range in play. On top of it sit an online convex
//! optimization wrapper and a supervised-learning wrapper that aggregate
//! sub-algorithms (mirror descent over norm balls, spectral learners,
//! kernelized gradient descent), plus preset expert grids for nested-ball,
//! lp-norm, online-PCA, trace-ball and multiple-kernel setups.

// Guards written as `!(x > 0.0)` must stay negated: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod configs;
pub mod error;
pub mod ftpl;
pub mod kernel;
pub mod ledger;
pub mod loss;
pub mod matrix;
pub mod meta;
pub mod mirror;
pub mod point;
pub mod saddle;
pub mod scale;

pub use error::{CoreError, Result};
pub use ftpl::{compute_bound, MultiScaleFtpl, PerturbationMode};
pub use meta::{MultiScaleLearning, MultiScaleOco};
pub use point::{Point, SymMat};
pub use scale::{LossVector, ScaleProfile, SimplexWeights};
