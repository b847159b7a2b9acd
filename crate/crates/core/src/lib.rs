//! Fairness-aware preprocessing built on tractable probabilistic inference.
//!
//! The crate learns sum-product networks over encoded tabular data, uses the
//! first independence split to separate attributes that depend on a protected
//! attribute from those that do not, and removes the protected attribute's
//! contribution from the dependent ones. Percentile-equivalence repair,
//! from-scratch classifiers and fairness metrics complete the pipelines.

// `!(x > 0.0)` style guards are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dataset;
pub mod fair_adjust;
pub mod learn;
pub mod matrix;
pub mod metrics;
pub mod models;
pub mod pipeline;
pub mod quantile;
pub mod seed;
pub mod spn;
pub mod synth;

pub use matrix::Matrix;
