//! Observation-only (O₂) inference against prediction-correction filters:
//! scalar estimators, the probability of fusion benefit, SMC-PHD
//! multi-target tracking with clustering O₂, and the experiment harness.

// `!(x > 0.0)` deliberately rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod error;
pub mod filters;
pub mod models;
pub mod mtt;
pub mod o2;
pub mod pofb;
pub mod prob;

pub use error::{Error, Result};
