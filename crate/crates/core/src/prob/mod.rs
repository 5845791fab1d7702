//! Random streams, elementary distributions, scalar fusion and error metrics.

mod fuse;
mod gamma;
mod gaussian;
pub mod linalg;
mod metrics;
mod rng;

pub use fuse::{fuse_scalar, kf_fuse};
pub use gamma::{gamma_sample, GammaSpec};
pub use gaussian::{gaussian_sample, normal, normal_ln_pdf, normal_pdf, GaussianBelief};
pub use linalg::{Matrix, Vector};
pub use metrics::{mean_var, rmse, RmseMode};
pub use rng::RngStream;
