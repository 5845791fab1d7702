use rand::Rng;
use rand_distr::StandardNormal;

use super::linalg::{check_symmetric, psd_factor, Matrix, Vector};
use crate::error::{Error, Result};

/// Mean and covariance of a Gaussian state estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianBelief {
    pub mean: Vector,
    pub cov: Matrix,
}

impl GaussianBelief {
    pub fn new(mean: Vector, cov: Matrix) -> Result<Self> {
        if cov.nrows() != mean.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("{0}x{0} covariance", mean.len()),
                got: format!("{}x{}", cov.nrows(), cov.ncols()),
            });
        }
        check_symmetric(&cov)?;
        Ok(Self { mean, cov })
    }

    /// One-dimensional belief `N(mean, var)`.
    pub fn scalar(mean: f64, var: f64) -> Result<Self> {
        if !(var >= 0.0) {
            return Err(Error::InvalidInput(format!("variance must be >= 0, got {var}")));
        }
        Ok(Self {
            mean: Vector::from_element(1, mean),
            cov: Matrix::from_element(1, 1, var),
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Mean of a one-dimensional belief.
    pub fn mean1(&self) -> f64 {
        self.mean[0]
    }

    /// Variance of a one-dimensional belief.
    pub fn var1(&self) -> f64 {
        self.cov[(0, 0)]
    }
}

/// Draws one sample from `belief`.
pub fn gaussian_sample<R: Rng + ?Sized>(belief: &GaussianBelief, rng: &mut R) -> Result<Vector> {
    let l = psd_factor(&belief.cov)?;
    let z = Vector::from_iterator(belief.dim(), (0..belief.dim()).map(|_| rng.sample(StandardNormal)));
    Ok(&belief.mean + l * z)
}

/// `N(mean, var)` scalar draw; `var` must be non-negative.
#[inline]
pub fn normal<R: Rng + ?Sized>(rng: &mut R, mean: f64, var: f64) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    mean + var.sqrt() * z
}

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

#[inline]
pub fn normal_ln_pdf(x: f64, mean: f64, var: f64) -> f64 {
    let d = x - mean;
    -0.5 * d * d / var - 0.5 * var.ln() - LN_SQRT_2PI
}

#[inline]
pub fn normal_pdf(x: f64, mean: f64, var: f64) -> f64 {
    normal_ln_pdf(x, mean, var).exp()
}
