//! Prediction-correction estimators: Kalman family and particle filters.

mod kalman;
mod particle;
mod resample;
mod unscented;

pub use kalman::{ekf_predict, ekf_step, ekf_update, kalman_step};
pub use particle::{ParticleFilter, PfVariant};
pub use resample::{effective_sample_size, multinomial_indices, resample, systematic_indices};
pub use unscented::{ukf_step, unscented_transform, UnscentedParams, UtResult};

use rand::RngCore;

use crate::error::{Error, Result};
use crate::models::{ModelB, StateSpaceModel};
use crate::prob::{GaussianBelief, Vector};

/// Weighted particle approximation of a density.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSet {
    pub particles: Vec<Vector>,
    pub weights: Vec<f64>,
}

impl ParticleSet {
    /// Equally weighted set.
    pub fn uniform(particles: Vec<Vector>) -> Result<Self> {
        if particles.is_empty() {
            return Err(Error::InvalidInput("particle set needs at least one particle".into()));
        }
        let w = 1.0 / particles.len() as f64;
        let weights = vec![w; particles.len()];
        Ok(Self { particles, weights })
    }

    pub fn new(particles: Vec<Vector>, weights: Vec<f64>) -> Result<Self> {
        if particles.is_empty() || particles.len() != weights.len() {
            return Err(Error::ShapeMismatch {
                expected: "equal, non-zero particle and weight counts".into(),
                got: format!("{} particles, {} weights", particles.len(), weights.len()),
            });
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::InvalidInput("weights must be non-negative".into()));
        }
        Ok(Self { particles, weights })
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    /// Rescales weights to sum to one. Returns `false` (and leaves weights
    /// untouched) when the total is zero or not finite.
    pub fn normalize(&mut self) -> bool {
        let total: f64 = self.weights.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return false;
        }
        self.weights.iter_mut().for_each(|w| *w /= total);
        true
    }

    pub fn ess(&self) -> f64 {
        effective_sample_size(&self.weights)
    }

    /// Weighted mean of the particles.
    pub fn mean(&self) -> Vector {
        let total: f64 = self.weights.iter().sum();
        let mut m = Vector::zeros(self.particles[0].len());
        for (x, w) in self.particles.iter().zip(&self.weights) {
            m.axpy(*w / total, x, 1.0);
        }
        m
    }
}

/// A running estimator fed one observation per time step.
pub trait Estimator: Send {
    fn name(&self) -> &str;

    /// Consumes `y_t` and returns the state estimate at `t`.
    fn step(&mut self, y: &Vector, t: usize, rng: &mut dyn RngCore) -> Result<Vector>;

    /// Oracle hook: the true state at the coming step. Only estimators that
    /// are explicitly granted the truth (sign oracles) use it.
    fn observe_truth(&mut self, _x: &Vector) {}

    /// Number of weight-underflow resets so far.
    fn degeneracy_events(&self) -> usize {
        0
    }
}

/// Kalman-type estimator holding a Gaussian belief.
pub struct GaussianFilter<'m> {
    kind: GaussianKind,
    model: &'m dyn StateSpaceModel,
    pub belief: GaussianBelief,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GaussianKind {
    Ekf,
    Ukf(UnscentedParams),
}

impl<'m> GaussianFilter<'m> {
    pub fn new(kind: GaussianKind, model: &'m dyn StateSpaceModel, prior: GaussianBelief) -> Self {
        Self {
            kind,
            model,
            belief: prior,
        }
    }
}

impl Estimator for GaussianFilter<'_> {
    fn name(&self) -> &str {
        match self.kind {
            GaussianKind::Ekf => "ekf",
            GaussianKind::Ukf(_) => "ukf",
        }
    }

    fn step(&mut self, y: &Vector, t: usize, _rng: &mut dyn RngCore) -> Result<Vector> {
        self.belief = match self.kind {
            GaussianKind::Ekf => ekf_step(&self.belief, y, t, self.model)?,
            GaussianKind::Ukf(p) => ukf_step(&self.belief, y, t, self.model, &p)?,
        };
        Ok(self.belief.mean.clone())
    }
}

/// Exact Kalman filter on the linear-Gaussian model.
pub struct KalmanFilter {
    model: ModelB,
    pub belief: GaussianBelief,
}

impl KalmanFilter {
    pub fn new(model: ModelB, prior: GaussianBelief) -> Self {
        Self { model, belief: prior }
    }
}

impl Estimator for KalmanFilter {
    fn name(&self) -> &str {
        "kf"
    }

    fn step(&mut self, y: &Vector, t: usize, _rng: &mut dyn RngCore) -> Result<Vector> {
        self.belief = kalman_step(&self.belief, y, &self.model.linear_system(t))?;
        Ok(self.belief.mean.clone())
    }
}
