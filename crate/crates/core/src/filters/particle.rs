use rand::RngCore;

use super::kalman::ekf_step;
use super::resample::systematic_indices;
use super::unscented::{ukf_step, UnscentedParams};
use super::{Estimator, ParticleSet};
use crate::error::{Error, Result};
use crate::models::StateSpaceModel;
use crate::prob::linalg::{symmetrize, Matrix, Vector};
use crate::prob::{gaussian_sample, GaussianBelief};

/// Particle filter flavours.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PfVariant {
    /// Bootstrap filter with the transition prior as proposal.
    Sir,
    /// Auxiliary filter; first stage looks ahead with the transition mean.
    Apf,
    /// Gaussian re-approximation each step, no resampling.
    Gpf,
    /// Per-particle EKF proposal.
    Ekpf,
    /// Per-particle UKF proposal.
    Ukpf,
}

impl PfVariant {
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "sir" => Ok(Self::Sir),
            "apf" => Ok(Self::Apf),
            "gpf" => Ok(Self::Gpf),
            "ekpf" => Ok(Self::Ekpf),
            "ukpf" => Ok(Self::Ukpf),
            other => Err(Error::UnknownName {
                kind: "particle filter",
                name: other.to_string(),
            }),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Sir => "sir",
            Self::Apf => "apf",
            Self::Gpf => "gpf",
            Self::Ekpf => "ekpf",
            Self::Ukpf => "ukpf",
        }
    }
}

const LN_UNDERFLOW: f64 = -708.396_418_532_264_1; // ln(f64::MIN_POSITIVE)

/// Turns per-particle log weights into normalised weights.
///
/// Returns `None` when even the best particle would underflow.
fn normalise_log(logw: &[f64]) -> Option<Vec<f64>> {
    let max = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(max.is_finite() && max > LN_UNDERFLOW) {
        return None;
    }
    let mut w: Vec<f64> = logw.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    Some(w)
}

fn mvn_ln_pdf(x: &Vector, mean: &Vector, cov: &Matrix) -> Option<f64> {
    let chol = cov.clone().cholesky()?;
    let d = x - mean;
    let z = chol.l().solve_lower_triangular(&d)?;
    let ln_det: f64 = chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>() * 2.0;
    Some(-0.5 * z.norm_squared() - 0.5 * ln_det - 0.5 * d.len() as f64 * (2.0 * std::f64::consts::PI).ln())
}

/// Sequential Monte Carlo estimator over a [`StateSpaceModel`].
pub struct ParticleFilter<'m> {
    model: &'m dyn StateSpaceModel,
    variant: PfVariant,
    set: ParticleSet,
    covs: Vec<Matrix>,
    ut: UnscentedParams,
    resample_fraction: f64,
    degeneracy: usize,
}

impl<'m> ParticleFilter<'m> {
    /// Draws `n` equally weighted particles from `prior`.
    pub fn new(
        model: &'m dyn StateSpaceModel,
        variant: PfVariant,
        n: usize,
        prior: &GaussianBelief,
        rng: &mut dyn RngCore,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("particle count must be >= 1".into()));
        }
        let particles = (0..n)
            .map(|_| gaussian_sample(prior, rng))
            .collect::<Result<Vec<_>>>()?;
        let mut pf = Self::from_set(model, variant, ParticleSet::uniform(particles)?);
        pf.covs = vec![prior.cov.clone(); n];
        Ok(pf)
    }

    /// Starts from an explicit weighted set; per-particle covariances
    /// (EKPF/UKPF) default to the model's assumed process noise.
    pub fn from_set(model: &'m dyn StateSpaceModel, variant: PfVariant, mut set: ParticleSet) -> Self {
        set.normalize();
        let q = model.assumed_process_noise().1;
        Self {
            model,
            variant,
            covs: vec![q; set.len()],
            set,
            ut: UnscentedParams::default(),
            resample_fraction: 0.5,
            degeneracy: 0,
        }
    }

    pub fn variant(&self) -> PfVariant {
        self.variant
    }

    pub fn particles(&self) -> &ParticleSet {
        &self.set
    }

    pub fn degeneracy_count(&self) -> usize {
        self.degeneracy
    }

    /// Incorporates `y_t`.
    pub fn advance(&mut self, y: &Vector, t: usize, rng: &mut dyn RngCore) -> Result<()> {
        match self.variant {
            PfVariant::Sir => self.sir(y, t, rng),
            PfVariant::Apf => self.apf(y, t, rng),
            PfVariant::Gpf => self.gpf(y, t, rng)?,
            PfVariant::Ekpf | PfVariant::Ukpf => self.kpf(y, t, rng),
        }
        Ok(())
    }

    fn apply_log_weights(&mut self, logw: Vec<f64>) {
        match normalise_log(&logw) {
            Some(w) => self.set.weights = w,
            None => {
                self.degeneracy += 1;
                let n = self.set.len();
                self.set.weights = vec![1.0 / n as f64; n];
            }
        }
    }

    fn maybe_resample(&mut self, rng: &mut dyn RngCore) {
        let n = self.set.len();
        if self.set.ess() >= self.resample_fraction * n as f64 {
            return;
        }
        let idx = systematic_indices(&self.set.weights, n, rng);
        self.set.particles = idx.iter().map(|&i| self.set.particles[i].clone()).collect();
        self.covs = idx.iter().map(|&i| self.covs[i].clone()).collect();
        self.set.weights = vec![1.0 / n as f64; n];
    }

    fn sir(&mut self, y: &Vector, t: usize, rng: &mut dyn RngCore) {
        let model = self.model;
        let mut logw = Vec::with_capacity(self.set.len());
        for (x, w) in self.set.particles.iter_mut().zip(&self.set.weights) {
            *x = model.sample_transition(x, t, rng);
            logw.push(w.ln() + model.observation_ln_likelihood(y, x, t));
        }
        self.apply_log_weights(logw);
        self.maybe_resample(rng);
    }

    fn apf(&mut self, y: &Vector, t: usize, rng: &mut dyn RngCore) {
        let model = self.model;
        let n = self.set.len();
        let u_mean = model.process_noise_mean();
        let first: Vec<f64> = self
            .set
            .particles
            .iter()
            .map(|x| model.observation_ln_likelihood(y, &(model.transition(x, t) + &u_mean), t))
            .collect();
        let stage1: Vec<f64> = first.iter().zip(&self.set.weights).map(|(l, w)| l + w.ln()).collect();
        let (parents, look_ahead) = match normalise_log(&stage1) {
            Some(lambda) => (systematic_indices(&lambda, n, rng), true),
            None => {
                self.degeneracy += 1;
                (systematic_indices(&self.set.weights, n, rng), false)
            }
        };
        let mut particles = Vec::with_capacity(n);
        let mut logw = Vec::with_capacity(n);
        for &k in &parents {
            let x = model.sample_transition(&self.set.particles[k], t, rng);
            let mut l = model.observation_ln_likelihood(y, &x, t);
            if look_ahead {
                l -= first[k];
            }
            logw.push(l);
            particles.push(x);
        }
        self.set.particles = particles;
        self.apply_log_weights(logw);
        // Second-stage weights are usually mild; resample only when they are not.
        self.maybe_resample(rng);
    }

    fn gpf(&mut self, y: &Vector, t: usize, rng: &mut dyn RngCore) -> Result<()> {
        let model = self.model;
        let n = self.set.len();
        let belief = weighted_gaussian(&self.set);
        let mut logw = Vec::with_capacity(n);
        let mut particles = Vec::with_capacity(n);
        for _ in 0..n {
            let prev = gaussian_sample(&belief, rng)?;
            let x = model.sample_transition(&prev, t, rng);
            logw.push(model.observation_ln_likelihood(y, &x, t));
            particles.push(x);
        }
        self.set.particles = particles;
        self.apply_log_weights(logw);
        Ok(())
    }

    fn kpf(&mut self, y: &Vector, t: usize, rng: &mut dyn RngCore) {
        let model = self.model;
        let n = self.set.len();
        let mut logw = Vec::with_capacity(n);
        for i in 0..n {
            let prev = self.set.particles[i].clone();
            let belief = GaussianBelief {
                mean: prev.clone(),
                cov: self.covs[i].clone(),
            };
            let proposal = match self.variant {
                PfVariant::Ukpf => ukf_step(&belief, y, t, model, &self.ut),
                _ => ekf_step(&belief, y, t, model),
            };
            let drawn = proposal.ok().and_then(|q| {
                let x = gaussian_sample(&q, rng).ok()?;
                let ln_q = mvn_ln_pdf(&x, &q.mean, &q.cov)?;
                Some((x, q.cov, ln_q))
            });
            let w0 = self.set.weights[i].ln();
            match drawn {
                Some((x, cov, ln_q)) => {
                    let l = model.observation_ln_likelihood(y, &x, t) + model.transition_ln_pdf(&x, &prev, t) - ln_q;
                    logw.push(w0 + l);
                    self.set.particles[i] = x;
                    self.covs[i] = cov;
                }
                None => {
                    // Degenerate proposal: fall back to the transition prior.
                    let x = model.sample_transition(&prev, t, rng);
                    logw.push(w0 + model.observation_ln_likelihood(y, &x, t));
                    self.set.particles[i] = x;
                }
            }
        }
        self.apply_log_weights(logw);
        self.maybe_resample(rng);
    }
}

/// Moment-matched Gaussian of a weighted set.
fn weighted_gaussian(set: &ParticleSet) -> GaussianBelief {
    let mean = set.mean();
    let d = mean.len();
    let total: f64 = set.weights.iter().sum();
    let mut cov = Matrix::zeros(d, d);
    for (x, w) in set.particles.iter().zip(&set.weights) {
        let dx = x - &mean;
        cov += &dx * dx.transpose() * (*w / total);
    }
    symmetrize(&mut cov);
    GaussianBelief { mean, cov }
}

impl Estimator for ParticleFilter<'_> {
    fn name(&self) -> &str {
        self.variant.name()
    }

    fn step(&mut self, y: &Vector, t: usize, rng: &mut dyn RngCore) -> Result<Vector> {
        self.advance(y, t, rng)?;
        Ok(self.set.mean())
    }

    fn degeneracy_events(&self) -> usize {
        self.degeneracy
    }
}
