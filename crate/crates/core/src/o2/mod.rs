//! Observation-only inference: invert `h` and ignore the dynamics, except for
//! optional help with choosing among several inverse candidates.

mod system;

pub use system::{fisher_crb, fisher_information, o2_multisensor_fuse, o2_solve_system, Sensor, SensorSuite};

use rand::RngCore;

use crate::error::{Error, Result};
use crate::filters::{Estimator, ParticleFilter};
use crate::models::StateSpaceModel;
use crate::prob::Vector;

/// How to choose among several states that explain the same observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SignStrategy {
    /// Closest to the one-step prediction from the previous estimate.
    TransitionPrediction,
    /// Closest to an auxiliary filter's estimate.
    FilterAssisted,
    /// Closest to the true state (benchmark oracle).
    Oracle,
    /// The state is known to be non-negative: take the largest candidate.
    None,
}

/// Monte-Carlo debiasing: average the inverse over `samples` noise draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DebiasSpec {
    pub samples: usize,
}

impl Default for DebiasSpec {
    fn default() -> Self {
        Self { samples: 100 }
    }
}

/// Result of [`o2_debias`].
#[derive(Debug, Clone, PartialEq)]
pub struct Debiased {
    pub estimate: Vector,
    /// Noise draws that produced a valid inverse.
    pub valid: usize,
    /// `true` when no draw was valid and the plain estimate was returned.
    pub fell_back: bool,
}

/// Point that candidates are compared against.
fn reference_point(
    model: &dyn StateSpaceModel,
    t: usize,
    strategy: SignStrategy,
    context: Option<&Vector>,
) -> Result<Option<Vector>> {
    let need = |what: &str| Error::InvalidInput(format!("sign strategy {strategy:?} needs {what}"));
    Ok(match strategy {
        SignStrategy::TransitionPrediction => {
            let prev = context.ok_or_else(|| need("the previous estimate"))?;
            Some(model.transition(prev, t) + model.process_noise_mean())
        }
        SignStrategy::FilterAssisted => Some(context.ok_or_else(|| need("a filter estimate"))?.clone()),
        SignStrategy::Oracle => Some(context.ok_or_else(|| need("the true state"))?.clone()),
        SignStrategy::None => None,
    })
}

fn select(mut candidates: Vec<Vector>, reference: Option<&Vector>) -> Option<Vector> {
    if candidates.len() <= 1 {
        return candidates.pop();
    }
    let key = |c: &Vector| match reference {
        Some(r) => (c - r).norm(),
        None => -c[0],
    };
    candidates.into_iter().min_by(|a, b| key(a).total_cmp(&key(b)))
}

/// Plain observation-only estimate of `x_t` from `y_t`.
///
/// `context` is the previous estimate for [`SignStrategy::TransitionPrediction`],
/// the filter estimate for [`SignStrategy::FilterAssisted`] and the true state
/// for [`SignStrategy::Oracle`]; it is ignored otherwise.
pub fn o2_estimate(
    model: &dyn StateSpaceModel,
    y: &Vector,
    t: usize,
    strategy: SignStrategy,
    context: Option<&Vector>,
) -> Result<Vector> {
    let reference = reference_point(model, t, strategy, context)?;
    select(model.invert(y, t), reference.as_ref()).ok_or(Error::NoInverse { t })
}

/// Debiased estimate: mean of `h⁻¹(y − v⁽ⁱ⁾)` over noise draws whose
/// inverse exists. Draws that leave the image of `h` are discarded.
pub fn o2_debias(
    model: &dyn StateSpaceModel,
    y: &Vector,
    t: usize,
    spec: &DebiasSpec,
    strategy: SignStrategy,
    context: Option<&Vector>,
    rng: &mut dyn RngCore,
) -> Result<Debiased> {
    if spec.samples == 0 {
        return Err(Error::InvalidInput("debias sample count must be >= 1".into()));
    }
    let reference = reference_point(model, t, strategy, context)?;
    let mut sum = Vector::zeros(model.state_dim());
    let mut valid = 0;
    for _ in 0..spec.samples {
        let shifted = y - model.sample_observation_noise(rng);
        let candidates: Vec<Vector> = model
            .invert(&shifted, t)
            .into_iter()
            .filter(|c| {
                let back = model.observe(c, t);
                (back - &shifted).amax() <= 1e-8 * (1.0 + shifted.amax())
            })
            .collect();
        if let Some(c) = select(candidates, reference.as_ref()) {
            sum += c;
            valid += 1;
        }
    }
    if valid == 0 {
        let estimate = select(model.invert(y, t), reference.as_ref()).ok_or(Error::NoInverse { t })?;
        return Ok(Debiased {
            estimate,
            valid,
            fell_back: true,
        });
    }
    Ok(Debiased {
        estimate: sum / valid as f64,
        valid,
        fell_back: false,
    })
}

/// Observation-only estimator usable alongside the filters.
pub struct O2Estimator<'m> {
    name: String,
    model: &'m dyn StateSpaceModel,
    strategy: SignStrategy,
    debias: Option<DebiasSpec>,
    helper: Option<ParticleFilter<'m>>,
    previous: Vector,
    truth: Option<Vector>,
    failures: usize,
}

impl<'m> O2Estimator<'m> {
    /// `initial` seeds the transition-prediction sign rule.
    pub fn new(model: &'m dyn StateSpaceModel, strategy: SignStrategy, initial: Vector) -> Self {
        let name = match strategy {
            SignStrategy::TransitionPrediction | SignStrategy::None => "o2",
            SignStrategy::FilterAssisted => "o2-pf-sign",
            SignStrategy::Oracle => "o2-true-sign",
        };
        Self {
            name: name.into(),
            model,
            strategy,
            debias: None,
            helper: None,
            previous: initial,
            truth: None,
            failures: 0,
        }
    }

    /// Sign taken from an attached particle filter.
    pub fn with_filter_sign(model: &'m dyn StateSpaceModel, pf: ParticleFilter<'m>, initial: Vector) -> Self {
        let mut e = Self::new(model, SignStrategy::FilterAssisted, initial);
        e.helper = Some(pf);
        e
    }

    pub fn debiased(mut self, spec: DebiasSpec) -> Self {
        self.debias = Some(spec);
        if self.strategy == SignStrategy::Oracle {
            self.name = "o2-unbiased".into();
        } else {
            self.name = format!("{}-unbiased", self.name);
        }
        self
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Steps at which no estimate could be formed.
    pub fn failures(&self) -> usize {
        self.failures
    }

    fn estimate(&mut self, y: &Vector, t: usize, rng: &mut dyn RngCore) -> Result<Vector> {
        let context = match self.strategy {
            SignStrategy::TransitionPrediction => Some(self.previous.clone()),
            SignStrategy::FilterAssisted => {
                let pf = self
                    .helper
                    .as_mut()
                    .ok_or_else(|| Error::InvalidInput("filter-assisted sign needs a particle filter".into()))?;
                Some(pf.step(y, t, rng)?)
            }
            SignStrategy::Oracle => Some(
                self.truth
                    .take()
                    .ok_or_else(|| Error::InvalidInput("oracle sign needs the true state".into()))?,
            ),
            SignStrategy::None => None,
        };
        match &self.debias {
            Some(spec) => Ok(o2_debias(self.model, y, t, spec, self.strategy, context.as_ref(), rng)?.estimate),
            None => o2_estimate(self.model, y, t, self.strategy, context.as_ref()),
        }
    }
}

impl Estimator for O2Estimator<'_> {
    fn name(&self) -> &str {
        &self.name
    }

    fn observe_truth(&mut self, x: &Vector) {
        self.truth = Some(x.clone());
    }

    fn step(&mut self, y: &Vector, t: usize, rng: &mut dyn RngCore) -> Result<Vector> {
        match self.estimate(y, t, rng) {
            Ok(x) => {
                self.previous = x.clone();
                Ok(x)
            }
            Err(Error::NoInverse { .. }) => {
                self.failures += 1;
                Ok(self.previous.clone())
            }
            Err(e) => Err(e),
        }
    }

    fn degeneracy_events(&self) -> usize {
        self.helper.as_ref().map_or(0, |pf| pf.degeneracy_count())
    }
}
