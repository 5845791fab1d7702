//! Monte-Carlo comparison of estimators on the scalar benchmark models.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::filters::{
    Estimator, GaussianFilter, GaussianKind, KalmanFilter, ParticleFilter, PfVariant, UnscentedParams,
};
use crate::models::{simulate, ModelKind, StateSpaceModel};
use crate::o2::{DebiasSpec, O2Estimator, SignStrategy};
use crate::prob::{mean_var, normal, rmse, GaussianBelief, RmseMode, RngStream, Vector};

/// Estimator names understood by [`build_estimator`].
pub const ESTIMATORS: &[&str] = &[
    "kf",
    "ekf",
    "ukf",
    "sir",
    "apf",
    "gpf",
    "ekpf",
    "ukpf",
    "o2",
    "o2-pf-sign",
    "o2-true-sign",
    "o2-unbiased",
];

/// One scalar-model Monte-Carlo study.
#[derive(Debug, Clone)]
pub struct ScalarSetup {
    pub model: ModelKind,
    pub estimators: Vec<String>,
    pub runs: usize,
    pub steps: usize,
    pub seed: u64,
    pub particles: usize,
    pub debias_samples: usize,
}

impl ScalarSetup {
    pub fn new(model: ModelKind, estimators: &[&str]) -> Self {
        Self {
            model,
            estimators: estimators.iter().map(|s| s.to_string()).collect(),
            runs: 50,
            steps: 100,
            seed: 1,
            particles: 100,
            debias_samples: 100,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.runs == 0 || self.steps < 2 {
            return Err(Error::Config(format!(
                "need runs >= 1 and steps >= 2 (got {} runs, {} steps)",
                self.runs, self.steps
            )));
        }
        if self.particles == 0 {
            return Err(Error::Config("particle count must be >= 1".into()));
        }
        for name in &self.estimators {
            if !ESTIMATORS.contains(&name.as_str()) {
                return Err(Error::UnknownName {
                    kind: "estimator",
                    name: name.clone(),
                });
            }
            if name == "kf" && !matches!(self.model, ModelKind::B(_)) {
                return Err(Error::Config("`kf` needs the linear model B".into()));
            }
        }
        Ok(())
    }
}

/// True initial state and the belief every estimator starts from.
///
/// Models A and B start at `x₁ = 1` with prior `N(1, 0.75)`. The growth model
/// draws `x₁ ~ N(0, Q)` and starts the filters from that same distribution.
pub fn initial_condition(model: &ModelKind, rng: &mut RngStream) -> (Vector, GaussianBelief) {
    match model {
        ModelKind::Ungm(m) => {
            let x1 = normal(rng, 0.0, m.process_var);
            let prior = GaussianBelief::scalar(0.0, m.process_var).expect("positive variance");
            (Vector::from_element(1, x1), prior)
        }
        _ => (
            Vector::from_element(1, 1.0),
            GaussianBelief::scalar(1.0, 0.75).expect("positive variance"),
        ),
    }
}

/// Builds an estimator by name.
pub fn build_estimator<'m>(
    name: &str,
    model: &'m ModelKind,
    prior: &GaussianBelief,
    particles: usize,
    debias_samples: usize,
    rng: &mut RngStream,
) -> Result<Box<dyn Estimator + 'm>> {
    let m: &'m dyn StateSpaceModel = model.as_model();
    let pf = |v: PfVariant, rng: &mut RngStream| ParticleFilter::new(m, v, particles, prior, rng);
    Ok(match name {
        "kf" => match model {
            ModelKind::B(b) => Box::new(KalmanFilter::new(*b, prior.clone())),
            _ => return Err(Error::Config("`kf` needs the linear model B".into())),
        },
        "ekf" => Box::new(GaussianFilter::new(GaussianKind::Ekf, m, prior.clone())),
        "ukf" => Box::new(GaussianFilter::new(
            GaussianKind::Ukf(UnscentedParams::default()),
            m,
            prior.clone(),
        )),
        "o2" => Box::new(O2Estimator::new(
            m,
            SignStrategy::TransitionPrediction,
            prior.mean.clone(),
        )),
        "o2-pf-sign" => Box::new(O2Estimator::with_filter_sign(
            m,
            pf(PfVariant::Sir, rng)?,
            prior.mean.clone(),
        )),
        "o2-true-sign" => Box::new(O2Estimator::new(m, SignStrategy::Oracle, prior.mean.clone())),
        "o2-unbiased" => Box::new(
            O2Estimator::new(m, SignStrategy::Oracle, prior.mean.clone()).debiased(DebiasSpec {
                samples: debias_samples,
            }),
        ),
        other => Box::new(pf(
            PfVariant::by_name(other).map_err(|_| Error::UnknownName {
                kind: "estimator",
                name: other.to_string(),
            })?,
            rng,
        )?),
    })
}

/// Error statistics of one estimator across all runs.
#[derive(Debug, Clone, Serialize)]
pub struct EstimatorSeries {
    pub name: String,
    /// RMSE over runs at `t = 2..=T`.
    pub rmse: Vec<f64>,
    /// Same with magnitudes compared, so the sign of the state is ignored.
    pub rmse_abs: Vec<f64>,
    /// Time average of `rmse`.
    pub mean: f64,
    /// Time average of `rmse_abs`.
    pub mean_abs: f64,
    /// Sample variance over runs of each run's mean absolute error.
    pub variance: f64,
    pub per_run_mean: Vec<f64>,
    pub degeneracy_events: usize,
    /// Total wall-clock spent inside the estimator, over all runs.
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalarReport {
    pub model: String,
    pub obs_var: f64,
    pub seed: u64,
    pub runs: usize,
    pub steps: usize,
    pub particles: usize,
    pub estimators: Vec<EstimatorSeries>,
}

impl ScalarReport {
    pub fn get(&self, name: &str) -> Option<&EstimatorSeries> {
        self.estimators.iter().find(|e| e.name == name)
    }

    pub fn mean_of(&self, name: &str) -> f64 {
        self.get(name).map_or(f64::NAN, |e| e.mean)
    }
}

struct RunOutcome {
    truth: Vec<f64>,
    estimates: Vec<Vec<f64>>,
    degeneracy: Vec<usize>,
    wall_ns: Vec<u128>,
}

fn run_once(setup: &ScalarSetup, run: usize) -> Result<RunOutcome> {
    let mut truth_rng = RngStream::new(setup.seed, RngStream::run_stream(run as u64, 0));
    let (x1, prior) = initial_condition(&setup.model, &mut truth_rng);
    let model = setup.model.as_model();
    let traj = simulate(model, setup.steps, x1, &mut truth_rng)?;

    let mut estimates = Vec::with_capacity(setup.estimators.len());
    let mut degeneracy = Vec::with_capacity(setup.estimators.len());
    let mut wall_ns = Vec::with_capacity(setup.estimators.len());
    for (j, name) in setup.estimators.iter().enumerate() {
        let mut rng = RngStream::new(setup.seed, RngStream::run_stream(run as u64, j as u64 + 1));
        let start = Instant::now();
        let mut est = build_estimator(
            name,
            &setup.model,
            &prior,
            setup.particles,
            setup.debias_samples,
            &mut rng,
        )?;
        let mut out = Vec::with_capacity(setup.steps - 1);
        for t in 2..=setup.steps {
            est.observe_truth(&traj.states[t - 1]);
            out.push(est.step(&traj.observations[t - 1], t, &mut rng)?[0]);
        }
        wall_ns.push(start.elapsed().as_nanos());
        degeneracy.push(est.degeneracy_events());
        estimates.push(out);
    }
    Ok(RunOutcome {
        truth: traj.states[1..].iter().map(|x| x[0]).collect(),
        estimates,
        degeneracy,
        wall_ns,
    })
}

/// Runs every estimator on the same simulated trajectories.
///
/// Run `i` draws its truth from stream `(i, 0)` and estimator `j` uses
/// stream `(i, j + 1)`, so results do not depend on thread scheduling.
pub fn run_scalar(setup: &ScalarSetup) -> Result<ScalarReport> {
    setup.validate()?;
    let outcomes: Vec<RunOutcome> = (0..setup.runs)
        .into_par_iter()
        .map(|run| run_once(setup, run))
        .collect::<Result<_>>()?;

    let truth: Vec<Vec<f64>> = outcomes.iter().map(|o| o.truth.clone()).collect();
    let mut series = Vec::with_capacity(setup.estimators.len());
    for (j, name) in setup.estimators.iter().enumerate() {
        let est: Vec<Vec<f64>> = outcomes.iter().map(|o| o.estimates[j].clone()).collect();
        let signed = rmse(&truth, &est, RmseMode::Signed)?;
        let abs = rmse(&truth, &est, RmseMode::Absolute)?;
        let per_run_mean: Vec<f64> = truth
            .iter()
            .zip(&est)
            .map(|(x, e)| x.iter().zip(e).map(|(a, b)| (a - b).abs()).sum::<f64>() / x.len() as f64)
            .collect();
        let variance = if per_run_mean.len() > 1 {
            mean_var(&per_run_mean).1
        } else {
            0.0
        };
        series.push(EstimatorSeries {
            name: name.clone(),
            mean: mean_var(&signed).0,
            mean_abs: mean_var(&abs).0,
            rmse: signed,
            rmse_abs: abs,
            variance,
            per_run_mean,
            degeneracy_events: outcomes.iter().map(|o| o.degeneracy[j]).sum(),
            wall_ms: outcomes.iter().map(|o| o.wall_ns[j]).sum::<u128>() as f64 / 1e6,
        });
    }
    Ok(ScalarReport {
        model: setup.model.as_model().name().to_string(),
        obs_var: setup.model.as_model().observation_noise_cov()[(0, 0)],
        seed: setup.seed,
        runs: setup.runs,
        steps: setup.steps,
        particles: setup.particles,
        estimators: series,
    })
}
