use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::motion::{ct_predict, ct_transition, position, CtNoise, CtState};
use super::sensor::{poisson, Obs, SensorModel};
use crate::prob::normal;
use crate::{Error, Result};

/// Poisson birth intensity: a weighted sum of diagonal Gaussians.
#[derive(Debug, Clone, PartialEq)]
pub struct BirthModel {
    pub means: Vec<CtState>,
    /// Per-dimension standard deviation shared by all components.
    pub std: CtState,
    /// Expected births per step, per component.
    pub rates: Vec<f64>,
}

impl Default for BirthModel {
    fn default() -> Self {
        Self {
            means: vec![
                [-1500.0, 0.0, 250.0, 0.0, 0.0],
                [-250.0, 0.0, 1000.0, 0.0, 0.0],
                [250.0, 0.0, 750.0, 0.0, 0.0],
                [1000.0, 0.0, 1500.0, 0.0, 0.0],
            ],
            std: [50.0, 50.0, 50.0, 50.0, 6.0 * PI / 180.0],
            rates: vec![0.02, 0.02, 0.03, 0.03],
        }
    }
}

impl BirthModel {
    pub fn none() -> Self {
        Self {
            rates: vec![0.0; 4],
            ..Self::default()
        }
    }

    pub fn total_rate(&self) -> f64 {
        self.rates.iter().sum()
    }

    pub fn sample(&self, component: usize, rng: &mut dyn RngCore) -> CtState {
        let m = &self.means[component];
        std::array::from_fn(|i| m[i] + normal(rng, 0.0, self.std[i] * self.std[i]))
    }
}

/// Which ground-truth generator to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    /// Turning targets under range-bearing radars.
    Ct,
    /// Mixed-motion targets under position cameras.
    Ghost,
}

impl ScenarioKind {
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "ct" => Ok(Self::Ct),
            "ghost" => Ok(Self::Ghost),
            _ => Err(Error::UnknownName {
                kind: "scenario",
                name: name.to_string(),
            }),
        }
    }
}

/// Inputs of [`generate_scenario`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub steps: usize,
    pub sensors: usize,
    pub sensor: SensorModel,
    pub birth: BirthModel,
    pub p_s: f64,
    /// Process noise of the ground-truth turn model.
    pub truth_motion: CtNoise,
    /// Targets alive at the first step.
    pub initial: Vec<CtState>,
    /// Number of ghost targets over the run (ghost scenario only).
    pub ghost_targets: usize,
}

impl ScenarioConfig {
    /// Radar scenario with `sensors` co-located range-bearing sensors. Targets
    /// keep their birth velocity and turn rate; trackers still assume the
    /// noisy turn model.
    pub fn ct(sensors: usize, clutter_rate: f64) -> Self {
        let sensor = if sensors > 1 {
            SensorModel::range_bearing(20.0, PI / 90.0, clutter_rate)
        } else {
            SensorModel::range_bearing(5.0, PI / 180.0, clutter_rate)
        };
        Self {
            kind: ScenarioKind::Ct,
            steps: 100,
            sensors,
            sensor,
            birth: BirthModel::default(),
            p_s: 0.99,
            truth_motion: CtNoise::noiseless(),
            initial: Vec::new(),
            ghost_targets: 0,
        }
    }

    /// Camera scenario over `[−100, 100]²` with noise variance 25.
    pub fn ghost(sensors: usize, clutter_rate: f64) -> Self {
        Self {
            kind: ScenarioKind::Ghost,
            steps: 100,
            sensors,
            sensor: SensorModel::camera(25.0, clutter_rate),
            birth: BirthModel::none(),
            p_s: 1.0,
            truth_motion: CtNoise::noiseless(),
            initial: Vec::new(),
            ghost_targets: 12,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 || self.sensors == 0 {
            return Err(Error::InvalidInput(
                "scenario needs at least one step and one sensor".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.p_s) || !(0.0..=1.0).contains(&self.sensor.p_d) {
            return Err(Error::InvalidInput("probabilities must lie in [0, 1]".into()));
        }
        if self.sensor.clutter_rate < 0.0 || self.birth.rates.iter().any(|r| *r < 0.0) {
            return Err(Error::InvalidInput("rates must be non-negative".into()));
        }
        if self.birth.rates.len() != self.birth.means.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} entries", self.birth.means.len()),
                got: format!("{} entries", self.birth.rates.len()),
            });
        }
        Ok(())
    }
}

/// Observations of one sensor at one step, unlabeled.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScanData {
    pub t: usize,
    pub observations: Vec<Obs>,
}

/// Ground truth and per-sensor scans; `truth[k]` and `scans[s][k]` belong
/// to time `k + 1`.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub truth: Vec<Vec<CtState>>,
    pub scans: Vec<Vec<ScanData>>,
}

/// Draws ground truth, then independent detections, noise and clutter for
/// every sensor.
pub fn generate_scenario(config: &ScenarioConfig, rng: &mut dyn RngCore) -> Result<Scenario> {
    config.validate()?;
    let truth = match config.kind {
        ScenarioKind::Ct => ct_truth(config, rng),
        ScenarioKind::Ghost => ghost_truth(config, rng),
    };
    let scans = (0..config.sensors)
        .map(|_| scan_series(&truth, &config.sensor, rng))
        .collect();
    Ok(Scenario {
        config: config.clone(),
        truth,
        scans,
    })
}

/// Simulates one sensor looking at a given truth.
pub fn scan_series(truth: &[Vec<CtState>], sensor: &SensorModel, rng: &mut dyn RngCore) -> Vec<ScanData> {
    truth
        .iter()
        .enumerate()
        .map(|(k, targets)| {
            let mut observations: Vec<Obs> = Vec::new();
            for x in targets {
                let p = position(x);
                if rng.random::<f64>() < sensor.detection_probability(p) {
                    observations.push(sensor.observe(p, rng));
                }
            }
            observations.extend(sensor.sample_clutter(rng));
            observations.shuffle(rng);
            ScanData { t: k + 1, observations }
        })
        .collect()
}

fn ct_truth(config: &ScenarioConfig, rng: &mut dyn RngCore) -> Vec<Vec<CtState>> {
    let mut alive: Vec<CtState> = config.initial.clone();
    let mut truth = Vec::with_capacity(config.steps);
    for k in 0..config.steps {
        if k > 0 {
            let mut next = Vec::with_capacity(alive.len());
            for x in &alive {
                if config.p_s >= 1.0 || rng.random::<f64>() < config.p_s {
                    let y = ct_transition(x, &config.truth_motion, rng);
                    if config.sensor.region.contains(position(&y)) {
                        next.push(y);
                    }
                }
            }
            alive = next;
        }
        for (i, rate) in config.birth.rates.iter().enumerate() {
            for _ in 0..poisson(*rate, rng) {
                let x = config.birth.sample(i, rng);
                if config.sensor.region.contains(position(&x)) {
                    alive.push(x);
                }
            }
        }
        truth.push(alive.clone());
    }
    truth
}

#[derive(Debug, Clone, Copy)]
enum GhostMotion {
    Static,
    ConstantVelocity,
    NearConstantVelocity,
    ConstantTurn,
    NoisyTurn,
}

fn ghost_truth(config: &ScenarioConfig, rng: &mut dyn RngCore) -> Vec<Vec<CtState>> {
    const MOTIONS: [GhostMotion; 5] = [
        GhostMotion::Static,
        GhostMotion::ConstantVelocity,
        GhostMotion::NearConstantVelocity,
        GhostMotion::ConstantTurn,
        GhostMotion::NoisyTurn,
    ];
    let steps = config.steps;
    let region = config.sensor.region;
    let mut truth = vec![Vec::new(); steps];
    let push =
        |truth: &mut Vec<Vec<CtState>>, start: usize, end: usize, mut x: CtState, motion, rng: &mut dyn RngCore| {
            let (noise, turn) = match motion {
                GhostMotion::NearConstantVelocity => (0.1, 0.0),
                GhostMotion::NoisyTurn => (0.5, 0.02),
                _ => (0.0, 0.0),
            };
            let noise = CtNoise {
                dt: 1.0,
                sigma_w: noise,
                sigma_u: turn,
            };
            for slot in truth.iter_mut().take(end).skip(start) {
                if !region.contains(position(&x)) {
                    break;
                }
                slot.push(x);
                x = match motion {
                    GhostMotion::Static => x,
                    GhostMotion::ConstantVelocity | GhostMotion::ConstantTurn => ct_predict(&x, 1.0),
                    _ => ct_transition(&x, &noise, rng),
                };
            }
        };
    for x in &config.initial {
        push(&mut truth, 0, steps, *x, GhostMotion::ConstantVelocity, rng);
    }
    // (start, position) of earlier ghosts, so later ones can appear next to them
    let mut spawned: Vec<(usize, [f64; 2])> = Vec::new();
    for _ in 0..config.ghost_targets {
        let motion = MOTIONS[rng.random_range(0..MOTIONS.len())];
        let life = rng.random_range(steps / 5..=steps * 3 / 5).max(1);
        let (start, p) = match spawned.last() {
            // appear jointly with, or adjacent to, an earlier ghost
            Some(&(t, q)) if rng.random::<f64>() < 1.0 / 3.0 => (
                (t + rng.random_range(0..=steps / 10)).min(steps - 1),
                [
                    q[0] + rng.random_range(-10.0..10.0),
                    q[1] + rng.random_range(-10.0..10.0),
                ],
            ),
            _ => (
                rng.random_range(0..steps.saturating_sub(steps / 5).max(1)),
                [rng.random_range(-80.0..80.0), rng.random_range(-80.0..80.0)],
            ),
        };
        spawned.push((start, p));
        let speed = match motion {
            GhostMotion::Static => 0.0,
            _ => rng.random_range(0.5..2.0),
        };
        let heading = rng.random_range(-PI..PI);
        let omega = match motion {
            GhostMotion::ConstantTurn | GhostMotion::NoisyTurn => {
                rng.random_range(0.02..0.08) * if rng.random::<bool>() { 1.0 } else { -1.0 }
            }
            _ => 0.0,
        };
        let x = [p[0], speed * heading.cos(), p[1], speed * heading.sin(), omega];
        push(&mut truth, start, (start + life).min(steps), x, motion, rng);
    }
    truth
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::RngStream;

    #[test]
    fn single_persistent_target() {
        let mut cfg = ScenarioConfig::ct(1, 0.0);
        cfg.birth = BirthModel::none();
        cfg.p_s = 1.0;
        cfg.truth_motion = CtNoise::noiseless();
        cfg.initial = vec![[0.0, 1.0, 1000.0, 0.0, 0.0]];
        let sc = generate_scenario(&cfg, &mut RngStream::new(1, 0)).unwrap();
        assert!(sc.truth.iter().all(|t| t.len() == 1));
    }

    #[test]
    fn clutter_mean_per_scan() {
        let mut cfg = ScenarioConfig::ct(1, 10.0);
        cfg.birth = BirthModel::none();
        let sc = generate_scenario(&cfg, &mut RngStream::new(2, 0)).unwrap();
        let total: usize = sc.scans[0].iter().map(|s| s.observations.len()).sum();
        assert!((total as f64 / 100.0 - 10.0).abs() < 1.0);
    }

    #[test]
    fn perfect_sensor_sees_every_target_exactly() {
        let mut cfg = ScenarioConfig::ct(2, 0.0);
        cfg.p_s = 1.0;
        cfg.sensor.p_d = 1.0;
        cfg.sensor.p_d_scale = None;
        cfg.sensor.kind = super::super::sensor::SensorKind::RangeBearing {
            sigma_r: 0.0,
            sigma_theta: 0.0,
        };
        let sc = generate_scenario(&cfg, &mut RngStream::new(3, 0)).unwrap();
        for scans in &sc.scans {
            for (k, scan) in scans.iter().enumerate() {
                assert_eq!(scan.observations.len(), sc.truth[k].len());
                for x in &sc.truth[k] {
                    let z = cfg.sensor.observe_noiseless(position(x));
                    assert!(scan.observations.contains(&z));
                }
            }
        }
    }

    #[test]
    fn ct_targets_stay_in_region() {
        let cfg = ScenarioConfig::ct(1, 0.0);
        let sc = generate_scenario(&cfg, &mut RngStream::new(4, 0)).unwrap();
        let n: usize = sc.truth.iter().map(|t| t.len()).sum();
        assert!(n > 0);
        for x in sc.truth.iter().flatten() {
            assert!(cfg.sensor.region.contains(position(x)));
        }
    }

    #[test]
    fn ghost_targets_inside_square() {
        let cfg = ScenarioConfig::ghost(10, 10.0);
        let sc = generate_scenario(&cfg, &mut RngStream::new(5, 0)).unwrap();
        assert_eq!(sc.scans.len(), 10);
        let peak = sc.truth.iter().map(|t| t.len()).max().unwrap();
        assert!(peak >= 2);
        for x in sc.truth.iter().flatten() {
            assert!(x[0].abs() <= 100.0 && x[2].abs() <= 100.0);
        }
    }

    #[test]
    fn rejects_bad_probabilities() {
        let mut cfg = ScenarioConfig::ct(1, 0.0);
        cfg.p_s = 1.5;
        assert!(generate_scenario(&cfg, &mut RngStream::new(1, 0)).is_err());
    }
}
