use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::motion::{ct_transition, position, CtNoise, CtState};
use super::scenario::{BirthModel, ScanData};
use super::sensor::{Obs, SensorModel};
use crate::filters::systematic_indices;
use crate::{Error, Result};

/// Settings of the bootstrap SMC-PHD filter.
#[derive(Debug, Clone, PartialEq)]
pub struct PhdConfig {
    pub p_s: f64,
    pub birth: BirthModel,
    pub motion: CtNoise,
    /// Particles kept per unit of intensity mass after resampling.
    pub particles_per_target: usize,
    /// Lower bound on the resampled particle count.
    pub min_particles: usize,
    /// Birth particles drawn per component per step.
    pub birth_particles: usize,
    /// Update mass above which an observation counts as target-originated.
    pub identify_threshold: f64,
}

impl Default for PhdConfig {
    fn default() -> Self {
        Self {
            p_s: 0.99,
            birth: BirthModel::default(),
            motion: CtNoise::default(),
            particles_per_target: 1000,
            min_particles: 600,
            birth_particles: 500,
            identify_threshold: 0.5,
        }
    }
}

impl PhdConfig {
    /// Default settings with a different particle budget per target;
    /// birth particles scale along.
    pub fn with_particles(particles_per_target: usize) -> Self {
        Self {
            particles_per_target,
            birth_particles: (particles_per_target / 2).max(1),
            ..Self::default()
        }
    }
}

/// Smallest total mass kept after an update.
pub const MASS_FLOOR: f64 = 1e-6;

/// Bootstrap SMC-PHD filter over turn-model states.
#[derive(Debug, Clone)]
pub struct SmcPhd {
    pub config: PhdConfig,
    pub sensor: SensorModel,
    particles: Vec<CtState>,
    weights: Vec<f64>,
    underflows: usize,
}

/// Everything the extractors need from one update, taken before resampling.
#[derive(Debug, Clone)]
pub struct PhdOutput {
    /// Predicted particles (survivors then births).
    pub particles: Vec<CtState>,
    pub predicted_weights: Vec<f64>,
    pub updated_weights: Vec<f64>,
    pub observations: Vec<Obs>,
    /// Per observation: `(particle index, g(z | x))` for particles inside the gate.
    pub likelihoods: Vec<Vec<(u32, f64)>>,
    /// Per observation: `Σ p_D g w̄ / (κ + Σ p_D g w̄)`.
    pub obs_mass: Vec<f64>,
    /// Total updated intensity mass.
    pub mass: f64,
}

impl PhdOutput {
    /// `round(mass)`.
    pub fn cardinality(&self) -> usize {
        self.mass.round().max(0.0) as usize
    }

    /// Observations whose update mass exceeds `threshold`.
    pub fn identified(&self, threshold: f64) -> Vec<usize> {
        (0..self.observations.len())
            .filter(|&i| self.obs_mass[i] > threshold)
            .collect()
    }
}

impl SmcPhd {
    pub fn new(config: PhdConfig, sensor: SensorModel) -> Result<Self> {
        if config.particles_per_target == 0 || config.birth_particles == 0 {
            return Err(Error::InvalidInput("particle counts must be positive".into()));
        }
        if config.birth.rates.len() != config.birth.means.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} entries", config.birth.means.len()),
                got: format!("{} entries", config.birth.rates.len()),
            });
        }
        Ok(Self {
            config,
            sensor,
            particles: Vec::new(),
            weights: Vec::new(),
            underflows: 0,
        })
    }

    /// Starts from an explicit weighted particle set.
    pub fn with_particles(mut self, particles: Vec<CtState>, weights: Vec<f64>) -> Result<Self> {
        if particles.len() != weights.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} entries", particles.len()),
                got: format!("{} entries", weights.len()),
            });
        }
        self.particles = particles;
        self.weights = weights;
        Ok(self)
    }

    pub fn particles(&self) -> &[CtState] {
        &self.particles
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Number of updates whose total mass fell below [`MASS_FLOOR`].
    pub fn underflow_count(&self) -> usize {
        self.underflows
    }

    /// Predict, update with `scan`, and resample. Returns the pre-resampling
    /// update for estimate extraction.
    pub fn step(&mut self, scan: &ScanData, rng: &mut dyn RngCore) -> PhdOutput {
        let cfg = &self.config;
        let nb = cfg.birth_particles;
        let mut particles = Vec::with_capacity(self.particles.len() + nb * cfg.birth.rates.len());
        let mut predicted = Vec::with_capacity(particles.capacity());
        for (x, w) in self.particles.iter().zip(&self.weights) {
            particles.push(ct_transition(x, &cfg.motion, rng));
            predicted.push(cfg.p_s * w);
        }
        for (i, rate) in cfg.birth.rates.iter().enumerate() {
            if *rate <= 0.0 {
                continue;
            }
            for _ in 0..nb {
                particles.push(cfg.birth.sample(i, rng));
                predicted.push(rate / nb as f64);
            }
        }

        let sensor = &self.sensor;
        let zhat: Vec<Obs> = particles
            .iter()
            .map(|x| sensor.observe_noiseless(position(x)))
            .collect();
        let p_d: Vec<f64> = particles
            .iter()
            .map(|x| sensor.detection_probability(position(x)))
            .collect();
        let kappa = sensor.clutter_density();

        let mut updated: Vec<f64> = predicted.iter().zip(&p_d).map(|(w, pd)| (1.0 - pd) * w).collect();
        let mut likelihoods = Vec::with_capacity(scan.observations.len());
        let mut obs_mass = Vec::with_capacity(scan.observations.len());
        for z in &scan.observations {
            let mut hits = Vec::new();
            let mut sum = 0.0;
            for (j, zh) in zhat.iter().enumerate() {
                let g = sensor.likelihood_from_predicted(*z, *zh);
                if g > 0.0 {
                    sum += p_d[j] * g * predicted[j];
                    hits.push((j as u32, g));
                }
            }
            let denom = kappa + sum;
            if denom > 0.0 {
                for &(j, g) in &hits {
                    let j = j as usize;
                    updated[j] += p_d[j] * g * predicted[j] / denom;
                }
            }
            obs_mass.push(if denom > 0.0 { sum / denom } else { 0.0 });
            likelihoods.push(hits);
        }

        let mut mass: f64 = updated.iter().sum();
        if !(mass >= MASS_FLOOR) {
            self.underflows += 1;
            if mass > 0.0 && mass.is_finite() {
                let scale = MASS_FLOOR / mass;
                updated.iter_mut().for_each(|w| *w *= scale);
            } else if !updated.is_empty() {
                let w = MASS_FLOOR / updated.len() as f64;
                updated.iter_mut().for_each(|x| *x = w);
            }
            mass = if updated.is_empty() { 0.0 } else { MASS_FLOOR };
        }

        let out = PhdOutput {
            particles,
            predicted_weights: predicted,
            updated_weights: updated,
            observations: scan.observations.clone(),
            likelihoods,
            obs_mass,
            mass,
        };

        if out.particles.is_empty() {
            self.particles.clear();
            self.weights.clear();
        } else {
            let n = ((cfg.particles_per_target as f64 * mass).round() as usize).max(cfg.min_particles);
            let idx = systematic_indices(&out.updated_weights, n, rng);
            self.particles = idx.iter().map(|&i| out.particles[i]).collect();
            self.weights = vec![mass / n as f64; n];
        }
        out
    }
}

/// One step of the filter; see [`SmcPhd::step`].
pub fn smc_phd_step(filter: &mut SmcPhd, scan: &ScanData, rng: &mut dyn RngCore) -> PhdOutput {
    filter.step(scan, rng)
}

/// Multi-estimate extraction method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extractor {
    /// k-means on the particle cloud with `k = round(mass)`.
    KMeans,
    /// Likelihood-weighted particle mean per identified observation.
    Meap,
    /// Noise-free inverse of each identified observation.
    O2,
}

impl Extractor {
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "kmeans" => Ok(Self::KMeans),
            "meap" => Ok(Self::Meap),
            "o2" => Ok(Self::O2),
            _ => Err(Error::UnknownName {
                kind: "extractor",
                name: name.to_string(),
            }),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::KMeans => "kmeans",
            Self::Meap => "meap",
            Self::O2 => "o2",
        }
    }
}

/// Turns one PHD update into a set of target estimates.
pub fn extract_estimates(
    out: &PhdOutput,
    method: Extractor,
    sensor: &SensorModel,
    identify_threshold: f64,
    rng: &mut dyn RngCore,
) -> Vec<CtState> {
    match method {
        Extractor::KMeans => weighted_kmeans(&out.particles, &out.updated_weights, out.cardinality(), 50, rng),
        Extractor::Meap => out
            .identified(identify_threshold)
            .into_iter()
            .filter_map(|i| {
                let mut acc = [0.0; 5];
                let mut total = 0.0;
                for &(j, g) in &out.likelihoods[i] {
                    let w = g * out.predicted_weights[j as usize];
                    total += w;
                    for (a, x) in acc.iter_mut().zip(&out.particles[j as usize]) {
                        *a += w * x;
                    }
                }
                (total > 0.0).then(|| acc.map(|a| a / total))
            })
            .collect(),
        Extractor::O2 => out
            .identified(identify_threshold)
            .into_iter()
            .map(|i| {
                let p = sensor.invert(out.observations[i]);
                [p[0], 0.0, p[1], 0.0, 0.0]
            })
            .collect(),
    }
}

/// Fills velocity of position-only estimates by differencing against the
/// nearest previous estimate within `gate`.
pub fn attach_velocity(previous: &[CtState], current: &mut [CtState], gate: f64, dt: f64) {
    for x in current.iter_mut() {
        let best = previous
            .iter()
            .map(|p| ((p[0] - x[0]).hypot(p[2] - x[2]), p))
            .filter(|(d, _)| *d <= gate)
            .min_by(|a, b| a.0.total_cmp(&b.0));
        if let Some((_, p)) = best {
            x[1] = (x[0] - p[0]) / dt;
            x[3] = (x[2] - p[2]) / dt;
        }
    }
}

/// Weighted k-means on particle positions with k-means++ seeding; returns
/// the weighted mean state of each non-empty cluster.
pub fn weighted_kmeans(
    particles: &[CtState],
    weights: &[f64],
    k: usize,
    max_iter: usize,
    rng: &mut dyn RngCore,
) -> Vec<CtState> {
    let live: Vec<usize> = (0..particles.len()).filter(|&i| weights[i] > 0.0).collect();
    let k = k.min(live.len());
    if k == 0 {
        return Vec::new();
    }
    let pos = |i: usize| position(&particles[i]);
    let d2 = |a: [f64; 2], b: [f64; 2]| (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2);

    let mut centers: Vec<[f64; 2]> = Vec::with_capacity(k);
    let mut nearest = vec![f64::INFINITY; live.len()];
    let pick = |scores: &[f64], rng: &mut dyn RngCore| {
        let total: f64 = scores.iter().sum();
        let mut u = rng.random::<f64>() * total;
        for (n, s) in scores.iter().enumerate() {
            if u < *s {
                return n;
            }
            u -= s;
        }
        scores.len() - 1
    };
    let first = pick(&live.iter().map(|&i| weights[i]).collect::<Vec<_>>(), rng);
    centers.push(pos(live[first]));
    while centers.len() < k {
        let c = *centers.last().expect("non-empty");
        for (n, &i) in live.iter().enumerate() {
            nearest[n] = nearest[n].min(d2(pos(i), c));
        }
        let scores: Vec<f64> = live.iter().zip(&nearest).map(|(&i, d)| weights[i] * d).collect();
        if scores.iter().sum::<f64>() <= 0.0 {
            break;
        }
        centers.push(pos(live[pick(&scores, rng)]));
    }

    let mut assign = vec![usize::MAX; live.len()];
    for _ in 0..max_iter {
        let mut changed = false;
        for (n, &i) in live.iter().enumerate() {
            let p = pos(i);
            let best = (0..centers.len())
                .min_by(|&a, &b| d2(p, centers[a]).total_cmp(&d2(p, centers[b])))
                .expect("k > 0");
            if assign[n] != best {
                assign[n] = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![([0.0; 2], 0.0); centers.len()];
        for (n, &i) in live.iter().enumerate() {
            let (s, w) = &mut sums[assign[n]];
            let p = pos(i);
            s[0] += weights[i] * p[0];
            s[1] += weights[i] * p[1];
            *w += weights[i];
        }
        for (c, (s, w)) in centers.iter_mut().zip(&sums) {
            if *w > 0.0 {
                *c = [s[0] / w, s[1] / w];
            }
        }
    }

    let mut acc = vec![([0.0; 5], 0.0); centers.len()];
    for (n, &i) in live.iter().enumerate() {
        let (s, w) = &mut acc[assign[n]];
        for (a, x) in s.iter_mut().zip(&particles[i]) {
            *a += weights[i] * x;
        }
        *w += weights[i];
    }
    acc.into_iter()
        .filter(|(_, w)| *w > 0.0)
        .map(|(s, w)| s.map(|a| a / w))
        .collect()
}
