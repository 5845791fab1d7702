//! Probability of fusion benefit: how often the fused estimate `z` lands
//! closer to the truth than a reference draw.
//!
//! Cases are parametrised relative to `p(x) = N(0, 1)`: the prediction is
//! `p(y) = N(p, r)` and the truth sits at `m_T = m`.

use std::io::Write;

use rand::{Rng, RngCore};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::filters::resample;
use crate::filters::ParticleSet;
use crate::prob::{fuse_scalar, normal, normal_ln_pdf, GaussianBelief, RngStream, Vector};

/// How `p(x)` and `p(y)` are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FusionRule {
    /// Closed-form Gaussian fusion.
    Kf,
    /// Particles drawn from `p(y)` and reweighted by the density of `p(x)`.
    Particle { particles: usize, resample: bool },
}

impl FusionRule {
    pub fn particle(particles: usize) -> Self {
        Self::Particle {
            particles,
            resample: false,
        }
    }
}

/// Which estimate the fused one is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PofbTarget {
    /// The observation-only estimate `x`.
    X,
    /// The prediction `y`.
    Y,
    /// The better of `x` and `y`.
    Min,
}

impl PofbTarget {
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "x" => Ok(Self::X),
            "y" => Ok(Self::Y),
            "min" => Ok(Self::Min),
            other => Err(Error::UnknownName {
                kind: "pofb target",
                name: other.to_string(),
            }),
        }
    }
}

/// Two Gaussian beliefs about one scalar and the truth they estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusionCase {
    pub m_x: f64,
    pub var_x: f64,
    pub m_y: f64,
    pub var_y: f64,
    pub m_t: f64,
    pub rule: FusionRule,
}

impl FusionCase {
    pub fn new(m_x: f64, var_x: f64, m_y: f64, var_y: f64, m_t: f64, rule: FusionRule) -> Result<Self> {
        if !(var_x > 0.0 && var_y > 0.0) {
            return Err(Error::InvalidInput(format!(
                "variances must be positive (got {var_x}, {var_y})"
            )));
        }
        Ok(Self {
            m_x,
            var_x,
            m_y,
            var_y,
            m_t,
            rule,
        })
    }

    /// Variance ratio `r = δy²/δx²`, bias ratio `p = (m_y − m_x)/δx` and
    /// truth offset `m = (m_T − m_x)/δx`, with `p(x) = N(0, 1)`.
    pub fn from_ratios(r: f64, p: f64, m: f64, rule: FusionRule) -> Result<Self> {
        Self::new(0.0, 1.0, p, r, m, rule)
    }

    pub fn fused_kf(&self) -> (f64, f64) {
        fuse_scalar(self.m_x, self.var_x, self.m_y, self.var_y).expect("positive variances")
    }
}

/// Monte-Carlo probability with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PofbEstimate {
    pub pofb: f64,
    pub stderr: f64,
    /// The particle weights underflowed and were reset to uniform.
    pub degenerate: bool,
}

/// Outcome of a one-shot particle fusion.
#[derive(Debug, Clone)]
pub struct ParticleFusion {
    pub posterior: ParticleSet,
    pub underflow: bool,
}

/// Equally weighted particles from `prior`, reweighted by the density of
/// `likelihood` and normalised; optionally resampled.
pub fn particle_fusion(
    prior: &GaussianBelief,
    likelihood: &GaussianBelief,
    n: usize,
    resample_after: bool,
    rng: &mut dyn RngCore,
) -> Result<ParticleFusion> {
    if n < 100 {
        return Err(Error::InvalidInput(format!("particle fusion needs N >= 100, got {n}")));
    }
    if prior.dim() != 1 || likelihood.dim() != 1 {
        return Err(Error::InvalidInput("particle fusion is one-dimensional".into()));
    }
    let (m_y, v_y) = (prior.mean1(), prior.var1());
    let (m_x, v_x) = (likelihood.mean1(), likelihood.var1());
    let xs: Vec<f64> = (0..n).map(|_| normal(rng, m_y, v_y)).collect();
    let logw: Vec<f64> = xs.iter().map(|x| normal_ln_pdf(*x, m_x, v_x)).collect();
    let max = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let underflow = !(max.is_finite() && max > f64::MIN_POSITIVE.ln());
    let weights: Vec<f64> = if underflow {
        vec![1.0 / n as f64; n]
    } else {
        let w: Vec<f64> = logw.iter().map(|l| (l - max).exp()).collect();
        let s: f64 = w.iter().sum();
        w.into_iter().map(|v| v / s).collect()
    };
    let mut posterior = ParticleSet::new(xs.into_iter().map(|x| Vector::from_element(1, x)).collect(), weights)?;
    if resample_after {
        posterior = resample(&posterior, rng);
    }
    Ok(ParticleFusion { posterior, underflow })
}

/// Draws `z` from the fused distribution.
enum FusedSampler {
    Gaussian { mean: f64, var: f64 },
    Weighted { values: Vec<f64>, cdf: Vec<f64> },
}

impl FusedSampler {
    fn build(case: &FusionCase, rng: &mut dyn RngCore) -> Result<(Self, bool)> {
        match case.rule {
            FusionRule::Kf => {
                let (mean, var) = case.fused_kf();
                Ok((Self::Gaussian { mean, var }, false))
            }
            FusionRule::Particle { particles, resample } => {
                let prior = GaussianBelief::scalar(case.m_y, case.var_y)?;
                let lik = GaussianBelief::scalar(case.m_x, case.var_x)?;
                let fused = particle_fusion(&prior, &lik, particles, resample, rng)?;
                let values = fused.posterior.particles.iter().map(|p| p[0]).collect();
                let mut acc = 0.0;
                let cdf = fused
                    .posterior
                    .weights
                    .iter()
                    .map(|w| {
                        acc += w;
                        acc
                    })
                    .collect();
                Ok((Self::Weighted { values, cdf }, fused.underflow))
            }
        }
    }

    fn draw(&self, rng: &mut dyn RngCore) -> f64 {
        match self {
            Self::Gaussian { mean, var } => normal(rng, *mean, *var),
            Self::Weighted { values, cdf } => {
                let u = rng.random::<f64>() * cdf[cdf.len() - 1];
                values[cdf.partition_point(|c| *c <= u).min(values.len() - 1)]
            }
        }
    }
}

/// Estimates the PoFB of `case` against `target` from `samples` independent
/// draws of each variable.
pub fn pofb(case: &FusionCase, target: PofbTarget, samples: usize, rng: &mut dyn RngCore) -> Result<PofbEstimate> {
    if samples < 1000 {
        return Err(Error::InvalidInput(format!(
            "need at least 1000 samples, got {samples}"
        )));
    }
    let (sampler, degenerate) = FusedSampler::build(case, rng)?;
    let mt = case.m_t;
    let mut wins = 0usize;
    for _ in 0..samples {
        let z = sampler.draw(rng);
        let dz = (mt - z).abs();
        let reference = match target {
            PofbTarget::X => (mt - normal(rng, case.m_x, case.var_x)).abs(),
            PofbTarget::Y => (mt - normal(rng, case.m_y, case.var_y)).abs(),
            PofbTarget::Min => {
                let dx = (mt - normal(rng, case.m_x, case.var_x)).abs();
                let dy = (mt - normal(rng, case.m_y, case.var_y)).abs();
                dx.min(dy)
            }
        };
        if reference > dz {
            wins += 1;
        }
    }
    let p = wins as f64 / samples as f64;
    Ok(PofbEstimate {
        pofb: p,
        stderr: (p * (1.0 - p) / samples as f64).sqrt(),
        degenerate,
    })
}

/// `P(|m_T − x| > |m_T − z|)`.
pub fn pofb_vs_x(case: &FusionCase, samples: usize, rng: &mut dyn RngCore) -> Result<PofbEstimate> {
    pofb(case, PofbTarget::X, samples, rng)
}

/// `P(|m_T − y| > |m_T − z|)`.
pub fn pofb_vs_y(case: &FusionCase, samples: usize, rng: &mut dyn RngCore) -> Result<PofbEstimate> {
    pofb(case, PofbTarget::Y, samples, rng)
}

/// `P(min(|m_T − x|, |m_T − y|) > |m_T − z|)`.
pub fn pofb_vs_min(case: &FusionCase, samples: usize, rng: &mut dyn RngCore) -> Result<PofbEstimate> {
    pofb(case, PofbTarget::Min, samples, rng)
}

/// Truth offsets swept for the two-biased case.
pub const M_VALUES: [f64; 11] = [-10.0, -5.0, -2.0, -1.0, -0.1, 0.1, 1.0, 2.0, 5.0, 10.0, 30.0];

/// Cells of a PoFB sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub r: Vec<f64>,
    pub p: Vec<f64>,
    pub m: Vec<f64>,
    pub samples: usize,
}

impl Default for SweepGrid {
    /// 21 log-spaced ratios over `[0.01, 1000]`, biases over `[0, 10]`,
    /// unbiased truth (`m = 0`).
    fn default() -> Self {
        Self {
            r: log_grid(0.01, 1000.0, 21),
            p: vec![0.0, 0.2, 0.4, 0.6, 1.0, 2.0, 3.0, 5.0, 10.0],
            m: vec![0.0],
            samples: 100_000,
        }
    }
}

impl SweepGrid {
    /// Default grid repeated for every truth offset in [`M_VALUES`].
    pub fn biased_truth() -> Self {
        Self {
            m: M_VALUES.to_vec(),
            ..Self::default()
        }
    }

    pub fn len(&self) -> usize {
        self.r.len() * self.p.len() * self.m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// `n` points evenly spaced in `log10` between `lo` and `hi`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..n)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64))
        .collect()
}

/// One evaluated sweep cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepCell {
    pub r: f64,
    pub p: f64,
    pub m: f64,
    pub pofb: f64,
    pub stderr: f64,
}

/// Evaluates every `(r, p, m)` cell in parallel; cell `k` uses stream `k`
/// of `seed`, so results do not depend on the thread count.
pub fn pofb_sweep(grid: &SweepGrid, target: PofbTarget, rule: FusionRule, seed: u64) -> Result<Vec<SweepCell>> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("sweep grid is empty".into()));
    }
    let mut cells = Vec::with_capacity(grid.len());
    for &m in &grid.m {
        for &p in &grid.p {
            for &r in &grid.r {
                cells.push((r, p, m));
            }
        }
    }
    cells
        .into_par_iter()
        .enumerate()
        .map(|(k, (r, p, m))| {
            let mut rng = RngStream::new(seed, k as u64);
            let case = FusionCase::from_ratios(r, p, m, rule)?;
            let est = pofb(&case, target, grid.samples, &mut rng)?;
            Ok(SweepCell {
                r,
                p,
                m,
                pofb: est.pofb,
                stderr: est.stderr,
            })
        })
        .collect()
}

/// Writes `r,p,m,pofb,stderr` rows.
pub fn write_sweep_csv<W: Write>(cells: &[SweepCell], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for c in cells {
        w.serialize(c)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rng() -> RngStream {
        RngStream::new(17, 0)
    }

    /// Closed form for two zero-mean Gaussians: `P(|a| > |b|) = (2/π)·atan(σa/σb)`.
    fn abs_compare(sa: f64, sb: f64) -> f64 {
        2.0 / std::f64::consts::PI * (sa / sb).atan()
    }

    #[test]
    fn case_one_matches_closed_form() {
        let case = FusionCase::new(0.0, 400.0, 0.0, 100.0, 0.0, FusionRule::Kf).unwrap();
        let est = pofb_vs_x(&case, 100_000, &mut rng()).unwrap();
        let oracle = abs_compare(20.0, 80f64.sqrt());
        assert!((oracle - 0.7323).abs() < 1e-4);
        assert!((est.pofb - oracle).abs() < 4.0 * est.stderr);
    }

    #[test]
    fn tiny_ratio_large_bias_rarely_helps() {
        let case = FusionCase::from_ratios(0.01, 5.0, 0.0, FusionRule::Kf).unwrap();
        assert!(pofb_vs_x(&case, 100_000, &mut rng()).unwrap().pofb < 0.05);
    }

    #[test]
    fn large_ratio_tends_to_half_for_x_and_min() {
        for target in [PofbTarget::X, PofbTarget::Min] {
            for p in [0.0, 3.0] {
                let case = FusionCase::from_ratios(1000.0, p, 0.0, FusionRule::Kf).unwrap();
                let est = pofb(&case, target, 100_000, &mut rng()).unwrap();
                assert!((est.pofb - 0.5).abs() < 0.012, "{target:?} p={p}: {}", est.pofb);
            }
        }
    }

    #[test]
    fn symmetric_roles_agree() {
        let case = FusionCase::from_ratios(1.0, 0.0, 0.0, FusionRule::Kf).unwrap();
        let a = pofb_vs_x(&case, 100_000, &mut RngStream::new(1, 0)).unwrap();
        let b = pofb_vs_y(&case, 100_000, &mut RngStream::new(2, 0)).unwrap();
        assert!((a.pofb - b.pofb).abs() < 4.0 * (a.stderr + b.stderr));
    }

    #[test]
    fn biased_prediction_always_improved() {
        for r in log_grid(0.01, 1000.0, 6) {
            let case = FusionCase::from_ratios(r, 10.0, 0.0, FusionRule::Kf).unwrap();
            assert!(pofb_vs_y(&case, 20_000, &mut rng()).unwrap().pofb > 0.5);
        }
    }

    #[test]
    fn truth_outside_means_is_below_half() {
        for r in log_grid(0.01, 1000.0, 6) {
            for p in [0.0, 1.0, 5.0, 10.0] {
                let case = FusionCase::from_ratios(r, p, -10.0, FusionRule::Kf).unwrap();
                assert!(pofb_vs_min(&case, 20_000, &mut rng()).unwrap().pofb < 0.5);
            }
        }
    }

    #[test]
    fn particle_fusion_matches_kf_mean() {
        let prior = GaussianBelief::scalar(50.0, 100.0).unwrap();
        let lik = GaussianBelief::scalar(0.0, 400.0).unwrap();
        let n = 100_000;
        let fused = particle_fusion(&prior, &lik, n, false, &mut rng()).unwrap();
        let mean = fused.posterior.mean()[0];
        let (m_z, v_z) = fuse_scalar(0.0, 400.0, 50.0, 100.0).unwrap();
        assert!((m_z - 40.0).abs() < 1e-12);
        // importance-sampling error, inflated by the ESS loss
        let ess = fused.posterior.ess();
        assert!((mean - m_z).abs() < 3.0 * (v_z / ess).sqrt(), "{mean} vs {m_z}");
    }

    #[test]
    fn flat_likelihood_keeps_prior_mean() {
        let prior = GaussianBelief::scalar(3.0, 1.0).unwrap();
        let lik = GaussianBelief::scalar(0.0, 1e12).unwrap();
        let fused = particle_fusion(&prior, &lik, 10_000, false, &mut rng()).unwrap();
        let sample_mean = fused.posterior.particles.iter().map(|p| p[0]).sum::<f64>() / 10_000.0;
        assert!((fused.posterior.mean()[0] - sample_mean).abs() < 1e-6);
        assert!(!fused.underflow);
    }

    #[test]
    fn single_cell_sweep() {
        let grid = SweepGrid {
            r: vec![1.0],
            p: vec![0.0],
            m: vec![0.0],
            samples: 20_000,
        };
        let cells = pofb_sweep(&grid, PofbTarget::X, FusionRule::Kf, 3).unwrap();
        assert_eq!(cells.len(), 1);
        assert!(cells[0].pofb > 0.5);
        let mut buf = Vec::new();
        write_sweep_csv(&cells, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("r,p,m,pofb,stderr\n"));
    }

    #[test]
    fn bias_hurts_at_unit_ratio() {
        let grid = SweepGrid {
            r: vec![1.0],
            p: vec![0.0, 10.0],
            m: vec![0.0],
            samples: 20_000,
        };
        let cells = pofb_sweep(&grid, PofbTarget::X, FusionRule::Kf, 3).unwrap();
        assert!(cells[0].pofb > cells[1].pofb);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn probabilities_are_probabilities(r in 0.01..1000.0f64, p in -10.0..10.0f64, m in -10.0..30.0f64) {
            for target in [PofbTarget::X, PofbTarget::Y, PofbTarget::Min] {
                let case = FusionCase::from_ratios(r, p, m, FusionRule::Kf).unwrap();
                let e = pofb(&case, target, 2000, &mut rng()).unwrap();
                prop_assert!((0.0..=1.0).contains(&e.pofb));
            }
        }

        #[test]
        fn unbiased_fusion_never_hurts(r in 0.01..1000.0f64) {
            let case = FusionCase::from_ratios(r, 0.0, 0.0, FusionRule::Kf).unwrap();
            let e = pofb_vs_x(&case, 20_000, &mut rng()).unwrap();
            prop_assert!(e.pofb >= 0.5 - 4.0 * e.stderr);
        }

        #[test]
        fn sign_of_bias_is_irrelevant(r in 0.01..100.0f64, p in 0.0..10.0f64) {
            let a = pofb_vs_x(&FusionCase::from_ratios(r, p, 0.0, FusionRule::Kf).unwrap(), 20_000, &mut RngStream::new(1, 0)).unwrap();
            let b = pofb_vs_x(&FusionCase::from_ratios(r, -p, 0.0, FusionRule::Kf).unwrap(), 20_000, &mut RngStream::new(2, 0)).unwrap();
            prop_assert!((a.pofb - b.pofb).abs() <= 4.0 * (a.stderr + b.stderr) + 1e-9);
        }
    }
}
