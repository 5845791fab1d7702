use rand::{Rng, RngCore};

use super::ParticleSet;

/// `(Σw)² / Σw²`; equals N for uniform weights.
pub fn effective_sample_size(weights: &[f64]) -> f64 {
    let s: f64 = weights.iter().sum();
    let s2: f64 = weights.iter().map(|w| w * w).sum();
    if s2 > 0.0 {
        s * s / s2
    } else {
        0.0
    }
}

/// Systematic resampling: one uniform offset, `n` evenly spaced pointers.
pub fn systematic_indices(weights: &[f64], n: usize, rng: &mut dyn RngCore) -> Vec<usize> {
    let total: f64 = weights.iter().sum();
    let step = total / n as f64;
    let mut u = rng.random::<f64>() * step;
    let mut out = Vec::with_capacity(n);
    let mut cum = 0.0;
    let mut j = 0;
    for _ in 0..n {
        while j + 1 < weights.len() && cum + weights[j] <= u {
            cum += weights[j];
            j += 1;
        }
        out.push(j);
        u += step;
    }
    out
}

/// Independent draws from the categorical distribution of `weights`.
pub fn multinomial_indices(weights: &[f64], n: usize, rng: &mut dyn RngCore) -> Vec<usize> {
    let mut cdf = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for w in weights {
        acc += w;
        cdf.push(acc);
    }
    (0..n)
        .map(|_| {
            let u = rng.random::<f64>() * acc;
            cdf.partition_point(|c| *c <= u).min(weights.len() - 1)
        })
        .collect()
}

/// Systematic resample to an equally weighted set of the same size.
pub fn resample(ps: &ParticleSet, rng: &mut dyn RngCore) -> ParticleSet {
    let n = ps.len();
    let idx = systematic_indices(&ps.weights, n, rng);
    ParticleSet {
        particles: idx.iter().map(|&i| ps.particles[i].clone()).collect(),
        weights: vec![1.0 / n as f64; n],
    }
}
