use std::f64::consts::PI;

use rand::{Rng, RngCore};
use rand_distr::{Distribution, Poisson};

use crate::prob::normal;

/// A 2-D observation `(r, θ)` or `(z_x, z_y)`.
pub type Obs = [f64; 2];

/// Surveillance region, also the clutter support in observation space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    /// `p_y > 0`, `|p| ≤ radius`; clutter uniform in `[0, radius] × [−π/2, π/2]`.
    HalfDisc { radius: f64 },
    /// `[−h, h]²`; clutter uniform over the square.
    Square { half_width: f64 },
}

impl Region {
    pub fn contains(&self, p: [f64; 2]) -> bool {
        match *self {
            Region::HalfDisc { radius } => p[1] > 0.0 && p[0].hypot(p[1]) <= radius,
            Region::Square { half_width } => p[0].abs() <= half_width && p[1].abs() <= half_width,
        }
    }

    /// Volume of the clutter support in observation coordinates.
    pub fn volume(&self) -> f64 {
        match *self {
            Region::HalfDisc { radius } => radius * PI,
            Region::Square { half_width } => 4.0 * half_width * half_width,
        }
    }
}

/// Observation function of a sensor at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SensorKind {
    /// Range and bearing (bearing measured from the `y` axis towards `x`).
    RangeBearing { sigma_r: f64, sigma_theta: f64 },
    /// Direct position with independent per-axis noise.
    Position { var: f64 },
}

/// Detection, noise and clutter model of one sensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorModel {
    pub kind: SensorKind,
    pub region: Region,
    /// Peak detection probability.
    pub p_d: f64,
    /// Length scale of the Gaussian detection fall-off; `None` for constant.
    pub p_d_scale: Option<f64>,
    /// Mean clutter count per scan.
    pub clutter_rate: f64,
}

impl SensorModel {
    /// Range-bearing radar over the 2 km half disc.
    pub fn range_bearing(sigma_r: f64, sigma_theta: f64, clutter_rate: f64) -> Self {
        Self {
            kind: SensorKind::RangeBearing { sigma_r, sigma_theta },
            region: Region::HalfDisc { radius: 2000.0 },
            p_d: 0.95,
            p_d_scale: Some(6000.0),
            clutter_rate,
        }
    }

    /// Position camera over `[−100, 100]²`.
    pub fn camera(var: f64, clutter_rate: f64) -> Self {
        Self {
            kind: SensorKind::Position { var },
            region: Region::Square { half_width: 100.0 },
            p_d: 0.95,
            p_d_scale: None,
            clutter_rate,
        }
    }

    /// Same sensor with its noise covariance divided by `n`.
    pub fn fused_equivalent(&self, n: usize) -> Self {
        let f = n as f64;
        let kind = match self.kind {
            SensorKind::RangeBearing { sigma_r, sigma_theta } => SensorKind::RangeBearing {
                sigma_r: sigma_r / f.sqrt(),
                sigma_theta: sigma_theta / f.sqrt(),
            },
            SensorKind::Position { var } => SensorKind::Position { var: var / f },
        };
        Self { kind, ..*self }
    }

    pub fn detection_probability(&self, p: [f64; 2]) -> f64 {
        match self.p_d_scale {
            Some(s) => self.p_d * (-(p[0] * p[0] + p[1] * p[1]) / (2.0 * s * s)).exp(),
            None => self.p_d,
        }
    }

    /// Clutter intensity `κ` in observation space.
    pub fn clutter_density(&self) -> f64 {
        self.clutter_rate / self.region.volume()
    }

    pub fn observe_noiseless(&self, p: [f64; 2]) -> Obs {
        match self.kind {
            SensorKind::RangeBearing { .. } => observe_range_bearing(p),
            SensorKind::Position { .. } => p,
        }
    }

    pub fn observe(&self, p: [f64; 2], rng: &mut dyn RngCore) -> Obs {
        let z = self.observe_noiseless(p);
        match self.kind {
            SensorKind::RangeBearing { sigma_r, sigma_theta } => [
                z[0] + normal(rng, 0.0, sigma_r * sigma_r),
                z[1] + normal(rng, 0.0, sigma_theta * sigma_theta),
            ],
            SensorKind::Position { var } => [z[0] + normal(rng, 0.0, var), z[1] + normal(rng, 0.0, var)],
        }
    }

    /// Noise-free inverse of the observation function.
    pub fn invert(&self, z: Obs) -> [f64; 2] {
        match self.kind {
            SensorKind::RangeBearing { .. } => invert_range_bearing(z),
            SensorKind::Position { .. } => z,
        }
    }

    /// Observation likelihood `g(z | p)`; zero beyond six standard deviations.
    pub fn likelihood(&self, z: Obs, p: [f64; 2]) -> f64 {
        self.likelihood_from_predicted(z, self.observe_noiseless(p))
    }

    /// `g(z | p)` given the noiseless observation `ẑ = h(p)`.
    pub fn likelihood_from_predicted(&self, z: Obs, zhat: Obs) -> f64 {
        let (s0, s1) = self.noise_std();
        let d0 = (z[0] - zhat[0]) / s0;
        if d0.abs() > 6.0 {
            return 0.0;
        }
        let mut e1 = z[1] - zhat[1];
        if matches!(self.kind, SensorKind::RangeBearing { .. }) {
            e1 = wrap_angle(e1);
        }
        let d1 = e1 / s1;
        if d1.abs() > 6.0 {
            return 0.0;
        }
        (-0.5 * (d0 * d0 + d1 * d1)).exp() / (2.0 * PI * s0 * s1)
    }

    /// Per-axis observation noise standard deviations.
    pub fn noise_std(&self) -> (f64, f64) {
        match self.kind {
            SensorKind::RangeBearing { sigma_r, sigma_theta } => (sigma_r, sigma_theta),
            SensorKind::Position { var } => (var.sqrt(), var.sqrt()),
        }
    }

    /// Observation noise mapped into position space at `z` (first order).
    pub fn mapped_cov(&self, z: Obs) -> [[f64; 2]; 2] {
        match self.kind {
            SensorKind::RangeBearing { sigma_r, sigma_theta } => {
                let (s, c) = z[1].sin_cos();
                let r = z[0].max(0.0);
                // J = [[sinθ, r cosθ], [cosθ, −r sinθ]]
                let (vr, vt) = (sigma_r * sigma_r, sigma_theta * sigma_theta * r * r);
                [
                    [s * s * vr + c * c * vt, s * c * vr - s * c * vt],
                    [s * c * vr - s * c * vt, c * c * vr + s * s * vt],
                ]
            }
            SensorKind::Position { var } => [[var, 0.0], [0.0, var]],
        }
    }

    /// Uniform clutter with a Poisson count.
    pub fn sample_clutter(&self, rng: &mut dyn RngCore) -> Vec<Obs> {
        let n = poisson(self.clutter_rate, rng);
        (0..n)
            .map(|_| match self.region {
                Region::HalfDisc { radius } => [rng.random::<f64>() * radius, (rng.random::<f64>() - 0.5) * PI],
                Region::Square { half_width } => [
                    (2.0 * rng.random::<f64>() - 1.0) * half_width,
                    (2.0 * rng.random::<f64>() - 1.0) * half_width,
                ],
            })
            .collect()
    }
}

pub(crate) fn poisson(mean: f64, rng: &mut dyn RngCore) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive rate").sample(rng) as usize
}

fn wrap_angle(a: f64) -> f64 {
    (a + PI).rem_euclid(2.0 * PI) - PI
}

/// Noise-free range and bearing of a planar point seen from the origin.
pub fn observe_range_bearing(p: [f64; 2]) -> Obs {
    [p[0].hypot(p[1]), p[0].atan2(p[1])]
}

/// `(r sin θ, r cos θ)`.
pub fn invert_range_bearing(z: Obs) -> [f64; 2] {
    let (s, c) = z[1].sin_cos();
    [z[0] * s, z[0] * c]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::RngStream;
    use proptest::prelude::*;

    #[test]
    fn range_bearing_examples() {
        let z = observe_range_bearing([0.0, 1000.0]);
        assert_eq!(z, [1000.0, 0.0]);
        let z = observe_range_bearing([1000.0, 1000.0]);
        assert!((z[0] - 1000.0 * 2f64.sqrt()).abs() < 1e-9 && (z[1] - PI / 4.0).abs() < 1e-15);
        let p = invert_range_bearing([1000.0, 0.0]);
        assert_eq!(p, [0.0, 1000.0]);
        let p = invert_range_bearing([100.0, PI / 6.0]);
        assert!((p[0] - 50.0).abs() < 1e-12 && (p[1] - 50.0 * 3f64.sqrt()).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn range_bearing_round_trip(r in 1.0..2000.0f64, th in -1.5..1.5f64) {
            let p = [r * th.sin(), r * th.cos()];
            let back = invert_range_bearing(observe_range_bearing(p));
            prop_assert!((back[0] - p[0]).abs() < 1e-9 && (back[1] - p[1]).abs() < 1e-9);
        }
    }

    #[test]
    fn clutter_count_is_poisson_mean() {
        let s = SensorModel::range_bearing(5.0, PI / 180.0, 10.0);
        let mut rng = RngStream::new(4, 0);
        let total: usize = (0..100).map(|_| s.sample_clutter(&mut rng).len()).sum();
        assert!((total as f64 / 100.0 - 10.0).abs() < 1.0);
        for z in s.sample_clutter(&mut rng) {
            assert!((0.0..=2000.0).contains(&z[0]) && z[1].abs() <= PI / 2.0);
        }
        assert!((s.clutter_density() - 10.0 / 2000.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn detection_falls_off() {
        let s = SensorModel::range_bearing(5.0, 0.01, 0.0);
        assert!((s.detection_probability([0.0, 0.0]) - 0.95).abs() < 1e-15);
        let far = s.detection_probability([0.0, 6000.0]);
        assert!((far - 0.95 * (-0.5f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn likelihood_integrates_to_one() {
        let s = SensorModel::camera(25.0, 0.0);
        let h = 0.25;
        let mut total = 0.0;
        let mut x = -40.0;
        while x < 40.0 {
            let mut y = -40.0;
            while y < 40.0 {
                total += s.likelihood([x, y], [0.0, 0.0]) * h * h;
                y += h;
            }
            x += h;
        }
        assert!((total - 1.0).abs() < 1e-3);
    }

    #[test]
    fn mapped_cov_matches_jacobian() {
        let s = SensorModel::range_bearing(20.0, PI / 90.0, 0.0);
        let z = [1200.0, 0.4];
        let c = s.mapped_cov(z);
        let (sin, cos) = z[1].sin_cos();
        let j = [[sin, z[0] * cos], [cos, -z[0] * sin]];
        let r = [400.0, (PI / 90.0).powi(2)];
        for a in 0..2 {
            for b in 0..2 {
                let expect = j[a][0] * r[0] * j[b][0] + j[a][1] * r[1] * j[b][1];
                assert!((c[a][b] - expect).abs() < 1e-9);
            }
        }
    }
}
