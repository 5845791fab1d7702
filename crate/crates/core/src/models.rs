//! Benchmark state-space models with additive noise:
//! `x_t = f(x_{t-1}, t) + u_t`, `y_t = h(x_t, t) + v_t`.
//!
//! Time indices are 1-based; `f(x, t)` produces the state at time `t`.

use std::f64::consts::PI;

use rand::Rng;

use crate::error::{Error, Result};
use crate::prob::{normal, normal_ln_pdf, GammaSpec, Matrix, Vector};

/// Process noise of a scalar model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProcessNoise {
    Gaussian { var: f64 },
    Gamma(GammaSpec),
}

impl ProcessNoise {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            ProcessNoise::Gaussian { var } => normal(rng, 0.0, *var),
            ProcessNoise::Gamma(g) => g.sample(rng),
        }
    }

    pub fn ln_pdf(&self, u: f64) -> f64 {
        match self {
            ProcessNoise::Gaussian { var } => normal_ln_pdf(u, 0.0, *var),
            ProcessNoise::Gamma(g) => g.ln_pdf(u),
        }
    }
}

/// A state-space model with additive noise, as seen by every estimator.
pub trait StateSpaceModel: Send + Sync {
    fn name(&self) -> &str;
    fn state_dim(&self) -> usize;
    fn obs_dim(&self) -> usize;

    /// Noise-free transition to time `t`.
    fn transition(&self, x: &Vector, t: usize) -> Vector;
    fn transition_jacobian(&self, x: &Vector, t: usize) -> Matrix;

    /// Noise-free observation at time `t`.
    fn observe(&self, x: &Vector, t: usize) -> Vector;
    fn observation_jacobian(&self, x: &Vector, t: usize) -> Matrix;

    fn sample_process_noise(&self, rng: &mut dyn rand::RngCore) -> Vector;
    fn process_noise_ln_pdf(&self, u: &Vector) -> f64;
    fn sample_observation_noise(&self, rng: &mut dyn rand::RngCore) -> Vector;
    fn observation_noise_cov(&self) -> Matrix;

    /// True mean of `u_t`.
    fn process_noise_mean(&self) -> Vector {
        Vector::zeros(self.state_dim())
    }

    /// Gaussian `(mean, cov)` the Kalman-type filters assume for `u_t`.
    fn assumed_process_noise(&self) -> (Vector, Matrix);

    /// All states whose noise-free observation at `t` equals `y`.
    fn invert(&self, y: &Vector, t: usize) -> Vec<Vector>;

    fn sample_transition(&self, x: &Vector, t: usize, rng: &mut dyn rand::RngCore) -> Vector {
        self.transition(x, t) + self.sample_process_noise(rng)
    }

    fn transition_ln_pdf(&self, next: &Vector, prev: &Vector, t: usize) -> f64 {
        self.process_noise_ln_pdf(&(next - self.transition(prev, t)))
    }

    fn sample_observation(&self, x: &Vector, t: usize, rng: &mut dyn rand::RngCore) -> Vector {
        self.observe(x, t) + self.sample_observation_noise(rng)
    }

    /// Gaussian log-likelihood `ln p(y | x)`.
    fn observation_ln_likelihood(&self, y: &Vector, x: &Vector, t: usize) -> f64 {
        let r = self.observation_noise_cov();
        let d = y - self.observe(x, t);
        if r.nrows() == 1 {
            return normal_ln_pdf(d[0], 0.0, r[(0, 0)]);
        }
        let inv = crate::prob::linalg::spd_inverse(&r).expect("observation noise must be PD");
        let det = r.determinant();
        -0.5 * (d.transpose() * inv * &d)[0] - 0.5 * det.ln() - 0.5 * d.len() as f64 * (2.0 * PI).ln()
    }
}

fn v1(x: f64) -> Vector {
    Vector::from_element(1, x)
}

fn m1(x: f64) -> Matrix {
    Matrix::from_element(1, 1, x)
}

/// Square-root inverse with a clamped radicand: negative noise-driven
/// observations map to the single candidate `0`.
fn sqrt_candidates(radicand: f64) -> Vec<Vector> {
    if radicand <= 0.0 {
        vec![v1(0.0)]
    } else {
        let r = radicand.sqrt();
        vec![v1(r), v1(-r)]
    }
}

/// Shared transition `1 + sin(ωπt) + φ₁x`.
fn seasonal_transition(omega: f64, phi1: f64, x: f64, t: usize) -> f64 {
    1.0 + (omega * PI * t as f64).sin() + phi1 * x
}

/// Parameters of the Gamma-noise model with a switching observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelAParams {
    pub omega: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub phi3: f64,
    pub process_noise: GammaSpec,
    pub obs_var: f64,
    pub switch_time: usize,
}

impl Default for ModelAParams {
    fn default() -> Self {
        Self {
            omega: 0.04,
            phi1: 0.5,
            phi2: 0.2,
            phi3: 0.5,
            process_noise: GammaSpec::new(3.0, 2.0).expect("valid"),
            obs_var: 1e-5,
            switch_time: 30,
        }
    }
}

/// `x_t = 1 + sin(ωπt) + φ₁x_{t-1} + u_t`, `u ~ Ga(3, 2)`;
/// `y_t = φ₂x_t² + v_t` for `t ≤ 30`, else `φ₃x_t − 2 + v_t`.
#[derive(Debug, Clone)]
pub struct ModelA {
    pub params: ModelAParams,
}

impl ModelA {
    pub fn new(params: ModelAParams) -> Result<Self> {
        if params.phi2 == 0.0 || params.phi3 == 0.0 {
            return Err(Error::InvalidInput("phi2 and phi3 must be non-zero".into()));
        }
        if !(params.obs_var >= 0.0) {
            return Err(Error::InvalidInput("observation variance must be >= 0".into()));
        }
        Ok(Self { params })
    }

    pub fn quadratic_phase(&self, t: usize) -> bool {
        t <= self.params.switch_time
    }
}

impl Default for ModelA {
    fn default() -> Self {
        Self::new(ModelAParams::default()).expect("defaults are valid")
    }
}

impl StateSpaceModel for ModelA {
    fn name(&self) -> &str {
        "A"
    }
    fn state_dim(&self) -> usize {
        1
    }
    fn obs_dim(&self) -> usize {
        1
    }

    fn transition(&self, x: &Vector, t: usize) -> Vector {
        v1(seasonal_transition(self.params.omega, self.params.phi1, x[0], t))
    }

    fn transition_jacobian(&self, _x: &Vector, _t: usize) -> Matrix {
        m1(self.params.phi1)
    }

    fn observe(&self, x: &Vector, t: usize) -> Vector {
        let p = &self.params;
        if self.quadratic_phase(t) {
            v1(p.phi2 * x[0] * x[0])
        } else {
            v1(p.phi3 * x[0] - 2.0)
        }
    }

    fn observation_jacobian(&self, x: &Vector, t: usize) -> Matrix {
        if self.quadratic_phase(t) {
            m1(2.0 * self.params.phi2 * x[0])
        } else {
            m1(self.params.phi3)
        }
    }

    fn sample_process_noise(&self, rng: &mut dyn rand::RngCore) -> Vector {
        v1(self.params.process_noise.sample(rng))
    }

    fn process_noise_ln_pdf(&self, u: &Vector) -> f64 {
        self.params.process_noise.ln_pdf(u[0])
    }

    fn process_noise_mean(&self) -> Vector {
        v1(self.params.process_noise.mean())
    }

    fn sample_observation_noise(&self, rng: &mut dyn rand::RngCore) -> Vector {
        v1(normal(rng, 0.0, self.params.obs_var))
    }

    fn observation_noise_cov(&self) -> Matrix {
        m1(self.params.obs_var)
    }

    fn assumed_process_noise(&self) -> (Vector, Matrix) {
        // zero-mean substitute with the Gamma variance
        (v1(0.0), m1(self.params.process_noise.variance()))
    }

    fn invert(&self, y: &Vector, t: usize) -> Vec<Vector> {
        let p = &self.params;
        if self.quadratic_phase(t) {
            sqrt_candidates(y[0] / p.phi2)
        } else {
            vec![v1((y[0] + 2.0) / p.phi3)]
        }
    }
}

/// Linear-Gaussian variant of [`ModelA`]: `u ~ N(0, 0.75)`, `y = 0.5x − 2 + v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelB {
    pub omega: f64,
    pub phi1: f64,
    pub gain: f64,
    pub process_var: f64,
    pub obs_var: f64,
}

impl Default for ModelB {
    fn default() -> Self {
        Self {
            omega: 0.04,
            phi1: 0.5,
            gain: 0.5,
            process_var: 0.75,
            obs_var: 1.0,
        }
    }
}

impl ModelB {
    pub fn with_obs_var(obs_var: f64) -> Self {
        Self {
            obs_var,
            ..Self::default()
        }
    }
}

impl StateSpaceModel for ModelB {
    fn name(&self) -> &str {
        "B"
    }
    fn state_dim(&self) -> usize {
        1
    }
    fn obs_dim(&self) -> usize {
        1
    }
    fn transition(&self, x: &Vector, t: usize) -> Vector {
        v1(seasonal_transition(self.omega, self.phi1, x[0], t))
    }
    fn transition_jacobian(&self, _x: &Vector, _t: usize) -> Matrix {
        m1(self.phi1)
    }
    fn observe(&self, x: &Vector, _t: usize) -> Vector {
        v1(self.gain * x[0] - 2.0)
    }
    fn observation_jacobian(&self, _x: &Vector, _t: usize) -> Matrix {
        m1(self.gain)
    }
    fn sample_process_noise(&self, rng: &mut dyn rand::RngCore) -> Vector {
        v1(normal(rng, 0.0, self.process_var))
    }
    fn process_noise_ln_pdf(&self, u: &Vector) -> f64 {
        normal_ln_pdf(u[0], 0.0, self.process_var)
    }
    fn sample_observation_noise(&self, rng: &mut dyn rand::RngCore) -> Vector {
        v1(normal(rng, 0.0, self.obs_var))
    }
    fn observation_noise_cov(&self) -> Matrix {
        m1(self.obs_var)
    }
    fn assumed_process_noise(&self) -> (Vector, Matrix) {
        (v1(0.0), m1(self.process_var))
    }
    fn invert(&self, y: &Vector, _t: usize) -> Vec<Vector> {
        vec![v1((y[0] + 2.0) / self.gain)]
    }
}

/// Affine-Gaussian system at one time step:
/// `x' = F x + b + u`, `u ~ N(0, Q)`; `y = H x + c + v`, `v ~ N(0, R)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    pub f: Matrix,
    pub b: Vector,
    pub q: Matrix,
    pub h: Matrix,
    pub c: Vector,
    pub r: Matrix,
}

impl ModelB {
    /// Exact linear description of the model at time `t`.
    pub fn linear_system(&self, t: usize) -> LinearSystem {
        LinearSystem {
            f: m1(self.phi1),
            b: v1(1.0 + (self.omega * PI * t as f64).sin()),
            q: m1(self.process_var),
            h: m1(self.gain),
            c: v1(-2.0),
            r: m1(self.obs_var),
        }
    }
}

/// Univariate nonlinear growth model:
/// `x_t = x/2 + 25x/(1+x²) + 8cos(1.2(t−1)) + u`, `y_t = x²/20 + v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ungm {
    pub process_var: f64,
    pub obs_var: f64,
}

impl Default for Ungm {
    fn default() -> Self {
        Self {
            process_var: 10.0,
            obs_var: 1.0,
        }
    }
}

impl Ungm {
    pub fn with_obs_var(obs_var: f64) -> Self {
        Self {
            obs_var,
            ..Self::default()
        }
    }
}

impl StateSpaceModel for Ungm {
    fn name(&self) -> &str {
        "ungm"
    }
    fn state_dim(&self) -> usize {
        1
    }
    fn obs_dim(&self) -> usize {
        1
    }
    fn transition(&self, x: &Vector, t: usize) -> Vector {
        let x = x[0];
        v1(x / 2.0 + 25.0 * x / (1.0 + x * x) + 8.0 * (1.2 * (t as f64 - 1.0)).cos())
    }
    fn transition_jacobian(&self, x: &Vector, _t: usize) -> Matrix {
        let x2 = x[0] * x[0];
        m1(0.5 + 25.0 * (1.0 - x2) / ((1.0 + x2) * (1.0 + x2)))
    }
    fn observe(&self, x: &Vector, _t: usize) -> Vector {
        v1(x[0] * x[0] / 20.0)
    }
    fn observation_jacobian(&self, x: &Vector, _t: usize) -> Matrix {
        m1(x[0] / 10.0)
    }
    fn sample_process_noise(&self, rng: &mut dyn rand::RngCore) -> Vector {
        v1(normal(rng, 0.0, self.process_var))
    }
    fn process_noise_ln_pdf(&self, u: &Vector) -> f64 {
        normal_ln_pdf(u[0], 0.0, self.process_var)
    }
    fn sample_observation_noise(&self, rng: &mut dyn rand::RngCore) -> Vector {
        v1(normal(rng, 0.0, self.obs_var))
    }
    fn observation_noise_cov(&self) -> Matrix {
        m1(self.obs_var)
    }
    fn assumed_process_noise(&self) -> (Vector, Matrix) {
        (v1(0.0), m1(self.process_var))
    }
    fn invert(&self, y: &Vector, _t: usize) -> Vec<Vector> {
        sqrt_candidates(20.0 * y[0])
    }
}

/// Direct planar position observation `z = p + v` with isotropic noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GhostObsParams {
    pub noise_var: f64,
    pub half_width: f64,
}

impl Default for GhostObsParams {
    fn default() -> Self {
        Self {
            noise_var: 25.0,
            half_width: 100.0,
        }
    }
}

impl GhostObsParams {
    /// Identity inverse: the observation is its own position estimate.
    pub fn invert(&self, z: [f64; 2]) -> Vec<[f64; 2]> {
        vec![z]
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        p[0].abs() <= self.half_width && p[1].abs() <= self.half_width
    }
}

/// Truth and observation series from one simulated run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub states: Vec<Vector>,
    pub observations: Vec<Vector>,
}

impl Trajectory {
    /// First component of every state.
    pub fn states1(&self) -> Vec<f64> {
        self.states.iter().map(|x| x[0]).collect()
    }
}

/// Simulates times `1..=steps` starting from `x1`; `y_t` exists for every `t`.
pub fn simulate<M: StateSpaceModel + ?Sized>(
    model: &M,
    steps: usize,
    x1: Vector,
    rng: &mut dyn rand::RngCore,
) -> Result<Trajectory> {
    if steps == 0 {
        return Err(Error::InvalidInput("steps must be >= 1".into()));
    }
    let mut states = Vec::with_capacity(steps);
    let mut observations = Vec::with_capacity(steps);
    let mut x = x1;
    for t in 1..=steps {
        if t > 1 {
            x = model.sample_transition(&x, t, rng);
        }
        observations.push(model.sample_observation(&x, t, rng));
        states.push(x.clone());
    }
    Ok(Trajectory { states, observations })
}

/// Noise-free counterpart of [`simulate`].
pub fn simulate_noiseless<M: StateSpaceModel + ?Sized>(model: &M, steps: usize, x1: Vector) -> Trajectory {
    let mut states = Vec::with_capacity(steps);
    let mut observations = Vec::with_capacity(steps);
    let mut x = x1;
    for t in 1..=steps {
        if t > 1 {
            x = model.transition(&x, t);
        }
        observations.push(model.observe(&x, t));
        states.push(x.clone());
    }
    Trajectory { states, observations }
}

/// Model selection by configuration name.
#[derive(Debug, Clone)]
pub enum ModelKind {
    A(ModelA),
    B(ModelB),
    Ungm(Ungm),
}

impl ModelKind {
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "A" | "a" | "model-a" => Ok(Self::A(ModelA::default())),
            "B" | "b" | "model-b" => Ok(Self::B(ModelB::default())),
            "ungm" | "C" | "c" => Ok(Self::Ungm(Ungm::default())),
            other => Err(Error::UnknownName {
                kind: "model",
                name: other.to_string(),
            }),
        }
    }

    pub fn as_model(&self) -> &dyn StateSpaceModel {
        match self {
            ModelKind::A(m) => m,
            ModelKind::B(m) => m,
            ModelKind::Ungm(m) => m,
        }
    }

    /// Replaces the observation noise variance.
    pub fn with_obs_var(self, r: f64) -> Self {
        match self {
            ModelKind::A(mut m) => {
                m.params.obs_var = r;
                ModelKind::A(m)
            }
            ModelKind::B(m) => ModelKind::B(ModelB { obs_var: r, ..m }),
            ModelKind::Ungm(m) => ModelKind::Ungm(Ungm { obs_var: r, ..m }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::RngStream;
    use rand::Rng;

    #[test]
    fn model_a_noiseless_step() {
        let tr = simulate_noiseless(&ModelA::default(), 2, v1(1.0));
        let expect = 1.0 + (0.04 * PI * 2.0).sin() + 0.5;
        assert!((tr.states[1][0] - expect).abs() < 1e-15);
    }

    #[test]
    fn ungm_noiseless_step() {
        let tr = simulate_noiseless(&Ungm::default(), 2, v1(0.0));
        // 8 cos(1.2) evaluated independently
        assert!((tr.states[1][0] - 2.898_862_035_813_389).abs() < 1e-12);
        assert!((tr.states[1][0] - 2.899).abs() < 1e-3);
    }

    #[test]
    fn model_b_observation() {
        let y = ModelB::default().observe(&v1(4.0), 7);
        assert_eq!(y[0], 0.0);
    }

    #[test]
    fn inversion_examples() {
        let c = Ungm::default().invert(&v1(5.0), 3);
        assert_eq!(c, vec![v1(10.0), v1(-10.0)]);
        let a = ModelA::default();
        assert_eq!(a.invert(&v1(1.0), 40), vec![v1(6.0)]);
        let q = a.invert(&v1(1.8), 10);
        assert!((q[0][0] - 3.0).abs() < 1e-12 && (q[1][0] + 3.0).abs() < 1e-12);
    }

    #[test]
    fn negative_radicand_clamps_to_zero() {
        assert_eq!(Ungm::default().invert(&v1(-0.3), 5), vec![v1(0.0)]);
        assert_eq!(ModelA::default().invert(&v1(-1e-4), 5), vec![v1(0.0)]);
    }

    #[test]
    fn model_a_switch_boundary() {
        let a = ModelA::default();
        assert!((a.observe(&v1(3.0), 30)[0] - 1.8).abs() < 1e-12);
        assert!((a.observe(&v1(3.0), 31)[0] + 0.5).abs() < 1e-12);
    }

    #[test]
    fn round_trip_inversion() {
        let mut rng = RngStream::new(11, 0);
        let models: Vec<(Box<dyn StateSpaceModel>, f64)> = vec![
            (Box::new(ModelA::default()), 10.0),
            (Box::new(ModelB::default()), 10.0),
            (Box::new(Ungm::default()), 30.0),
        ];
        for (model, range) in &models {
            for _ in 0..1000 {
                let x = v1(rng.random_range(-range..*range));
                let t = rng.random_range(1..=60);
                let y = model.observe(&x, t);
                let cands = model.invert(&y, t);
                assert!(cands.iter().all(|c| (model.observe(c, t)[0] - y[0]).abs() < 1e-9));
                let best = cands.iter().map(|c| (c[0] - x[0]).abs()).fold(f64::INFINITY, f64::min);
                assert!(best < 1e-9, "{} x={} t={t} best={best}", model.name(), x[0]);
            }
        }
    }

    #[test]
    fn simulate_lengths() {
        let mut rng = RngStream::new(1, 0);
        let tr = simulate(&Ungm::default(), 25, v1(0.0), &mut rng).unwrap();
        assert_eq!(tr.states.len(), 25);
        assert_eq!(tr.observations.len(), 25);
        assert!(simulate(&Ungm::default(), 0, v1(0.0), &mut rng).is_err());
    }

    #[test]
    fn jacobians_match_finite_differences() {
        let models: Vec<Box<dyn StateSpaceModel>> = vec![
            Box::new(ModelA::default()),
            Box::new(ModelB::default()),
            Box::new(Ungm::default()),
        ];
        let h = 1e-6;
        for m in &models {
            for &x in &[-3.0, -0.4, 0.7, 2.5] {
                for &t in &[5usize, 40] {
                    let fd_f = (m.transition(&v1(x + h), t)[0] - m.transition(&v1(x - h), t)[0]) / (2.0 * h);
                    let fd_h = (m.observe(&v1(x + h), t)[0] - m.observe(&v1(x - h), t)[0]) / (2.0 * h);
                    assert!((fd_f - m.transition_jacobian(&v1(x), t)[(0, 0)]).abs() < 1e-6);
                    assert!((fd_h - m.observation_jacobian(&v1(x), t)[(0, 0)]).abs() < 1e-6);
                }
            }
        }
    }
}
