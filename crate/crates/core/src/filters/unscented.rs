use super::kalman::correct;
use crate::error::{Error, Result};
use crate::models::StateSpaceModel;
use crate::prob::linalg::{psd_factor, symmetrize, Matrix, Vector};
use crate::prob::GaussianBelief;

/// Sigma-point spread parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnscentedParams {
    pub alpha: f64,
    pub beta: f64,
    pub kappa: f64,
}

impl Default for UnscentedParams {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 0.0,
            kappa: 2.0,
        }
    }
}

impl UnscentedParams {
    pub fn lambda(&self, n: usize) -> f64 {
        self.alpha * self.alpha * (n as f64 + self.kappa) - n as f64
    }

    fn validate(&self, n: usize) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "alpha must be in (0, 1], got {}",
                self.alpha
            )));
        }
        if !(n as f64 + self.lambda(n) > 0.0) {
            return Err(Error::InvalidInput(format!(
                "n + lambda must be positive (n={n}, lambda={})",
                self.lambda(n)
            )));
        }
        Ok(())
    }
}

/// Moments propagated through a nonlinear map.
#[derive(Debug, Clone)]
pub struct UtResult {
    pub mean: Vector,
    pub cov: Matrix,
    /// Cross covariance between input and output.
    pub cross: Matrix,
}

/// Standard `2n+1` sigma-point unscented transform of `N(mean, cov)` through `f`.
pub fn unscented_transform<F>(mean: &Vector, cov: &Matrix, params: &UnscentedParams, f: F) -> Result<UtResult>
where
    F: Fn(&Vector) -> Vector,
{
    let n = mean.len();
    params.validate(n)?;
    let lambda = params.lambda(n);
    let scale = n as f64 + lambda;
    let root = psd_factor(&(cov * scale))?;

    let mut points = Vec::with_capacity(2 * n + 1);
    points.push(mean.clone());
    for i in 0..n {
        points.push(mean + root.column(i));
    }
    for i in 0..n {
        points.push(mean - root.column(i));
    }
    let wm0 = lambda / scale;
    let wc0 = wm0 + (1.0 - params.alpha * params.alpha + params.beta);
    let wi = 1.0 / (2.0 * scale);

    let images: Vec<Vector> = points.iter().map(&f).collect();
    let m = images[0].len();
    let mut y_mean = &images[0] * wm0;
    for y in &images[1..] {
        y_mean.axpy(wi, y, 1.0);
    }
    let mut y_cov = Matrix::zeros(m, m);
    let mut cross = Matrix::zeros(n, m);
    for (k, (x, y)) in points.iter().zip(&images).enumerate() {
        let w = if k == 0 { wc0 } else { wi };
        let dy = y - &y_mean;
        let dx = x - mean;
        y_cov += &dy * dy.transpose() * w;
        cross += &dx * dy.transpose() * w;
    }
    symmetrize(&mut y_cov);
    Ok(UtResult {
        mean: y_mean,
        cov: y_cov,
        cross,
    })
}

/// Unscented predict + correct with additive noise.
pub fn ukf_step(
    belief: &GaussianBelief,
    y: &Vector,
    t: usize,
    model: &dyn StateSpaceModel,
    params: &UnscentedParams,
) -> Result<GaussianBelief> {
    let (u_mean, q) = model.assumed_process_noise();
    let pred = unscented_transform(&belief.mean, &belief.cov, params, |x| model.transition(x, t))?;
    let x_pred = pred.mean + u_mean;
    let p_pred = pred.cov + q;
    let obs = unscented_transform(&x_pred, &p_pred, params, |x| model.observe(x, t))?;
    let s = obs.cov + model.observation_noise_cov();
    let innovation = y - &obs.mean;
    correct(&x_pred, &p_pred, &innovation, &obs.cross, &s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::kalman_step;
    use crate::models::{simulate, ModelB};
    use crate::prob::RngStream;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn identity_is_exact() {
        let mean = Vector::from_vec(vec![1.0, -2.0]);
        let cov = Matrix::from_row_slice(2, 2, &[2.0, 0.4, 0.4, 1.0]);
        let ut = unscented_transform(&mean, &cov, &UnscentedParams::default(), |x| x.clone()).unwrap();
        assert!((ut.mean - &mean).abs().max() < 1e-10);
        assert!((ut.cov - &cov).abs().max() < 1e-10);
        assert!((ut.cross - &cov).abs().max() < 1e-10);
    }

    #[test]
    fn square_of_standard_normal() {
        // sigma points 0, ±√3 with weights 2/3, 1/6, 1/6
        let ut = unscented_transform(
            &Vector::zeros(1),
            &Matrix::identity(1, 1),
            &UnscentedParams::default(),
            |x| x.map(|v| v * v),
        )
        .unwrap();
        assert!((ut.mean[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_spread() {
        let p = UnscentedParams {
            alpha: 1.0,
            beta: 0.0,
            kappa: -1.0,
        };
        assert!(unscented_transform(&Vector::zeros(1), &Matrix::identity(1, 1), &p, |x| x.clone()).is_err());
        let p = UnscentedParams {
            alpha: 1.5,
            ..UnscentedParams::default()
        };
        assert!(unscented_transform(&Vector::zeros(1), &Matrix::identity(1, 1), &p, |x| x.clone()).is_err());
    }

    #[test]
    fn non_psd_rejected() {
        let cov = Matrix::from_row_slice(2, 2, &[1.0, 3.0, 3.0, 1.0]);
        let r = unscented_transform(&Vector::zeros(2), &cov, &UnscentedParams::default(), |x| x.clone());
        assert!(matches!(r, Err(Error::NotPsd { .. })));
    }

    #[test]
    fn ukf_equals_kf_on_linear_model() {
        let model = ModelB::default();
        let mut rng = RngStream::new(22, 0);
        let tr = simulate(&model, 200, Vector::from_element(1, 1.0), &mut rng).unwrap();
        let mut kf = GaussianBelief::scalar(1.0, 0.75).unwrap();
        let mut ukf = kf.clone();
        let p = UnscentedParams::default();
        for t in 2..=200 {
            let y = &tr.observations[t - 1];
            kf = kalman_step(&kf, y, &model.linear_system(t)).unwrap();
            ukf = ukf_step(&ukf, y, t, &model, &p).unwrap();
            assert!((kf.mean[0] - ukf.mean[0]).abs() < 1e-8);
        }
    }

    fn random_spd(n: usize, rng: &mut RngStream) -> Matrix {
        let a = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        &a * a.transpose() + Matrix::identity(n, n) * 0.1
    }

    proptest! {
        #[test]
        fn affine_maps_are_exact(n in 1usize..=4, m in 1usize..=4, seed in 0u64..10_000) {
            let mut rng = RngStream::new(seed, 0);
            let mean = Vector::from_fn(n, |_, _| rng.random_range(-5.0..5.0));
            let cov = random_spd(n, &mut rng);
            let a = Matrix::from_fn(m, n, |_, _| rng.random_range(-2.0..2.0));
            let b = Vector::from_fn(m, |_, _| rng.random_range(-2.0..2.0));
            let ut = unscented_transform(&mean, &cov, &UnscentedParams::default(), |x| &a * x + &b).unwrap();
            let expect_mean = &a * &mean + &b;
            let expect_cov = &a * &cov * a.transpose();
            prop_assert!((ut.mean - expect_mean).abs().max() < 1e-10);
            prop_assert!((ut.cov - expect_cov).abs().max() < 1e-10);
        }
    }
}
