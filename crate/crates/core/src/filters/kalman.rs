use crate::error::{Error, Result};
use crate::models::{LinearSystem, StateSpaceModel};
use crate::prob::linalg::{symmetrize, Matrix, Vector};
use crate::prob::GaussianBelief;

/// Gain step shared by every Kalman-type update.
///
/// `pxy` is the state/observation cross covariance and `s` the innovation
/// covariance. A zero cross covariance means the prediction is already
/// certain, so the observation is ignored.
pub(crate) fn correct(
    mean: &Vector,
    cov: &Matrix,
    innovation: &Vector,
    pxy: &Matrix,
    s: &Matrix,
) -> Result<GaussianBelief> {
    if pxy.iter().all(|v| *v == 0.0) {
        return Ok(GaussianBelief {
            mean: mean.clone(),
            cov: cov.clone(),
        });
    }
    let s_inv = s.clone().cholesky().ok_or(Error::SingularInnovation)?.inverse();
    let gain = pxy * s_inv;
    let mean = mean + &gain * innovation;
    let mut cov = cov - &gain * s * gain.transpose();
    symmetrize(&mut cov);
    for i in 0..cov.nrows() {
        if cov[(i, i)] < 0.0 {
            cov[(i, i)] = 0.0;
        }
    }
    Ok(GaussianBelief { mean, cov })
}

/// Exact Kalman predict + correct on an affine-Gaussian system.
pub fn kalman_step(belief: &GaussianBelief, y: &Vector, sys: &LinearSystem) -> Result<GaussianBelief> {
    let mean = &sys.f * &belief.mean + &sys.b;
    let cov = &sys.f * &belief.cov * sys.f.transpose() + &sys.q;
    let s = &sys.h * &cov * sys.h.transpose() + &sys.r;
    let pxy = &cov * sys.h.transpose();
    let innovation = y - (&sys.h * &mean + &sys.c);
    correct(&mean, &cov, &innovation, &pxy, &s)
}

/// First-order prediction through `f` with the model's assumed Gaussian noise.
pub fn ekf_predict(belief: &GaussianBelief, t: usize, model: &dyn StateSpaceModel) -> GaussianBelief {
    let (u_mean, q) = model.assumed_process_noise();
    let f = model.transition_jacobian(&belief.mean, t);
    let mean = model.transition(&belief.mean, t) + u_mean;
    let mut cov = &f * &belief.cov * f.transpose() + q;
    symmetrize(&mut cov);
    GaussianBelief { mean, cov }
}

/// First-order correction, linearising `h` at the predicted mean.
pub fn ekf_update(pred: &GaussianBelief, y: &Vector, t: usize, model: &dyn StateSpaceModel) -> Result<GaussianBelief> {
    let h = model.observation_jacobian(&pred.mean, t);
    let s = &h * &pred.cov * h.transpose() + model.observation_noise_cov();
    let pxy = &pred.cov * h.transpose();
    let innovation = y - model.observe(&pred.mean, t);
    correct(&pred.mean, &pred.cov, &innovation, &pxy, &s)
}

pub fn ekf_step(belief: &GaussianBelief, y: &Vector, t: usize, model: &dyn StateSpaceModel) -> Result<GaussianBelief> {
    ekf_update(&ekf_predict(belief, t, model), y, t, model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{simulate, ModelB};
    use crate::prob::RngStream;

    fn v1(x: f64) -> Vector {
        Vector::from_element(1, x)
    }

    #[test]
    fn uninformative_observation_keeps_prediction() {
        let model = ModelB::with_obs_var(1e12);
        let prior = GaussianBelief::scalar(2.0, 0.5).unwrap();
        let sys = model.linear_system(3);
        let post = kalman_step(&prior, &v1(50.0), &sys).unwrap();
        let pred = &sys.f * &prior.mean + &sys.b;
        assert!(((post.mean[0] - pred[0]) / pred[0]).abs() < 1e-6);
    }

    #[test]
    fn noiseless_exact_prior_tracks_truth() {
        let mut model = ModelB::with_obs_var(0.0);
        model.process_var = 0.0;
        let mut belief = GaussianBelief::scalar(1.0, 0.0).unwrap();
        let mut x = 1.0;
        for t in 2..20 {
            let sys = model.linear_system(t);
            x = sys.f[(0, 0)] * x + sys.b[0];
            let y = 0.5 * x - 2.0;
            belief = kalman_step(&belief, &v1(y), &sys).unwrap();
            assert!((belief.mean[0] - x).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_innovation_is_an_error() {
        let model = ModelB::with_obs_var(0.0);
        let mut sys = model.linear_system(2);
        sys.h = Matrix::zeros(1, 1);
        let prior = GaussianBelief::scalar(1.0, 1.0).unwrap();
        // H = 0 gives zero cross covariance: nothing to correct.
        assert!(kalman_step(&prior, &v1(0.0), &sys).is_ok());
        let sys2 = crate::models::LinearSystem {
            r: Matrix::from_element(2, 2, 0.0),
            h: Matrix::from_row_slice(2, 1, &[1.0, 1.0]),
            c: Vector::zeros(2),
            ..model.linear_system(2)
        };
        let r = kalman_step(&prior, &Vector::zeros(2), &sys2);
        assert!(matches!(r, Err(Error::SingularInnovation)));
    }

    #[test]
    fn ekf_equals_kf_on_linear_model() {
        let model = ModelB::default();
        let mut rng = RngStream::new(21, 0);
        let tr = simulate(&model, 200, v1(1.0), &mut rng).unwrap();
        let mut kf = GaussianBelief::scalar(1.0, 0.75).unwrap();
        let mut ekf = kf.clone();
        for t in 2..=200 {
            let y = &tr.observations[t - 1];
            kf = kalman_step(&kf, y, &model.linear_system(t)).unwrap();
            ekf = ekf_step(&ekf, y, t, &model).unwrap();
            assert!((kf.mean[0] - ekf.mean[0]).abs() < 1e-10);
            assert!((kf.cov[(0, 0)] - ekf.cov[(0, 0)]).abs() < 1e-10);
        }
    }
}
