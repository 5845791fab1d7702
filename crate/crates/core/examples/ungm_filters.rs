//! Runs EKF, UKF, a bootstrap particle filter and O₂ side by side on one
//! simulated trajectory of the growth model and prints their RMSE.

use o2bench::filters::{Estimator, GaussianFilter, GaussianKind, ParticleFilter, PfVariant, UnscentedParams};
use o2bench::models::{simulate, Ungm};
use o2bench::o2::{O2Estimator, SignStrategy};
use o2bench::prob::{normal, GaussianBelief, RngStream, Vector};

fn main() -> o2bench::Result<()> {
    let model = Ungm::default();
    let mut sim = RngStream::new(7, 0);
    let x1 = Vector::from_element(1, normal(&mut sim, 0.0, model.process_var));
    let traj = simulate(&model, 100, x1.clone(), &mut sim)?;
    let prior = GaussianBelief::scalar(0.0, model.process_var)?;

    let mut init = RngStream::new(7, 1);
    let mut estimators: Vec<Box<dyn Estimator + '_>> = vec![
        Box::new(GaussianFilter::new(GaussianKind::Ekf, &model, prior.clone())),
        Box::new(GaussianFilter::new(
            GaussianKind::Ukf(UnscentedParams::default()),
            &model,
            prior.clone(),
        )),
        Box::new(ParticleFilter::new(&model, PfVariant::Sir, 200, &prior, &mut init)?),
        Box::new(O2Estimator::new(&model, SignStrategy::Oracle, x1)),
    ];

    let mut rng = RngStream::new(7, 2);
    let mut sq = vec![0.0; estimators.len()];
    for t in 2..=traj.states.len() {
        let (x, y) = (&traj.states[t - 1], &traj.observations[t - 1]);
        for (e, acc) in estimators.iter_mut().zip(&mut sq) {
            // only the oracle-sign O₂ looks at this
            e.observe_truth(x);
            let est = e.step(y, t, &mut rng)?;
            *acc += (est[0] - x[0]).powi(2);
        }
    }
    let n = (traj.states.len() - 1) as f64;
    for (e, acc) in estimators.iter().zip(sq) {
        println!("{:<14} RMSE {:.3}", e.name(), (acc / n).sqrt());
    }
    Ok(())
}
