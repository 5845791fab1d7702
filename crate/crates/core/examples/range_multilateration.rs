//! Observation-only position fix from three noiseless range sensors, and
//! the Cramér-Rao bound of an observation-only scalar estimate.

use o2bench::o2::{fisher_crb, o2_solve_system, Sensor, SensorSuite};
use o2bench::prob::Vector;

fn main() -> o2bench::Result<()> {
    let origins = [[0.0, 0.0], [100.0, 0.0], [0.0, 100.0]];
    let suite = SensorSuite::new(2, origins.iter().map(|&o| Sensor::range(o)).collect());
    let truth = Vector::from_vec(vec![37.0, 58.0]);
    let ys: Vec<Vector> = suite.sensors.iter().map(|s| s.observe(&truth)).collect();
    let fix = o2_solve_system(&suite, &ys, &Vector::from_vec(vec![50.0, 50.0]))?;
    println!("truth {:?} -> fix [{:.6}, {:.6}]", truth.as_slice(), fix[0], fix[1]);
    // y = 0.5 x + v with R = 1 maps to variance R / 0.25 on the state
    let crb = fisher_crb(1.0 / 0.25)?;
    println!("CRB on (x, variance): diag({}, {})", crb[(0, 0)], crb[(1, 1)]);
    Ok(())
}
