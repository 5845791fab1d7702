//! Linear-Gaussian Model B: the exact Kalman filter against O₂ as the
//! observation noise grows. O₂'s error scales with √R.

use o2bench::bench::experiment::{run_experiment, ExperimentConfig, ExperimentId, ExperimentReport};

fn main() -> o2bench::Result<()> {
    let mut cfg = ExperimentConfig::new(ExperimentId::ModelBSweep);
    cfg.runs = Some(20);
    cfg.steps = Some(200);
    cfg.grid = Some(vec![1e-4, 1e-2, 1.0, 100.0]);
    let ExperimentReport::ScalarSweep(sweep) = run_experiment(&cfg)? else {
        unreachable!()
    };
    println!("{:>8} {:>10} {:>10} {:>10}", "R", "kf", "o2", "o2/sqrt(R)");
    for (r, rep) in &sweep.points {
        let o2 = rep.mean_of("o2");
        println!(
            "{r:>8} {:>10.4} {:>10.4} {:>10.3}",
            rep.mean_of("kf"),
            o2,
            o2 / r.sqrt()
        );
    }
    Ok(())
}
