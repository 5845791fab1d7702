//! Monte Carlo comparison on Model A: five filters against O₂.
//!
//! `cargo run --release --example model_a_table -- [runs]`

use o2bench::bench::{run_scalar, ScalarSetup};
use o2bench::models::ModelKind;

fn main() -> o2bench::Result<()> {
    let runs = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100);
    let mut setup = ScalarSetup::new(ModelKind::by_name("A")?, &["ekf", "ukf", "sir", "ekpf", "ukpf", "o2"]);
    setup.runs = runs;
    setup.steps = 60;
    setup.particles = 200;
    let report = run_scalar(&setup)?;
    println!("{:<8} {:>10} {:>12} {:>10}", "", "mean RMSE", "variance", "time (s)");
    for e in &report.estimators {
        println!(
            "{:<8} {:>10.4} {:>12.3e} {:>10.3}",
            e.name,
            e.mean,
            e.variance,
            e.wall_ms / 1e3
        );
    }
    Ok(())
}
