//! Growth-model benchmark: Kalman-type and particle filters against O₂ with
//! transition, filter-assisted and oracle sign resolution, plus the
//! debiased variant.
//!
//! `cargo run --release --example ungm_table -- [runs]`

use o2bench::bench::{run_scalar, ScalarSetup};
use o2bench::models::ModelKind;

fn main() -> o2bench::Result<()> {
    let runs = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(50);
    let names = [
        "ekf",
        "ukf",
        "sir",
        "apf",
        "gpf",
        "ekpf",
        "ukpf",
        "o2",
        "o2-pf-sign",
        "o2-true-sign",
        "o2-unbiased",
    ];
    let mut setup = ScalarSetup::new(ModelKind::by_name("ungm")?, &names);
    setup.runs = runs;
    let report = run_scalar(&setup)?;
    for e in &report.estimators {
        println!(
            "{:<14} mean {:>8.3}  variance {:>9.3}  degeneracy {:>5}  {:>8.1} ms",
            e.name, e.mean, e.variance, e.degeneracy_events, e.wall_ms
        );
    }
    Ok(())
}
