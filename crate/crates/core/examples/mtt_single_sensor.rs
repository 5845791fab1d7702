//! Single-radar multi-target tracking: SMC-PHD with k-means, MEAP and O₂
//! estimate extraction, averaged over Monte Carlo runs.
//!
//! `cargo run --release --example mtt_single_sensor -- [runs] [clutter]`

use o2bench::mtt::{run_mtt, Extractor, MttMethod, MttSetup, ScenarioConfig};

fn main() -> o2bench::Result<()> {
    let mut args = std::env::args().skip(1);
    let runs = args.next().and_then(|s| s.parse().ok()).unwrap_or(20);
    let clutter = args.next().and_then(|s| s.parse().ok()).unwrap_or(10.0);
    let methods = [Extractor::KMeans, Extractor::Meap, Extractor::O2]
        .map(|extractor| MttMethod::Phd { extractor })
        .to_vec();
    let mut setup = MttSetup::new(ScenarioConfig::ct(1, clutter), methods);
    setup.runs = runs;
    setup.phd.particles_per_target = 500;
    setup.phd.birth_particles = 250;
    let report = run_mtt(&setup)?;
    for s in &report.series {
        println!(
            "{:<8} OSPA {:>6.2}  card MAE {:.2}  {:.1} ms/run",
            s.name, s.mean_ospa, s.card_mae, s.mean_wall_ms
        );
    }
    Ok(())
}
