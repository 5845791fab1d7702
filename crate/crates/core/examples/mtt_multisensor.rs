//! Ten co-located radars: track-to-track fusion, optimal fusion of
//! observations and O₂ with density clustering.
//!
//! `cargo run --release --example mtt_multisensor -- [runs] [sensors]`

use o2bench::bench::mtt_method_by_name;
use o2bench::mtt::{run_mtt, MttSetup, ScenarioConfig};

fn main() -> o2bench::Result<()> {
    let mut args = std::env::args().skip(1);
    let runs = args.next().and_then(|s| s.parse().ok()).unwrap_or(10);
    let sensors = args.next().and_then(|s| s.parse().ok()).unwrap_or(10);
    let methods = ["t2t", "oft", "o2-cluster"]
        .iter()
        .map(|n| mtt_method_by_name(n))
        .collect::<o2bench::Result<Vec<_>>>()?;
    let mut setup = MttSetup::new(ScenarioConfig::ct(sensors, 10.0), methods);
    setup.runs = runs;
    setup.phd.particles_per_target = 500;
    setup.phd.birth_particles = 250;
    let report = run_mtt(&setup)?;
    for s in &report.series {
        println!(
            "{:<11} OSPA {:>6.2}  card MAE {:.2}  {:.1} ms/run",
            s.name, s.mean_ospa, s.card_mae, s.mean_wall_ms
        );
    }
    Ok(())
}
