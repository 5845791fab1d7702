//! Ghost targets with arbitrary, unmodelled motion seen by ten cameras.
//! Only O₂ with density clustering applies: there is no motion model to
//! filter with.

use o2bench::mtt::{run_mtt, Extractor, Fusion, MttMethod, MttSetup, ScenarioConfig};

fn main() -> o2bench::Result<()> {
    let runs = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20);
    let method = MttMethod::Fused {
        fusion: Fusion::O2,
        extractor: Extractor::Meap,
    };
    let mut setup = MttSetup::new(ScenarioConfig::ghost(10, 10.0), vec![method]);
    setup.runs = runs;
    let report = run_mtt(&setup)?;
    let s = &report.series[0];
    println!("OSPA {:.2}, cardinality MAE {:.2}", s.mean_ospa, s.card_mae);
    for k in (9..report.steps).step_by(10) {
        println!(
            "  step {:>3}: {:.2} targets, {:.2} estimated, OSPA {:.1}",
            k + 1,
            s.card_true_by_step[k],
            s.card_est_by_step[k],
            s.ospa_by_step[k]
        );
    }
    Ok(())
}
