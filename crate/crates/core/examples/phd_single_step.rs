//! One run of the SMC-PHD filter on the coordinated-turn scenario, showing
//! the three estimate extractors and the per-step OSPA.

use o2bench::mtt::{extract_estimates, generate_scenario, ospa, Extractor, PhdConfig, ScenarioConfig, SmcPhd};
use o2bench::prob::RngStream;

fn main() -> o2bench::Result<()> {
    let config = ScenarioConfig::ct(1, 10.0);
    let scenario = generate_scenario(&config, &mut RngStream::new(3, 0))?;
    let phd_cfg = PhdConfig {
        p_s: config.p_s,
        birth: config.birth.clone(),
        ..PhdConfig::with_particles(500)
    };
    let mut phd = SmcPhd::new(phd_cfg.clone(), config.sensor)?;
    let mut rng = RngStream::new(3, 1);
    println!("step truth  mass  kmeans   meap     o2");
    for (k, scan) in scenario.scans[0].iter().enumerate() {
        let out = phd.step(scan, &mut rng);
        let truth = &scenario.truth[k];
        let errs: Vec<f64> = [Extractor::KMeans, Extractor::Meap, Extractor::O2]
            .into_iter()
            .map(|m| {
                let est = extract_estimates(&out, m, &config.sensor, phd_cfg.identify_threshold, &mut rng);
                ospa(truth, &est, 100.0, 2.0)
            })
            .collect();
        if k % 10 == 9 {
            println!(
                "{:>4} {:>5} {:>5.2} {:>7.1} {:>6.1} {:>6.1}",
                k + 1,
                truth.len(),
                out.mass,
                errs[0],
                errs[1],
                errs[2]
            );
        }
    }
    Ok(())
}
