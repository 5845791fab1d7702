//! Drives an experiment from a JSON config and emits figure data, as the
//! `o2bench` binary does.

use o2bench::bench::experiment::{run_experiment, write_report, ExperimentConfig};
use o2bench::bench::plot::{plot_points, write_plot_csv};

const CONFIG: &str = r#"{
    "experiment": "ungm-noise-sweep",
    "estimators": ["sir", "o2-true-sign"],
    "runs": 10,
    "grid": [1e-4, 1e-2, 1, 100, 10000]
}"#;

fn main() -> o2bench::Result<()> {
    let cfg = ExperimentConfig::from_json(CONFIG)?;
    let report = run_experiment(&cfg)?;
    let dir = std::env::temp_dir().join("o2bench-json-config");
    for path in write_report(&report, &dir)? {
        eprintln!("wrote {}", path.display());
    }
    write_plot_csv(&plot_points("fig17", &report)?, std::io::stdout().lock())
}
