use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use o2bench::bench::plot::{emit_plotdata, figure_config, figure_ids, write_plot_csv};
use o2bench::bench::{run_experiment, write_report, ExperimentConfig, ExperimentId, ExperimentReport};
use o2bench::pofb::write_sweep_csv;
use o2bench::Error;

/// Observation-only inference benchmarks.
#[derive(Parser)]
#[command(name = "o2bench", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Base RNG seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo runs.
    #[arg(long, global = true)]
    runs: Option<usize>,
    /// Output directory (bench, mtt) or CSV file (pofb, plotdata; stdout if absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Use the full-scale run and particle counts instead of the desk defaults.
    #[arg(long, global = true)]
    paper_scale: bool,
    /// JSON experiment config; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run any experiment and write its CSV files and report.json.
    Bench {
        /// Experiment id, e.g. model-a, ungm, model-b-sweep, mtt-multisensor.
        #[arg(long)]
        experiment: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Probability of fusion benefit over an (r, p, m) grid.
    Pofb {
        /// Reference estimate: x, y or min.
        #[arg(long, default_value = "x")]
        target: String,
        /// Sweep truth biases instead of m = 0.
        #[arg(long)]
        biased: bool,
        /// Fusion rule: kf or particle.
        #[arg(long)]
        rule: Option<String>,
        /// Monte Carlo samples per cell.
        #[arg(long)]
        samples: Option<usize>,
        /// Particles for the particle rule.
        #[arg(long)]
        particles: Option<usize>,
    },
    /// Multi-target tracking on the CT or ghost scenario.
    Mtt {
        /// ct or ghost.
        #[arg(long, default_value = "ct")]
        scenario: String,
        #[arg(long)]
        sensors: Option<usize>,
        /// Expected clutter returns per scan and sensor.
        #[arg(long)]
        clutter: Option<f64>,
        /// Trackers: kmeans, meap, o2, t2t[-extractor], oft[-extractor], o2-cluster.
        #[arg(long, value_delimiter = ',')]
        tracker: Vec<String>,
        #[arg(long)]
        steps: Option<usize>,
        /// Particles per expected target.
        #[arg(long)]
        particles: Option<usize>,
        /// Connection scale of the clustering filter.
        #[arg(long)]
        cluster_l: Option<f64>,
    },
    /// Long-format x,series,value data for one figure.
    Plotdata {
        /// Figure id, e.g. fig12.
        #[arg(long, required_unless_present = "list")]
        fig: Option<String>,
        /// List figure ids.
        #[arg(long)]
        list: bool,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Comma-separated estimator or tracker names.
    #[arg(long, value_delimiter = ',')]
    estimators: Vec<String>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    particles: Option<usize>,
    /// Values of the swept parameter.
    #[arg(long, value_delimiter = ',')]
    grid: Vec<f64>,
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::UnknownName { .. } | Error::InvalidInput(_) => Failure::Config(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn base_config(global: &Global, default: ExperimentId) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &global.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::new(default),
    };
    if let Some(s) = global.seed {
        cfg.seed = s;
    }
    if global.runs.is_some() {
        cfg.runs = global.runs;
    }
    if global.paper_scale {
        cfg.paper_scale = true;
    }
    if global.out.is_some() {
        cfg.out = global.out.clone();
    }
    Ok(cfg)
}

fn apply_common(cfg: &mut ExperimentConfig, c: &Common) {
    if !c.estimators.is_empty() {
        cfg.estimators = c.estimators.clone();
    }
    cfg.steps = c.steps.or(cfg.steps);
    cfg.particles = c.particles.or(cfg.particles);
    if !c.grid.is_empty() {
        cfg.grid = Some(c.grid.clone());
    }
}

fn csv_sink(out: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            Box::new(BufWriter::new(File::create(p)?))
        }
        None => Box::new(io::stdout().lock()),
    })
}

fn summarize(report: &ExperimentReport) {
    match report {
        ExperimentReport::Scalar(r) => {
            eprintln!("{} (R={}, {} runs x {} steps)", r.model, r.obs_var, r.runs, r.steps);
            for e in &r.estimators {
                eprintln!(
                    "  {:<14} mean {:>10.4} var {:>10.3e} degeneracy {:>6} time {:>9.1} ms",
                    e.name, e.mean, e.variance, e.degeneracy_events, e.wall_ms
                );
            }
        }
        ExperimentReport::Mtt(r) => {
            eprintln!("{} runs x {} steps", r.runs, r.steps);
            for s in &r.series {
                eprintln!(
                    "  {:<12} OSPA {:>7.2} card MAE {:>5.2} time {:>8.1} ms/run",
                    s.name, s.mean_ospa, s.card_mae, s.mean_wall_ms
                );
            }
        }
        ExperimentReport::ScalarSweep(s) => eprintln!("{} points over {}", s.points.len(), s.parameter),
        ExperimentReport::MttSweep(s) => eprintln!("{} points over {}", s.points.len(), s.parameter),
        ExperimentReport::Pofb(p) => eprintln!("{} cells", p.cells.len()),
    }
}

fn default_dir(cfg: &ExperimentConfig) -> PathBuf {
    let id = serde_json::to_value(cfg.experiment)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_else(|| "experiment".into());
    Path::new("results").join(id)
}

fn write_dir(report: &ExperimentReport, cfg: &ExperimentConfig) -> Result<(), Failure> {
    let dir = cfg.out.clone().unwrap_or_else(|| default_dir(cfg));
    for p in write_report(report, &dir)? {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let g = &cli.global;
    match cli.command {
        Command::Bench { experiment, common } => {
            let mut cfg = base_config(g, ExperimentId::ModelA)?;
            match experiment {
                Some(id) => cfg.experiment = ExperimentId::by_name(&id)?,
                None if g.config.is_none() => {
                    return Err(Failure::Config("bench needs --experiment or --config".into()))
                }
                None => {}
            }
            apply_common(&mut cfg, &common);
            let report = run_experiment(&cfg)?;
            summarize(&report);
            write_dir(&report, &cfg)
        }
        Command::Pofb {
            target,
            biased,
            rule,
            samples,
            particles,
        } => {
            let id = match (target.as_str(), biased) {
                ("x", false) => ExperimentId::PofbX,
                ("x", true) => ExperimentId::PofbBiased,
                ("y", false) => ExperimentId::PofbY,
                ("min", _) => ExperimentId::PofbMin,
                ("y", true) => return Err(Failure::Config("--biased is supported for targets x and min".into())),
                (other, _) => return Err(Failure::Config(format!("unknown PoFB target `{other}`"))),
            };
            let mut cfg = base_config(g, id)?;
            cfg.experiment = id;
            cfg.rule = rule.or(cfg.rule);
            cfg.samples = samples.or(cfg.samples);
            cfg.particles = particles.or(cfg.particles);
            let report = run_experiment(&cfg)?;
            if let ExperimentReport::Pofb(p) = &report {
                let mut sink = csv_sink(cfg.out.as_deref())?;
                write_sweep_csv(&p.cells, &mut sink)?;
                sink.flush()?;
            }
            Ok(())
        }
        Command::Mtt {
            scenario,
            sensors,
            clutter,
            tracker,
            steps,
            particles,
            cluster_l,
        } => {
            let id = match (scenario.as_str(), sensors.unwrap_or(1)) {
                ("ghost", _) => ExperimentId::Ghost,
                ("ct", 1) => ExperimentId::MttCt,
                ("ct", _) => ExperimentId::MttMultisensor,
                (other, _) => return Err(Failure::Config(format!("unknown scenario `{other}`"))),
            };
            let mut cfg = base_config(g, id)?;
            cfg.experiment = id;
            if !tracker.is_empty() {
                cfg.estimators = tracker;
            }
            cfg.sensors = sensors.or(cfg.sensors);
            cfg.clutter = clutter.or(cfg.clutter);
            cfg.steps = steps.or(cfg.steps);
            cfg.particles = particles.or(cfg.particles);
            cfg.cluster_l = cluster_l.or(cfg.cluster_l);
            let report = run_experiment(&cfg)?;
            summarize(&report);
            write_dir(&report, &cfg)
        }
        Command::Plotdata { fig, list, common } => {
            if list {
                for (id, about) in figure_ids() {
                    println!("{id:<6} {about}");
                }
                return Ok(());
            }
            let fig = fig.unwrap_or_default();
            let mut cfg = figure_config(&fig)?;
            if let Some(p) = &g.config {
                let file = ExperimentConfig::load(p)?;
                if file.experiment != cfg.experiment {
                    return Err(Failure::Config(format!("config experiment does not match {fig}")));
                }
                cfg = file;
            }
            if let Some(s) = g.seed {
                cfg.seed = s;
            }
            cfg.runs = g.runs.or(cfg.runs);
            cfg.paper_scale |= g.paper_scale;
            apply_common(&mut cfg, &common);
            let points = emit_plotdata(&fig, &cfg)?;
            let mut sink = csv_sink(g.out.as_deref())?;
            write_plot_csv(&points, &mut sink)?;
            sink.flush()?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("config error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
