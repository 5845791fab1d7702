//! Config-driven experiments: one id per reproduced table or figure family.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::scalar::{run_scalar, ScalarReport, ScalarSetup};
use crate::error::{Error, Result};
use crate::models::ModelKind;
use crate::mtt::{
    run_mtt, write_mtt_csv, ClusterParams, Extractor, Fusion, MttMethod, MttReport, MttSetup, PhdConfig, ScenarioConfig,
};
use crate::pofb::{log_grid, pofb_sweep, write_sweep_csv, FusionRule, PofbTarget, SweepCell, SweepGrid};

/// Experiment families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentId {
    /// Model A, filters vs O₂.
    ModelA,
    /// Model A over a grid of observation noise variances.
    ModelANoiseSweep,
    /// Linear Model B, KF vs O₂ over observation noise.
    ModelBSweep,
    /// Growth model, filters vs O₂ variants.
    Ungm,
    /// Growth model over observation noise variances.
    UngmNoiseSweep,
    /// Growth model over particle counts.
    UngmParticleSweep,
    /// PoFB against the prior estimate, truth at the prior mean.
    PofbX,
    /// PoFB against the observation-inferred estimate.
    PofbY,
    /// PoFB against the better of the two.
    PofbMin,
    /// PoFB against the prior estimate with a biased truth.
    PofbBiased,
    /// Single-sensor SMC-PHD with three extractors.
    MttCt,
    /// Single-sensor SMC-PHD over clutter rates.
    MttClutterSweep,
    /// T2T, OFT and clustering O₂ with several radars.
    MttMultisensor,
    /// Clustering O₂ and OFT over sensor counts.
    MttSensorSweep,
    /// Ghost targets under cameras.
    Ghost,
}

impl ExperimentId {
    pub fn by_name(name: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(name.to_string())).map_err(|_| Error::UnknownName {
            kind: "experiment",
            name: name.to_string(),
        })
    }
}

/// JSON experiment description. Absent fields take per-experiment defaults;
/// run counts default to half the full-scale counts unless `paper_scale` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    #[serde(default)]
    pub estimators: Vec<String>,
    pub runs: Option<usize>,
    pub steps: Option<usize>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub paper_scale: bool,
    /// Particles per filter, or per expected target for the PHD filter.
    pub particles: Option<usize>,
    pub debias_samples: Option<usize>,
    /// Observation noise variance for single-point scalar studies.
    pub obs_var: Option<f64>,
    /// Values of the swept parameter.
    pub grid: Option<Vec<f64>>,
    /// Monte Carlo samples per PoFB cell.
    pub samples: Option<usize>,
    /// PoFB fusion rule: `kf` or `particle`.
    pub rule: Option<String>,
    pub sensors: Option<usize>,
    pub clutter: Option<f64>,
    /// Connection scale of the clustering filter.
    pub cluster_l: Option<f64>,
    pub out: Option<PathBuf>,
}

fn default_seed() -> u64 {
    1
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentId) -> Self {
        Self {
            experiment,
            estimators: Vec::new(),
            runs: None,
            steps: None,
            seed: default_seed(),
            paper_scale: false,
            particles: None,
            debias_samples: None,
            obs_var: None,
            grid: None,
            samples: None,
            rule: None,
            sensors: None,
            clutter: None,
            cluster_l: None,
            out: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid experiment config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    fn runs_or(&self, full: usize) -> usize {
        self.runs
            .unwrap_or(if self.paper_scale { full } else { (full / 2).max(1) })
    }

    fn estimators_or(&self, default: &[&str]) -> Vec<String> {
        if self.estimators.is_empty() {
            default.iter().map(|s| s.to_string()).collect()
        } else {
            self.estimators.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == Some(0) || self.steps == Some(0) {
            return Err(Error::Config("runs and steps must be at least 1".into()));
        }
        if self.particles == Some(0) || self.samples == Some(0) {
            return Err(Error::Config("particle and sample counts must be at least 1".into()));
        }
        if let Some(g) = &self.grid {
            if g.is_empty() || g.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config("grid must be a non-empty list of finite numbers".into()));
            }
        }
        if let Some(r) = self.obs_var {
            if !(r > 0.0) {
                return Err(Error::Config("obs_var must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Scalar report at each value of a swept parameter.
#[derive(Debug, Clone, Serialize)]
pub struct ScalarSweep {
    pub parameter: String,
    pub points: Vec<(f64, ScalarReport)>,
}

/// Cells of a PoFB grid.
#[derive(Debug, Clone, Serialize)]
pub struct PofbReport {
    pub target: String,
    pub rule: String,
    pub cells: Vec<SweepCell>,
}

/// Multi-target report at each value of a swept parameter.
#[derive(Debug, Clone, Serialize)]
pub struct MttSweep {
    pub parameter: String,
    pub points: Vec<(f64, MttReport)>,
}

/// Outcome of [`run_experiment`].
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ExperimentReport {
    Scalar(ScalarReport),
    ScalarSweep(ScalarSweep),
    Pofb(PofbReport),
    Mtt(MttReport),
    MttSweep(MttSweep),
}

const TABLE_I: &[&str] = &["ekf", "ukf", "sir", "ekpf", "ukpf", "o2"];
const TABLE_II: &[&str] = &[
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
const NOISE_SWEEP_A: &[&str] = &["ekf", "ukf", "sir", "ekpf", "ukpf", "o2", "o2-true-sign", "o2-unbiased"];
const NOISE_SWEEP_UNGM: &[&str] = &[
    "ekf",
    "ukf",
    "sir",
    "gpf",
    "apf",
    "o2",
    "o2-pf-sign",
    "o2-true-sign",
    "o2-unbiased",
];

fn decades(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|e| 10f64.powi(e)).collect()
}

/// Parses a tracker name: an extractor (`kmeans`, `meap`, `o2`) for the
/// single-sensor filter, `t2t[-extractor]`, `oft[-extractor]` or `o2-cluster`.
pub fn mtt_method_by_name(name: &str) -> Result<MttMethod> {
    if name == "o2-cluster" {
        return Ok(MttMethod::Fused {
            fusion: Fusion::O2,
            extractor: Extractor::Meap,
        });
    }
    for (prefix, fusion) in [("t2t", Fusion::T2t), ("oft", Fusion::Oft)] {
        if let Some(rest) = name.strip_prefix(prefix) {
            let extractor = match rest.strip_prefix('-') {
                Some(e) => Extractor::by_name(e)?,
                None if rest.is_empty() => Extractor::Meap,
                None => break,
            };
            return Ok(MttMethod::Fused { fusion, extractor });
        }
    }
    Extractor::by_name(name)
        .map(|extractor| MttMethod::Phd { extractor })
        .map_err(|_| Error::UnknownName {
            kind: "tracker",
            name: name.to_string(),
        })
}

fn scalar_setup(
    cfg: &ExperimentConfig,
    model: ModelKind,
    defaults: &[&str],
    runs: usize,
    steps: usize,
    particles: usize,
) -> ScalarSetup {
    let est = cfg.estimators_or(defaults);
    let names: Vec<&str> = est.iter().map(String::as_str).collect();
    let mut s = ScalarSetup::new(model, &names);
    s.runs = cfg.runs_or(runs);
    s.steps = cfg.steps.unwrap_or(steps);
    s.seed = cfg.seed;
    s.particles = cfg.particles.unwrap_or(particles);
    if let Some(d) = cfg.debias_samples {
        s.debias_samples = d;
    }
    s
}

fn model(id: &str, cfg: &ExperimentConfig) -> Result<ModelKind> {
    let m = ModelKind::by_name(id)?;
    Ok(match cfg.obs_var {
        Some(r) => m.with_obs_var(r),
        None => m,
    })
}

fn scalar_sweep(
    cfg: &ExperimentConfig,
    base: ScalarSetup,
    parameter: &str,
    grid: Vec<f64>,
) -> Result<ExperimentReport> {
    let mut points = Vec::with_capacity(grid.len());
    for x in grid {
        let mut s = base.clone();
        match parameter {
            "obs_var" => s.model = s.model.with_obs_var(x),
            _ => {
                if x < 1.0 || x.fract() != 0.0 {
                    return Err(Error::Config(format!(
                        "particle counts must be positive integers, got {x}"
                    )));
                }
                s.particles = x as usize;
            }
        }
        s.seed = cfg.seed;
        points.push((x, run_scalar(&s)?));
    }
    Ok(ExperimentReport::ScalarSweep(ScalarSweep {
        parameter: parameter.to_string(),
        points,
    }))
}

/// The particle rule defaults to one particle per Monte Carlo sample.
fn pofb_rule(cfg: &ExperimentConfig, samples: usize) -> Result<FusionRule> {
    match cfg.rule.as_deref().unwrap_or("kf") {
        "kf" => Ok(FusionRule::Kf),
        "particle" => Ok(FusionRule::particle(cfg.particles.unwrap_or(samples))),
        other => Err(Error::UnknownName {
            kind: "fusion rule",
            name: other.to_string(),
        }),
    }
}

fn mtt_setup(cfg: &ExperimentConfig, scenario: ScenarioConfig, defaults: &[&str]) -> Result<MttSetup> {
    let methods = cfg
        .estimators_or(defaults)
        .iter()
        .map(|n| mtt_method_by_name(n))
        .collect::<Result<Vec<_>>>()?;
    let mut s = MttSetup::new(scenario, methods);
    s.runs = cfg.runs.unwrap_or(if cfg.paper_scale { 100 } else { 20 });
    s.seed = cfg.seed;
    let ppt = cfg.particles.unwrap_or(if cfg.paper_scale { 1000 } else { 500 });
    s.phd = PhdConfig {
        birth: s.phd.birth.clone(),
        p_s: s.phd.p_s,
        ..PhdConfig::with_particles(ppt)
    };
    if let Some(l) = cfg.cluster_l {
        s.cluster = ClusterParams { l, ..s.cluster };
    }
    if let Some(t) = cfg.steps {
        s.scenario.steps = t;
    }
    Ok(s)
}

fn check_multi(methods: &[MttMethod], sensors: usize) -> Result<()> {
    if sensors < 2
        && methods
            .iter()
            .any(|m| matches!(m, MttMethod::Fused { fusion: Fusion::O2, .. }))
    {
        return Err(Error::Config("o2-cluster needs at least two sensors".into()));
    }
    Ok(())
}

/// Runs the experiment described by `cfg`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    use ExperimentId::*;
    match cfg.experiment {
        ModelA => Ok(ExperimentReport::Scalar(run_scalar(&scalar_setup(
            cfg,
            model("A", cfg)?,
            TABLE_I,
            200,
            60,
            200,
        ))?)),
        Ungm => Ok(ExperimentReport::Scalar(run_scalar(&scalar_setup(
            cfg,
            model("ungm", cfg)?,
            TABLE_II,
            100,
            100,
            100,
        ))?)),
        ModelANoiseSweep => {
            let base = scalar_setup(cfg, model("A", cfg)?, NOISE_SWEEP_A, 100, 60, 200);
            scalar_sweep(cfg, base, "obs_var", cfg.grid.clone().unwrap_or_else(|| decades(-5, 2)))
        }
        ModelBSweep => {
            let mut base = scalar_setup(cfg, model("B", cfg)?, &["kf", "o2"], 200, 500, 100);
            if cfg.paper_scale {
                base.runs = cfg.runs.unwrap_or(1000);
                base.steps = cfg.steps.unwrap_or(1000);
            }
            scalar_sweep(cfg, base, "obs_var", cfg.grid.clone().unwrap_or_else(|| decades(-5, 2)))
        }
        UngmNoiseSweep => {
            let base = scalar_setup(cfg, model("ungm", cfg)?, NOISE_SWEEP_UNGM, 100, 100, 100);
            scalar_sweep(cfg, base, "obs_var", cfg.grid.clone().unwrap_or_else(|| decades(-5, 4)))
        }
        UngmParticleSweep => {
            let base = scalar_setup(
                cfg,
                model("ungm", cfg)?,
                &["sir", "apf", "gpf", "ekpf", "ukpf", "o2-pf-sign"],
                100,
                100,
                100,
            );
            let grid = cfg
                .grid
                .clone()
                .unwrap_or_else(|| vec![20.0, 50.0, 100.0, 200.0, 300.0, 500.0]);
            scalar_sweep(cfg, base, "particles", grid)
        }
        PofbX | PofbY | PofbMin | PofbBiased => {
            let (target, mut grid) = match cfg.experiment {
                PofbX => (PofbTarget::X, SweepGrid::default()),
                PofbY => (PofbTarget::Y, SweepGrid::default()),
                PofbMin => (PofbTarget::Min, SweepGrid::biased_truth()),
                _ => (PofbTarget::X, SweepGrid::biased_truth()),
            };
            if let Some(n) = cfg.samples {
                grid.samples = n;
            }
            if let Some(r) = &cfg.grid {
                grid.r = r.clone();
            }
            let rule = pofb_rule(cfg, grid.samples)?;
            let cells = pofb_sweep(&grid, target, rule, cfg.seed)?;
            Ok(ExperimentReport::Pofb(PofbReport {
                target: format!("{target:?}").to_lowercase(),
                rule: cfg.rule.clone().unwrap_or_else(|| "kf".into()),
                cells,
            }))
        }
        MttCt => {
            let s = mtt_setup(
                cfg,
                ScenarioConfig::ct(1, cfg.clutter.unwrap_or(10.0)),
                &["kmeans", "meap", "o2"],
            )?;
            Ok(ExperimentReport::Mtt(run_mtt(&s)?))
        }
        MttClutterSweep => {
            let grid = cfg
                .grid
                .clone()
                .unwrap_or_else(|| vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0]);
            let mut points = Vec::new();
            for r in grid {
                let s = mtt_setup(cfg, ScenarioConfig::ct(1, r), &["kmeans", "meap", "o2"])?;
                points.push((r, run_mtt(&s)?));
            }
            Ok(ExperimentReport::MttSweep(MttSweep {
                parameter: "clutter".into(),
                points,
            }))
        }
        MttMultisensor => {
            let n = cfg.sensors.unwrap_or(10);
            let s = mtt_setup(
                cfg,
                ScenarioConfig::ct(n, cfg.clutter.unwrap_or(10.0)),
                &["oft", "t2t", "o2-cluster"],
            )?;
            check_multi(&s.methods, n)?;
            Ok(ExperimentReport::Mtt(run_mtt(&s)?))
        }
        MttSensorSweep => {
            let grid = cfg.grid.clone().unwrap_or_else(|| vec![2.0, 5.0, 10.0, 20.0]);
            let mut points = Vec::new();
            for n in grid {
                if n < 2.0 || n.fract() != 0.0 {
                    return Err(Error::Config(format!("sensor counts must be integers >= 2, got {n}")));
                }
                let s = mtt_setup(
                    cfg,
                    ScenarioConfig::ct(n as usize, cfg.clutter.unwrap_or(10.0)),
                    &["o2-cluster", "oft"],
                )?;
                points.push((n, run_mtt(&s)?));
            }
            Ok(ExperimentReport::MttSweep(MttSweep {
                parameter: "sensors".into(),
                points,
            }))
        }
        Ghost => {
            let n = cfg.sensors.unwrap_or(10);
            let s = mtt_setup(
                cfg,
                ScenarioConfig::ghost(n, cfg.clutter.unwrap_or(10.0)),
                &["o2-cluster"],
            )?;
            if s.methods
                .iter()
                .any(|m| !matches!(m, MttMethod::Fused { fusion: Fusion::O2, .. }))
            {
                return Err(Error::Config("the ghost scenario supports only o2-cluster".into()));
            }
            check_multi(&s.methods, n)?;
            Ok(ExperimentReport::Mtt(run_mtt(&s)?))
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Per-step scalar series: `estimator,step,rmse,rmse_abs`.
pub fn write_scalar_csv<W: Write>(report: &ScalarReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["estimator", "step", "rmse", "rmse_abs"])?;
    for e in &report.estimators {
        for (k, (a, b)) in e.rmse.iter().zip(&e.rmse_abs).enumerate() {
            w.write_record([e.name.clone(), (k + 2).to_string(), a.to_string(), b.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Sweep summary: `x,estimator,mean,mean_abs,variance`. Timings are only in
/// the JSON report so that the CSV is reproducible byte for byte.
pub fn write_scalar_sweep_csv<W: Write>(sweep: &ScalarSweep, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([sweep.parameter.as_str(), "estimator", "mean", "mean_abs", "variance"])?;
    for (x, rep) in &sweep.points {
        for e in &rep.estimators {
            w.write_record([
                x.to_string(),
                e.name.clone(),
                e.mean.to_string(),
                e.mean_abs.to_string(),
                e.variance.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes `report.json` and the CSV files of `report` into `dir`; returns
/// the paths written.
pub fn write_report(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let json = dir.join("report.json");
    serde_json::to_writer_pretty(create(&json)?, report)?;
    written.push(json);
    match report {
        ExperimentReport::Scalar(r) => {
            let p = dir.join("rmse.csv");
            write_scalar_csv(r, create(&p)?)?;
            written.push(p);
        }
        ExperimentReport::ScalarSweep(s) => {
            let p = dir.join("sweep.csv");
            write_scalar_sweep_csv(s, create(&p)?)?;
            written.push(p);
        }
        ExperimentReport::Pofb(r) => {
            let p = dir.join("pofb.csv");
            write_sweep_csv(&r.cells, create(&p)?)?;
            written.push(p);
        }
        ExperimentReport::Mtt(r) => {
            for s in &r.series {
                let p = dir.join(format!("mtt-{}.csv", s.name));
                write_mtt_csv(&s.rows, create(&p)?)?;
                written.push(p);
            }
        }
        ExperimentReport::MttSweep(sw) => {
            for (x, r) in &sw.points {
                for s in &r.series {
                    let p = dir.join(format!("mtt-{}-{}{}.csv", s.name, sw.parameter, x));
                    write_mtt_csv(&s.rows, create(&p)?)?;
                    written.push(p);
                }
            }
        }
    }
    Ok(written)
}

/// Log-spaced grid helper re-exported for configs built in code.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    log_grid(lo, hi, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip_and_unknown_fields() {
        let cfg = ExperimentConfig::from_json(r#"{"experiment": "model-a", "runs": 3, "estimators": ["ekf", "o2"]}"#)
            .unwrap();
        assert_eq!(cfg.experiment, ExperimentId::ModelA);
        assert_eq!(cfg.runs, Some(3));
        assert_eq!(cfg.seed, 1);
        let back = ExperimentConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
        assert!(ExperimentConfig::from_json(r#"{"experiment": "model-a", "bogus": 1}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"experiment": "model-z"}"#).is_err());
    }

    #[test]
    fn desk_scale_halves_runs() {
        let mut cfg = ExperimentConfig::new(ExperimentId::ModelA);
        assert_eq!(cfg.runs_or(200), 100);
        cfg.paper_scale = true;
        assert_eq!(cfg.runs_or(200), 200);
        cfg.runs = Some(7);
        assert_eq!(cfg.runs_or(200), 7);
    }

    #[test]
    fn tracker_names() {
        assert_eq!(
            mtt_method_by_name("meap").unwrap(),
            MttMethod::Phd {
                extractor: Extractor::Meap
            }
        );
        assert_eq!(
            mtt_method_by_name("t2t").unwrap(),
            MttMethod::Fused {
                fusion: Fusion::T2t,
                extractor: Extractor::Meap
            }
        );
        assert_eq!(
            mtt_method_by_name("oft-kmeans").unwrap(),
            MttMethod::Fused {
                fusion: Fusion::Oft,
                extractor: Extractor::KMeans
            }
        );
        assert!(mtt_method_by_name("t2tx").is_err());
        assert!(mtt_method_by_name("nope").is_err());
        for m in ["kmeans", "o2", "o2-cluster", "t2t-meap", "oft-o2"] {
            assert_eq!(mtt_method_by_name(m).unwrap().name(), m);
        }
    }

    #[test]
    fn unknown_estimator_is_an_error() {
        let mut cfg = ExperimentConfig::new(ExperimentId::ModelA);
        cfg.estimators = vec!["nope".into()];
        cfg.runs = Some(1);
        assert!(matches!(run_experiment(&cfg), Err(Error::UnknownName { .. })));
    }

    #[test]
    fn scalar_report_files() {
        let mut cfg = ExperimentConfig::new(ExperimentId::ModelA);
        cfg.runs = Some(2);
        cfg.steps = Some(5);
        cfg.particles = Some(20);
        let rep = run_experiment(&cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let files = write_report(&rep, dir.path()).unwrap();
        assert_eq!(files.len(), 2);
        let csv = fs::read_to_string(&files[1]).unwrap();
        assert!(csv.starts_with("estimator,step,rmse,rmse_abs\n"));
        assert_eq!(csv.lines().count(), 1 + 6 * 4);
    }
}
