use std::time::Instant;

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cluster::{cluster_scans, ClusterParams};
use super::motion::{position, CtState};
use super::ospa::ospa;
use super::phd::{attach_velocity, extract_estimates, Extractor, PhdConfig, SmcPhd};
use super::scenario::{generate_scenario, scan_series, ScanData, Scenario, ScenarioConfig};
use super::sensor::SensorModel;
use crate::prob::RngStream;
use crate::{Error, Result};

/// Estimates and per-step compute time of one tracker over one run.
#[derive(Debug, Clone, Default)]
pub struct TrackResult {
    pub estimates: Vec<Vec<CtState>>,
    pub wall_ms: Vec<f64>,
}

/// Multi-sensor strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fusion {
    /// One filter per sensor, estimates fused afterwards.
    T2t,
    /// One filter on an equivalent sensor with noise `R/N`.
    Oft,
    /// Filter-free clustering of inverted observations.
    O2,
}

impl Fusion {
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "t2t" => Ok(Self::T2t),
            "oft" => Ok(Self::Oft),
            "o2" => Ok(Self::O2),
            _ => Err(Error::UnknownName {
                kind: "fusion strategy",
                name: name.to_string(),
            }),
        }
    }
}

/// Gate for velocity differencing of position-only estimates.
fn velocity_gate(sensor: &SensorModel) -> f64 {
    match sensor.region {
        super::sensor::Region::HalfDisc { .. } => 150.0,
        super::sensor::Region::Square { .. } => 10.0,
    }
}

/// Runs one SMC-PHD filter and applies every extractor to the same updates.
pub fn track_phd(
    scans: &[ScanData],
    sensor: &SensorModel,
    config: &PhdConfig,
    extractors: &[Extractor],
    rng: &mut dyn RngCore,
) -> Result<Vec<TrackResult>> {
    let mut filter = SmcPhd::new(config.clone(), *sensor)?;
    let mut results = vec![TrackResult::default(); extractors.len()];
    let gate = velocity_gate(sensor);
    for scan in scans {
        let t0 = Instant::now();
        let out = filter.step(scan, rng);
        let filter_ms = t0.elapsed().as_secs_f64() * 1e3;
        for (e, res) in extractors.iter().zip(results.iter_mut()) {
            let t1 = Instant::now();
            let mut est = extract_estimates(&out, *e, sensor, config.identify_threshold, rng);
            if *e == Extractor::O2 {
                if let Some(prev) = res.estimates.last() {
                    attach_velocity(prev, &mut est, gate, config.motion.dt);
                }
            }
            res.wall_ms.push(filter_ms + t1.elapsed().as_secs_f64() * 1e3);
            res.estimates.push(est);
        }
    }
    Ok(results)
}

/// Naive track-to-track fusion of per-filter estimate sets: estimates are
/// matched greedily to the nearest group within a 3σ gate of the mapped
/// observation noise (one per filter per group), the best-supported groups
/// are kept up to the rounded average cardinality, and each is averaged.
pub fn fuse_t2t(sets: &[Vec<CtState>], sensor: &SensorModel) -> Vec<CtState> {
    if sets.is_empty() {
        return Vec::new();
    }
    let avg = sets.iter().map(Vec::len).sum::<usize>() as f64 / sets.len() as f64;
    let keep = avg.round() as usize;
    struct Group {
        members: Vec<(usize, CtState)>,
        centroid: [f64; 2],
    }
    let mut groups: Vec<Group> = Vec::new();
    for (f, set) in sets.iter().enumerate() {
        for x in set {
            let p = position(x);
            let c = sensor.mapped_cov(sensor.observe_noiseless(p));
            let gate = 3.0 * (c[0][0].max(c[1][1])).sqrt();
            let best = groups
                .iter()
                .enumerate()
                .filter(|(_, g)| g.members.iter().all(|m| m.0 != f))
                .map(|(i, g)| (i, (g.centroid[0] - p[0]).hypot(g.centroid[1] - p[1])))
                .filter(|(_, d)| *d < gate)
                .min_by(|a, b| a.1.total_cmp(&b.1));
            match best {
                Some((i, _)) => {
                    let g = &mut groups[i];
                    g.members.push((f, *x));
                    let n = g.members.len() as f64;
                    g.centroid = [
                        g.centroid[0] + (p[0] - g.centroid[0]) / n,
                        g.centroid[1] + (p[1] - g.centroid[1]) / n,
                    ];
                }
                None => groups.push(Group {
                    members: vec![(f, *x)],
                    centroid: p,
                }),
            }
        }
    }
    // stable sort keeps creation order among equal support
    groups.sort_by_key(|g| std::cmp::Reverse(g.members.len()));
    groups
        .into_iter()
        .take(keep)
        .map(|g| {
            let n = g.members.len() as f64;
            let mut s = [0.0; 5];
            for (_, x) in &g.members {
                for (a, v) in s.iter_mut().zip(x) {
                    *a += v / n;
                }
            }
            s
        })
        .collect()
}

/// Tracks a multi-sensor scenario with one fusion strategy.
pub fn multisensor_track(
    scenario: &Scenario,
    strategy: Fusion,
    extractor: Extractor,
    phd: &PhdConfig,
    cluster: &ClusterParams,
    rng: &mut dyn RngCore,
) -> Result<TrackResult> {
    let n = scenario.scans.len();
    let sensor = scenario.config.sensor;
    match strategy {
        Fusion::T2t => {
            let mut per_filter = Vec::with_capacity(n);
            for scans in &scenario.scans {
                per_filter.push(track_phd(scans, &sensor, phd, &[extractor], rng)?.remove(0));
            }
            let steps = scenario.truth.len();
            let mut out = TrackResult::default();
            for k in 0..steps {
                let t0 = Instant::now();
                let sets: Vec<Vec<CtState>> = per_filter.iter().map(|r| r.estimates[k].clone()).collect();
                let fused = fuse_t2t(&sets, &sensor);
                let ms: f64 = per_filter.iter().map(|r| r.wall_ms[k]).sum();
                out.wall_ms.push(ms + t0.elapsed().as_secs_f64() * 1e3);
                out.estimates.push(fused);
            }
            Ok(out)
        }
        Fusion::Oft => {
            if n == 1 {
                return Ok(track_phd(&scenario.scans[0], &sensor, phd, &[extractor], rng)?.remove(0));
            }
            let equivalent = sensor.fused_equivalent(n);
            let scans = scan_series(&scenario.truth, &equivalent, rng);
            Ok(track_phd(&scans, &equivalent, phd, &[extractor], rng)?.remove(0))
        }
        Fusion::O2 => {
            let sensors = vec![sensor; n];
            let gate = velocity_gate(&sensor);
            let mut out = TrackResult::default();
            for k in 0..scenario.truth.len() {
                let t0 = Instant::now();
                let scans: Vec<&ScanData> = scenario.scans.iter().map(|s| &s[k]).collect();
                let mut est: Vec<CtState> = cluster_scans(&scans, &sensors, cluster)?
                    .into_iter()
                    .map(|p| [p[0], 0.0, p[1], 0.0, 0.0])
                    .collect();
                if let Some(prev) = out.estimates.last() {
                    attach_velocity(prev, &mut est, gate, 1.0);
                }
                out.wall_ms.push(t0.elapsed().as_secs_f64() * 1e3);
                out.estimates.push(est);
            }
            Ok(out)
        }
    }
}

/// A tracker scored by [`run_mtt`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MttMethod {
    /// Single SMC-PHD filter on the first sensor.
    Phd { extractor: Extractor },
    /// Multi-sensor strategy.
    Fused { fusion: Fusion, extractor: Extractor },
}

impl MttMethod {
    pub fn name(&self) -> String {
        match self {
            Self::Phd { extractor } => extractor.name().to_string(),
            Self::Fused { fusion: Fusion::O2, .. } => "o2-cluster".into(),
            Self::Fused { fusion, extractor } => {
                let f = if *fusion == Fusion::T2t { "t2t" } else { "oft" };
                format!("{f}-{}", extractor.name())
            }
        }
    }
}

/// Monte Carlo multi-target experiment.
#[derive(Debug, Clone)]
pub struct MttSetup {
    pub scenario: ScenarioConfig,
    pub phd: PhdConfig,
    pub cluster: ClusterParams,
    pub methods: Vec<MttMethod>,
    pub runs: usize,
    pub seed: u64,
    pub ospa_c: f64,
    pub ospa_p: f64,
}

impl MttSetup {
    pub fn new(scenario: ScenarioConfig, methods: Vec<MttMethod>) -> Self {
        let phd = PhdConfig {
            p_s: scenario.p_s,
            birth: scenario.birth.clone(),
            ..PhdConfig::default()
        };
        Self {
            scenario,
            phd,
            cluster: ClusterParams::default(),
            methods,
            runs: 20,
            seed: 1,
            ospa_c: 100.0,
            ospa_p: 2.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        if self.runs == 0 || self.methods.is_empty() {
            return Err(Error::InvalidInput("need at least one run and one method".into()));
        }
        if !(self.ospa_c > 0.0) || !(self.ospa_p >= 1.0) {
            return Err(Error::InvalidInput("OSPA needs c > 0 and p ≥ 1".into()));
        }
        Ok(())
    }
}

/// One CSV row: a tracker's score at one step of one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MttRow {
    pub run: usize,
    pub step: usize,
    pub ospa: f64,
    pub card_true: usize,
    pub card_est: usize,
    pub wall_ms: f64,
}

/// Rows and summaries of one tracker.
#[derive(Debug, Clone, Serialize)]
pub struct MttSeries {
    pub name: String,
    #[serde(skip)]
    pub rows: Vec<MttRow>,
    pub mean_ospa: f64,
    /// Mean absolute cardinality error per step.
    pub card_mae: f64,
    pub mean_wall_ms: f64,
    pub ospa_by_step: Vec<f64>,
    pub card_est_by_step: Vec<f64>,
    pub card_true_by_step: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MttReport {
    pub runs: usize,
    pub steps: usize,
    pub seed: u64,
    pub series: Vec<MttSeries>,
}

impl MttReport {
    pub fn get(&self, name: &str) -> Option<&MttSeries> {
        self.series.iter().find(|s| s.name == name)
    }
}

fn run_once(setup: &MttSetup, run: usize) -> Result<Vec<Vec<MttRow>>> {
    let stream = |role| RngStream::new(setup.seed, RngStream::run_stream(run as u64, role));
    let scenario = generate_scenario(&setup.scenario, &mut stream(0))?;
    let mut results: Vec<Option<TrackResult>> = vec![None; setup.methods.len()];

    let phd_idx: Vec<usize> = (0..setup.methods.len())
        .filter(|&i| matches!(setup.methods[i], MttMethod::Phd { .. }))
        .collect();
    if !phd_idx.is_empty() {
        let extractors: Vec<Extractor> = phd_idx
            .iter()
            .map(|&i| match setup.methods[i] {
                MttMethod::Phd { extractor } => extractor,
                MttMethod::Fused { .. } => unreachable!(),
            })
            .collect();
        let out = track_phd(
            &scenario.scans[0],
            &scenario.config.sensor,
            &setup.phd,
            &extractors,
            &mut stream(1),
        )?;
        for (i, r) in phd_idx.into_iter().zip(out) {
            results[i] = Some(r);
        }
    }
    for (i, m) in setup.methods.iter().enumerate() {
        if let MttMethod::Fused { fusion, extractor } = m {
            let role = 2 + i as u64;
            results[i] = Some(multisensor_track(
                &scenario,
                *fusion,
                *extractor,
                &setup.phd,
                &setup.cluster,
                &mut stream(role),
            )?);
        }
    }

    Ok(results
        .into_iter()
        .map(|r| {
            let r = r.expect("every method ran");
            r.estimates
                .iter()
                .zip(&r.wall_ms)
                .zip(&scenario.truth)
                .enumerate()
                .map(|(k, ((est, ms), truth))| MttRow {
                    run,
                    step: k + 1,
                    ospa: ospa(truth, est, setup.ospa_c, setup.ospa_p),
                    card_true: truth.len(),
                    card_est: est.len(),
                    wall_ms: *ms,
                })
                .collect()
        })
        .collect())
}

/// Runs every method on the same scenarios, runs in parallel.
pub fn run_mtt(setup: &MttSetup) -> Result<MttReport> {
    setup.validate()?;
    let per_run: Vec<Vec<Vec<MttRow>>> = (0..setup.runs)
        .into_par_iter()
        .map(|run| run_once(setup, run))
        .collect::<Result<_>>()?;
    let steps = setup.scenario.steps;
    let series = setup
        .methods
        .iter()
        .enumerate()
        .map(|(m, method)| {
            let rows: Vec<MttRow> = per_run.iter().flat_map(|r| r[m].iter().copied()).collect();
            let n = rows.len() as f64;
            let by_step = |f: &dyn Fn(&MttRow) -> f64| -> Vec<f64> {
                let mut acc = vec![0.0; steps];
                for r in &rows {
                    acc[r.step - 1] += f(r) / setup.runs as f64;
                }
                acc
            };
            MttSeries {
                name: method.name(),
                mean_ospa: rows.iter().map(|r| r.ospa).sum::<f64>() / n,
                card_mae: rows
                    .iter()
                    .map(|r| (r.card_est as f64 - r.card_true as f64).abs())
                    .sum::<f64>()
                    / n,
                mean_wall_ms: rows.iter().map(|r| r.wall_ms).sum::<f64>() / n,
                ospa_by_step: by_step(&|r| r.ospa),
                card_est_by_step: by_step(&|r| r.card_est as f64),
                card_true_by_step: by_step(&|r| r.card_true as f64),
                rows,
            }
        })
        .collect();
    Ok(MttReport {
        runs: setup.runs,
        steps,
        seed: setup.seed,
        series,
    })
}

/// Writes `run,step,ospa,card_true,card_est,wall_ms` rows.
pub fn write_mtt_csv<W: std::io::Write>(rows: &[MttRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mtt::scenario::BirthModel;

    #[test]
    fn one_sensor_fusions_coincide() {
        let mut cfg = ScenarioConfig::ct(1, 2.0);
        cfg.steps = 15;
        let sc = generate_scenario(&cfg, &mut RngStream::new(3, 0)).unwrap();
        let phd = PhdConfig::with_particles(100);
        let cl = ClusterParams::default();
        let a = multisensor_track(&sc, Fusion::T2t, Extractor::Meap, &phd, &cl, &mut RngStream::new(4, 0)).unwrap();
        let b = multisensor_track(&sc, Fusion::Oft, Extractor::Meap, &phd, &cl, &mut RngStream::new(4, 0)).unwrap();
        assert_eq!(a.estimates, b.estimates);
    }

    #[test]
    fn t2t_drops_surplus() {
        let sensor = SensorModel::range_bearing(20.0, 0.03, 0.0);
        let x = [0.0, 0.0, 1000.0, 0.0, 0.0];
        let y = [4.0, 0.0, 1002.0, 0.0, 0.0];
        let ghost = [-800.0, 0.0, 300.0, 0.0, 0.0];
        let fused = fuse_t2t(&[vec![x], vec![y, ghost], vec![x]], &sensor);
        assert_eq!(fused.len(), 1);
        assert!((fused[0][0] - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn rows_cover_every_step_and_run() {
        let mut cfg = ScenarioConfig::ct(3, 2.0);
        cfg.steps = 8;
        cfg.birth = BirthModel::default();
        let mut setup = MttSetup::new(
            cfg,
            vec![
                MttMethod::Fused {
                    fusion: Fusion::O2,
                    extractor: Extractor::Meap,
                },
                MttMethod::Phd {
                    extractor: Extractor::Meap,
                },
            ],
        );
        setup.runs = 2;
        setup.phd = PhdConfig {
            birth: setup.phd.birth.clone(),
            ..PhdConfig::with_particles(100)
        };
        let rep = run_mtt(&setup).unwrap();
        assert_eq!(rep.series.len(), 2);
        assert_eq!(rep.series[0].name, "o2-cluster");
        assert_eq!(rep.series[0].rows.len(), 16);
        let mut buf = Vec::new();
        write_mtt_csv(&rep.series[1].rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("run,step,ospa,card_true,card_est,wall_ms\n"));
        assert_eq!(text.lines().count(), 17);
        let again = run_mtt(&setup).unwrap();
        for (a, b) in rep.series[1].rows.iter().zip(&again.series[1].rows) {
            assert_eq!((a.ospa, a.card_est), (b.ospa, b.card_est));
        }
    }
}
