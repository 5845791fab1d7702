//! Long-format plot data (`x,series,value`) for the reproduced figures.

use std::io::Write;

use serde::Serialize;

use super::experiment::{run_experiment, ExperimentConfig, ExperimentId, ExperimentReport};
use crate::error::{Error, Result};
use crate::mtt::MttReport;
use crate::pofb::SweepCell;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotPoint {
    pub x: f64,
    pub series: String,
    pub value: f64,
}

impl PlotPoint {
    fn new(x: f64, series: impl Into<String>, value: f64) -> Self {
        Self {
            x,
            series: series.into(),
            value,
        }
    }
}

struct Figure {
    id: &'static str,
    about: &'static str,
    experiment: ExperimentId,
    rule: Option<&'static str>,
}

const FIGURES: &[Figure] = &[
    fig("fig2", "growth model RMSE per step", ExperimentId::Ungm, None),
    fig(
        "fig5",
        "PoFB vs prior estimate, KF rule, unbiased truth",
        ExperimentId::PofbX,
        None,
    ),
    fig(
        "fig6",
        "PoFB vs observation estimate, KF rule",
        ExperimentId::PofbY,
        None,
    ),
    fig(
        "fig8",
        "PoFB vs better estimate, biased truth",
        ExperimentId::PofbMin,
        None,
    ),
    fig(
        "fig9",
        "PoFB vs prior estimate, biased truth",
        ExperimentId::PofbBiased,
        None,
    ),
    fig(
        "fig10",
        "PoFB vs prior estimate, particle rule",
        ExperimentId::PofbX,
        Some("particle"),
    ),
    fig(
        "fig11",
        "PoFB vs prior estimate, particle rule, biased truth",
        ExperimentId::PofbBiased,
        Some("particle"),
    ),
    fig(
        "fig12",
        "Model B mean RMSE vs observation noise",
        ExperimentId::ModelBSweep,
        None,
    ),
    fig(
        "fig15",
        "growth model RMSE vs particles",
        ExperimentId::UngmParticleSweep,
        None,
    ),
    fig(
        "fig16",
        "growth model time (ms/run) vs particles",
        ExperimentId::UngmParticleSweep,
        None,
    ),
    fig(
        "fig17",
        "growth model RMSE vs observation noise",
        ExperimentId::UngmNoiseSweep,
        None,
    ),
    fig(
        "fig18",
        "Model A RMSE vs observation noise",
        ExperimentId::ModelANoiseSweep,
        None,
    ),
    fig("fig21", "single-sensor OSPA per step", ExperimentId::MttCt, None),
    fig(
        "fig22",
        "single-sensor mean OSPA vs clutter rate",
        ExperimentId::MttClutterSweep,
        None,
    ),
    fig(
        "fig25",
        "multi-sensor cardinality per step",
        ExperimentId::MttMultisensor,
        None,
    ),
    fig(
        "fig26",
        "multi-sensor OSPA per step",
        ExperimentId::MttMultisensor,
        None,
    ),
    fig("fig27", "mean OSPA vs sensor count", ExperimentId::MttSensorSweep, None),
    fig("fig31", "ghost cardinality per step", ExperimentId::Ghost, None),
    fig("fig32", "ghost OSPA per step", ExperimentId::Ghost, None),
];

const fn fig(id: &'static str, about: &'static str, experiment: ExperimentId, rule: Option<&'static str>) -> Figure {
    Figure {
        id,
        about,
        experiment,
        rule,
    }
}

/// `(id, description)` of every supported figure.
pub fn figure_ids() -> Vec<(&'static str, &'static str)> {
    FIGURES.iter().map(|f| (f.id, f.about)).collect()
}

fn lookup(id: &str) -> Result<&'static Figure> {
    FIGURES.iter().find(|f| f.id == id).ok_or_else(|| Error::UnknownName {
        kind: "figure",
        name: id.to_string(),
    })
}

/// Experiment config behind figure `id`, to be adjusted before
/// [`emit_plotdata`].
pub fn figure_config(id: &str) -> Result<ExperimentConfig> {
    let f = lookup(id)?;
    let mut cfg = ExperimentConfig::new(f.experiment);
    cfg.rule = f.rule.map(str::to_string);
    Ok(cfg)
}

fn pofb_points(cells: &[SweepCell], with_m: bool) -> Vec<PlotPoint> {
    cells
        .iter()
        .map(|c| {
            let series = if with_m {
                format!("p={} m={}", c.p, c.m)
            } else {
                format!("p={}", c.p)
            };
            PlotPoint::new(c.r, series, c.pofb)
        })
        .collect()
}

fn per_step(report: &MttReport, card: bool) -> Vec<PlotPoint> {
    let mut out = Vec::new();
    if card {
        if let Some(s) = report.series.first() {
            for (k, v) in s.card_true_by_step.iter().enumerate() {
                out.push(PlotPoint::new((k + 1) as f64, "truth", *v));
            }
        }
    }
    for s in &report.series {
        let values = if card { &s.card_est_by_step } else { &s.ospa_by_step };
        for (k, v) in values.iter().enumerate() {
            out.push(PlotPoint::new((k + 1) as f64, s.name.clone(), *v));
        }
    }
    out
}

/// Converts an experiment report to the points of figure `id`.
pub fn plot_points(id: &str, report: &ExperimentReport) -> Result<Vec<PlotPoint>> {
    let mismatch = || Error::Config(format!("report kind does not match figure {id}"));
    let points = match (id, report) {
        ("fig2", ExperimentReport::Scalar(r)) => r
            .estimators
            .iter()
            .flat_map(|e| {
                e.rmse
                    .iter()
                    .enumerate()
                    .map(move |(k, v)| PlotPoint::new((k + 2) as f64, e.name.clone(), *v))
            })
            .collect(),
        ("fig5" | "fig6" | "fig10", ExperimentReport::Pofb(r)) => pofb_points(&r.cells, false),
        ("fig8" | "fig9" | "fig11", ExperimentReport::Pofb(r)) => pofb_points(&r.cells, true),
        ("fig12" | "fig15" | "fig16" | "fig17" | "fig18", ExperimentReport::ScalarSweep(s)) => s
            .points
            .iter()
            .flat_map(|(x, r)| {
                r.estimators.iter().map(move |e| {
                    let v = if id == "fig16" {
                        e.wall_ms / r.runs.max(1) as f64
                    } else {
                        e.mean
                    };
                    PlotPoint::new(*x, e.name.clone(), v)
                })
            })
            .collect(),
        ("fig21" | "fig26" | "fig32", ExperimentReport::Mtt(r)) => per_step(r, false),
        ("fig25" | "fig31", ExperimentReport::Mtt(r)) => per_step(r, true),
        ("fig22" | "fig27", ExperimentReport::MttSweep(s)) => s
            .points
            .iter()
            .flat_map(|(x, r)| {
                r.series
                    .iter()
                    .map(move |m| PlotPoint::new(*x, m.name.clone(), m.mean_ospa))
            })
            .collect(),
        _ => return Err(mismatch()),
    };
    Ok(points)
}

/// Runs `cfg` (normally from [`figure_config`]) and returns figure `id`.
pub fn emit_plotdata(id: &str, cfg: &ExperimentConfig) -> Result<Vec<PlotPoint>> {
    let f = lookup(id)?;
    if cfg.experiment != f.experiment {
        return Err(Error::Config(format!(
            "figure {id} needs experiment {:?}, got {:?}",
            f.experiment, cfg.experiment
        )));
    }
    plot_points(id, &run_experiment(cfg)?)
}

pub fn write_plot_csv<W: Write>(points: &[PlotPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for p in points {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_figure_has_a_config() {
        for (id, _) in figure_ids() {
            let cfg = figure_config(id).unwrap();
            assert_eq!(cfg.experiment, lookup(id).unwrap().experiment);
        }
        assert!(figure_config("fig99").is_err());
    }

    #[test]
    fn pofb_figure_long_format() {
        let mut cfg = figure_config("fig5").unwrap();
        cfg.samples = Some(1000);
        cfg.grid = Some(vec![0.1, 10.0]);
        let pts = emit_plotdata("fig5", &cfg).unwrap();
        assert_eq!(pts.len(), 2 * 9);
        let mut buf = Vec::new();
        write_plot_csv(&pts, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("x,series,value\n"));
        assert!(text.contains("0.1,p=0,"));
    }

    #[test]
    fn mismatched_report_is_rejected() {
        let cfg = figure_config("fig5").unwrap();
        assert!(emit_plotdata("fig12", &cfg).is_err());
    }
}
