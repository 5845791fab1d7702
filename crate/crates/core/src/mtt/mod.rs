//! Multi-target tracking: turning targets seen by range-bearing radars,
//! SMC-PHD filtering with three estimate extractors, OSPA scoring, and
//! filter-free clustering of multi-sensor observations.

pub mod cluster;
pub mod motion;
pub mod ospa;
pub mod phd;
pub mod scenario;
pub mod sensor;
pub mod track;

pub use cluster::{cluster_clutter_filter, cluster_scans, map_scans, ClusterParams, ClusterPoint};
pub use motion::{ct_predict, ct_transition, position, CtNoise, CtState};
pub use ospa::{hungarian, ospa, ospa_points};
pub use phd::{extract_estimates, smc_phd_step, Extractor, PhdConfig, PhdOutput, SmcPhd};
pub use scenario::{generate_scenario, scan_series, BirthModel, ScanData, Scenario, ScenarioConfig, ScenarioKind};
pub use sensor::{invert_range_bearing, observe_range_bearing, Obs, Region, SensorKind, SensorModel};
pub use track::{
    fuse_t2t, multisensor_track, run_mtt, track_phd, write_mtt_csv, Fusion, MttMethod, MttReport, MttRow, MttSeries,
    MttSetup, TrackResult,
};
