//! Experiment orchestration.

pub mod experiment;
pub mod plot;
pub mod scalar;

pub use experiment::{
    mtt_method_by_name, run_experiment, write_report, ExperimentConfig, ExperimentId, ExperimentReport, MttSweep,
    PofbReport, ScalarSweep,
};
pub use plot::{emit_plotdata, figure_config, figure_ids, plot_points, write_plot_csv, PlotPoint};
pub use scalar::{build_estimator, initial_condition, run_scalar, EstimatorSeries, ScalarReport, ScalarSetup};
