//! Scenario generation, experiment orchestration and result export.

mod emit;
mod generator;
mod runner;
mod table;

pub use emit::{emit, render_svg, write_csv, OutputFormat};
pub use generator::{build_scenario, generate_scenario, GeneratorSpec};
pub use runner::{
    experiment_convergence, experiment_scaling, experiment_sweep_b, experiment_sweep_d, ExperimentResult,
    ExperimentSettings, PlotSource, PlotSpec, SweepParameter, CENTRALIZED_CONVENTION, CENTRALIZED_MESSAGES_PER_USER,
};
pub use table::{linear_fit, mean, Cell, Column, ColumnType, LinearFit, Table};
