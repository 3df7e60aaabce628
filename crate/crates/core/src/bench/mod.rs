//! Experiment sweeps: configuration, rumor-set generation, solver runs and
//! CSV/JSON reports.

mod config;
mod experiment;
mod report;
pub mod synthetic;

pub use config::{Algorithm, ConfigLayer, ExperimentConfig, OutputFormat, Sweep, SweepAxis, DEFAULT_NODE_CAP};
pub use experiment::{
    check_fractions, generate_rumor_set, run_experiment, run_on_graph, run_scalability, scalability_on_graph, solve,
};
pub use report::{peak_memory_kb, read_csv, read_json, round6, write_csv, write_json, ReportRow, PERCENTAGE_NOTE};
