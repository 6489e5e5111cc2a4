//! Configuration, artifacts and named experiments.

pub mod artifact;
pub mod config;
pub mod presets;

pub use artifact::{fmt_num, json_artifact, write_csv, write_csv_file, write_json_file, write_table, FORMAT_VERSION};
pub use config::{DatumKind, RunConfig};
pub use presets::{preset, run_experiment, run_preset, self_convergence, ExperimentPreset, ExperimentRun, PresetName, SelfConvergence};
