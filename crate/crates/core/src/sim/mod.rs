//! Monte Carlo harness: geometry and channel draws, experiment specs and
//! presets, the parallel driver and CSV/JSON emission.

pub mod geometry;
pub mod output;
pub mod presets;
pub mod run;
pub mod spec;

pub use geometry::{draw_channels, draw_geometry, path_loss_db, trial_rng, GeometrySample, GeometrySpec, PathLoss};
pub use output::{build_table, format_number, meta_json, write_outputs, Cell, Table};
pub use presets::{preset, PRESET_NAMES};
pub use run::{run_experiment, ExperimentResult, SchemeRun, TrialRecord, TrialStatus};
pub use spec::{ExperimentKind, ExperimentSpec, NetworkSpec, Problem, Sweep, SweepParameter};
