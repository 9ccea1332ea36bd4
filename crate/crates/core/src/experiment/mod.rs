//! Reproducible Monte Carlo experiments over the path, counting, fitting and bound
//! modules, with CSV or JSON results and a JSON manifest sidecar.

mod config;
mod run;

pub use config::{
    parse_args, parse_config_text, ExperimentConfig, Mode, OutputFormat, ParsedConfig, PathFamily,
    DEFAULT_J, DEFAULT_N_MAX, DEFAULT_N_MIN, DEFAULT_RESOLUTION, DEFAULT_TOLERANCE, DEFAULT_TRIALS,
    WINDOW_GUARD,
};
pub use run::{
    execute, resolve_workers, run, CompareRow, CountRow, DimensionRow, ExperimentManifest, Results,
    RunReport, SimulateRow, SEED_DERIVATION, WORKERS_ENV,
};
