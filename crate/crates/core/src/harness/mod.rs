//! Experiment harness: configs, CSV transcripts, canned experiments and
//! bound tables. The CLI in `main.rs` is a thin wrapper over this module.

pub mod config;
pub mod csv;
pub mod experiments;

pub use config::ExperimentConfig;
pub use experiments::{
    build_problem, canned, canned_experiments, emit_bound_tables, execute_run, list_experiments,
    run_experiment, CannedExperiment, ExperimentSummary,
};

/// Environment variable naming the default output directory.
pub const OUT_ENV_VAR: &str = "SIGNDESC_OUT";

/// Output directory resolution: explicit flag, then config, then the
/// environment variable, then ./signdesc-out.
pub fn resolve_out_dir(
    flag: Option<&std::path::Path>,
    config: Option<&std::path::Path>,
) -> std::path::PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Some(p) = config {
        return p.to_path_buf();
    }
    if let Ok(p) = std::env::var(OUT_ENV_VAR) {
        if !p.is_empty() {
            return p.into();
        }
    }
    "signdesc-out".into()
}
