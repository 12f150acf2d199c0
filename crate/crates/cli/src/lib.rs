//! Command-line orchestration for `scramble-core`: strict TOML experiment
//! configs, parallel ensemble runs, CSV output with a reproducibility
//! manifest, run verification and plot-data export.

pub mod config;
pub mod error;
pub mod manifest;
pub mod output;
pub mod plotdata;
pub mod presets;
pub mod runner;
pub mod verify;

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

pub use config::{load_config, parse_config, ExperimentConfig, LoadedConfig};
pub use error::{CliError, CliResult};
pub use manifest::RunManifest;
pub use runner::RunOptions;

/// Where a run writes: the explicit override, the config's `output_dir`, or
/// `runs/<model>-<run id prefix>`.
pub fn output_dir_for(loaded: &LoadedConfig, explicit: Option<&Path>) -> PathBuf {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| loaded.output_dir.clone())
        .unwrap_or_else(|| {
            let id = manifest::run_id(&loaded.config);
            PathBuf::from("runs").join(format!("{}-{}", loaded.config.model.kind.name(), &id[..12]))
        })
}

/// Execute a loaded config and publish the run directory. Nothing is written
/// unless every cell succeeded.
pub fn run_experiment(loaded: &LoadedConfig, dir: &Path, opts: &RunOptions) -> CliResult<RunManifest> {
    let started = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    let out = runner::execute(&loaded.config, opts)?;
    let files = output::render_files(&loaded.config, &out);
    let manifest = output::build_manifest(&loaded.config, &loaded.defaults_applied, &out, &files, started);
    output::publish(dir, &manifest, &files)?;
    Ok(manifest)
}
