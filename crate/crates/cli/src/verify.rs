//! Re-checking a completed run from its directory.

use std::path::Path;

use scramble_core::dynamics::propagate;
use scramble_core::models::DisorderEnsemble;
use scramble_core::observables::{coherence, mutual_information};
use scramble_core::qcore::linalg::max_abs_diff;
use scramble_core::DensityMatrix;

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};
use crate::manifest::{sha256_hex, RunManifest};
use crate::output::{fmt_float, series_file_name, series_header, states_file_name, LEDGER_FILE, TTM_FILE};
use crate::runner::{cell_setup, StoredStates};

/// Agreement required between stored and regenerated realization-0 states.
pub const REGENERATION_TOL: f64 = 1e-8;
const QUANTIFIER_TOL: f64 = 1e-10;
const LEDGER_TOL: f64 = 1e-8;
const FT_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    fn push(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn read(dir: &Path, name: &str) -> CliResult<Vec<u8>> {
    let path = dir.join(name);
    std::fs::read(&path).map_err(|e| CliError::io(&path, e))
}

/// Check file hashes, CSV schemas, the stored states and their quantifiers,
/// and regenerate realization 0 at the stored times.
pub fn verify_run(dir: &Path) -> CliResult<VerifyReport> {
    let (manifest, _) = RunManifest::read(dir)?;
    let config = &manifest.config;
    config.validate()?;
    let mut report = VerifyReport::default();

    for entry in &manifest.files {
        match read(dir, &entry.name) {
            Ok(bytes) => {
                let ok = sha256_hex(&bytes) == entry.sha256;
                report.push(format!("hash {}", entry.name), ok, if ok { "" } else { "content differs from manifest" });
            }
            Err(e) => report.push(format!("hash {}", entry.name), false, e.to_string()),
        }
    }

    for &gamma in &config.gammas {
        let name = series_file_name(gamma);
        match read(dir, &name) {
            Ok(bytes) => {
                let (ok, detail) = check_series_schema(config, &bytes);
                report.push(format!("schema {name}"), ok, detail);
            }
            Err(e) => report.push(format!("schema {name}"), false, e.to_string()),
        }
        let name = states_file_name(gamma);
        let stored: StoredStates = match read(dir, &name).and_then(|b| {
            serde_json::from_slice(&b).map_err(|e| CliError::Input(format!("{name}: {e}")))
        }) {
            Ok(s) => s,
            Err(e) => {
                report.push(format!("states {name}"), false, e.to_string());
                continue;
            }
        };
        check_states(config, &manifest, &stored, &mut report)?;
    }

    if config.thermolab.is_some() {
        for (file, col, tol) in [(LEDGER_FILE, "residual", LEDGER_TOL), (LEDGER_FILE, "residual_joint", LEDGER_TOL), (TTM_FILE, "ft_deviation", FT_TOL)] {
            let (ok, detail) = match read(dir, file) {
                Ok(bytes) => column_max(&bytes, col).map_or_else(
                    |e| (false, e),
                    |m| (m < tol, format!("max |{col}| = {m:e}")),
                ),
                Err(e) => (false, e.to_string()),
            };
            report.push(format!("{file} {col}"), ok, detail);
        }
    }
    Ok(report)
}

fn check_series_schema(config: &ExperimentConfig, bytes: &[u8]) -> (bool, String) {
    let mut rdr = csv::Reader::from_reader(bytes);
    let header: Vec<String> = match rdr.headers() {
        Ok(h) => h.iter().map(str::to_string).collect(),
        Err(e) => return (false, e.to_string()),
    };
    if header != series_header(config) {
        return (false, format!("unexpected columns {header:?}"));
    }
    let grid = scramble_core::dynamics::uniform_grid(config.time.t_end, config.time.n_points)
        .expect("validated config");
    let mut rows = 0;
    for (k, rec) in rdr.records().enumerate() {
        let rec = match rec {
            Ok(r) => r,
            Err(e) => return (false, e.to_string()),
        };
        if grid.get(k).map(|&t| fmt_float(t)).as_deref() != rec.get(0) {
            return (false, format!("row {k}: time does not match the configured grid"));
        }
        if rec.iter().any(|v| v.parse::<f64>().map_or(true, |x| !x.is_finite())) {
            return (false, format!("row {k}: non-numeric value"));
        }
        rows += 1;
    }
    if rows != grid.len() {
        return (false, format!("{rows} rows, expected {}", grid.len()));
    }
    (true, format!("{rows} rows"))
}

fn column_max(bytes: &[u8], col: &str) -> Result<f64, String> {
    let mut rdr = csv::Reader::from_reader(bytes);
    let idx = rdr
        .headers()
        .map_err(|e| e.to_string())?
        .iter()
        .position(|h| h == col)
        .ok_or_else(|| format!("missing column {col}"))?;
    let mut worst = 0.0_f64;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        let v: f64 = rec[idx].parse().map_err(|_| format!("bad value in {col}"))?;
        worst = worst.max(v.abs());
    }
    Ok(worst)
}

fn check_states(
    config: &ExperimentConfig,
    manifest: &RunManifest,
    stored: &StoredStates,
    report: &mut VerifyReport,
) -> CliResult<()> {
    let label = format!("gamma {}", stored.gamma);
    let mut states = Vec::with_capacity(stored.states.len());
    for s in &stored.states {
        match s.matrix().and_then(|m| {
            DensityMatrix::new(m).map_err(|e| CliError::Invariant(format!("t = {}: {e}", s.t)))
        }) {
            Ok(rho) => states.push(rho),
            Err(e) => {
                report.push(format!("{label}: stored states are density matrices"), false, e.to_string());
                return Ok(());
            }
        }
    }
    report.push(format!("{label}: stored states are density matrices"), true, format!("{} states", states.len()));

    let part = config.partition()?;
    let base = config.model_spec(0)?;
    let ensemble = DisorderEnsemble::new(base, config.ensemble.n_realizations, config.ensemble.master_seed);
    let spec = ensemble.realization(0);
    let seed_ok = spec.seed == stored.realization_seed && manifest.realization_seeds.first() == Some(&spec.seed);
    report.push(format!("{label}: realization seed"), seed_ok, format!("seed {}", spec.seed));

    let (l, rho0) = cell_setup(config, &spec, stored.gamma, None)
        .map_err(|e| CliError::Input(format!("{label}: {e}")))?;
    let basis = l.basis().clone();
    let (Some(first), Some(first_stored)) = (states.first(), stored.states.first()) else {
        return Ok(());
    };
    let quantities = |rho: &DensityMatrix| -> CliResult<(f64, f64)> {
        let f = |e: scramble_core::Error| CliError::Input(format!("{label}: {e}"));
        Ok((mutual_information(rho, &part).map_err(f)?, coherence(rho, &basis).map_err(f)?))
    };
    let (i0, c0) = quantities(first)?;
    let mut worst = 0.0_f64;
    for (rho, s) in states.iter().zip(&stored.states) {
        let (i, c) = quantities(rho)?;
        worst = worst.max((i - i0 - s.delta_i).abs()).max((c - c0 - s.delta_c).abs());
    }
    report.push(
        format!("{label}: quantifiers recomputed from stored states"),
        worst < QUANTIFIER_TOL,
        format!("max deviation {worst:e}"),
    );

    let times: Vec<f64> = stored.states.iter().map(|s| s.t).collect();
    let regen = if first_stored.t == 0.0 {
        propagate(&rho0, &l, &times).map_err(|e| CliError::Invariant(format!("{label}: {e}")))?
    } else {
        report.push(format!("{label}: regeneration"), false, "first stored state is not at t = 0");
        return Ok(());
    };
    let dev = regen
        .states
        .iter()
        .zip(&states)
        .map(|(a, b)| max_abs_diff(a.matrix(), b.matrix()))
        .fold(0.0, f64::max);
    report.push(
        format!("{label}: realization 0 regenerated"),
        dev < REGENERATION_TOL,
        format!("max entrywise deviation {dev:e}"),
    );
    Ok(())
}
