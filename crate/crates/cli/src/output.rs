//! Rendering of run results to CSV/JSON and atomic publication of a run
//! directory.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::config::{ExperimentConfig, Observable};
use crate::error::{CliError, CliResult};
use crate::manifest::{run_id, sha256_hex, FileEntry, RunManifest, Software, MANIFEST_FILE, MANIFEST_SCHEMA};
use crate::runner::{thermolab_seed, GammaResult, RunOutput, ThermolabResult};

pub const LEDGER_FILE: &str = "thermolab_ledger.csv";
pub const TTM_FILE: &str = "thermolab_ttm.csv";
pub const WITNESS_FILE: &str = "thermolab_witness.csv";

pub fn series_file_name(gamma: f64) -> String {
    format!("series_gamma_{gamma}.csv")
}

pub fn states_file_name(gamma: f64) -> String {
    format!("states_gamma_{gamma}.json")
}

/// Full precision (17 significant digits) scientific notation.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Column names of a series CSV for the selected observables.
pub fn series_header(config: &ExperimentConfig) -> Vec<&'static str> {
    let mut cols = vec!["t"];
    if config.wants(Observable::DeltaI) {
        cols.extend(["mean_dI", "se_dI"]);
    }
    if config.wants(Observable::DeltaC) {
        cols.extend(["mean_dC", "se_dC"]);
    }
    if config.wants(Observable::HaarOtoc) {
        cols.extend(["mean_dO", "se_dO"]);
    }
    cols
}

fn to_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("writing to memory");
    for row in rows {
        w.write_record(&row).expect("writing to memory");
    }
    w.into_inner().expect("writing to memory")
}

pub fn render_series(config: &ExperimentConfig, res: &GammaResult) -> Vec<u8> {
    let s = &res.series;
    let stats = s.stats.as_ref().expect("ensemble series carry statistics");
    let rows = (0..s.times.len()).map(|k| {
        let mut row = vec![fmt_float(s.times[k])];
        if config.wants(Observable::DeltaI) {
            row.extend([fmt_float(s.delta_i[k]), fmt_float(stats.se_i[k])]);
        }
        if config.wants(Observable::DeltaC) {
            row.extend([fmt_float(s.delta_c[k]), fmt_float(stats.se_c[k])]);
        }
        if config.wants(Observable::HaarOtoc) {
            let mean = s.delta_otoc.as_ref().expect("OTOC requested");
            let se = stats.se_otoc.as_ref().expect("OTOC requested");
            row.extend([fmt_float(mean[k]), fmt_float(se[k])]);
        }
        row
    });
    to_csv(&series_header(config), rows)
}

pub const LEDGER_HEADER: [&str; 17] = [
    "t",
    "delta_S_A",
    "delta_S_B",
    "delta_S_S",
    "I_SE",
    "D_env",
    "D_joint",
    "delta_H_S",
    "delta_H_E",
    "delta_S_ex",
    "delta_I",
    "residual",
    "residual_joint",
    "max_scrambling_lhs",
    "max_scrambling_rhs",
    "max_scrambling_residual",
    "max_scrambling_gap",
];

pub const TTM_HEADER: [&str; 8] = [
    "t",
    "ft_value",
    "ft_deviation",
    "excluded_mass",
    "mean_omega_S",
    "mean_omega_E",
    "mean_omega_total",
    "delta_I_SE_plus_delta_C_S",
];

pub const WITNESS_HEADER: [&str; 6] = ["env_subset", "t", "I_S_P", "I_S_E", "delta_S_S", "delta_S_ex"];

pub fn render_thermolab(lab: &ThermolabResult) -> [(String, Vec<u8>); 3] {
    let ledger = lab.ledger.rows.iter().zip(&lab.scrambling).map(|(r, m)| {
        [
            r.t,
            r.delta_s_a,
            r.delta_s_b,
            r.delta_s_s,
            r.mutual_se,
            r.rel_env,
            r.rel_joint,
            r.delta_h_s,
            r.delta_h_e,
            r.delta_s_ex,
            r.delta_i,
            r.residual,
            r.residual_joint,
            m.lhs,
            m.rhs,
            m.residual,
            m.gap,
        ]
        .into_iter()
        .map(fmt_float)
        .collect()
    });
    let ttm = lab.ttm.iter().map(|r| {
        [
            r.t,
            r.ft_value,
            r.ft_deviation,
            r.excluded_mass,
            r.mean_omega_s,
            r.mean_omega_e,
            r.identity_lhs,
            r.identity_rhs,
        ]
        .into_iter()
        .map(fmt_float)
        .collect()
    });
    let witness = lab.witness.iter().flat_map(|(subset, rows)| {
        let name = subset.iter().map(usize::to_string).collect::<Vec<_>>().join("-");
        rows.iter().map(move |r| {
            let mut row = vec![name.clone()];
            row.extend([r.t, r.mutual_partial, r.mutual_full, r.delta_s_s, r.delta_s_ex].map(fmt_float));
            row
        })
    });
    [
        (LEDGER_FILE.to_string(), to_csv(&LEDGER_HEADER, ledger)),
        (TTM_FILE.to_string(), to_csv(&TTM_HEADER, ttm)),
        (WITNESS_FILE.to_string(), to_csv(&WITNESS_HEADER, witness)),
    ]
}

/// Every data file of a run, in publication order.
pub fn render_files(config: &ExperimentConfig, out: &RunOutput) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    for res in &out.gammas {
        files.push((series_file_name(res.gamma), render_series(config, res)));
        let mut json = serde_json::to_vec_pretty(&res.stored).expect("states serialise");
        json.push(b'\n');
        files.push((states_file_name(res.gamma), json));
    }
    if let Some(lab) = &out.thermolab {
        files.extend(render_thermolab(lab));
    }
    files
}

pub fn build_manifest(
    config: &ExperimentConfig,
    defaults_applied: &[String],
    out: &RunOutput,
    files: &[(String, Vec<u8>)],
    started_unix: u64,
) -> RunManifest {
    RunManifest {
        manifest_schema: MANIFEST_SCHEMA,
        software: Software::default(),
        run_id: run_id(config),
        config: config.clone(),
        defaults_applied: defaults_applied.to_vec(),
        realization_seeds: out.realization_seeds.clone(),
        thermolab_seed: config.thermolab.as_ref().map(|_| thermolab_seed(config)),
        workers: out.workers,
        started_unix,
        wall_clock_seconds: out.wall_clock_seconds,
        residuals: out.residuals.clone(),
        files: files
            .iter()
            .map(|(name, bytes)| FileEntry {
                name: name.clone(),
                sha256: sha256_hex(bytes),
                bytes: bytes.len() as u64,
            })
            .collect(),
    }
}

/// Write `bytes` to `dir/name` through a temporary file and a rename, so a
/// reader never observes a partial file.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> CliResult<()> {
    let tmp = dir.join(format!(".{name}.tmp"));
    let dest = dir.join(name);
    let mut f = fs::File::create(&tmp).map_err(|e| CliError::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| CliError::io(&tmp, e))?;
    f.sync_all().map_err(|e| CliError::io(&tmp, e))?;
    fs::rename(&tmp, &dest).map_err(|e| CliError::io(&dest, e))
}

/// Publish a run: the manifest first, then the data files it lists.
pub fn publish(dir: &Path, manifest: &RunManifest, files: &[(String, Vec<u8>)]) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut json = serde_json::to_vec_pretty(manifest).expect("manifest serialises");
    json.push(b'\n');
    write_atomic(dir, MANIFEST_FILE, &json)?;
    for (name, bytes) in files {
        write_atomic(dir, name, bytes)?;
    }
    Ok(())
}
