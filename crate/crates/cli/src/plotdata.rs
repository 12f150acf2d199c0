//! Long-format export of one or more run directories.

use std::path::Path;

use crate::error::{CliError, CliResult};
use crate::manifest::{sha256_hex, RunManifest};
use crate::output::series_file_name;

pub const PLOTDATA_FILE: &str = "plotdata_v1.csv";
pub const PLOTDATA_HEADER: [&str; 8] = ["model", "channel", "gamma", "t", "quantifier", "mean", "se", "manifest_hash"];

const QUANTIFIERS: [(&str, &str, &str); 3] = [
    ("delta_I", "mean_dI", "se_dI"),
    ("delta_C", "mean_dC", "se_dC"),
    ("delta_O", "mean_dO", "se_dO"),
];

/// One tidy CSV with a row per (run, gamma, t, quantifier). Values are copied
/// verbatim from the series files.
pub fn emit_plotdata(dirs: &[&Path]) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(PLOTDATA_HEADER).expect("writing to memory");
    for dir in dirs {
        let (manifest, bytes) = RunManifest::read(dir)?;
        let hash = sha256_hex(&bytes);
        let config = &manifest.config;
        for &gamma in &config.gammas {
            let name = series_file_name(gamma);
            if manifest.file(&name).is_none() {
                return Err(CliError::Input(format!("{}: manifest does not list {name}", dir.display())));
            }
            let path = dir.join(&name);
            let mut rdr = csv::Reader::from_path(&path)
                .map_err(|e| CliError::Input(format!("{}: incomplete run: {e}", path.display())))?;
            let header = rdr
                .headers()
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
                .clone();
            let cols: Vec<(&str, usize, usize)> = QUANTIFIERS
                .iter()
                .filter_map(|&(q, m, s)| {
                    let mi = header.iter().position(|h| h == m)?;
                    let si = header.iter().position(|h| h == s)?;
                    Some((q, mi, si))
                })
                .collect();
            let gamma_text = gamma.to_string();
            for rec in rdr.records() {
                let rec = rec.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
                for &(q, mi, si) in &cols {
                    w.write_record([
                        config.model.kind.name(),
                        config.channel.name(),
                        &gamma_text,
                        &rec[0],
                        q,
                        &rec[mi],
                        &rec[si],
                        &hash,
                    ])
                    .expect("writing to memory");
                }
            }
        }
    }
    Ok(w.into_inner().expect("writing to memory"))
}
