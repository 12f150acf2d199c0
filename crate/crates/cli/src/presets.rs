//! Bundled experiment configs, one per figure protocol and channel.

use crate::error::{CliError, CliResult};

pub const PRESETS: &[(&str, &str)] = &[
    ("fig2", include_str!("../presets/fig2.toml")),
    ("fig3_computational", include_str!("../presets/fig3_computational.toml")),
    ("fig3_energy", include_str!("../presets/fig3_energy.toml")),
    ("fig5_computational", include_str!("../presets/fig5_computational.toml")),
    ("fig5_energy", include_str!("../presets/fig5_energy.toml")),
    ("fig7_computational", include_str!("../presets/fig7_computational.toml")),
    ("fig7_energy", include_str!("../presets/fig7_energy.toml")),
    ("fig8_computational", include_str!("../presets/fig8_computational.toml")),
    ("fig8_energy", include_str!("../presets/fig8_energy.toml")),
    ("fig10_computational", include_str!("../presets/fig10_computational.toml")),
    ("fig10_energy", include_str!("../presets/fig10_energy.toml")),
];

pub fn preset(name: &str) -> CliResult<&'static str> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
        .ok_or_else(|| {
            let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
            CliError::Config(format!("unknown preset '{name}' (available: {})", names.join(", ")))
        })
}

/// First comment line of a preset.
pub fn summary(text: &str) -> &str {
    text.lines()
        .next()
        .and_then(|l| l.strip_prefix('#'))
        .map_or("", str::trim)
}
