//! Experiment configuration: a strict TOML schema resolved into a fully
//! explicit [`ExperimentConfig`].

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::{self, MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};

use scramble_core::dynamics::ChannelKind;
use scramble_core::models::{InitialState, ModelKind, ModelSpec};
use scramble_core::thermolab::{CouplingPreset, SystemState, MAX_JOINT_QUBITS};
use scramble_core::Partition;

use crate::error::{CliError, CliResult};
use crate::manifest::RunManifest;

pub const SCHEMA_VERSION: u32 = 1;

pub const DEFAULT_N_QUBITS: usize = 6;
pub const DEFAULT_GAMMAS: [f64; 4] = [0.0, 0.01, 0.1, 1.0];
pub const DEFAULT_T_END: f64 = 10.0;
pub const DEFAULT_N_POINTS: usize = 201;
pub const DEFAULT_REALIZATIONS: usize = 10;
pub const DEFAULT_OTOC_SAMPLES: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Observable {
    #[serde(rename = "delta_I")]
    DeltaI,
    #[serde(rename = "delta_C")]
    DeltaC,
    #[serde(rename = "haar_otoc")]
    HaarOtoc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OtocReference {
    Initial,
    MaximallyMixed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub n_qubits: usize,
    pub params: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub t_end: f64,
    pub n_points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    pub n_realizations: usize,
    pub master_seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OtocConfig {
    pub n_samples: usize,
    pub reference: OtocReference,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermolabConfig {
    pub n_env: usize,
    pub coupling: CouplingPreset,
    pub lambda: f64,
    pub beta: f64,
    pub system_state: SystemState,
    pub t_end: f64,
    pub n_points: usize,
}

/// A fully resolved experiment. Every field is explicit, so the serialised form
/// reproduces the run on its own.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub model: ModelConfig,
    pub channel: ChannelKind,
    pub gammas: Vec<f64>,
    pub initial_state: InitialState,
    pub partition_a: Vec<usize>,
    pub time: TimeConfig,
    pub ensemble: EnsembleConfig,
    pub observables: Vec<Observable>,
    pub otoc: OtocConfig,
    pub thermolab: Option<ThermolabConfig>,
}

/// A parsed config file plus the bookkeeping the manifest needs.
#[derive(Clone, Debug)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub defaults_applied: Vec<String>,
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn model_spec(&self, seed: u64) -> CliResult<ModelSpec> {
        ModelSpec::new(self.model.kind, self.model.n_qubits, self.model.params.clone(), seed)
            .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn partition(&self) -> CliResult<Partition> {
        Partition::new(self.model.n_qubits, self.partition_a.iter().copied())
            .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn wants(&self, obs: Observable) -> bool {
        self.observables.contains(&obs)
    }

    /// Check all cross-field constraints of an already resolved config.
    pub fn validate(&self) -> CliResult<()> {
        let fail = |key: &str, msg: String| Err(CliError::Config(format!("key `{key}`: {msg}")));
        if self.schema_version != SCHEMA_VERSION {
            return fail(
                "schema_version",
                format!("unsupported schema version {} (expected {SCHEMA_VERSION})", self.schema_version),
            );
        }
        self.model_spec(0)?;
        if self.gammas.is_empty() {
            return fail("gammas", "at least one rate is required".into());
        }
        for &g in &self.gammas {
            if !g.is_finite() || g < 0.0 {
                return fail("gammas", format!("gamma must be >= 0, got {g}"));
            }
        }
        let mut sorted = self.gammas.clone();
        sorted.sort_by(f64::total_cmp);
        sorted.dedup();
        if sorted.len() != self.gammas.len() {
            return fail("gammas", "rates must be distinct".into());
        }
        if let Some(&q) = self.partition_a.iter().find(|&&q| q >= self.model.n_qubits) {
            return fail(
                "partition_a",
                format!("qubit {q} is outside the {}-qubit register", self.model.n_qubits),
            );
        }
        self.partition()
            .map_err(|e| CliError::Config(format!("key `partition_a`: {e}")))?;
        if !(self.time.t_end > 0.0 && self.time.t_end.is_finite()) {
            return fail("time.t_end", format!("must be positive, got {}", self.time.t_end));
        }
        if self.time.n_points < 2 {
            return fail("time.n_points", "need at least 2 points".into());
        }
        if self.ensemble.n_realizations == 0 {
            return fail("ensemble.n_realizations", "must be at least 1".into());
        }
        if self.observables.is_empty() {
            return fail("observables", "select at least one observable".into());
        }
        if self.otoc.n_samples == 0 {
            return fail("otoc.n_samples", "must be at least 1".into());
        }
        if let Some(lab) = &self.thermolab {
            if lab.n_env == 0 || self.model.n_qubits + lab.n_env > MAX_JOINT_QUBITS {
                return fail(
                    "thermolab.n_env",
                    format!(
                        "system ({}) plus environment ({}) must be 1..={MAX_JOINT_QUBITS} qubits",
                        self.model.n_qubits, lab.n_env
                    ),
                );
            }
            if !lab.lambda.is_finite() {
                return fail("thermolab.lambda", "must be finite".into());
            }
            if !(lab.beta > 0.0 && lab.beta.is_finite()) {
                return fail("thermolab.beta", format!("must be positive, got {}", lab.beta));
            }
            if let SystemState::Eigenstate(k) = lab.system_state {
                if k >= 1 << self.model.n_qubits {
                    return fail("thermolab.system_state", format!("eigenstate index {k} out of range"));
                }
            }
            if !(lab.t_end > 0.0 && lab.t_end.is_finite()) || lab.n_points < 2 {
                return fail("thermolab.t_end", "needs t_end > 0 and n_points >= 2".into());
            }
        }
        Ok(())
    }
}

// Raw file schema: every field optional so absent ones can be recorded.

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    schema_version: Option<u32>,
    model: RawModel,
    channel: Option<String>,
    gammas: Option<Vec<f64>>,
    initial_state: Option<String>,
    #[serde(alias = "partition_A")]
    partition_a: Option<Vec<usize>>,
    time: Option<RawTime>,
    ensemble: Option<RawEnsemble>,
    observables: Option<Vec<String>>,
    otoc: Option<RawOtoc>,
    thermolab: Option<RawThermolab>,
    output_dir: Option<PathBuf>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawModelTable {
    kind: String,
    n_qubits: Option<usize>,
    params: Option<BTreeMap<String, f64>>,
}

/// `model = "SYK"` or a `[model]` table.
struct RawModel(RawModelTable);

impl<'de> Deserialize<'de> for RawModel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct ModelVisitor;

        impl<'de> Visitor<'de> for ModelVisitor {
            type Value = RawModel;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a model name or a [model] table")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<RawModel, E> {
                Ok(RawModel(RawModelTable {
                    kind: v.to_string(),
                    ..Default::default()
                }))
            }

            fn visit_map<A: MapAccess<'de>>(self, map: A) -> Result<RawModel, A::Error> {
                RawModelTable::deserialize(de::value::MapAccessDeserializer::new(map)).map(RawModel)
            }
        }

        deserializer.deserialize_any(ModelVisitor)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTime {
    t_end: Option<f64>,
    n_points: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEnsemble {
    n_realizations: Option<usize>,
    master_seed: Option<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOtoc {
    n_samples: Option<usize>,
    reference: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawThermolab {
    n_env: Option<usize>,
    coupling: Option<String>,
    lambda: Option<f64>,
    beta: Option<f64>,
    system_state: Option<String>,
    eigenstate: Option<usize>,
    t_end: Option<f64>,
    n_points: Option<usize>,
}

/// 1-based line of the first `key = ...` assignment or `[key]` header.
fn line_of(text: &str, key: &str) -> Option<usize> {
    let leaf = key.rsplit('.').next().unwrap_or(key);
    text.lines().position(|line| {
        let l = line.trim_start();
        let assigns = l
            .strip_prefix(leaf)
            .is_some_and(|rest| rest.trim_start().starts_with('='));
        assigns || l.starts_with(&format!("[{key}]"))
    })
    .map(|i| i + 1)
}

fn config_error(text: &str, key: &str, msg: impl fmt::Display) -> CliError {
    match line_of(text, key) {
        Some(line) => CliError::Config(format!("line {line}: key `{key}`: {msg}")),
        None => CliError::Config(format!("key `{key}`: {msg}")),
    }
}

fn default_initial_state(kind: ModelKind) -> InitialState {
    match kind {
        ModelKind::Xxx | ModelKind::Lmg => InitialState::Neel,
        _ => InitialState::AllUp,
    }
}

/// Resolve a TOML document. Absent fields take their defaults and are listed
/// in `defaults_applied`; every error names the offending key (and its line
/// when it appears in the text).
pub fn parse_config(text: &str) -> CliResult<LoadedConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string().trim_end().to_string()))?;
    let mut defaults = Vec::new();
    let model = raw.model.0;
    let kind: ModelKind = model
        .kind
        .parse()
        .map_err(|e: scramble_core::Error| config_error(text, "model", e))?;
    let n_qubits = pick_val(&mut defaults, "model.n_qubits", model.n_qubits, DEFAULT_N_QUBITS);
    let given = model.params.unwrap_or_default();
    let spec = ModelSpec::new(kind, n_qubits, given.clone(), 0).map_err(|e| {
        let key = given
            .keys()
            .find(|k| !kind.default_params().iter().any(|(n, _)| n == k))
            .map(|k| format!("model.params.{k}"))
            .unwrap_or_else(|| "model".into());
        config_error(text, &key, e)
    })?;
    for (name, _) in kind.default_params() {
        if !given.contains_key(*name) {
            defaults.push(format!("model.params.{name}"));
        }
    }

    let channel: ChannelKind = match raw.channel {
        Some(s) => s.parse().map_err(|e| config_error(text, "channel", e))?,
        None => {
            defaults.push("channel".into());
            ChannelKind::Computational
        }
    };
    let gammas = pick_val(&mut defaults, "gammas", raw.gammas, DEFAULT_GAMMAS.to_vec());
    let initial_state = match raw.initial_state {
        Some(s) => s.parse().map_err(|e| config_error(text, "initial_state", e))?,
        None => {
            defaults.push("initial_state".into());
            default_initial_state(kind)
        }
    };
    let partition_a = pick_val(&mut defaults, "partition_a", raw.partition_a, vec![0]);

    let time = raw.time.unwrap_or(RawTime {
        t_end: None,
        n_points: None,
    });
    let time = TimeConfig {
        t_end: pick_val(&mut defaults, "time.t_end", time.t_end, DEFAULT_T_END),
        n_points: pick_val(&mut defaults, "time.n_points", time.n_points, DEFAULT_N_POINTS),
    };
    let ensemble = raw.ensemble.unwrap_or(RawEnsemble {
        n_realizations: None,
        master_seed: None,
    });
    let ensemble = EnsembleConfig {
        n_realizations: pick_val(&mut defaults, "ensemble.n_realizations", ensemble.n_realizations, DEFAULT_REALIZATIONS),
        master_seed: pick_val(&mut defaults, "ensemble.master_seed", ensemble.master_seed, 0),
    };
    let observables = match raw.observables {
        Some(list) => {
            let mut out = Vec::new();
            for name in list {
                let obs: Observable = serde_json::from_value(serde_json::Value::String(name.clone())).map_err(|_| {
                    config_error(
                        text,
                        "observables",
                        format!("unknown observable '{name}' (expected delta_I, delta_C or haar_otoc)"),
                    )
                })?;
                if !out.contains(&obs) {
                    out.push(obs);
                }
            }
            out.sort();
            out
        }
        None => {
            defaults.push("observables".into());
            vec![Observable::DeltaI, Observable::DeltaC]
        }
    };
    let otoc = raw.otoc.unwrap_or(RawOtoc {
        n_samples: None,
        reference: None,
    });
    let reference = match otoc.reference.as_deref() {
        None => {
            defaults.push("otoc.reference".into());
            OtocReference::Initial
        }
        Some("initial") => OtocReference::Initial,
        Some("maximally_mixed") => OtocReference::MaximallyMixed,
        Some(other) => {
            return Err(config_error(
                text,
                "otoc.reference",
                format!("unknown reference state '{other}' (expected initial or maximally_mixed)"),
            ))
        }
    };
    let otoc = OtocConfig {
        n_samples: pick_val(&mut defaults, "otoc.n_samples", otoc.n_samples, DEFAULT_OTOC_SAMPLES),
        reference,
    };
    let thermolab = match raw.thermolab {
        None => None,
        Some(lab) => Some(resolve_thermolab(text, lab, &mut defaults)?),
    };

    let config = ExperimentConfig {
        schema_version: raw.schema_version.unwrap_or(SCHEMA_VERSION),
        model: ModelConfig {
            kind,
            n_qubits: spec.n_qubits,
            params: spec.params,
        },
        channel,
        gammas,
        initial_state,
        partition_a,
        time,
        ensemble,
        observables,
        otoc,
        thermolab,
    };
    config.validate().map_err(|e| match e {
        CliError::Config(msg) => match msg.strip_prefix("key `").and_then(|m| m.split_once('`')) {
            Some((key, rest)) => config_error(text, key, rest.trim_start_matches(':').trim()),
            None => CliError::Config(msg),
        },
        other => other,
    })?;
    Ok(LoadedConfig {
        config,
        defaults_applied: defaults,
        output_dir: raw.output_dir,
    })
}

fn pick_val<T>(defaults: &mut Vec<String>, key: &str, value: Option<T>, default: T) -> T {
    value.unwrap_or_else(|| {
        defaults.push(key.to_string());
        default
    })
}

fn resolve_thermolab(text: &str, lab: RawThermolab, defaults: &mut Vec<String>) -> CliResult<ThermolabConfig> {
    let coupling = match lab.coupling {
        Some(s) => s.parse().map_err(|e| config_error(text, "thermolab.coupling", e))?,
        None => {
            defaults.push("thermolab.coupling".into());
            CouplingPreset::Dephasing
        }
    };
    let system_state = match (lab.system_state.as_deref(), lab.eigenstate) {
        (None, None) => {
            defaults.push("thermolab.system_state".into());
            SystemState::Gibbs
        }
        (Some("gibbs"), None) => SystemState::Gibbs,
        (Some("eigenstate") | None, Some(k)) => SystemState::Eigenstate(k),
        (Some("eigenstate"), None) => {
            defaults.push("thermolab.eigenstate".into());
            SystemState::Eigenstate(0)
        }
        (Some(other), _) => {
            return Err(config_error(
                text,
                "thermolab.system_state",
                format!("expected gibbs or eigenstate, got '{other}'"),
            ))
        }
    };
    Ok(ThermolabConfig {
        n_env: pick_val(defaults, "thermolab.n_env", lab.n_env, 3),
        coupling,
        lambda: pick_val(defaults, "thermolab.lambda", lab.lambda, 0.1),
        beta: pick_val(defaults, "thermolab.beta", lab.beta, 1.0),
        system_state,
        t_end: pick_val(defaults, "thermolab.t_end", lab.t_end, 10.0),
        n_points: pick_val(defaults, "thermolab.n_points", lab.n_points, 11),
    })
}

/// Load a TOML config, or the resolved config echoed in a run manifest
/// (`*.json`).
pub fn load_config(path: &Path) -> CliResult<LoadedConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    if path.extension().is_some_and(|e| e == "json") {
        let manifest: RunManifest = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: not a run manifest: {e}", path.display())))?;
        manifest.config.validate()?;
        return Ok(LoadedConfig {
            config: manifest.config,
            defaults_applied: manifest.defaults_applied,
            output_dir: None,
        });
    }
    parse_config(&text).map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}
