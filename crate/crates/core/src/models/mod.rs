//! Model Hamiltonians, disorder ensembles and initial states.
//!
//! Majorana operators follow the Jordan–Wigner convention
//! `psi_{2k-1} = Z..Z X I..I / sqrt(2)`, `psi_{2k} = Z..Z Y I..I / sqrt(2)`
//! (the `X`/`Y` on qubit `k-1`), normalised so that `{psi_i, psi_j} = delta_ij`
//! and `psi_i^2 = 1/2`. With the coupling variance `J^2 3!/N^3` this sets the
//! overall energy scale of the SYK and MQ models; the alternative convention
//! `{psi_i, psi_j} = 2 delta_ij` would multiply those Hamiltonians by four.

mod ensemble;
mod pauli_string;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{DensityMatrix, HermitianOperator, C64};

pub use ensemble::{split_seed, DisorderEnsemble};
pub use pauli_string::{Pauli, PauliString};

/// Largest register the dense builders accept.
pub const MAX_QUBITS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "SYK")]
    Syk,
    #[serde(rename = "MQ")]
    Mq,
    #[serde(rename = "XXX")]
    Xxx,
    #[serde(rename = "MFI")]
    Mfi,
    #[serde(rename = "LMG")]
    Lmg,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::Syk,
        ModelKind::Mq,
        ModelKind::Xxx,
        ModelKind::Mfi,
        ModelKind::Lmg,
    ];

    /// Parameter names accepted by this model with their default values.
    pub fn default_params(self) -> &'static [(&'static str, f64)] {
        match self {
            ModelKind::Syk => &[("J", 1.0)],
            ModelKind::Mq => &[("J", 1.0), ("mu", 0.1)],
            ModelKind::Xxx => &[("J", 1.0), ("h", 1.0)],
            ModelKind::Mfi => &[("J", 1.0), ("g", 1.05), ("W", 2.0)],
            ModelKind::Lmg => &[("J", 0.5)],
        }
    }

    /// Whether realizations depend on the seed.
    pub fn is_disordered(self) -> bool {
        !matches!(self, ModelKind::Lmg)
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Syk => "SYK",
            ModelKind::Mq => "MQ",
            ModelKind::Xxx => "XXX",
            ModelKind::Mfi => "MFI",
            ModelKind::Lmg => "LMG",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidModel(format!("unknown model kind '{s}'")))
    }
}

/// A fully resolved model: kind, register size, named parameters and seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub n_qubits: usize,
    pub params: BTreeMap<String, f64>,
    pub seed: u64,
}

impl ModelSpec {
    /// Validates parameter names and register size, filling in defaults for
    /// parameters that are not given.
    pub fn new(
        kind: ModelKind,
        n_qubits: usize,
        params: BTreeMap<String, f64>,
        seed: u64,
    ) -> Result<Self> {
        let allowed = kind.default_params();
        for (name, value) in &params {
            if !allowed.iter().any(|(n, _)| n == name) {
                return Err(Error::InvalidModel(format!(
                    "unknown parameter '{name}' for {kind} (allowed: {})",
                    allowed.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(", ")
                )));
            }
            if !value.is_finite() {
                return Err(Error::InvalidModel(format!("parameter '{name}' is not finite")));
            }
        }
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::InvalidModel(format!(
                "n_qubits must be in 1..={MAX_QUBITS}, got {n_qubits}"
            )));
        }
        match kind {
            ModelKind::Syk if n_qubits < 2 => {
                return Err(Error::InvalidModel("SYK needs at least 4 Majoranas (2 qubits)".into()))
            }
            ModelKind::Mq if n_qubits % 2 != 0 || n_qubits < 4 => {
                return Err(Error::InvalidModel(format!(
                    "MQ needs an even split with at least 4 Majoranas per side, got {n_qubits} qubits"
                )))
            }
            _ => {}
        }
        let mut resolved = params;
        for (name, default) in allowed {
            resolved.entry((*name).to_string()).or_insert(*default);
        }
        Ok(Self {
            kind,
            n_qubits,
            params: resolved,
            seed,
        })
    }

    pub fn with_defaults(kind: ModelKind, n_qubits: usize, seed: u64) -> Result<Self> {
        Self::new(kind, n_qubits, BTreeMap::new(), seed)
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Result<Self> {
        self.params.insert(name.to_string(), value);
        Self::new(self.kind, self.n_qubits, self.params, self.seed)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn param(&self, name: &str) -> f64 {
        self.params[name]
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    fn rng(&self) -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(self.seed)
    }

    fn expect_kind(&self, kind: ModelKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::InvalidModel(format!("expected a {kind} spec, got {}", self.kind)));
        }
        Ok(())
    }
}

/// Build the Hamiltonian described by `spec`.
pub fn build_hamiltonian(spec: &ModelSpec) -> Result<HermitianOperator> {
    match spec.kind {
        ModelKind::Syk => build_syk(spec),
        ModelKind::Mq => build_mq(spec),
        ModelKind::Xxx => build_xxx(spec),
        ModelKind::Mfi => build_mfi(spec),
        ModelKind::Lmg => build_lmg(spec),
    }
}

/// Jordan–Wigner Majorana `psi_index` (1-based) on `n_qubits` qubits.
pub fn majorana_string(index: usize, n_qubits: usize) -> Result<PauliString> {
    if index == 0 || index > 2 * n_qubits {
        return Err(Error::InvalidParameter(format!(
            "Majorana index {index} outside 1..={}",
            2 * n_qubits
        )));
    }
    let site = (index - 1) / 2;
    let mut s = PauliString::identity(n_qubits);
    for q in 0..site {
        s.ops[q] = Pauli::Z;
    }
    s.ops[site] = if index % 2 == 1 { Pauli::X } else { Pauli::Y };
    s.coeff = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    Ok(s)
}

pub fn majorana(index: usize, n_qubits: usize) -> Result<HermitianOperator> {
    HermitianOperator::new(majorana_string(index, n_qubits)?.to_matrix())
}

/// Coupling variance `J^2 3! / N^3` of the SYK model with `n_majoranas`.
pub fn syk_coupling_variance(j: f64, n_majoranas: usize) -> f64 {
    j * j * 6.0 / (n_majoranas as f64).powi(3)
}

/// Gaussian couplings for every quadruple `i1 < i2 < i3 < i4` in
/// lexicographic order.
pub fn syk_couplings(j: f64, n_majoranas: usize, seed: u64) -> Vec<f64> {
    let sd = syk_coupling_variance(j, n_majoranas).sqrt();
    let n_terms = combinations4(n_majoranas).count();
    if sd == 0.0 {
        return vec![0.0; n_terms];
    }
    let normal = Normal::new(0.0, sd).expect("finite standard deviation");
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..n_terms).map(|_| normal.sample(&mut rng)).collect()
}

/// `-sum J_q psi_q1 psi_q2 psi_q3 psi_q4` over Majoranas `offset+1 ..= offset+count`.
fn add_syk_terms(
    target: &mut Array2<C64>,
    couplings: &[f64],
    offset: usize,
    count: usize,
    n_qubits: usize,
) -> Result<()> {
    let psi: Vec<PauliString> = (1..=count)
        .map(|k| majorana_string(offset + k, n_qubits))
        .collect::<Result<_>>()?;
    for ((a, b, c, d), &coupling) in combinations4(count).zip(couplings) {
        let term = &(&(&psi[a] * &psi[b]) * &psi[c]) * &psi[d];
        term.scaled(C64::new(-coupling, 0.0)).add_to(target);
    }
    Ok(())
}

pub fn build_syk(spec: &ModelSpec) -> Result<HermitianOperator> {
    spec.expect_kind(ModelKind::Syk)?;
    let n_majoranas = 2 * spec.n_qubits;
    let couplings = syk_couplings(spec.param("J"), n_majoranas, spec.seed);
    let mut h = Array2::zeros((spec.dim(), spec.dim()));
    add_syk_terms(&mut h, &couplings, 0, n_majoranas, spec.n_qubits)?;
    HermitianOperator::new(h)
}

/// Two SYK copies sharing one coupling tensor plus `i mu sum_j psi^L_j psi^R_j`.
/// Left Majoranas are `psi_1..psi_n`, right ones `psi_{n+1}..psi_{2n}` where
/// `n = n_qubits`.
pub fn build_mq(spec: &ModelSpec) -> Result<HermitianOperator> {
    spec.expect_kind(ModelKind::Mq)?;
    let per_side = spec.n_qubits;
    let couplings = syk_couplings(spec.param("J"), per_side, spec.seed);
    let mut h = Array2::zeros((spec.dim(), spec.dim()));
    add_syk_terms(&mut h, &couplings, 0, per_side, spec.n_qubits)?;
    add_syk_terms(&mut h, &couplings, per_side, per_side, spec.n_qubits)?;
    let mu = spec.param("mu");
    for j in 1..=per_side {
        let left = majorana_string(j, spec.n_qubits)?;
        let right = majorana_string(per_side + j, spec.n_qubits)?;
        (&left * &right).scaled(C64::new(0.0, mu)).add_to(&mut h);
    }
    HermitianOperator::new(h)
}

fn uniform_fields(spec: &ModelSpec, half_width: f64) -> Vec<f64> {
    if half_width == 0.0 {
        return vec![0.0; spec.n_qubits];
    }
    let w = half_width.abs();
    let dist = Uniform::new_inclusive(-w, w).expect("finite field range");
    let mut rng = spec.rng();
    (0..spec.n_qubits).map(|_| dist.sample(&mut rng)).collect()
}

/// Random on-site fields drawn for this spec (XXX: `[-h, h]`, MFI: `[-W, W]`).
pub fn disorder_fields(spec: &ModelSpec) -> Vec<f64> {
    match spec.kind {
        ModelKind::Xxx => uniform_fields(spec, spec.param("h")),
        ModelKind::Mfi => uniform_fields(spec, spec.param("W")),
        _ => vec![0.0; spec.n_qubits],
    }
}

/// Open Heisenberg chain `J sum sigma_i . sigma_{i+1} + sum h_i Z_i`.
pub fn build_xxx(spec: &ModelSpec) -> Result<HermitianOperator> {
    spec.expect_kind(ModelKind::Xxx)?;
    let n = spec.n_qubits;
    let j = C64::new(spec.param("J"), 0.0);
    let mut h = Array2::zeros((spec.dim(), spec.dim()));
    for i in 0..n.saturating_sub(1) {
        for p in [Pauli::X, Pauli::Y, Pauli::Z] {
            PauliString::pair(n, (i, p), (i + 1, p)).scaled(j).add_to(&mut h);
        }
    }
    for (i, field) in disorder_fields(spec).into_iter().enumerate() {
        PauliString::single(n, i, Pauli::Z).scaled(C64::new(field, 0.0)).add_to(&mut h);
    }
    HermitianOperator::new(h)
}

/// Open mixed-field Ising chain `-J sum Z_i Z_{i+1} - sum h_i Z_i - g sum X_i`.
pub fn build_mfi(spec: &ModelSpec) -> Result<HermitianOperator> {
    spec.expect_kind(ModelKind::Mfi)?;
    let n = spec.n_qubits;
    let mut h = Array2::zeros((spec.dim(), spec.dim()));
    let j = spec.param("J");
    let g = spec.param("g");
    for i in 0..n.saturating_sub(1) {
        PauliString::pair(n, (i, Pauli::Z), (i + 1, Pauli::Z))
            .scaled(C64::new(-j, 0.0))
            .add_to(&mut h);
    }
    for (i, field) in disorder_fields(spec).into_iter().enumerate() {
        PauliString::single(n, i, Pauli::Z).scaled(C64::new(-field, 0.0)).add_to(&mut h);
        PauliString::single(n, i, Pauli::X).scaled(C64::new(-g, 0.0)).add_to(&mut h);
    }
    HermitianOperator::new(h)
}

/// All-to-all `-(J/N) sum_{i<j} (X_i X_j + Y_i Y_j) - sum Z_i`; no disorder.
pub fn build_lmg(spec: &ModelSpec) -> Result<HermitianOperator> {
    spec.expect_kind(ModelKind::Lmg)?;
    let n = spec.n_qubits;
    let coupling = C64::new(-spec.param("J") / n as f64, 0.0);
    let mut h = Array2::zeros((spec.dim(), spec.dim()));
    for i in 0..n {
        for k in i + 1..n {
            for p in [Pauli::X, Pauli::Y] {
                PauliString::pair(n, (i, p), (k, p)).scaled(coupling).add_to(&mut h);
            }
        }
        PauliString::single(n, i, Pauli::Z).scaled(C64::new(-1.0, 0.0)).add_to(&mut h);
    }
    HermitianOperator::new(h)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// `|00...0>`
    AllUp,
    /// `|0101...>`
    Neel,
}

impl InitialState {
    pub fn basis_index(self, n_qubits: usize) -> usize {
        match self {
            InitialState::AllUp => 0,
            // qubit q carries bit (q mod 2); qubit 0 is the most significant
            InitialState::Neel => (0..n_qubits)
                .filter(|q| q % 2 == 1)
                .fold(0, |acc, q| acc | 1 << (n_qubits - 1 - q)),
        }
    }
}

impl FromStr for InitialState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all_up" => Ok(InitialState::AllUp),
            "neel" => Ok(InitialState::Neel),
            other => Err(Error::InvalidParameter(format!("unknown initial state '{other}'"))),
        }
    }
}

pub fn initial_state(kind: InitialState, n_qubits: usize) -> Result<DensityMatrix> {
    if n_qubits == 0 {
        return Err(Error::InvalidParameter("initial state needs at least one qubit".into()));
    }
    DensityMatrix::basis_state(1 << n_qubits, kind.basis_index(n_qubits))
}

/// Index quadruples `a < b < c < d` below `n` in lexicographic order.
fn combinations4(n: usize) -> impl Iterator<Item = (usize, usize, usize, usize)> {
    (0..n).flat_map(move |a| {
        (a + 1..n).flat_map(move |b| {
            (b + 1..n).flat_map(move |c| (c + 1..n).map(move |d| (a, b, c, d)))
        })
    })
}
