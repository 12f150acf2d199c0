//! The dephasing master equation
//! `d rho/dt = -i[H, rho] - gamma sum_{i != j} <i|rho|j> |i><j|`
//! in a chosen decoherence basis, its Fock–Liouville solution and an
//! independent RK4 integrator used as a cross-check.

mod liouvillian;
mod rk4;

use std::fmt;
use std::str::FromStr;

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::ModelSpec;
use crate::qcore::{self, Basis, CMatrix, DensityMatrix, HermitianOperator, C64};

pub use liouvillian::{build_liouvillian, propagate, Liouvillian, PropagationMethod};
pub use rk4::rk4_oracle;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    Computational,
    Energy,
}

impl ChannelKind {
    pub fn name(self) -> &'static str {
        match self {
            ChannelKind::Computational => "computational",
            ChannelKind::Energy => "energy",
        }
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ChannelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "computational" => Ok(ChannelKind::Computational),
            "energy" => Ok(ChannelKind::Energy),
            other => Err(Error::InvalidParameter(format!(
                "unknown channel '{other}' (expected computational or energy)"
            ))),
        }
    }
}

/// Decoherence basis: the standard basis, or the eigenbasis of `h` with the
/// [`qcore::eigh`] gauge conventions.
pub fn resolve_basis(h: &HermitianOperator, kind: ChannelKind) -> Result<Basis> {
    match kind {
        ChannelKind::Computational => Ok(Basis::computational(h.dim())),
        ChannelKind::Energy => Ok(qcore::eigh(h)?.1),
    }
}

/// Uniform dephasing at rate `gamma` in a fixed basis.
#[derive(Clone, Debug)]
pub struct DecoherenceChannel {
    kind: ChannelKind,
    gamma: f64,
    basis: Basis,
}

impl DecoherenceChannel {
    pub fn new(h: &HermitianOperator, kind: ChannelKind, gamma: f64) -> Result<Self> {
        Self::with_basis(kind, gamma, resolve_basis(h, kind)?)
    }

    pub fn with_basis(kind: ChannelKind, gamma: f64, basis: Basis) -> Result<Self> {
        if !gamma.is_finite() || gamma < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "dephasing rate must be finite and non-negative, got {gamma}"
            )));
        }
        Ok(Self { kind, gamma, basis })
    }

    pub fn computational(dim: usize, gamma: f64) -> Result<Self> {
        Self::with_basis(ChannelKind::Computational, gamma, Basis::computational(dim))
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    /// `rho - D(rho)` where `D` keeps only the diagonal in the channel basis.
    pub(crate) fn coherent_part(&self, rho: &CMatrix) -> CMatrix {
        if self.basis.is_computational() {
            let mut out = rho.clone();
            for k in 0..out.nrows() {
                out[[k, k]] = C64::new(0.0, 0.0);
            }
            return out;
        }
        let pops: Vec<C64> = self.basis.populations(rho);
        rho - &qcore::linalg::reconstruct_complex(self.basis.matrix(), &pops)
    }
}

/// Row-major stacking: entry `(i, j)` goes to position `i * N + j`.
pub fn vectorize(rho: &DensityMatrix) -> Array1<C64> {
    rho.matrix().iter().copied().collect()
}

/// Inverse of [`vectorize`]; the result is re-validated as a density matrix.
pub fn devectorize(v: &Array1<C64>) -> Result<DensityMatrix> {
    DensityMatrix::new(unstack(v)?)
}

pub(crate) fn unstack(v: &Array1<C64>) -> Result<CMatrix> {
    let dim = (v.len() as f64).sqrt().round() as usize;
    if dim * dim != v.len() || dim == 0 {
        return Err(Error::NotPerfectSquare(v.len()));
    }
    Ok(v.to_owned()
        .into_shape_with_order((dim, dim))
        .expect("length checked"))
}

/// `n_points` equally spaced times on `[0, t_end]`.
pub fn uniform_grid(t_end: f64, n_points: usize) -> Result<Vec<f64>> {
    if !t_end.is_finite() || t_end < 0.0 {
        return Err(Error::InvalidTimeGrid(format!("t_end must be finite and >= 0, got {t_end}")));
    }
    match n_points {
        0 => Err(Error::InvalidTimeGrid("grid needs at least one point".into())),
        1 => Ok(vec![0.0]),
        _ if t_end == 0.0 => Err(Error::InvalidTimeGrid(
            "t_end = 0 only allows a single point".into(),
        )),
        _ => {
            let step = t_end / (n_points - 1) as f64;
            Ok((0..n_points)
                .map(|k| if k + 1 == n_points { t_end } else { k as f64 * step })
                .collect())
        }
    }
}

/// Checks `times[0] = 0` and strict ascent.
pub fn check_grid(times: &[f64]) -> Result<()> {
    match times.first() {
        None => return Err(Error::InvalidTimeGrid("empty time grid".into())),
        Some(&t0) if t0 != 0.0 => {
            return Err(Error::InvalidTimeGrid(format!("grid must start at 0, starts at {t0}")))
        }
        _ => {}
    }
    for w in times.windows(2) {
        if !(w[1] > w[0]) || !w[1].is_finite() {
            return Err(Error::InvalidTimeGrid(format!(
                "times must be finite and strictly ascending ({} then {})",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

/// States along a time grid under a fixed channel.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub channel: DecoherenceChannel,
    /// The generating model when the Hamiltonian came from a [`ModelSpec`].
    pub model: Option<ModelSpec>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn initial(&self) -> &DensityMatrix {
        &self.states[0]
    }

    pub fn last(&self) -> &DensityMatrix {
        self.states.last().expect("trajectory is non-empty")
    }

    pub fn with_model(mut self, model: ModelSpec) -> Self {
        self.model = Some(model);
        self
    }
}
