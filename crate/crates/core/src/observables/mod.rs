//! Scrambling quantifiers: mutual information, relative entropy of coherence,
//! out-of-time-order correlators and their disorder averages.

mod otoc;

use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::qcore::{self, Basis, DensityMatrix, Keep, Partition};

pub use otoc::{haar_delta_otoc, haar_unitary, otoc, HaarOtoc};

/// Largest `|Delta S_AB|` tolerated along a `gamma = 0` trajectory.
const UNITARY_ENTROPY_TOL: f64 = 1e-9;

/// `(S_A, S_B, S_AB)` in nats.
pub fn entropy_components(rho: &DensityMatrix, part: &Partition) -> Result<(f64, f64, f64)> {
    let s_a = qcore::von_neumann_entropy(&qcore::partial_trace(rho, part, Keep::A)?);
    let s_b = qcore::von_neumann_entropy(&qcore::partial_trace(rho, part, Keep::B)?);
    Ok((s_a, s_b, qcore::von_neumann_entropy(rho)))
}

/// `I(A:B) = S_A + S_B - S_AB` in nats (not clipped at zero).
pub fn mutual_information(rho: &DensityMatrix, part: &Partition) -> Result<f64> {
    let (s_a, s_b, s_ab) = entropy_components(rho, part)?;
    Ok(s_a + s_b - s_ab)
}

/// Relative entropy of coherence `S(D(rho)) - S(rho)`, with `D` the dephasing
/// in `basis`.
pub fn coherence(rho: &DensityMatrix, basis: &Basis) -> Result<f64> {
    if rho.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            found: rho.dim(),
        });
    }
    let pops: Vec<f64> = basis
        .populations(rho.matrix())
        .iter()
        .map(|z| z.re.max(0.0))
        .collect();
    Ok(qcore::shannon(&pops) - qcore::von_neumann_entropy(rho))
}

/// Standard-error bundle of an ensemble-averaged series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub n_realizations: usize,
    pub master_seed: Option<u64>,
    pub se_i: Vec<f64>,
    pub se_c: Vec<f64>,
    pub se_otoc: Option<Vec<f64>>,
}

/// `Delta I(t) = I(t) - I(0)` and `Delta C(t) = C(t) - C(0)` (nats), optionally
/// with the Haar-averaged OTOC decay. Single realizations have `stats = None`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantifierSeries {
    pub times: Vec<f64>,
    pub delta_i: Vec<f64>,
    pub delta_c: Vec<f64>,
    pub delta_otoc: Option<Vec<f64>>,
    pub stats: Option<EnsembleStats>,
}

impl QuantifierSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Attach an OTOC series sampled on the same grid.
    pub fn with_otoc(mut self, delta_otoc: Vec<f64>) -> Result<Self> {
        if delta_otoc.len() != self.times.len() {
            return Err(Error::DimensionMismatch {
                expected: self.times.len(),
                found: delta_otoc.len(),
            });
        }
        self.delta_otoc = Some(delta_otoc);
        Ok(self)
    }
}

/// Quantifiers along a trajectory, relative to its first state.
///
/// For `gamma = 0` the joint entropy must stay constant, so `Delta I` equals
/// `Delta S_A + Delta S_B`; a drift above 1e-9 is reported as an invariant
/// violation.
pub fn quantifier_series(traj: &Trajectory, part: &Partition, coh_basis: &Basis) -> Result<QuantifierSeries> {
    if traj.is_empty() {
        return Err(Error::InvalidTimeGrid("empty trajectory".into()));
    }
    let unitary = traj.channel.gamma() == 0.0;
    let mut delta_i = Vec::with_capacity(traj.len());
    let mut delta_c = Vec::with_capacity(traj.len());
    let (a0, b0, ab0) = entropy_components(traj.initial(), part)?;
    let c0 = coherence(traj.initial(), coh_basis)?;
    for (state, &time) in traj.states.iter().zip(&traj.times) {
        let (s_a, s_b, s_ab) = entropy_components(state, part)?;
        if unitary && (s_ab - ab0).abs() > UNITARY_ENTROPY_TOL {
            return Err(Error::InvariantViolation {
                time,
                source: Box::new(Error::Precondition(format!(
                    "joint entropy drifted by {:e} under unitary evolution",
                    s_ab - ab0
                ))),
            });
        }
        delta_i.push((s_a + s_b - s_ab) - (a0 + b0 - ab0));
        delta_c.push(coherence(state, coh_basis)? - c0);
    }
    Ok(QuantifierSeries {
        times: traj.times.clone(),
        delta_i,
        delta_c,
        delta_otoc: None,
        stats: None,
    })
}

/// Pointwise mean and standard error `s / sqrt(n)` (with the `n - 1` sample
/// variance; zero for a single member).
pub fn mean_and_se(columns: &[&[f64]]) -> (Vec<f64>, Vec<f64>) {
    let n = columns.len();
    let len = columns.first().map_or(0, |c| c.len());
    let mut mean = vec![0.0; len];
    let mut se = vec![0.0; len];
    for k in 0..len {
        // shifting by the first member keeps identical inputs exact
        let shift = columns[0][k];
        let dm = columns.iter().map(|c| c[k] - shift).sum::<f64>() / n as f64;
        mean[k] = shift + dm;
        if n > 1 {
            let var = columns.iter().map(|c| (c[k] - shift - dm).powi(2)).sum::<f64>() / (n - 1) as f64;
            se[k] = (var / n as f64).sqrt();
        }
    }
    (mean, se)
}

/// Disorder average of per-realization series on a common grid.
pub fn ensemble_average(series: &[QuantifierSeries], master_seed: Option<u64>) -> Result<QuantifierSeries> {
    let first = series
        .first()
        .ok_or_else(|| Error::InvalidParameter("cannot average an empty ensemble".into()))?;
    for s in series {
        if s.times != first.times {
            return Err(Error::InvalidTimeGrid("ensemble members use different grids".into()));
        }
        if s.delta_otoc.is_some() != first.delta_otoc.is_some() {
            return Err(Error::InvalidParameter(
                "OTOC present for some ensemble members only".into(),
            ));
        }
    }
    let pick = |f: fn(&QuantifierSeries) -> &[f64]| -> (Vec<f64>, Vec<f64>) {
        let cols: Vec<&[f64]> = series.iter().map(f).collect();
        mean_and_se(&cols)
    };
    let (delta_i, se_i) = pick(|s| &s.delta_i);
    let (delta_c, se_c) = pick(|s| &s.delta_c);
    let (delta_otoc, se_otoc) = if first.delta_otoc.is_some() {
        let (m, e) = pick(|s| s.delta_otoc.as_deref().expect("checked above"));
        (Some(m), Some(e))
    } else {
        (None, None)
    };
    Ok(QuantifierSeries {
        times: first.times.clone(),
        delta_i,
        delta_c,
        delta_otoc,
        stats: Some(EnsembleStats {
            n_realizations: series.len(),
            master_seed,
            se_i,
            se_c,
            se_otoc,
        }),
    })
}
