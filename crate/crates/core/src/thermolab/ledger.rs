use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{self, DensityMatrix, Keep, Partition};

use super::{UniverseSpec, UniverseTrajectory};

/// One time slice of the entropy balance. Every quantity is evaluated directly
/// from the joint state; the residuals compare the two balance identities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerRow {
    pub t: f64,
    pub delta_s_a: f64,
    pub delta_s_b: f64,
    pub delta_s_s: f64,
    /// `I(S:E)`, zero initially.
    pub mutual_se: f64,
    /// `D(rho_E || rho_E^eq)`.
    pub rel_env: f64,
    /// `D(rho || rho_S ⊗ rho_E^eq)`.
    pub rel_joint: f64,
    pub delta_h_s: f64,
    pub delta_h_e: f64,
    /// `beta <Q>` with `<Q> = -Delta <H_E>`.
    pub delta_s_ex: f64,
    /// `Delta I(A:B)` inside the system.
    pub delta_i: f64,
    /// `Delta I - (Delta S_A + Delta S_B - I(S:E) - D(rho_E||rho_E^eq) - Delta S_ex)`.
    pub residual: f64,
    /// `Delta I - (Delta S_A + Delta S_B - D(rho||rho_S ⊗ rho_E^eq) - Delta S_ex)`.
    pub residual_joint: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyLedger {
    pub rows: Vec<LedgerRow>,
    /// `2 ||h_int||`, the bound on `|Delta<H_S> + Delta<H_E>|`.
    pub heat_bound: f64,
}

impl EntropyLedger {
    pub fn max_residual(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.residual.abs().max(r.residual_joint.abs()))
            .fold(0.0, f64::max)
    }

    /// Largest `|Delta<H_S> + Delta<H_E>|` along the run.
    pub fn max_heat_asymmetry(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| (r.delta_h_s + r.delta_h_e).abs())
            .fold(0.0, f64::max)
    }
}

struct Snapshot {
    s_a: f64,
    s_b: f64,
    s_s: f64,
    s_e: f64,
    s_joint: f64,
    h_s: f64,
    h_e: f64,
}

fn at_time<T>(time: f64, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::InvariantViolation {
        time,
        source: Box::new(e),
    })
}

/// Entropy balance of a universe run; `part` splits the system qubits into `A`
/// and `B`.
pub fn entropy_ledger(traj: &UniverseTrajectory, u: &UniverseSpec, part: &Partition) -> Result<EntropyLedger> {
    if part.total_qubits() != u.n_s() {
        return Err(Error::InvalidPartition(format!(
            "partition covers {} qubits, system has {}",
            part.total_qubits(),
            u.n_s()
        )));
    }
    let rho_eq = u.environment_equilibrium()?;
    let sys = u.system_qubits();
    let env = u.environment_qubits();
    let snapshot = |rho: &DensityMatrix| -> Result<(Snapshot, DensityMatrix, DensityMatrix)> {
        let rho_s = qcore::reduced_state(rho, &sys)?;
        let rho_e = qcore::reduced_state(rho, &env)?;
        let snap = Snapshot {
            s_a: qcore::von_neumann_entropy(&qcore::partial_trace(&rho_s, part, Keep::A)?),
            s_b: qcore::von_neumann_entropy(&qcore::partial_trace(&rho_s, part, Keep::B)?),
            s_s: qcore::von_neumann_entropy(&rho_s),
            s_e: qcore::von_neumann_entropy(&rho_e),
            s_joint: qcore::von_neumann_entropy(rho),
            h_s: rho_s.expectation(u.h_s().matrix()).re,
            h_e: rho_e.expectation(u.h_e().matrix()).re,
        };
        Ok((snap, rho_s, rho_e))
    };
    let first = traj
        .states
        .first()
        .ok_or_else(|| Error::InvalidTimeGrid("empty universe trajectory".into()))?;
    let (s0, _, _) = snapshot(first)?;
    let i_ab0 = s0.s_a + s0.s_b - s0.s_s;
    let mut rows = Vec::with_capacity(traj.states.len());
    for (rho, &t) in traj.states.iter().zip(&traj.times) {
        let (s, rho_s, rho_e) = at_time(t, snapshot(rho))?;
        let mutual_se = s.s_s + s.s_e - s.s_joint;
        let rel_env = at_time(t, qcore::relative_entropy(&rho_e, &rho_eq))?;
        let product = rho_s.tensor(&rho_eq)?;
        let rel_joint = at_time(t, qcore::relative_entropy(rho, &product))?;
        let delta_h_e = s.h_e - s0.h_e;
        let delta_s_ex = -u.beta() * delta_h_e;
        let delta_s_a = s.s_a - s0.s_a;
        let delta_s_b = s.s_b - s0.s_b;
        let delta_i = (s.s_a + s.s_b - s.s_s) - i_ab0;
        rows.push(LedgerRow {
            t,
            delta_s_a,
            delta_s_b,
            delta_s_s: s.s_s - s0.s_s,
            mutual_se,
            rel_env,
            rel_joint,
            delta_h_s: s.h_s - s0.h_s,
            delta_h_e,
            delta_s_ex,
            delta_i,
            residual: delta_i - (delta_s_a + delta_s_b - mutual_se - rel_env - delta_s_ex),
            residual_joint: delta_i - (delta_s_a + delta_s_b - rel_joint - delta_s_ex),
        });
    }
    Ok(EntropyLedger {
        rows,
        heat_bound: 2.0 * u.h_int().spectral_norm()?,
    })
}

/// Both sides of `I(S:E) = N_S ln 2 - Delta S_ex - D(rho_E || rho_E^eq)` (the
/// logarithm of the maximal-scrambling identity) and the distance
/// `N_S ln 2 - Delta S_S` from its precondition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaximalScrambling {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub gap: f64,
}

pub fn maximal_scrambling_identity(row: &LedgerRow, n_s: usize) -> MaximalScrambling {
    let ceiling = n_s as f64 * LN_2;
    let lhs = row.mutual_se;
    let rhs = ceiling - row.delta_s_ex - row.rel_env;
    MaximalScrambling {
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
        gap: ceiling - row.delta_s_s,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessRow {
    pub t: f64,
    /// `I(S:P(E))`
    pub mutual_partial: f64,
    /// `I(S:E)`
    pub mutual_full: f64,
    pub delta_s_s: f64,
    pub delta_s_ex: f64,
}

fn mutual_with(rho: &DensityMatrix, sys: &[usize], other: &[usize]) -> Result<f64> {
    let mut both: Vec<usize> = sys.iter().chain(other).copied().collect();
    both.sort_unstable();
    let s_sys = qcore::von_neumann_entropy(&qcore::reduced_state(rho, sys)?);
    let s_other = qcore::von_neumann_entropy(&qcore::reduced_state(rho, other)?);
    let s_both = qcore::von_neumann_entropy(&qcore::reduced_state(rho, &both)?);
    Ok(s_sys + s_other - s_both)
}

/// Correlations between the system and the environment qubits `part_e`
/// (indices `0..N_E` within the environment) next to the full `I(S:E)`.
///
/// A value of `I(S:P(E))` above `I(S:E) + 1e-9` contradicts strong
/// subadditivity and is reported as an invariant violation.
pub fn partition_witness(traj: &UniverseTrajectory, u: &UniverseSpec, part_e: &[usize]) -> Result<Vec<WitnessRow>> {
    let mut sub: Vec<usize> = part_e.to_vec();
    sub.sort_unstable();
    sub.dedup();
    if sub.is_empty() || sub.len() != part_e.len() || sub.iter().any(|&k| k >= u.n_e()) {
        return Err(Error::InvalidPartition(format!(
            "environment subset {part_e:?} must be non-empty and distinct within 0..{}",
            u.n_e()
        )));
    }
    let sys = u.system_qubits();
    let env = u.environment_qubits();
    let sub_global: Vec<usize> = sub.iter().map(|k| u.n_s() + k).collect();
    let mut rows = Vec::with_capacity(traj.states.len());
    let mut base: Option<(f64, f64)> = None;
    for (rho, &t) in traj.states.iter().zip(&traj.times) {
        let rho_s = qcore::reduced_state(rho, &sys)?;
        let rho_e = qcore::reduced_state(rho, &env)?;
        let s_s = qcore::von_neumann_entropy(&rho_s);
        let h_e = rho_e.expectation(u.h_e().matrix()).re;
        let (s_s0, h_e0) = *base.get_or_insert((s_s, h_e));
        let mutual_partial = mutual_with(rho, &sys, &sub_global)?;
        let mutual_full = mutual_with(rho, &sys, &env)?;
        if mutual_partial > mutual_full + 1e-9 {
            return Err(Error::InvariantViolation {
                time: t,
                source: Box::new(Error::Precondition(format!(
                    "I(S:P(E)) = {mutual_partial} exceeds I(S:E) = {mutual_full}"
                ))),
            });
        }
        rows.push(WitnessRow {
            t,
            mutual_partial,
            mutual_full,
            delta_s_s: s_s - s_s0,
            delta_s_ex: -u.beta() * (h_e - h_e0),
        });
    }
    Ok(rows)
}
