//! Exact simulation of a small system + environment universe: entropy-production
//! ledger, two-time-measurement statistics, fluctuation theorems and partition
//! witnesses.
//!
//! System qubits come first in the joint register, environment qubits after.

mod ledger;
mod ttm;

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::linalg::{self, dagger, identity, kron};
use crate::qcore::{self, pauli, CMatrix, DensityMatrix, HermitianOperator, C64};

pub use ledger::{
    entropy_ledger, maximal_scrambling_identity, partition_witness, EntropyLedger, LedgerRow,
    MaximalScrambling, WitnessRow,
};
pub use ttm::{average_entropy_production, integral_ft, ttm_distribution, FtResult, TtmDistribution};

/// Largest joint register handled by the lab.
pub const MAX_JOINT_QUBITS: usize = 10;

/// Closed universe `H = h_S ⊗ I + I ⊗ h_E + h_int` started in
/// `rho_S0 ⊗ exp(-beta h_E) / Z`.
#[derive(Clone, Debug)]
pub struct UniverseSpec {
    h_s: HermitianOperator,
    h_e: HermitianOperator,
    h_int: HermitianOperator,
    beta: f64,
    rho_s0: DensityMatrix,
    n_s: usize,
    n_e: usize,
}

fn qubits_of(dim: usize, what: &str) -> Result<usize> {
    if !dim.is_power_of_two() || dim < 2 {
        return Err(Error::InvalidParameter(format!("{what} dimension {dim} is not a power of two")));
    }
    Ok(dim.trailing_zeros() as usize)
}

impl UniverseSpec {
    pub fn new(
        h_s: HermitianOperator,
        h_e: HermitianOperator,
        h_int: HermitianOperator,
        beta: f64,
        rho_s0: DensityMatrix,
    ) -> Result<Self> {
        let n_s = qubits_of(h_s.dim(), "system")?;
        let n_e = qubits_of(h_e.dim(), "environment")?;
        if n_s + n_e > MAX_JOINT_QUBITS {
            return Err(Error::InvalidParameter(format!(
                "joint register of {} qubits exceeds the cap of {MAX_JOINT_QUBITS}",
                n_s + n_e
            )));
        }
        if h_int.dim() != h_s.dim() * h_e.dim() {
            return Err(Error::DimensionMismatch {
                expected: h_s.dim() * h_e.dim(),
                found: h_int.dim(),
            });
        }
        if rho_s0.dim() != h_s.dim() {
            return Err(Error::DimensionMismatch {
                expected: h_s.dim(),
                found: rho_s0.dim(),
            });
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidParameter(format!("beta must be positive and finite, got {beta}")));
        }
        Ok(Self {
            h_s,
            h_e,
            h_int,
            beta,
            rho_s0,
            n_s,
            n_e,
        })
    }

    pub fn h_s(&self) -> &HermitianOperator {
        &self.h_s
    }

    pub fn h_e(&self) -> &HermitianOperator {
        &self.h_e
    }

    pub fn h_int(&self) -> &HermitianOperator {
        &self.h_int
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn rho_s0(&self) -> &DensityMatrix {
        &self.rho_s0
    }

    pub fn n_s(&self) -> usize {
        self.n_s
    }

    pub fn n_e(&self) -> usize {
        self.n_e
    }

    pub fn system_qubits(&self) -> Vec<usize> {
        (0..self.n_s).collect()
    }

    pub fn environment_qubits(&self) -> Vec<usize> {
        (self.n_s..self.n_s + self.n_e).collect()
    }

    pub fn joint_hamiltonian(&self) -> HermitianOperator {
        let hs = kron(self.h_s.matrix(), &identity(self.h_e.dim()));
        let he = kron(&identity(self.h_s.dim()), self.h_e.matrix());
        HermitianOperator::new(hs + he + self.h_int.matrix()).expect("sum of Hermitian operators")
    }

    /// Gibbs state of the environment at inverse temperature `beta`.
    pub fn environment_equilibrium(&self) -> Result<DensityMatrix> {
        qcore::gibbs_state(&self.h_e, self.beta)
    }

    pub fn initial_state(&self) -> Result<DensityMatrix> {
        self.rho_s0.tensor(&self.environment_equilibrium()?)
    }

    /// `||h_int|| / min(||h_S||, ||h_E||)`; small values mean weak coupling.
    pub fn weak_coupling_ratio(&self) -> Result<f64> {
        let scale = self.h_s.spectral_norm()?.min(self.h_e.spectral_norm()?);
        Ok(self.h_int.spectral_norm()? / scale)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingPreset {
    /// `sum_k Z^S_k ⊗ X^E_{k mod N_E}`
    Dephasing,
    /// Random Gaussian combination of all `sigma^S_i ⊗ sigma^E_j` products,
    /// normalised by `1 / sqrt(9 N_S N_E)`.
    Dissipative,
    /// No coupling.
    None,
}

impl fmt::Display for CouplingPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CouplingPreset::Dephasing => "dephasing",
            CouplingPreset::Dissipative => "dissipative",
            CouplingPreset::None => "none",
        })
    }
}

impl FromStr for CouplingPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dephasing" => Ok(CouplingPreset::Dephasing),
            "dissipative" => Ok(CouplingPreset::Dissipative),
            "none" => Ok(CouplingPreset::None),
            other => Err(Error::InvalidParameter(format!("unknown coupling preset '{other}'"))),
        }
    }
}

/// `sum_k omega_k Z_k` with `omega_k ~ U[0.5, 1.5]`.
pub fn random_environment(n_e: usize, rng: &mut ChaCha20Rng) -> HermitianOperator {
    let dist = Uniform::new(0.5, 1.5).expect("valid range");
    let h = (0..n_e).fold(linalg::zeros(1 << n_e), |acc, k| {
        let w: f64 = dist.sample(rng);
        acc + pauli::on_site(&pauli::z(), k, n_e).mapv(|z| z * w)
    });
    HermitianOperator::new(h).expect("diagonal real matrix")
}

/// Interaction term of strength `lambda` on the joint register.
pub fn coupling(preset: CouplingPreset, n_s: usize, n_e: usize, lambda: f64, rng: &mut ChaCha20Rng) -> HermitianOperator {
    let n = n_s + n_e;
    let paulis = [pauli::x(), pauli::y(), pauli::z()];
    let mut h = linalg::zeros(1 << n);
    match preset {
        CouplingPreset::None => {}
        CouplingPreset::Dephasing => {
            for k in 0..n_s {
                let zs = pauli::on_site(&pauli::z(), k, n);
                let xe = pauli::on_site(&pauli::x(), n_s + k % n_e, n);
                h = h + zs.dot(&xe).mapv(|z| z * lambda);
            }
        }
        CouplingPreset::Dissipative => {
            let norm = lambda / (9.0 * (n_s * n_e) as f64).sqrt();
            for i in 0..n_s {
                for j in 0..n_e {
                    for a in &paulis {
                        for b in &paulis {
                            let c: f64 = StandardNormal.sample(rng);
                            let term = pauli::on_site(a, i, n).dot(&pauli::on_site(b, n_s + j, n));
                            h = h + term.mapv(|z| z * (c * norm));
                        }
                    }
                }
            }
        }
    }
    HermitianOperator::new(h).expect("products of commuting Paulis are Hermitian")
}

/// Initial system state choices for generated universes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemState {
    /// `exp(-beta h_S) / Z` at the universe temperature.
    Gibbs,
    /// The `k`-th eigenstate of `h_S` (ascending energy).
    Eigenstate(usize),
}

/// A universe with a random environment and a preset coupling.
///
/// `seed` fixes the environment frequencies and, for the dissipative preset, the
/// coupling coefficients.
pub fn generate_universe(
    h_s: HermitianOperator,
    n_e: usize,
    preset: CouplingPreset,
    lambda: f64,
    beta: f64,
    state: SystemState,
    seed: u64,
) -> Result<UniverseSpec> {
    let n_s = qubits_of(h_s.dim(), "system")?;
    if n_e == 0 {
        return Err(Error::InvalidParameter("environment needs at least one qubit".into()));
    }
    if n_s + n_e > MAX_JOINT_QUBITS {
        return Err(Error::InvalidParameter(format!(
            "joint register of {} qubits exceeds the cap of {MAX_JOINT_QUBITS}",
            n_s + n_e
        )));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let h_e = random_environment(n_e, &mut rng);
    let h_int = coupling(preset, n_s, n_e, lambda, &mut rng);
    let rho_s0 = match state {
        SystemState::Gibbs => qcore::gibbs_state(&h_s, beta)?,
        SystemState::Eigenstate(k) => {
            let (_, basis) = qcore::eigh(&h_s)?;
            if k >= basis.dim() {
                return Err(Error::InvalidParameter(format!("eigenstate index {k} out of range")));
            }
            DensityMatrix::pure(&basis.vector(k))?
        }
    };
    UniverseSpec::new(h_s, h_e, h_int, beta, rho_s0)
}

/// Joint states of the universe on a time grid.
#[derive(Clone, Debug)]
pub struct UniverseTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
}

/// `U(t) = exp(-i H t)` from an eigendecomposition of the joint Hamiltonian.
pub(crate) struct Evolution {
    energies: Vec<f64>,
    vecs: CMatrix,
}

impl Evolution {
    pub(crate) fn new(u: &UniverseSpec) -> Result<Self> {
        let (energies, vecs) = linalg::eigh_raw(u.joint_hamiltonian().matrix())?;
        Ok(Self { energies, vecs })
    }

    pub(crate) fn unitary(&self, t: f64) -> CMatrix {
        let phases: Vec<C64> = self.energies.iter().map(|e| C64::new(0.0, -e * t).exp()).collect();
        linalg::reconstruct_complex(&self.vecs, &phases)
    }

    fn evolve(&self, rho0: &CMatrix, t: f64) -> CMatrix {
        let vd = dagger(&self.vecs);
        let mut y = vd.dot(rho0).dot(&self.vecs);
        for ((j, k), z) in y.indexed_iter_mut() {
            *z *= C64::new(0.0, -(self.energies[j] - self.energies[k]) * t).exp();
        }
        self.vecs.dot(&y).dot(&vd)
    }
}

/// `rho(t) = U(t) (rho_S0 ⊗ rho_E^eq) U(t)^H` on every time of `times`.
pub fn evolve_universe(u: &UniverseSpec, times: &[f64]) -> Result<UniverseTrajectory> {
    crate::dynamics::check_grid(times)?;
    let rho0 = u.initial_state()?;
    let evolution = Evolution::new(u)?;
    let states = times
        .iter()
        .map(|&t| {
            DensityMatrix::new(evolution.evolve(rho0.matrix(), t)).map_err(|e| Error::InvariantViolation {
                time: t,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(UniverseTrajectory {
        times: times.to_vec(),
        states,
    })
}
