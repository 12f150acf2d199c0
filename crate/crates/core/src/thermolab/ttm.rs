use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observables::{coherence, mutual_information};
use crate::qcore::linalg::{self, dagger, kron};
use crate::qcore::{self, Basis, CMatrix, DensityMatrix, Partition};

use super::{Evolution, UniverseSpec};

/// Largest off-diagonal element of `rho_S0` in the `h_S` eigenbasis for which
/// the first measurement counts as non-disturbing.
const DIAGONAL_TOL: f64 = 1e-10;
/// Probabilities at or below this are outside the support.
const SUPPORT_CUTOFF: f64 = 1e-14;
const EXCLUDED_MASS_TOL: f64 = 1e-10;

/// Two-time-measurement statistics of the system energy and the environment
/// state.
///
/// The initial outcomes are `(mu, m)`: `h_S` eigenstates and `h_E` eigenstates.
/// The final outcomes are `(nu, n)`: `h_S` eigenstates and eigenstates of the
/// evolved environment `rho_E(t)`. `joint[[mu * d_E + m, nu * d_E + n]]` is
/// `p_mu p_m |<nu n|U(t)|mu m>|^2`. The reference populations `p_nu`, `p_n` are
/// read from the unmeasured marginals of the evolved state.
#[derive(Clone, Debug)]
pub struct TtmDistribution {
    pub t: f64,
    pub d_s: usize,
    pub d_e: usize,
    pub p_mu: Vec<f64>,
    pub p_m: Vec<f64>,
    pub p_nu: Vec<f64>,
    pub p_n: Vec<f64>,
    pub joint: Array2<f64>,
}

impl TtmDistribution {
    pub fn probability(&self, mu: usize, nu: usize, m: usize, n: usize) -> f64 {
        self.joint[[mu * self.d_e + m, nu * self.d_e + n]]
    }

    /// Stochastic system entropy production `ln p_mu - ln p_nu`.
    pub fn omega_s(&self, mu: usize, nu: usize) -> f64 {
        self.p_mu[mu].ln() - self.p_nu[nu].ln()
    }

    /// Stochastic environment entropy production `ln p_m - ln p_n`.
    pub fn omega_e(&self, m: usize, n: usize) -> f64 {
        self.p_m[m].ln() - self.p_n[n].ln()
    }

    pub fn total(&self) -> f64 {
        self.joint.sum()
    }
}

pub fn ttm_distribution(u: &UniverseSpec, t: f64) -> Result<TtmDistribution> {
    build(u, t, None)
}

/// Shared implementation; `env_final` overrides the eigenbasis of `rho_E(t)`
/// (eigenvalues and vectors), which only tests use.
pub(crate) fn build(u: &UniverseSpec, t: f64, env_final: Option<(Vec<f64>, CMatrix)>) -> Result<TtmDistribution> {
    let (_, basis_s) = qcore::eigh(u.h_s())?;
    let rho_s0_local = basis_s.to_basis(u.rho_s0().matrix());
    let off = rho_s0_local
        .indexed_iter()
        .filter(|((i, j), _)| i != j)
        .map(|(_, z)| z.norm())
        .fold(0.0, f64::max);
    if off > DIAGONAL_TOL {
        return Err(Error::Precondition(format!(
            "initial system state has coherences up to {off:e} in the h_S eigenbasis"
        )));
    }
    let p_mu: Vec<f64> = (0..basis_s.dim()).map(|k| rho_s0_local[[k, k]].re.max(0.0)).collect();
    let (_, basis_e) = qcore::eigh(u.h_e())?;
    let rho_eq = u.environment_equilibrium()?;
    let p_m: Vec<f64> = basis_e.populations(rho_eq.matrix()).iter().map(|z| z.re.max(0.0)).collect();

    let unitary = Evolution::new(u)?.unitary(t);
    let rho0 = u.initial_state()?;
    let rho_t = DensityMatrix::new(unitary.dot(rho0.matrix()).dot(&dagger(&unitary)))?;
    let rho_s = qcore::reduced_state(&rho_t, &u.system_qubits())?;
    let rho_e = qcore::reduced_state(&rho_t, &u.environment_qubits())?;
    let p_nu: Vec<f64> = basis_s.populations(rho_s.matrix()).iter().map(|z| z.re.max(0.0)).collect();
    let (p_n, vecs_n) = match env_final {
        Some(pair) => pair,
        None => linalg::eigh_canonical(rho_e.matrix())?,
    };
    let p_n: Vec<f64> = p_n.into_iter().map(|p| p.max(0.0)).collect();

    let initial = kron(basis_s.matrix(), basis_e.matrix());
    let fin = kron(basis_s.matrix(), &vecs_n);
    let amplitudes = dagger(&fin).dot(&unitary).dot(&initial);
    let d_s = basis_s.dim();
    let d_e = basis_e.dim();
    let dim = d_s * d_e;
    let mut joint = Array2::zeros((dim, dim));
    for i in 0..dim {
        let w = p_mu[i / d_e] * p_m[i % d_e];
        if w == 0.0 {
            continue;
        }
        for f in 0..dim {
            joint[[i, f]] = w * amplitudes[[f, i]].norm_sqr();
        }
    }
    let total: f64 = joint.sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::TraceNotOne { trace: total });
    }
    Ok(TtmDistribution {
        t,
        d_s,
        d_e,
        p_mu,
        p_m,
        p_nu,
        p_n,
        joint,
    })
}

/// `<exp(-(omega_S + omega_E))>` by exact summation together with the mean
/// entropy productions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FtResult {
    pub value: f64,
    pub deviation: f64,
    /// Probability of outcomes whose final reference population vanishes.
    pub excluded_mass: f64,
    pub mean_omega_s: f64,
    pub mean_omega_e: f64,
}

/// Integral fluctuation theorem check. Outcomes whose final populations lie
/// outside the support have undefined entropy production; their total
/// probability must stay below 1e-10.
pub fn integral_ft(d: &TtmDistribution) -> Result<FtResult> {
    let mut value = 0.0;
    let mut excluded = 0.0;
    let mut mean_s = 0.0;
    let mut mean_e = 0.0;
    for ((i, f), &p) in d.joint.indexed_iter() {
        if p <= 0.0 {
            continue;
        }
        let (mu, m) = (i / d.d_e, i % d.d_e);
        let (nu, n) = (f / d.d_e, f % d.d_e);
        if d.p_nu[nu] <= SUPPORT_CUTOFF || d.p_n[n] <= SUPPORT_CUTOFF {
            excluded += p;
            continue;
        }
        let ws = d.omega_s(mu, nu);
        let we = d.omega_e(m, n);
        value += p * (-(ws + we)).exp();
        mean_s += p * ws;
        mean_e += p * we;
    }
    if excluded > EXCLUDED_MASS_TOL {
        return Err(Error::UndefinedEntropyFlow { mass: excluded });
    }
    Ok(FtResult {
        value,
        deviation: (value - 1.0).abs(),
        excluded_mass: excluded,
        mean_omega_s: mean_s,
        mean_omega_e: mean_e,
    })
}

/// `(<omega_S> + <omega_E>, Delta I(S:E) + Delta C(S))`, the left side from
/// the measurement statistics and the right side from the joint state `rho_t`
/// at the distribution's time (coherence in the `h_S` eigenbasis).
pub fn average_entropy_production(d: &TtmDistribution, rho_t: &DensityMatrix, u: &UniverseSpec) -> Result<(f64, f64)> {
    let ft = integral_ft(d)?;
    let lhs = ft.mean_omega_s + ft.mean_omega_e;
    let n = u.n_s() + u.n_e();
    let split = Partition::new(n, u.system_qubits())?;
    let rho0 = u.initial_state()?;
    let delta_i = mutual_information(rho_t, &split)? - mutual_information(&rho0, &split)?;
    let (_, basis_s): (_, Basis) = qcore::eigh(u.h_s())?;
    let rho_s = qcore::reduced_state(rho_t, &u.system_qubits())?;
    let delta_c = coherence(&rho_s, &basis_s)? - coherence(u.rho_s0(), &basis_s)?;
    Ok((lhs, delta_i + delta_c))
}
