use std::cell::RefCell;

use crate::error::{Error, Result};
use crate::qcore::linalg::{self, dagger, expm, identity, kron, max_abs};
use crate::qcore::{Basis, CMatrix, DensityMatrix, HermitianOperator, C64};

use super::{check_grid, unstack, DecoherenceChannel, Trajectory};

/// Hilbert-space dimension up to which the dense `N^2 x N^2` exponential is used.
const DENSE_MAX_DIM: usize = 16;
/// Largest `||L|| dt` per Taylor substep.
const TAYLOR_THETA: f64 = 4.0;
const TAYLOR_MAX_TERMS: usize = 200;

/// How a [`Liouvillian`] advances states.
///
/// All variants solve the same linear equation; the choice only depends on
/// structure. `Diagonal` applies when the Hamiltonian is diagonal in the channel
/// basis (always the case for the energy channel), `Unitary` when `gamma = 0`,
/// `Dense` exponentiates the full generator for small systems and `Taylor`
/// applies a truncated exponential series of the superoperator directly to the
/// matrix, which avoids ever forming the `N^2 x N^2` generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PropagationMethod {
    Diagonal,
    Unitary,
    Dense,
    Taylor,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Direction {
    Forward,
    Adjoint,
}

/// Generator `A = W - gamma I + gamma V` of the master equation, kept in the
/// channel basis where `V` projects onto the diagonal positions.
#[derive(Clone, Debug)]
pub struct Liouvillian {
    /// Hamiltonian in channel coordinates.
    h: CMatrix,
    channel: DecoherenceChannel,
    method: PropagationMethod,
    /// Diagonal of `h` (Diagonal) or its eigenvalues (all other methods).
    energies: Vec<f64>,
    /// Eigenvectors of `h` for the Unitary method.
    eigvecs: Option<CMatrix>,
    fault: f64,
}

/// Assemble the generator of `ch` for Hamiltonian `h`.
pub fn build_liouvillian(h: &HermitianOperator, ch: &DecoherenceChannel) -> Result<Liouvillian> {
    if h.dim() != ch.basis().dim() {
        return Err(Error::DimensionMismatch {
            expected: ch.basis().dim(),
            found: h.dim(),
        });
    }
    let hc = ch.basis().to_basis(h.matrix());
    let n = hc.nrows();
    let scale = max_abs(&hc).max(1.0);
    let off_diagonal = hc
        .indexed_iter()
        .filter(|((i, j), _)| i != j)
        .map(|(_, z)| z.norm())
        .fold(0.0, f64::max);

    let mut l = Liouvillian {
        h: hc,
        channel: ch.clone(),
        method: PropagationMethod::Taylor,
        energies: Vec::new(),
        eigvecs: None,
        fault: 0.0,
    };
    if off_diagonal <= 1e-12 * scale {
        // drop roundoff left over from rotating into the eigenbasis
        let diag: Vec<f64> = (0..n).map(|k| l.h[[k, k]].re).collect();
        l.h = CMatrix::from_diag(&ndarray::Array1::from_iter(diag.iter().map(|&e| C64::new(e, 0.0))));
        l.energies = diag;
        l.method = PropagationMethod::Diagonal;
    } else {
        let (vals, vecs) = linalg::eigh_raw(&l.h)?;
        l.energies = vals;
        if ch.gamma() == 0.0 {
            l.eigvecs = Some(vecs);
            l.method = PropagationMethod::Unitary;
        } else if n <= DENSE_MAX_DIM {
            l.method = PropagationMethod::Dense;
        }
    }
    Ok(l)
}

impl Liouvillian {
    /// Fock–Liouville dimension `N^2`.
    pub fn dim(&self) -> usize {
        self.hilbert_dim() * self.hilbert_dim()
    }

    pub fn hilbert_dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn channel(&self) -> &DecoherenceChannel {
        &self.channel
    }

    pub fn method(&self) -> PropagationMethod {
        self.method
    }

    /// Hamiltonian expressed in the channel basis.
    pub fn hamiltonian_in_channel_basis(&self) -> &CMatrix {
        &self.h
    }

    /// Select a propagation method explicitly (used to cross-check methods).
    pub fn with_method(mut self, method: PropagationMethod) -> Result<Self> {
        match method {
            PropagationMethod::Diagonal if self.method != PropagationMethod::Diagonal => {
                return Err(Error::Precondition(
                    "Hamiltonian is not diagonal in the channel basis".into(),
                ))
            }
            PropagationMethod::Unitary if self.channel.gamma() != 0.0 || self.fault != 0.0 => {
                return Err(Error::Precondition("unitary propagation needs gamma = 0".into()))
            }
            PropagationMethod::Unitary if self.eigvecs.is_none() => {
                let (vals, vecs) = linalg::eigh_raw(&self.h)?;
                self.energies = vals;
                self.eigvecs = Some(vecs);
            }
            _ => {}
        }
        self.method = method;
        Ok(self)
    }

    /// Adds the non-physical term `kappa tr(rho) (|0><1| + |1><0|)` to the
    /// forward generator. It breaks positivity and exists only to exercise the
    /// invariant checks downstream.
    #[doc(hidden)]
    pub fn inject_fault(mut self, kappa: f64) -> Self {
        self.fault = kappa;
        self.method = if self.hilbert_dim() <= DENSE_MAX_DIM {
            PropagationMethod::Dense
        } else {
            PropagationMethod::Taylor
        };
        self
    }

    /// The dense `N^2 x N^2` generator in channel coordinates (row-major
    /// vectorisation).
    pub fn generator(&self) -> CMatrix {
        let n = self.hilbert_dim();
        let id = identity(n);
        let minus_i = C64::new(0.0, -1.0);
        let mut a = (kron(&self.h, &id) - kron(&id, &self.h.t().to_owned())).mapv(|z| z * minus_i);
        let gamma = self.channel.gamma();
        for k in 0..n * n {
            a[[k, k]] -= gamma;
        }
        for k in 0..n {
            a[[k * n + k, k * n + k]] += gamma;
        }
        if self.fault != 0.0 && n >= 2 {
            for k in 0..n {
                a[[1, k * n + k]] += self.fault;
                a[[n, k * n + k]] += self.fault;
            }
        }
        a
    }

    /// Action of the generator on a matrix in channel coordinates.
    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        self.apply_dir(x, Direction::Forward, false)
    }

    /// Action of the adjoint generator (Heisenberg picture) in channel coordinates.
    pub fn apply_adjoint(&self, x: &CMatrix) -> CMatrix {
        self.apply_dir(x, Direction::Adjoint, false)
    }

    fn apply_dir(&self, x: &CMatrix, dir: Direction, hermitian: bool) -> CMatrix {
        let hx = self.h.dot(x);
        let comm = if hermitian { &hx - &dagger(&hx) } else { hx - x.dot(&self.h) };
        let factor = match dir {
            Direction::Forward => C64::new(0.0, -1.0),
            Direction::Adjoint => C64::new(0.0, 1.0),
        };
        let gamma = self.channel.gamma();
        let mut out = comm.mapv(|z| z * factor) - x.mapv(|z| z * gamma);
        for k in 0..out.nrows() {
            out[[k, k]] += x[[k, k]] * gamma;
        }
        if self.fault != 0.0 && out.nrows() >= 2 {
            match dir {
                Direction::Forward => {
                    let t = linalg::trace(x) * self.fault;
                    out[[0, 1]] += t;
                    out[[1, 0]] += t;
                }
                Direction::Adjoint => {
                    let s = (x[[0, 1]] + x[[1, 0]]) * self.fault;
                    for k in 0..out.nrows() {
                        out[[k, k]] += s;
                    }
                }
            }
        }
        out
    }

    /// Upper bound on the superoperator norm used to size Taylor substeps.
    fn norm_bound(&self) -> f64 {
        let range = match (self.energies.first(), self.energies.last()) {
            (Some(lo), Some(hi)) => {
                let (lo, hi) = self
                    .energies
                    .iter()
                    .fold((*lo, *hi), |(a, b), &e| (a.min(e), b.max(e)));
                hi - lo
            }
            _ => 0.0,
        };
        range + self.channel.gamma() + self.fault.abs() * self.hilbert_dim() as f64
    }

    fn taylor_step(&self, x: &CMatrix, dt: f64, dir: Direction, hermitian: bool) -> CMatrix {
        let substeps = ((dt * self.norm_bound()) / TAYLOR_THETA).ceil().max(1.0) as usize;
        let h = dt / substeps as f64;
        let mut current = x.clone();
        for _ in 0..substeps {
            let mut sum = current.clone();
            let mut term = current;
            for k in 1..=TAYLOR_MAX_TERMS {
                let scale = h / k as f64;
                term = self.apply_dir(&term, dir, hermitian).mapv(|z| z * scale);
                sum += &term;
                if max_abs(&term) <= 1e-17 * max_abs(&sum).max(1e-300) {
                    break;
                }
            }
            current = sum;
        }
        current
    }

    /// Evolve `x0` (channel coordinates) to every time in `times`.
    fn evolve(&self, x0: &CMatrix, times: &[f64], dir: Direction, hermitian: bool) -> Result<Vec<CMatrix>> {
        check_grid(times)?;
        let n = self.hilbert_dim();
        if x0.nrows() != n || x0.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: x0.nrows(),
            });
        }
        let sign = match dir {
            Direction::Forward => -1.0,
            Direction::Adjoint => 1.0,
        };
        let gamma = self.channel.gamma();
        let mut out = Vec::with_capacity(times.len());
        match self.method {
            PropagationMethod::Diagonal => {
                for &t in times {
                    let mut x = x0.clone();
                    for ((j, k), z) in x.indexed_iter_mut() {
                        if j != k {
                            let phase = C64::new(-gamma * t, sign * (self.energies[j] - self.energies[k]) * t);
                            *z *= phase.exp();
                        }
                    }
                    out.push(x);
                }
            }
            PropagationMethod::Unitary => {
                let v = self.eigvecs.as_ref().expect("unitary method keeps eigenvectors");
                let vd = dagger(v);
                let y0 = vd.dot(x0).dot(v);
                for &t in times {
                    let mut y = y0.clone();
                    for ((j, k), z) in y.indexed_iter_mut() {
                        *z *= C64::new(0.0, sign * (self.energies[j] - self.energies[k]) * t).exp();
                    }
                    out.push(v.dot(&y).dot(&vd));
                }
            }
            PropagationMethod::Dense => {
                let mut a = self.generator();
                if dir == Direction::Adjoint {
                    a = dagger(&a);
                }
                // uniform grids hit the cache after the first step
                let cache: RefCell<Option<(f64, CMatrix)>> = RefCell::new(None);
                let step = |dt: f64| -> Result<CMatrix> {
                    let mut c = cache.borrow_mut();
                    if let Some((cached_dt, m)) = c.as_ref() {
                        if (cached_dt - dt).abs() <= 1e-12 * dt.abs().max(1.0) {
                            return Ok(m.clone());
                        }
                    }
                    let m = expm(&a.mapv(|z| z * dt))?;
                    *c = Some((dt, m.clone()));
                    Ok(m)
                };
                let mut v: ndarray::Array1<C64> = x0.iter().copied().collect();
                out.push(x0.clone());
                for w in times.windows(2) {
                    v = step(w[1] - w[0])?.dot(&v);
                    out.push(unstack(&v)?);
                }
            }
            PropagationMethod::Taylor => {
                let mut x = x0.clone();
                out.push(x.clone());
                for w in times.windows(2) {
                    x = self.taylor_step(&x, w[1] - w[0], dir, hermitian);
                    out.push(x.clone());
                }
            }
        }
        Ok(out)
    }

    /// Heisenberg-picture evolution of a (not necessarily Hermitian) lab-frame
    /// operator under the adjoint map, one entry per time.
    pub fn heisenberg(&self, op: &CMatrix, times: &[f64]) -> Result<Vec<CMatrix>> {
        let basis = self.channel.basis();
        let x0 = basis.to_basis(op);
        Ok(self
            .evolve(&x0, times, Direction::Adjoint, false)?
            .iter()
            .map(|x| basis.from_basis(x))
            .collect())
    }

    /// Lab-frame matrices `e^{A t} rho0` without density-matrix validation.
    pub fn evolve_raw(&self, rho0: &CMatrix, times: &[f64]) -> Result<Vec<CMatrix>> {
        let basis = self.channel.basis();
        let hermitian = linalg::hermiticity_defect(rho0) <= crate::qcore::HERMITIAN_TOL;
        Ok(self
            .evolve(&basis.to_basis(rho0), times, Direction::Forward, hermitian)?
            .iter()
            .map(|x| basis.from_basis(x))
            .collect())
    }

    pub fn basis(&self) -> &Basis {
        self.channel.basis()
    }
}

/// States `e^{A t_k} rho0` on `times`, each validated as a density matrix.
///
/// A state failing validation means the generator no longer describes a
/// physical map and is reported as [`Error::InvariantViolation`] at the
/// offending time.
pub fn propagate(rho0: &DensityMatrix, l: &Liouvillian, times: &[f64]) -> Result<Trajectory> {
    if rho0.dim() != l.hilbert_dim() {
        return Err(Error::DimensionMismatch {
            expected: l.hilbert_dim(),
            found: rho0.dim(),
        });
    }
    let raw = l.evolve_raw(rho0.matrix(), times)?;
    let states = raw
        .into_iter()
        .zip(times)
        .map(|(m, &time)| {
            DensityMatrix::new(m).map_err(|e| Error::InvariantViolation {
                time,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Trajectory {
        times: times.to_vec(),
        states,
        channel: l.channel.clone(),
        model: None,
    })
}
