use crate::error::{Error, Result};
use crate::qcore::linalg::{dagger, max_abs_diff};
use crate::qcore::{CMatrix, DensityMatrix, HermitianOperator, C64};

use super::{check_grid, DecoherenceChannel, Trajectory};

const ENDPOINT_TOL: f64 = 1e-8;
const MAX_HALVINGS: usize = 6;

/// Right-hand side of the master equation in the lab frame:
/// `-i[H, rho] - gamma (rho - D(rho))`.
fn rhs(h: &CMatrix, ch: &DecoherenceChannel, rho: &CMatrix) -> CMatrix {
    let hr = h.dot(rho);
    let comm = &hr - &dagger(&hr);
    let mut out = comm.mapv(|z| z * C64::new(0.0, -1.0));
    if ch.gamma() > 0.0 {
        out.scaled_add(C64::new(-ch.gamma(), 0.0), &ch.coherent_part(rho));
    }
    out
}

fn integrate(h: &CMatrix, ch: &DecoherenceChannel, rho0: &CMatrix, times: &[f64], dt: f64) -> Vec<CMatrix> {
    let mut rho = rho0.clone();
    let mut out = vec![rho.clone()];
    for w in times.windows(2) {
        let span = w[1] - w[0];
        let steps = (span / dt).ceil().max(1.0) as usize;
        let h_step = span / steps as f64;
        let half = C64::new(0.5 * h_step, 0.0);
        let full = C64::new(h_step, 0.0);
        for _ in 0..steps {
            let k1 = rhs(h, ch, &rho);
            let mut probe = rho.clone();
            probe.scaled_add(half, &k1);
            let k2 = rhs(h, ch, &probe);
            probe.assign(&rho);
            probe.scaled_add(half, &k2);
            let k3 = rhs(h, ch, &probe);
            probe.assign(&rho);
            probe.scaled_add(full, &k3);
            let k4 = rhs(h, ch, &probe);
            let sixth = C64::new(h_step / 6.0, 0.0);
            rho.scaled_add(sixth, &k1);
            rho.scaled_add(sixth * 2.0, &k2);
            rho.scaled_add(sixth * 2.0, &k3);
            rho.scaled_add(sixth, &k4);
        }
        out.push(rho.clone());
    }
    out
}

/// Direct fourth-order Runge–Kutta integration of the master equation on the
/// output grid `times`, with no vectorisation.
///
/// Each output interval is split into `ceil(span / dt)` equal steps. The run is
/// repeated with `dt / 2` and the step keeps halving until the final state moves
/// by less than 1e-8 entrywise and every state passes density-matrix
/// validation; the finer of the last two runs is returned.
pub fn rk4_oracle(
    rho0: &DensityMatrix,
    h: &HermitianOperator,
    ch: &DecoherenceChannel,
    dt: f64,
    times: &[f64],
) -> Result<Trajectory> {
    check_grid(times)?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("RK4 step must be positive, got {dt}")));
    }
    for d in [h.dim(), ch.basis().dim()] {
        if d != rho0.dim() {
            return Err(Error::DimensionMismatch {
                expected: rho0.dim(),
                found: d,
            });
        }
    }
    let mut dt = dt;
    let mut coarse = integrate(h.matrix(), ch, rho0.matrix(), times, dt);
    let mut shift = f64::INFINITY;
    for halving in 0..=MAX_HALVINGS {
        dt /= 2.0;
        let fine = integrate(h.matrix(), ch, rho0.matrix(), times, dt);
        shift = max_abs_diff(coarse.last().expect("non-empty"), fine.last().expect("non-empty"));
        if shift < ENDPOINT_TOL {
            // integration error can still leave eigenvalues just below the
            // positivity tolerance; a finer step settles them
            let states: Result<Vec<_>> = fine
                .iter()
                .zip(times)
                .map(|(m, &time)| {
                    DensityMatrix::new(m.clone()).map_err(|e| Error::InvariantViolation {
                        time,
                        source: Box::new(e),
                    })
                })
                .collect();
            match states {
                Ok(states) => {
                    return Ok(Trajectory {
                        times: times.to_vec(),
                        states,
                        channel: ch.clone(),
                        model: None,
                    })
                }
                Err(e) if halving == MAX_HALVINGS => return Err(e),
                Err(_) => {}
            }
        }
        coarse = fine;
    }
    Err(Error::Convergence { shift, dt })
}
