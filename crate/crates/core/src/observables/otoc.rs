use ndarray::{Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dynamics::Liouvillian;
use crate::error::{Error, Result};
use crate::models::split_seed;
use crate::qcore::linalg;
use crate::qcore::{self, CMatrix, DensityMatrix, Partition, C64};

use super::mean_and_se;

/// Allowed deviation of an operator from acting trivially off its support.
const SUPPORT_TOL: f64 = 1e-10;
/// State eigenvalues below this are dropped from the expectation value.
const RANK_CUTOFF: f64 = 1e-14;

fn check_support(op: &CMatrix, support: &[usize], n: usize) -> Result<()> {
    let deviation = qcore::support_defect(op, support, n)?;
    if deviation > SUPPORT_TOL {
        return Err(Error::OperatorSupport {
            subset: support.to_vec(),
            deviation,
        });
    }
    Ok(())
}

/// `sqrt(p_k) |v_k>` for the non-negligible eigenpairs of `rho`, as columns.
fn weighted_eigenvectors(rho: &DensityMatrix) -> Result<CMatrix> {
    let (vals, vecs) = linalg::eigh_raw(rho.matrix())?;
    let keep: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] > RANK_CUTOFF).collect();
    let mut out = vecs.select(Axis(1), &keep);
    for (mut col, &k) in out.axis_iter_mut(Axis(1)).zip(&keep) {
        let w = vals[k].sqrt();
        col.mapv_inplace(|z| z * w);
    }
    Ok(out)
}

/// `tr(rho A^H B^H A B)` for `R R^H = rho`, evaluated as `<B A R, A B R>`.
fn correlator(r: &CMatrix, a: &CMatrix, b: &CMatrix) -> C64 {
    let x = b.dot(&a.dot(r));
    let y = a.dot(&b.dot(r));
    x.iter().zip(y.iter()).map(|(p, q)| p.conj() * q).sum()
}

/// Out-of-time-order correlator `<O_A^H O_B(t)^H O_A O_B(t)>` in `rho_ref` on
/// every time of `times`, with `O_B(t)` evolved under the adjoint of the
/// dynamical map. `op_a` must act on side `A` of `part`, `op_b` on side `B`.
pub fn otoc(
    rho_ref: &DensityMatrix,
    op_a: &CMatrix,
    op_b: &CMatrix,
    part: &Partition,
    l: &Liouvillian,
    times: &[f64],
) -> Result<Vec<C64>> {
    let n = part.total_qubits();
    for d in [rho_ref.dim(), op_a.nrows(), op_b.nrows(), l.hilbert_dim()] {
        if d != part.dim() {
            return Err(Error::DimensionMismatch {
                expected: part.dim(),
                found: d,
            });
        }
    }
    check_support(op_a, part.subset_a(), n)?;
    check_support(op_b, &part.subset_b(), n)?;
    let r = weighted_eigenvectors(rho_ref)?;
    Ok(l.heisenberg(op_b, times)?
        .iter()
        .map(|b| correlator(&r, op_a, b))
        .collect())
}

/// Haar-distributed unitary: complex Ginibre matrix with `N(0, 1/2)` real and
/// imaginary parts, orthonormalised column by column so that the implied `R`
/// factor has a positive real diagonal.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut g: CMatrix = Array2::from_shape_simple_fn((dim, dim), || {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * s, im * s)
    });
    for k in 0..dim {
        // two Gram–Schmidt passes keep the columns orthogonal to machine precision
        for _ in 0..2 {
            for j in 0..k {
                let overlap: C64 = g
                    .column(j)
                    .iter()
                    .zip(g.column(k).iter())
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                let qj = g.column(j).to_owned();
                g.column_mut(k).scaled_add(-overlap, &qj);
            }
        }
        let norm = g.column(k).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        g.column_mut(k).mapv_inplace(|z| z / norm);
    }
    g
}

/// Monte Carlo estimate of the Haar-averaged OTOC decay `O(0) - O(t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HaarOtoc {
    pub times: Vec<f64>,
    /// Mean of the real part.
    pub mean: Vec<f64>,
    pub se: Vec<f64>,
    /// Mean of the imaginary part; vanishes only as the sample count grows.
    pub mean_imag: Vec<f64>,
    pub n_samples: usize,
}

/// Average `O(0) - O(t)` over `n_samples` independent pairs of Haar unitaries
/// on the two sides of `part`. Sample `s` draws from a stream seeded with
/// `split_seed(seed, s)`.
pub fn haar_delta_otoc(
    rho_ref: &DensityMatrix,
    part: &Partition,
    l: &Liouvillian,
    times: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<HaarOtoc> {
    if n_samples == 0 {
        return Err(Error::InvalidParameter("n_samples must be at least 1".into()));
    }
    let n = part.total_qubits();
    let side_a = part.subset_a().to_vec();
    let side_b = part.subset_b();
    let mut real = Vec::with_capacity(n_samples);
    let mut imag = Vec::with_capacity(n_samples);
    for s in 0..n_samples {
        let mut rng = ChaCha20Rng::seed_from_u64(split_seed(seed, s as u64));
        let u_a = qcore::embed_operator(&haar_unitary(1 << side_a.len(), &mut rng), &side_a, n)?;
        let u_b = qcore::embed_operator(&haar_unitary(1 << side_b.len(), &mut rng), &side_b, n)?;
        let values = otoc(rho_ref, &u_a, &u_b, part, l, times)?;
        let o0 = values[0];
        real.push(values.iter().map(|v| (o0 - v).re).collect::<Vec<_>>());
        imag.push(values.iter().map(|v| (o0 - v).im).collect::<Vec<_>>());
    }
    let cols: Vec<&[f64]> = real.iter().map(Vec::as_slice).collect();
    let (mean, se) = mean_and_se(&cols);
    let cols: Vec<&[f64]> = imag.iter().map(Vec::as_slice).collect();
    let (mean_imag, _) = mean_and_se(&cols);
    Ok(HaarOtoc {
        times: times.to_vec(),
        mean,
        se,
        mean_imag,
        n_samples,
    })
}
