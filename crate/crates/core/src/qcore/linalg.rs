//! Matrix helpers on top of `ndarray` / `ndarray-linalg`.

use ndarray::{Array1, Array2, Axis, ShapeBuilder};
use ndarray_linalg::{EigValsh, Eigh, Inverse, UPLO};
use num_complex::Complex64;

use super::{Basis, CMatrix, HermitianOperator, C64};
use crate::error::{Error, Result};

/// Eigenvalues closer than this are treated as one degenerate cluster.
pub const DEGENERACY_GAP: f64 = 1e-9;

const PHASE_FIX_THRESHOLD: f64 = 1e-12;

pub fn identity(dim: usize) -> CMatrix {
    Array2::from_diag_elem(dim, C64::new(1.0, 0.0))
}

pub fn zeros(dim: usize) -> CMatrix {
    Array2::zeros((dim, dim))
}

/// Conjugate transpose.
pub fn dagger(a: &CMatrix) -> CMatrix {
    a.t().mapv(|z| z.conj())
}

/// Kronecker product with the left factor as the most significant index.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    ndarray::linalg::kron(a, b)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.dot(b) - b.dot(a)
}

/// Largest entrywise modulus.
pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0, |m, (x, y)| m.max((x - y).norm()))
}

/// Max entrywise |A - A^H|.
pub fn hermiticity_defect(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[[i, j]] - a[[j, i]].conj()).norm());
        }
    }
    worst
}

pub fn trace(a: &CMatrix) -> C64 {
    a.diag().sum()
}

/// `tr(A B)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for (i, row) in a.axis_iter(Axis(0)).enumerate() {
        acc += row.dot(&b.column(i));
    }
    acc
}

pub(crate) fn check_square(a: &CMatrix) -> Result<usize> {
    let (r, c) = a.dim();
    if r != c || r == 0 {
        return Err(Error::NotSquare { rows: r, cols: c });
    }
    Ok(r)
}

/// Eigenvalues of the Hermitian part of `a`, ascending.
pub fn eigvalsh(a: &CMatrix) -> Result<Vec<f64>> {
    Ok(a.eigvalsh(UPLO::Lower)?.to_vec())
}

/// Raw backend eigendecomposition, no phase or degeneracy conventions.
pub(crate) fn eigh_raw(a: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    // The backend returns conjugated eigenvectors for complex row-major input,
    // so hand it a column-major copy.
    let mut col_major = CMatrix::zeros(a.raw_dim().f());
    col_major.assign(a);
    let (vals, vecs) = col_major.eigh(UPLO::Lower)?;
    Ok((vals.to_vec(), vecs))
}

/// Hermitian eigendecomposition with a reproducible gauge.
///
/// Eigenvalues come back ascending. Inside every cluster of eigenvalues whose
/// consecutive gaps are below [`DEGENERACY_GAP`] the backend's vectors are
/// replaced by a canonical basis of the same subspace: computational basis
/// vectors are projected onto the subspace and Gram–Schmidt orthonormalised in
/// index order (at each slot the lowest index whose residual is at least half
/// the largest available residual is taken). Every vector is then rotated so
/// that its first component of modulus above 1e-12 is real and positive.
pub fn eigh(h: &HermitianOperator) -> Result<(Vec<f64>, Basis)> {
    let (vals, vecs) = eigh_canonical(h.matrix())?;
    Ok((vals, Basis::from_trusted(vecs)))
}

/// Same as [`eigh`] on a raw matrix; rejects non-Hermitian input.
pub fn eigh_canonical(a: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    check_square(a)?;
    let defect = hermiticity_defect(a);
    if defect > super::HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation: defect });
    }
    let (vals, mut vecs) = eigh_raw(a)?;
    let n = vals.len();

    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && vals[end] - vals[end - 1] < DEGENERACY_GAP {
            end += 1;
        }
        if end - start > 1 {
            canonicalize_cluster(&mut vecs, start, end);
        }
        start = end;
    }

    for mut col in vecs.axis_iter_mut(Axis(1)) {
        if let Some(lead) = col.iter().copied().find(|z| z.norm() > PHASE_FIX_THRESHOLD) {
            let phase = lead.conj() / lead.norm();
            col.mapv_inplace(|z| z * phase);
        }
    }
    Ok((vals, vecs))
}

fn canonicalize_cluster(vecs: &mut CMatrix, start: usize, end: usize) {
    let n = vecs.nrows();
    let block = vecs.slice(ndarray::s![.., start..end]).to_owned();
    // Column j of the projector restricted to the cluster: P e_j = V (V^H e_j).
    let projected: Vec<Array1<C64>> = (0..n)
        .map(|j| {
            let coeffs = block.row(j).mapv(|z| z.conj());
            block.dot(&coeffs)
        })
        .collect();

    let mut accepted: Vec<Array1<C64>> = Vec::with_capacity(end - start);
    for _ in start..end {
        let residuals: Vec<Array1<C64>> = projected
            .iter()
            .map(|v| {
                let mut r = v.clone();
                for q in &accepted {
                    let overlap = q.iter().zip(r.iter()).map(|(a, b)| a.conj() * b).sum::<C64>();
                    r.scaled_add(-overlap, q);
                }
                r
            })
            .collect();
        let norms: Vec<f64> = residuals.iter().map(vec_norm).collect();
        let best = norms.iter().cloned().fold(0.0, f64::max);
        let pick = norms
            .iter()
            .position(|&x| x >= 0.5 * best)
            .expect("cluster projector has nonzero rank");
        let mut v = residuals[pick].clone();
        // second pass for numerical orthogonality
        for q in &accepted {
            let overlap = q.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum::<C64>();
            v.scaled_add(-overlap, q);
        }
        let norm = vec_norm(&v);
        v.mapv_inplace(|z| z / norm);
        accepted.push(v);
    }
    for (k, v) in accepted.into_iter().enumerate() {
        vecs.column_mut(start + k).assign(&v);
    }
}

pub(crate) fn vec_norm(v: &Array1<C64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `V diag(w) V^H` for real weights.
pub fn reconstruct(vecs: &CMatrix, weights: &[f64]) -> CMatrix {
    let mut scaled = vecs.clone();
    for (mut col, &w) in scaled.axis_iter_mut(Axis(1)).zip(weights) {
        col.mapv_inplace(|z| z * w);
    }
    scaled.dot(&dagger(vecs))
}

/// `V diag(w) V^H` for complex weights.
pub fn reconstruct_complex(vecs: &CMatrix, weights: &[C64]) -> CMatrix {
    let mut scaled = vecs.clone();
    for (mut col, &w) in scaled.axis_iter_mut(Axis(1)).zip(weights) {
        col.mapv_inplace(|z| z * w);
    }
    scaled.dot(&dagger(vecs))
}

/// Induced 1-norm (max column sum).
pub fn norm_one(a: &CMatrix) -> f64 {
    a.axis_iter(Axis(1))
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

// Padé(13) coefficients and the θ13 threshold from Higham's scaling-and-squaring
// algorithm.
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

/// Dense matrix exponential by scaling and squaring with a degree-13 Padé
/// approximant.
pub fn expm(a: &CMatrix) -> Result<CMatrix> {
    let n = check_square(a)?;
    let norm = norm_one(a);
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let scale = 0.5f64.powi(squarings);
    let a = a.mapv(|z| z * scale);
    let id = identity(n);
    let a2 = a.dot(&a);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);
    let b = |k: usize| Complex64::new(PADE13[k], 0.0);

    let inner_u = &a6 * b(13) + &a4 * b(11) + &a2 * b(9);
    let u = a.dot(&(a6.dot(&inner_u) + &a6 * b(7) + &a4 * b(5) + &a2 * b(3) + &id * b(1)));
    let inner_v = &a6 * b(12) + &a4 * b(10) + &a2 * b(8);
    let v = a6.dot(&inner_v) + &a6 * b(6) + &a4 * b(4) + &a2 * b(2) + &id * b(0);

    let numer = &v + &u;
    let denom = &v - &u;
    let mut r = denom.inv()?.dot(&numer);
    for _ in 0..squarings {
        r = r.dot(&r);
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::pauli;
    use ndarray::array;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn kron_of_identities_is_identity() {
        assert_eq!(kron(&identity(2), &identity(2)), identity(4));
    }

    #[test]
    fn kron_puts_left_factor_most_significant() {
        let zi = kron(&pauli::z(), &identity(2));
        let expected = Array2::from_diag(&array![c(1.0), c(1.0), c(-1.0), c(-1.0)]);
        assert_eq!(zi, expected);

        let xx = kron(&pauli::x(), &pauli::x());
        let ket00 = array![c(1.0), c(0.0), c(0.0), c(0.0)];
        let out = xx.dot(&ket00);
        assert_eq!(out, array![c(0.0), c(0.0), c(0.0), c(1.0)]);
    }

    #[test]
    fn eigh_of_pauli_z() {
        let h = HermitianOperator::new(pauli::z()).unwrap();
        let (vals, basis) = eigh(&h).unwrap();
        assert_eq!(vals, vec![-1.0, 1.0]);
        let v = basis.matrix();
        assert!((v[[0, 0]] - c(0.0)).norm() < 1e-15 && (v[[1, 0]] - c(1.0)).norm() < 1e-15);
        assert!((v[[0, 1]] - c(1.0)).norm() < 1e-15 && (v[[1, 1]] - c(0.0)).norm() < 1e-15);
    }

    #[test]
    fn eigh_of_pauli_x_is_phase_fixed() {
        let h = HermitianOperator::new(pauli::x()).unwrap();
        let (vals, basis) = eigh(&h).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14 && (vals[1] - 1.0).abs() < 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = basis.matrix();
        assert!((v[[0, 0]] - c(s)).norm() < 1e-14);
        assert!((v[[1, 0]] - c(-s)).norm() < 1e-14);
        assert!((v[[0, 1]] - c(s)).norm() < 1e-14);
        assert!((v[[1, 1]] - c(s)).norm() < 1e-14);
    }

    #[test]
    fn eigh_rejects_non_hermitian() {
        let a = array![[c(0.0), c(1.0)], [c(0.0), c(0.0)]];
        assert!(matches!(eigh_canonical(&a), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn eigh_diagonalises_complex_matrices() {
        let a = array![
            [c(1.0), C64::new(0.3, 0.7), C64::new(0.0, -0.2)],
            [C64::new(0.3, -0.7), c(-0.5), C64::new(1.1, 0.4)],
            [C64::new(0.0, 0.2), C64::new(1.1, -0.4), c(0.25)]
        ];
        let (vals, vecs) = eigh_canonical(&a).unwrap();
        let lambda = Array2::from_diag(&Array1::from_iter(vals.iter().map(|&v| c(v))));
        assert!(max_abs_diff(&a.dot(&vecs), &vecs.dot(&lambda)) < 1e-13);
    }

    #[test]
    fn degenerate_cluster_is_gauge_independent() {
        // Two different orthonormal frames of the same 2-d subspace must be
        // mapped to the same canonical vectors.
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut a = identity(4);
        let mut b = identity(4);
        let rot = array![
            [C64::new(s, 0.0), C64::new(0.0, s)],
            [C64::new(0.0, s), C64::new(s, 0.0)]
        ];
        let block = a.slice(ndarray::s![.., 2..4]).dot(&rot);
        b.slice_mut(ndarray::s![.., 2..4]).assign(&block);
        canonicalize_cluster(&mut a, 2, 4);
        canonicalize_cluster(&mut b, 2, 4);
        assert!(max_abs_diff(&a, &b) < 1e-14);
    }

    #[test]
    fn expm_matches_closed_form_rotation() {
        let theta = 0.83;
        let a = pauli::x() * C64::new(0.0, -theta);
        let e = expm(&a).unwrap();
        let expected = identity(2) * c(theta.cos()) + pauli::x() * C64::new(0.0, -theta.sin());
        assert!(max_abs_diff(&e, &expected) < 1e-14);

        // large norm exercises the squaring phase
        let a = pauli::z() * c(-20.0);
        let e = expm(&a).unwrap();
        assert!((e[[0, 0]] - c((-20.0f64).exp())).norm() < 1e-20);
        assert!((e[[1, 1]].re / 20.0f64.exp() - 1.0).abs() < 1e-13);
    }
}
