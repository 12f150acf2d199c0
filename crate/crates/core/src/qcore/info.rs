use ndarray::Array2;

use super::{linalg, Basis, CMatrix, DensityMatrix, HermitianOperator, Partition, C64};
use crate::error::{Error, Result};

/// Eigenvalues of `sigma` below this are outside its support.
const SUPPORT_CUTOFF: f64 = 1e-14;
/// Weight of `rho` allowed outside the support of `sigma`.
const SUPPORT_LEAK_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Keep {
    A,
    B,
}

/// Basis-index offsets that place `k`-th local state of `qubits` into an
/// `n`-qubit register (qubit 0 most significant).
fn offsets(qubits: &[usize], n: usize) -> Vec<usize> {
    let m = qubits.len();
    (0..1usize << m)
        .map(|local| {
            qubits.iter().enumerate().fold(0usize, |acc, (p, &q)| {
                let bit = (local >> (m - 1 - p)) & 1;
                acc | (bit << (n - 1 - q))
            })
        })
        .collect()
}

fn complement(keep: &[usize], n: usize) -> Vec<usize> {
    (0..n).filter(|q| !keep.contains(q)).collect()
}

fn register_size(dim: usize) -> Result<usize> {
    if !dim.is_power_of_two() {
        return Err(Error::InvalidPartition(format!("dimension {dim} is not a power of two")));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Trace out every qubit not in `keep` (sorted, distinct) from an operator on
/// `n` qubits.
pub fn reduce_operator(a: &CMatrix, n: usize, keep: &[usize]) -> Result<CMatrix> {
    let dim = linalg::check_square(a)?;
    if dim != 1 << n {
        return Err(Error::DimensionMismatch { expected: 1 << n, found: dim });
    }
    if keep.windows(2).any(|w| w[0] >= w[1]) || keep.iter().any(|&q| q >= n) {
        return Err(Error::InvalidPartition(format!("bad qubit list {keep:?} for {n} qubits")));
    }
    let kept = offsets(keep, n);
    let traced = offsets(&complement(keep, n), n);
    let mut out = Array2::zeros((kept.len(), kept.len()));
    for (i, &ri) in kept.iter().enumerate() {
        for (j, &cj) in kept.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for &t in &traced {
                acc += a[[ri | t, cj | t]];
            }
            out[[i, j]] = acc;
        }
    }
    Ok(out)
}

/// Reduced state on the sorted qubit list `keep`.
pub fn reduced_state(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let n = register_size(rho.dim())?;
    DensityMatrix::new(reduce_operator(rho.matrix(), n, keep)?)
}

/// Reduced state on side `A` or `B` of a partition.
pub fn partial_trace(rho: &DensityMatrix, part: &Partition, keep: Keep) -> Result<DensityMatrix> {
    if rho.dim() != part.dim() {
        return Err(Error::DimensionMismatch { expected: part.dim(), found: rho.dim() });
    }
    match keep {
        Keep::A => reduced_state(rho, part.subset_a()),
        Keep::B => reduced_state(rho, &part.subset_b()),
    }
}

/// `op ⊗ I` with `op` acting on the sorted qubit list `support`.
pub fn embed_operator(op: &CMatrix, support: &[usize], n: usize) -> Result<CMatrix> {
    let local = linalg::check_square(op)?;
    if local != 1 << support.len() {
        return Err(Error::DimensionMismatch { expected: 1 << support.len(), found: local });
    }
    let kept = offsets(support, n);
    let rest = offsets(&complement(support, n), n);
    let mut out = Array2::zeros((1 << n, 1 << n));
    for (i, &ri) in kept.iter().enumerate() {
        for (j, &cj) in kept.iter().enumerate() {
            let v = op[[i, j]];
            if v == C64::new(0.0, 0.0) {
                continue;
            }
            for &t in &rest {
                out[[ri | t, cj | t]] = v;
            }
        }
    }
    Ok(out)
}

/// How far `op` is from acting as the identity outside `support`.
pub fn support_defect(op: &CMatrix, support: &[usize], n: usize) -> Result<f64> {
    let traced = n - support.len();
    let local = reduce_operator(op, n, support)?.mapv(|z| z / (1u64 << traced) as f64);
    let back = embed_operator(&local, support, n)?;
    Ok(linalg::max_abs_diff(op, &back))
}

/// Von Neumann entropy in nats, `0 ln 0 = 0`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    shannon(rho.spectrum())
}

/// Shannon entropy in nats of a probability vector.
pub fn shannon(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>()
}

/// Remove all coherences in `basis`: `sum_i |i><i| rho |i><i|`.
pub fn dephase(rho: &DensityMatrix, basis: &Basis) -> Result<DensityMatrix> {
    if rho.dim() != basis.dim() {
        return Err(Error::DimensionMismatch { expected: basis.dim(), found: rho.dim() });
    }
    let pops: Vec<f64> = basis.populations(rho.matrix()).iter().map(|z| z.re).collect();
    let mat = if basis.is_computational() {
        Array2::from_diag(&ndarray::Array1::from_iter(pops.iter().map(|&p| C64::new(p, 0.0))))
    } else {
        linalg::reconstruct(basis.matrix(), &pops)
    };
    DensityMatrix::new(mat)
}

/// Quantum relative entropy `D(rho || sigma) = tr rho ln rho - tr rho ln sigma`.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: sigma.dim(), found: rho.dim() });
    }
    let (vals, vecs) = linalg::eigh_raw(sigma.matrix())?;
    let weights = Basis::from_trusted(vecs).populations(rho.matrix());
    let mut cross = 0.0;
    let mut leaked = 0.0;
    for (&s, w) in vals.iter().zip(&weights) {
        if s < SUPPORT_CUTOFF {
            leaked += w.re;
        } else {
            cross += w.re * s.ln();
        }
    }
    if leaked > SUPPORT_LEAK_TOL {
        return Err(Error::SupportViolation { weight: leaked });
    }
    Ok(-von_neumann_entropy(rho) - cross)
}

/// Thermal state `exp(-beta H) / Z`, built in the eigenbasis of `h`.
pub fn gibbs_state(h: &HermitianOperator, beta: f64) -> Result<DensityMatrix> {
    if !beta.is_finite() || beta < 0.0 {
        return Err(Error::InvalidParameter(format!("beta must be finite and >= 0, got {beta}")));
    }
    let (energies, basis) = linalg::eigh(h)?;
    let ground = energies[0];
    let boltzmann: Vec<f64> = energies.iter().map(|e| (-beta * (e - ground)).exp()).collect();
    let z: f64 = boltzmann.iter().sum();
    let weights: Vec<f64> = boltzmann.iter().map(|w| w / z).collect();
    DensityMatrix::new(linalg::reconstruct(basis.matrix(), &weights))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{linalg::kron, pauli};
    use ndarray::{array, Array1};
    use std::f64::consts::LN_2;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn bell() -> DensityMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        DensityMatrix::pure(&array![c(s), c(0.0), c(0.0), c(s)]).unwrap()
    }

    fn diag(p: &[f64]) -> DensityMatrix {
        DensityMatrix::new(Array2::from_diag(&Array1::from_iter(p.iter().map(|&x| c(x))))).unwrap()
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let part = Partition::first_qubit(2).unwrap();
        let a = partial_trace(&bell(), &part, Keep::A).unwrap();
        assert!(linalg::max_abs_diff(a.matrix(), &(linalg::identity(2) * c(0.5))) < 1e-15);
    }

    #[test]
    fn product_state_marginal() {
        let ra = DensityMatrix::new(array![[c(0.7), C64::new(0.1, 0.2)], [C64::new(0.1, -0.2), c(0.3)]])
            .unwrap();
        let rb = diag(&[0.25, 0.25, 0.5, 0.0]);
        let joint = ra.tensor(&rb).unwrap();
        let part = Partition::first_qubit(3).unwrap();
        let a = partial_trace(&joint, &part, Keep::A).unwrap();
        let b = partial_trace(&joint, &part, Keep::B).unwrap();
        assert!(linalg::max_abs_diff(a.matrix(), ra.matrix()) < 1e-15);
        assert!(linalg::max_abs_diff(b.matrix(), rb.matrix()) < 1e-15);
    }

    #[test]
    fn all_up_marginal() {
        let rho = DensityMatrix::basis_state(64, 0).unwrap();
        let part = Partition::first_qubit(6).unwrap();
        let a = partial_trace(&rho, &part, Keep::A).unwrap();
        assert_eq!(a.matrix()[[0, 0]], c(1.0));
        assert_eq!(a.matrix()[[1, 1]], c(0.0));
    }

    #[test]
    fn partial_trace_respects_noncontiguous_subsets() {
        // |0>|1>|0> with A = {1}: qubit 1 is in |1>.
        let rho = DensityMatrix::basis_state(8, 0b010).unwrap();
        let part = Partition::new(3, [1]).unwrap();
        let a = partial_trace(&rho, &part, Keep::A).unwrap();
        assert_eq!(a.matrix()[[1, 1]], c(1.0));
        let b = partial_trace(&rho, &part, Keep::B).unwrap();
        assert_eq!(b.matrix()[[0, 0]], c(1.0));
    }

    #[test]
    fn partial_trace_dimension_mismatch() {
        let part = Partition::first_qubit(3).unwrap();
        assert!(matches!(
            partial_trace(&bell(), &part, Keep::A),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn entropy_examples() {
        assert!(von_neumann_entropy(&bell()).abs() < 1e-14);
        assert!((von_neumann_entropy(&DensityMatrix::maximally_mixed(2)) - LN_2).abs() < 1e-15);
        assert!((von_neumann_entropy(&diag(&[0.5, 0.5, 0.0, 0.0])) - LN_2).abs() < 1e-15);
    }

    #[test]
    fn dephase_examples() {
        let d = diag(&[0.2, 0.8]);
        let out = dephase(&d, &Basis::computational(2)).unwrap();
        assert_eq!(out.matrix(), d.matrix());

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = DensityMatrix::pure(&array![c(s), c(s)]).unwrap();
        let out = dephase(&plus, &Basis::computational(2)).unwrap();
        assert!(linalg::max_abs_diff(out.matrix(), &(linalg::identity(2) * c(0.5))) < 1e-15);

        // in its own eigenbasis |+> is untouched
        let (_, xb) = linalg::eigh(&HermitianOperator::new(pauli::x()).unwrap()).unwrap();
        let out = dephase(&plus, &xb).unwrap();
        assert!(linalg::max_abs_diff(out.matrix(), plus.matrix()) < 1e-15);
    }

    #[test]
    fn relative_entropy_examples() {
        let rho = diag(&[0.9, 0.1]);
        assert!(relative_entropy(&rho, &rho).unwrap().abs() < 1e-15);

        let zero = DensityMatrix::basis_state(2, 0).unwrap();
        let mixed = DensityMatrix::maximally_mixed(2);
        assert!((relative_entropy(&zero, &mixed).unwrap() - LN_2).abs() < 1e-15);

        let half = diag(&[0.5, 0.5]);
        let expected = 0.9 * (1.8f64).ln() + 0.1 * (0.2f64).ln();
        // independent decimal evaluation of the closed form
        assert!((expected - 0.368_064_207_168_497).abs() < 1e-14);
        assert!((relative_entropy(&rho, &half).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn relative_entropy_support_violation() {
        let zero = DensityMatrix::basis_state(2, 0).unwrap();
        let one = DensityMatrix::basis_state(2, 1).unwrap();
        assert!(matches!(relative_entropy(&zero, &one), Err(Error::SupportViolation { .. })));
    }

    #[test]
    fn gibbs_examples() {
        let h = HermitianOperator::new(pauli::z()).unwrap();
        let infinite_t = gibbs_state(&h, 0.0).unwrap();
        assert!(linalg::max_abs_diff(infinite_t.matrix(), &(linalg::identity(2) * c(0.5))) < 1e-15);

        let beta = 0.7;
        let g = gibbs_state(&h, beta).unwrap();
        let z = 2.0 * beta.cosh();
        assert!((g.matrix()[[0, 0]].re - (-beta).exp() / z).abs() < 1e-15);
        assert!((g.matrix()[[1, 1]].re - beta.exp() / z).abs() < 1e-15);

        let cold = gibbs_state(&h, 50.0).unwrap();
        assert!((cold.matrix()[[1, 1]].re - 1.0).abs() < 1e-10);

        let hzz = HermitianOperator::new(kron(&pauli::z(), &pauli::x()) + kron(&pauli::x(), &pauli::x()))
            .unwrap();
        let g = gibbs_state(&hzz, 1.3).unwrap();
        assert!(linalg::max_abs(&linalg::commutator(g.matrix(), hzz.matrix())) < 1e-10);
    }

    #[test]
    fn embed_then_reduce_round_trips() {
        let op = pauli::y();
        let big = embed_operator(&op, &[2], 4).unwrap();
        assert!(linalg::max_abs_diff(&big, &pauli::on_site(&op, 2, 4)) < 1e-15);
        assert!(support_defect(&big, &[2], 4).unwrap() < 1e-15);
        assert!(support_defect(&big, &[0, 1], 4).unwrap() > 0.5);
    }
}
