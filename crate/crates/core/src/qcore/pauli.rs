//! Dense single-qubit Pauli matrices and site embeddings.

use ndarray::array;

use super::{linalg, CMatrix, C64};

fn r(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn x() -> CMatrix {
    array![[r(0.0), r(1.0)], [r(1.0), r(0.0)]]
}

pub fn y() -> CMatrix {
    array![[r(0.0), C64::new(0.0, -1.0)], [C64::new(0.0, 1.0), r(0.0)]]
}

pub fn z() -> CMatrix {
    array![[r(1.0), r(0.0)], [r(0.0), r(-1.0)]]
}

/// `op` acting on qubit `site` of an `n`-qubit register.
pub fn on_site(op: &CMatrix, site: usize, n: usize) -> CMatrix {
    let left = linalg::identity(1 << site);
    let right = linalg::identity(1 << (n - site - 1));
    linalg::kron(&linalg::kron(&left, op), &right)
}

/// `sum_i Z_i`.
pub fn total_z(n: usize) -> CMatrix {
    (0..n).fold(linalg::zeros(1 << n), |acc, q| acc + on_site(&z(), q, n))
}

/// `prod_i Z_i`, the fermion parity under Jordan–Wigner.
pub fn parity(n: usize) -> CMatrix {
    let diag = ndarray::Array1::from_shape_fn(1 << n, |b: usize| {
        if b.count_ones() % 2 == 0 {
            r(1.0)
        } else {
            r(-1.0)
        }
    });
    ndarray::Array2::from_diag(&diag)
}
