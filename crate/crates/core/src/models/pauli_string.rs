//! Weighted Pauli strings, used to assemble Majorana and spin Hamiltonians
//! without dense matrix products.

use std::ops::Mul;

use ndarray::Array2;

use crate::qcore::{CMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// `self * rhs = phase * P`.
    fn times(self, rhs: Pauli) -> (C64, Pauli) {
        use Pauli::*;
        let one = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        match (self, rhs) {
            (I, p) | (p, I) => (one, p),
            (X, X) | (Y, Y) | (Z, Z) => (one, I),
            (X, Y) => (i, Z),
            (Y, X) => (-i, Z),
            (Y, Z) => (i, X),
            (Z, Y) => (-i, X),
            (Z, X) => (i, Y),
            (X, Z) => (-i, Y),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PauliString {
    pub coeff: C64,
    pub ops: Vec<Pauli>,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        Self {
            coeff: C64::new(1.0, 0.0),
            ops: vec![Pauli::I; n],
        }
    }

    pub fn single(n: usize, site: usize, op: Pauli) -> Self {
        let mut s = Self::identity(n);
        s.ops[site] = op;
        s
    }

    pub fn pair(n: usize, a: (usize, Pauli), b: (usize, Pauli)) -> Self {
        let mut s = Self::single(n, a.0, a.1);
        s.ops[b.0] = b.1;
        s
    }

    pub fn scaled(mut self, factor: C64) -> Self {
        self.coeff *= factor;
        self
    }

    pub fn n_qubits(&self) -> usize {
        self.ops.len()
    }

    /// Accumulate `self` into a dense matrix. Each column receives exactly one
    /// entry, at the row obtained by flipping the X/Y sites.
    pub fn add_to(&self, target: &mut CMatrix) {
        let n = self.ops.len();
        let mut flip = 0usize;
        for (q, op) in self.ops.iter().enumerate() {
            if matches!(op, Pauli::X | Pauli::Y) {
                flip |= 1 << (n - 1 - q);
            }
        }
        for col in 0..1usize << n {
            let mut amp = self.coeff;
            for (q, op) in self.ops.iter().enumerate() {
                let bit = (col >> (n - 1 - q)) & 1;
                match op {
                    Pauli::I | Pauli::X => {}
                    Pauli::Z => {
                        if bit == 1 {
                            amp = -amp;
                        }
                    }
                    // Y|0> = i|1>, Y|1> = -i|0>
                    Pauli::Y => {
                        amp *= if bit == 0 { C64::new(0.0, 1.0) } else { C64::new(0.0, -1.0) };
                    }
                }
            }
            target[[col ^ flip, col]] += amp;
        }
    }

    pub fn to_matrix(&self) -> CMatrix {
        let dim = 1 << self.ops.len();
        let mut m = Array2::zeros((dim, dim));
        self.add_to(&mut m);
        m
    }
}

impl Mul for &PauliString {
    type Output = PauliString;

    fn mul(self, rhs: &PauliString) -> PauliString {
        assert_eq!(self.ops.len(), rhs.ops.len(), "Pauli strings on different registers");
        let mut coeff = self.coeff * rhs.coeff;
        let ops = self
            .ops
            .iter()
            .zip(&rhs.ops)
            .map(|(&a, &b)| {
                let (phase, p) = a.times(b);
                coeff *= phase;
                p
            })
            .collect();
        PauliString { coeff, ops }
    }
}
