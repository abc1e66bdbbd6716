//! Dense reference constructions that share no code with the Pauli-mask
//! kernels: fermion operators from their action on occupation bitstrings,
//! Pauli strings from Kronecker products, and propagators from full
//! diagonalization. Used by the test suites and the `verify` command.

use crate::error::Result;
use crate::linalg::{c64, hermitian_eig, CMat};
use crate::pauli::{Pauli, PauliString};

/// Dense annihilator of `mode` on `n_modes` fermionic modes.
///
/// `c_j |n> = (-1)^(sum_{k<j} n_k) |n - e_j>` when mode `j` is occupied; bit
/// `k` of a basis index is the occupation of mode `k`.
pub fn fermion_annihilator(mode: usize, n_modes: usize) -> CMat {
    let dim = 1usize << n_modes;
    let mut out = CMat::zeros(dim, dim);
    for b in 0..dim {
        if b >> mode & 1 == 1 {
            let below = (b & ((1usize << mode) - 1)).count_ones();
            let sign = if below % 2 == 0 { 1.0 } else { -1.0 };
            out[(b ^ (1 << mode), b)] = c64::new(sign, 0.0);
        }
    }
    out
}

pub fn pauli_matrix(p: Pauli) -> CMat {
    let z = c64::new(0.0, 0.0);
    let o = c64::new(1.0, 0.0);
    let i = c64::new(0.0, 1.0);
    let m = match p {
        Pauli::I => [[o, z], [z, o]],
        Pauli::X => [[z, o], [o, z]],
        Pauli::Y => [[z, -i], [i, z]],
        Pauli::Z => [[o, z], [z, -o]],
    };
    CMat::from_fn(2, 2, |r, c| m[r][c])
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    CMat::from_fn(a.nrows() * b.nrows(), a.ncols() * b.ncols(), |i, j| {
        a[(i / b.nrows(), j / b.ncols())] * b[(i % b.nrows(), j % b.ncols())]
    })
}

/// `P_{n-1} (x) ... (x) P_0`, so qubit 0 is the least significant bit.
pub fn kron_pauli(s: &PauliString) -> CMat {
    let n = s.n_qubits();
    let mut m = pauli_matrix(s.get(n - 1));
    for k in (0..n - 1).rev() {
        m = kron(&m, &pauli_matrix(s.get(k)));
    }
    m
}

/// `sum_j c_j P_j` assembled from Kronecker products.
pub fn kron_operator<'a>(
    n_qubits: usize,
    terms: impl IntoIterator<Item = (c64, &'a PauliString)>,
) -> CMat {
    let dim = 1usize << n_qubits;
    let mut out = CMat::zeros(dim, dim);
    for (c, s) in terms {
        out += kron_pauli(s) * faer::Scale(c);
    }
    out
}

/// Exact propagator `exp(-i H t)` by Hermitian diagonalization.
pub struct DenseEvolution {
    values: Vec<f64>,
    vectors: CMat,
}

impl DenseEvolution {
    pub fn new(h: &CMat) -> Result<Self> {
        let (values, vectors) = hermitian_eig(h)?;
        Ok(DenseEvolution { values, vectors })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    pub fn propagator(&self, t: f64) -> CMat {
        let n = self.values.len();
        let phased = CMat::from_fn(n, n, |i, k| {
            self.vectors[(i, k)] * c64::from_polar(1.0, -self.values[k] * t)
        });
        &phased * self.vectors.adjoint()
    }

    pub fn evolve(&self, psi: &[c64], t: f64) -> Vec<c64> {
        let n = self.values.len();
        let mut coeffs = vec![c64::new(0.0, 0.0); n];
        for (k, ck) in coeffs.iter_mut().enumerate() {
            for i in 0..n {
                *ck += self.vectors[(i, k)].conj() * psi[i];
            }
            *ck *= c64::from_polar(1.0, -self.values[k] * t);
        }
        let mut out = vec![c64::new(0.0, 0.0); n];
        for (k, ck) in coeffs.iter().enumerate() {
            for (i, o) in out.iter_mut().enumerate() {
                *o += self.vectors[(i, k)] * ck;
            }
        }
        out
    }
}

/// `exp(-i theta M)` for a Hermitian dense `M`.
pub fn dense_exponential(m: &CMat, theta: f64) -> Result<CMat> {
    Ok(DenseEvolution::new(m)?.propagator(theta))
}
