//! Pauli strings, real-coefficient qubit Hamiltonians and general
//! complex-coefficient Pauli operators.
//!
//! Qubit `k` is bit `k` of a computational-basis index (little-endian), and
//! character `k` of a textual string such as `"XZYI"`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::linalg::{c64, CMat};

/// Coefficients with magnitude below this are dropped when merging terms.
pub const DROP_TOLERANCE: f64 = 1e-14;

/// Largest qubit count a [`PauliString`] can address with `u64` masks.
pub const MAX_QUBITS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Pauli> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    /// Single-qubit product `self * other = phase * result`.
    pub fn mul(self, other: Pauli) -> (c64, Pauli) {
        use Pauli::*;
        let one = c64::new(1.0, 0.0);
        let i = c64::new(0.0, 1.0);
        match (self, other) {
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

/// Bit-mask form of a Pauli string used by the statevector kernels.
///
/// `P|b> = i^ny (-1)^popcount(b & z) |b ^ x>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PauliMasks {
    pub x: u64,
    pub z: u64,
    pub ny: u32,
}

impl PauliMasks {
    /// The global factor `i^ny`.
    #[inline]
    pub fn global_phase(&self) -> c64 {
        match self.ny % 4 {
            0 => c64::new(1.0, 0.0),
            1 => c64::new(0.0, 1.0),
            2 => c64::new(-1.0, 0.0),
            _ => c64::new(0.0, -1.0),
        }
    }

    #[inline]
    pub fn sign(&self, b: usize) -> f64 {
        if (b as u64 & self.z).count_ones() & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    #[inline]
    pub fn phase(&self, b: usize) -> c64 {
        self.global_phase() * self.sign(b)
    }

    /// `out = P * input`.
    pub fn apply(&self, input: &[c64], out: &mut [c64]) {
        assert_eq!(input.len(), out.len());
        let g = self.global_phase();
        let x = self.x as usize;
        for (b, &amp) in input.iter().enumerate() {
            out[b ^ x] = g * self.sign(b) * amp;
        }
    }

    /// `<psi|P|psi>`.
    pub fn expectation(&self, amps: &[c64]) -> c64 {
        let x = self.x as usize;
        let mut acc = c64::new(0.0, 0.0);
        if x == 0 {
            let mut re = 0.0;
            for (b, a) in amps.iter().enumerate() {
                re += self.sign(b) * a.norm_sqr();
            }
            acc.re = re;
        } else {
            for (b, &a) in amps.iter().enumerate() {
                acc += amps[b ^ x].conj() * a * self.sign(b);
            }
        }
        self.global_phase() * acc
    }
}

/// A tensor product of single-qubit Paulis, one letter per qubit.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    ops: Vec<Pauli>,
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Self {
        PauliString {
            ops: vec![Pauli::I; n_qubits],
        }
    }

    pub fn from_ops(ops: Vec<Pauli>) -> Result<Self> {
        if ops.is_empty() || ops.len() > MAX_QUBITS {
            return domain(format!(
                "pauli string must have 1..={MAX_QUBITS} qubits, got {}",
                ops.len()
            ));
        }
        Ok(PauliString { ops })
    }

    /// Builds a string on `n_qubits` from `(qubit, letter)` pairs; unlisted
    /// qubits carry the identity.
    pub fn from_sparse(n_qubits: usize, ops: &[(usize, Pauli)]) -> Result<Self> {
        let mut s = PauliString::identity(n_qubits);
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return domain(format!("unsupported qubit count {n_qubits}"));
        }
        for &(q, p) in ops {
            if q >= n_qubits {
                return domain(format!("qubit {q} out of range for {n_qubits} qubits"));
            }
            s.ops[q] = p;
        }
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.ops.len()
    }

    pub fn ops(&self) -> &[Pauli] {
        &self.ops
    }

    pub fn get(&self, qubit: usize) -> Pauli {
        self.ops[qubit]
    }

    pub fn is_identity(&self) -> bool {
        self.ops.iter().all(|&p| p == Pauli::I)
    }

    /// Number of non-identity letters.
    pub fn weight(&self) -> usize {
        self.ops.iter().filter(|&&p| p != Pauli::I).count()
    }

    pub fn masks(&self) -> PauliMasks {
        let mut m = PauliMasks { x: 0, z: 0, ny: 0 };
        for (k, p) in self.ops.iter().enumerate() {
            let bit = 1u64 << k;
            match p {
                Pauli::I => {}
                Pauli::X => m.x |= bit,
                Pauli::Z => m.z |= bit,
                Pauli::Y => {
                    m.x |= bit;
                    m.z |= bit;
                    m.ny += 1;
                }
            }
        }
        m
    }

    /// `self * other = phase * product`.
    pub fn mul(&self, other: &PauliString) -> (c64, PauliString) {
        assert_eq!(self.n_qubits(), other.n_qubits());
        let mut phase = c64::new(1.0, 0.0);
        let ops = self
            .ops
            .iter()
            .zip(&other.ops)
            .map(|(&a, &b)| {
                let (ph, p) = a.mul(b);
                phase *= ph;
                p
            })
            .collect();
        (phase, PauliString { ops })
    }

    /// Dense `2^n x 2^n` matrix, built from the bit masks.
    pub fn to_dense(&self) -> CMat {
        let dim = 1usize << self.n_qubits();
        let m = self.masks();
        let mut out = CMat::zeros(dim, dim);
        for b in 0..dim {
            out[(b ^ m.x as usize, b)] = m.phase(b);
        }
        out
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.ops {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let ops = s
            .chars()
            .map(|c| {
                Pauli::from_char(c)
                    .ok_or_else(|| Error::Parse(format!("invalid pauli letter {c:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        PauliString::from_ops(ops)
    }
}

/// A real-weighted Pauli string, one summand `H_j` of a Hamiltonian.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliTerm {
    pub coefficient: f64,
    pub string: PauliString,
}

impl PauliTerm {
    pub fn new(coefficient: f64, string: PauliString) -> Self {
        PauliTerm {
            coefficient,
            string,
        }
    }

    pub fn parse(coefficient: f64, string: &str) -> Result<Self> {
        Ok(PauliTerm::new(coefficient, string.parse()?))
    }
}

impl fmt::Display for PauliTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}*{}", self.coefficient, self.string)
    }
}

/// Insertion-ordered accumulator that merges identical strings.
#[derive(Clone, Debug)]
struct Accumulator<T> {
    n_qubits: usize,
    index: HashMap<PauliString, usize>,
    terms: Vec<(T, PauliString)>,
}

impl<T: Copy + std::ops::AddAssign> Accumulator<T> {
    fn new(n_qubits: usize) -> Self {
        Accumulator {
            n_qubits,
            index: HashMap::new(),
            terms: Vec::new(),
        }
    }

    fn add(&mut self, coeff: T, string: PauliString) -> Result<()> {
        if string.n_qubits() != self.n_qubits {
            return domain(format!(
                "term {string} acts on {} qubits, expected {}",
                string.n_qubits(),
                self.n_qubits
            ));
        }
        match self.index.get(&string) {
            Some(&i) => self.terms[i].0 += coeff,
            None => {
                self.index.insert(string.clone(), self.terms.len());
                self.terms.push((coeff, string));
            }
        }
        Ok(())
    }
}

/// Real-coefficient Hamiltonian `H = sum_j c_j P_j`.
///
/// Terms are merged by exact string equality, kept in first-appearance order
/// (which is the Trotter product order), and dropped when `|c_j| < 1e-14`.
#[derive(Clone, Debug, PartialEq)]
pub struct QubitHamiltonian {
    n_qubits: usize,
    terms: Vec<PauliTerm>,
    pub label: String,
}

impl QubitHamiltonian {
    pub fn from_terms(
        n_qubits: usize,
        terms: impl IntoIterator<Item = PauliTerm>,
        label: impl Into<String>,
    ) -> Result<Self> {
        let mut acc = Accumulator::<f64>::new(n_qubits);
        for t in terms {
            if !t.coefficient.is_finite() {
                return domain(format!("non-finite coefficient on {}", t.string));
            }
            acc.add(t.coefficient, t.string)?;
        }
        let terms = acc
            .terms
            .into_iter()
            .filter(|(c, _)| c.abs() >= DROP_TOLERANCE)
            .map(|(c, s)| PauliTerm::new(c, s))
            .collect();
        Ok(QubitHamiltonian {
            n_qubits,
            terms,
            label: label.into(),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `||H||_F = sqrt(2^n sum_j c_j^2)`, exact by trace orthogonality of
    /// distinct Pauli strings.
    pub fn frobenius_norm(&self) -> f64 {
        let sum: f64 = self.terms.iter().map(|t| t.coefficient * t.coefficient).sum();
        (2f64.powi(self.n_qubits as i32) * sum).sqrt()
    }

    /// Sum of `|c_j|`, an upper bound on the operator norm.
    pub fn coefficient_one_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient.abs()).sum()
    }

    pub fn to_operator(&self) -> PauliOperator {
        PauliOperator {
            n_qubits: self.n_qubits,
            terms: self
                .terms
                .iter()
                .map(|t| (c64::new(t.coefficient, 0.0), t.string.clone()))
                .collect(),
        }
    }

    pub fn to_dense(&self) -> CMat {
        self.to_operator().to_dense()
    }

    pub fn to_json(&self) -> HamiltonianDoc {
        HamiltonianDoc {
            n_qubits: self.n_qubits,
            label: self.label.clone(),
            terms: self
                .terms
                .iter()
                .map(|t| TermDoc {
                    coeff: t.coefficient,
                    string: t.string.to_string(),
                })
                .collect(),
        }
    }

    pub fn from_json(doc: &HamiltonianDoc) -> Result<Self> {
        let terms = doc
            .terms
            .iter()
            .map(|t| PauliTerm::parse(t.coeff, &t.string))
            .collect::<Result<Vec<_>>>()?;
        QubitHamiltonian::from_terms(doc.n_qubits, terms, doc.label.clone())
    }
}

/// Serialized Hamiltonian: `{n_qubits, label, terms: [{coeff, string}]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianDoc {
    pub n_qubits: usize,
    #[serde(default)]
    pub label: String,
    pub terms: Vec<TermDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermDoc {
    pub coeff: f64,
    pub string: String,
}

/// General operator `sum_j a_j P_j` with complex weights.
///
/// Observables such as `c_p^dagger c_q` are not Hermitian; the expectation of
/// a `PauliOperator` is therefore complex in general.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliOperator {
    n_qubits: usize,
    terms: Vec<(c64, PauliString)>,
}

impl PauliOperator {
    pub fn zero(n_qubits: usize) -> Self {
        PauliOperator {
            n_qubits,
            terms: Vec::new(),
        }
    }

    pub fn identity(n_qubits: usize) -> Self {
        PauliOperator {
            n_qubits,
            terms: vec![(c64::new(1.0, 0.0), PauliString::identity(n_qubits))],
        }
    }

    pub fn from_terms(
        n_qubits: usize,
        terms: impl IntoIterator<Item = (c64, PauliString)>,
    ) -> Result<Self> {
        let mut acc = Accumulator::<c64>::new(n_qubits);
        for (c, s) in terms {
            acc.add(c, s)?;
        }
        Ok(PauliOperator {
            n_qubits,
            terms: acc
                .terms
                .into_iter()
                .filter(|(c, _)| c.norm() >= DROP_TOLERANCE)
                .collect(),
        })
    }

    pub fn single(coeff: c64, string: PauliString) -> Self {
        PauliOperator {
            n_qubits: string.n_qubits(),
            terms: vec![(coeff, string)],
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[(c64, PauliString)] {
        &self.terms
    }

    pub fn scale(&self, a: c64) -> Self {
        PauliOperator {
            n_qubits: self.n_qubits,
            terms: self.terms.iter().map(|(c, s)| (c * a, s.clone())).collect(),
        }
    }

    pub fn add(&self, other: &PauliOperator) -> Result<Self> {
        PauliOperator::from_terms(
            self.n_qubits,
            self.terms.iter().chain(other.terms.iter()).cloned(),
        )
    }

    pub fn mul(&self, other: &PauliOperator) -> Result<Self> {
        if self.n_qubits != other.n_qubits {
            return domain("operator qubit counts differ");
        }
        let mut out = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (a, sa) in &self.terms {
            for (b, sb) in &other.terms {
                let (ph, s) = sa.mul(sb);
                out.push((a * b * ph, s));
            }
        }
        PauliOperator::from_terms(self.n_qubits, out)
    }

    pub fn adjoint(&self) -> Self {
        PauliOperator {
            n_qubits: self.n_qubits,
            terms: self.terms.iter().map(|(c, s)| (c.conj(), s.clone())).collect(),
        }
    }

    /// Hermitian iff every merged weight is real.
    pub fn is_hermitian(&self) -> bool {
        self.terms.iter().all(|(c, _)| c.im.abs() < DROP_TOLERANCE)
    }

    /// Real part of the weights as a Hamiltonian; fails on non-Hermitian input.
    pub fn to_hamiltonian(&self, label: &str) -> Result<QubitHamiltonian> {
        if !self.is_hermitian() {
            return Err(Error::Domain("operator is not Hermitian".into()));
        }
        QubitHamiltonian::from_terms(
            self.n_qubits,
            self.terms
                .iter()
                .map(|(c, s)| PauliTerm::new(c.re, s.clone())),
            label,
        )
    }

    pub fn frobenius_norm(&self) -> f64 {
        let sum: f64 = self.terms.iter().map(|(c, _)| c.norm_sqr()).sum();
        (2f64.powi(self.n_qubits as i32) * sum).sqrt()
    }

    /// Upper bound `sum_j |a_j|` on the spectral norm.
    pub fn coefficient_one_norm(&self) -> f64 {
        self.terms.iter().map(|(c, _)| c.norm()).sum()
    }

    /// `<psi|O|psi>` for a normalized amplitude vector.
    pub fn expectation(&self, amps: &[c64]) -> Result<c64> {
        if amps.len() != 1usize << self.n_qubits {
            return domain(format!(
                "state of length {} does not match {} qubits",
                amps.len(),
                self.n_qubits
            ));
        }
        Ok(self
            .terms
            .iter()
            .map(|(c, s)| c * s.masks().expectation(amps))
            .sum())
    }

    /// `out = O * input`.
    pub fn apply(&self, input: &[c64]) -> Result<Vec<c64>> {
        if input.len() != 1usize << self.n_qubits {
            return domain("state size does not match operator");
        }
        let mut out = vec![c64::new(0.0, 0.0); input.len()];
        let mut tmp = vec![c64::new(0.0, 0.0); input.len()];
        for (c, s) in &self.terms {
            s.masks().apply(input, &mut tmp);
            for (o, t) in out.iter_mut().zip(&tmp) {
                *o += c * t;
            }
        }
        Ok(out)
    }

    pub fn to_dense(&self) -> CMat {
        let dim = 1usize << self.n_qubits;
        let mut out = CMat::zeros(dim, dim);
        for (c, s) in &self.terms {
            let m = s.masks();
            for b in 0..dim {
                out[(b ^ m.x as usize, b)] += c * m.phase(b);
            }
        }
        out
    }
}
