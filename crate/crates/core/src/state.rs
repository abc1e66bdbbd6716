//! Statevectors, initial-state preparation and first-order Trotter evolution.

use std::collections::HashMap;
use std::io::{Read, Write};

use crate::error::{domain, Error, Result};
use crate::lattice::{build_hubbard_h0, HubbardParams};
use crate::linalg::{c64, hermitian_eig, CMat};
use crate::observables::{measure_set, ObservableSet, SnapshotSeries};
use crate::oracle::DenseEvolution;
use crate::pauli::{PauliMasks, PauliOperator, PauliTerm, QubitHamiltonian};

/// Statevector simulation refuses larger registers.
pub const MAX_SIM_QUBITS: usize = 24;
/// Dense diagonalization refuses larger registers.
pub const MAX_DENSE_QUBITS: usize = 14;

const NORM_TOLERANCE: f64 = 1e-10;

/// Normalized amplitudes over the `2^n` computational basis states.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<c64>,
}

impl StateVector {
    pub fn new(n_qubits: usize, amps: Vec<c64>) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_SIM_QUBITS {
            return Err(Error::Refused(format!(
                "{n_qubits} qubits outside the supported range 1..={MAX_SIM_QUBITS}"
            )));
        }
        if amps.len() != 1usize << n_qubits {
            return domain(format!(
                "{} amplitudes for {n_qubits} qubits",
                amps.len()
            ));
        }
        let s = StateVector { n_qubits, amps };
        if (s.norm() - 1.0).abs() > NORM_TOLERANCE {
            return domain(format!("state norm {} is not 1", s.norm()));
        }
        Ok(s)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_SIM_QUBITS {
            return Err(Error::Refused(format!("{n_qubits} qubits not supported")));
        }
        if index >= 1usize << n_qubits {
            return domain(format!("basis index {index} out of range"));
        }
        let mut amps = vec![c64::new(0.0, 0.0); 1 << n_qubits];
        amps[index] = c64::new(1.0, 0.0);
        Ok(StateVector { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[c64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<c64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> c64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|| self - other ||_2`.
    pub fn distance(&self, other: &StateVector) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `1 - |<self|other>|^2`.
    pub fn infidelity(&self, other: &StateVector) -> f64 {
        1.0 - self.inner(other).norm_sqr()
    }

    pub fn expectation(&self, op: &PauliOperator) -> Result<c64> {
        op.expectation(&self.amps)
    }

    /// In place `exp(-i theta c P)` for the term `c P`, using `P^2 = I`:
    /// `cos(theta c) - i sin(theta c) P`.
    pub fn apply_pauli_exponential(&mut self, term: &PauliTerm, theta: f64) -> Result<()> {
        if term.string.n_qubits() != self.n_qubits {
            return domain(format!(
                "term on {} qubits applied to a {}-qubit state",
                term.string.n_qubits(),
                self.n_qubits
            ));
        }
        rotate(&mut self.amps, &term.string.masks(), theta * term.coefficient);
        Ok(())
    }

    /// Writes the checkpoint layout: 16-byte header `"QKSV"`, version,
    /// qubit count, reserved (all `u32` little endian), then interleaved
    /// `(re, im)` little-endian `f64` pairs.
    pub fn write_checkpoint<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(CHECKPOINT_MAGIC)?;
        w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
        w.write_all(&(self.n_qubits as u32).to_le_bytes())?;
        w.write_all(&0u32.to_le_bytes())?;
        for z in &self.amps {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_checkpoint<R: Read>(mut r: R) -> Result<Self> {
        let mut header = [0u8; 16];
        r.read_exact(&mut header)?;
        if &header[..4] != CHECKPOINT_MAGIC {
            return Err(Error::Parse("not a statevector checkpoint".into()));
        }
        let word = |i: usize| u32::from_le_bytes(header[i..i + 4].try_into().unwrap());
        if word(4) != CHECKPOINT_VERSION {
            return Err(Error::Parse(format!("unsupported checkpoint version {}", word(4))));
        }
        let n = word(8) as usize;
        if n == 0 || n > MAX_SIM_QUBITS {
            return Err(Error::Parse(format!("checkpoint declares {n} qubits")));
        }
        let mut buf = vec![0u8; 16 << n];
        r.read_exact(&mut buf)?;
        let amps = buf
            .chunks_exact(16)
            .map(|c| {
                c64::new(
                    f64::from_le_bytes(c[..8].try_into().unwrap()),
                    f64::from_le_bytes(c[8..].try_into().unwrap()),
                )
            })
            .collect();
        StateVector::new(n, amps)
    }
}

const CHECKPOINT_MAGIC: &[u8; 4] = b"QKSV";
const CHECKPOINT_VERSION: u32 = 1;

/// `amps <- exp(-i phi P) amps`.
fn rotate(amps: &mut [c64], m: &PauliMasks, phi: f64) {
    let (s, c) = phi.sin_cos();
    if m.x == 0 {
        // diagonal: P|b> = g * sign(b) |b> with g = +-1 for ny even (always, since x == 0)
        let g = m.global_phase().re;
        let plus = c64::new(c, -s * g);
        let minus = c64::new(c, s * g);
        for (b, a) in amps.iter_mut().enumerate() {
            *a *= if m.sign(b) > 0.0 { plus } else { minus };
        }
        return;
    }
    let x = m.x as usize;
    let high = 1usize << (63 - (m.x.leading_zeros() as usize));
    let g = m.global_phase();
    let mis = c64::new(0.0, -s);
    for b in 0..amps.len() {
        if b & high != 0 {
            continue;
        }
        let b2 = b ^ x;
        let (a1, a2) = (amps[b], amps[b2]);
        // P|b2> = g sign(b2) |b>, P|b> = g sign(b) |b2>
        amps[b] = a1 * c + mis * g * m.sign(b2) * a2;
        amps[b2] = a2 * c + mis * g * m.sign(b) * a1;
    }
}

/// Returns `exp(-i theta c P) |psi>` for the term `c P`.
pub fn apply_pauli_exponential(state: &StateVector, term: &PauliTerm, theta: f64) -> Result<StateVector> {
    let mut out = state.clone();
    out.apply_pauli_exponential(term, theta)?;
    Ok(out)
}

/// Product `|up...up down...down>`: spins `0..L/2` have `Z = +1` (`|0>`),
/// the rest `Z = -1` (`|1>`).
pub fn prepare_domain_wall(sites: usize) -> Result<StateVector> {
    if sites < 2 || sites % 2 != 0 {
        return domain(format!("domain wall needs an even spin count >= 2, got {sites}"));
    }
    let index = (sites / 2..sites).fold(0usize, |acc, k| acc | 1 << k);
    StateVector::basis(sites, index)
}

/// Lowest eigenvector of `H0` within a fixed `(N_up, N_down)` sector.
#[derive(Clone, Debug)]
pub struct GroundState {
    pub state: StateVector,
    pub energy: f64,
    /// Gap to the next level inside the sector.
    pub gap: f64,
    /// Set when the gap is below `1e-10`; the state is then one member of a
    /// degenerate level.
    pub degenerate: bool,
}

/// Basis indices with `n_up` set bits among qubits `0..L` and `n_down` among
/// `L..2L`, ascending.
pub fn sector_basis(sites: usize, n_up: usize, n_down: usize) -> Vec<usize> {
    let block: Vec<usize> = (0..1usize << sites).collect();
    let ups: Vec<usize> = block.iter().copied().filter(|b| b.count_ones() as usize == n_up).collect();
    let downs: Vec<usize> = block
        .iter()
        .copied()
        .filter(|b| b.count_ones() as usize == n_down)
        .collect();
    let mut out: Vec<usize> = downs
        .iter()
        .flat_map(|d| ups.iter().map(move |u| u | d << sites))
        .collect();
    out.sort_unstable();
    out
}

/// Projects `h` onto the span of `basis` (which must be invariant under `h`).
pub fn project_onto(h: &QubitHamiltonian, basis: &[usize]) -> CMat {
    let lookup: HashMap<usize, usize> = basis.iter().enumerate().map(|(i, &b)| (b, i)).collect();
    let dim = basis.len();
    let mut m = CMat::zeros(dim, dim);
    for term in h.terms() {
        let masks = term.string.masks();
        for (col, &b) in basis.iter().enumerate() {
            if let Some(&row) = lookup.get(&(b ^ masks.x as usize)) {
                m[(row, col)] += masks.phase(b) * term.coefficient;
            }
        }
    }
    m
}

/// Half-filled ground state of the non-interacting chain `H0`,
/// `N_up = N_down = L/2`.
pub fn prepare_hubbard_ground_state(params: &HubbardParams) -> Result<GroundState> {
    params.validate_half_filling()?;
    if params.n_qubits() > MAX_SIM_QUBITS {
        return Err(Error::Refused(format!(
            "{} qubits exceed the statevector limit {MAX_SIM_QUBITS}",
            params.n_qubits()
        )));
    }
    let h0 = build_hubbard_h0(params)?;
    let half = params.sites / 2;
    let basis = sector_basis(params.sites, half, half);
    let m = project_onto(&h0, &basis);
    let (vals, vecs) = hermitian_eig(&m)?;
    let gap = if vals.len() > 1 { vals[1] - vals[0] } else { f64::INFINITY };

    let mut coeffs: Vec<c64> = (0..basis.len()).map(|i| vecs[(i, 0)]).collect();
    // fix the global phase: largest component real and positive
    let pivot = coeffs
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let phase = coeffs[pivot].conj() / coeffs[pivot].norm();
    let norm = coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut coeffs {
        *z *= phase / norm;
    }
    let mut amps = vec![c64::new(0.0, 0.0); 1 << params.n_qubits()];
    for (&b, z) in basis.iter().zip(coeffs) {
        amps[b] = z;
    }
    Ok(GroundState {
        state: StateVector::new(params.n_qubits(), amps)?,
        energy: vals[0],
        gap,
        degenerate: gap < 1e-10,
    })
}

/// Step size and term order of the first-order product formula
/// `prod_j exp(-i H_j dt)`.
#[derive(Clone, Debug)]
pub struct TrotterPlan {
    hamiltonian: QubitHamiltonian,
    dt: f64,
    term_order: Vec<usize>,
    compiled: Vec<(PauliMasks, f64)>,
}

impl TrotterPlan {
    /// Canonical order: the Hamiltonian's own term order.
    pub fn new(hamiltonian: QubitHamiltonian, dt: f64) -> Result<Self> {
        let order = (0..hamiltonian.len()).collect();
        Self::with_order(hamiltonian, dt, order)
    }

    pub fn with_order(hamiltonian: QubitHamiltonian, dt: f64, term_order: Vec<usize>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return domain(format!("trotter step must be positive, got {dt}"));
        }
        let mut seen = vec![false; hamiltonian.len()];
        if term_order.len() != hamiltonian.len() {
            return domain("term order is not a permutation of the terms");
        }
        for &i in &term_order {
            if i >= seen.len() || seen[i] {
                return domain("term order is not a permutation of the terms");
            }
            seen[i] = true;
        }
        let compiled = term_order
            .iter()
            .map(|&i| {
                let t = &hamiltonian.terms()[i];
                (t.string.masks(), t.coefficient)
            })
            .collect();
        Ok(TrotterPlan {
            hamiltonian,
            dt,
            term_order,
            compiled,
        })
    }

    pub fn hamiltonian(&self) -> &QubitHamiltonian {
        &self.hamiltonian
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn term_order(&self) -> &[usize] {
        &self.term_order
    }
}

/// One application of `prod_j exp(-i c_j dt P_j)` in plan order.
pub fn trotter_step(state: &mut StateVector, plan: &TrotterPlan) -> Result<()> {
    if state.n_qubits != plan.hamiltonian.n_qubits() {
        return domain(format!(
            "plan acts on {} qubits, state has {}",
            plan.hamiltonian.n_qubits(),
            state.n_qubits
        ));
    }
    for (m, c) in &plan.compiled {
        rotate(&mut state.amps, m, c * plan.dt);
    }
    Ok(())
}

/// Produces one snapshot column per recorded state.
pub trait Recorder {
    fn labels(&self) -> Vec<String>;
    fn record(&mut self, state: &StateVector) -> Result<Vec<c64>>;
    fn complex_rows(&self) -> Vec<bool> {
        vec![false; self.labels().len()]
    }
    fn ranges(&self) -> Vec<Option<(f64, f64)>> {
        vec![None; self.labels().len()]
    }
}

impl Recorder for ObservableSet {
    fn labels(&self) -> Vec<String> {
        ObservableSet::labels(self).to_vec()
    }

    fn record(&mut self, state: &StateVector) -> Result<Vec<c64>> {
        measure_set(state, self)
    }

    fn complex_rows(&self) -> Vec<bool> {
        ObservableSet::complex_rows(self)
    }

    fn ranges(&self) -> Vec<Option<(f64, f64)>> {
        ObservableSet::ranges(self)
    }
}

/// Adapter turning a closure into a [`Recorder`].
pub struct FnRecorder<F> {
    labels: Vec<String>,
    f: F,
}

impl<F> FnRecorder<F>
where
    F: FnMut(&StateVector) -> Result<Vec<c64>>,
{
    pub fn new(labels: Vec<String>, f: F) -> Self {
        FnRecorder { labels, f }
    }
}

impl<F> Recorder for FnRecorder<F>
where
    F: FnMut(&StateVector) -> Result<Vec<c64>>,
{
    fn labels(&self) -> Vec<String> {
        self.labels.clone()
    }

    fn record(&mut self, state: &StateVector) -> Result<Vec<c64>> {
        (self.f)(state)
    }
}

/// Records at `t = 0` and after each of `steps` Trotter steps, giving
/// `steps + 1` snapshots on `t_n = n dt`. Returns the series and the final
/// state; a recorder error discards the partial series.
pub fn evolve_and_record<R: Recorder>(
    mut state: StateVector,
    plan: &TrotterPlan,
    steps: usize,
    recorder: &mut R,
) -> Result<(SnapshotSeries, StateVector)> {
    let labels = recorder.labels();
    let mut columns = Vec::with_capacity(steps + 1);
    columns.push(recorder.record(&state)?);
    for _ in 0..steps {
        trotter_step(&mut state, plan)?;
        columns.push(recorder.record(&state)?);
    }
    let series = SnapshotSeries::from_columns(plan.dt, labels, &columns)?
        .with_complex_rows(recorder.complex_rows())
        .with_ranges(recorder.ranges());
    Ok((series, state))
}

/// `exp(-i H t) |psi>` by dense diagonalization; refuses above
/// [`MAX_DENSE_QUBITS`].
pub fn exact_evolve(state: &StateVector, h: &QubitHamiltonian, t: f64) -> Result<StateVector> {
    ExactPropagator::new(h)?.evolve(state, t)
}

/// Reusable dense eigenbasis of a Hamiltonian.
pub struct ExactPropagator {
    n_qubits: usize,
    inner: DenseEvolution,
}

impl ExactPropagator {
    pub fn new(h: &QubitHamiltonian) -> Result<Self> {
        if h.n_qubits() > MAX_DENSE_QUBITS {
            return Err(Error::Refused(format!(
                "dense propagation of {} qubits exceeds the {MAX_DENSE_QUBITS}-qubit guard",
                h.n_qubits()
            )));
        }
        Ok(ExactPropagator {
            n_qubits: h.n_qubits(),
            inner: DenseEvolution::new(&h.to_dense())?,
        })
    }

    pub fn evolve(&self, state: &StateVector, t: f64) -> Result<StateVector> {
        if state.n_qubits != self.n_qubits {
            return domain("state size does not match the Hamiltonian");
        }
        let amps = self.inner.evolve(&state.amps, t);
        Ok(StateVector {
            n_qubits: self.n_qubits,
            amps,
        })
    }
}

/// How the exponent of the step-count bound is read.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum StepBoundReading {
    /// `4 J^2 tau exp(2 sqrt(ln 5) ln(J tau / eps))`, a power of `J tau / eps`.
    #[default]
    Literal,
    /// `4 J^2 tau exp(2 sqrt(ln 5) sqrt(ln(J tau / eps)))`.
    SqrtLog,
}

/// Upper bound on the number of exponentials needed for accuracy `eps`
/// with `J` terms and `tau = ||H|| T`.
pub fn trotter_step_count_bound(j: usize, tau: f64, eps: f64, reading: StepBoundReading) -> Result<f64> {
    if j == 0 {
        return domain("term count must be at least 1");
    }
    if !(tau > 0.0) || !(eps > 0.0) {
        return domain("tau and eps must be positive");
    }
    let jt = j as f64 * tau;
    if eps >= jt {
        return domain(format!("eps={eps} must be below J*tau={jt}"));
    }
    let log = (jt / eps).ln();
    let exponent = 2.0 * 5f64.ln().sqrt()
        * match reading {
            StepBoundReading::Literal => log,
            StepBoundReading::SqrtLog => log.sqrt(),
        };
    Ok(4.0 * (j * j) as f64 * tau * exponent.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_hubbard_h1, build_xxz, number_operator, XxzParams};
    use crate::linalg::max_abs_diff;
    use crate::oracle;

    fn c(re: f64, im: f64) -> c64 {
        c64::new(re, im)
    }

    #[test]
    fn z_rotation_on_zero() {
        let th = 0.7;
        let s = StateVector::basis(1, 0).unwrap();
        let out = apply_pauli_exponential(&s, &PauliTerm::parse(1.0, "Z").unwrap(), th).unwrap();
        assert!((out.amplitudes()[0] - c64::from_polar(1.0, -th)).norm() < 1e-15);
    }

    #[test]
    fn x_half_pi_flips() {
        let s = StateVector::basis(1, 0).unwrap();
        let out = apply_pauli_exponential(
            &s,
            &PauliTerm::parse(1.0, "X").unwrap(),
            std::f64::consts::FRAC_PI_2,
        )
        .unwrap();
        assert!(out.amplitudes()[0].norm() < 1e-15);
        assert!((out.amplitudes()[1] - c(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn exponential_matches_dense_on_eight_qubits() {
        let n = 8;
        let amps: Vec<c64> = (0..1 << n)
            .map(|b| c(((b * 37 % 101) as f64 - 50.0) / 50.0, ((b * 17 % 89) as f64 - 44.0) / 44.0))
            .collect();
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let psi = StateVector::new(n, amps.iter().map(|z| z / norm).collect()).unwrap();
        for text in ["XYZIZYXI", "IIIIIIIZ", "YIIIIIIY", "ZZXXYYZZ"] {
            let term = PauliTerm::parse(0.8, text).unwrap();
            let theta = 0.37;
            let out = apply_pauli_exponential(&psi, &term, theta).unwrap();
            let u = oracle::dense_exponential(&(oracle::kron_pauli(&term.string) * faer::Scale(c(0.8, 0.0))), theta)
                .unwrap();
            let expected = crate::linalg::matvec(&u, psi.amplitudes());
            let err = out
                .amplitudes()
                .iter()
                .zip(&expected)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-12, "{text}: {err}");
        }
    }

    #[test]
    fn size_mismatch_is_rejected() {
        let mut s = StateVector::basis(2, 0).unwrap();
        assert!(s.apply_pauli_exponential(&PauliTerm::parse(1.0, "X").unwrap(), 0.1).is_err());
    }

    #[test]
    fn domain_wall_layout() {
        let s = prepare_domain_wall(2).unwrap();
        assert_eq!(s.amplitudes()[0b10], c(1.0, 0.0));
        let s = prepare_domain_wall(4).unwrap();
        let z0 = crate::observables::spin_correlator(&s, 0, 1).unwrap();
        assert_eq!(z0, 1.0);
        assert!(prepare_domain_wall(3).is_err());
    }

    #[test]
    fn two_site_ground_state() {
        let p = HubbardParams::half_filling(2, 1.0, 0.1, 4.0);
        let g = prepare_hubbard_ground_state(&p).unwrap();
        assert!((g.energy + 2.0).abs() < 1e-12);
        assert!(!g.degenerate);
        let n_up = number_operator(2, Some(crate::lattice::Spin::Up)).unwrap();
        assert!((g.state.expectation(&n_up).unwrap() - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn sector_sizes() {
        assert_eq!(sector_basis(6, 3, 3).len(), 400);
        assert_eq!(sector_basis(2, 1, 1), vec![0b0101, 0b0110, 0b1001, 0b1010]);
    }

    #[test]
    fn commuting_terms_are_exact() {
        let h = QubitHamiltonian::from_terms(
            3,
            vec![
                PauliTerm::parse(0.4, "ZZI").unwrap(),
                PauliTerm::parse(-1.1, "IZZ").unwrap(),
                PauliTerm::parse(0.3, "ZIZ").unwrap(),
            ],
            "",
        )
        .unwrap();
        let amps: Vec<c64> = (0..8).map(|b| c(1.0, b as f64 * 0.1)).collect();
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let psi = StateVector::new(3, amps.iter().map(|z| z / norm).collect()).unwrap();
        let plan = TrotterPlan::new(h.clone(), 0.3).unwrap();
        let mut s = psi.clone();
        trotter_step(&mut s, &plan).unwrap();
        let exact = exact_evolve(&psi, &h, 0.3).unwrap();
        assert!(s.distance(&exact) < 1e-12);
        assert!((s.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_step_error_is_second_order() {
        let p = HubbardParams::half_filling(2, 1.0, 0.1, 4.0);
        let h1 = build_hubbard_h1(&p).unwrap();
        let g = prepare_hubbard_ground_state(&p).unwrap().state;
        let prop = ExactPropagator::new(&h1).unwrap();
        let err = |dt: f64| {
            let mut s = g.clone();
            trotter_step(&mut s, &TrotterPlan::new(h1.clone(), dt).unwrap()).unwrap();
            s.distance(&prop.evolve(&g, dt).unwrap())
        };
        let (e1, e2) = (err(0.02), err(0.01));
        assert!(e1 < 1e-3);
        let ratio = e1 / e2;
        assert!((3.0..5.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn record_zero_steps() {
        let s = prepare_domain_wall(2).unwrap();
        let h = build_xxz(&XxzParams { sites: 2, u: 4.0, h: 0.1 }).unwrap();
        let plan = TrotterPlan::new(h, 0.01).unwrap();
        let mut obs = ObservableSet::spin_correlators(2, &[(0, 1)]).unwrap();
        let (series, _) = evolve_and_record(s, &plan, 0, &mut obs).unwrap();
        assert_eq!(series.n_snapshots(), 1);
        assert_eq!(series.row(0)[0], c(-1.0, 0.0));
    }

    #[test]
    fn recorder_failure_aborts() {
        let s = prepare_domain_wall(2).unwrap();
        let h = build_xxz(&XxzParams { sites: 2, u: 4.0, h: 0.1 }).unwrap();
        let plan = TrotterPlan::new(h, 0.01).unwrap();
        let mut calls = 0;
        let mut rec = FnRecorder::new(vec!["x".into()], |_s: &StateVector| {
            calls += 1;
            if calls > 3 {
                Err(Error::Inconsistent("boom".into()))
            } else {
                Ok(vec![c(0.0, 0.0)])
            }
        });
        assert!(evolve_and_record(s, &plan, 10, &mut rec).is_err());
    }

    #[test]
    fn plan_validation() {
        let h = build_xxz(&XxzParams { sites: 2, u: 4.0, h: 0.1 }).unwrap();
        assert!(TrotterPlan::new(h.clone(), 0.0).is_err());
        assert!(TrotterPlan::with_order(h.clone(), 0.1, vec![0, 0, 1, 2, 3]).is_err());
        assert!(TrotterPlan::with_order(h, 0.1, vec![4, 3, 2, 1, 0]).is_ok());
    }

    #[test]
    fn exact_evolution_basics() {
        let h = QubitHamiltonian::from_terms(1, vec![PauliTerm::parse(1.0, "Z").unwrap()], "").unwrap();
        let s = StateVector::basis(1, 0).unwrap();
        let out = exact_evolve(&s, &h, 1.3).unwrap();
        assert!((out.amplitudes()[0] - c64::from_polar(1.0, -1.3)).norm() < 1e-13);
        let same = exact_evolve(&s, &h, 0.0).unwrap();
        assert!(same.distance(&s) < 1e-14);
        let big = QubitHamiltonian::from_terms(
            15,
            vec![PauliTerm::parse(1.0, "ZIIIIIIIIIIIIII").unwrap()],
            "",
        )
        .unwrap();
        assert!(matches!(ExactPropagator::new(&big), Err(Error::Refused(_))));
    }

    #[test]
    fn checkpoint_round_trip() {
        let p = HubbardParams::half_filling(2, 1.0, 0.1, 4.0);
        let g = prepare_hubbard_ground_state(&p).unwrap().state;
        let mut buf = Vec::new();
        g.write_checkpoint(&mut buf).unwrap();
        assert_eq!(&buf[..4], b"QKSV");
        assert_eq!(buf.len(), 16 + 16 * 16);
        assert_eq!(u32::from_le_bytes(buf[8..12].try_into().unwrap()), 4);
        let back = StateVector::read_checkpoint(buf.as_slice()).unwrap();
        assert_eq!(back, g);
        buf[0] = b'X';
        assert!(StateVector::read_checkpoint(buf.as_slice()).is_err());
    }

    #[test]
    fn step_bound_values() {
        let b = trotter_step_count_bound(1, 1.0, 0.01, StepBoundReading::Literal).unwrap();
        // 4 * 100^(2 sqrt(ln 5))
        let expected = 4.0 * 100f64.powf(2.0 * 5f64.ln().sqrt());
        assert!((b - expected).abs() / expected < 1e-12);
        let a = trotter_step_count_bound(2, 2.0, 0.01, StepBoundReading::Literal).unwrap();
        let a1 = trotter_step_count_bound(2, 1.0, 0.01, StepBoundReading::Literal).unwrap();
        assert!(a >= a1);
        let j4 = trotter_step_count_bound(4, 1.0, 0.01, StepBoundReading::SqrtLog).unwrap();
        let j2 = trotter_step_count_bound(2, 1.0, 0.01, StepBoundReading::SqrtLog).unwrap();
        assert!(j4 >= 4.0 * j2);
        assert!(trotter_step_count_bound(1, 1.0, 1.0, StepBoundReading::Literal).is_err());
        let _ = max_abs_diff;
    }
}
