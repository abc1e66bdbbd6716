//! Observable sets, snapshot series and their preprocessing.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::lattice::{one_body, Spin};
use crate::linalg::{c64, CMat};
use crate::pauli::{Pauli, PauliMasks, PauliOperator, PauliString};
use crate::state::StateVector;

/// Coordinates of a row in an [`ObservableSet`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObservableIndex {
    /// `rho_pq = <c_p^dagger c_q>` on one spin block.
    Density { p: usize, q: usize, spin: Spin },
    /// `n_k` with `k = 2 pi j / L`.
    Momentum { j: usize, spin: Spin },
    /// `<Z_j1 Z_j2>`.
    SpinCorrelator { j1: usize, j2: usize },
    Other,
}

/// An ordered list of operators `O_j` whose expectations form one snapshot.
#[derive(Clone, Debug)]
pub struct ObservableSet {
    n_qubits: usize,
    labels: Vec<String>,
    operators: Vec<PauliOperator>,
    layout: Vec<ObservableIndex>,
    // distinct strings across all operators, measured once per snapshot
    strings: Vec<PauliMasks>,
    weights: Vec<Vec<(c64, usize)>>,
}

impl ObservableSet {
    pub fn new(n_qubits: usize) -> Self {
        ObservableSet {
            n_qubits,
            labels: Vec::new(),
            operators: Vec::new(),
            layout: Vec::new(),
            strings: Vec::new(),
            weights: Vec::new(),
        }
    }

    pub fn push(
        &mut self,
        label: impl Into<String>,
        op: PauliOperator,
        index: ObservableIndex,
    ) -> Result<()> {
        let label = label.into();
        if op.n_qubits() != self.n_qubits {
            return domain(format!(
                "observable {label} acts on {} qubits, set declares {}",
                op.n_qubits(),
                self.n_qubits
            ));
        }
        if label.is_empty() || label.contains([',', '"', '\n']) || label == "t" {
            return domain(format!("invalid observable label {label:?}"));
        }
        if self.labels.contains(&label) {
            return domain(format!("duplicate observable label {label}"));
        }
        let mut w = Vec::with_capacity(op.terms().len());
        for (c, s) in op.terms() {
            let m = s.masks();
            let idx = match self.strings.iter().position(|x| *x == m) {
                Some(i) => i,
                None => {
                    self.strings.push(m);
                    self.strings.len() - 1
                }
            };
            w.push((*c, idx));
        }
        self.weights.push(w);
        self.labels.push(label);
        self.operators.push(op);
        self.layout.push(index);
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn operators(&self) -> &[PauliOperator] {
        &self.operators
    }

    pub fn layout(&self) -> &[ObservableIndex] {
        &self.layout
    }

    /// Rows whose operator is not Hermitian carry complex expectations.
    pub fn complex_rows(&self) -> Vec<bool> {
        self.operators.iter().map(|o| !o.is_hermitian()).collect()
    }

    /// `[-sum|a_j|, sum|a_j|]` for Hermitian rows.
    pub fn ranges(&self) -> Vec<Option<(f64, f64)>> {
        self.operators
            .iter()
            .map(|o| {
                o.is_hermitian().then(|| {
                    let r = o.coefficient_one_norm();
                    (-r, r)
                })
            })
            .collect()
    }

    /// Every `rho_pq` of one spin block, row-major in `(p, q)`.
    pub fn density_matrix(sites: usize, spin: Spin) -> Result<Self> {
        let mut set = ObservableSet::new(2 * sites);
        for p in 0..sites {
            for q in 0..sites {
                set.push(
                    density_label(p, q, spin),
                    one_body(p, q, spin, sites)?,
                    ObservableIndex::Density { p, q, spin },
                )?;
            }
        }
        Ok(set)
    }

    /// `n_k` for every `k` on the grid `2 pi j / L`, as Pauli sums.
    pub fn momentum(sites: usize, spin: Spin) -> Result<Self> {
        let mut set = ObservableSet::new(2 * sites);
        for (j, k) in momentum_grid(sites).into_iter().enumerate() {
            let mut op = PauliOperator::zero(2 * sites);
            for p in 0..sites {
                for q in 0..sites {
                    let phase = c64::from_polar(1.0 / sites as f64, -k * (p as f64 - q as f64));
                    op = op.add(&one_body(p, q, spin, sites)?.scale(phase))?;
                }
            }
            set.push(momentum_label(j, spin), op, ObservableIndex::Momentum { j, spin })?;
        }
        Ok(set)
    }

    /// `<Z_j1 Z_j2>` for the listed pairs on an `n`-spin chain.
    pub fn spin_correlators(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut set = ObservableSet::new(n);
        for &(j1, j2) in pairs {
            if j1 == j2 || j1 >= n || j2 >= n {
                return domain(format!("invalid correlator pair ({j1}, {j2}) on {n} spins"));
            }
            let s = PauliString::from_sparse(n, &[(j1, Pauli::Z), (j2, Pauli::Z)])?;
            set.push(
                zz_label(j1, j2),
                PauliOperator::single(c64::new(1.0, 0.0), s),
                ObservableIndex::SpinCorrelator { j1, j2 },
            )?;
        }
        Ok(set)
    }

    /// All pairs `j1 < j2`.
    pub fn all_spin_correlators(n: usize) -> Result<Self> {
        let pairs: Vec<_> = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .collect();
        Self::spin_correlators(n, &pairs)
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

pub fn density_label(p: usize, q: usize, spin: Spin) -> String {
    format!("rho_{}_{}_{}", spin.label(), p, q)
}

pub fn momentum_label(j: usize, spin: Spin) -> String {
    format!("nk_{}_{}", spin.label(), j)
}

pub fn zz_label(j1: usize, j2: usize) -> String {
    format!("zz_{j1}_{j2}")
}

/// Expectations `<O_j>` in row order.
pub fn measure_set(state: &StateVector, obs: &ObservableSet) -> Result<Vec<c64>> {
    if state.n_qubits() != obs.n_qubits {
        return domain(format!(
            "state has {} qubits, observables expect {}",
            state.n_qubits(),
            obs.n_qubits
        ));
    }
    let amps = state.amplitudes();
    let values: Vec<c64> = obs.strings.iter().map(|m| m.expectation(amps)).collect();
    Ok(obs
        .weights
        .iter()
        .map(|w| w.iter().map(|(c, i)| c * values[*i]).sum())
        .collect())
}

/// `<psi| c_p^dagger c_q |psi>` through the Jordan-Wigner expansion.
pub fn density_matrix_element(
    state: &StateVector,
    p: usize,
    q: usize,
    spin: Spin,
    sites: usize,
) -> Result<c64> {
    if state.n_qubits() != 2 * sites {
        return domain("state does not match the lattice size");
    }
    one_body(p, q, spin, sites)?.expectation(state.amplitudes())
}

/// Full `L x L` single-particle density matrix of one spin block.
pub fn density_matrix(state: &StateVector, sites: usize, spin: Spin) -> Result<CMat> {
    let set = ObservableSet::density_matrix(sites, spin)?;
    let vals = measure_set(state, &set)?;
    Ok(CMat::from_fn(sites, sites, |p, q| vals[p * sites + q]))
}

/// `k_j = 2 pi j / L`, `j = 0..L`.
pub fn momentum_grid(sites: usize) -> Vec<f64> {
    (0..sites)
        .map(|j| 2.0 * std::f64::consts::PI * j as f64 / sites as f64)
        .collect()
}

/// `n_k = (1/L) sum_{p,q} rho_pq e^{-ik(p-q)}`.
///
/// The imaginary residual is discarded when below `1e-10`; above `1e-8` the
/// input is treated as inconsistent.
pub fn momentum_occupation(rho: &CMat, k: f64) -> Result<f64> {
    let l = rho.nrows();
    if l == 0 || rho.ncols() != l {
        return domain("density matrix must be square and nonempty");
    }
    let mut acc = c64::new(0.0, 0.0);
    for p in 0..l {
        for q in 0..l {
            acc += rho[(p, q)] * c64::from_polar(1.0, -k * (p as f64 - q as f64));
        }
    }
    acc /= l as f64;
    if acc.im.abs() > 1e-8 {
        return Err(Error::Inconsistent(format!(
            "momentum occupation has imaginary part {:e}; density matrix not Hermitian",
            acc.im
        )));
    }
    Ok(acc.re)
}

/// `<Z_j1 Z_j2>` with Pauli (+-1) normalization.
pub fn spin_correlator(state: &StateVector, j1: usize, j2: usize) -> Result<f64> {
    let n = state.n_qubits();
    if j1 == j2 || j1 >= n || j2 >= n {
        return domain(format!("invalid correlator pair ({j1}, {j2}) on {n} qubits"));
    }
    let s = PauliString::from_sparse(n, &[(j1, Pauli::Z), (j2, Pauli::Z)])?;
    Ok(s.masks().expectation(state.amplitudes()).re)
}

/// Observable expectations on the uniform grid `t_n = n dt`, `n = 0..cols`.
///
/// Row `j` holds `<O_j(t)>`; rows flagged complex are written to CSV as
/// `label.re, label.im` column pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct SnapshotSeries {
    dt: f64,
    labels: Vec<String>,
    rows: Vec<Vec<c64>>,
    complex_rows: Vec<bool>,
    ranges: Vec<Option<(f64, f64)>>,
}

impl SnapshotSeries {
    pub fn from_rows(dt: f64, labels: Vec<String>, rows: Vec<Vec<c64>>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return domain(format!("time step must be positive, got {dt}"));
        }
        if labels.len() != rows.len() {
            return domain("label count does not match row count");
        }
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return domain("rows have unequal lengths");
        }
        if !rows.is_empty() && cols == 0 {
            return domain("a series needs at least one snapshot");
        }
        let complex_rows = rows
            .iter()
            .map(|r| r.iter().any(|z| z.im != 0.0))
            .collect();
        let n = rows.len();
        Ok(SnapshotSeries {
            dt,
            labels,
            rows,
            complex_rows,
            ranges: vec![None; n],
        })
    }

    /// Builds from snapshot columns (one `Vec` per time).
    pub fn from_columns(dt: f64, labels: Vec<String>, columns: &[Vec<c64>]) -> Result<Self> {
        let n = labels.len();
        if columns.iter().any(|c| c.len() != n) {
            return domain("snapshot length does not match label count");
        }
        let rows = (0..n)
            .map(|i| columns.iter().map(|c| c[i]).collect())
            .collect();
        Self::from_rows(dt, labels, rows)
    }

    pub fn with_complex_rows(mut self, flags: Vec<bool>) -> Self {
        assert_eq!(flags.len(), self.rows.len());
        for (f, r) in self.complex_rows.iter_mut().zip(&flags) {
            *f |= *r;
        }
        self
    }

    pub fn with_ranges(mut self, ranges: Vec<Option<(f64, f64)>>) -> Self {
        assert_eq!(ranges.len(), self.rows.len());
        self.ranges = ranges;
        self
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_snapshots(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    /// Time of the zero-based column `n`.
    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_snapshots()).map(|n| self.time(n)).collect()
    }

    pub fn row(&self, i: usize) -> &[c64] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<c64>] {
        &self.rows
    }

    pub fn column(&self, n: usize) -> Vec<c64> {
        self.rows.iter().map(|r| r[n]).collect()
    }

    pub fn is_complex_row(&self, i: usize) -> bool {
        self.complex_rows[i]
    }

    pub fn ranges(&self) -> &[Option<(f64, f64)>] {
        &self.ranges
    }

    pub fn row_index(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::Domain(format!("no row labelled {label}")))
    }

    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        if let Some(&bad) = rows.iter().find(|&&r| r >= self.n_rows()) {
            return domain(format!("row {bad} out of range"));
        }
        Ok(SnapshotSeries {
            dt: self.dt,
            labels: rows.iter().map(|&r| self.labels[r].clone()).collect(),
            rows: rows.iter().map(|&r| self.rows[r].clone()).collect(),
            complex_rows: rows.iter().map(|&r| self.complex_rows[r]).collect(),
            ranges: rows.iter().map(|&r| self.ranges[r]).collect(),
        })
    }

    /// The first `cols` snapshots.
    pub fn truncate(&self, cols: usize) -> Result<Self> {
        if cols == 0 || cols > self.n_snapshots() {
            return domain(format!(
                "cannot keep {cols} of {} snapshots",
                self.n_snapshots()
            ));
        }
        let mut out = self.clone();
        for r in &mut out.rows {
            r.truncate(cols);
        }
        Ok(out)
    }

    /// Dense `N x cols` matrix of the first `cols` snapshots.
    pub fn to_matrix(&self, cols: usize) -> CMat {
        CMat::from_fn(self.n_rows(), cols, |i, j| self.rows[i][j])
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["t".to_string()];
        for (l, &cx) in self.labels.iter().zip(&self.complex_rows) {
            if cx {
                header.push(format!("{l}.re"));
                header.push(format!("{l}.im"));
            } else {
                header.push(l.clone());
            }
        }
        w.write_record(&header).map_err(csv_err)?;
        for n in 0..self.n_snapshots() {
            let mut rec = vec![format_float(self.time(n))];
            for (row, &cx) in self.rows.iter().zip(&self.complex_rows) {
                rec.push(format_float(row[n].re));
                if cx {
                    rec.push(format_float(row[n].im));
                }
            }
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    /// Parses the CSV layout written by [`SnapshotSeries::write_csv`]; the time
    /// step is recovered from the `t` column, which must be uniform.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let header: Vec<String> = r.headers().map_err(csv_err)?.iter().map(String::from).collect();
        if header.first().map(String::as_str) != Some("t") {
            return Err(Error::Parse("first column must be t".into()));
        }
        // (label, re column, optional im column)
        let mut layout: Vec<(String, usize, Option<usize>)> = Vec::new();
        let mut pending: HashMap<String, usize> = HashMap::new();
        for (c, h) in header.iter().enumerate().skip(1) {
            if let Some(base) = h.strip_suffix(".re") {
                pending.insert(base.to_string(), c);
                layout.push((base.to_string(), c, None));
            } else if let Some(base) = h.strip_suffix(".im") {
                let pos = layout
                    .iter()
                    .position(|(l, _, im)| l == base && im.is_none() && pending.contains_key(base))
                    .ok_or_else(|| Error::Parse(format!("{h} without matching .re column")))?;
                layout[pos].2 = Some(c);
                pending.remove(base);
            } else {
                layout.push((h.clone(), c, None));
            }
        }
        let mut times = Vec::new();
        let mut rows: Vec<Vec<c64>> = vec![Vec::new(); layout.len()];
        for rec in r.records() {
            let rec = rec.map_err(csv_err)?;
            let get = |c: usize| -> Result<f64> {
                rec.get(c)
                    .ok_or_else(|| Error::Parse("short csv record".into()))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad number in column {c}: {e}")))
            };
            times.push(get(0)?);
            for (row, (_, re, im)) in rows.iter_mut().zip(&layout) {
                let imv = match im {
                    Some(c) => get(*c)?,
                    None => 0.0,
                };
                row.push(c64::new(get(*re)?, imv));
            }
        }
        if times.len() < 2 {
            return Err(Error::Parse(
                "need at least two snapshots to recover the time step".into(),
            ));
        }
        let dt = times[1] - times[0];
        for (n, t) in times.iter().enumerate() {
            if (t - n as f64 * dt).abs() > 1e-9 * (1.0 + t.abs()) {
                return Err(Error::Parse(format!("non-uniform time grid at row {n}")));
            }
        }
        let flags = layout.iter().map(|(_, _, im)| im.is_some()).collect();
        let labels = layout.into_iter().map(|(l, _, _)| l).collect();
        Ok(Self::from_rows(dt, labels, rows)?.with_complex_rows(flags))
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

/// Shortest round-trip decimal form; deterministic across runs.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x:e}")
    }
}

/// `n_k` rows derived from recorded `rho_pq` rows of one spin block.
pub fn momentum_series(rho: &SnapshotSeries, sites: usize, spin: Spin) -> Result<SnapshotSeries> {
    let mut idx = vec![0usize; sites * sites];
    for p in 0..sites {
        for q in 0..sites {
            idx[p * sites + q] = rho.row_index(&density_label(p, q, spin))?;
        }
    }
    let grid = momentum_grid(sites);
    let cols = rho.n_snapshots();
    let mut rows = vec![Vec::with_capacity(cols); sites];
    for n in 0..cols {
        let m = CMat::from_fn(sites, sites, |p, q| rho.row(idx[p * sites + q])[n]);
        for (j, &k) in grid.iter().enumerate() {
            rows[j].push(c64::new(momentum_occupation(&m, k)?, 0.0));
        }
    }
    let labels = (0..sites).map(|j| momentum_label(j, spin)).collect();
    SnapshotSeries::from_rows(rho.dt(), labels, rows)
}

/// Row-wise `(x - mean) / std` with statistics from a leading window.
#[derive(Clone, Debug)]
pub struct StandardizedSeries {
    pub values: Vec<Vec<c64>>,
    pub means: Vec<c64>,
    /// Population standard deviations (divide by the window length).
    pub stds: Vec<f64>,
    pub skipped_rows: Vec<usize>,
    pub window: usize,
}

/// Rows whose spread is below this are treated as constant.
pub const MIN_SPREAD: f64 = 1e-12;

pub fn standardize_row(row: &[c64], window: usize) -> Result<(Vec<c64>, c64, f64)> {
    if window < 2 || window > row.len() {
        return domain(format!(
            "standardization window {window} invalid for {} snapshots",
            row.len()
        ));
    }
    let w = &row[..window];
    let mean: c64 = w.iter().sum::<c64>() / window as f64;
    let var = w.iter().map(|z| (z - mean).norm_sqr()).sum::<f64>() / window as f64;
    let std = var.sqrt();
    let values = if std < MIN_SPREAD {
        vec![c64::new(0.0, 0.0); row.len()]
    } else {
        row.iter().map(|z| (z - mean) / std).collect()
    };
    Ok((values, mean, std))
}

pub fn standardize(series: &SnapshotSeries, window: usize) -> Result<StandardizedSeries> {
    let mut out = StandardizedSeries {
        values: Vec::with_capacity(series.n_rows()),
        means: Vec::with_capacity(series.n_rows()),
        stds: Vec::with_capacity(series.n_rows()),
        skipped_rows: Vec::new(),
        window,
    };
    for (i, row) in series.rows().iter().enumerate() {
        let (v, mean, std) = standardize_row(row, window)?;
        if std < MIN_SPREAD {
            out.skipped_rows.push(i);
        }
        out.values.push(v);
        out.means.push(mean);
        out.stds.push(std);
    }
    Ok(out)
}

impl StandardizedSeries {
    /// Inverse map for row `i`; skipped rows return their constant mean.
    pub fn destandardize(&self, i: usize, values: &[c64]) -> Vec<c64> {
        if self.skipped_rows.contains(&i) {
            return vec![self.means[i]; values.len()];
        }
        values
            .iter()
            .map(|z| z * self.stds[i] + self.means[i])
            .collect()
    }
}

/// Adds independent `N(0, 1/sqrt(shots))` noise to every entry (both parts of
/// complex rows), clamping rows with a known physical range.
pub fn shot_noise_inject(series: &SnapshotSeries, shots: u64, seed: u64) -> Result<SnapshotSeries> {
    if shots == 0 {
        return domain("shot count must be positive");
    }
    let normal = Normal::new(0.0, 1.0 / (shots as f64).sqrt())
        .map_err(|e| Error::Domain(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = series.clone();
    for (i, row) in out.rows.iter_mut().enumerate() {
        let cx = series.complex_rows[i];
        let range = series.ranges[i];
        for z in row.iter_mut() {
            z.re += normal.sample(&mut rng);
            if cx {
                z.im += normal.sample(&mut rng);
            }
            if let Some((lo, hi)) = range {
                z.re = z.re.clamp(lo, hi);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> c64 {
        c64::new(re, 0.0)
    }

    #[test]
    fn standardize_two_points() {
        let s = SnapshotSeries::from_rows(0.1, vec!["a".into()], vec![vec![c(0.0), c(1.0)]]).unwrap();
        let st = standardize(&s, 2).unwrap();
        assert!((st.means[0].re - 0.5).abs() < 1e-15);
        assert!((st.stds[0] - 0.5).abs() < 1e-15);
        assert!((st.values[0][0].re + 1.0).abs() < 1e-15);
        assert!((st.values[0][1].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn constant_rows_are_skipped() {
        let s = SnapshotSeries::from_rows(
            0.1,
            vec!["k".into(), "v".into()],
            vec![vec![c(3.0); 5], vec![c(1.0), c(2.0), c(0.0), c(1.0), c(5.0)]],
        )
        .unwrap();
        let st = standardize(&s, 4).unwrap();
        assert_eq!(st.skipped_rows, vec![0]);
        assert_eq!(st.destandardize(0, &[c(7.0), c(-1.0)]), vec![c(3.0), c(3.0)]);
        let back = st.destandardize(1, &st.values[1]);
        for (a, b) in back.iter().zip(s.row(1)) {
            assert!((a - b).norm() < 1e-12);
        }
        // window statistics only
        let w = &st.values[1][..4];
        let mean: c64 = w.iter().sum::<c64>() / 4.0;
        let var: f64 = w.iter().map(|z| (z - mean).norm_sqr()).sum::<f64>() / 4.0;
        assert!(mean.norm() < 1e-12 && (var.sqrt() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn momentum_of_uniform_diagonal() {
        let nbar = 0.37;
        let rho = CMat::from_fn(4, 4, |p, q| if p == q { c(nbar) } else { c(0.0) });
        for k in momentum_grid(4) {
            assert!((momentum_occupation(&rho, k).unwrap() - nbar).abs() < 1e-14);
        }
    }

    #[test]
    fn momentum_rejects_non_hermitian() {
        let rho = CMat::from_fn(2, 2, |p, q| if p < q { c64::new(0.0, 0.3) } else { c(0.0) });
        assert!(momentum_occupation(&rho, 0.5).is_err());
    }

    #[test]
    fn csv_round_trip_with_complex_rows() {
        let s = SnapshotSeries::from_rows(
            0.01,
            vec!["a".into(), "b".into()],
            vec![
                vec![c(1.0), c(0.5), c(0.25)],
                vec![c64::new(0.1, -0.2), c64::new(0.3, 0.0), c(0.0)],
            ],
        )
        .unwrap();
        let text = s.to_csv_string().unwrap();
        assert!(text.starts_with("t,a,b.re,b.im\n"));
        let back = SnapshotSeries::read_csv(text.as_bytes()).unwrap();
        assert_eq!(back.labels(), s.labels());
        assert!(back.is_complex_row(1) && !back.is_complex_row(0));
        assert!((back.dt() - 0.01).abs() < 1e-15);
        for i in 0..2 {
            assert_eq!(back.row(i), s.row(i));
        }
    }

    #[test]
    fn noise_is_seeded_and_clamped() {
        let s = SnapshotSeries::from_rows(0.1, vec!["zz".into()], vec![vec![c(1.0); 50]])
            .unwrap()
            .with_ranges(vec![Some((-1.0, 1.0))]);
        let a = shot_noise_inject(&s, 4, 7).unwrap();
        let b = shot_noise_inject(&s, 4, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.row(0).iter().all(|z| z.re <= 1.0 && z.re >= -1.0));
        assert_ne!(a, shot_noise_inject(&s, 4, 8).unwrap());
        assert!(shot_noise_inject(&s, 0, 1).is_err());
    }

    #[test]
    fn noise_std_matches_shots() {
        let shots = 100u64;
        let s = SnapshotSeries::from_rows(0.1, vec!["x".into()], vec![vec![c(0.0); 10_000]]).unwrap();
        let noisy = shot_noise_inject(&s, shots, 11).unwrap();
        let xs: Vec<f64> = noisy.row(0).iter().map(|z| z.re).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let std = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64).sqrt();
        assert!((std - 0.1).abs() / 0.1 < 0.05, "std {std}");
    }
}
