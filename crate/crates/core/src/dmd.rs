//! Exact dynamic mode decomposition of a snapshot sequence.
//!
//! Given snapshot columns `x_1, ..., x_m` on a uniform grid, the fit finds a
//! rank-`r` linear map `A` with `x_{n+1} ~ A x_n` and returns its
//! eigen-decomposition so that `x(t) ~ Phi exp(Omega t) b`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::linalg::{c64, eig, matvec, pinv, singular_values, svd, CMat};
use crate::observables::SnapshotSeries;

/// Singular values below this are never kept, whatever the rank policy.
pub const MIN_SINGULAR_VALUE: f64 = 1e-14;
/// Eigenvector-matrix condition number above which a fit is flagged defective.
pub const DEFECTIVE_CONDITION: f64 = 1e12;
/// Eigenvalues this small relative to the largest get projected modes.
const ZERO_EIGENVALUE: f64 = 1e-12;
/// Relative distance to the negative real axis inside which `Im(ln lambda)`
/// is pinned to `+pi`.
const BRANCH_TOLERANCE: f64 = 1e-12;

/// Shifted snapshot matrices: `x1 = [x_1 .. x_{m-1}]`, `x2 = [x_2 .. x_m]`.
#[derive(Clone, Debug)]
pub struct DataMatrices {
    pub x1: CMat,
    pub x2: CMat,
    pub dt: f64,
    /// Time between consecutive columns of `x1`; equals `dt` unless the
    /// columns come from a delay embedding.
    pub stride: f64,
}

impl DataMatrices {
    pub fn new(x1: CMat, x2: CMat, dt: f64) -> Result<Self> {
        if x1.nrows() != x2.nrows() || x1.ncols() != x2.ncols() {
            return domain(format!(
                "snapshot matrices differ in shape: {}x{} vs {}x{}",
                x1.nrows(),
                x1.ncols(),
                x2.nrows(),
                x2.ncols()
            ));
        }
        if x1.nrows() == 0 || x1.ncols() == 0 {
            return domain("empty snapshot matrices");
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return domain(format!("time step must be positive, got {dt}"));
        }
        Ok(DataMatrices { x1, x2, dt, stride: dt })
    }

    pub fn with_stride(mut self, stride: f64) -> Result<Self> {
        if !(stride > 0.0 && stride.is_finite()) {
            return domain(format!("column stride must be positive, got {stride}"));
        }
        self.stride = stride;
        Ok(self)
    }

    /// Builds both matrices from consecutive columns of `snapshots`
    /// (`N x m`).
    pub fn from_snapshots(snapshots: &CMat, dt: f64) -> Result<Self> {
        let m = snapshots.ncols();
        if m < 2 {
            return domain("need at least two snapshots");
        }
        let n = snapshots.nrows();
        let x1 = CMat::from_fn(n, m - 1, |i, j| snapshots[(i, j)]);
        let x2 = CMat::from_fn(n, m - 1, |i, j| snapshots[(i, j + 1)]);
        Self::new(x1, x2, dt)
    }

    pub fn n_rows(&self) -> usize {
        self.x1.nrows()
    }

    /// Number of snapshot pairs, `m - 1`.
    pub fn n_pairs(&self) -> usize {
        self.x1.ncols()
    }
}

/// Uses the first `m` snapshots of `series`.
pub fn build_data_matrices(series: &SnapshotSeries, m: usize) -> Result<DataMatrices> {
    if m < 3 {
        return domain(format!("fitting window m={m} must be at least 3"));
    }
    if series.n_snapshots() < m {
        return domain(format!(
            "series has {} snapshots, fitting window needs {m}",
            series.n_snapshots()
        ));
    }
    DataMatrices::from_snapshots(&series.to_matrix(m), series.dt())
}

/// How many singular triplets the fit retains.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankPolicy {
    /// Exactly `r` (clamped to the number of usable singular values).
    Fixed(usize),
    /// Every `sigma_i >= theta * sigma_1`.
    Threshold(f64),
}

impl Default for RankPolicy {
    fn default() -> Self {
        RankPolicy::Threshold(1e-10)
    }
}

impl RankPolicy {
    pub fn validate(&self) -> Result<()> {
        match *self {
            RankPolicy::Fixed(0) => domain("fixed rank must be at least 1"),
            RankPolicy::Threshold(t) if !(t > 0.0 && t < 1.0) => {
                domain(format!("rank threshold {t} outside (0, 1)"))
            }
            _ => Ok(()),
        }
    }
}

impl std::fmt::Display for RankPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RankPolicy::Fixed(r) => write!(f, "fixed({r})"),
            RankPolicy::Threshold(t) => write!(f, "threshold({t:e})"),
        }
    }
}

/// Leading `rank` singular triplets: `X ~ U diag(s) V*`.
#[derive(Clone, Debug)]
pub struct TruncatedSvd {
    pub u: CMat,
    pub s: Vec<f64>,
    pub v: CMat,
    pub rank: usize,
    /// Set when the policy asked for more triplets than were usable.
    pub reduced: bool,
    /// All singular values of the input, for residual bookkeeping.
    pub all_singular_values: Vec<f64>,
}

impl TruncatedSvd {
    /// `U diag(s) V*`.
    pub fn reconstruct(&self) -> CMat {
        let scaled = CMat::from_fn(self.u.nrows(), self.rank, |i, k| {
            self.u[(i, k)] * self.s[k]
        });
        &scaled * self.v.adjoint()
    }

    /// `sum_{i > r} sigma_i^2`, the squared Frobenius truncation residual.
    pub fn discarded_energy(&self) -> f64 {
        self.all_singular_values[self.rank..]
            .iter()
            .map(|s| s * s)
            .sum()
    }
}

pub fn truncated_svd(x: &CMat, policy: RankPolicy) -> Result<TruncatedSvd> {
    policy.validate()?;
    let full = svd(x)?;
    let s1 = full.s.first().copied().unwrap_or(0.0);
    if !(s1 > 0.0) {
        return domain("cannot decompose an all-zero matrix");
    }
    let usable = full.s.iter().take_while(|&&s| s >= MIN_SINGULAR_VALUE).count();
    let (wanted, clamped) = match policy {
        RankPolicy::Fixed(r) => (r.min(usable), r > usable),
        RankPolicy::Threshold(t) => (full.s.iter().take_while(|&&s| s >= t * s1).count(), false),
    };
    let rank = wanted.min(usable).max(1);
    let reduced = clamped || wanted > usable;
    Ok(TruncatedSvd {
        u: CMat::from_fn(full.u.nrows(), rank, |i, k| full.u[(i, k)]),
        s: full.s[..rank].to_vec(),
        v: CMat::from_fn(full.v.nrows(), rank, |i, k| full.v[(i, k)]),
        rank,
        reduced,
        all_singular_values: full.s,
    })
}

/// How the mode amplitudes `b` are obtained from the first snapshot.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplitudeFit {
    /// `b = Phi^+ x_1`, least squares.
    #[default]
    LeastSquares,
    /// `b = Phi^* x_1`; only equivalent when the modes are orthonormal.
    Adjoint,
    /// Least squares against every column of `X1` and `X2`.
    Trajectory,
}

/// Post-processing of the fitted eigenvalues.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spectrum {
    /// Eigenvalues as fitted.
    #[default]
    Free,
    /// Nonzero eigenvalues rescaled to `|lambda| = 1`, as for unitary
    /// dynamics; modes are kept and amplitudes refitted.
    Unit,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DmdOptions {
    pub rank: RankPolicy,
    pub amplitudes: AmplitudeFit,
    pub spectrum: Spectrum,
}

/// Fitted surrogate `x(t) = Phi exp(Omega t) b`.
#[derive(Clone, Debug)]
pub struct DmdModel {
    modes: CMat,
    eigenvalues: Vec<c64>,
    exponents: Vec<c64>,
    amplitudes: Vec<c64>,
    dt: f64,
    snapshots: usize,
    options: DmdOptions,
    singular_values: Vec<f64>,
    eigvec_condition: f64,
    rank_reduced: bool,
}

/// `ln(lambda) / dt` on the principal branch with the negative real axis
/// mapped to `+pi`.
pub fn continuous_exponent(lambda: c64, dt: f64) -> c64 {
    let r = lambda.norm();
    if r == 0.0 {
        return c64::new(f64::NEG_INFINITY, 0.0);
    }
    let mut arg = lambda.arg();
    if lambda.re < 0.0 && lambda.im.abs() <= BRANCH_TOLERANCE * r {
        arg = std::f64::consts::PI;
    }
    c64::new(r.ln(), arg) / dt
}

fn exp_omega_t(omega: c64, t: f64) -> c64 {
    if omega.re == f64::NEG_INFINITY {
        // zero eigenvalue: lambda^0 = 1, lambda^t = 0 afterwards
        return if t == 0.0 { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) };
    }
    (omega * t).exp()
}

pub fn fit_dmd(data: &DataMatrices, policy: RankPolicy) -> Result<DmdModel> {
    fit_dmd_with(
        data,
        DmdOptions {
            rank: policy,
            ..DmdOptions::default()
        },
    )
}

pub fn fit_dmd_with(data: &DataMatrices, options: DmdOptions) -> Result<DmdModel> {
    let tsvd = truncated_svd(&data.x1, options.rank)?;
    let r = tsvd.rank;
    // X2 V S^-1
    let x2v = &data.x2 * &tsvd.v;
    let x2vs = CMat::from_fn(x2v.nrows(), r, |i, k| x2v[(i, k)] / tsvd.s[k]);
    let k_tilde = tsvd.u.adjoint() * &x2vs;
    let (mut eigenvalues, w) = eig(&k_tilde)?;
    let eigvec_condition = condition(&w)?;
    let mut modes = &x2vs * &w;
    // exact modes vanish for zero eigenvalues; fall back to projected modes
    let lmax = eigenvalues.iter().map(|l| l.norm()).fold(0.0, f64::max);
    for (k, l) in eigenvalues.iter().enumerate() {
        if l.norm() <= ZERO_EIGENVALUE * lmax {
            let projected = &tsvd.u * w.col(k);
            for i in 0..modes.nrows() {
                modes[(i, k)] = projected[i];
            }
        }
    }

    if options.spectrum == Spectrum::Unit {
        for l in eigenvalues.iter_mut() {
            if l.norm() > ZERO_EIGENVALUE * lmax {
                *l /= l.norm();
            }
        }
    }

    let first: Vec<c64> = (0..data.n_rows()).map(|i| data.x1[(i, 0)]).collect();
    let amplitudes = match options.amplitudes {
        AmplitudeFit::LeastSquares => matvec(&pinv(&modes, 1e-13)?, &first),
        AmplitudeFit::Adjoint => matvec(&modes.adjoint().to_owned(), &first),
        AmplitudeFit::Trajectory => Vec::new(),
    };
    let exponents: Vec<c64> = eigenvalues
        .iter()
        .map(|&l| continuous_exponent(l, data.dt))
        .collect();
    let amplitudes = if options.amplitudes == AmplitudeFit::Trajectory {
        trajectory_amplitudes(data, &modes, &exponents)?
    } else {
        amplitudes
    };
    Ok(DmdModel {
        modes,
        eigenvalues,
        exponents,
        amplitudes,
        dt: data.dt,
        snapshots: data.n_pairs() + 1,
        options,
        singular_values: tsvd.s,
        eigvec_condition,
        rank_reduced: tsvd.reduced,
    })
}

fn trajectory_amplitudes(data: &DataMatrices, modes: &CMat, exponents: &[c64]) -> Result<Vec<c64>> {
    let (n, cols, r) = (modes.nrows(), data.n_pairs(), modes.ncols());
    let mut lhs = CMat::zeros(2 * cols * n, r);
    let mut rhs = Vec::with_capacity(2 * cols * n);
    for (block, (x, shift)) in [(&data.x1, 0.0), (&data.x2, data.dt)].into_iter().enumerate() {
        for l in 0..cols {
            let t = l as f64 * data.stride + shift;
            let base = (block * cols + l) * n;
            for k in 0..r {
                let e = exp_omega_t(exponents[k], t);
                for i in 0..n {
                    lhs[(base + i, k)] = modes[(i, k)] * e;
                }
            }
            rhs.extend((0..n).map(|i| x[(i, l)]));
        }
    }
    Ok(matvec(&pinv(&lhs, 1e-13)?, &rhs))
}

/// Builds the operator `X2 V S^-1 U*` whose nonzero eigenpairs are the DMD
/// eigenvalues and modes.
pub fn exact_operator(data: &DataMatrices, tsvd: &TruncatedSvd) -> CMat {
    let x2v = &data.x2 * &tsvd.v;
    let x2vs = CMat::from_fn(x2v.nrows(), tsvd.rank, |i, k| x2v[(i, k)] / tsvd.s[k]);
    &x2vs * tsvd.u.adjoint()
}

fn condition(m: &CMat) -> Result<f64> {
    let s = singular_values(m)?;
    let (max, min) = (s.first().copied().unwrap_or(0.0), s.last().copied().unwrap_or(0.0));
    Ok(if min > 0.0 { max / min } else { f64::INFINITY })
}

impl DmdModel {
    pub fn modes(&self) -> &CMat {
        &self.modes
    }

    pub fn eigenvalues(&self) -> &[c64] {
        &self.eigenvalues
    }

    pub fn exponents(&self) -> &[c64] {
        &self.exponents
    }

    pub fn amplitudes(&self) -> &[c64] {
        &self.amplitudes
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn rank(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn n_rows(&self) -> usize {
        self.modes.nrows()
    }

    /// Snapshots used for the fit (`m`).
    pub fn snapshots(&self) -> usize {
        self.snapshots
    }

    pub fn options(&self) -> DmdOptions {
        self.options
    }

    /// Retained singular values of `x1`.
    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    /// Condition number of the eigenvector matrix of the projected operator.
    pub fn eigvec_condition(&self) -> f64 {
        self.eigvec_condition
    }

    pub fn is_defective(&self) -> bool {
        !(self.eigvec_condition <= DEFECTIVE_CONDITION)
    }

    pub fn rank_reduced(&self) -> bool {
        self.rank_reduced
    }

    /// `Phi diag(exp(Omega t)) b`, with `t` measured from the first snapshot.
    pub fn predict(&self, t: f64) -> Vec<c64> {
        let coeffs: Vec<c64> = self
            .exponents
            .iter()
            .zip(&self.amplitudes)
            .map(|(&w, &b)| exp_omega_t(w, t) * b)
            .collect();
        matvec(&self.modes, &coeffs)
    }

    /// `Phi diag(Lambda^n) b`, the prediction at grid index `n`.
    pub fn predict_discrete(&self, n: usize) -> Vec<c64> {
        let coeffs: Vec<c64> = self
            .eigenvalues
            .iter()
            .zip(&self.amplitudes)
            .map(|(&l, &b)| l.powu(n as u32) * b)
            .collect();
        matvec(&self.modes, &coeffs)
    }

    /// Predictions as the columns of an `N x times.len()` matrix.
    pub fn reconstruct(&self, times: &[f64]) -> CMat {
        let mut out = CMat::zeros(self.n_rows(), times.len());
        for (j, &t) in times.iter().enumerate() {
            for (i, z) in self.predict(t).into_iter().enumerate() {
                out[(i, j)] = z;
            }
        }
        out
    }

    /// `Phi diag(Lambda) Phi^+`, the fitted one-step map restricted to the
    /// mode span.
    pub fn step_operator(&self) -> Result<CMat> {
        let pl = pinv(&self.modes, 1e-13)?;
        let scaled = CMat::from_fn(self.n_rows(), self.rank(), |i, k| {
            self.modes[(i, k)] * self.eigenvalues[k]
        });
        Ok(&scaled * &pl)
    }

    /// `||x2_j - A x1_j|| / ||x1_j||` for every snapshot pair, with `A` the
    /// fitted one-step map. Pairs with a zero snapshot are skipped.
    pub fn one_step_residuals(&self, data: &DataMatrices) -> Result<Vec<f64>> {
        if data.n_rows() != self.n_rows() {
            return domain("data and model have different row counts");
        }
        let a = self.step_operator()?;
        let pred = &a * &data.x1;
        let mut out = Vec::with_capacity(data.n_pairs());
        for j in 0..data.n_pairs() {
            let norm = data.x1.col(j).norm_l2();
            if norm == 0.0 {
                continue;
            }
            let diff = (0..data.n_rows())
                .map(|i| (data.x2[(i, j)] - pred[(i, j)]).norm_sqr())
                .sum::<f64>()
                .sqrt();
            out.push(diff / norm);
        }
        Ok(out)
    }

    /// Serializable form; complex scalars as `[re, im]`, matrices column-major.
    pub fn to_doc(&self) -> DmdModelDoc {
        DmdModelDoc {
            r: self.rank(),
            n_rows: self.n_rows(),
            dt: self.dt,
            m: self.snapshots,
            policy: self.options.rank,
            amplitude_fit: self.options.amplitudes,
            spectrum: self.options.spectrum,
            eigvec_condition: finite_or_none(self.eigvec_condition),
            defective: self.is_defective(),
            rank_reduced: self.rank_reduced,
            singular_values: self.singular_values.clone(),
            eigenvalues: self.eigenvalues.iter().map(pair).collect(),
            exponents: self
                .exponents
                .iter()
                .map(|z| [finite_or_none(z.re), finite_or_none(z.im)])
                .collect(),
            amplitudes: self.amplitudes.iter().map(pair).collect(),
            modes: (0..self.modes.ncols())
                .flat_map(|k| (0..self.modes.nrows()).map(move |i| (i, k)))
                .map(|(i, k)| pair(&self.modes[(i, k)]))
                .collect(),
        }
    }

    /// Rebuilds a model from its serialized form.
    pub fn from_doc(doc: &DmdModelDoc) -> Result<Self> {
        let r = doc.r;
        if doc.eigenvalues.len() != r
            || doc.amplitudes.len() != r
            || doc.modes.len() != r * doc.n_rows
        {
            return Err(Error::Parse("model document has inconsistent sizes".into()));
        }
        let unpair = |p: &[f64; 2]| c64::new(p[0], p[1]);
        let eigenvalues: Vec<c64> = doc.eigenvalues.iter().map(unpair).collect();
        Ok(DmdModel {
            modes: CMat::from_fn(doc.n_rows, r, |i, k| unpair(&doc.modes[k * doc.n_rows + i])),
            exponents: eigenvalues
                .iter()
                .map(|&l| continuous_exponent(l, doc.dt))
                .collect(),
            eigenvalues,
            amplitudes: doc.amplitudes.iter().map(unpair).collect(),
            dt: doc.dt,
            snapshots: doc.m,
            options: DmdOptions {
                rank: doc.policy,
                amplitudes: doc.amplitude_fit,
                spectrum: doc.spectrum,
            },
            singular_values: doc.singular_values.clone(),
            eigvec_condition: doc.eigvec_condition.unwrap_or(f64::INFINITY),
            rank_reduced: doc.rank_reduced,
        })
    }
}

fn pair(z: &c64) -> [f64; 2] {
    [z.re, z.im]
}

fn finite_or_none(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// JSON layout of a [`DmdModel`]. Non-finite numbers are written as `null`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DmdModelDoc {
    pub r: usize,
    pub n_rows: usize,
    pub dt: f64,
    pub m: usize,
    pub policy: RankPolicy,
    pub amplitude_fit: AmplitudeFit,
    #[serde(default)]
    pub spectrum: Spectrum,
    pub eigvec_condition: Option<f64>,
    pub defective: bool,
    pub rank_reduced: bool,
    pub singular_values: Vec<f64>,
    pub eigenvalues: Vec<[f64; 2]>,
    pub exponents: Vec<[Option<f64>; 2]>,
    pub amplitudes: Vec<[f64; 2]>,
    pub modes: Vec<[f64; 2]>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius, identity, max_abs_diff};

    fn c(re: f64) -> c64 {
        c64::new(re, 0.0)
    }

    fn series_matrix(rows: &[Vec<f64>]) -> CMat {
        CMat::from_fn(rows.len(), rows[0].len(), |i, j| c(rows[i][j]))
    }

    #[test]
    fn three_snapshot_matrices() {
        let s = SnapshotSeries::from_rows(
            0.1,
            vec!["a".into()],
            vec![vec![c(1.0), c(2.0), c(3.0)]],
        )
        .unwrap();
        let d = build_data_matrices(&s, 3).unwrap();
        assert_eq!(d.x1[(0, 0)], c(1.0));
        assert_eq!(d.x1[(0, 1)], c(2.0));
        assert_eq!(d.x2[(0, 0)], c(2.0));
        assert_eq!(d.x2[(0, 1)], c(3.0));
        assert!(build_data_matrices(&s, 4).is_err());
        assert!(build_data_matrices(&s, 2).is_err());
    }

    #[test]
    fn rank_one_outer_product() {
        let x = CMat::from_fn(4, 5, |i, j| c((i + 1) as f64 * (j as f64 - 1.5)));
        let t = truncated_svd(&x, RankPolicy::default()).unwrap();
        assert_eq!(t.rank, 1);
        assert!(max_abs_diff(&t.reconstruct(), &x) < 1e-12);
    }

    #[test]
    fn identity_fixed_rank_two() {
        let t = truncated_svd(&identity(3), RankPolicy::Fixed(2)).unwrap();
        let resid = frobenius(&(&t.reconstruct() - &identity(3)));
        assert!((resid * resid - 1.0).abs() < 1e-12);
        assert!((t.discarded_energy() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_matrix_rejected() {
        assert!(truncated_svd(&CMat::zeros(3, 3), RankPolicy::default()).is_err());
        assert!(RankPolicy::Threshold(1.5).validate().is_err());
        assert!(RankPolicy::Fixed(0).validate().is_err());
    }

    #[test]
    fn geometric_decay() {
        let dt = 0.1;
        let row: Vec<f64> = (0..10).map(|n| 0.9f64.powi(n)).collect();
        let d = DataMatrices::from_snapshots(&series_matrix(&[row]), dt).unwrap();
        let model = fit_dmd(&d, RankPolicy::default()).unwrap();
        assert_eq!(model.rank(), 1);
        assert!((model.eigenvalues()[0] - c(0.9)).norm() < 1e-12);
        assert!((model.exponents()[0] - c(0.9f64.ln() / dt)).norm() < 1e-10);
        assert!((model.predict(0.0)[0] - c(1.0)).norm() < 1e-12);
        assert!((model.predict(1.5)[0] - c(0.9f64.powi(15))).norm() < 1e-12);
    }

    #[test]
    fn planar_rotation() {
        let th = 0.3f64;
        let mut x = [1.0, 0.5];
        let mut cols = Vec::new();
        for _ in 0..8 {
            cols.push(x);
            x = [th.cos() * x[0] - th.sin() * x[1], th.sin() * x[0] + th.cos() * x[1]];
        }
        let m = CMat::from_fn(2, cols.len(), |i, j| c(cols[j][i]));
        let model = fit_dmd(&DataMatrices::from_snapshots(&m, 1.0).unwrap(), RankPolicy::default()).unwrap();
        let mut args: Vec<f64> = model.eigenvalues().iter().map(|l| l.arg()).collect();
        args.sort_by(f64::total_cmp);
        assert!((args[0] + th).abs() < 1e-12 && (args[1] - th).abs() < 1e-12);
        for l in model.eigenvalues() {
            assert!((l.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_series() {
        let m = series_matrix(&[vec![2.5; 6]]);
        let model = fit_dmd(&DataMatrices::from_snapshots(&m, 0.01).unwrap(), RankPolicy::default()).unwrap();
        assert!((model.eigenvalues()[0] - c(1.0)).norm() < 1e-12);
        assert!(model.exponents()[0].norm() < 1e-9);
        for t in [0.0, 1.0, 100.0] {
            assert!((model.predict(t)[0] - c(2.5)).norm() < 1e-9);
        }
    }

    #[test]
    fn negative_axis_branch() {
        let w = continuous_exponent(c64::new(-0.5, -0.0), 0.1);
        assert!((w.im - std::f64::consts::PI / 0.1).abs() < 1e-12);
        let back = (w * 0.1).exp();
        assert!((back - c64::new(-0.5, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn alternating_series() {
        let row: Vec<f64> = (0..6).map(|n| (-0.8f64).powi(n)).collect();
        let model = fit_dmd(
            &DataMatrices::from_snapshots(&series_matrix(&[row]), 0.5).unwrap(),
            RankPolicy::default(),
        )
        .unwrap();
        for n in 0..6 {
            let a = model.predict(n as f64 * 0.5)[0];
            let b = model.predict_discrete(n)[0];
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn nilpotent_component() {
        // x_n = (0.5^n, [n == 0]): one zero eigenvalue
        let rows = vec![
            (0..5).map(|n| 0.5f64.powi(n)).collect::<Vec<_>>(),
            vec![1.0, 0.0, 0.0, 0.0, 0.0],
        ];
        let model = fit_dmd(
            &DataMatrices::from_snapshots(&series_matrix(&rows), 1.0).unwrap(),
            RankPolicy::default(),
        )
        .unwrap();
        let p0 = model.predict(0.0);
        assert!((p0[1] - c(1.0)).norm() < 1e-10, "{p0:?}");
        assert!(model.predict(2.0)[1].norm() < 1e-10);
        assert!(serde_json::to_string(&model.to_doc()).is_ok());
    }

    #[test]
    fn json_round_trip() {
        let row: Vec<f64> = (0..12).map(|n| (0.4 * n as f64).cos() + 0.2).collect();
        let model = fit_dmd(
            &DataMatrices::from_snapshots(&series_matrix(&[row.clone(), row.iter().map(|x| x * x).collect()]), 0.1)
                .unwrap(),
            RankPolicy::default(),
        )
        .unwrap();
        let text = serde_json::to_string(&model.to_doc()).unwrap();
        let back = DmdModel::from_doc(&serde_json::from_str(&text).unwrap()).unwrap();
        for t in [0.0, 0.7, 3.0] {
            let (a, b) = (model.predict(t), back.predict(t));
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn unit_spectrum_removes_drift() {
        // slightly decaying rotation fitted with the unit-circle option
        let (th, r) = (0.2f64, 0.999f64);
        let mut rows = vec![Vec::new(), Vec::new()];
        for n in 0..40 {
            let a = r.powi(n) * (th * n as f64).cos();
            let b = r.powi(n) * (th * n as f64).sin();
            rows[0].push(a);
            rows[1].push(b);
        }
        let data = DataMatrices::from_snapshots(&series_matrix(&rows), 1.0).unwrap();
        let opts = DmdOptions {
            spectrum: Spectrum::Unit,
            ..DmdOptions::default()
        };
        let model = fit_dmd_with(&data, opts).unwrap();
        for l in model.eigenvalues() {
            assert!((l.norm() - 1.0).abs() < 1e-14);
            assert!((l.arg().abs() - th).abs() < 1e-10);
        }
    }

    #[test]
    fn trajectory_amplitudes_match_on_exact_data() {
        let x = |n: i32| (0.3 * n as f64).cos() + 0.5 * 0.9f64.powi(n);
        let rows: Vec<Vec<f64>> = (0..3).map(|s| (0..30).map(|n| x(n + s)).collect()).collect();
        let data = DataMatrices::from_snapshots(&series_matrix(&rows), 0.1).unwrap();
        let lsq = fit_dmd(&data, RankPolicy::default()).unwrap();
        let opts = DmdOptions {
            amplitudes: AmplitudeFit::Trajectory,
            ..DmdOptions::default()
        };
        let traj = fit_dmd_with(&data, opts).unwrap();
        for (a, b) in lsq.amplitudes().iter().zip(traj.amplitudes()) {
            assert!((a - b).norm() < 1e-8);
        }
        let back = DmdModel::from_doc(&traj.to_doc()).unwrap();
        assert_eq!(back.options(), opts);
    }
}
