//! Prediction-error measurement and the analytic error bound.
//!
//! The bound has the form
//! `||e^n|| <= cond(Phi) [Delta_m + (n - m) c_m ||O||_F (1 + 2 n dt ||H||_F^2)^(1/2)]`,
//! where `Delta_m` is the error at the end of the fitting window and `c_m`
//! measures how well the fitted linear map advances one step. Since `c_m` has
//! no computable closed form, it is an input; [`c_m_surrogate`] offers the
//! largest normalized one-step residual over the fitting window.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dmd::DmdOptions;
use crate::error::{domain, Result};
use crate::ihodmd::{fit_ihodmd_with, EmbeddingMode, EmbeddingParams, IhodmdModel};
use crate::linalg::{c64, frobenius, singular_values, spectral_norm, vec_norm, CMat};
use crate::observables::SnapshotSeries;

/// `|truth - predicted|` per selected row on a shared grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ErrorCurve {
    pub times: Vec<f64>,
    pub labels: Vec<String>,
    /// `errors[r][n]` for selected row `r` at time `times[n]`.
    pub errors: Vec<Vec<f64>>,
    pub m: Option<usize>,
}

impl ErrorCurve {
    /// Euclidean norm across the selected rows at each time.
    pub fn aggregate(&self) -> Vec<f64> {
        (0..self.times.len())
            .map(|n| self.errors.iter().map(|r| r[n] * r[n]).sum::<f64>().sqrt())
            .collect()
    }

    /// Aggregated curve as a single-row curve.
    pub fn aggregated(&self) -> ErrorCurve {
        ErrorCurve {
            times: self.times.clone(),
            labels: vec!["norm".into()],
            errors: vec![self.aggregate()],
            m: self.m,
        }
    }

    pub fn with_window(mut self, m: usize) -> Self {
        self.m = Some(m);
        self
    }

    /// `t,error` table of the aggregated curve.
    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["t", "error"]).map_err(csv_err)?;
        for (t, e) in self.times.iter().zip(self.aggregate()) {
            w.write_record([
                crate::observables::format_float(*t),
                crate::observables::format_float(e),
            ])
            .map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| crate::Error::Parse(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn csv_err(e: csv::Error) -> crate::Error {
    crate::Error::Parse(e.to_string())
}

pub fn empirical_error_curve(
    truth: &SnapshotSeries,
    predicted: &SnapshotSeries,
    rows: &[usize],
) -> Result<ErrorCurve> {
    if truth.n_snapshots() != predicted.n_snapshots()
        || (truth.dt() - predicted.dt()).abs() > 1e-15 * truth.dt().abs().max(1.0)
    {
        return domain(format!(
            "grids differ: {} snapshots at dt={} vs {} at dt={}",
            truth.n_snapshots(),
            truth.dt(),
            predicted.n_snapshots(),
            predicted.dt()
        ));
    }
    if truth.n_rows() != predicted.n_rows() {
        return domain("series have different row counts");
    }
    let mut errors = Vec::with_capacity(rows.len());
    let mut labels = Vec::with_capacity(rows.len());
    for &r in rows {
        if r >= truth.n_rows() {
            return domain(format!("row {r} out of range"));
        }
        labels.push(truth.labels()[r].clone());
        errors.push(
            truth
                .row(r)
                .iter()
                .zip(predicted.row(r))
                .map(|(a, b)| (a - b).norm())
                .collect(),
        );
    }
    Ok(ErrorCurve {
        times: truth.times(),
        labels,
        errors,
        m: None,
    })
}

/// Inputs of the local and global bounds.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundInputs {
    pub h_frobenius: f64,
    /// `sqrt(sum_j ||O_j||_F^2)` over the predicted observables.
    pub o_frobenius: f64,
    pub c_m: f64,
    /// Error at the last fitted snapshot.
    pub delta_m: f64,
    /// `||Phi||_2 ||Phi^-1||_2`.
    pub phi_cond: f64,
    pub dt: f64,
    /// Step index (one-based: step `n` sits at `t = (n - 1) dt`).
    pub n: usize,
    pub m: usize,
}

impl BoundInputs {
    pub fn validate(&self) -> Result<()> {
        let vals = [
            self.h_frobenius,
            self.o_frobenius,
            self.c_m,
            self.delta_m,
            self.phi_cond,
            self.dt,
        ];
        if vals.iter().any(|v| v.is_nan() || *v < 0.0) {
            return domain("bound inputs must be nonnegative");
        }
        Ok(())
    }

    pub fn at_step(&self, n: usize) -> BoundInputs {
        BoundInputs { n, ..self.clone() }
    }
}

/// `c_m ||O||_F (1 + 2 n dt ||H||_F^2)^(1/2)`.
pub fn local_bound(inputs: &BoundInputs) -> Result<f64> {
    inputs.validate()?;
    let growth = 1.0 + 2.0 * inputs.n as f64 * inputs.dt * inputs.h_frobenius.powi(2);
    Ok(inputs.c_m * inputs.o_frobenius * growth.sqrt())
}

/// `cond(Phi) [Delta_m + (n - m) local_bound]`.
pub fn global_bound(inputs: &BoundInputs) -> Result<f64> {
    if inputs.n < inputs.m {
        return domain(format!("step n={} precedes the window m={}", inputs.n, inputs.m));
    }
    let local = local_bound(inputs)?;
    Ok(inputs.phi_cond * (inputs.delta_m + (inputs.n - inputs.m) as f64 * local))
}

/// Outcome of the `C t^{3/2}` envelope test.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnvelopeCheck {
    pub c: f64,
    /// Least-squares slope of `log|e|` against `log t` over the tail, when
    /// at least two nonzero points exist.
    pub tail_slope: Option<f64>,
    pub t_min: f64,
    pub points: usize,
    pub pass: bool,
}

/// Largest tail slope accepted by [`t32_envelope_check`].
pub const MAX_TAIL_SLOPE: f64 = 1.7;

/// Fits `C = max_{t >= t_min} |e(t)| / t^{3/2}` on the aggregated curve and
/// checks the tail log-log slope against [`MAX_TAIL_SLOPE`].
pub fn t32_envelope_check(curve: &ErrorCurve, t_min: f64) -> Result<EnvelopeCheck> {
    let agg = curve.aggregate();
    envelope_of(&curve.times, &agg, t_min)
}

fn envelope_of(times: &[f64], errors: &[f64], t_min: f64) -> Result<EnvelopeCheck> {
    if times.is_empty() {
        return domain("empty error curve");
    }
    let tail: Vec<(f64, f64)> = times
        .iter()
        .zip(errors)
        .filter(|(t, _)| **t >= t_min && **t > 0.0)
        .map(|(t, e)| (*t, *e))
        .collect();
    if tail.is_empty() {
        return domain(format!("no grid points at or after t_min={t_min}"));
    }
    let c = tail
        .iter()
        .map(|(t, e)| e / t.powf(1.5))
        .fold(0.0, f64::max);
    let logs: Vec<(f64, f64)> = tail
        .iter()
        .filter(|(_, e)| *e > 0.0)
        .map(|(t, e)| (t.ln(), e.ln()))
        .collect();
    let tail_slope = least_squares_slope(&logs);
    let within = tail.iter().all(|(t, e)| *e <= c * t.powf(1.5) * (1.0 + 1e-12));
    let pass = c.is_finite() && within && tail_slope.is_none_or(|s| s <= MAX_TAIL_SLOPE);
    Ok(EnvelopeCheck {
        c,
        tail_slope,
        t_min,
        points: tail.len(),
        pass,
    })
}

fn least_squares_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

/// `sigma_max / sigma_min`; infinite for rank-deficient input.
pub fn condition_number(modes: &CMat) -> Result<f64> {
    if modes.nrows() == 0 || modes.ncols() == 0 {
        return domain("empty mode matrix");
    }
    let s = singular_values(modes)?;
    let max = s[0];
    let min = s[s.len() - 1];
    if s.len() < modes.ncols() || min <= 1e-14 * max || min == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(max / min)
}

/// Largest `||x_{k+1} - A x_k|| / ||x_k||` over the fitting window of a DMD
/// fit, in the coordinates the fit operates in.
pub fn c_m_surrogate(model: &crate::dmd::DmdModel, data: &crate::dmd::DataMatrices) -> Result<f64> {
    Ok(model
        .one_step_residuals(data)?
        .into_iter()
        .fold(0.0, f64::max))
}

/// Per-row inputs of the bound for an iHODMD fit: the row's embedded model
/// supplies `cond(Phi)` and `c_m`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RowBoundReport {
    pub label: String,
    pub inputs: BoundInputs,
    /// `(t, empirical error, global bound)` for every post-window snapshot.
    pub steps: Vec<(f64, f64, f64)>,
    pub dominated: bool,
    /// Smallest `bound / error` over post-window steps with nonzero error.
    pub min_ratio: Option<f64>,
}

/// Evaluates the global bound at every post-window snapshot of row `row`.
///
/// `o_frobenius` is the Frobenius norm of the predicted observable's
/// operator. `delta_m` is the error at the last fitted snapshot.
pub fn ihodmd_row_bound(
    model: &IhodmdModel,
    truth: &SnapshotSeries,
    predicted: &SnapshotSeries,
    row: usize,
    h_frobenius: f64,
    o_frobenius: f64,
) -> Result<RowBoundReport> {
    let m = model.window();
    let (phi_cond, c_m) = match (model.model_for_row(row), model.fit_data_for_row(truth, row)?) {
        (Some(inner), Some(data)) => (condition_number(inner.modes())?, c_m_surrogate(inner, &data)?),
        _ => (1.0, 0.0),
    };
    let err = |n: usize| (truth.row(row)[n] - predicted.row(row)[n]).norm();
    let inputs = BoundInputs {
        h_frobenius,
        o_frobenius,
        c_m,
        delta_m: err(m - 1),
        phi_cond,
        dt: truth.dt(),
        n: m,
        m,
    };
    let mut steps = Vec::new();
    let mut dominated = true;
    let mut min_ratio: Option<f64> = None;
    for col in m..truth.n_snapshots() {
        let bound = global_bound(&inputs.at_step(col + 1))?;
        let e = err(col);
        if !(e <= bound) {
            dominated = false;
        }
        if e > 0.0 {
            let r = bound / e;
            min_ratio = Some(min_ratio.map_or(r, |x| x.min(r)));
        }
        steps.push((truth.time(col), e, bound));
    }
    Ok(RowBoundReport {
        label: truth.labels()[row].clone(),
        inputs,
        steps,
        dominated,
        min_ratio,
    })
}

/// One point of an error-vs-window sweep.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepPoint {
    pub m: usize,
    /// Aggregated error over the selected rows at the last snapshot.
    pub error_at_end: Option<f64>,
    /// Why the point was skipped, if it was.
    pub note: Option<String>,
}

/// Fits on the first `m` snapshots for every `m`, predicts to the end of
/// `truth` and records the error at the final snapshot. Infeasible windows
/// are skipped with a note.
pub fn error_vs_m_sweep(
    truth: &SnapshotSeries,
    rows: &[usize],
    m_values: &[usize],
    params: EmbeddingParams,
    options: DmdOptions,
    mode: EmbeddingMode,
) -> Vec<SweepPoint> {
    m_values
        .par_iter()
        .map(|&m| {
            let run = || -> Result<f64> {
                if m > truth.n_snapshots() {
                    return domain(format!(
                        "m={m} exceeds the {} recorded snapshots",
                        truth.n_snapshots()
                    ));
                }
                let model = fit_ihodmd_with(truth, m, params, options, mode)?;
                model.require_all_fitted()?;
                let last = truth.n_snapshots() - 1;
                let t = truth.time(last);
                let pred = model.predict(t);
                Ok(rows
                    .iter()
                    .map(|&r| (pred[r] - truth.row(r)[last]).norm_sqr())
                    .sum::<f64>()
                    .sqrt())
            };
            match run() {
                Ok(e) => SweepPoint {
                    m,
                    error_at_end: Some(e),
                    note: None,
                },
                Err(e) => SweepPoint {
                    m,
                    error_at_end: None,
                    note: Some(e.to_string()),
                },
            }
        })
        .collect()
}

/// `(|<psi|O|psi>|, ||O||_2, ||O||_F)` and whether they are ordered.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub lhs: f64,
    pub mid: f64,
    pub rhs: f64,
    pub pass: bool,
}

pub fn lemma_a_check(o: &CMat, psi: &[c64]) -> Result<LemmaCheck> {
    if o.nrows() != o.ncols() || o.nrows() != psi.len() {
        return domain("operator and state sizes differ");
    }
    if (vec_norm(psi) - 1.0).abs() > 1e-10 {
        return domain(format!("state norm {} is not 1", vec_norm(psi)));
    }
    let opsi = crate::linalg::matvec(o, psi);
    let lhs = psi
        .iter()
        .zip(&opsi)
        .map(|(a, b)| a.conj() * b)
        .sum::<c64>()
        .norm();
    let mid = spectral_norm(o)?;
    let rhs = frobenius(o);
    Ok(LemmaCheck {
        lhs,
        mid,
        rhs,
        pass: lhs <= mid + 1e-12 && mid <= rhs + 1e-12,
    })
}

/// `||AB - BA||_F^2` against `2 ||A||_F^2 ||B||_F^2`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CommutatorCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

pub fn commutator_frobenius_check(a: &CMat, b: &CMat) -> Result<CommutatorCheck> {
    if a.nrows() != a.ncols() || a.nrows() != b.nrows() || b.nrows() != b.ncols() {
        return domain("commutator check needs equal square matrices");
    }
    let comm = a * b - b * a;
    let lhs = frobenius(&comm).powi(2);
    let rhs = 2.0 * frobenius(a).powi(2) * frobenius(b).powi(2);
    Ok(CommutatorCheck {
        lhs,
        rhs,
        pass: lhs <= rhs + 1e-10,
    })
}
