//! DMD on time-delay embeddings of standardized observables.
//!
//! Each standardized row `o_0, o_1, ...` is lifted to vectors
//! `[o_k, o_{k+1}, ..., o_{k+n_s-1}]` taken every `n_g` steps; the second
//! data matrix is the same lift shifted by `tau` steps, so the fitted
//! operator advances the delay vector by `tau * dt`.
//!
//! Rows are either fitted one at a time ([`EmbeddingMode::PerRow`]) or their
//! delay blocks are stacked into a single `(n_s N) x n_l` data matrix and
//! fitted together ([`EmbeddingMode::Joint`]), which lets every observable
//! share the frequencies found in the others.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dmd::{fit_dmd_with, DataMatrices, DmdModel, DmdModelDoc, DmdOptions};
use crate::error::{domain, Error, Result};
use crate::linalg::{c64, CMat};
use crate::observables::{standardize_row, SnapshotSeries, MIN_SPREAD};

/// Embedding order `n_s`, column stride `n_g` and shift `tau` (grid steps).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingParams {
    pub n_s: usize,
    pub n_g: usize,
    pub tau: usize,
}

impl EmbeddingParams {
    pub fn new(n_s: usize, n_g: usize, tau: usize) -> Result<Self> {
        let p = EmbeddingParams { n_s, n_g, tau };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_s == 0 || self.n_g == 0 || self.tau == 0 {
            return domain(format!(
                "embedding ({}, {}, {}) needs every parameter >= 1",
                self.n_s, self.n_g, self.tau
            ));
        }
        Ok(())
    }

    /// Smallest fitting window the embedding accepts, `n_s + tau + 1`.
    pub fn min_window(&self) -> usize {
        self.n_s + self.tau + 1
    }

    /// Column count `floor((m - n_s - tau) / n_g) + 1`.
    pub fn n_columns(&self, m: usize) -> Result<usize> {
        self.validate()?;
        if m < self.min_window() {
            return domain(format!(
                "fitting window m={m} too short for embedding ({}, {}, {}); need m >= {}",
                self.n_s,
                self.n_g,
                self.tau,
                self.min_window()
            ));
        }
        Ok((m - self.n_s - self.tau) / self.n_g + 1)
    }
}

impl std::fmt::Display for EmbeddingParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {})", self.n_s, self.n_g, self.tau)
    }
}

/// Delay matrices of the first `m` values of `row`:
/// `X1[i][l] = row[l n_g + i]`, `X2[i][l] = row[l n_g + i + tau]`.
pub fn build_delay_matrices(row: &[c64], params: EmbeddingParams, m: usize) -> Result<(CMat, CMat)> {
    let n_l = params.n_columns(m)?;
    if row.len() < m {
        return domain(format!("row has {} values, window needs {m}", row.len()));
    }
    let x1 = CMat::from_fn(params.n_s, n_l, |i, l| row[l * params.n_g + i]);
    let x2 = CMat::from_fn(params.n_s, n_l, |i, l| row[l * params.n_g + i + params.tau]);
    Ok((x1, x2))
}

/// How a scalar prediction is read from the embedded state.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Readout {
    /// Component 0 of the row's delay block at `t`.
    #[default]
    First,
    /// Mean of component `i` evaluated at `t - i dt` over every `i` with
    /// `t - i dt >= 0`.
    DelayAverage,
}

/// Whether rows share one embedded model.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingMode {
    /// One model per observable.
    #[default]
    PerRow,
    /// One model on the stacked delay blocks of every non-constant row.
    Joint,
}

/// Fit outcome for one observable.
#[derive(Clone, Debug)]
pub enum RowModel {
    /// Own embedded model.
    Fitted { model: DmdModel, mean: c64, std: f64 },
    /// Block `block` of the shared joint model.
    Stacked { block: usize, mean: c64, std: f64 },
    /// Spread below the standardization floor; predicted as its mean.
    Constant { mean: c64 },
    /// The embedded fit failed; predictions are NaN.
    Failed { mean: c64, error: String },
}

impl RowModel {
    pub fn mean(&self) -> c64 {
        match self {
            RowModel::Fitted { mean, .. }
            | RowModel::Stacked { mean, .. }
            | RowModel::Constant { mean }
            | RowModel::Failed { mean, .. } => *mean,
        }
    }

    pub fn std(&self) -> f64 {
        match self {
            RowModel::Fitted { std, .. } | RowModel::Stacked { std, .. } => *std,
            _ => 0.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct IhodmdModel {
    labels: Vec<String>,
    params: EmbeddingParams,
    dt: f64,
    window: usize,
    readout: Readout,
    options: DmdOptions,
    mode: EmbeddingMode,
    rows: Vec<RowModel>,
    joint: Option<DmdModel>,
}

/// Standardized delay data of one row, as fed to the embedded fit.
pub fn embedded_data(
    row: &[c64],
    params: EmbeddingParams,
    m: usize,
    dt: f64,
) -> Result<Option<(DataMatrices, c64, f64)>> {
    let (values, mean, std) = standardize_row(row, m)?;
    if std < MIN_SPREAD {
        return Ok(None);
    }
    let (x1, x2) = build_delay_matrices(&values, params, m)?;
    let data = DataMatrices::new(x1, x2, params.tau as f64 * dt)?.with_stride(params.n_g as f64 * dt)?;
    Ok(Some((data, mean, std)))
}

/// Stacks the delay blocks of `rows` (already standardized) in order.
fn stacked_data(rows: &[Vec<c64>], params: EmbeddingParams, m: usize, dt: f64) -> Result<DataMatrices> {
    let n_l = params.n_columns(m)?;
    let n_s = params.n_s;
    let mut x1 = CMat::zeros(n_s * rows.len(), n_l);
    let mut x2 = CMat::zeros(n_s * rows.len(), n_l);
    for (b, row) in rows.iter().enumerate() {
        let (a1, a2) = build_delay_matrices(row, params, m)?;
        for l in 0..n_l {
            for i in 0..n_s {
                x1[(b * n_s + i, l)] = a1[(i, l)];
                x2[(b * n_s + i, l)] = a2[(i, l)];
            }
        }
    }
    DataMatrices::new(x1, x2, params.tau as f64 * dt)?.with_stride(params.n_g as f64 * dt)
}

/// Fits every row of `series` on its first `m` snapshots, one model per row.
pub fn fit_ihodmd(
    series: &SnapshotSeries,
    m: usize,
    params: EmbeddingParams,
    options: DmdOptions,
) -> Result<IhodmdModel> {
    fit_ihodmd_with(series, m, params, options, EmbeddingMode::PerRow)
}

pub fn fit_ihodmd_with(
    series: &SnapshotSeries,
    m: usize,
    params: EmbeddingParams,
    options: DmdOptions,
    mode: EmbeddingMode,
) -> Result<IhodmdModel> {
    params.n_columns(m)?;
    options.rank.validate()?;
    if series.n_snapshots() < m {
        return domain(format!(
            "series has {} snapshots, fitting window needs {m}",
            series.n_snapshots()
        ));
    }
    let dt = series.dt();
    let mut model = IhodmdModel {
        labels: series.labels().to_vec(),
        params,
        dt,
        window: m,
        readout: Readout::First,
        options,
        mode,
        rows: Vec::new(),
        joint: None,
    };
    match mode {
        EmbeddingMode::PerRow => {
            model.rows = series
                .rows()
                .par_iter()
                .map(|row| {
                    let mean = row[..m].iter().sum::<c64>() / m as f64;
                    match embedded_data(row, params, m, dt) {
                        Ok(None) => RowModel::Constant { mean },
                        Ok(Some((data, mean, std))) => match fit_dmd_with(&data, options) {
                            Ok(model) => RowModel::Fitted { model, mean, std },
                            Err(e) => RowModel::Failed {
                                mean,
                                error: e.to_string(),
                            },
                        },
                        Err(e) => RowModel::Failed {
                            mean,
                            error: e.to_string(),
                        },
                    }
                })
                .collect();
        }
        EmbeddingMode::Joint => {
            let mut standardized = Vec::new();
            for row in series.rows() {
                let (values, mean, std) = standardize_row(row, m)?;
                if std < MIN_SPREAD {
                    model.rows.push(RowModel::Constant { mean });
                } else {
                    model.rows.push(RowModel::Stacked {
                        block: standardized.len(),
                        mean,
                        std,
                    });
                    standardized.push(values);
                }
            }
            if !standardized.is_empty() {
                let fitted = stacked_data(&standardized, params, m, dt)
                    .and_then(|data| fit_dmd_with(&data, options));
                match fitted {
                    Ok(joint) => model.joint = Some(joint),
                    Err(e) => {
                        for r in model.rows.iter_mut() {
                            if let RowModel::Stacked { mean, .. } = *r {
                                *r = RowModel::Failed {
                                    mean,
                                    error: format!("joint fit: {e}"),
                                };
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(model)
}

impl IhodmdModel {
    pub fn with_readout(mut self, readout: Readout) -> Self {
        self.readout = readout;
        self
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn params(&self) -> EmbeddingParams {
        self.params
    }

    /// Base grid step.
    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Step of the embedded surrogate, `tau * dt`.
    pub fn dt_embedded(&self) -> f64 {
        self.params.tau as f64 * self.dt
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn readout(&self) -> Readout {
        self.readout
    }

    pub fn options(&self) -> DmdOptions {
        self.options
    }

    pub fn mode(&self) -> EmbeddingMode {
        self.mode
    }

    pub fn rows(&self) -> &[RowModel] {
        &self.rows
    }

    /// The shared model of a joint fit.
    pub fn joint(&self) -> Option<&DmdModel> {
        self.joint.as_ref()
    }

    /// The embedded model that predicts row `i`, if any.
    pub fn model_for_row(&self, i: usize) -> Option<&DmdModel> {
        match &self.rows[i] {
            RowModel::Fitted { model, .. } => Some(model),
            RowModel::Stacked { .. } => self.joint.as_ref(),
            _ => None,
        }
    }

    /// Rebuilds the standardized embedded data the model for row `i` was
    /// fitted on, from the same series.
    pub fn fit_data_for_row(&self, series: &SnapshotSeries, i: usize) -> Result<Option<DataMatrices>> {
        let m = self.window;
        match &self.rows[i] {
            RowModel::Fitted { .. } => Ok(embedded_data(series.row(i), self.params, m, self.dt)?.map(|d| d.0)),
            RowModel::Stacked { .. } => {
                let rows: Vec<Vec<c64>> = self
                    .rows
                    .iter()
                    .zip(series.rows())
                    .filter(|(r, _)| matches!(r, RowModel::Stacked { .. }))
                    .map(|(r, row)| row.iter().map(|z| (z - r.mean()) / r.std()).collect())
                    .collect();
                Ok(Some(stacked_data(&rows, self.params, m, self.dt)?))
            }
            _ => Ok(None),
        }
    }

    pub fn skipped_rows(&self) -> Vec<usize> {
        self.rows
            .iter()
            .enumerate()
            .filter(|(_, r)| matches!(r, RowModel::Constant { .. }))
            .map(|(i, _)| i)
            .collect()
    }

    /// `(label, message)` for every row whose fit failed.
    pub fn failures(&self) -> Vec<(String, String)> {
        self.rows
            .iter()
            .zip(&self.labels)
            .filter_map(|(r, l)| match r {
                RowModel::Failed { error, .. } => Some((l.clone(), error.clone())),
                _ => None,
            })
            .collect()
    }

    /// First failure as an error, for callers that need every row.
    pub fn require_all_fitted(&self) -> Result<()> {
        match self.failures().first() {
            Some((label, msg)) => Err(Error::Inconsistent(format!("row {label}: {msg}"))),
            None => Ok(()),
        }
    }

    /// Delay block (standardized) of row `i` at time `t`.
    pub fn embedded_state(&self, i: usize, t: f64) -> Option<Vec<c64>> {
        let n_s = self.params.n_s;
        match &self.rows[i] {
            RowModel::Fitted { model, .. } => Some(model.predict(t)),
            RowModel::Stacked { block, .. } => self
                .joint
                .as_ref()
                .map(|j| j.predict(t)[block * n_s..(block + 1) * n_s].to_vec()),
            _ => None,
        }
    }

    /// Readout of every row at `t` from embedded states supplied by `state`.
    fn read_rows(&self, t: f64, state: &dyn Fn(usize, f64) -> Vec<c64>) -> Vec<c64> {
        let n_s = self.params.n_s;
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| match r {
                RowModel::Constant { mean } => *mean,
                RowModel::Failed { .. } => c64::new(f64::NAN, f64::NAN),
                RowModel::Fitted { mean, std, .. } | RowModel::Stacked { mean, std, .. } => {
                    let offset = match r {
                        RowModel::Stacked { block, .. } => block * n_s,
                        _ => 0,
                    };
                    let value = match self.readout {
                        Readout::First => state(i, t)[offset],
                        Readout::DelayAverage => {
                            let mut acc = c64::new(0.0, 0.0);
                            let mut count = 0usize;
                            for k in 0..n_s {
                                let s = t - k as f64 * self.dt;
                                if s < -1e-12 * self.dt {
                                    break;
                                }
                                acc += state(i, s.max(0.0))[offset + k];
                                count += 1;
                            }
                            acc / count as f64
                        }
                    };
                    value * *std + *mean
                }
            })
            .collect()
    }

    /// Destandardized prediction of every row at time `t`.
    pub fn predict(&self, t: f64) -> Vec<c64> {
        let state = |i: usize, s: f64| -> Vec<c64> {
            match &self.rows[i] {
                RowModel::Fitted { model, .. } => model.predict(s),
                RowModel::Stacked { .. } => self.joint.as_ref().expect("joint model").predict(s),
                _ => Vec::new(),
            }
        };
        if self.mode == EmbeddingMode::Joint && self.readout == Readout::First {
            // evaluate the shared model once per time
            if let Some(j) = &self.joint {
                let shared = j.predict(t);
                return self.read_rows(t, &|i, s| match &self.rows[i] {
                    RowModel::Stacked { .. } => shared.clone(),
                    _ => state(i, s),
                });
            }
        }
        self.read_rows(t, &state)
    }

    /// Predictions on `t_n = n dt`, `n = 0..n_snapshots`.
    pub fn predict_series(&self, n_snapshots: usize) -> Result<SnapshotSeries> {
        let columns: Vec<Vec<c64>> = (0..n_snapshots)
            .into_par_iter()
            .map(|n| self.predict(n as f64 * self.dt))
            .collect();
        SnapshotSeries::from_columns(self.dt, self.labels.clone(), &columns)
    }

    pub fn to_doc(&self) -> IhodmdModelDoc {
        let mut doc = IhodmdModelDoc {
            n_s: self.params.n_s,
            n_g: self.params.n_g,
            tau: self.params.tau,
            dt: self.dt,
            dt_embedded: self.dt_embedded(),
            m: self.window,
            readout: self.readout,
            mode: self.mode,
            labels: self.labels.clone(),
            means: Vec::new(),
            stds: Vec::new(),
            skipped_rows: self.skipped_rows(),
            failed_rows: Vec::new(),
            blocks: Vec::new(),
            models: Vec::new(),
            joint: self.joint.as_ref().map(|j| j.to_doc()),
        };
        for (i, r) in self.rows.iter().enumerate() {
            let mut block = None;
            let model = match r {
                RowModel::Fitted { model, .. } => Some(model.to_doc()),
                RowModel::Stacked { block: b, .. } => {
                    block = Some(*b);
                    None
                }
                RowModel::Constant { .. } => None,
                RowModel::Failed { error, .. } => {
                    doc.failed_rows.push(FailedRow {
                        row: i,
                        label: self.labels[i].clone(),
                        error: error.clone(),
                    });
                    None
                }
            };
            doc.means.push([r.mean().re, r.mean().im]);
            doc.stds.push(r.std());
            doc.blocks.push(block);
            doc.models.push(model);
        }
        doc
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FailedRow {
    pub row: usize,
    pub label: String,
    pub error: String,
}

/// JSON layout of an [`IhodmdModel`]. Per-row fits fill `models[i]`; joint
/// fits fill `joint` and give each stacked row its block index in
/// `blocks[i]`. Constant and failed rows have neither.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IhodmdModelDoc {
    pub n_s: usize,
    pub n_g: usize,
    pub tau: usize,
    pub dt: f64,
    pub dt_embedded: f64,
    pub m: usize,
    pub readout: Readout,
    pub mode: EmbeddingMode,
    pub labels: Vec<String>,
    pub means: Vec<[f64; 2]>,
    pub stds: Vec<f64>,
    pub skipped_rows: Vec<usize>,
    pub failed_rows: Vec<FailedRow>,
    pub blocks: Vec<Option<usize>>,
    pub models: Vec<Option<DmdModelDoc>>,
    pub joint: Option<DmdModelDoc>,
}
