//! Experiment configuration and the simulate / extrapolate / sweep / bound
//! pipeline behind the command-line tool.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::{
    empirical_error_curve, error_vs_m_sweep, ihodmd_row_bound, t32_envelope_check, EnvelopeCheck,
    ErrorCurve, RowBoundReport, SweepPoint,
};
use crate::dmd::{AmplitudeFit, DmdOptions, RankPolicy, Spectrum};
use crate::error::{domain, Error, Result};
use crate::ihodmd::{fit_ihodmd_with, EmbeddingMode, EmbeddingParams, IhodmdModel, Readout};
use crate::lattice::{build_hubbard_h1, HubbardParams, Spin, XxzParams, build_xxz};
use crate::observables::{shot_noise_inject, ObservableSet, SnapshotSeries};
use crate::pauli::QubitHamiltonian;
use crate::state::{
    evolve_and_record, prepare_domain_wall, prepare_hubbard_ground_state, StateVector, TrotterPlan,
    MAX_SIM_QUBITS,
};

/// Which lattice model is quenched.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelConfig {
    /// Ground state of the hopping-only chain evolved under the interacting
    /// chain.
    Hubbard {
        sites: usize,
        #[serde(default = "default_tau0")]
        tau0: f64,
        #[serde(default = "default_tau1")]
        tau1: f64,
        u: f64,
        /// Defaults to `u / 2`.
        #[serde(default)]
        mu: Option<f64>,
    },
    /// Domain-wall product state evolved under the XXZ chain.
    Xxz { sites: usize, u: f64, h: f64 },
}

fn default_tau0() -> f64 {
    1.0
}

fn default_tau1() -> f64 {
    0.1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub dt: f64,
    /// Trotter steps `M`; the series holds `M + 1` snapshots.
    pub total_steps: usize,
}

/// Observable family recorded as the snapshot rows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesKind {
    /// `n_k` on the momentum grid for one spin.
    Momentum,
    /// Every `rho_pq` for one spin.
    Density,
    /// `<Z_a Z_b>` for the configured pairs.
    Zz,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservablesConfig {
    pub series: SeriesKind,
    #[serde(default = "default_spin")]
    pub spin: Spin,
    /// Correlator pairs for `zz`; defaults to `(0, j)` for every `j > 0`.
    #[serde(default)]
    pub pairs: Option<Vec<[usize; 2]>>,
    /// Row labels whose predictions are scored.
    pub targets: Vec<String>,
}

fn default_spin() -> Spin {
    Spin::Up
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    /// Snapshots used for fitting, `m`.
    pub window: usize,
    pub n_s: usize,
    pub n_g: usize,
    pub tau: usize,
    /// Fixed rank; overrides `rank_threshold`.
    #[serde(default)]
    pub rank: Option<usize>,
    #[serde(default)]
    pub rank_threshold: Option<f64>,
    #[serde(default)]
    pub readout: Readout,
    /// `per_row` fits each observable alone; `joint` stacks them.
    #[serde(default)]
    pub mode: EmbeddingMode,
    #[serde(default)]
    pub amplitudes: AmplitudeFit,
    #[serde(default)]
    pub spectrum: Spectrum,
    /// Start of the envelope check; defaults to the last fitted snapshot.
    #[serde(default)]
    pub t_min: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub m: Vec<usize>,
}

/// Synthetic measurement noise added to the recorded series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub shots: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    pub model: ModelConfig,
    pub simulation: SimulationConfig,
    pub observables: ObservablesConfig,
    pub fit: FitConfig,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub noise: Option<NoiseConfig>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Parse(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes to toml")
    }

    pub fn validate(&self) -> Result<()> {
        match self.model {
            ModelConfig::Hubbard { .. } => self.hubbard_params()?.validate_half_filling()?,
            ModelConfig::Xxz { sites, u, h } => XxzParams { sites, u, h }.validate()?,
        }
        let sim = &self.simulation;
        if !(sim.dt > 0.0 && sim.dt.is_finite()) {
            return domain(format!("simulation.dt must be positive, got {}", sim.dt));
        }
        if self.fit.window > sim.total_steps + 1 {
            return domain(format!(
                "fit.window={} exceeds the {} snapshots of the simulation",
                self.fit.window,
                sim.total_steps + 1
            ));
        }
        self.embedding()?.n_columns(self.fit.window)?;
        self.rank_policy().validate()?;
        if self.observables.targets.is_empty() {
            return domain("observables.targets must name at least one row");
        }
        let set = self.observable_set()?;
        for t in &self.observables.targets {
            if set.index_of(t).is_none() {
                return domain(format!(
                    "target {t} is not recorded; available rows: {}",
                    set.labels().join(", ")
                ));
            }
        }
        if let Some(sw) = &self.sweep {
            if sw.m.is_empty() {
                return domain("sweep.m must list at least one window");
            }
        }
        if let Some(n) = &self.noise {
            if n.shots == 0 {
                return domain("noise.shots must be positive");
            }
        }
        Ok(())
    }

    fn hubbard_params(&self) -> Result<HubbardParams> {
        match self.model {
            ModelConfig::Hubbard {
                sites,
                tau0,
                tau1,
                u,
                mu,
            } => Ok(HubbardParams {
                sites,
                tau0,
                tau1,
                u,
                mu: mu.unwrap_or(u / 2.0),
            }),
            _ => domain("not a hubbard model"),
        }
    }

    pub fn sites(&self) -> usize {
        match self.model {
            ModelConfig::Hubbard { sites, .. } | ModelConfig::Xxz { sites, .. } => sites,
        }
    }

    pub fn n_qubits(&self) -> usize {
        match self.model {
            ModelConfig::Hubbard { sites, .. } => 2 * sites,
            ModelConfig::Xxz { sites, .. } => sites,
        }
    }

    /// The evolution Hamiltonian.
    pub fn hamiltonian(&self) -> Result<QubitHamiltonian> {
        match self.model {
            ModelConfig::Hubbard { .. } => build_hubbard_h1(&self.hubbard_params()?),
            ModelConfig::Xxz { sites, u, h } => build_xxz(&XxzParams { sites, u, h }),
        }
    }

    pub fn initial_state(&self) -> Result<StateVector> {
        match self.model {
            ModelConfig::Hubbard { .. } => {
                Ok(prepare_hubbard_ground_state(&self.hubbard_params()?)?.state)
            }
            ModelConfig::Xxz { sites, .. } => prepare_domain_wall(sites),
        }
    }

    pub fn observable_set(&self) -> Result<ObservableSet> {
        let sites = self.sites();
        match (self.observables.series, &self.model) {
            (SeriesKind::Momentum, ModelConfig::Hubbard { .. }) => {
                ObservableSet::momentum(sites, self.observables.spin)
            }
            (SeriesKind::Density, ModelConfig::Hubbard { .. }) => {
                ObservableSet::density_matrix(sites, self.observables.spin)
            }
            (SeriesKind::Zz, ModelConfig::Xxz { .. }) => {
                let pairs: Vec<(usize, usize)> = match &self.observables.pairs {
                    Some(p) => p.iter().map(|[a, b]| (*a, *b)).collect(),
                    None => (1..sites).map(|j| (0, j)).collect(),
                };
                ObservableSet::spin_correlators(sites, &pairs)
            }
            (kind, _) => domain(format!(
                "series {kind:?} does not apply to this model"
            )),
        }
    }

    pub fn embedding(&self) -> Result<EmbeddingParams> {
        EmbeddingParams::new(self.fit.n_s, self.fit.n_g, self.fit.tau)
    }

    pub fn rank_policy(&self) -> RankPolicy {
        match (self.fit.rank, self.fit.rank_threshold) {
            (Some(r), _) => RankPolicy::Fixed(r),
            (None, Some(t)) => RankPolicy::Threshold(t),
            (None, None) => RankPolicy::default(),
        }
    }

    pub fn dmd_options(&self) -> DmdOptions {
        DmdOptions {
            rank: self.rank_policy(),
            amplitudes: self.fit.amplitudes,
            spectrum: self.fit.spectrum,
        }
    }

    /// Indices of the target rows in `series`.
    pub fn target_rows(&self, series: &SnapshotSeries) -> Result<Vec<usize>> {
        self.observables
            .targets
            .iter()
            .map(|t| series.row_index(t))
            .collect()
    }

    /// Start of the envelope check.
    pub fn t_min(&self) -> f64 {
        self.fit
            .t_min
            .unwrap_or((self.fit.window - 1) as f64 * self.simulation.dt)
    }
}

/// Recorded trajectory of one quench.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub series: SnapshotSeries,
    pub hamiltonian: QubitHamiltonian,
    pub final_state: StateVector,
}

/// Bytes needed to hold one statevector of `n` qubits.
pub fn statevector_bytes(n_qubits: usize) -> u128 {
    16u128 << n_qubits
}

pub fn simulate(cfg: &ExperimentConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let n = cfg.n_qubits();
    if n > MAX_SIM_QUBITS {
        return Err(Error::Refused(format!(
            "{n} qubits exceed the {MAX_SIM_QUBITS}-qubit statevector guard (one state needs {} bytes)",
            statevector_bytes(n)
        )));
    }
    let hamiltonian = cfg.hamiltonian()?;
    let plan = TrotterPlan::new(hamiltonian.clone(), cfg.simulation.dt)?;
    let mut obs = cfg.observable_set()?;
    let (mut series, final_state) =
        evolve_and_record(cfg.initial_state()?, &plan, cfg.simulation.total_steps, &mut obs)?;
    if let Some(noise) = &cfg.noise {
        series = shot_noise_inject(&series, noise.shots, cfg.seed)?;
    }
    Ok(Trajectory {
        series,
        hamiltonian,
        final_state,
    })
}

/// Fitted model, its predictions over the full grid and the scored error.
#[derive(Clone, Debug)]
pub struct Extrapolation {
    pub model: IhodmdModel,
    pub prediction: SnapshotSeries,
    pub curve: ErrorCurve,
    pub envelope: EnvelopeCheck,
    pub targets: Vec<usize>,
}

impl Extrapolation {
    /// Aggregated target error at the last snapshot.
    pub fn final_error(&self) -> f64 {
        self.curve.aggregate().last().copied().unwrap_or(0.0)
    }
}

pub fn extrapolate(cfg: &ExperimentConfig, truth: &SnapshotSeries) -> Result<Extrapolation> {
    let m = cfg.fit.window;
    let params = cfg.embedding()?;
    if truth.n_snapshots() < m {
        return domain(format!(
            "trajectory has {} snapshots but fit.window={m}",
            truth.n_snapshots()
        ));
    }
    let targets = cfg.target_rows(truth)?;
    let model = fit_ihodmd_with(truth, m, params, cfg.dmd_options(), cfg.fit.mode)?
        .with_readout(cfg.fit.readout);
    for &r in &targets {
        if let Some((label, msg)) = model
            .failures()
            .into_iter()
            .find(|(l, _)| *l == truth.labels()[r])
        {
            return Err(Error::Inconsistent(format!("fit of target {label} failed: {msg}")));
        }
    }
    let prediction = model.predict_series(truth.n_snapshots())?;
    let curve = empirical_error_curve(truth, &prediction, &targets)?.with_window(m);
    let envelope = t32_envelope_check(&curve, cfg.t_min())?;
    Ok(Extrapolation {
        model,
        prediction,
        curve,
        envelope,
        targets,
    })
}

/// Bound-versus-error comparison for every target row.
pub fn bound_reports(
    cfg: &ExperimentConfig,
    truth: &SnapshotSeries,
    extrap: &Extrapolation,
) -> Result<Vec<RowBoundReport>> {
    let h_f = cfg.hamiltonian()?.frobenius_norm();
    let set = cfg.observable_set()?;
    extrap
        .targets
        .iter()
        .map(|&r| {
            let op = set
                .index_of(&truth.labels()[r])
                .map(|i| set.operators()[i].frobenius_norm())
                .ok_or_else(|| Error::Inconsistent(format!("row {r} has no operator")))?;
            ihodmd_row_bound(&extrap.model, truth, &extrap.prediction, r, h_f, op)
        })
        .collect()
}

/// Error at the final snapshot for each configured window.
pub fn sweep(cfg: &ExperimentConfig, truth: &SnapshotSeries, m_values: &[usize]) -> Result<Vec<SweepPoint>> {
    let targets = cfg.target_rows(truth)?;
    Ok(error_vs_m_sweep(
        truth,
        &targets,
        m_values,
        cfg.embedding()?,
        cfg.dmd_options(),
        cfg.fit.mode,
    ))
}
