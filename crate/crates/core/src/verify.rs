//! Property suite behind the `verify` command: conservation laws, dense
//! oracle comparisons, norm inequalities and synthetic DMD exactness.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::analysis::{commutator_frobenius_check, lemma_a_check};
use crate::dmd::{fit_dmd, DataMatrices, RankPolicy};
use crate::error::{domain, Result};
use crate::ihodmd::{build_delay_matrices, embedded_data, fit_ihodmd, EmbeddingParams};
use crate::lattice::{
    build_hubbard_h1, build_xxz, hopping_with_sign, jordan_wigner_number, magnetization_operator,
    number_operator, HubbardParams, Spin, XxzParams, mode_index,
};
use crate::linalg::{c64, frobenius, max_abs_diff, CMat};
use crate::dmd::DmdOptions;
use crate::oracle::{fermion_annihilator, kron_operator};
use crate::pauli::PauliTerm;
use crate::state::{prepare_domain_wall, prepare_hubbard_ground_state, trotter_step, StateVector, TrotterPlan};

/// Deliberate defect injected to confirm that the suite can fail.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mutation {
    #[default]
    None,
    /// Flips the sign of the `Y..Y` half of every Jordan-Wigner hopping.
    JwSign,
}

impl std::str::FromStr for Mutation {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Mutation::None),
            "jw-sign" => Ok(Mutation::JwSign),
            other => Err(crate::Error::Parse(format!(
                "unknown mutation {other}; expected none or jw-sign"
            ))),
        }
    }
}

/// Sizes and draw counts of the suite.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifySettings {
    pub seed: u64,
    /// Hubbard chain length for the conservation runs.
    pub sites: usize,
    pub steps: usize,
    pub dt: f64,
    /// Largest chain length compared against the dense fermion oracle.
    pub oracle_sites: usize,
    pub inequality_draws: usize,
    pub delay_draws: usize,
    pub mutation: Mutation,
}

impl Default for VerifySettings {
    fn default() -> Self {
        VerifySettings {
            seed: 0,
            sites: 6,
            steps: 1000,
            dt: 0.01,
            oracle_sites: 4,
            inequality_draws: 1000,
            delay_draws: 100,
            mutation: Mutation::None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PropertyResult {
    pub name: String,
    pub pass: bool,
    /// Worst deviation, or failure count for draw-based properties.
    pub metric: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl PropertyResult {
    fn within(name: &str, metric: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        PropertyResult {
            name: name.into(),
            pass: metric <= tolerance,
            metric,
            tolerance,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifyReport {
    pub settings: VerifySettings,
    pub properties: Vec<PropertyResult>,
    pub pass: bool,
}

impl VerifyReport {
    pub fn failures(&self) -> Vec<&PropertyResult> {
        self.properties.iter().filter(|p| !p.pass).collect()
    }
}

pub fn run_suite(settings: &VerifySettings) -> Result<VerifyReport> {
    if settings.sites < 2 || settings.sites % 2 != 0 || settings.oracle_sites < 2 {
        return domain("verify needs even sites >= 2 and oracle_sites >= 2");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut properties = Vec::new();
    properties.extend(hubbard_conservation(settings)?);
    properties.push(xxz_magnetization(settings)?);
    properties.push(jw_oracle(settings.oracle_sites, settings.mutation)?);
    properties.push(frobenius_identity(settings.oracle_sites)?);
    properties.push(lemma_draws(&mut rng, settings.inequality_draws)?);
    properties.push(commutator_draws(&mut rng, settings.inequality_draws)?);
    properties.push(delay_index_draws(&mut rng, settings.delay_draws)?);
    properties.push(order_one_embedding()?);
    properties.push(synthetic_dmd(&mut rng)?);
    let pass = properties.iter().all(|p| p.pass);
    Ok(VerifyReport {
        settings: settings.clone(),
        properties,
        pass,
    })
}

fn hubbard_conservation(s: &VerifySettings) -> Result<Vec<PropertyResult>> {
    let params = HubbardParams::half_filling(s.sites, 1.0, 0.1, 4.0);
    let plan = TrotterPlan::new(build_hubbard_h1(&params)?, s.dt)?;
    let mut state = prepare_hubbard_ground_state(&params)?.state;
    let n_up = number_operator(s.sites, Some(Spin::Up))?;
    let n_down = number_operator(s.sites, Some(Spin::Down))?;
    let count = |st: &StateVector| -> Result<(f64, f64)> {
        Ok((n_up.expectation(st.amplitudes())?.re, n_down.expectation(st.amplitudes())?.re))
    };
    let (up0, down0) = count(&state)?;
    let (mut norm_dev, mut num_dev) = (0.0f64, 0.0f64);
    for _ in 0..s.steps {
        trotter_step(&mut state, &plan)?;
        norm_dev = norm_dev.max((state.norm() - 1.0).abs());
        let (up, down) = count(&state)?;
        num_dev = num_dev.max((up - up0).abs()).max((down - down0).abs());
    }
    Ok(vec![
        PropertyResult::within(
            "norm_conservation",
            norm_dev,
            1e-10,
            format!("hubbard L={} over {} steps", s.sites, s.steps),
        ),
        PropertyResult::within(
            "particle_number_conservation",
            num_dev,
            1e-10,
            format!("N_up and N_down, hubbard L={}", s.sites),
        ),
    ])
}

fn xxz_magnetization(s: &VerifySettings) -> Result<PropertyResult> {
    let plan = TrotterPlan::new(build_xxz(&XxzParams { sites: s.sites, u: 4.0, h: 0.1 })?, s.dt)?;
    let mut state = prepare_domain_wall(s.sites)?;
    let mag = magnetization_operator(s.sites)?;
    let m0 = mag.expectation(state.amplitudes())?.re;
    let mut dev = 0.0f64;
    for _ in 0..s.steps {
        trotter_step(&mut state, &plan)?;
        dev = dev.max((mag.expectation(state.amplitudes())?.re - m0).abs());
    }
    Ok(PropertyResult::within(
        "magnetization_conservation",
        dev,
        1e-10,
        format!("xxz L={} over {} steps", s.sites, s.steps),
    ))
}

fn dense_terms(n: usize, terms: &[PauliTerm]) -> CMat {
    kron_operator(n, terms.iter().map(|t| (c64::new(t.coefficient, 0.0), &t.string)))
}

/// Hopping and number operators against fermion matrices built from
/// occupation bitstrings, for every chain length up to `max_sites`.
pub fn jw_oracle(max_sites: usize, mutation: Mutation) -> Result<PropertyResult> {
    let y_sign = if mutation == Mutation::JwSign { -1.0 } else { 1.0 };
    let mut worst = 0.0f64;
    for sites in 2..=max_sites {
        let n = 2 * sites;
        let c: Vec<CMat> = (0..n).map(|k| fermion_annihilator(k, n)).collect();
        for spin in Spin::BOTH {
            for p in 0..sites {
                let a = mode_index(p, spin, sites);
                let num = &c[a].adjoint() * &c[a];
                worst = worst.max(max_abs_diff(&dense_terms(n, &jordan_wigner_number(p, spin, sites)?), &num));
                for q in p + 1..sites {
                    let b = mode_index(q, spin, sites);
                    let hop = &c[a].adjoint() * &c[b] + &c[b].adjoint() * &c[a];
                    let jw = dense_terms(n, &hopping_with_sign(p, q, spin, sites, y_sign)?);
                    worst = worst.max(max_abs_diff(&jw, &hop));
                }
            }
        }
    }
    Ok(PropertyResult::within(
        "jw_fermion_oracle",
        worst,
        1e-12,
        format!("L <= {max_sites}, mutation {mutation:?}"),
    ))
}

/// Coefficient-based `||H||_F` against the dense Frobenius norm.
pub fn frobenius_identity(max_sites: usize) -> Result<PropertyResult> {
    let mut worst = 0.0f64;
    for sites in (2..=max_sites).step_by(2) {
        let hubbard = build_hubbard_h1(&HubbardParams::half_filling(sites, 1.0, 0.1, 4.0))?;
        let xxz = build_xxz(&XxzParams { sites: 2 * sites, u: 4.0, h: 0.1 })?;
        for h in [hubbard, xxz] {
            let dense = frobenius(&h.to_dense());
            worst = worst.max((h.frobenius_norm() - dense).abs() / dense);
        }
    }
    Ok(PropertyResult::within(
        "frobenius_identity",
        worst,
        1e-10,
        "relative difference, hubbard and xxz",
    ))
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, dim: usize) -> CMat {
    CMat::from_fn(dim, dim, |_, _| {
        c64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

fn lemma_draws(rng: &mut ChaCha8Rng, draws: usize) -> Result<PropertyResult> {
    let mut failures = 0usize;
    for _ in 0..draws {
        let dim = 1usize << rng.random_range(1..=4);
        let g = gaussian_matrix(rng, dim);
        let o = (&g + g.adjoint()) * faer::Scale(c64::new(0.5, 0.0));
        let mut psi: Vec<c64> = (0..dim)
            .map(|_| c64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm = crate::linalg::vec_norm(&psi);
        psi.iter_mut().for_each(|z| *z /= norm);
        if !lemma_a_check(&o, &psi)?.pass {
            failures += 1;
        }
    }
    Ok(PropertyResult::within(
        "lemma_a_inequality",
        failures as f64,
        0.0,
        format!("{draws} random Hermitian draws"),
    ))
}

fn commutator_draws(rng: &mut ChaCha8Rng, draws: usize) -> Result<PropertyResult> {
    let mut failures = 0usize;
    for _ in 0..draws {
        let dim = rng.random_range(1..=8);
        let a = gaussian_matrix(rng, dim);
        let b = gaussian_matrix(rng, dim);
        if !commutator_frobenius_check(&a, &b)?.pass {
            failures += 1;
        }
    }
    Ok(PropertyResult::within(
        "commutator_frobenius_inequality",
        failures as f64,
        0.0,
        format!("{draws} random draws"),
    ))
}

fn delay_index_draws(rng: &mut ChaCha8Rng, draws: usize) -> Result<PropertyResult> {
    let mut mismatches = 0usize;
    for _ in 0..draws {
        let params = EmbeddingParams::new(
            rng.random_range(1..=12),
            rng.random_range(1..=6),
            rng.random_range(1..=6),
        )?;
        let m = params.min_window() + rng.random_range(0..40);
        let row: Vec<c64> = (0..m).map(|k| c64::new(k as f64, -(k as f64))).collect();
        let (x1, x2) = build_delay_matrices(&row, params, m)?;
        let n_l = (m - params.n_s - params.tau) / params.n_g + 1;
        if x1.nrows() != params.n_s || x1.ncols() != n_l || x2.ncols() != n_l {
            mismatches += 1;
            continue;
        }
        for l in 0..n_l {
            for i in 0..params.n_s {
                if x1[(i, l)] != row[l * params.n_g + i] || x2[(i, l)] != row[l * params.n_g + i + params.tau] {
                    mismatches += 1;
                }
            }
        }
    }
    Ok(PropertyResult::within(
        "delay_matrix_indexing",
        mismatches as f64,
        0.0,
        format!("{draws} random (n_s, n_g, tau, m) draws"),
    ))
}

fn order_one_embedding() -> Result<PropertyResult> {
    let row: Vec<c64> = (0..60)
        .map(|n| c64::new(0.97f64.powi(n) * (0.3 * n as f64).cos() + 0.1, 0.0))
        .collect();
    let series = crate::observables::SnapshotSeries::from_rows(0.05, vec!["s".into()], vec![row.clone()])?;
    let params = EmbeddingParams::new(1, 1, 1)?;
    let model = fit_ihodmd(&series, 60, params, DmdOptions::default())?;
    let (data, _, _) = embedded_data(&row, params, 60, 0.05)?
        .ok_or_else(|| crate::Error::Inconsistent("test row is constant".into()))?;
    let scalar = fit_dmd(&data, RankPolicy::default())?;
    let inner = model
        .model_for_row(0)
        .ok_or_else(|| crate::Error::Inconsistent("order-one row not fitted".into()))?;
    let diff = inner
        .eigenvalues()
        .iter()
        .zip(scalar.eigenvalues())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    Ok(PropertyResult::within(
        "ihodmd_order_one_is_scalar_dmd",
        diff,
        1e-12,
        "eigenvalue agreement",
    ))
}

/// `x_{n+1} = A x_n` with `A = S diag(lambda) S^-1`, rank-4 excitation in 8
/// dimensions; returns the worst eigenvalue error over a known spectrum.
fn synthetic_dmd(rng: &mut ChaCha8Rng) -> Result<PropertyResult> {
    let lambdas = [
        c64::from_polar(0.99, 0.3),
        c64::from_polar(0.99, -0.3),
        c64::from_polar(0.95, 1.1),
        c64::new(0.9, 0.0),
    ];
    let basis = CMat::from_fn(8, 4, |_, _| c64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let snapshots = CMat::from_fn(8, 50, |i, n| {
        (0..4).map(|k| basis[(i, k)] * lambdas[k].powi(n as i32)).sum()
    });
    let model = fit_dmd(&DataMatrices::from_snapshots(&snapshots, 1.0)?, RankPolicy::default())?;
    let worst = lambdas
        .iter()
        .map(|l| {
            model
                .eigenvalues()
                .iter()
                .map(|m| (m - l).norm())
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    let extra = if model.rank() == 4 { 0.0 } else { f64::INFINITY };
    Ok(PropertyResult::within(
        "synthetic_dmd_exactness",
        worst + extra,
        1e-8,
        format!("rank {} fit of a rank-4 linear system", model.rank()),
    ))
}
