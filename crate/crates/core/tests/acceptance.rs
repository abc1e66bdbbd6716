use std::path::PathBuf;
use std::sync::OnceLock;
use std::time::Instant;

use quench_dmd::analysis::SweepPoint;
use quench_dmd::dmd::{fit_dmd, DataMatrices, RankPolicy};
use quench_dmd::experiment::{bound_reports, extrapolate, simulate, sweep, ExperimentConfig, Extrapolation};
use quench_dmd::lattice::{build_hubbard_h1, HubbardParams};
use quench_dmd::linalg::{c64, CMat};
use quench_dmd::observables::SnapshotSeries;
use quench_dmd::state::{exact_evolve, prepare_hubbard_ground_state, trotter_step, TrotterPlan};
use quench_dmd::verify::{jw_oracle, run_suite, Mutation, VerifySettings};

fn report(criterion: u32, pass: bool, detail: String) {
    println!("{} criterion {criterion}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {criterion} failed: {detail}");
}

fn config(name: &str) -> ExperimentConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../experiments").join(name);
    ExperimentConfig::load(path).unwrap()
}

struct Run {
    cfg: ExperimentConfig,
    truth: SnapshotSeries,
}

fn cached(cell: &'static OnceLock<Run>, name: &str) -> &'static Run {
    cell.get_or_init(|| {
        let cfg = config(name);
        let truth = simulate(&cfg).unwrap().series;
        Run { cfg, truth }
    })
}

static HUBBARD_U4: OnceLock<Run> = OnceLock::new();
static HUBBARD_U8: OnceLock<Run> = OnceLock::new();
static RHO_U4: OnceLock<Run> = OnceLock::new();
static XXZ_L6: OnceLock<Run> = OnceLock::new();
static XXZ_L12: OnceLock<Run> = OnceLock::new();
static XXZ_L6_SWEEP: OnceLock<Run> = OnceLock::new();
static XXZ_L12_SWEEP: OnceLock<Run> = OnceLock::new();

fn hubbard_u4() -> &'static Run {
    cached(&HUBBARD_U4, "hubbard_u4_nk.toml")
}

fn hubbard_u8() -> &'static Run {
    cached(&HUBBARD_U8, "hubbard_u8_nk.toml")
}

fn xxz_l6() -> &'static Run {
    cached(&XXZ_L6, "xxz_l6.toml")
}

fn xxz_l12() -> &'static Run {
    cached(&XXZ_L12, "xxz_l12.toml")
}

fn fit(run: &Run) -> Extrapolation {
    extrapolate(&run.cfg, &run.truth).unwrap()
}

/// Envelope over `[t_min, 10]` and the final-time gate for the Hubbard runs.
fn hubbard_gates(criterion: u32, run: &Run) {
    let mut cfg = run.cfg.clone();
    cfg.fit.t_min = Some(4.0);
    let ex = extrapolate(&cfg, &run.truth).unwrap();
    let env = &ex.envelope;
    let last = ex.final_error();
    let pass = env.pass && env.c.is_finite() && last <= 1e-2;
    report(
        criterion,
        pass,
        format!(
            "{}: C={:.3e}, tail slope={:?}, envelope {}, |err(10)|={last:.3e} (gate 1e-2)",
            cfg.name,
            env.c,
            env.tail_slope,
            if env.pass { "holds" } else { "violated" }
        ),
    );
}

#[test]
fn criterion_1_trotter_first_order() {
    let start = Instant::now();
    let params = HubbardParams::half_filling(2, 1.0, 0.1, 4.0);
    let h = build_hubbard_h1(&params).unwrap();
    let psi0 = prepare_hubbard_ground_state(&params).unwrap().state;
    let exact = exact_evolve(&psi0, &h, 1.0).unwrap();
    let error = |dt: f64| {
        let plan = TrotterPlan::new(h.clone(), dt).unwrap();
        let mut psi = psi0.clone();
        for _ in 0..(1.0 / dt).round() as usize {
            trotter_step(&mut psi, &plan).unwrap();
        }
        psi.distance(&exact)
    };
    let ratio = error(0.01) / error(0.005);
    let elapsed = start.elapsed().as_secs_f64();
    report(
        1,
        (1.6..=2.4).contains(&ratio) && elapsed < 1.0,
        format!("error ratio {ratio:.4} in [1.6, 2.4], runtime {elapsed:.3}s"),
    );
}

#[test]
fn criterion_2_dmd_exactness() {
    let start = Instant::now();
    let lambdas = [
        c64::from_polar(0.99, 0.4),
        c64::from_polar(0.99, -0.4),
        c64::from_polar(0.97, 1.3),
        c64::new(0.93, 0.0),
    ];
    let coeff = |i: usize, k: usize| c64::new(((3 * i + 5 * k) % 7) as f64 - 3.0, ((i * k) % 4) as f64 * 0.5 + 0.2);
    let truth = |i: usize, n: usize| -> c64 { (0..4).map(|k| coeff(i, k) * lambdas[k].powi(n as i32)).sum() };
    let x = CMat::from_fn(8, 50, |i, n| truth(i, n));
    let model = fit_dmd(&DataMatrices::from_snapshots(&x, 1.0).unwrap(), RankPolicy::default()).unwrap();
    let eig_err = lambdas
        .iter()
        .map(|l| model.eigenvalues().iter().map(|m| (m - l).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    let mut rel = 0.0f64;
    for n in 0..100 {
        let p = model.predict_discrete(n);
        let num: f64 = (0..8).map(|i| (p[i] - truth(i, n)).norm_sqr()).sum::<f64>().sqrt();
        let den: f64 = (0..8).map(|i| truth(i, n).norm_sqr()).sum::<f64>().sqrt();
        rel = rel.max(num / den);
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        2,
        model.rank() == 4 && eig_err <= 1e-8 && rel <= 1e-6 && elapsed < 1.0,
        format!("rank {}, eigenvalue error {eig_err:.2e}, 2x horizon relative error {rel:.2e}, runtime {elapsed:.3}s", model.rank()),
    );
}

#[test]
fn criterion_3_hubbard_u4_momentum() {
    hubbard_gates(3, hubbard_u4());
}

#[test]
fn criterion_4_hubbard_u8_momentum() {
    hubbard_gates(4, hubbard_u8());
}

#[test]
fn criterion_5_xxz_envelopes() {
    let mut lines = Vec::new();
    let mut pass = true;
    for run in [xxz_l6(), xxz_l12()] {
        let ex = fit(run);
        pass &= ex.envelope.pass && ex.envelope.c.is_finite();
        lines.push(format!(
            "{}: C={:.3e}, tail slope={:?} over t>={}",
            run.cfg.name, ex.envelope.c, ex.envelope.tail_slope, ex.envelope.t_min
        ));
    }
    report(5, pass, lines.join("; "));
}

fn sweep_errors(run: &Run) -> Vec<SweepPoint> {
    let m = &run.cfg.sweep.as_ref().expect("sweep config").m;
    sweep(&run.cfg, &run.truth, m).unwrap()
}

fn values(points: &[SweepPoint]) -> Vec<f64> {
    points.iter().map(|p| p.error_at_end.expect("feasible window")).collect()
}

#[test]
fn criterion_6_error_vs_m_shape() {
    let run = cached(&RHO_U4, "hubbard_u4_rho_sweep.toml");
    let points = sweep_errors(run);
    let errs = values(&points);
    let first = errs[0];
    let last = *errs.last().unwrap();
    // plateau: the windows in the upper half of the sweep
    let tail = &errs[errs.len() / 2..];
    let hi = tail.iter().cloned().fold(0.0, f64::max);
    let lo = tail.iter().cloned().fold(f64::INFINITY, f64::min);
    let table: Vec<String> = points.iter().zip(&errs).map(|(p, e)| format!("m={}:{e:.2e}", p.m)).collect();
    report(
        6,
        last <= first && hi <= 10.0 * lo,
        format!("{}; tail spread {:.2}x", table.join(" "), hi / lo),
    );
}

fn median_of_largest_three(points: &[SweepPoint]) -> f64 {
    let mut sorted: Vec<&SweepPoint> = points.iter().collect();
    sorted.sort_by_key(|p| p.m);
    let mut top: Vec<f64> = values(&sorted.into_iter().rev().take(3).cloned().collect::<Vec<_>>());
    top.sort_by(|a, b| a.partial_cmp(b).unwrap());
    top[1]
}

#[test]
fn criterion_7_spatial_resolution() {
    let l6 = median_of_largest_three(&sweep_errors(cached(&XXZ_L6_SWEEP, "xxz_l6_sweep.toml")));
    let l12 = median_of_largest_three(&sweep_errors(cached(&XXZ_L12_SWEEP, "xxz_l12_sweep.toml")));
    report(
        7,
        l12 <= l6,
        format!("plateau L=12 {l12:.3e} vs L=6 {l6:.3e}"),
    );
}

#[test]
fn criterion_8_property_suites() {
    let report_ = run_suite(&VerifySettings::default()).unwrap();
    let failed: Vec<String> = report_.failures().iter().map(|p| p.name.clone()).collect();
    let control = jw_oracle(4, Mutation::JwSign).unwrap();
    let summary: Vec<String> = report_
        .properties
        .iter()
        .map(|p| format!("{}={:.1e}", p.name, p.metric))
        .collect();
    report(
        8,
        report_.pass && !control.pass,
        format!(
            "{} properties, failures {failed:?}, negative control detected={}; {}",
            report_.properties.len(),
            !control.pass,
            summary.join(" ")
        ),
    );
}

#[test]
fn criterion_9_bound_dominance() {
    let mut lines = Vec::new();
    let mut pass = true;
    for run in [hubbard_u4(), hubbard_u8(), xxz_l6(), xxz_l12()] {
        let ex = fit(run);
        for r in bound_reports(&run.cfg, &run.truth, &ex).unwrap() {
            pass &= r.dominated && !r.steps.is_empty();
            lines.push(format!(
                "{} {}: {} steps, min bound/error {:.2e}",
                run.cfg.name,
                r.label,
                r.steps.len(),
                r.min_ratio.unwrap_or(f64::INFINITY)
            ));
        }
    }
    report(9, pass, lines.join("; "));
}
