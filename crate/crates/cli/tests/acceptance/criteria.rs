use std::f64::consts::PI;
use std::time::{Duration, Instant};

use temporal_cert::certify::{channel_sweep, GridSpec};
use temporal_cert::matrixcore::{frobenius_distance, min_eigenvalue, CMatrix, SymMatrix};
use temporal_cert::ncycle::{
    build, certificate_bundle, nondegeneracy_nullspace, robustness_experiment,
    t_spectrum_numeric, uniqueness_report,
};
use temporal_cert::qsim::{
    causality_monotone, isometry_residual, lemma1_residual, pauli_channel, pdm_two_events,
    seq_corr_simple, state_independence_spread, BlochObservable, DensityMatrix, KrausChannel,
    PauliChannelParams,
};
use temporal_cert::sdpsolve::{solve, DEFAULT_MAX_ITER, DEFAULT_TOL};

use crate::Criterion;

const SIZES: std::ops::RangeInclusive<usize> = 3..=12;
const SEED: u64 = 7;

fn quantum(n: usize) -> f64 {
    n as f64 * (PI / n as f64).cos()
}

/// `cos((i − j)π/n)`.
fn closed_form_optimizer(n: usize) -> SymMatrix {
    SymMatrix::from_fn(n, |i, j| ((i as f64 - j as f64) * PI / n as f64).cos()).unwrap()
}

#[test]
fn criterion_01_quantum_bound() {
    let mut c = Criterion::new(1, "quantum bound N·cos(π/N) for N = 3..12, each solve < 1 s");
    for n in SIZES {
        let problem = build(n).unwrap().problem();
        let start = Instant::now();
        let sol = solve(&problem, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        let elapsed = start.elapsed();
        let err = (sol.primal_value - quantum(n)).abs();
        c.check(
            err <= 1e-6 && elapsed < Duration::from_secs(1),
            format!("N={n}: |value − bound| = {err:.2e}, {elapsed:.2?}"),
        );
        c.cli(&["bound", "--n", &n.to_string()]);
    }
    c.finish();
}

#[test]
fn criterion_02_dual_certificate() {
    let mut c = Criterion::new(2, "dual certificate W_N: PSD, trace, complementary slackness");
    for n in SIZES {
        let b = certificate_bundle(n).unwrap();
        let min_eig = min_eigenvalue(&b.w).unwrap();
        let trace = b.w.diagonal().iter().sum::<f64>();
        let slack = closed_form_optimizer(n).inner(&b.w);
        c.check(
            min_eig >= -1e-9 && (trace - quantum(n)).abs() <= 1e-10 && slack <= 1e-9,
            format!("N={n}: λmin {min_eig:.2e}, trace error {:.2e}, ⟨X,W⟩ {slack:.2e}", (trace - quantum(n)).abs()),
        );
        c.cli(&["certificate", "--n", &n.to_string()]);
    }
    c.finish();
}

#[test]
fn criterion_03_spectrum_identity() {
    let mut c = Criterion::new(3, "spectrum of T_N equals {−2cos((2m+1)π/N)} for N = 3..20");
    for n in 3..=20 {
        let mut analytic: Vec<f64> = (0..n)
            .map(|m| -2.0 * ((2 * m + 1) as f64 * PI / n as f64).cos())
            .collect();
        analytic.sort_by(f64::total_cmp);
        let numeric = t_spectrum_numeric(n).unwrap();
        let err = analytic
            .iter()
            .zip(&numeric)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let has_two = n % 2 == 0 || numeric.iter().any(|&l| (l - 2.0).abs() <= 1e-8);
        c.check(
            numeric.len() == n && err <= 1e-8 && has_two,
            format!("N={n}: max deviation {err:.2e}{}", if n % 2 == 1 { ", λ = 2 present" } else { "" }),
        );
    }
    c.finish();
}

#[test]
fn criterion_04_uniqueness() {
    let mut c = Criterion::new(4, "nondegeneracy nullspace 0 and solver optimum at X_opt");
    for n in SIZES {
        let dim = nondegeneracy_nullspace(n).unwrap();
        let sol = solve(&build(n).unwrap().problem(), DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        let dist = frobenius_distance(&sol.primal, &closed_form_optimizer(n)).unwrap();
        let report = uniqueness_report(n, DEFAULT_TOL).unwrap();
        c.check(
            dim == 0 && dist <= 1e-4 && report.passed,
            format!("N={n}: nullspace {dim}, ‖X − X_opt‖_F = {dist:.2e}"),
        );
        c.cli(&["uniqueness", "--n", &n.to_string()]);
    }
    c.finish();
}

#[test]
fn criterion_05_robustness() {
    let mut c = Criterion::new(5, "robustness log-log exponent in [0.8, 1.2], seed 7, 20 trials");
    for n in [3, 5, 8] {
        let curve = robustness_experiment(n, &[1e-2, 1e-3, 1e-4], 20, SEED).unwrap();
        let e = curve.loglog_exponent;
        c.check(
            e.is_some_and(|e| (0.8..=1.2).contains(&e)),
            format!("N={n}: exponent {}", e.map_or("undefined".into(), |e| format!("{e:.4}"))),
        );
        c.cli(&["robustness", "--n", &n.to_string(), "--trials", "20", "--seed", "7"]);
    }
    c.finish();
}

fn r_ex() -> CMatrix {
    let mut m = CMatrix::zeros(4);
    m[(0, 0)] = 1.0.into();
    m[(1, 2)] = 0.5.into();
    m[(2, 1)] = 0.5.into();
    m
}

#[test]
fn criterion_06_pdm_regression() {
    let mut c = Criterion::new(6, "two-event PDM of |0⟩⟨0| under identity equals R_ex");
    let r = pdm_two_events(&DensityMatrix::zero(), &KrausChannel::identity());
    let diff = r.matrix().as_cmatrix().max_abs_diff(&r_ex());
    c.check(diff <= 1e-12, format!("entrywise deviation {diff:.2e}"));
    let ev = r.eigenvalues().unwrap();
    let ev_err = ev
        .iter()
        .zip([-0.5, 0.0, 0.5, 1.0])
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    c.check(ev.len() == 4 && ev_err <= 1e-12, format!("eigenvalues {ev:?}"));
    let f = causality_monotone(&r).unwrap();
    c.check((f - 1.0).abs() <= 1e-12, format!("f_tr = {f}"));
    c.cli(&["pdm", "--example", "rex"]);
    c.finish();
}

#[test]
fn criterion_07_lemma1() {
    let mut c = Criterion::new(7, "PDM correlation equals sequential correlation, 200 scenarios");
    let r = lemma1_residual(SEED, 200);
    c.check(
        r.scenarios == 200 && r.max_residual <= 1e-10,
        format!("max residual {:.2e} over {} scenarios", r.max_residual, r.scenarios),
    );
    c.cli(&["lemma1", "--seed", "7", "--count", "200"]);
    c.finish();
}

#[test]
fn criterion_08_isometry_in_time() {
    let mut c = Criterion::new(8, "isometry in time, 100 scenarios");
    let r = isometry_residual(SEED, 100);
    c.check(
        r.scenarios == 100 && r.max_residual <= 1e-10,
        format!("max residual {:.2e} over {} scenarios", r.max_residual, r.scenarios),
    );
    c.cli(&["isometry", "--seed", "7", "--count", "100"]);
    c.finish();
}

#[test]
fn criterion_09_channel_sweep() {
    let mut c = Criterion::new(9, "S3 sweep on 33x17 grid");
    let start = Instant::now();
    let s = channel_sweep(GridSpec::new(33, 17).unwrap()).unwrap();
    let elapsed = start.elapsed();
    c.check(
        (s.global_max - 1.5).abs() <= 1e-6,
        format!("global maximum {:.10} (want 1.5)", s.global_max),
    );
    c.check(
        s.flagged_off_corner.is_empty() && s.maximizers_off_corner.is_empty(),
        format!(
            "{} grid points reach 1.5, {} of them farther than one cell from a corner",
            s.flagged.len(),
            s.flagged_off_corner.len()
        ),
    );
    for k in &s.corners {
        c.check(
            k.kraus_rank == 1 && k.rank_one,
            format!("corner ({:.4}, {:.4}): Kraus norms {:?}", k.u, k.v, k.kraus_norms),
        );
    }
    for m in &s.mixtures {
        c.check(
            m.s3_max < 1.5 - 0.01,
            format!(
                "50/50 mixture of ({:.4}, {:.4}) and ({:.4}, {:.4}): S3 {:.6}",
                m.first.0, m.first.1, m.second.0, m.second.1, m.s3_max
            ),
        );
    }
    c.check(elapsed < Duration::from_secs(60), format!("library sweep took {elapsed:.2?}"));
    let start = Instant::now();
    c.cli(&["sweep", "--grid", "33x17"]);
    let elapsed = start.elapsed();
    c.check(elapsed < Duration::from_secs(60), format!("binary sweep took {elapsed:.2?}"));
    c.finish();
}

/// `¼(I + a·XX + b·YY + c·ZZ)` written out entrywise.
fn pseudo_bell_literal(a: f64, b: f64, cz: f64) -> CMatrix {
    let mut m = CMatrix::zeros(4);
    m[(0, 0)] = (0.25 * (1.0 + cz)).into();
    m[(3, 3)] = (0.25 * (1.0 + cz)).into();
    m[(1, 1)] = (0.25 * (1.0 - cz)).into();
    m[(2, 2)] = (0.25 * (1.0 - cz)).into();
    m[(0, 3)] = (0.25 * (a - b)).into();
    m[(3, 0)] = (0.25 * (a - b)).into();
    m[(1, 2)] = (0.25 * (a + b)).into();
    m[(2, 1)] = (0.25 * (a + b)).into();
    m
}

#[test]
fn criterion_10_pseudo_bell() {
    let mut c = Criterion::new(10, "corner-channel PDMs at I/2 equal R^(1..4)");
    let corners = [
        (0.0, 0.0, [1.0, 1.0, 1.0]),
        (0.0, PI, [1.0, -1.0, -1.0]),
        (PI, 0.0, [-1.0, 1.0, -1.0]),
        (PI, PI, [-1.0, -1.0, 1.0]),
    ];
    for (k, (u, v, [a, b, z])) in corners.into_iter().enumerate() {
        let ch = pauli_channel(PauliChannelParams::new(u, v).unwrap());
        let r = pdm_two_events(&DensityMatrix::maximally_mixed(), &ch);
        let diff = r.matrix().as_cmatrix().max_abs_diff(&pseudo_bell_literal(a, b, z));
        c.check(diff <= 1e-12, format!("(u, v) = ({u:.4}, {v:.4}) vs R^({}): deviation {diff:.2e}", k + 1));
        c.cli(&["pdm", "--example", &format!("bell{}", k + 1)]);
    }
    c.finish();
}

#[test]
fn criterion_11_state_independence() {
    let mut c = Criterion::new(11, "sequential correlation independent of the state");
    let pairs = [
        ([0.0, 0.0, 1.0], [1.0, 0.0, 0.0]),
        ([1.0, 1.0, 1.0], [0.0, 0.0, 1.0]),
        ([0.3, -0.8, 0.2], [-0.5, 0.1, 0.9]),
    ];
    for (pa, pb) in pairs {
        let a = BlochObservable::from_direction(pa).unwrap();
        let b = BlochObservable::from_direction(pb).unwrap();
        let spread = state_independence_spread(SEED, 50, &a, &b);
        // 50 Bloch vectors on a spiral of varying radius.
        let values: Vec<f64> = (0..50)
            .map(|k| {
                let t = (k as f64 + 0.5) / 50.0;
                let (polar, azim) = ((1.0 - 2.0 * t).acos(), k as f64 * 2.399963);
                let radius = 0.2 + 0.8 * t;
                let r = [polar.sin() * azim.cos(), polar.sin() * azim.sin(), polar.cos()].map(|x| radius * x);
                seq_corr_simple(&DensityMatrix::from_bloch(r).unwrap(), &a, &b)
            })
            .collect();
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        c.check(
            spread <= 1e-12 && hi - lo <= 1e-12,
            format!("a {pa:?}, b {pb:?}: spread {spread:.2e} (seeded), {:.2e} (spiral)", hi - lo),
        );
    }
    c.finish();
}
