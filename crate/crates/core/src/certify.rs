//! Channel certification sweep over the two-Kraus Pauli family and the
//! combined certification report.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::check::Check;
use crate::error::{Error, Result};
use crate::ncycle::{self, CertificateBundle};
use crate::output::fmt_f64;
use crate::qsim::{
    isometry_residual, lemma1_residual, pauli_channel, seq_corr_channel_ops, DensityMatrix,
    KrausChannel, Pauli, PauliChannelParams, ResidualReport, KRAUS_ZERO_TOL,
};

pub const S3_BOUND: f64 = 1.5;
pub const S3_TOL: f64 = 1e-6;
pub const RESTARTS: usize = 24;
pub const ASCENT_MAX_ITER: usize = 5000;
pub const MIN_GRID: usize = 8;
/// The 50/50 corner mixtures must stay this far below [`S3_BOUND`].
pub const MIXTURE_MARGIN: f64 = 0.01;
pub const LEMMA1_SCENARIOS: usize = 200;
pub const ISOMETRY_SCENARIOS: usize = 100;
pub const RESIDUAL_TOL: f64 = 1e-10;

pub type Vec3 = [f64; 3];

/// Diagonal correlation weights `(cos u, cos v, cos(u − v))` of the Pauli
/// family at `ρ = |0⟩⟨0|`.
pub fn s3_weights(u: f64, v: f64) -> Vec3 {
    [u.cos(), v.cos(), (u - v).cos()]
}

/// `a₁ᵀMa₂ + a₂ᵀMa₃ − a₁ᵀMa₃`, where `M_kl` is the two-time correlation of
/// `σ_k` then `σ_l`.
pub fn s3_value(m: &[Vec3; 3], a: &[Vec3; 3]) -> f64 {
    bilinear(m, &a[0], &a[1]) + bilinear(m, &a[1], &a[2]) - bilinear(m, &a[0], &a[2])
}

fn bilinear(m: &[Vec3; 3], x: &Vec3, y: &Vec3) -> f64 {
    (0..3)
        .map(|k| x[k] * (0..3).map(|l| m[k][l] * y[l]).sum::<f64>())
        .sum()
}

fn mat_vec(m: &[Vec3; 3], x: &Vec3) -> Vec3 {
    [0, 1, 2].map(|k| (0..3).map(|l| m[k][l] * x[l]).sum())
}

fn mat_t_vec(m: &[Vec3; 3], x: &Vec3) -> Vec3 {
    [0, 1, 2].map(|l| (0..3).map(|k| m[k][l] * x[k]).sum())
}

fn unit_or_random(g: Vec3, rng: &mut ChaCha8Rng) -> Vec3 {
    let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 1e-14 {
        return g.map(|x| x / norm);
    }
    random_unit(rng)
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let g: Vec3 = [0; 3].map(|_| rng.sample(StandardNormal));
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            return g.map(|x| x / norm);
        }
    }
}

/// Best measurement triple found for one correlation matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct S3Optimum {
    pub value: f64,
    pub a1: Vec3,
    pub a2: Vec3,
    pub a3: Vec3,
}

/// Block coordinate ascent over unit vectors with [`RESTARTS`] random
/// starts. Each block update is the exact maximizer of a linear form.
pub fn maximize_s3(m: &[Vec3; 3], seed: u64) -> S3Optimum {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = S3Optimum {
        value: f64::NEG_INFINITY,
        a1: [0.0; 3],
        a2: [0.0; 3],
        a3: [0.0; 3],
    };
    for _ in 0..RESTARTS {
        let mut a = [random_unit(&mut rng), random_unit(&mut rng), random_unit(&mut rng)];
        let mut value = s3_value(m, &a);
        for _ in 0..ASCENT_MAX_ITER {
            let g1 = {
                let (p, q) = (mat_vec(m, &a[1]), mat_vec(m, &a[2]));
                [0, 1, 2].map(|k| p[k] - q[k])
            };
            a[0] = unit_or_random(g1, &mut rng);
            let g2 = {
                let (p, q) = (mat_t_vec(m, &a[0]), mat_vec(m, &a[2]));
                [0, 1, 2].map(|k| p[k] + q[k])
            };
            a[1] = unit_or_random(g2, &mut rng);
            let g3 = {
                let (p, q) = (mat_t_vec(m, &a[1]), mat_t_vec(m, &a[0]));
                [0, 1, 2].map(|k| p[k] - q[k])
            };
            a[2] = unit_or_random(g3, &mut rng);
            let next = s3_value(m, &a);
            let done = next - value <= 1e-15 * (1.0 + value.abs());
            value = next;
            if done {
                break;
            }
        }
        if value > best.value {
            best = S3Optimum {
                value,
                a1: a[0],
                a2: a[1],
                a3: a[2],
            };
        }
    }
    best
}

fn point_seed(u: f64, v: f64) -> u64 {
    u.to_bits() ^ v.to_bits().rotate_left(29) ^ 0x9e37_79b9_7f4a_7c15
}

/// Inner maximization for the Pauli family at `(u, v)`.
pub fn s3_inner_max(u: f64, v: f64) -> Result<S3Optimum> {
    PauliChannelParams::new(u, v)?;
    let w = s3_weights(u, v);
    let m = [[w[0], 0.0, 0.0], [0.0, w[1], 0.0], [0.0, 0.0, w[2]]];
    Ok(maximize_s3(&m, point_seed(u, v)))
}

/// Two-time Pauli correlation matrix `M_kl = ⟨σ_k σ_l⟩_seq` of a channel at
/// `ρ = |0⟩⟨0|`.
pub fn channel_correlation_matrix(ch: &KrausChannel) -> [Vec3; 3] {
    let rho = DensityMatrix::zero();
    let mut m = [[0.0; 3]; 3];
    for (k, pk) in Pauli::AXES.iter().enumerate() {
        for (l, pl) in Pauli::AXES.iter().enumerate() {
            m[k][l] = seq_corr_channel_ops(rho.matrix(), &pk.matrix(), &pl.matrix(), ch);
        }
    }
    m
}

/// Inner maximization for an arbitrary channel, through its sequential
/// correlations.
pub fn channel_s3_max(ch: &KrausChannel, seed: u64) -> S3Optimum {
    maximize_s3(&channel_correlation_matrix(ch), seed)
}

/// `W×H` sweep resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GridSpec {
    pub u: usize,
    pub v: usize,
}

impl GridSpec {
    pub fn new(u: usize, v: usize) -> Result<Self> {
        if u < MIN_GRID || v < MIN_GRID {
            return Err(Error::invalid(format!(
                "grid {u}x{v} is below the {MIN_GRID}x{MIN_GRID} minimum"
            )));
        }
        Ok(GridSpec { u, v })
    }

    pub fn du(&self) -> f64 {
        2.0 * PI / (self.u - 1) as f64
    }

    pub fn dv(&self) -> f64 {
        PI / (self.v - 1) as f64
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { u: 33, v: 17 }
    }
}

impl FromStr for GridSpec {
    type Err = Error;

    /// Parses `"WxH"`, e.g. `33x17`.
    fn from_str(s: &str) -> Result<Self> {
        let (w, h) = s
            .trim()
            .split_once(['x', 'X'])
            .ok_or_else(|| Error::invalid(format!("grid {s:?} is not of the form WxH")))?;
        let parse = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|e| Error::invalid(format!("grid dimension {t:?}: {e}")))
        };
        GridSpec::new(parse(w)?, parse(h)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub u: f64,
    pub v: f64,
    pub s3_max: f64,
    pub a1: Vec3,
    pub a2: Vec3,
    pub a3: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CornerCheck {
    pub u: f64,
    pub v: f64,
    pub s3_max: f64,
    pub kraus_norms: [f64; 2],
    pub kraus_rank: usize,
    /// One Kraus operator vanishes (norm below 1e-12).
    pub rank_one: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixtureCheck {
    pub first: (f64, f64),
    pub second: (f64, f64),
    pub s3_max: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub grid: GridSpec,
    pub points: Vec<SweepPoint>,
    pub global_max: f64,
    /// Grid points with `s3_max ≥ 1.5 − 1e-6`.
    pub flagged: Vec<(f64, f64)>,
    pub flagged_off_corner: Vec<(f64, f64)>,
    /// Grid points within 1e-6 of `global_max`.
    pub maximizers: Vec<(f64, f64)>,
    pub maximizers_off_corner: Vec<(f64, f64)>,
    /// Corners of `{0, π}²` with a maximizer within one cell diagonal.
    pub maximizing_corners: Vec<(f64, f64)>,
    pub corners: Vec<CornerCheck>,
    pub mixtures: Vec<MixtureCheck>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

/// The four corners of `{0, π}²` in the `(u, v)` domain.
pub const CORNERS: [(f64, f64); 4] = [(0.0, 0.0), (0.0, PI), (PI, 0.0), (PI, PI)];

/// Distance to the nearest corner, treating `u` as `2π`-periodic.
fn corner_distance(u: f64, v: f64, corner: (f64, f64)) -> f64 {
    let du = (u - corner.0).rem_euclid(2.0 * PI);
    let du = du.min(2.0 * PI - du);
    (du * du + (v - corner.1).powi(2)).sqrt()
}

fn near_corner(u: f64, v: f64, radius: f64) -> bool {
    CORNERS
        .iter()
        .any(|&c| corner_distance(u, v, c) <= radius + 1e-12)
}

fn corner_check(u: f64, v: f64) -> Result<CornerCheck> {
    let ch = pauli_channel(PauliChannelParams::new(u, v)?);
    let norms = ch.kraus_norms();
    Ok(CornerCheck {
        u,
        v,
        s3_max: s3_inner_max(u, v)?.value,
        kraus_norms: [norms[0], norms[1]],
        kraus_rank: ch.kraus_rank(1e-9)?,
        rank_one: norms.iter().any(|&k| k < KRAUS_ZERO_TOL),
    })
}

fn mixture_checks() -> Result<Vec<MixtureCheck>> {
    let mut out = Vec::new();
    for i in 0..CORNERS.len() {
        for j in (i + 1)..CORNERS.len() {
            let (a, b) = (CORNERS[i], CORNERS[j]);
            let ca = pauli_channel(PauliChannelParams::new(a.0, a.1)?);
            let cb = pauli_channel(PauliChannelParams::new(b.0, b.1)?);
            let mix = KrausChannel::mixture(&ca, 0.5, &cb)?;
            out.push(MixtureCheck {
                first: a,
                second: b,
                s3_max: channel_s3_max(&mix, (i * 4 + j) as u64).value,
            });
        }
    }
    Ok(out)
}

/// Evaluates [`s3_inner_max`] on a `grid.u × grid.v` lattice over
/// `[0, 2π] × [0, π]`, `u` outer and `v` inner.
pub fn channel_sweep(grid: GridSpec) -> Result<SweepResult> {
    let grid = GridSpec::new(grid.u, grid.v)?;
    let (du, dv) = (grid.du(), grid.dv());
    let cells: Vec<(f64, f64)> = (0..grid.u)
        .flat_map(|i| (0..grid.v).map(move |j| (i as f64 * du, j as f64 * dv)))
        .collect();
    let points = cells
        .par_iter()
        .map(|&(u, v)| {
            let o = s3_inner_max(u, v)?;
            Ok(SweepPoint {
                u,
                v,
                s3_max: o.value,
                a1: o.a1,
                a2: o.a2,
                a3: o.a3,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let radius = du.hypot(dv);
    let global_max = points
        .iter()
        .map(|p| p.s3_max)
        .fold(f64::NEG_INFINITY, f64::max);
    let select = |pred: &dyn Fn(&SweepPoint) -> bool| -> Vec<(f64, f64)> {
        points.iter().filter(|p| pred(p)).map(|p| (p.u, p.v)).collect()
    };
    let flagged = select(&|p| p.s3_max >= S3_BOUND - S3_TOL);
    let maximizers = select(&|p| p.s3_max >= global_max - S3_TOL);
    let off = |set: &[(f64, f64)]| -> Vec<(f64, f64)> {
        set.iter()
            .copied()
            .filter(|&(u, v)| !near_corner(u, v, radius))
            .collect()
    };
    let maximizing_corners = CORNERS
        .iter()
        .copied()
        .filter(|&c| {
            maximizers
                .iter()
                .any(|&(u, v)| corner_distance(u, v, c) <= radius + 1e-12)
        })
        .collect();

    let mut result = SweepResult {
        grid,
        flagged_off_corner: off(&flagged),
        maximizers_off_corner: off(&maximizers),
        flagged,
        maximizers,
        maximizing_corners,
        corners: CORNERS
            .iter()
            .map(|&(u, v)| corner_check(u, v))
            .collect::<Result<_>>()?,
        mixtures: mixture_checks()?,
        points,
        global_max,
        checks: Vec::new(),
        passed: false,
    };
    result.checks = sweep_checks(&result);
    result.passed = result.checks.iter().all(|c| c.passed);
    Ok(result)
}

impl SweepResult {
    /// One row per grid point: `u, v, s3_max, a1x..a3z`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("u,v,s3_max,a1x,a1y,a1z,a2x,a2y,a2z,a3x,a3y,a3z\n");
        for p in &self.points {
            let fields: Vec<String> = [p.u, p.v, p.s3_max]
                .iter()
                .chain(&p.a1)
                .chain(&p.a2)
                .chain(&p.a3)
                .map(|&x| fmt_f64(x))
                .collect();
            let _ = writeln!(out, "{}", fields.join(","));
        }
        out
    }

    pub fn max_mixture(&self) -> f64 {
        self.mixtures
            .iter()
            .map(|m| m.s3_max)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificationReport {
    pub n: usize,
    pub seed: u64,
    pub ncycle_bundle: CertificateBundle,
    pub sweep: SweepResult,
    pub lemma1: ResidualReport,
    pub isometry: ResidualReport,
    pub checks: Vec<Check>,
    /// Verdict per component, keyed by the check-name prefix.
    pub components: BTreeMap<String, bool>,
    pub verdict: bool,
}

impl CertificationReport {
    pub fn failing_checks(&self) -> Vec<&str> {
        crate::check::failing(&self.checks)
    }
}

/// Deliberate corruption used to show that the report can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Negate the `(1, N)` corner of `W_N`.
    FlipDualCorner,
}

pub fn full_report(n: usize, grid: GridSpec, seed: u64) -> Result<CertificationReport> {
    full_report_with(n, grid, seed, None)
}

pub fn full_report_with(
    n: usize,
    grid: GridSpec,
    seed: u64,
    fault: Option<Fault>,
) -> Result<CertificationReport> {
    let bundle = bundle_with(n, fault).map_err(|e| e.in_component("ncycle"))?;
    let sweep = channel_sweep(grid).map_err(|e| e.in_component("certify.sweep"))?;
    let lemma1 = lemma1_residual(seed, LEMMA1_SCENARIOS);
    let isometry = isometry_residual(seed, ISOMETRY_SCENARIOS);

    let mut checks: Vec<Check> = Vec::new();
    checks.push(Check::new(
        "ncycle.certificate",
        bundle.passed,
        format!("n = {n}, objective {}", bundle.objective),
    ));
    checks.extend(bundle.failures.iter().map(|f| {
        let name = f.split(':').next().unwrap_or(f);
        Check::new(&format!("ncycle.{name}"), false, f.clone())
    }));
    checks.extend(sweep.checks.iter().cloned());
    checks.push(Check::new(
        "qsim.lemma1_residual",
        lemma1.max_residual <= RESIDUAL_TOL,
        format!("{} over {} scenarios", lemma1.max_residual, lemma1.scenarios),
    ));
    checks.push(Check::new(
        "qsim.isometry_residual",
        isometry.max_residual <= RESIDUAL_TOL,
        format!("{} over {} scenarios", isometry.max_residual, isometry.scenarios),
    ));

    let mut components = BTreeMap::new();
    for c in &checks {
        let key = c.name.split('.').next().unwrap_or(&c.name).to_string();
        *components.entry(key).or_insert(true) &= c.passed;
    }
    let verdict = checks.iter().all(|c| c.passed);
    Ok(CertificationReport {
        n,
        seed,
        ncycle_bundle: bundle,
        sweep,
        lemma1,
        isometry,
        checks,
        components,
        verdict,
    })
}

/// Sweep claims, each at its stated tolerance.
pub fn sweep_checks(sweep: &SweepResult) -> Vec<Check> {
    let identity_corner = sweep
        .corners
        .iter()
        .find(|c| c.u == 0.0 && c.v == 0.0)
        .map_or(f64::NAN, |c| c.s3_max);
    vec![
        Check::new(
            "sweep.global_max_equals_bound",
            (sweep.global_max - S3_BOUND).abs() <= S3_TOL,
            format!("global max {} vs {S3_BOUND}", sweep.global_max),
        ),
        Check::new(
            "sweep.flagged_at_corners",
            sweep.flagged_off_corner.is_empty(),
            format!(
                "{} points at or above {S3_BOUND}, {} away from corners",
                sweep.flagged.len(),
                sweep.flagged_off_corner.len()
            ),
        ),
        Check::new(
            "sweep.maximizers_at_corners",
            sweep.maximizers_off_corner.is_empty() && !sweep.maximizers.is_empty(),
            format!(
                "{} maximizers, {} away from corners",
                sweep.maximizers.len(),
                sweep.maximizers_off_corner.len()
            ),
        ),
        Check::new(
            "sweep.identity_corner_max",
            (identity_corner - S3_BOUND).abs() <= S3_TOL,
            format!("S3 at (0, 0) = {identity_corner}"),
        ),
        Check::new(
            "sweep.corner_kraus_rank_one",
            sweep.corners.iter().all(|c| c.rank_one && c.kraus_rank == 1),
            format!(
                "Kraus ranks {:?}",
                sweep.corners.iter().map(|c| c.kraus_rank).collect::<Vec<_>>()
            ),
        ),
        Check::new(
            "sweep.mixture_below_bound",
            sweep.max_mixture() < S3_BOUND - MIXTURE_MARGIN,
            format!("largest 50/50 corner mixture value {}", sweep.max_mixture()),
        ),
    ]
}

fn bundle_with(n: usize, fault: Option<Fault>) -> Result<CertificateBundle> {
    match fault {
        None => ncycle::certificate_bundle(n),
        Some(Fault::FlipDualCorner) => {
            let (w, t) = ncycle::dual_certificate(n)?;
            let mut m = w.as_mat().clone();
            m[(0, n - 1)] = -m[(0, n - 1)];
            m[(n - 1, 0)] = -m[(n - 1, 0)];
            let w = crate::matrixcore::SymMatrix::from_mat(m)?;
            CertificateBundle::assemble(n, ncycle::analytic_optimizer(n)?, w, t)
        }
    }
}
