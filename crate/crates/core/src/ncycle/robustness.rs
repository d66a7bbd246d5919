use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::{analytic_optimizer, build, NCycleInequality};
use crate::check::Check;
use crate::error::{Error, Result};
use crate::matrixcore::{clip_to_psd, frobenius_distance, Mat, Spectrum, SymMatrix};

/// Accepted relative miss on the target deficit.
pub const DEFICIT_BAND: f64 = 0.05;
pub const BISECTION_CAP: usize = 200;
/// Largest step along a unit direction tried while bracketing.
pub const MAX_STEP: f64 = 16.0;
/// Accepted range of the log-log exponent of distance against deficit.
pub const EXPONENT_RANGE: (f64, f64) = (0.8, 1.2);
/// Every distance must lie below `ENVELOPE_FACTOR · slope_t · ε`, with
/// `slope_t` fitted along the sample's own trial direction.
pub const ENVELOPE_FACTOR: f64 = 1.2;
pub const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RobustnessSample {
    pub trial: usize,
    pub epsilon_target: f64,
    /// Achieved deficit `n·cos(π/n) − S_N(X_real)`.
    pub epsilon: f64,
    /// `‖X_real − X_opt‖_F`.
    pub distance: f64,
    pub step: f64,
    pub min_eigenvalue: f64,
    pub diag_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RobustnessCurve {
    pub n: usize,
    pub seed: u64,
    pub trials_per_eps: usize,
    pub samples: Vec<RobustnessSample>,
    pub skipped: usize,
    /// Least-squares slope of `distance ≈ slope·ε` through the origin.
    pub fitted_slope: f64,
    /// `‖d − slope·ε‖ / ‖d‖` over the samples.
    pub fit_residual: f64,
    /// Least-squares slope of `ln d` against `ln ε`; `None` with fewer than
    /// two distinct targets.
    pub loglog_exponent: Option<f64>,
    /// `max d / (slope_t·ε)`, `slope_t` the through-origin slope of the
    /// sample's trial.
    pub max_envelope_ratio: f64,
    /// `max d / (fitted_slope·ε)`; mixes directions with different constants.
    pub global_envelope_ratio: f64,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl RobustnessCurve {
    /// One row per sample.
    pub fn to_csv(&self) -> String {
        use crate::output::fmt_f64;
        let mut out =
            String::from("trial,epsilon_target,epsilon,distance,step,min_eigenvalue,diag_residual\n");
        for s in &self.samples {
            let row: Vec<String> = [
                s.epsilon_target,
                s.epsilon,
                s.distance,
                s.step,
                s.min_eigenvalue,
                s.diag_residual,
            ]
            .iter()
            .map(|&x| fmt_f64(x))
            .collect();
            out.push_str(&format!("{},{}\n", s.trial, row.join(",")));
        }
        out
    }
}

fn curve_checks(c: &RobustnessCurve) -> Vec<Check> {
    let feasible = c
        .samples
        .iter()
        .all(|s| s.min_eigenvalue >= -FEASIBILITY_TOL && s.diag_residual <= FEASIBILITY_TOL);
    let exponent_ok = c
        .loglog_exponent
        .is_some_and(|e| (EXPONENT_RANGE.0..=EXPONENT_RANGE.1).contains(&e));
    vec![
        Check::new(
            "robustness.samples",
            !c.samples.is_empty(),
            format!("{} samples, {} skipped", c.samples.len(), c.skipped),
        ),
        Check::new(
            "robustness.feasible",
            feasible,
            "every perturbed point is PSD with unit diagonal".to_string(),
        ),
        Check::new(
            "robustness.loglog_exponent",
            exponent_ok,
            format!(
                "exponent {:?}, accepted [{}, {}]",
                c.loglog_exponent, EXPONENT_RANGE.0, EXPONENT_RANGE.1
            ),
        ),
        Check::new(
            "robustness.linear_envelope",
            c.max_envelope_ratio <= ENVELOPE_FACTOR,
            format!(
                "max distance / (trial slope·ε) = {}, accepted ≤ {ENVELOPE_FACTOR}; against the pooled slope {}",
                c.max_envelope_ratio, c.global_envelope_ratio
            ),
        ),
    ]
}

/// Eigenvalue clipping followed by `X ← D^{-1/2} X D^{-1/2}`.
pub fn project_to_feasible(m: &SymMatrix) -> Result<SymMatrix> {
    let clipped = clip_to_psd(m)?;
    let d = clipped.diagonal();
    if let Some(&bad) = d.iter().find(|&&x| !(x > 0.0)) {
        return Err(Error::invalid(format!(
            "projection produced a non-positive diagonal entry {bad}"
        )));
    }
    let s: Vec<f64> = d.iter().map(|x| 1.0 / x.sqrt()).collect();
    let n = m.dim();
    let mut out = Mat::from_fn(n, n, |i, j| clipped[(i, j)] * s[i] * s[j]);
    for (i, _) in s.iter().enumerate() {
        out[(i, i)] = 1.0;
    }
    SymMatrix::from_mat(out)
}

/// Random symmetric zero-diagonal direction of unit Frobenius norm.
fn random_direction(n: usize, rng: &mut ChaCha8Rng) -> SymMatrix {
    let mut m = Mat::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let g: f64 = rng.sample(StandardNormal);
            m[(i, j)] = g;
            m[(j, i)] = g;
        }
    }
    let norm = m.frobenius_norm();
    SymMatrix::from_mat(m.scale(1.0 / norm)).expect("square direction")
}

struct Probe<'a> {
    ineq: &'a NCycleInequality,
    x_opt: &'a SymMatrix,
    dir: &'a SymMatrix,
}

impl Probe<'_> {
    fn at(&self, t: f64) -> Result<(SymMatrix, f64)> {
        let x = project_to_feasible(&self.x_opt.add(&self.dir.scale(t)))?;
        let deficit = self.ineq.quantum_bound - self.ineq.evaluate(&x)?;
        Ok((x, deficit))
    }

    /// Step `t` whose projected point has deficit within the band around
    /// `target`.
    fn hit(&self, target: f64) -> Result<Option<(f64, SymMatrix, f64)>> {
        let (lo_ok, hi_ok) = (target * (1.0 - DEFICIT_BAND), target * (1.0 + DEFICIT_BAND));
        let mut hi = target;
        let (mut x, mut deficit) = self.at(hi)?;
        while deficit < lo_ok {
            hi *= 2.0;
            if hi > MAX_STEP {
                return Ok(None);
            }
            (x, deficit) = self.at(hi)?;
        }
        let mut lo = 0.0;
        for _ in 0..BISECTION_CAP {
            if deficit <= hi_ok {
                return Ok(Some((hi, x, deficit)));
            }
            let mid = 0.5 * (lo + hi);
            let (xm, dm) = self.at(mid)?;
            if dm < lo_ok {
                lo = mid;
            } else {
                hi = mid;
                x = xm;
                deficit = dm;
            }
        }
        Ok(None)
    }
}

/// Perturbs `X_opt` along seeded random directions, projects back to the
/// feasible set and bisects the step until the objective deficit matches
/// each target; records the Frobenius distance to `X_opt`.
///
/// Trial `k` draws its direction from ChaCha8 stream `k` under `seed` and
/// reuses it for every target, so results do not depend on thread count.
pub fn robustness_experiment(
    n: usize,
    epsilons: &[f64],
    trials_per_eps: usize,
    seed: u64,
) -> Result<RobustnessCurve> {
    let ineq = build(n)?;
    if epsilons.is_empty() {
        return Err(Error::invalid("at least one target deficit is required"));
    }
    if let Some(e) = epsilons.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
        return Err(Error::invalid(format!("target deficit {e} must be positive")));
    }
    if trials_per_eps == 0 {
        return Err(Error::invalid("trials_per_eps must be at least 1"));
    }
    let x_opt = analytic_optimizer(n)?;

    let per_trial: Vec<Result<Vec<Option<RobustnessSample>>>> = (0..trials_per_eps)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial as u64);
            let dir = random_direction(n, &mut rng);
            let probe = Probe {
                ineq: &ineq,
                x_opt: &x_opt,
                dir: &dir,
            };
            epsilons
                .iter()
                .map(|&target| {
                    let Some((step, x, epsilon)) = probe.hit(target)? else {
                        log::warn!(
                            "robustness n={n} trial={trial} ε={target}: target deficit not reached, sample skipped"
                        );
                        return Ok(None);
                    };
                    let diag_residual = x
                        .diagonal()
                        .iter()
                        .fold(0.0f64, |m, d| m.max((d - 1.0).abs()));
                    Ok(Some(RobustnessSample {
                        trial,
                        epsilon_target: target,
                        epsilon,
                        distance: frobenius_distance(&x, &x_opt)?,
                        step,
                        min_eigenvalue: x.min_eigenvalue()?,
                        diag_residual,
                    }))
                })
                .collect()
        })
        .collect();

    let mut samples = Vec::new();
    let mut skipped = 0;
    for trial in per_trial {
        for s in trial? {
            match s {
                Some(s) => samples.push(s),
                None => skipped += 1,
            }
        }
    }
    samples.sort_by(|a, b| {
        b.epsilon_target
            .total_cmp(&a.epsilon_target)
            .then(a.trial.cmp(&b.trial))
    });
    Ok(fit(n, seed, trials_per_eps, samples, skipped))
}

fn fit(
    n: usize,
    seed: u64,
    trials_per_eps: usize,
    samples: Vec<RobustnessSample>,
    skipped: usize,
) -> RobustnessCurve {
    let see: f64 = samples.iter().map(|s| s.epsilon * s.epsilon).sum();
    let sed: f64 = samples.iter().map(|s| s.epsilon * s.distance).sum();
    let slope = if see > 0.0 { sed / see } else { f64::NAN };
    let sdd: f64 = samples.iter().map(|s| s.distance * s.distance).sum();
    let sres: f64 = samples
        .iter()
        .map(|s| (s.distance - slope * s.epsilon).powi(2))
        .sum();
    let fit_residual = if sdd > 0.0 { (sres / sdd).sqrt() } else { 0.0 };
    let global_envelope_ratio = samples
        .iter()
        .map(|s| s.distance / (slope * s.epsilon))
        .fold(0.0f64, f64::max);
    let mut per_trial: BTreeMap<usize, (f64, f64)> = BTreeMap::new();
    for s in &samples {
        let e = per_trial.entry(s.trial).or_default();
        e.0 += s.epsilon * s.epsilon;
        e.1 += s.epsilon * s.distance;
    }
    let max_envelope_ratio = samples
        .iter()
        .map(|s| {
            let (see, sed) = per_trial[&s.trial];
            s.distance / (sed / see * s.epsilon)
        })
        .fold(0.0f64, f64::max);

    let logs: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| s.distance > 0.0 && s.epsilon > 0.0)
        .map(|s| (s.epsilon.ln(), s.distance.ln()))
        .collect();
    let mut targets: Vec<f64> = samples.iter().map(|s| s.epsilon_target).collect();
    targets.dedup();
    let loglog_exponent = (targets.len() >= 2 && logs.len() >= 2).then(|| {
        let k = logs.len() as f64;
        let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
        let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
        let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    });

    let mut curve = RobustnessCurve {
        n,
        seed,
        trials_per_eps,
        samples,
        skipped,
        fitted_slope: slope,
        fit_residual,
        loglog_exponent,
        max_envelope_ratio,
        global_envelope_ratio,
        checks: Vec::new(),
        passed: false,
    };
    curve.checks = curve_checks(&curve);
    curve.passed = curve.checks.iter().all(|c| c.passed);
    curve
}
