//! `tcert`: run the temporal-correlation certification experiments and emit
//! JSON or CSV artifacts.
//!
//! Exit status: 0 when every check of the command passes, 1 on a failing
//! check or internal error (JSON error body on stderr), 2 on usage errors.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use temporal_cert::certify::{self, GridSpec};
use temporal_cert::ncycle;
use temporal_cert::output::{to_json, to_json_pretty};
use temporal_cert::qsim::{self, EventScenario};
use temporal_cert::sdpsolve::{self, SdpProblem, SolveStatus};
use temporal_cert::Error;

const DEFAULT_EPS: [f64; 3] = [1e-2, 1e-3, 1e-4];

#[derive(Parser, Debug)]
#[command(name = "tcert", version, about = "Temporal-correlation certification experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Write the artifact here (atomically) instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Pretty,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classical, quantum and SDP bounds of the N-cycle inequality.
    Bound {
        #[arg(long, default_value_t = 3, value_parser = parse_n)]
        n: usize,
        /// Solve an arbitrary `{"dim", "lambda"}` problem file instead.
        #[arg(long, conflicts_with = "n")]
        problem: Option<PathBuf>,
    },
    /// Analytic optimizer, dual certificate and their consistency checks.
    Certificate {
        #[arg(long, default_value_t = 3, value_parser = parse_n)]
        n: usize,
    },
    /// Nondegeneracy test and solver agreement with the analytic optimizer.
    Uniqueness {
        #[arg(long, default_value_t = 3, value_parser = parse_n)]
        n: usize,
    },
    /// Distance to the optimizer against objective deficit.
    Robustness {
        #[arg(long, default_value_t = 3, value_parser = parse_n)]
        n: usize,
        /// Target deficit; repeat for several.
        #[arg(long = "eps", value_parser = parse_eps)]
        eps: Vec<f64>,
        #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Pseudo-density matrix with spectrum and causality monotone.
    Pdm {
        /// rex, bell1, bell2, bell3 or bell4.
        #[arg(long, required_unless_present = "events", conflicts_with = "events")]
        example: Option<String>,
        /// Event scenario JSON file.
        #[arg(long)]
        events: Option<PathBuf>,
    },
    /// PDM correlations against channel correlations on random scenarios.
    Lemma1 {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = certify::LEMMA1_SCENARIOS)]
        count: usize,
    },
    /// Local isometry in time on random scenarios.
    Isometry {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = certify::ISOMETRY_SCENARIOS)]
        count: usize,
    },
    /// S3 channel sweep over the two-Kraus Pauli family.
    Sweep {
        #[arg(long, default_value = "33x17", value_parser = parse_grid)]
        grid: GridSpec,
    },
    /// Combined certification report.
    Report {
        #[arg(long, default_value_t = 3, value_parser = parse_n)]
        n: usize,
        #[arg(long, default_value = "33x17", value_parser = parse_grid)]
        grid: GridSpec,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

fn parse_n(s: &str) -> Result<usize, String> {
    let n: usize = s.parse().map_err(|e| format!("{e}"))?;
    if n < 3 {
        return Err(format!("n must be at least 3, got {n}"));
    }
    Ok(n)
}

fn parse_eps(s: &str) -> Result<f64, String> {
    let e: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if !(e.is_finite() && e > 0.0) {
        return Err(format!("deficit must be positive, got {e}"));
    }
    Ok(e)
}

fn parse_grid(s: &str) -> Result<GridSpec, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// What a command produced: the rendered artifact and the checks that failed.
struct Outcome {
    body: String,
    failing: Vec<String>,
}

enum Failure {
    Usage(String),
    Internal(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Internal(e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Internal(e.into())
    }
}

fn render(value: &impl Serialize, format: Format, csv: Option<String>) -> Result<String, Failure> {
    match (format, csv) {
        (Format::Json, _) => Ok(to_json(value)?),
        (Format::Pretty, _) => Ok(to_json_pretty(value)?),
        (Format::Csv, Some(csv)) => Ok(csv),
        (Format::Csv, None) => Err(Failure::Usage(
            "--format csv is only available for sweep and robustness".to_string(),
        )),
    }
}

fn read_input(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| {
        Failure::Usage(format!("cannot read {}: {e}", path.display()))
    })
}

/// Solver output for an arbitrary problem file.
#[derive(Serialize)]
struct ProblemSummary {
    dim: usize,
    sdp: f64,
    sdp_dual: f64,
    gap: f64,
    iterations: usize,
    status: SolveStatus,
    primal: temporal_cert::matrixcore::SymMatrix,
    dual: Vec<f64>,
}

fn names(checks: &[temporal_cert::check::Check]) -> Vec<String> {
    temporal_cert::check::failing(checks)
        .into_iter()
        .map(str::to_string)
        .collect()
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    let tol = sdpsolve::tolerance_from_env().map_err(|e| Failure::Usage(e.to_string()))?;
    let format = cli.format;
    let verdict = |passed: bool, name: &str| {
        if passed {
            Vec::new()
        } else {
            vec![name.to_string()]
        }
    };
    let outcome = match &cli.command {
        Command::Bound { n, problem: None } => {
            let s = ncycle::bound_summary(*n, tol)?;
            Outcome {
                body: render(&s, format, None)?,
                failing: verdict(s.passed, "bound.sdp_matches_quantum"),
            }
        }
        Command::Bound {
            problem: Some(path), ..
        } => {
            let p = SdpProblem::from_json_str(&read_input(path)?)
                .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            let sol = sdpsolve::solve(&p, tol, sdpsolve::DEFAULT_MAX_ITER)?;
            let s = ProblemSummary {
                dim: p.dim(),
                sdp: sol.primal_value,
                sdp_dual: sol.dual_value,
                gap: sol.gap,
                iterations: sol.iterations,
                status: sol.status,
                primal: sol.primal,
                dual: sol.dual,
            };
            Outcome {
                body: render(&s, format, None)?,
                failing: verdict(s.status == SolveStatus::Optimal, "bound.solver_status"),
            }
        }
        Command::Certificate { n } => {
            let b = ncycle::certificate_bundle(*n)?;
            let failing = b
                .failures
                .iter()
                .map(|f| format!("ncycle.{}", f.split(':').next().unwrap_or(f)))
                .collect();
            Outcome {
                body: render(&b, format, None)?,
                failing,
            }
        }
        Command::Uniqueness { n } => {
            let u = ncycle::uniqueness_report(*n, tol)?;
            Outcome {
                body: render(&u, format, None)?,
                failing: verdict(u.passed, "uniqueness"),
            }
        }
        Command::Robustness {
            n,
            eps,
            trials,
            seed,
        } => {
            let eps = if eps.is_empty() { DEFAULT_EPS.to_vec() } else { eps.clone() };
            let c = ncycle::robustness_experiment(*n, &eps, *trials as usize, *seed)?;
            Outcome {
                body: render(&c, format, Some(c.to_csv()))?,
                failing: names(&c.checks),
            }
        }
        Command::Pdm { example, events } => {
            let r = match (example, events) {
                (Some(name), _) => {
                    qsim::pdm_example(name).map_err(|e| Failure::Usage(e.to_string()))?
                }
                (None, Some(path)) => {
                    let scenario = EventScenario::from_json_str(&read_input(path)?)
                        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
                    qsim::pdm_general(&scenario)?
                }
                (None, None) => unreachable!("clap requires --example or --events"),
            };
            Outcome {
                body: render(&qsim::pdm_summary(&r)?, format, None)?,
                failing: Vec::new(),
            }
        }
        Command::Lemma1 { seed, count } => {
            let r = qsim::lemma1_residual(*seed, *count);
            Outcome {
                body: render(&r, format, None)?,
                failing: verdict(r.max_residual <= certify::RESIDUAL_TOL, "qsim.lemma1_residual"),
            }
        }
        Command::Isometry { seed, count } => {
            let r = qsim::isometry_residual(*seed, *count);
            Outcome {
                body: render(&r, format, None)?,
                failing: verdict(r.max_residual <= certify::RESIDUAL_TOL, "qsim.isometry_residual"),
            }
        }
        Command::Sweep { grid } => {
            let s = certify::channel_sweep(*grid)?;
            Outcome {
                body: render(&s, format, Some(s.to_csv()))?,
                failing: names(&s.checks),
            }
        }
        Command::Report { n, grid, seed } => {
            let r = certify::full_report(*n, *grid, *seed)?;
            Outcome {
                body: render(&r, format, None)?,
                failing: names(&r.checks),
            }
        }
    };
    Ok(outcome)
}

/// Writes through a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, body: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(body.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: ErrorDetail<'a>,
}

#[derive(Serialize)]
struct ErrorDetail<'a> {
    kind: &'a str,
    message: String,
    #[serde(skip_serializing_if = "<[_]>::is_empty")]
    failing_checks: &'a [String],
}

fn report_error(kind: &str, message: String, failing_checks: &[String]) {
    let body = ErrorBody {
        error: ErrorDetail {
            kind,
            message,
            failing_checks,
        },
    };
    let text = to_json(&body).unwrap_or_else(|_| format!("{{\"schema\":1,\"error\":{{\"kind\":\"{kind}\"}}}}\n"));
    let _ = std::io::stderr().write_all(text.as_bytes());
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(Failure::Usage(msg)) => {
            report_error("usage", msg, &[]);
            return ExitCode::from(2);
        }
        Err(Failure::Internal(e)) => {
            report_error("internal", e.to_string(), &[]);
            return ExitCode::from(1);
        }
    };
    let written = match &cli.out {
        Some(path) => write_atomic(path, &outcome.body),
        None => std::io::stdout().write_all(outcome.body.as_bytes()),
    };
    if let Err(e) = written {
        report_error("io", e.to_string(), &[]);
        return ExitCode::from(1);
    }
    if outcome.failing.is_empty() {
        ExitCode::SUCCESS
    } else {
        report_error(
            "check_failed",
            format!("{} check(s) failed", outcome.failing.len()),
            &outcome.failing,
        );
        ExitCode::from(1)
    }
}
