//! Command-line front end for the ground-energy estimators.
//!
//! [`run`] parses arguments, executes one subcommand and returns the text
//! destined for stdout and stderr together with the process exit code:
//! 0 on success, 1 on input errors and 2 when the predicted cost exceeds the
//! cap. Errors are reported on stderr as a JSON [`ErrorReport`].

pub mod bench;
pub mod report;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use ground_energy::eigensolve::{decide, interval_count, solve_guided, solve_unguided};
use ground_energy::hamiltonian::{load_hamiltonian, Hamiltonian};
use ground_energy::oracle::{self, DenseOperator};
use ground_energy::polyfilter::{build_rectangle_polynomial, coefficient_l1, RectanglePolynomial};
use ground_energy::state_access::{make_state, StateSpec};
use ground_energy::{EnergyEstimate, Error, Policy, SolverConfig, Verdict};
use serde::{Deserialize, Serialize};

use bench::{run_bench, BenchLine, GeneratorSpec};
pub use report::{ConfigEcho, CostReport, ErrorReport, OracleComparison, RunReport, RunResult};

/// Exit code for input and validation errors.
pub const EXIT_INPUT: i32 = 1;
/// Exit code for a cost-cap abort.
pub const EXIT_COST_CAP: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "ground-energy",
    version,
    about = "Sampling-based estimation of the smallest eigenvalue of local Hamiltonians"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the ground energy.
    Estimate(EstimateArgs),
    /// Decide whether the ground energy is below `a·κ` or above `b·κ`.
    Decide(DecideArgs),
    /// Exact diagonalization of a small instance.
    Oracle(OracleArgs),
    /// Run the estimator on random instances and compare with the oracle.
    Bench(BenchArgs),
    /// Build and certify a rectangle polynomial.
    Poly(PolyArgs),
}

/// Estimator settings shared by `estimate`, `decide` and `bench`.
#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Accuracy relative to the total norm bound κ.
    #[arg(long, default_value_t = 0.25)]
    pub epsilon: f64,
    /// Lower bound on the guiding-state overlap.
    #[arg(long, default_value_t = 1.0)]
    pub chi: f64,
    /// Overlap window width; defaults to ε·κ/2.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Total failure probability.
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    /// strict, tight or oracle-exact.
    #[arg(long, default_value = "tight")]
    pub policy: Policy,
    /// Abort when the predicted number of leaf operations exceeds this.
    #[arg(long, default_value_t = 1e12)]
    pub cost_cap: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            epsilon: self.epsilon,
            chi: self.chi,
            sigma: self.sigma,
            policy: self.policy,
            delta: self.delta,
            seed: self.seed,
            cost_cap: self.cost_cap,
        }
    }
}

/// Output settings.
#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Worker threads for the estimator.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Print the report as JSON.
    #[arg(long)]
    pub json: bool,
    /// Include every threshold test in the report.
    #[arg(long)]
    pub transcript: bool,
    /// Record wall-clock time (makes reports non-reproducible).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Clone, Args)]
pub struct EstimateArgs {
    #[arg(long)]
    pub hamiltonian: PathBuf,
    /// basis:<i>, product:<a0,b0;...>, dense:<path> or maxent (unguided).
    #[arg(long)]
    pub state: String,
    /// Compare with exact diagonalization when the dimension allows.
    #[arg(long)]
    pub compare_oracle: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct DecideArgs {
    #[arg(long)]
    pub hamiltonian: PathBuf,
    /// Guiding state; omitted or `maxent` runs the unguided solver.
    #[arg(long)]
    pub state: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub a: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub b: f64,
    #[arg(long)]
    pub compare_oracle: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub hamiltonian: PathBuf,
    /// State whose overlap with the low-energy window is reported.
    #[arg(long)]
    pub state: Option<String>,
    /// Window width above λ_min for the overlap.
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    /// Include the full spectrum.
    #[arg(long)]
    pub spectrum: bool,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value_t = 3)]
    pub m: usize,
    /// Generate Pauli strings instead of dense local blocks.
    #[arg(long)]
    pub pauli_only: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PolyArgs {
    #[arg(long)]
    pub tau: f64,
    #[arg(long)]
    pub theta: f64,
    #[arg(long)]
    pub xi: f64,
    /// Re-verify on this many points per grid.
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub json: bool,
}

/// Output of the `oracle` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub num_qubits: usize,
    pub dim: usize,
    pub kappa: f64,
    pub lambda_min: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<Vec<f64>>,
    pub state: Option<String>,
    pub sigma: f64,
    pub overlap: Option<f64>,
}

/// Output of the `poly` subcommand.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolyReport {
    pub polynomial: RectanglePolynomial,
    pub coefficient_l1: f64,
}

/// What a run produced.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Failure {
    error: Error,
    cost: Option<CostReport>,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        Failure { error, cost: None }
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("reports serialize")
}

/// Parse `args` (including the program name) and run one subcommand.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                return Outcome {
                    code: 0,
                    stdout: e.to_string(),
                    stderr: String::new(),
                };
            }
            let report = ErrorReport {
                error: "usage".into(),
                message: e.to_string().trim_end().to_string(),
                exit_code: EXIT_INPUT,
                cost_report: None,
            };
            return Outcome {
                code: EXIT_INPUT,
                stdout: String::new(),
                stderr: to_json(&report) + "\n",
            };
        }
    };
    let workers = match &cli.command {
        Command::Estimate(a) => a.output.workers,
        Command::Decide(a) => a.output.workers,
        Command::Bench(a) => a.output.workers,
        _ => None,
    };
    let result = match workers {
        Some(k) => match rayon::ThreadPoolBuilder::new()
            .num_threads(k.max(1))
            .build()
        {
            Ok(pool) => pool.install(|| dispatch(&cli.command)),
            Err(e) => Err(Error::Unsupported(format!("cannot start worker pool: {e}")).into()),
        },
        None => dispatch(&cli.command),
    };
    match result {
        Ok(stdout) => Outcome {
            code: 0,
            stdout,
            stderr: String::new(),
        },
        Err(f) => {
            let code = match f.error {
                Error::CostCapExceeded { .. } => EXIT_COST_CAP,
                _ => EXIT_INPUT,
            };
            let report = ErrorReport {
                error: report::error_kind(&f.error).into(),
                message: f.error.to_string(),
                exit_code: code,
                cost_report: f.cost,
            };
            Outcome {
                code,
                stdout: String::new(),
                stderr: to_json(&report) + "\n",
            }
        }
    }
}

fn dispatch(cmd: &Command) -> Result<String, Failure> {
    match cmd {
        Command::Estimate(a) => {
            let report = run_estimate(a)?;
            Ok(render(&report, &a.output))
        }
        Command::Decide(a) => {
            let report = run_decide(a)?;
            Ok(render(&report, &a.output))
        }
        Command::Oracle(a) => run_oracle(a).map_err(Failure::from),
        Command::Bench(a) => run_bench_cmd(a).map_err(Failure::from),
        Command::Poly(a) => run_poly(a).map_err(Failure::from),
    }
}

fn render(report: &RunReport, out: &OutputArgs) -> String {
    if out.json {
        to_json(report) + "\n"
    } else {
        report.to_text()
    }
}

fn echo(
    hamiltonian: &std::path::Path,
    state: Option<&str>,
    s: &SolverArgs,
    workers: Option<usize>,
) -> ConfigEcho {
    ConfigEcho {
        hamiltonian: hamiltonian.display().to_string(),
        state: state.map(str::to_string),
        epsilon: s.epsilon,
        chi: s.chi,
        sigma: s.sigma,
        delta: s.delta,
        policy: s.policy,
        cost_cap: s.cost_cap,
        seed: s.seed,
        workers,
        a: None,
        b: None,
    }
}

/// Run the guided or unguided solver, attaching a cost report to cost-cap
/// aborts.
fn solve(
    h: &Hamiltonian,
    spec: Option<&StateSpec>,
    cfg: &SolverConfig,
) -> Result<EnergyEstimate, Failure> {
    let unguided = matches!(spec, None | Some(StateSpec::MaxEntangled));
    let outcome = match spec {
        Some(spec) if !unguided => {
            let psi = make_state(spec, h.num_qubits())?;
            solve_guided(h, &psi, cfg)
        }
        _ => solve_unguided(h, cfg),
    };
    outcome.map_err(|error| {
        let cost = match &error {
            Error::CostCapExceeded {
                predicted_log10,
                cap_log10,
            } => Some(CostReport {
                predicted_log10: *predicted_log10,
                cap_log10: *cap_log10,
                policy: cfg.policy,
                epsilon: cfg.epsilon,
                chi: if unguided {
                    (-(h.num_qubits() as f64) / 2.0).exp2()
                } else {
                    cfg.chi
                },
                intervals: interval_count(cfg.epsilon),
            }),
            _ => None,
        };
        Failure { error, cost }
    })
}

fn parse_spec(state: Option<&str>) -> Result<Option<StateSpec>, Error> {
    state.map(str::parse).transpose()
}

/// Oracle comparison of an estimate; `None` fields when the dimension is
/// beyond the dense limit.
fn compare(
    h: &Hamiltonian,
    spec: Option<&StateSpec>,
    est: &EnergyEstimate,
) -> Result<OracleComparison, Error> {
    if h.dim() > oracle::MAX_DENSE_DIM {
        return Ok(OracleComparison {
            notice: Some(format!(
                "oracle skipped: dimension {} exceeds {}",
                h.dim(),
                oracle::MAX_DENSE_DIM
            )),
            ..OracleComparison::default()
        });
    }
    let op = DenseOperator::new(oracle::dense_hamiltonian(h)?)?;
    let lambda = oracle::exact_ground_energy(&op);
    let tolerance = est.epsilon * est.kappa;
    let overlap = match spec {
        Some(StateSpec::MaxEntangled) | None => {
            let doubled = h.with_idle_copy()?;
            if doubled.dim() > oracle::MAX_DENSE_DIM {
                None
            } else {
                let op2 = DenseOperator::new(oracle::dense_hamiltonian(&doubled)?)?;
                let psi = make_state(&StateSpec::MaxEntangled, h.num_qubits())?;
                Some(oracle::exact_overlap(
                    &op2,
                    &oracle::dense_vector(&psi),
                    est.sigma,
                ))
            }
        }
        Some(spec) => {
            let psi = make_state(spec, h.num_qubits())?;
            Some(oracle::exact_overlap(
                &op,
                &oracle::dense_vector(&psi),
                est.sigma,
            ))
        }
    };
    Ok(OracleComparison {
        lambda_min: Some(lambda),
        error: Some(est.e_star - lambda),
        tolerance: Some(tolerance),
        within_tolerance: Some((est.e_star - lambda).abs() <= tolerance),
        overlap,
        expected_verdict: None,
        notice: None,
    })
}

fn finish_estimate(mut est: EnergyEstimate, transcript: bool) -> EnergyEstimate {
    if !transcript {
        est.transcript.clear();
    }
    est
}

/// Execute `estimate`.
fn run_estimate(a: &EstimateArgs) -> Result<RunReport, Failure> {
    let h = load_hamiltonian(&a.hamiltonian)?;
    let spec: StateSpec = a.state.parse()?;
    let digest = report::input_digest(&a.hamiltonian, Some(&a.state))?;
    let cfg = a.solver.config();
    let start = Instant::now();
    let est = solve(&h, Some(&spec), &cfg)?;
    let wall = a.output.timing.then(|| start.elapsed().as_secs_f64());
    let oracle = if a.compare_oracle {
        Some(compare(&h, Some(&spec), &est)?)
    } else {
        None
    };
    Ok(RunReport {
        command: "estimate".into(),
        input_digest: digest,
        config: echo(&a.hamiltonian, Some(&a.state), &a.solver, a.output.workers),
        counters: est.samples_used,
        result: RunResult::Estimate(finish_estimate(est, a.output.transcript)),
        wall_time_s: wall,
        oracle,
    })
}

/// Execute `decide`.
fn run_decide(a: &DecideArgs) -> Result<RunReport, Failure> {
    let h = load_hamiltonian(&a.hamiltonian)?;
    let spec = parse_spec(a.state.as_deref())?;
    let digest = report::input_digest(&a.hamiltonian, a.state.as_deref())?;
    let cfg = a.solver.config();
    let start = Instant::now();
    let outcome = match &spec {
        Some(s) if *s != StateSpec::MaxEntangled => {
            let psi = make_state(s, h.num_qubits())?;
            decide(&h, Some(&psi), a.a, a.b, &cfg)
        }
        _ => decide(&h, None, a.a, a.b, &cfg),
    };
    let mut outcome = outcome.map_err(|error| match error {
        Error::CostCapExceeded { .. } => {
            // rerun the wrapped solve to attach the same cost report
            let run = SolverConfig {
                epsilon: ((a.b - a.a) / 2.0 - 1e-9).min(1.0),
                ..cfg.clone()
            };
            match solve(&h, spec.as_ref(), &run) {
                Err(f) => f,
                Ok(_) => Failure { error, cost: None },
            }
        }
        _ => Failure::from(error),
    })?;
    let wall = a.output.timing.then(|| start.elapsed().as_secs_f64());
    let oracle = if a.compare_oracle {
        let mut cmp = compare(&h, spec.as_ref(), &outcome.estimate)?;
        if let Some(l) = cmp.lambda_min {
            let kappa = outcome.estimate.kappa;
            cmp.expected_verdict = if l <= a.a * kappa {
                Some(Verdict::Low)
            } else if l > a.b * kappa {
                Some(Verdict::High)
            } else {
                None
            };
        }
        Some(cmp)
    } else {
        None
    };
    let counters = outcome.estimate.samples_used;
    outcome.estimate = finish_estimate(outcome.estimate, a.output.transcript);
    let mut config = echo(
        &a.hamiltonian,
        a.state.as_deref(),
        &a.solver,
        a.output.workers,
    );
    config.a = Some(a.a);
    config.b = Some(a.b);
    Ok(RunReport {
        command: "decide".into(),
        input_digest: digest,
        config,
        result: RunResult::Decision(outcome),
        counters,
        wall_time_s: wall,
        oracle,
    })
}

/// Execute `oracle`.
fn run_oracle(a: &OracleArgs) -> Result<String, Error> {
    let h = load_hamiltonian(&a.hamiltonian)?;
    let op = DenseOperator::new(oracle::dense_hamiltonian(&h)?)?;
    let spec = parse_spec(a.state.as_deref())?;
    let overlap = match &spec {
        None => None,
        Some(StateSpec::MaxEntangled) => {
            let doubled = h.with_idle_copy()?;
            let op2 = DenseOperator::new(oracle::dense_hamiltonian(&doubled)?)?;
            let psi = make_state(&StateSpec::MaxEntangled, h.num_qubits())?;
            Some(oracle::exact_overlap(
                &op2,
                &oracle::dense_vector(&psi),
                a.sigma,
            ))
        }
        Some(s) => {
            let psi = make_state(s, h.num_qubits())?;
            Some(oracle::exact_overlap(
                &op,
                &oracle::dense_vector(&psi),
                a.sigma,
            ))
        }
    };
    let report = OracleReport {
        num_qubits: h.num_qubits(),
        dim: h.dim(),
        kappa: h.decomposition()?.kappa(),
        lambda_min: oracle::exact_ground_energy(&op),
        spectrum: a.spectrum.then(|| op.eigenvalues().to_vec()),
        state: a.state.clone(),
        sigma: a.sigma,
        overlap,
    };
    if a.json {
        return Ok(to_json(&report) + "\n");
    }
    let mut out = format!(
        "lambda_min = {}\nqubits {}, dimension {}, kappa {}\n",
        report.lambda_min, report.num_qubits, report.dim, report.kappa
    );
    if let (Some(s), Some(v)) = (&report.state, report.overlap) {
        out += &format!("overlap of {s} within sigma {}: {v}\n", report.sigma);
    }
    if let Some(spec) = &report.spectrum {
        out += "spectrum:\n";
        for l in spec {
            out += &format!("  {l}\n");
        }
    }
    Ok(out)
}

/// Execute `bench`.
fn run_bench_cmd(a: &BenchArgs) -> Result<String, Error> {
    let spec = GeneratorSpec {
        count: a.count,
        n: a.n,
        k: a.k,
        m: a.m,
        pauli_only: a.pauli_only,
        seed: a.solver.seed,
    };
    let mut out = String::new();
    let json = a.output.json;
    run_bench(&spec, &a.solver.config(), a.output.timing, |line| {
        if json {
            out += &(to_json(line) + "\n");
            return;
        }
        match line {
            BenchLine::Instance(i) => {
                out += &format!(
                    "instance {:>4}: kappa {:.4} E* {} lambda_min {} {}\n",
                    i.index,
                    i.kappa,
                    i.e_star.map_or("-".into(), |e| e.to_string()),
                    i.lambda_min.map_or("-".into(), |l| l.to_string()),
                    match (&i.error, i.success) {
                        (Some(e), _) => format!("error: {e}"),
                        (None, Some(true)) => "ok".into(),
                        (None, Some(false)) => "MISS".into(),
                        (None, None) => String::new(),
                    }
                );
            }
            BenchLine::Summary(s) => {
                out += &format!("summary: {} completed, {} failed", s.completed, s.failed);
                if let Some(f) = s.success_fraction {
                    out += &format!(", success fraction {f}");
                }
                out += &format!(
                    ", mean ratio samples {}, mean leaf queries {}\n",
                    s.mean_ratio_samples, s.mean_leaf_queries
                );
                if let Some(t) = s.mean_wall_time_s {
                    out += &format!("mean wall time {t:.3} s\n");
                }
                if let Some(n) = &s.notice {
                    out += &format!("notice: {n}\n");
                }
            }
        }
    })?;
    Ok(out)
}

/// Execute `poly`.
fn run_poly(a: &PolyArgs) -> Result<String, Error> {
    let mut p = build_rectangle_polynomial(a.tau, a.theta, a.xi)?;
    if let Some(points) = a.points {
        p.verification = p.verify(points.max(2));
    }
    let report = PolyReport {
        coefficient_l1: coefficient_l1(&p),
        polynomial: p,
    };
    if a.json {
        return Ok(to_json(&report) + "\n");
    }
    let p = &report.polynomial;
    Ok(format!(
        "degree {} (steepness {}, truncation bound {:e})\ncoefficient L1 {:e}\nverification on {} points per grid: max violation {:e}, {}\n",
        p.degree,
        p.steepness,
        p.truncation_bound,
        report.coefficient_l1,
        p.verification.grid_points,
        p.verification.max_violation,
        if p.verification.passed { "passed" } else { "FAILED" }
    ))
}
