//! Benchmark harness over random instances.

use std::time::Instant;

use ground_energy::counters::TallySnapshot;
use ground_energy::eigensolve::{solve_guided, Policy, SolverConfig};
use ground_energy::hamiltonian::random::{random_local_hamiltonian, random_pauli_hamiltonian};
use ground_energy::hamiltonian::Hamiltonian;
use ground_energy::oracle::{self, DenseOperator};
use ground_energy::rng::stream;
use ground_energy::state_access::GuidingState;
use ground_energy::{Error, Result};
use rand::RngCore;
use serde::{Deserialize, Serialize};

/// Largest register the bench diagonalizes.
pub const ORACLE_MAX_QUBITS: usize = 12;

/// Random-instance generator settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub count: usize,
    pub n: usize,
    /// Locality (maximum Pauli weight for Pauli instances).
    pub k: usize,
    pub m: usize,
    pub pauli_only: bool,
    pub seed: u64,
}

/// Outcome for one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchInstance {
    pub index: usize,
    pub estimator_seed: u64,
    pub kappa: f64,
    pub e_star: Option<f64>,
    pub lambda_min: Option<f64>,
    pub success: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicted_cost_log10: Option<f64>,
    pub samples: TallySnapshot,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

/// Aggregate over all instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub generator: GeneratorSpec,
    pub epsilon: f64,
    pub policy: Policy,
    pub completed: usize,
    pub failed: usize,
    pub successes: Option<usize>,
    /// Fraction of all instances with `|E* − λ_min| ≤ ε·κ`.
    pub success_fraction: Option<f64>,
    pub mean_ratio_samples: f64,
    pub mean_leaf_queries: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_wall_time_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notice: Option<String>,
}

/// One line of bench output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchLine {
    Instance(BenchInstance),
    Summary(BenchSummary),
}

fn generate(spec: &GeneratorSpec, index: usize) -> Result<(Hamiltonian, u64)> {
    let mut rng = stream(spec.seed, index as u64);
    let h = if spec.pauli_only {
        random_pauli_hamiltonian(spec.n, spec.m, spec.k, true, &mut rng)?
    } else {
        random_local_hamiltonian(spec.n, spec.k, spec.m, true, &mut rng)?
    };
    Ok((h, rng.next_u64()))
}

/// Run the estimator on `spec.count` random instances. Guiding states are
/// exact ground vectors when the oracle is enabled (`n ≤ 12`), otherwise the
/// all-zeros basis state with the configured `χ`.
pub fn run_bench(
    spec: &GeneratorSpec,
    cfg: &SolverConfig,
    timing: bool,
    mut emit: impl FnMut(&BenchLine),
) -> Result<BenchSummary> {
    let oracle_on = spec.n <= ORACLE_MAX_QUBITS;
    let mut instances = Vec::with_capacity(spec.count);
    for index in 0..spec.count {
        let (h, estimator_seed) = generate(spec, index)?;
        let kappa = h.decomposition()?.kappa();
        let run_cfg = SolverConfig {
            seed: estimator_seed,
            chi: if oracle_on { 1.0 } else { cfg.chi },
            ..cfg.clone()
        };
        let (psi, lambda_min) = if oracle_on {
            let op = DenseOperator::new(oracle::dense_hamiltonian(&h)?)?;
            (
                GuidingState::dense(op.ground_vector())?,
                Some(oracle::exact_ground_energy(&op)),
            )
        } else {
            (GuidingState::basis(h.dim(), 0)?, None)
        };
        let start = Instant::now();
        let outcome = solve_guided(&h, &psi, &run_cfg);
        let wall = timing.then(|| start.elapsed().as_secs_f64());
        let inst = match outcome {
            Ok(est) => BenchInstance {
                index,
                estimator_seed,
                kappa,
                e_star: Some(est.e_star),
                lambda_min,
                success: lambda_min.map(|l| (est.e_star - l).abs() <= cfg.epsilon * kappa),
                error: None,
                predicted_cost_log10: None,
                samples: est.samples_used,
                wall_time_s: wall,
            },
            Err(e) => BenchInstance {
                index,
                estimator_seed,
                kappa,
                e_star: None,
                lambda_min,
                success: lambda_min.map(|_| false),
                predicted_cost_log10: match &e {
                    Error::CostCapExceeded {
                        predicted_log10, ..
                    } => Some(*predicted_log10),
                    _ => None,
                },
                error: Some(e.to_string()),
                samples: TallySnapshot::default(),
                wall_time_s: wall,
            },
        };
        emit(&BenchLine::Instance(inst.clone()));
        instances.push(inst);
    }
    let count = instances.len();
    let completed = instances.iter().filter(|i| i.error.is_none()).count();
    let mean = |f: &dyn Fn(&BenchInstance) -> f64| {
        if count == 0 {
            0.0
        } else {
            instances.iter().map(f).sum::<f64>() / count as f64
        }
    };
    let successes = (oracle_on && count > 0)
        .then(|| instances.iter().filter(|i| i.success == Some(true)).count());
    let summary = BenchSummary {
        generator: spec.clone(),
        epsilon: cfg.epsilon,
        policy: cfg.policy,
        completed,
        failed: count - completed,
        successes,
        success_fraction: successes.map(|s| s as f64 / count as f64),
        mean_ratio_samples: mean(&|i| i.samples.ratio_samples as f64),
        mean_leaf_queries: mean(&|i| i.samples.leaf_queries as f64),
        mean_wall_time_s: (timing && count > 0).then(|| mean(&|i| i.wall_time_s.unwrap_or(0.0))),
        notice: (!oracle_on).then(|| {
            format!("oracle disabled for n > {ORACLE_MAX_QUBITS}; success fraction omitted")
        }),
    };
    emit(&BenchLine::Summary(summary.clone()));
    Ok(summary)
}
