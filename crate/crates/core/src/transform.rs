//! Sampled estimation of `⟨ψ|A^r|φ⟩` and `⟨ψ|P(A)|φ⟩` for a decomposition
//! `A = Σ_i A_i` with `Σ_i κ_i = 1`.
//!
//! Expanding `A^r` gives a sum over index vectors `x ∈ [m]^r` of
//! `A_{x_r}···A_{x_1}`. Drawing `x` with probability `q(x) = ∏ κ_{x_i}` and
//! weighting the chain sandwich by `1/q(x)` is unbiased, and since
//! `‖A_{x_r}···A_{x_1}‖ ≤ q(x)` each weighted sample has second moment at
//! most `‖ψ‖²‖φ‖²`. A batch of `⌈64/e²⌉` samples is within `e/√2` with
//! probability 3/4; the median over batches reaches `1 − δ`.

use std::sync::Arc;

use num_complex::Complex64;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::counters::Tally;
use crate::error::{Error, Result};
use crate::hamiltonian::Decomposition;
use crate::imm::{chain_entry_traced, estimate_chain_sandwich, MatrixChain};
use crate::rng::{self, StreamRng};
use crate::state_access::{
    ceil_real, check_unit_interval, median_amplify, median_repetitions, StateAccessor,
    VectorAccessor,
};

/// Highest polynomial degree consumed through monomial coefficients.
pub const MONOMIAL_DEGREE_LIMIT: usize = 60;

/// Allowed deviation of `Σ κ_i` from 1.
pub const KAPPA_TOL: f64 = 1e-9;

/// How the per-power error budget is derived from `η`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BudgetPolicy {
    /// `η/4^d` per power.
    Strict,
    /// `η/Σ|a_r|` per power.
    Tight,
}

/// How each sampled chain sandwich is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChainEvaluation {
    /// Nested inner-product estimator over recursive chain entries.
    Sampled,
    /// `Σ_j conj(ψ_j)·⟨j|chain|φ⟩` summed over every index.
    Exact,
}

/// Settings shared by the power and polynomial estimators.
#[derive(Debug, Clone)]
pub struct TransformOptions {
    pub policy: BudgetPolicy,
    pub evaluation: ChainEvaluation,
    /// Abort when the predicted number of leaf operations exceeds this.
    pub cost_cap: f64,
    pub tally: Arc<Tally>,
}

impl Default for TransformOptions {
    fn default() -> Self {
        Self {
            policy: BudgetPolicy::Tight,
            evaluation: ChainEvaluation::Sampled,
            cost_cap: 1e12,
            tally: Arc::new(Tally::new()),
        }
    }
}

/// The vectors and operator of a sandwich `⟨ψ|·|φ⟩`.
#[derive(Clone, Copy)]
pub struct TransformInput<'a> {
    pub psi: &'a dyn StateAccessor,
    pub phi: &'a dyn VectorAccessor,
    /// Must have `Σ κ_i = 1`.
    pub decomp: &'a Decomposition,
}

impl TransformInput<'_> {
    fn validate(&self) -> Result<()> {
        let kappa = self.decomp.kappa();
        if (kappa - 1.0).abs() > KAPPA_TOL {
            return Err(Error::param(
                "kappa",
                kappa,
                "decomposition must be normalized to 1",
            ));
        }
        let n = self.decomp.dim();
        for found in [self.psi.dim(), self.phi.dim()] {
            if found != n {
                return Err(Error::DimensionMismatch { expected: n, found });
            }
        }
        Ok(())
    }
}

/// Draws index vectors `x ∈ [m]^r` with probability `∏ κ_{x_i}`.
#[derive(Debug, Clone)]
pub struct ChainSampler {
    kappas: Vec<f64>,
    alias: WeightedAliasIndex<f64>,
    power: usize,
}

impl ChainSampler {
    pub fn new(decomp: &Decomposition, power: usize) -> Result<Self> {
        let kappa = decomp.kappa();
        if (kappa - 1.0).abs() > KAPPA_TOL {
            return Err(Error::param(
                "kappa",
                kappa,
                "decomposition must be normalized to 1",
            ));
        }
        let alias = WeightedAliasIndex::new(decomp.kappas().to_vec())
            .map_err(|e| Error::Unsupported(format!("term distribution: {e}")))?;
        Ok(Self {
            kappas: decomp.kappas().to_vec(),
            alias,
            power,
        })
    }

    pub fn power(&self) -> usize {
        self.power
    }

    /// Probability `q(x)` of an index vector.
    pub fn mass(&self, x: &[usize]) -> f64 {
        x.iter().map(|&i| self.kappas[i]).product()
    }
}

/// Draw `x = (x_1, …, x_r)`, each coordinate independently with probability
/// `κ_i`.
pub fn sample_chain(sampler: &ChainSampler, rng: &mut StreamRng) -> Vec<usize> {
    (0..sampler.power)
        .map(|_| sampler.alias.sample(rng))
        .collect()
}

fn chain_for(decomp: &Decomposition, x: &[usize]) -> MatrixChain {
    let terms = x.iter().map(|&i| decomp.terms()[i].clone()).collect();
    let bounds = x.iter().map(|&i| decomp.kappas()[i]).collect();
    MatrixChain::new(terms, bounds).expect("terms of one decomposition share a dimension")
}

/// `⟨ψ|chain|φ⟩` by summing over all `N` indices.
pub fn exact_chain_sandwich(
    psi: &dyn VectorAccessor,
    chain: &MatrixChain,
    phi: &dyn VectorAccessor,
    tally: &Tally,
) -> Complex64 {
    let mut leaves = 0;
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..psi.dim() {
        let pj = psi.query(j);
        if pj == Complex64::new(0.0, 0.0) {
            continue;
        }
        let (v, trace) = chain_entry_traced(j, chain, phi);
        leaves += trace.leaf_queries;
        acc += pj.conj() * v;
    }
    tally.add_leaf_queries(leaves);
    acc
}

/// One draw of `X = ⟨ψ|A_{x_r}···A_{x_1}|φ⟩ / q(x)` with the sandwich
/// computed exactly.
pub fn exact_ratio_sample(
    input: TransformInput<'_>,
    sampler: &ChainSampler,
    rng: &mut StreamRng,
) -> Complex64 {
    let x = sample_chain(sampler, rng);
    let chain = chain_for(input.decomp, &x);
    exact_chain_sandwich(input.psi, &chain, input.phi, &Tally::new()) / sampler.mass(&x)
}

/// Planned work for one power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerCost {
    pub power: usize,
    /// Coefficient `a_r`.
    pub coefficient: f64,
    /// Target error `e`.
    pub error: f64,
    pub delta: f64,
    /// Median repetitions of the batch.
    pub repetitions: f64,
    /// Chain samples per batch, `⌈64/e²⌉`.
    pub batch: f64,
    /// Inner-product draws per chain sample.
    pub inner_samples: f64,
    /// `log10` of the predicted leaf queries for this power.
    pub leaf_ops_log10: f64,
}

/// Predicted work for a polynomial transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostPlan {
    pub policy: BudgetPolicy,
    pub evaluation: ChainEvaluation,
    pub powers: Vec<PowerCost>,
    /// `log10` of the total predicted leaf queries.
    pub total_log10: f64,
}

fn log10_sum(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + v.iter().map(|x| 10f64.powf(x - max)).sum::<f64>().log10()
}

/// Predicted leaf queries of [`estimate_power`] in `log10`.
fn power_cost(
    power: usize,
    coefficient: f64,
    error: f64,
    delta: f64,
    sparsity: usize,
    dim: usize,
    evaluation: ChainEvaluation,
) -> PowerCost {
    let repetitions = median_repetitions(delta) as f64;
    let batch = ceil_real(64.0 / (error * error));
    let inner_samples = match evaluation {
        ChainEvaluation::Sampled => {
            let eps = error / (2.0 * std::f64::consts::SQRT_2);
            ceil_real(18.0 * (8.0 * batch).ln()) * ceil_real(8.0 / (eps * eps))
        }
        ChainEvaluation::Exact => dim as f64,
    };
    let leaf_ops_log10 = repetitions.log10()
        + batch.log10()
        + inner_samples.log10()
        + power as f64 * (sparsity.max(1) as f64).log10();
    PowerCost {
        power,
        coefficient,
        error,
        delta,
        repetitions,
        batch,
        inner_samples,
        leaf_ops_log10,
    }
}

/// Per-power error `e` under `policy` for monomial coefficients `coeffs`.
pub fn per_power_error(coeffs: &[f64], eta: f64, policy: BudgetPolicy) -> f64 {
    let d = coeffs.len().saturating_sub(1);
    match policy {
        BudgetPolicy::Strict => eta / 4f64.powi(d as i32),
        BudgetPolicy::Tight => {
            let l1: f64 = coeffs.iter().map(|a| a.abs()).sum();
            if l1 > 0.0 {
                (eta / l1).min(1.0)
            } else {
                1.0
            }
        }
    }
}

/// Cost plan for [`estimate_polynomial_transform`].
pub fn plan_transform(
    decomp: &Decomposition,
    coeffs: &[f64],
    eta: f64,
    delta_total: f64,
    policy: BudgetPolicy,
    evaluation: ChainEvaluation,
) -> CostPlan {
    let d = coeffs.len().saturating_sub(1);
    let error = per_power_error(coeffs, eta, policy);
    let delta = delta_total / (d + 1) as f64;
    let powers: Vec<PowerCost> = coeffs
        .iter()
        .enumerate()
        .filter(|(_, &a)| a != 0.0)
        .map(|(r, &a)| {
            power_cost(
                r,
                a,
                error,
                delta,
                decomp.sparsity(),
                decomp.dim(),
                evaluation,
            )
        })
        .collect();
    let total_log10 = log10_sum(powers.iter().map(|p| p.leaf_ops_log10));
    CostPlan {
        policy,
        evaluation,
        powers,
        total_log10,
    }
}

fn check_cap(total_log10: f64, cap: f64) -> Result<()> {
    let cap_log10 = cap.log10();
    if total_log10 > cap_log10 {
        return Err(Error::CostCapExceeded {
            predicted_log10: total_log10,
            cap_log10,
        });
    }
    Ok(())
}

/// Estimate `⟨ψ|A^r|φ⟩` within `err` with probability at least `1 − δ`.
pub fn estimate_power(
    input: TransformInput<'_>,
    power: usize,
    err: f64,
    delta: f64,
    opts: &TransformOptions,
    rng: &mut StreamRng,
) -> Result<Complex64> {
    input.validate()?;
    check_unit_interval("err", err)?;
    check_unit_interval("delta", delta)?;
    let cost = power_cost(
        power,
        1.0,
        err,
        delta,
        input.decomp.sparsity(),
        input.decomp.dim(),
        opts.evaluation,
    );
    check_cap(cost.leaf_ops_log10, opts.cost_cap)?;

    let sampler = ChainSampler::new(input.decomp, power)?;
    let batch = cost.batch as usize;
    let inner_eps = err / (2.0 * std::f64::consts::SQRT_2);
    let inner_delta = 1.0 / (8.0 * batch as f64);
    let tally = &*opts.tally;
    let table = match opts.evaluation {
        ChainEvaluation::Exact => exact_table(input, &sampler, tally),
        ChainEvaluation::Sampled => None,
    };
    let m = input.decomp.len();

    median_amplify(
        |r| {
            let mut z = Complex64::new(0.0, 0.0);
            for _ in 0..batch {
                if let Some(table) = &table {
                    let code = (0..power).fold(0, |c, _| c * m + sampler.alias.sample(r));
                    z += table[code];
                    continue;
                }
                let x = sample_chain(&sampler, r);
                let q = sampler.mass(&x);
                let chain = chain_for(input.decomp, &x);
                let alpha = match opts.evaluation {
                    ChainEvaluation::Sampled => estimate_chain_sandwich(
                        input.psi,
                        &chain,
                        input.phi,
                        inner_eps,
                        inner_delta,
                        r,
                        tally,
                    )?,
                    ChainEvaluation::Exact => {
                        exact_chain_sandwich(input.psi, &chain, input.phi, tally)
                    }
                };
                z += alpha / q;
            }
            tally.add_chain_samples(batch as u64);
            Ok(z / batch as f64)
        },
        delta,
        rng,
    )
}

/// Largest `m^r` for which exact mode tabulates every weighted chain value.
const EXACT_TABLE_LIMIT: usize = 1 << 16;

/// `⟨ψ|A_x|φ⟩/q(x)` for every `x`, indexed by `x` read as base-`m` digits
/// with `x_1` most significant. Values are identical to the per-sample path.
fn exact_table(
    input: TransformInput<'_>,
    sampler: &ChainSampler,
    tally: &Tally,
) -> Option<Vec<Complex64>> {
    let m = input.decomp.len();
    let size = (0..sampler.power).try_fold(1usize, |acc, _| acc.checked_mul(m))?;
    if size > EXACT_TABLE_LIMIT {
        return None;
    }
    let mut x = vec![0; sampler.power];
    let table = (0..size)
        .map(|code| {
            let mut c = code;
            for slot in x.iter_mut().rev() {
                *slot = c % m;
                c /= m;
            }
            let q = sampler.mass(&x);
            if q == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            exact_chain_sandwich(input.psi, &chain_for(input.decomp, &x), input.phi, tally) / q
        })
        .collect();
    Some(table)
}

/// Result of [`estimate_polynomial_transform`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformEstimate {
    pub value: Complex64,
    /// `Ê_r` for every power; zero where `a_r = 0`.
    pub per_power: Vec<Complex64>,
    pub plan: CostPlan,
}

/// Estimate `⟨ψ|P(A)|φ⟩` for `P(x) = Σ_r a_r x^r` within `η` with
/// probability at least `1 − δ_total`.
///
/// Each nonzero power gets failure budget `δ_total/(d+1)` and the policy's
/// error; power `r` runs on stream `r` of one sub-seed drawn from `rng`. The
/// predicted cost is checked against `opts.cost_cap` before any sampling.
pub fn estimate_polynomial_transform(
    input: TransformInput<'_>,
    coeffs: &[f64],
    eta: f64,
    delta_total: f64,
    opts: &TransformOptions,
    rng: &mut StreamRng,
) -> Result<TransformEstimate> {
    input.validate()?;
    check_unit_interval("eta", eta)?;
    check_unit_interval("delta", delta_total)?;
    if coeffs.is_empty() {
        return Err(Error::param(
            "degree",
            0.0,
            "polynomial has no coefficients",
        ));
    }
    let plan = plan_transform(
        input.decomp,
        coeffs,
        eta,
        delta_total,
        opts.policy,
        opts.evaluation,
    );
    check_cap(plan.total_log10, opts.cost_cap)?;
    let d = coeffs.len() - 1;
    if d > MONOMIAL_DEGREE_LIMIT {
        return Err(Error::MonomialDegree {
            degree: d,
            limit: MONOMIAL_DEGREE_LIMIT,
        });
    }

    let base = rng::fork(rng);
    let mut per_power = vec![Complex64::new(0.0, 0.0); d + 1];
    for cost in &plan.powers {
        let mut r_rng = rng::stream(base, cost.power as u64);
        per_power[cost.power] =
            estimate_power(input, cost.power, cost.error, cost.delta, opts, &mut r_rng)?;
    }
    let value = coeffs
        .iter()
        .zip(&per_power)
        .fold(Complex64::new(0.0, 0.0), |acc, (&a, &e)| acc + e * a);
    Ok(TransformEstimate {
        value,
        per_power,
        plan,
    })
}
