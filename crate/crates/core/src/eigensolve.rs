//! Localizing the smallest eigenvalue by a scan of threshold tests.
//!
//! With `A' = (I + A/κ)/2` the spectrum lies in `[0, 1]`. Test `t` builds a
//! rectangle polynomial `P` that is near 1 below `τ = t·ε/4` and near 0 above
//! `τ + ε/4`, estimates `⟨ψ|P(A')|ψ⟩` within `χ²/4` and answers yes when the
//! estimate has magnitude at least `χ²/2`. If the guiding state has overlap
//! at least `χ` with the eigenvalues in `[λ_min, λ_min + σ]`, the first yes
//! `t*` gives `E* = t*·(ε/2)·κ − κ` within `ε·κ` of `λ_min(A)`.
//!
//! For `σ` wider than `(ε/2)κ` every threshold is shifted up by the excess
//! `Δ = σ/(2κ) − ε/4`, which keeps the same `E*` reconstruction valid for all
//! `σ < ε·κ`.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::counters::{Tally, TallySnapshot};
use crate::error::{Error, Result};
use crate::hamiltonian::{Decomposition, Hamiltonian};
use crate::oracle::{self, DenseOperator};
use crate::polyfilter::{band_filter, RectanglePolynomial};
use crate::rng;
use crate::state_access::{check_unit_interval, GuidingState, StateAccessor};
use crate::transform::{
    estimate_polynomial_transform, plan_transform, BudgetPolicy, ChainEvaluation, TransformInput,
    TransformOptions,
};

/// How `⟨ψ|P(A')|ψ⟩` is obtained in each test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Policy {
    /// Sampled estimator with per-power error `η/4^d`.
    Strict,
    /// Sampled estimator with per-power error `η/Σ|a_r|`.
    Tight,
    /// Dense eigenbasis evaluation, no sampling.
    OracleExact,
}

impl std::str::FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(Policy::Strict),
            "tight" => Ok(Policy::Tight),
            "oracle-exact" => Ok(Policy::OracleExact),
            other => Err(Error::Unsupported(format!("unknown policy `{other}`"))),
        }
    }
}

impl std::fmt::Display for Policy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Policy::Strict => "strict",
            Policy::Tight => "tight",
            Policy::OracleExact => "oracle-exact",
        })
    }
}

/// Solver parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Target accuracy relative to `κ`.
    pub epsilon: f64,
    /// Lower bound on the guiding state's overlap.
    pub chi: f64,
    /// Overlap window width in units of `A`; `None` means `(ε/2)·κ`.
    pub sigma: Option<f64>,
    pub policy: Policy,
    /// Total failure probability.
    pub delta: f64,
    pub seed: u64,
    /// Cap on predicted leaf operations for sampled policies.
    pub cost_cap: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.25,
            chi: 1.0,
            sigma: None,
            policy: Policy::Tight,
            delta: 0.05,
            seed: 0,
            cost_cap: 1e12,
        }
    }
}

impl SolverConfig {
    fn validate(&self, kappa: f64) -> Result<()> {
        check_unit_interval("epsilon", self.epsilon)?;
        check_unit_interval("chi", self.chi)?;
        check_unit_interval("delta", self.delta)?;
        if let Some(s) = self.sigma {
            if !(s >= 0.0 && (s < self.epsilon * kappa || kappa == 0.0)) {
                return Err(Error::param("sigma", s, "must lie in [0, epsilon·kappa)"));
            }
        }
        if self.cost_cap.is_nan() || self.cost_cap <= 0.0 {
            return Err(Error::param("cost_cap", self.cost_cap, "must be positive"));
        }
        Ok(())
    }
}

/// Number of thresholds `T = ⌈4/ε⌉`.
pub fn interval_count(epsilon: f64) -> usize {
    ((4.0 / epsilon - 1e-9).ceil() as usize).max(1)
}

/// `E* = t·(ε/2)·κ − κ`.
pub fn energy_from_index(t: usize, epsilon: f64, kappa: f64) -> f64 {
    t as f64 * (epsilon / 2.0) * kappa - kappa
}

/// One entry of the scan transcript.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestRecord {
    pub t: usize,
    pub tau: f64,
    pub theta: f64,
    pub xi: f64,
    pub degree: usize,
    /// Estimate of `⟨ψ|P(A')|ψ⟩`.
    pub estimate: Complex64,
    /// Decision threshold `χ²/2` on `|estimate|`.
    pub threshold: f64,
    pub yes: bool,
}

/// Result of a scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyEstimate {
    pub e_star: f64,
    pub t_star: usize,
    #[serde(rename = "T")]
    pub intervals: usize,
    pub kappa: f64,
    pub epsilon: f64,
    pub chi: f64,
    pub sigma: f64,
    pub delta: f64,
    pub policy: Policy,
    pub seed: u64,
    /// Set when every test answered no and `t*` defaulted to `T − 1`.
    pub no_yes_found: bool,
    pub samples_used: TallySnapshot,
    pub transcript: Vec<TestRecord>,
}

/// Runs `Test(t)` for one operator and guiding state.
pub struct ThresholdTester<'a> {
    shifted: Decomposition,
    psi: &'a dyn StateAccessor,
    cfg: SolverConfig,
    kappa: f64,
    shift: f64,
    dense: Option<(DenseOperator, Vec<Complex64>)>,
    tally: Arc<Tally>,
}

impl<'a> ThresholdTester<'a> {
    /// `decomp` is the decomposition of `A` itself (any `κ > 0`).
    pub fn new(
        decomp: &Decomposition,
        psi: &'a dyn StateAccessor,
        cfg: &SolverConfig,
    ) -> Result<Self> {
        let kappa = decomp.kappa();
        cfg.validate(kappa)?;
        if psi.dim() != decomp.dim() {
            return Err(Error::DimensionMismatch {
                expected: decomp.dim(),
                found: psi.dim(),
            });
        }
        let shifted = decomp.shift_rescale()?;
        let sigma = cfg.sigma.unwrap_or(cfg.epsilon / 2.0 * kappa);
        let shift = (sigma / (2.0 * kappa) - cfg.epsilon / 4.0).max(0.0);
        let dense = match cfg.policy {
            Policy::OracleExact => {
                Some((oracle::reconstruct(&shifted)?, oracle::dense_vector(psi)))
            }
            _ => None,
        };
        Ok(Self {
            shifted,
            psi,
            cfg: cfg.clone(),
            kappa,
            shift,
            dense,
            tally: Arc::new(Tally::new()),
        })
    }

    /// Number of thresholds.
    pub fn intervals(&self) -> usize {
        interval_count(self.cfg.epsilon)
    }

    /// The filter used by test `t`.
    pub fn polynomial(&self, t: usize) -> Result<RectanglePolynomial> {
        let quarter = self.cfg.epsilon / 4.0;
        band_filter(
            t as f64 * quarter + self.shift,
            quarter,
            self.cfg.chi.powi(2) / 12.0,
        )
    }

    /// `log10` of the predicted leaf operations of the whole scan; `None`
    /// for the dense policy.
    pub fn predicted_cost_log10(&self) -> Result<Option<f64>> {
        let Some(policy) = self.budget_policy() else {
            return Ok(None);
        };
        let eta = self.cfg.chi.powi(2) / 4.0;
        let delta = self.cfg.delta / self.intervals() as f64;
        let mut parts = Vec::new();
        for t in 0..self.intervals() {
            let p = self.polynomial(t)?;
            let plan = plan_transform(
                &self.shifted,
                &p.coeffs(),
                eta,
                delta,
                policy,
                ChainEvaluation::Sampled,
            );
            parts.push(plan.total_log10);
        }
        let max = parts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Some(
            max + parts
                .iter()
                .map(|x| 10f64.powf(x - max))
                .sum::<f64>()
                .log10(),
        ))
    }

    fn budget_policy(&self) -> Option<BudgetPolicy> {
        match self.cfg.policy {
            Policy::Strict => Some(BudgetPolicy::Strict),
            Policy::Tight => Some(BudgetPolicy::Tight),
            Policy::OracleExact => None,
        }
    }

    /// `Test(t)`.
    pub fn test(&self, t: usize) -> Result<TestRecord> {
        let p = self.polynomial(t)?;
        let chi2 = self.cfg.chi.powi(2);
        let estimate = match (&self.dense, self.budget_policy()) {
            (Some((op, psi)), _) => {
                oracle::exact_function_sandwich(op, psi, |x| p.eval_chebyshev(x), psi)
            }
            (None, Some(policy)) => {
                let opts = TransformOptions {
                    policy,
                    evaluation: ChainEvaluation::Sampled,
                    cost_cap: self.cfg.cost_cap,
                    tally: self.tally.clone(),
                };
                let input = TransformInput {
                    psi: self.psi,
                    phi: self.psi,
                    decomp: &self.shifted,
                };
                let mut rng = rng::stream(self.cfg.seed, t as u64);
                let delta = self.cfg.delta / self.intervals() as f64;
                estimate_polynomial_transform(
                    input,
                    &p.coeffs(),
                    chi2 / 4.0,
                    delta,
                    &opts,
                    &mut rng,
                )?
                .value
            }
            (None, None) => unreachable!("dense data is built for the dense policy"),
        };
        Ok(TestRecord {
            t,
            tau: p.tau,
            theta: p.theta,
            xi: p.xi,
            degree: p.degree,
            estimate,
            threshold: chi2 / 2.0,
            yes: estimate.norm() >= chi2 / 2.0,
        })
    }

    /// Scan `t = 0, 1, …` up to the first yes.
    pub fn scan(&self) -> Result<EnergyEstimate> {
        if let Some(predicted) = self.predicted_cost_log10()? {
            let cap_log10 = self.cfg.cost_cap.log10();
            if predicted > cap_log10 {
                return Err(Error::CostCapExceeded {
                    predicted_log10: predicted,
                    cap_log10,
                });
            }
        }
        let intervals = self.intervals();
        let mut transcript = Vec::new();
        let mut t_star = None;
        for t in 0..intervals {
            let rec = self.test(t)?;
            let yes = rec.yes;
            transcript.push(rec);
            if yes {
                t_star = Some(t);
                break;
            }
        }
        let no_yes_found = t_star.is_none();
        let t_star = t_star.unwrap_or(intervals - 1);
        Ok(EnergyEstimate {
            e_star: energy_from_index(t_star, self.cfg.epsilon, self.kappa),
            t_star,
            intervals,
            kappa: self.kappa,
            epsilon: self.cfg.epsilon,
            chi: self.cfg.chi,
            sigma: self
                .cfg
                .sigma
                .unwrap_or(self.cfg.epsilon / 2.0 * self.kappa),
            delta: self.cfg.delta,
            policy: self.cfg.policy,
            seed: self.cfg.seed,
            no_yes_found,
            samples_used: self.tally.snapshot(),
            transcript,
        })
    }
}

/// `Test(t)` for the decomposition of `A`.
pub fn test_threshold(
    t: usize,
    decomp: &Decomposition,
    psi: &dyn StateAccessor,
    cfg: &SolverConfig,
) -> Result<TestRecord> {
    ThresholdTester::new(decomp, psi, cfg)?.test(t)
}

fn zero_estimate(cfg: &SolverConfig) -> Result<EnergyEstimate> {
    cfg.validate(0.0)?;
    Ok(EnergyEstimate {
        e_star: 0.0,
        t_star: 0,
        intervals: interval_count(cfg.epsilon),
        kappa: 0.0,
        epsilon: cfg.epsilon,
        chi: cfg.chi,
        sigma: cfg.sigma.unwrap_or(0.0),
        delta: cfg.delta,
        policy: cfg.policy,
        seed: cfg.seed,
        no_yes_found: false,
        samples_used: TallySnapshot::default(),
        transcript: Vec::new(),
    })
}

/// Estimate `λ_min(A)` within `ε·κ` with probability at least `1 − δ`,
/// given a guiding state with overlap at least `χ` on `[λ_min, λ_min + σ]`.
/// A decomposition with `κ = 0` returns 0 without sampling.
pub fn estimate_smallest_eigenvalue(
    decomp: &Decomposition,
    psi: &dyn StateAccessor,
    cfg: &SolverConfig,
) -> Result<EnergyEstimate> {
    if decomp.kappa() == 0.0 {
        return zero_estimate(cfg);
    }
    ThresholdTester::new(decomp, psi, cfg)?.scan()
}

/// Guided ground energy of a local Hamiltonian, accurate to `ε·Σ‖H_i‖`.
pub fn solve_guided(
    h: &Hamiltonian,
    psi: &dyn StateAccessor,
    cfg: &SolverConfig,
) -> Result<EnergyEstimate> {
    estimate_smallest_eigenvalue(&h.decomposition()?, psi, cfg)
}

/// Unguided ground energy: `H ⊗ I` on `2n` qubits guided by the maximally
/// entangled state, whose overlap with the ground space is at least
/// `2^{-n/2}`. The configured `χ` is replaced by that bound.
pub fn solve_unguided(h: &Hamiltonian, cfg: &SolverConfig) -> Result<EnergyEstimate> {
    let doubled = h.with_idle_copy()?;
    let psi = GuidingState::max_entangled(h.num_qubits())?;
    let cfg = SolverConfig {
        chi: (-(h.num_qubits() as f64) / 2.0).exp2(),
        ..cfg.clone()
    };
    estimate_smallest_eigenvalue(&doubled.decomposition()?, &psi, &cfg)
}

/// Answer of the decision problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Low,
    High,
}

/// A decision together with the estimate it was based on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionOutcome {
    pub verdict: Verdict,
    /// `(a + b)/2 · κ`.
    pub midpoint: f64,
    pub estimate: EnergyEstimate,
}

/// Decide between `E₀ ≤ a·κ` (LOW) and `E₀ > b·κ` (HIGH), requiring
/// `b − a > ε`. The scan runs at accuracy `(b − a)/2` (less a small margin)
/// and compares `E*` to the midpoint. Without a guiding state the unguided
/// solver is used.
pub fn decide(
    h: &Hamiltonian,
    psi: Option<&dyn StateAccessor>,
    a: f64,
    b: f64,
    cfg: &SolverConfig,
) -> Result<DecisionOutcome> {
    if !(a.is_finite() && b.is_finite() && b - a > cfg.epsilon) {
        return Err(Error::param(
            "b - a",
            b - a,
            format!("gap must exceed epsilon = {}", cfg.epsilon),
        ));
    }
    let run = SolverConfig {
        epsilon: ((b - a) / 2.0 - 1e-9).min(1.0),
        ..cfg.clone()
    };
    let estimate = match psi {
        Some(psi) => solve_guided(h, psi, &run)?,
        None => solve_unguided(h, &run)?,
    };
    let midpoint = (a + b) / 2.0 * estimate.kappa;
    let verdict = if estimate.e_star <= midpoint {
        Verdict::Low
    } else {
        Verdict::High
    };
    Ok(DecisionOutcome {
        verdict,
        midpoint,
        estimate,
    })
}
