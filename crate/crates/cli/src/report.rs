//! Report types emitted by the subcommands.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ground_energy::counters::TallySnapshot;
use ground_energy::eigensolve::{DecisionOutcome, EnergyEstimate, Policy, Verdict};
use ground_energy::state_access::StateSpec;
use ground_energy::Error;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Echo of the run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub hamiltonian: String,
    pub state: Option<String>,
    pub epsilon: f64,
    pub chi: f64,
    pub sigma: Option<f64>,
    pub delta: f64,
    pub policy: Policy,
    pub cost_cap: f64,
    pub seed: u64,
    pub workers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
}

/// Result carried by a [`RunReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunResult {
    Estimate(EnergyEstimate),
    Decision(DecisionOutcome),
}

impl RunResult {
    pub fn estimate(&self) -> &EnergyEstimate {
        match self {
            RunResult::Estimate(e) => e,
            RunResult::Decision(d) => &d.estimate,
        }
    }
}

/// Comparison against exact diagonalization.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OracleComparison {
    pub lambda_min: Option<f64>,
    /// `E* − λ_min`.
    pub error: Option<f64>,
    /// `ε·κ`.
    pub tolerance: Option<f64>,
    pub within_tolerance: Option<bool>,
    /// Exact overlap of the guiding state with the low-energy window.
    pub overlap: Option<f64>,
    /// Verdict implied by `λ_min`, `None` inside the promise gap.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_verdict: Option<Verdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notice: Option<String>,
}

/// Report of an `estimate` or `decide` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    /// SHA-256 of the Hamiltonian file, the state spec and any dense state file.
    pub input_digest: String,
    pub config: ConfigEcho,
    pub result: RunResult,
    pub counters: TallySnapshot,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleComparison>,
}

impl RunReport {
    /// Human-readable rendering of the same content.
    pub fn to_text(&self) -> String {
        let est = self.result.estimate();
        let mut out = String::new();
        if let RunResult::Decision(d) = &self.result {
            let _ = writeln!(
                out,
                "verdict: {:?} (E* {} vs midpoint {})",
                d.verdict, est.e_star, d.midpoint
            );
        }
        let _ = writeln!(
            out,
            "E* = {}  (t* = {} of T = {}, kappa = {})",
            est.e_star, est.t_star, est.intervals, est.kappa
        );
        if est.no_yes_found {
            let _ = writeln!(
                out,
                "note: no threshold test answered yes; t* defaulted to T-1"
            );
        }
        let _ = writeln!(
            out,
            "policy {}, epsilon {}, chi {}, sigma {}, delta {}, seed {}",
            est.policy, est.epsilon, est.chi, est.sigma, est.delta, est.seed
        );
        let _ = writeln!(
            out,
            "samples: ratio {}, chain {}, leaf {}",
            self.counters.ratio_samples, self.counters.chain_samples, self.counters.leaf_queries
        );
        for rec in &est.transcript {
            let _ = writeln!(
                out,
                "  test t={:>3} tau={:.6} d={:>3} |est|={:.6} threshold={:.6} {}",
                rec.t,
                rec.tau,
                rec.degree,
                rec.estimate.norm(),
                rec.threshold,
                if rec.yes { "yes" } else { "no" }
            );
        }
        if let Some(o) = &self.oracle {
            if let Some(l) = o.lambda_min {
                let _ = writeln!(out, "oracle: lambda_min = {l}");
            }
            if let (Some(e), Some(t), Some(ok)) = (o.error, o.tolerance, o.within_tolerance) {
                let _ = writeln!(
                    out,
                    "oracle: error {e} (tolerance {t}) {}",
                    if ok { "ok" } else { "OUTSIDE" }
                );
            }
            if let Some(v) = o.overlap {
                let _ = writeln!(out, "oracle: overlap {v}");
            }
            if let Some(n) = &o.notice {
                let _ = writeln!(out, "oracle: {n}");
            }
        }
        if let Some(t) = self.wall_time_s {
            let _ = writeln!(out, "wall time: {t:.3} s");
        }
        let _ = writeln!(out, "input digest: {}", self.input_digest);
        out
    }
}

/// Predicted-cost details attached to a cost-cap abort.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub predicted_log10: f64,
    pub cap_log10: f64,
    pub policy: Policy,
    pub epsilon: f64,
    pub chi: f64,
    pub intervals: usize,
}

/// Machine-readable error written to stderr.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub error: String,
    pub message: String,
    pub exit_code: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost_report: Option<CostReport>,
}

/// Short machine name of an error.
pub fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Parse { .. } => "parse",
        Error::InvalidTerm { .. } => "invalid_term",
        Error::InvalidParameter { .. } => "invalid_parameter",
        Error::DimensionTooLarge { .. } => "dimension_too_large",
        Error::DimensionMismatch { .. } => "dimension_mismatch",
        Error::ZeroKappa => "zero_kappa",
        Error::NotNormalized { .. } => "not_normalized",
        Error::UndefinedRatio { .. } => "undefined_ratio",
        Error::NotNormal { .. } => "not_normal",
        Error::NotHermitian { .. } => "not_hermitian",
        Error::DegreeOverflow { .. } => "degree_overflow",
        Error::MonomialDegree { .. } => "monomial_degree",
        Error::CostCapExceeded { .. } => "cost_cap_exceeded",
        Error::Unsupported(_) => "unsupported",
        Error::Io(_) => "io",
        Error::Json(_) => "json",
    }
}

/// Digest of the Hamiltonian file, the state spec text and, for dense specs,
/// the state file.
pub fn input_digest(hamiltonian: &Path, state: Option<&str>) -> Result<String, Error> {
    let mut hasher = Sha256::new();
    hasher.update(fs::read(hamiltonian)?);
    hasher.update([0u8]);
    if let Some(s) = state {
        hasher.update(s.as_bytes());
        if let Ok(StateSpec::Dense(path)) = s.parse::<StateSpec>() {
            hasher.update([0u8]);
            hasher.update(fs::read(path)?);
        }
    }
    Ok(format!("sha256:{}", hex::encode(hasher.finalize())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ground_energy::counters::TallySnapshot;
    use ground_energy::eigensolve::TestRecord;
    use num_complex::Complex64;

    fn sample_report() -> RunReport {
        let estimate = EnergyEstimate {
            e_star: -0.875,
            t_star: 1,
            intervals: 16,
            kappa: 1.0,
            epsilon: 0.25,
            chi: 1.0,
            sigma: 0.125,
            delta: 0.05,
            policy: Policy::OracleExact,
            seed: 7,
            no_yes_found: false,
            samples_used: TallySnapshot::default(),
            transcript: vec![TestRecord {
                t: 0,
                tau: 0.1 + 0.2,
                theta: 1.0 / 16.0,
                xi: 1.0 / 12.0,
                degree: 46,
                estimate: Complex64::new(0.123_456_789_012_345_67, -1e-300),
                threshold: 0.5,
                yes: false,
            }],
        };
        RunReport {
            command: "estimate".into(),
            input_digest: "sha256:00".into(),
            config: ConfigEcho {
                hamiltonian: "h.txt".into(),
                state: Some("basis:1".into()),
                epsilon: 0.25,
                chi: 1.0,
                sigma: None,
                delta: 0.05,
                policy: Policy::OracleExact,
                cost_cap: 1e12,
                seed: 7,
                workers: Some(1),
                a: None,
                b: None,
            },
            result: RunResult::Estimate(estimate),
            counters: TallySnapshot::default(),
            wall_time_s: Some(0.1),
            oracle: Some(OracleComparison {
                lambda_min: Some(-1.0),
                error: Some(0.125),
                tolerance: Some(0.25),
                within_tolerance: Some(true),
                overlap: Some(1.0),
                expected_verdict: None,
                notice: None,
            }),
        }
    }

    #[test]
    fn test_report_json_round_trip() {
        let report = sample_report();
        let json = serde_json::to_string(&report).unwrap();
        let back: RunReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
        assert_eq!(serde_json::to_string(&back).unwrap(), json);
    }

    #[test]
    fn test_report_json_field_names() {
        let v = serde_json::to_value(sample_report()).unwrap();
        let est = &v["result"]["estimate"];
        for key in [
            "e_star",
            "t_star",
            "T",
            "kappa",
            "policy",
            "seed",
            "samples_used",
            "transcript",
        ] {
            assert!(est.get(key).is_some(), "missing {key}");
        }
        assert_eq!(est["policy"], "oracle-exact");
    }

    #[test]
    fn test_text_rendering_mentions_estimate() {
        let text = sample_report().to_text();
        assert!(text.contains("E* = -0.875"));
        assert!(text.contains("oracle: lambda_min = -1"));
    }

    #[test]
    fn test_digest_depends_on_inputs() {
        let dir = tempfile::tempdir().unwrap();
        let h = dir.path().join("h.txt");
        fs::write(&h, "n=1\n1 Z\n").unwrap();
        let a = input_digest(&h, Some("basis:1")).unwrap();
        let b = input_digest(&h, Some("basis:0")).unwrap();
        assert_ne!(a, b);
        assert_eq!(a, input_digest(&h, Some("basis:1")).unwrap());
        assert!(a.starts_with("sha256:") && a.len() == 7 + 64);
    }
}
