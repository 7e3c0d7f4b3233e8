//! End-to-end guarantees of the threshold scan with dense filter evaluation.

mod common;

use common::random_unit_vector;
use ground_energy::eigensolve::{interval_count, ThresholdTester};
use ground_energy::hamiltonian::random::random_local_hamiltonian;
use ground_energy::oracle::{
    dense_hamiltonian, exact_function_sandwich, exact_ground_energy, exact_overlap,
    polynomial_of_matrix, reconstruct, sandwich, DenseOperator,
};
use ground_energy::polyfilter::eval_poly;
use ground_energy::rng::stream;
use ground_energy::{
    decide, parse_hamiltonian, solve_guided, solve_unguided, Error, GuidingState, Policy,
    SolverConfig, Verdict,
};
use num_complex::Complex64;

fn exact_cfg(epsilon: f64, chi: f64) -> SolverConfig {
    SolverConfig {
        epsilon,
        chi,
        policy: Policy::OracleExact,
        ..SolverConfig::default()
    }
}

#[test]
fn test_heisenberg_singlet() {
    let h = parse_hamiltonian("n=2\n1 XX\n1 YY\n1 ZZ\n").unwrap();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let singlet = vec![
        Complex64::new(0.0, 0.0),
        Complex64::new(s, 0.0),
        Complex64::new(-s, 0.0),
        Complex64::new(0.0, 0.0),
    ];
    let psi = GuidingState::dense(singlet).unwrap();
    let est = solve_guided(&h, &psi, &exact_cfg(0.25, 1.0)).unwrap();
    assert_eq!(est.kappa, 3.0);
    assert!(
        (est.e_star + 3.0).abs() <= 0.25 * 3.0,
        "E* = {}",
        est.e_star
    );
    assert!(!est.no_yes_found);
}

#[test]
fn test_guided_random_instances() {
    let eps = 0.5;
    for seed in 0..10u64 {
        let mut rng = stream(100 + seed, 0);
        let h = random_local_hamiltonian(3, 2, 3, false, &mut rng).unwrap();
        let op = DenseOperator::new(dense_hamiltonian(&h).unwrap()).unwrap();
        let e0 = exact_ground_energy(&op);
        let kappa = h.decomposition().unwrap().kappa();
        let amps = random_unit_vector(8, &mut rng);
        let overlap = exact_overlap(&op, &amps, eps / 2.0 * kappa);
        let psi = GuidingState::dense(amps).unwrap();
        let est = solve_guided(&h, &psi, &exact_cfg(eps, overlap.min(1.0))).unwrap();
        assert!(
            (est.e_star - e0).abs() <= eps * kappa,
            "seed {seed}: E* {} vs E0 {e0}",
            est.e_star
        );
        assert_eq!(est.intervals, interval_count(eps));
    }
}

#[test]
fn test_dense_estimates_match_independent_filter_evaluation() {
    let mut rng = stream(7, 0);
    let h = random_local_hamiltonian(3, 2, 4, false, &mut rng).unwrap();
    let decomp = h.decomposition().unwrap();
    let amps = random_unit_vector(8, &mut rng);
    let psi = GuidingState::dense(amps.clone()).unwrap();
    let cfg = exact_cfg(1.0, 0.9);
    let tester = ThresholdTester::new(&decomp, &psi, &cfg).unwrap();
    let shifted = reconstruct(&decomp.shift_rescale().unwrap()).unwrap();
    for t in 0..tester.intervals() {
        let rec = tester.test(t).unwrap();
        let p = tester.polynomial(t).unwrap();
        // monomial form in the eigenbasis
        let eig = exact_function_sandwich(&shifted, &amps, |x| eval_poly(&p, x), &amps);
        assert!((rec.estimate - eig).norm() <= 1e-9, "t={t}");
        // Horner on the matrix itself
        let m = polynomial_of_matrix(shifted.matrix(), &p.coeffs());
        assert!(
            (rec.estimate - sandwich(&amps, &m, &amps)).norm() <= 1e-7,
            "t={t}"
        );
        assert_eq!(rec.yes, rec.estimate.norm() >= cfg.chi.powi(2) / 2.0);
    }
}

#[test]
fn test_unguided_instances() {
    let zz = parse_hamiltonian("n=2\n1 ZZ\n").unwrap();
    let est = solve_unguided(&zz, &exact_cfg(0.25, 1.0)).unwrap();
    assert!((est.e_star + 1.0).abs() <= 0.25);
    assert!((est.chi - 0.5).abs() < 1e-15);

    let eps = 0.5;
    for seed in 0..5u64 {
        let h = random_local_hamiltonian(3, 2, 3, false, &mut stream(200 + seed, 0)).unwrap();
        let op = DenseOperator::new(dense_hamiltonian(&h).unwrap()).unwrap();
        let e0 = exact_ground_energy(&op);
        let est = solve_unguided(&h, &exact_cfg(eps, 1.0)).unwrap();
        assert!(
            (est.e_star - e0).abs() <= eps * est.kappa,
            "seed {seed}: E* {} vs E0 {e0}",
            est.e_star
        );
    }
}

#[test]
fn test_strict_policy_hits_cost_cap() {
    let h = parse_hamiltonian("n=1\n1 Z\n").unwrap();
    let psi = GuidingState::basis(2, 1).unwrap();
    let cfg = SolverConfig {
        policy: Policy::Strict,
        ..SolverConfig::default()
    };
    match solve_guided(&h, &psi, &cfg) {
        Err(Error::CostCapExceeded {
            predicted_log10,
            cap_log10,
        }) => assert!(predicted_log10 > cap_log10),
        other => panic!("expected cost-cap error, got {other:?}"),
    }
}

#[test]
fn test_decide_verdicts() {
    let h = parse_hamiltonian("n=1\n1 Z\n").unwrap();
    let psi = GuidingState::basis(2, 1).unwrap();
    let cfg = exact_cfg(0.25, 1.0);
    let low = decide(&h, Some(&psi), -1.0, -0.5, &cfg).unwrap();
    assert_eq!(low.verdict, Verdict::Low);
    let high = decide(&h, Some(&psi), -1.6, -1.1, &cfg).unwrap();
    assert_eq!(high.verdict, Verdict::High);
    assert!(decide(&h, Some(&psi), 0.0, 0.1, &cfg).is_err());
    let unguided = decide(&h, None, -1.0, -0.5, &cfg).unwrap();
    assert_eq!(unguided.verdict, Verdict::Low);
}
