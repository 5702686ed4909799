use gds_thermo::error::GdsError;
use gds_thermo::fock::{
    build_canonical_ops, build_hamiltonian, compare_with_gaussian, gibbs_check, gibbs_state, planck_populations,
    OracleConfig,
};
use gds_thermo::gds::GdsSpec;
use gds_thermo::linalg::RealMatrix;
use gds_thermo::qdbc::{build_lindblad_vectors, QdbcSpec};
use gds_thermo::thermal::{commuting_heff, planck_occupation};
use num_complex::Complex64;

const ALPHA: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn run(spec: &QdbcSpec, cutoff: usize, t_max: f64, alphas: &[Complex64]) -> gds_thermo::fock::OracleComparison {
    let gds = spec.gds_spec(None).unwrap();
    let config = OracleConfig {
        cutoff,
        t_max,
        ..OracleConfig::default()
    };
    compare_with_gaussian(&gds, alphas, &config, 10).unwrap()
}

#[test]
fn hot_mode_within_cutoff() {
    // ħβω = ln(3/2) puts n̄ at exactly 2.
    let spec = QdbcSpec::single_mode(1.0, 0.2, 1.5f64.ln(), 1.0).unwrap();
    assert!((planck_occupation(1.5f64.ln()) - 2.0).abs() < 1e-12);
    let cmp = run(&spec, 40, 10.0, &[Complex64::from(ALPHA)]);
    assert!(cmp.max_mean_deviation <= 1e-4, "{}", cmp.max_mean_deviation);
    assert!(cmp.max_cov_deviation <= 1e-4, "{}", cmp.max_cov_deviation);
    assert!(cmp.fock.max_trace_drift <= 1e-8);
    assert!(cmp.fock.min_eigenvalue >= -1e-8);
}

#[test]
fn reduced_planck_constant() {
    let spec = QdbcSpec::single_mode(1.3, 0.4, 2.0, 0.5).unwrap();
    let cmp = run(&spec, 30, 3.0, &[Complex64::new(0.5, -0.3)]);
    assert!(cmp.max_mean_deviation.max(cmp.max_cov_deviation) <= 1e-6);
    let check = gibbs_check(&spec.gds_spec(None).unwrap(), &spec.thermal, 30).unwrap();
    assert!(check.stationarity_residual <= 1e-10);
    assert!(check.detailed_balance.defect() <= 1e-8);
}

#[test]
fn squeezed_single_mode() {
    let b = RealMatrix::from_row_slice(2, 2, &[2.0, 0.4, 0.4, 0.7]);
    let spec = QdbcSpec::constant(b, 1.5, 1.0, vec![0.3]).unwrap();
    let cmp = run(&spec, 40, 5.0, &[Complex64::new(0.4, 0.2)]);
    assert!(cmp.max_mean_deviation.max(cmp.max_cov_deviation) <= 1e-4);
    let check = gibbs_check(&spec.gds_spec(None).unwrap(), &spec.thermal, 40).unwrap();
    assert!(check.stationarity_residual <= 1e-5, "{}", check.stationarity_residual);
    assert!(check.detailed_balance.defect() <= 1e-6, "{:?}", check.detailed_balance);
}

#[test]
fn two_modes() {
    let b = RealMatrix::from_row_slice(
        4,
        4,
        &[1.0, 0.2, 0.0, 0.1, 0.2, 1.4, 0.1, 0.0, 0.0, 0.1, 1.0, 0.0, 0.1, 0.0, 0.0, 1.2],
    );
    let spec = QdbcSpec::constant(b, 3.0, 1.0, vec![0.3, 0.5]).unwrap();
    let cmp = run(&spec, 12, 1.0, &[Complex64::new(0.3, 0.0), Complex64::new(0.0, 0.2)]);
    assert!(cmp.max_mean_deviation.max(cmp.max_cov_deviation) <= 1e-4);
}

#[test]
fn gibbs_residual_shrinks_with_cutoff() {
    let spec = QdbcSpec::single_mode(1.0, 0.2, 0.5, 1.0).unwrap();
    let gds = spec.gds_spec(None).unwrap();
    let residuals: Vec<f64> = [20, 30, 40]
        .iter()
        .map(|&n| gibbs_check(&gds, &spec.thermal, n).unwrap().stationarity_residual)
        .collect();
    // Roundoff sets a floor once the truncation error falls below it.
    let floor = 1e-14;
    for w in residuals.windows(2) {
        assert!(w[1] <= w[0] || w[1] <= floor, "{residuals:?}");
    }
    assert!(residuals[2] <= 1e-5);
}

#[test]
fn planck_populations_of_gibbs_state() {
    // Each case satisfies N ≥ 20 (n̄ + 1) at N = 40.
    for (omega, beta) in [(1.0, 1.0), (0.7, 1.0), (2.0, 2.5)] {
        let ops = build_canonical_ops(1, 40, 1.0).unwrap();
        let h = build_hamiltonian(&(RealMatrix::identity(2, 2) * omega), None, &ops).unwrap();
        let g = gibbs_state(&h, beta);
        for (p, e) in g.populations.iter().zip(planck_populations(omega * beta, 20)) {
            assert!((p - e).abs() <= 1e-8);
        }
    }
}

#[test]
fn unitary_commuting_generator_is_balanced() {
    let spec = QdbcSpec::single_mode(1.0, 0.2, 1.0, 1.0).unwrap();
    let profile = spec.profile().unwrap();
    for lambda in [0.0, 0.5, -1.3] {
        let b_prime = commuting_heff(&profile, &[lambda]).unwrap();
        let gds = GdsSpec::centered(1.0, b_prime, Vec::new()).unwrap();
        let check = gibbs_check(&gds, &spec.thermal, 30).unwrap();
        assert!(check.detailed_balance.defect() <= 1e-10);
        assert!(check.stationarity_residual <= 1e-12);
    }
}

#[test]
fn broken_ratio_detected() {
    let spec = QdbcSpec::single_mode(1.0, 0.2, 1.0, 1.0).unwrap();
    let set = build_lindblad_vectors(&spec).unwrap();
    for factor in [0.9, 1.1] {
        let vectors = gds_thermo::qdbc::perturb_ratio(&set, factor);
        let gds = GdsSpec::centered(1.0, spec.thermal.b.clone(), vectors).unwrap();
        let check = gibbs_check(&gds, &spec.thermal, 40).unwrap();
        assert!(check.detailed_balance.defect() > 1e-3);
        assert!(check.stationarity_residual > 1e-3);
    }
}

#[test]
fn budget_and_stability_errors() {
    assert!(matches!(build_canonical_ops(3, 17, 1.0), Err(GdsError::CutoffBudget { .. })));
    let spec = QdbcSpec::single_mode(1.0, 0.2, 1.0, 1.0).unwrap();
    let config = OracleConfig {
        cutoff: 40,
        dt: 1.0,
        t_max: 200.0,
        ..OracleConfig::default()
    };
    let err = compare_with_gaussian(&spec.gds_spec(None).unwrap(), &[Complex64::from(ALPHA)], &config, 1).unwrap_err();
    assert!(matches!(err, GdsError::TraceDrift { .. }), "{err:?}");
}
