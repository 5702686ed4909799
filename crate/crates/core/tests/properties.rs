use gds_thermo::gds::{decoherence_matrix, drift_matrix, u_commutation_defect, GaussianState};
use gds_thermo::linalg::{commutator, max_abs, min_hermitian_eigenvalue, ComplexMatrix, ComplexVector, RealMatrix, RealVector};
use gds_thermo::moments::{evolve_cov, evolve_mean, integrate_moments, is_hurwitz, lyapunov_solve, MomentConfig};
use gds_thermo::qdbc::{build_lindblad_vectors, build_noise, perturb_ratio, verify_congruence, QdbcSpec};
use gds_thermo::sampling::{random_covariance, random_hessian, random_qdbc_spec, random_qdbc_spec_with_modes, random_symplectic, seeded};
use gds_thermo::symplectic::{hamiltonian_flow, standard_form, symplectic_defect, williamson, POSITIVE_DEFINITE_TOL};
use gds_thermo::thermal::{spectra_relation, thermal_audit, DEFAULT_AUDIT_TOL};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

fn stationary(spec: &QdbcSpec, vectors: Vec<ComplexVector>) -> RealMatrix {
    let noise = decoherence_matrix(&vectors, 2 * spec.modes(), spec.hbar()).unwrap();
    let a = drift_matrix(&spec.thermal.b, &noise.c).unwrap();
    lyapunov_solve(&a, &(&noise.d / noise.hbar)).unwrap()
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn returned_matrices_are_symplectic(seed in any::<u64>(), n in 1usize..=4) {
        let mut rng = seeded(seed);
        let v = random_covariance(n, 0.01, &mut rng);
        let w = williamson(&v, POSITIVE_DEFINITE_TOL).unwrap();
        prop_assert!(symplectic_defect(&w.symplectic) <= 1e-10);
        let b = random_hessian(n, &mut rng);
        let flow = hamiltonian_flow(&b, rng.random_range(-10.0..=10.0)).unwrap();
        prop_assert!(symplectic_defect(&flow) <= 1e-10, "{}", symplectic_defect(&flow));
    }

    #[test]
    fn flow_group_law(seed in any::<u64>(), n in 1usize..=3, t in -10.0f64..=10.0, s in -10.0f64..=10.0) {
        let b = random_hessian(n, &mut seeded(seed));
        let lhs = hamiltonian_flow(&b, t + s).unwrap();
        let rhs = hamiltonian_flow(&b, t).unwrap() * hamiltonian_flow(&b, s).unwrap();
        prop_assert!(max_abs(&(lhs - rhs)) <= 1e-9);
    }

    #[test]
    fn williamson_reconstructs(seed in any::<u64>(), n in 1usize..=4) {
        let v = random_covariance(n, 0.0, &mut seeded(seed));
        let w = williamson(&v, POSITIVE_DEFINITE_TOL).unwrap();
        prop_assert!(max_abs(&(w.reconstruct() - &v)) <= 1e-9 * max_abs(&v).max(1.0));
        let s = &w.symplectic;
        let normal = s * &v * s.transpose();
        prop_assert!(max_abs(&(normal - w.normal_form())) <= 1e-9 * max_abs(&v).max(1.0));
    }

    #[test]
    fn decoherence_matrix_is_psd(seed in any::<u64>(), n in 1usize..=3, k in 1usize..=6) {
        let mut rng = seeded(seed);
        let vectors: Vec<ComplexVector> = (0..k)
            .map(|_| ComplexVector::from_fn(2 * n, |_, _| Complex64::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0))))
            .collect();
        let noise = decoherence_matrix(&vectors, 2 * n, rng.random_range(0.1..=2.0)).unwrap();
        let scale = noise.gamma.iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(min_hermitian_eigenvalue(&noise.gamma) >= -1e-12 * scale);
        prop_assert_eq!(noise.d.clone(), noise.d.transpose());
        prop_assert_eq!(noise.c.clone(), -noise.c.transpose());
    }

    #[test]
    fn u_matrix_commutes(seed in any::<u64>(), n in 1usize..=3) {
        let v = random_covariance(n, 0.05, &mut seeded(seed));
        let state = GaussianState::new(RealVector::zeros(2 * n), v.clone(), 1.0).unwrap();
        let u = state.u_matrix().unwrap();
        prop_assert!(u_commutation_defect(&v, &u) <= 1e-9);
    }

    #[test]
    fn wigner_normalized(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let hbar = rng.random_range(0.5..=2.0);
        let v = random_covariance(1, 0.0, &mut rng);
        let mean = RealVector::from_vec(vec![rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)]);
        let state = GaussianState::new(mean.clone(), v.clone(), hbar).unwrap();
        let kappa = gds_thermo::linalg::sym_eigenvalues(&v).max();
        let half = 8.0 * (hbar * kappa).sqrt();
        let m = 400;
        let h = 2.0 * half / m as f64;
        let mut total = 0.0;
        for i in 0..=m {
            for j in 0..=m {
                let x = RealVector::from_vec(vec![mean[0] - half + i as f64 * h, mean[1] - half + j as f64 * h]);
                let wi = if i == 0 || i == m { 0.5 } else { 1.0 };
                let wj = if j == 0 || j == m { 0.5 } else { 1.0 };
                total += wi * wj * state.wigner(&x).unwrap();
            }
        }
        prop_assert!((total * h * h - 1.0).abs() <= 1e-6, "{}", total * h * h);
    }
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn audit_passes_iff_thermalizes(seed in any::<u64>()) {
        let spec = random_qdbc_spec(&mut seeded(seed)).unwrap();
        let profile = spec.profile().unwrap();
        let set = build_lindblad_vectors(&spec).unwrap();
        let noise = build_noise(&spec).unwrap();
        prop_assert!(thermal_audit(&noise, &profile.v_th, DEFAULT_AUDIT_TOL).unwrap().verdict);
        prop_assert!(max_abs(&(stationary(&spec, set.vectors.clone()) - &profile.v_th)) <= 1e-8);

        // Lowering the gain keeps the drift Hurwitz; the shift in V is of order n̄.
        let nbar = profile.occupations.iter().cloned().fold(0.0, f64::max);
        prop_assume!(nbar > 1e-4);
        let broken = perturb_ratio(&set, 0.6);
        let bnoise = decoherence_matrix(&broken, 2 * spec.modes(), spec.hbar()).unwrap();
        let v = stationary(&spec, broken);
        prop_assert!(max_abs(&(&v - &profile.v_th)) > 1e-8);
        prop_assert!(!thermal_audit(&bnoise, &profile.v_th, DEFAULT_AUDIT_TOL).unwrap().verdict);
    }

    #[test]
    fn lindblad_vectors_reproduce_noise(seed in any::<u64>()) {
        let spec = random_qdbc_spec(&mut seeded(seed)).unwrap();
        let from_vectors = build_lindblad_vectors(&spec).unwrap().noise().unwrap();
        let direct = build_noise(&spec).unwrap();
        prop_assert!(max_abs(&(&from_vectors.d - &direct.d)) <= 1e-10);
        prop_assert!(max_abs(&(&from_vectors.c - &direct.c)) <= 1e-10);
    }

    #[test]
    fn unitary_mixing_preserves_noise(seed in any::<u64>(), n in 1usize..=2) {
        let mut rng = seeded(seed);
        let spec = random_qdbc_spec_with_modes(n, &mut rng).unwrap();
        let set = build_lindblad_vectors(&spec).unwrap();
        let k = set.vectors.len();
        let h = ComplexMatrix::from_fn(k, k, |_, _| Complex64::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)));
        let herm = (&h + h.adjoint()) * Complex64::from(0.5);
        let w = (herm * Complex64::i()).exp();
        let mixed = decoherence_matrix(&set.mixed(&w).unwrap(), 2 * n, spec.hbar()).unwrap();
        let original = set.noise().unwrap();
        prop_assert!(max_abs(&(&mixed.d - &original.d)) <= 1e-10);
        prop_assert!(max_abs(&(&mixed.c - &original.c)) <= 1e-10);
    }

    #[test]
    fn congruence_extends_to_gamma(seed in any::<u64>(), t in -5.0f64..=5.0) {
        let spec = random_qdbc_spec(&mut seeded(seed)).unwrap();
        let noise = build_noise(&spec).unwrap();
        let report = verify_congruence(&noise, &spec.thermal, &[t]).unwrap();
        prop_assert!(report.gamma_defect <= 1e-9, "{}", report.gamma_defect);
    }

    #[test]
    fn thermal_covariance_is_function_of_jb(seed in any::<u64>()) {
        let spec = random_qdbc_spec(&mut seeded(seed)).unwrap();
        let n = spec.modes();
        let j = standard_form(n).unwrap().into_matrix();
        let profile = spec.profile().unwrap();
        let defect = max_abs(&commutator(&(&j * &spec.thermal.b), &(&profile.v_th * &j)));
        let scale = max_abs(&spec.thermal.b).max(1.0) * max_abs(&profile.v_th).max(1.0);
        prop_assert!(defect <= 1e-10 * scale, "{defect}");
    }

    #[test]
    fn equilibrium_independent_of_coupling(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let spec = random_qdbc_spec(&mut rng).unwrap();
        let other_gamma: Vec<f64> = spec.gamma().iter().map(|g| g * rng.random_range(0.2..=0.8)).collect();
        let other = QdbcSpec::constant(spec.thermal.b.clone(), spec.beta(), spec.hbar(), other_gamma).unwrap();
        let (p1, p2) = (spec.profile().unwrap(), other.profile().unwrap());
        prop_assert!(max_abs(&(&p1.v_th - &p2.v_th)) <= 1e-12);
        let (n1, n2) = (build_noise(&spec).unwrap(), build_noise(&other).unwrap());
        prop_assert!(max_abs(&(&n1.d - &n2.d)) > 1e-6);
        prop_assert!(max_abs(&(&n1.c - &n2.c)) > 1e-6);
        prop_assert!(max_abs(&(stationary(&other, build_lindblad_vectors(&other).unwrap().vectors) - &p1.v_th)) <= 1e-8);
    }

    #[test]
    fn spectral_identity(seed in any::<u64>()) {
        let spec = random_qdbc_spec(&mut seeded(seed)).unwrap();
        let rel = spectra_relation(&build_noise(&spec).unwrap(), &spec.profile().unwrap()).unwrap();
        prop_assert!(rel.max_identity_defect() <= 1e-10, "{}", rel.max_identity_defect());
    }

    #[test]
    fn lyapunov_output_symmetric(seed in any::<u64>()) {
        let spec = random_qdbc_spec(&mut seeded(seed)).unwrap();
        let noise = build_noise(&spec).unwrap();
        let a = drift_matrix(&spec.thermal.b, &noise.c).unwrap();
        let v = lyapunov_solve(&a, &noise.d).unwrap();
        prop_assert!(max_abs(&(&v - v.transpose())) <= 1e-12);
    }
}

proptest! {
    #![proptest_config(config(8))]

    #[test]
    fn long_time_covariance_matches_lyapunov(seed in any::<u64>(), n in 1usize..=2) {
        let mut rng = seeded(seed);
        let b = random_hessian(n, &mut rng);
        let gamma = (0..n).map(|_| rng.random_range(0.3..=1.0)).collect();
        let spec = QdbcSpec::constant(b, rng.random_range(0.1..=10.0), 1.0, gamma).unwrap();
        let noise = build_noise(&spec).unwrap();
        let a = drift_matrix(&spec.thermal.b, &noise.c).unwrap();
        let abscissa = is_hurwitz(&a, 1e-10).abscissa;
        let t = 40.0 / abscissa.abs();
        let cfg = MomentConfig { dt: 1e-2, ..MomentConfig::default() };
        let v0 = RealMatrix::identity(2 * n, 2 * n) * 0.5;
        let v = evolve_cov(&a, &noise.d, &v0, t, 1.0, &cfg).unwrap();
        let target = lyapunov_solve(&a, &noise.d).unwrap();
        prop_assert!(max_abs(&(v - target)) <= 1e-6);
    }

    #[test]
    fn evolution_stays_bona_fide(seed in any::<u64>()) {
        let spec = random_qdbc_spec(&mut seeded(seed)).unwrap();
        let n = spec.modes();
        let noise = build_noise(&spec).unwrap();
        let a = drift_matrix(&spec.thermal.b, &noise.c).unwrap();
        let initial = GaussianState::vacuum(n, 1.0).unwrap();
        let cfg = MomentConfig::default();
        let traj = integrate_moments(&a, &RealVector::zeros(2 * n), &noise.d, 1.0, &initial, 5.0, 250, &cfg).unwrap();
        for v in &traj.covariances {
            let kappa = williamson(v, POSITIVE_DEFINITE_TOL).unwrap().spectrum;
            prop_assert!(kappa.iter().all(|k| *k >= 0.5 - 1e-8));
        }
    }
}

#[test]
fn closed_form_mean_matches_rk4() {
    let spec = QdbcSpec::single_mode(1.0, 0.2, 1.0, 1.0).unwrap();
    let noise = build_noise(&spec).unwrap();
    let a = drift_matrix(&spec.thermal.b, &noise.c).unwrap();
    let xi = RealVector::from_vec(vec![0.3, -0.2]);
    let mean0 = RealVector::from_vec(vec![1.0, 0.5]);
    let initial = GaussianState::new(mean0.clone(), RealMatrix::identity(2, 2) * 0.5, 1.0).unwrap();
    let traj = integrate_moments(&a, &xi, &noise.d, 1.0, &initial, 10.0, 100, &MomentConfig::default()).unwrap();
    let mut worst: f64 = 0.0;
    for (t, m) in traj.times.iter().zip(&traj.means) {
        let exact = evolve_mean(&a, &xi, &mean0, *t).unwrap();
        worst = worst.max((exact - m).amax());
    }
    assert!(worst <= 1e-8, "{worst}");
}

#[test]
fn random_symplectic_has_unit_determinant() {
    let mut rng = seeded(3);
    for n in 1..=4 {
        let s = random_symplectic(n, 0.7, &mut rng);
        assert!((s.determinant() - 1.0).abs() < 1e-9);
    }
}
