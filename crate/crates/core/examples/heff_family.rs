//! Effective Hamiltonians commuting with the target leave the stationary state unchanged.

use gds_thermo::gds::GdsSpec;
use gds_thermo::linalg::max_abs;
use gds_thermo::moments::stationary_moments;
use gds_thermo::qdbc::{build_lindblad_vectors, QdbcSpec};
use gds_thermo::sampling::{random_hessian, seeded};
use gds_thermo::thermal::{commuting_heff, heff_commutation_defect};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let b = random_hessian(2, &mut seeded(5));
    let qdbc = QdbcSpec::constant(b.clone(), 1.5, 1.0, vec![0.4, 0.7])?;
    let profile = qdbc.profile()?;
    let vectors = build_lindblad_vectors(&qdbc)?.vectors;
    for lambda in [[0.0, 0.0], [1.0, 1.0], [0.3, -2.0], [5.0, 0.1]] {
        let b_prime = commuting_heff(&profile, &lambda)?;
        let spec = GdsSpec::centered(1.0, b_prime.clone(), vectors.clone())?;
        let state = stationary_moments(&spec, &spec.noise()?)?;
        println!(
            "lambda {lambda:?}: |[JB, JB']| {:.1e}  |V - V_th| {:.1e}",
            heff_commutation_defect(&b, &b_prime),
            max_abs(&(&state.cov - &profile.v_th))
        );
    }
    Ok(())
}
