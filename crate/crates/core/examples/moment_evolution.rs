//! Relaxation of a displaced vacuum towards the thermal state.

use gds_thermo::gds::GaussianState;
use gds_thermo::linalg::{RealMatrix, RealVector};
use gds_thermo::moments::{integrate_moments, MomentConfig};
use gds_thermo::qdbc::QdbcSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let qdbc = QdbcSpec::single_mode(1.0, 0.2, 1.0, 1.0)?;
    let spec = qdbc.gds_spec(None)?;
    let noise = spec.noise()?;
    let initial = GaussianState::new(RealVector::from_vec(vec![1.0, 0.0]), RealMatrix::identity(2, 2) * 0.5, 1.0)?;
    let traj = integrate_moments(&spec.drift()?, &spec.xi_prime, &noise.d, 1.0, &initial, 40.0, 5000, &MomentConfig::default())?;
    println!("{:>6} {:>10} {:>10} {:>12}", "t", "<q>", "<p>", "V_qq");
    for ((t, m), v) in traj.times.iter().zip(&traj.means).zip(&traj.covariances) {
        println!("{t:>6.1} {:>10.6} {:>10.6} {:>12.9}", m[0], m[1], v[(0, 0)]);
    }
    println!("thermal V_qq = {:.9}", qdbc.profile()?.v_th[(0, 0)]);
    Ok(())
}
