//! Cross-check the Gaussian moment equations against a truncated Fock-space master equation.

use gds_thermo::fock::{compare_with_gaussian, gibbs_check, OracleConfig};
use gds_thermo::qdbc::QdbcSpec;
use num_complex::Complex64;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let qdbc = QdbcSpec::single_mode(1.0, 0.2, 1.0, 1.0)?;
    let spec = qdbc.gds_spec(None)?;
    let config = OracleConfig::default();
    let alpha = Complex64::from(std::f64::consts::FRAC_1_SQRT_2);
    let cmp = compare_with_gaussian(&spec, &[alpha], &config, 100)?;
    for (k, t) in cmp.fock.times.iter().enumerate() {
        println!(
            "t {t:>5.1}  <q> fock {:+.8} gauss {:+.8}  V_qq fock {:.8} gauss {:.8}",
            cmp.fock.means[k][0], cmp.gaussian_means[k][0], cmp.fock.covariances[k][(0, 0)], cmp.gaussian_covariances[k][(0, 0)]
        );
    }
    println!("max deviation: mean {:.2e}, covariance {:.2e}", cmp.max_mean_deviation, cmp.max_cov_deviation);
    let check = gibbs_check(&spec, &qdbc.thermal, config.cutoff)?;
    println!("Gibbs residual {:.2e}", check.stationarity_residual);
    println!("detailed-balance defect {:.2e}", check.detailed_balance.defect());
    Ok(())
}
