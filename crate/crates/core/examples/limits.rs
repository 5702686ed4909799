//! High-temperature, low-temperature and diffusive limits of the detailed-balance noise.

use gds_thermo::qdbc::{limit_regimes, QdbcSpec, Regime};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for beta in [1e-3, 1e-2, 1e-1] {
        let r = limit_regimes(&QdbcSpec::single_mode(1.0, 0.2, beta, 1.0)?, &Regime::High)?;
        println!(
            "high  beta {beta:<6} V error {:.3e}  (x^2/12 = {:.3e})  D error {:.3e}",
            r.v_relative_error.unwrap_or(f64::NAN),
            beta * beta / 12.0,
            r.d_relative_error.unwrap_or(f64::NAN)
        );
    }
    for beta in [5.0, 15.0, 30.0] {
        let r = limit_regimes(&QdbcSpec::single_mode(1.0, 0.2, beta, 1.0)?, &Regime::Low)?;
        println!(
            "low   beta {beta:<6} k - 1/2 {:.3e}  (e^-x = {:.3e})  D error {:.3e}",
            r.kappa_excess[0],
            (-beta).exp(),
            r.d_relative_error.unwrap_or(f64::NAN)
        );
    }
    let r = limit_regimes(&QdbcSpec::single_mode(1.0, 0.2, 1.0, 1.0)?, &Regime::Diffusive { c_bar: vec![0.1] })?;
    println!("diffusive abscissa {:.1e}, stationary state: {}", r.abscissa, r.stationary);
    Ok(())
}
