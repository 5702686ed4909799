//! Decide whether a set of Lindblad vectors thermalizes a two-mode system.

use gds_thermo::gds::GdsSpec;
use gds_thermo::linalg::{max_abs, RealMatrix};
use gds_thermo::moments::stationary_moments;
use gds_thermo::qdbc::{build_lindblad_vectors, perturb_ratio, QdbcSpec};
use gds_thermo::thermal::{thermal_audit, DEFAULT_AUDIT_TOL};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let b = RealMatrix::from_row_slice(4, 4, &[
        1.0, 0.2, 0.0, 0.1,
        0.2, 1.4, 0.1, 0.0,
        0.0, 0.1, 1.0, 0.0,
        0.1, 0.0, 0.0, 1.2,
    ]);
    let target = QdbcSpec::constant(b.clone(), 2.0, 1.0, vec![0.3, 0.5])?;
    let v_th = target.profile()?.v_th;
    let set = build_lindblad_vectors(&target)?;

    for (label, vectors) in [("detailed balance", set.vectors.clone()), ("gain lowered 20%", perturb_ratio(&set, 0.8))] {
        let spec = GdsSpec::centered(1.0, b.clone(), vectors)?;
        let noise = spec.noise()?;
        let audit = thermal_audit(&noise, &v_th, DEFAULT_AUDIT_TOL)?;
        let stationary = stationary_moments(&spec, &noise)?;
        println!("{label}:");
        println!("  verdict {}  max residual {:.2e}", audit.verdict, audit.max_residual());
        println!("  |V_stationary - V_th|_max = {:.2e}", max_abs(&(&stationary.cov - &v_th)));
    }
    Ok(())
}
