//! Build detailed-balance noise for the damped oscillator and print its ingredients.

use gds_thermo::qdbc::{build_lindblad_vectors, build_noise, qome_coefficients, verify_eigenoperators, QdbcSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = QdbcSpec::single_mode(1.0, 0.2, 1.0, 1.0)?;
    let noise = build_noise(&spec)?;
    println!("D =\n{:.10}", noise.d);
    println!("C =\n{:.10}", noise.c);
    let set = build_lindblad_vectors(&spec)?;
    for (k, l) in set.vectors.iter().enumerate() {
        println!("l_{} = {:.6}", k + 1, l.transpose());
    }
    let eig = verify_eigenoperators(&set.vectors, &spec.thermal)?;
    println!("eigenvector residual {:.2e}, ratio defect {:.2e}", eig.max_residual(), eig.max_ratio_defect());
    for m in qome_coefficients(&spec)? {
        println!("omega {:.3}  n {:.6}  loss {:.6}  gain {:.6}", m.omega, m.occupation, m.loss_rate, m.gain_rate);
    }
    Ok(())
}
