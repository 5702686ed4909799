//! Symplectic normal form of a random two-mode covariance matrix.

use gds_thermo::linalg::max_abs;
use gds_thermo::sampling::{random_covariance, seeded};
use gds_thermo::symplectic::{symplectic_defect, williamson, POSITIVE_DEFINITE_TOL};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let v = random_covariance(2, 0.1, &mut seeded(42));
    let w = williamson(&v, POSITIVE_DEFINITE_TOL)?;
    println!("V =\n{v:.6}");
    println!("symplectic eigenvalues: {:?}", w.spectrum);
    println!("|S J S^T - J|_max       = {:.2e}", symplectic_defect(&w.symplectic));
    println!("|S^-1 (k+k) S^-T - V|   = {:.2e}", max_abs(&(w.reconstruct() - &v)));
    Ok(())
}
