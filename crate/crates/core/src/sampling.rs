//! Seeded random models for sweeps and property checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::linalg::{doubled_diagonal, expm, RealMatrix};
use crate::qdbc::QdbcSpec;
use crate::symplectic::j_matrix;

pub type SpecRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SpecRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn uniform_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> RealMatrix {
    RealMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..=1.0))
}

/// `B = MᵀM + ½I` with `M` uniform on `[−1, 1]`.
pub fn random_hessian<R: Rng>(n: usize, rng: &mut R) -> RealMatrix {
    let m = uniform_matrix(2 * n, 2 * n, rng);
    m.transpose() * &m + RealMatrix::identity(2 * n, 2 * n) * 0.5
}

/// `exp(J H)` for a random symmetric `H` of norm about `scale`.
pub fn random_symplectic<R: Rng>(n: usize, scale: f64, rng: &mut R) -> RealMatrix {
    let m = uniform_matrix(2 * n, 2 * n, rng);
    let h = (&m + m.transpose()) * (0.5 * scale);
    expm(&(j_matrix(n) * h))
}

/// `Sᵀ (κ ⊕ κ) S` with `κ_j ∈ [½ + margin, 3]`.
pub fn random_covariance<R: Rng>(n: usize, margin: f64, rng: &mut R) -> RealMatrix {
    let s = random_symplectic(n, 0.7, rng);
    let kappa: Vec<f64> = (0..n).map(|_| rng.random_range(0.5 + margin..=3.0)).collect();
    let v = s.transpose() * doubled_diagonal(&kappa) * s;
    (&v + v.transpose()) * 0.5
}

/// QDBC model with `n ∈ {1, 2, 3}`, `β ∈ [0.1, 10]`, `γ̄_j ∈ (0, 1]`, `ħ = 1`.
pub fn random_qdbc_spec<R: Rng>(rng: &mut R) -> Result<QdbcSpec> {
    let n = rng.random_range(1..=3);
    random_qdbc_spec_with_modes(n, rng)
}

pub fn random_qdbc_spec_with_modes<R: Rng>(n: usize, rng: &mut R) -> Result<QdbcSpec> {
    let b = random_hessian(n, rng);
    let beta = rng.random_range(0.1..=10.0);
    let gamma = (0..n).map(|_| 1.0 - rng.random_range(0.0..1.0)).collect();
    QdbcSpec::constant(b, beta, 1.0, gamma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::is_symplectic;

    #[test]
    fn reproducible_and_valid() {
        let a = random_qdbc_spec(&mut seeded(7)).unwrap();
        let b = random_qdbc_spec(&mut seeded(7)).unwrap();
        assert_eq!(a.thermal.b, b.thermal.b);
        let mut rng = seeded(1);
        for n in 1..=3 {
            assert!(is_symplectic(&random_symplectic(n, 0.7, &mut rng), 1e-10));
        }
    }
}
