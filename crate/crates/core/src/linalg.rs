//! Small dense helpers shared by the physics modules.
//!
//! Everything here works on `nalgebra` dynamic matrices. Phase-space vectors
//! are ordered `(q_1..q_n, p_1..p_n)`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{GdsError, Result};

pub type RealMatrix = DMatrix<f64>;
pub type RealVector = DVector<f64>;
pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Largest absolute entry.
pub fn max_abs(m: &RealMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Largest entry modulus of a complex matrix.
pub fn max_abs_c(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.norm()))
}

pub fn commutator(a: &RealMatrix, b: &RealMatrix) -> RealMatrix {
    a * b - b * a
}

pub fn symmetrize(m: &RealMatrix) -> RealMatrix {
    (m + m.transpose()) * 0.5
}

pub fn antisymmetrize(m: &RealMatrix) -> RealMatrix {
    (m - m.transpose()) * 0.5
}

pub fn hermitize(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

pub fn to_complex(m: &RealMatrix) -> ComplexMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

pub fn ensure_square(m: &RealMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(GdsError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

/// Checks that `m` is an even-dimensional square matrix and returns the mode count.
pub fn phase_space_modes(m: &RealMatrix) -> Result<usize> {
    let dim = ensure_square(m)?;
    if dim == 0 {
        return Err(GdsError::ZeroModes);
    }
    if dim % 2 != 0 {
        return Err(GdsError::InvalidParameter(format!(
            "phase-space dimension must be even, got {dim}"
        )));
    }
    Ok(dim / 2)
}

/// Rejects matrices whose asymmetry exceeds `tol` relative to their size.
pub fn ensure_symmetric(m: &RealMatrix, tol: f64) -> Result<()> {
    ensure_square(m)?;
    let asymmetry = max_abs(&(m - m.transpose()));
    if asymmetry > tol * max_abs(m).max(1.0) {
        return Err(GdsError::NotSymmetric { asymmetry });
    }
    Ok(())
}

pub fn sym_eigenvalues(m: &RealMatrix) -> RealVector {
    SymmetricEigen::new(symmetrize(m)).eigenvalues
}

pub fn min_sym_eigenvalue(m: &RealMatrix) -> f64 {
    sym_eigenvalues(m).min()
}

/// Eigenvalues of the Hermitian part of `m`.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> RealVector {
    SymmetricEigen::new(hermitize(m)).eigenvalues
}

pub fn min_hermitian_eigenvalue(m: &ComplexMatrix) -> f64 {
    hermitian_eigenvalues(m).min()
}

/// Positive-definiteness with the threshold `min eig > rel_tol * ||m||`.
pub fn ensure_positive_definite(m: &RealMatrix, rel_tol: f64) -> Result<()> {
    let evals = sym_eigenvalues(m);
    let scale = evals.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    let min = evals.min();
    if !(min > rel_tol * scale) || scale == 0.0 {
        return Err(GdsError::NotPositiveDefinite {
            min_eigenvalue: min,
        });
    }
    Ok(())
}

/// Symmetric square root and inverse square root of a positive-definite matrix.
pub fn sym_sqrt_pair(m: &RealMatrix) -> (RealMatrix, RealMatrix) {
    let eig = SymmetricEigen::new(symmetrize(m));
    let q = &eig.eigenvectors;
    let root = RealMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    let inv_root = RealMatrix::from_diagonal(&eig.eigenvalues.map(|x| 1.0 / x.sqrt()));
    (q * root * q.transpose(), q * inv_root * q.transpose())
}

/// `diag(v) ⊕ diag(v)`.
pub fn doubled_diagonal(values: &[f64]) -> RealMatrix {
    let n = values.len();
    let mut m = RealMatrix::zeros(2 * n, 2 * n);
    for (j, &v) in values.iter().enumerate() {
        m[(j, j)] = v;
        m[(n + j, n + j)] = v;
    }
    m
}

/// Largest real part of the spectrum.
pub fn spectral_abscissa(m: &RealMatrix) -> f64 {
    m.complex_eigenvalues()
        .iter()
        .fold(f64::NEG_INFINITY, |acc, z| acc.max(z.re))
}

/// Matrix exponential (Padé approximant with scaling and squaring).
pub fn expm(m: &RealMatrix) -> RealMatrix {
    m.clone().exp()
}

pub fn invert(m: &RealMatrix) -> Result<RealMatrix> {
    m.clone()
        .try_inverse()
        .ok_or_else(|| GdsError::Singular("matrix inversion failed".into()))
}

/// Real outer product helper for complex vectors: `Σ_k l_k l_k†`.
pub fn outer_sum(vectors: &[ComplexVector], dim: usize) -> ComplexMatrix {
    let mut acc = ComplexMatrix::zeros(dim, dim);
    for l in vectors {
        acc += l * l.adjoint();
    }
    acc
}

pub fn real_part(m: &ComplexMatrix) -> RealMatrix {
    m.map(|z| z.re)
}

pub fn imag_part(m: &ComplexMatrix) -> RealMatrix {
    m.map(|z| z.im)
}

pub fn vec_max_abs_c(v: &ComplexVector) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.norm()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_pair_inverts() {
        let m = RealMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let (r, ri) = sym_sqrt_pair(&m);
        assert!(max_abs(&(&r * &r - &m)) < 1e-14);
        assert!(max_abs(&(&r * &ri - RealMatrix::identity(2, 2))) < 1e-14);
    }

    #[test]
    fn abscissa_of_damped_rotation() {
        let a = RealMatrix::from_row_slice(2, 2, &[-0.1, 1.0, -1.0, -0.1]);
        assert!((spectral_abscissa(&a) + 0.1).abs() < 1e-14);
    }

    #[test]
    fn positive_definite_rejects_indefinite() {
        let m = RealMatrix::from_diagonal(&RealVector::from_vec(vec![1.0, -1.0]));
        assert!(matches!(
            ensure_positive_definite(&m, 1e-12),
            Err(GdsError::NotPositiveDefinite { .. })
        ));
    }
}
