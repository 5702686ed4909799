//! Gaussian dynamical semigroups: generator data, noise matrices, drift,
//! Gaussian states and their Wigner-function currents.

use num_complex::Complex64;

use crate::error::{GdsError, Result};
use crate::linalg::{
    antisymmetrize, ensure_symmetric, hermitize, imag_part, invert, max_abs, min_hermitian_eigenvalue,
    min_sym_eigenvalue, outer_sum, phase_space_modes, real_part, symmetrize, to_complex,
    ComplexMatrix, ComplexVector, RealMatrix, RealVector, I,
};
use crate::symplectic::{g_function, j_matrix, williamson, POSITIVE_DEFINITE_TOL};

/// Distance above ½ that a symplectic eigenvalue must keep before `U` is formed.
pub const PURE_STATE_MARGIN: f64 = 1e-9;

/// Generator data: `H_eff = ½ xᵀ B′ x + xᵀ J ξ′` and linear Lindblad operators
/// `L_k = l_kᵀ J x`.
#[derive(Debug, Clone, PartialEq)]
pub struct GdsSpec {
    pub hbar: f64,
    pub b_prime: RealMatrix,
    pub xi_prime: RealVector,
    pub lindblad_vectors: Vec<ComplexVector>,
}

impl GdsSpec {
    pub fn new(
        hbar: f64,
        b_prime: RealMatrix,
        xi_prime: RealVector,
        lindblad_vectors: Vec<ComplexVector>,
    ) -> Result<Self> {
        check_hbar(hbar)?;
        let n = phase_space_modes(&b_prime)?;
        ensure_symmetric(&b_prime, 1e-12)?;
        if xi_prime.len() != 2 * n {
            return Err(GdsError::DimensionMismatch {
                expected: 2 * n,
                found: xi_prime.len(),
            });
        }
        for l in &lindblad_vectors {
            if l.len() != 2 * n {
                return Err(GdsError::DimensionMismatch {
                    expected: 2 * n,
                    found: l.len(),
                });
            }
        }
        Ok(Self {
            hbar,
            b_prime: symmetrize(&b_prime),
            xi_prime,
            lindblad_vectors,
        })
    }

    /// Spec with no linear term.
    pub fn centered(hbar: f64, b_prime: RealMatrix, lindblad_vectors: Vec<ComplexVector>) -> Result<Self> {
        let dim = b_prime.nrows();
        Self::new(hbar, b_prime, RealVector::zeros(dim), lindblad_vectors)
    }

    pub fn modes(&self) -> usize {
        self.b_prime.nrows() / 2
    }

    pub fn noise(&self) -> Result<NoiseMatrices> {
        decoherence_matrix(&self.lindblad_vectors, 2 * self.modes(), self.hbar)
    }

    /// `A = J B′ − C J` with this model's own noise.
    pub fn drift(&self) -> Result<RealMatrix> {
        let noise = self.noise()?;
        drift_matrix(&self.b_prime, &noise.c)
    }
}

pub(crate) fn check_hbar(hbar: f64) -> Result<()> {
    if !(hbar > 0.0) || !hbar.is_finite() {
        return Err(GdsError::InvalidParameter(format!(
            "hbar must be positive and finite, got {hbar}"
        )));
    }
    Ok(())
}

/// Decoherence matrix `Γ` with its real and imaginary parts `D = ħ Re Γ`, `C = Im Γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseMatrices {
    pub hbar: f64,
    pub gamma: ComplexMatrix,
    pub d: RealMatrix,
    pub c: RealMatrix,
}

impl NoiseMatrices {
    /// Assembles `Γ = D/ħ + iC` from a diffusion/dissipation pair.
    pub fn from_parts(d: RealMatrix, c: RealMatrix, hbar: f64) -> Result<Self> {
        check_hbar(hbar)?;
        let n = phase_space_modes(&d)?;
        if c.nrows() != 2 * n || c.ncols() != 2 * n {
            return Err(GdsError::DimensionMismatch {
                expected: 2 * n,
                found: c.nrows(),
            });
        }
        let d = symmetrize(&d);
        let c = antisymmetrize(&c);
        let gamma = to_complex(&(&d / hbar)) + to_complex(&c) * I;
        Ok(Self { hbar, gamma, d, c })
    }

    pub fn dim(&self) -> usize {
        self.d.nrows()
    }

    /// `D + iħC`, the matrix whose positivity encodes the fluctuation-dissipation bound.
    pub fn fd_matrix(&self) -> ComplexMatrix {
        to_complex(&self.d) + to_complex(&self.c) * Complex64::new(0.0, self.hbar)
    }
}

/// `Γ = Σ_k l_k l_k†`, `D = ħ Re Γ`, `C = Im Γ`.
pub fn decoherence_matrix(vectors: &[ComplexVector], dim: usize, hbar: f64) -> Result<NoiseMatrices> {
    check_hbar(hbar)?;
    for l in vectors {
        if l.len() != dim {
            return Err(GdsError::DimensionMismatch {
                expected: dim,
                found: l.len(),
            });
        }
    }
    let gamma = hermitize(&outer_sum(vectors, dim));
    let d = symmetrize(&(real_part(&gamma) * hbar));
    let c = antisymmetrize(&imag_part(&gamma));
    Ok(NoiseMatrices { hbar, gamma, d, c })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluctuationDissipation {
    pub min_eigenvalue: f64,
    pub pass: bool,
}

/// Positivity of `D + iħC`, accepted down to `-tol`.
pub fn fluctuation_dissipation_check(noise: &NoiseMatrices, tol: f64) -> FluctuationDissipation {
    let min_eigenvalue = min_hermitian_eigenvalue(&noise.fd_matrix());
    FluctuationDissipation {
        min_eigenvalue,
        pass: min_eigenvalue >= -tol,
    }
}

/// Whether an invertible `C` forces `D > 0` and `Γ > 0`, as it must for any
/// noise matrices that come from Lindblad vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseConsistencyReport {
    pub det_c: f64,
    pub min_eig_d: f64,
    pub min_eig_gamma: f64,
    /// `|det C| > tol`; when false the implication is vacuous.
    pub c_invertible: bool,
    pub consistent: bool,
}

pub fn noise_consistency_check(noise: &NoiseMatrices, tol: f64) -> NoiseConsistencyReport {
    let det_c = noise.c.determinant();
    let min_eig_d = min_sym_eigenvalue(&noise.d);
    let min_eig_gamma = min_hermitian_eigenvalue(&noise.gamma);
    let c_invertible = det_c.abs() > tol;
    let consistent = !c_invertible || (min_eig_d > 0.0 && min_eig_gamma > 0.0);
    NoiseConsistencyReport {
        det_c,
        min_eig_d,
        min_eig_gamma,
        c_invertible,
        consistent,
    }
}

/// `A = J B′ − C J`.
pub fn drift_matrix(b_prime: &RealMatrix, c: &RealMatrix) -> Result<RealMatrix> {
    let n = phase_space_modes(b_prime)?;
    if c.shape() != b_prime.shape() {
        return Err(GdsError::DimensionMismatch {
            expected: 2 * n,
            found: c.nrows(),
        });
    }
    let j = j_matrix(n);
    Ok(&j * b_prime - c * &j)
}

/// Gaussian state described by its first and (dimensionless) second moments.
///
/// The covariance follows `V = (1/2ħ) ⟨{Δx, Δxᵀ}⟩`, so the vacuum has `V = ½ I`
/// for every value of `ħ`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    pub mean: RealVector,
    pub cov: RealMatrix,
    pub hbar: f64,
}

impl GaussianState {
    pub fn new(mean: RealVector, cov: RealMatrix, hbar: f64) -> Result<Self> {
        check_hbar(hbar)?;
        let n = phase_space_modes(&cov)?;
        ensure_symmetric(&cov, 1e-10)?;
        if mean.len() != 2 * n {
            return Err(GdsError::DimensionMismatch {
                expected: 2 * n,
                found: mean.len(),
            });
        }
        Ok(Self {
            mean,
            cov: symmetrize(&cov),
            hbar,
        })
    }

    pub fn vacuum(n: usize, hbar: f64) -> Result<Self> {
        if n == 0 {
            return Err(GdsError::ZeroModes);
        }
        Self::new(RealVector::zeros(2 * n), RealMatrix::identity(2 * n, 2 * n) * 0.5, hbar)
    }

    pub fn modes(&self) -> usize {
        self.cov.nrows() / 2
    }

    /// Smallest eigenvalue of `V + (i/2) J`.
    pub fn bona_fide_margin(&self) -> f64 {
        let j = j_matrix(self.modes());
        min_hermitian_eigenvalue(&(to_complex(&self.cov) + to_complex(&j) * Complex64::new(0.0, 0.5)))
    }

    pub fn is_bona_fide(&self, tol: f64) -> bool {
        self.bona_fide_margin() >= -tol
    }

    pub fn symplectic_spectrum(&self) -> Result<Vec<f64>> {
        Ok(williamson(&self.cov, POSITIVE_DEFINITE_TOL)?.spectrum)
    }

    /// `U = Sᵀ (g(κ) ⊕ g(κ)) S` where `S V Sᵀ = κ ⊕ κ`.
    pub fn u_matrix(&self) -> Result<RealMatrix> {
        u_from_covariance(&self.cov)
    }

    /// Gaussian Wigner function at phase-space point `x`.
    pub fn wigner(&self, x: &RealVector) -> Result<f64> {
        let (inv, det) = self.inverse_and_det()?;
        self.wigner_with(&inv, det, x)
    }

    fn inverse_and_det(&self) -> Result<(RealMatrix, f64)> {
        let det = self.cov.determinant();
        if !(det > 0.0) {
            return Err(GdsError::Singular(format!("covariance determinant {det:e}")));
        }
        Ok((invert(&self.cov)?, det))
    }

    fn wigner_with(&self, inv: &RealMatrix, det: f64, x: &RealVector) -> Result<f64> {
        if x.len() != self.mean.len() {
            return Err(GdsError::DimensionMismatch {
                expected: self.mean.len(),
                found: x.len(),
            });
        }
        let dx = x - &self.mean;
        let quad = dx.dot(&(inv * &dx));
        let n = self.modes() as i32;
        let norm = (2.0 * std::f64::consts::PI * self.hbar).powi(n) * det.sqrt();
        Ok((-quad / (2.0 * self.hbar)).exp() / norm)
    }

    /// Non-unitary Fokker-Planck current `[(1/2ħ) D V⁻¹ (x − ⟨x⟩) − C J x] W(x)`.
    pub fn nu_current(&self, noise: &NoiseMatrices, x: &RealVector) -> Result<RealVector> {
        if noise.dim() != self.cov.nrows() {
            return Err(GdsError::DimensionMismatch {
                expected: self.cov.nrows(),
                found: noise.dim(),
            });
        }
        let (inv, det) = self.inverse_and_det()?;
        let w = self.wigner_with(&inv, det, x)?;
        let j = j_matrix(self.modes());
        let dx = x - &self.mean;
        let v = &noise.d * (inv * dx) / (2.0 * self.hbar) - &noise.c * (j * x);
        Ok(v * w)
    }
}

/// `U` from a covariance matrix, rejecting states at the pure-state boundary.
pub fn u_from_covariance(v: &RealMatrix) -> Result<RealMatrix> {
    let w = williamson(v, POSITIVE_DEFINITE_TOL)?;
    let mut g = Vec::with_capacity(w.modes());
    for &kappa in &w.spectrum {
        if kappa < 0.5 + PURE_STATE_MARGIN {
            return Err(GdsError::PureStateBoundary { kappa });
        }
        g.push(g_function(kappa)?);
    }
    let mid = crate::linalg::doubled_diagonal(&g);
    Ok(symmetrize(&(w.symplectic.transpose() * mid * &w.symplectic)))
}

/// `‖[J U, V J]‖_max`, which vanishes for `U` built from `V`.
pub fn u_commutation_defect(v: &RealMatrix, u: &RealMatrix) -> f64 {
    let j = j_matrix(v.nrows() / 2);
    max_abs(&crate::linalg::commutator(&(&j * u), &(v * &j)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn reference_vector() -> ComplexVector {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        ComplexVector::from_vec(vec![c(h, 0.0), c(0.0, h)])
    }

    #[test]
    fn single_vector_decoherence() {
        let noise = decoherence_matrix(&[reference_vector()], 2, 1.0).unwrap();
        let gamma = ComplexMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.0, -0.5), c(0.0, 0.5), c(0.5, 0.0)]);
        assert!(crate::linalg::max_abs_c(&(&noise.gamma - gamma)) < 1e-15);
        assert!(max_abs(&(&noise.d - RealMatrix::identity(2, 2) * 0.5)) < 1e-15);
        let expected_c = RealMatrix::from_row_slice(2, 2, &[0.0, -0.5, 0.5, 0.0]);
        assert!(max_abs(&(&noise.c - expected_c)) < 1e-15);

        let empty = decoherence_matrix(&[], 2, 1.0).unwrap();
        assert_eq!(empty.d, RealMatrix::zeros(2, 2));
        assert_eq!(empty.c, RealMatrix::zeros(2, 2));
        assert!(decoherence_matrix(&[reference_vector()], 4, 1.0).is_err());
    }

    #[test]
    fn fluctuation_dissipation_examples() {
        let id = RealMatrix::identity(2, 2);
        let jt = j_matrix(1).transpose();
        let ok = NoiseMatrices::from_parts(id.clone(), RealMatrix::zeros(2, 2), 1.0).unwrap();
        let r = fluctuation_dissipation_check(&ok, 1e-12);
        assert!(r.pass && (r.min_eigenvalue - 1.0).abs() < 1e-14);

        let g = 0.2;
        let edge = NoiseMatrices::from_parts(&id * (g / 2.0), &jt * (g / 2.0), 1.0).unwrap();
        let r = fluctuation_dissipation_check(&edge, 1e-12);
        assert!(r.pass && r.min_eigenvalue.abs() < 1e-14);

        let bad = NoiseMatrices::from_parts(RealMatrix::zeros(2, 2), &jt * 0.5, 1.0).unwrap();
        let r = fluctuation_dissipation_check(&bad, 1e-12);
        assert!(!r.pass && (r.min_eigenvalue + 0.5).abs() < 1e-14);
    }

    #[test]
    fn noise_consistency_examples() {
        let jt = j_matrix(1).transpose();
        let d = RealMatrix::identity(2, 2) * 0.21639534;
        let reference = NoiseMatrices::from_parts(d, &jt * 0.1, 1.0).unwrap();
        let r = noise_consistency_check(&reference, 1e-14);
        assert!(r.c_invertible && r.consistent);
        assert!((r.det_c - 0.01).abs() < 1e-15);

        let vacuous = NoiseMatrices::from_parts(RealMatrix::identity(2, 2), RealMatrix::zeros(2, 2), 1.0).unwrap();
        assert!(!noise_consistency_check(&vacuous, 1e-14).c_invertible);
        let zero = NoiseMatrices::from_parts(RealMatrix::zeros(2, 2), RealMatrix::zeros(2, 2), 1.0).unwrap();
        let r = noise_consistency_check(&zero, 1e-14);
        assert!(!r.c_invertible && r.consistent && r.min_eig_gamma == 0.0);
    }

    #[test]
    fn drift_examples() {
        let (w, g) = (1.3, 0.4);
        let j = j_matrix(1);
        let a = drift_matrix(&(RealMatrix::identity(2, 2) * w), &(j.transpose() * (g / 2.0))).unwrap();
        let expected = &j * w - RealMatrix::identity(2, 2) * (g / 2.0);
        assert!(max_abs(&(a - expected)) < 1e-15);
        assert_eq!(
            drift_matrix(&RealMatrix::zeros(2, 2), &RealMatrix::zeros(2, 2)).unwrap(),
            RealMatrix::zeros(2, 2)
        );
        assert_eq!(drift_matrix(&RealMatrix::identity(2, 2), &RealMatrix::zeros(2, 2)).unwrap(), j);
    }

    #[test]
    fn wigner_examples() {
        let vac = GaussianState::vacuum(1, 1.0).unwrap();
        let peak = vac.wigner(&RealVector::zeros(2)).unwrap();
        assert!((peak - 1.0 / std::f64::consts::PI).abs() < 1e-15);
        assert!(vac.wigner(&RealVector::from_vec(vec![40.0, 0.0])).unwrap() < 1e-300);

        let m = RealVector::from_vec(vec![0.3, -1.1]);
        let x = RealVector::from_vec(vec![0.7, 0.2]);
        let shifted = GaussianState::new(m.clone(), vac.cov.clone(), 1.0).unwrap();
        assert!((shifted.wigner(&x).unwrap() - vac.wigner(&(&x - &m)).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn thermal_reference_current_vanishes() {
        let k = 0.5 / (0.5_f64).tanh();
        let g = 0.2;
        let state = GaussianState::new(RealVector::zeros(2), RealMatrix::identity(2, 2) * k, 1.0).unwrap();
        let noise = NoiseMatrices::from_parts(
            RealMatrix::identity(2, 2) * (g * k),
            j_matrix(1).transpose() * (g / 2.0),
            1.0,
        )
        .unwrap();
        for x in [[0.3, 0.1], [-2.0, 1.5], [0.0, 0.0]] {
            let v = state.nu_current(&noise, &RealVector::from_row_slice(&x)).unwrap();
            assert!(v.amax() < 1e-12);
        }
        // Same noise, state at a different temperature: current does not vanish.
        let cold = GaussianState::new(RealVector::zeros(2), RealMatrix::identity(2, 2) * 0.7, 1.0).unwrap();
        let v = cold.nu_current(&noise, &RealVector::from_row_slice(&[0.4, -0.2])).unwrap();
        assert!(v.amax() > 1e-3);
    }

    #[test]
    fn u_matrix_boundary_and_commutation() {
        assert!(matches!(
            GaussianState::vacuum(1, 1.0).unwrap().u_matrix(),
            Err(GdsError::PureStateBoundary { .. })
        ));
        let v = RealMatrix::from_row_slice(4, 4, &[
            2.0, 0.3, 0.1, 0.0, //
            0.3, 1.5, 0.0, 0.2, //
            0.1, 0.0, 1.8, -0.4, //
            0.0, 0.2, -0.4, 2.2,
        ]);
        let u = u_from_covariance(&v).unwrap();
        assert!(u_commutation_defect(&v, &u) < 1e-9);
    }
}
