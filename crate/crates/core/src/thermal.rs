//! Thermal (Gibbs) covariances of positive-definite quadratic Hamiltonians and
//! the commutation audit that decides whether given noise matrices thermalize.

use crate::error::{GdsError, Result};
use crate::gds::{check_hbar, u_from_covariance, NoiseMatrices};
use crate::linalg::{
    commutator, doubled_diagonal, ensure_positive_definite, ensure_symmetric, expm, max_abs,
    max_abs_c, phase_space_modes, spectral_abscissa, symmetrize, to_complex, ComplexMatrix,
    RealMatrix,
};
use crate::symplectic::{
    j_matrix, q_matrix, symplectic_inverse, williamson, POSITIVE_DEFINITE_TOL,
};

/// Default relative tolerance for commutator norms.
pub const DEFAULT_AUDIT_TOL: f64 = 1e-9;

/// Hessian `B > 0` of `H = ½ xᵀ B x` at inverse temperature `β`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalSpec {
    pub b: RealMatrix,
    pub beta: f64,
    pub hbar: f64,
}

impl ThermalSpec {
    pub fn new(b: RealMatrix, beta: f64, hbar: f64) -> Result<Self> {
        check_hbar(hbar)?;
        phase_space_modes(&b)?;
        ensure_symmetric(&b, 1e-12)?;
        let b = symmetrize(&b);
        ensure_positive_definite(&b, POSITIVE_DEFINITE_TOL)?;
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(GdsError::InvalidParameter(format!(
                "beta must be positive and finite, got {beta}"
            )));
        }
        Ok(Self { b, beta, hbar })
    }

    pub fn modes(&self) -> usize {
        self.b.nrows() / 2
    }

    pub fn profile(&self) -> Result<ThermalProfile> {
        thermal_covariance(self)
    }

    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        Self::new(self.b.clone(), beta, self.hbar)
    }
}

/// Normal-mode data of a thermal state.
///
/// `B = (S^th)ᵀ (w ⊕ w) S^th` and `V^th = (S^th)⁻¹ (k ⊕ k) (S^th)⁻ᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalProfile {
    pub s_th: RealMatrix,
    pub frequencies: Vec<f64>,
    /// Symplectic eigenvalues `k_j = ½ coth(ħβw_j/2)`.
    pub kappa: Vec<f64>,
    /// Planck occupations `n̄_j = 1/(e^{ħβw_j} − 1)`; `k_j = n̄_j + ½`.
    pub occupations: Vec<f64>,
    pub v_th: RealMatrix,
    pub beta: f64,
    pub hbar: f64,
}

impl ThermalProfile {
    pub fn modes(&self) -> usize {
        self.frequencies.len()
    }

    /// `(S^th)⁻¹`.
    pub fn s_th_inverse(&self) -> RealMatrix {
        symplectic_inverse(&self.s_th)
    }

    /// `½ (S^th)⁻¹ (S^th)⁻ᵀ`, the zero-temperature covariance.
    pub fn ground_state_covariance(&self) -> RealMatrix {
        let inv = self.s_th_inverse();
        symmetrize(&(&inv * inv.transpose() * 0.5))
    }
}

pub fn planck_occupation(hbar_beta_w: f64) -> f64 {
    1.0 / hbar_beta_w.exp_m1()
}

/// Builds `V^th` through the Williamson frame of `B`.
pub fn thermal_covariance(spec: &ThermalSpec) -> Result<ThermalProfile> {
    let w = williamson(&spec.b, POSITIVE_DEFINITE_TOL)?;
    // S_B B S_Bᵀ = w ⊕ w, hence S^th = S_B⁻ᵀ.
    let s_b = w.symplectic;
    let s_th = symplectic_inverse(&s_b).transpose();
    let occupations: Vec<f64> = w
        .spectrum
        .iter()
        .map(|&wj| planck_occupation(spec.hbar * spec.beta * wj))
        .collect();
    let kappa: Vec<f64> = occupations.iter().map(|n| n + 0.5).collect();
    let v_th = symmetrize(&(s_b.transpose() * doubled_diagonal(&kappa) * &s_b));
    Ok(ThermalProfile {
        s_th,
        frequencies: w.spectrum,
        kappa,
        occupations,
        v_th,
        beta: spec.beta,
        hbar: spec.hbar,
    })
}

/// `ħβB` recovered from a thermal covariance, with the symplectic matrix that
/// brings `V` to normal form.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledHessian {
    pub s_th: RealMatrix,
    pub hbar_beta_b: RealMatrix,
}

pub fn hessian_scaled_from_cov(v: &RealMatrix) -> Result<ScaledHessian> {
    let hbar_beta_b = u_from_covariance(v)?;
    let s_th = williamson(v, POSITIVE_DEFINITE_TOL)?.symplectic;
    Ok(ScaledHessian { s_th, hbar_beta_b })
}

/// Residuals of the commutation characterization of thermal equilibrium.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalAuditReport {
    pub comm_jd_jc: f64,
    pub comm_jv_jd: f64,
    pub comm_jv_jc: f64,
    /// `‖JV − (1/2ħ) JD (JC)⁻¹‖_max`; `None` when `JC` is singular.
    pub closed_form_residual: Option<f64>,
    /// `‖C J V + V J C − D/ħ‖_max`.
    pub lyapunov_residual: f64,
    /// Absolute tolerance actually applied (relative tolerance times operand scale).
    pub threshold: f64,
    pub verdict: bool,
    pub notes: Vec<String>,
}

impl ThermalAuditReport {
    pub fn max_residual(&self) -> f64 {
        [
            self.comm_jd_jc,
            self.comm_jv_jd,
            self.comm_jv_jc,
            self.closed_form_residual.unwrap_or(0.0),
            self.lyapunov_residual,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// `(1/2ħ) JD (JC)⁻¹` by a linear solve against `JC`; `None` if `JC` is singular.
fn jd_over_jc(noise: &NoiseMatrices) -> Option<RealMatrix> {
    let j = j_matrix(noise.dim() / 2);
    let jd = &j * &noise.d;
    let jc = &j * &noise.c;
    let scale = max_abs(&jc);
    if scale == 0.0 {
        return None;
    }
    let lu = jc.transpose().lu();
    let pivots = lu.u().diagonal().iter().fold(f64::INFINITY, |a, x| a.min(x.abs()));
    if pivots <= 1e-12 * scale {
        return None;
    }
    // X (JC) = JD  ⇔  (JC)ᵀ Xᵀ = (JD)ᵀ.
    let xt = lu.solve(&jd.transpose())?;
    Some(xt.transpose() / (2.0 * noise.hbar))
}

/// Commutation audit of `(D, C, V)` with relative tolerance `tol`.
pub fn thermal_audit(noise: &NoiseMatrices, v: &RealMatrix, tol: f64) -> Result<ThermalAuditReport> {
    let n = phase_space_modes(v)?;
    if noise.dim() != 2 * n {
        return Err(GdsError::DimensionMismatch {
            expected: 2 * n,
            found: noise.dim(),
        });
    }
    let j = j_matrix(n);
    let jd = &j * &noise.d;
    let jc = &j * &noise.c;
    let jv = &j * v;
    let scale = [max_abs(&jd), max_abs(&jc), max_abs(&jv)]
        .into_iter()
        .fold(1.0, f64::max);
    let threshold = tol * scale * scale;

    let comm_jd_jc = max_abs(&commutator(&jd, &jc));
    let comm_jv_jd = max_abs(&commutator(&jv, &jd));
    let comm_jv_jc = max_abs(&commutator(&jv, &jc));
    let lyapunov_residual =
        max_abs(&(&noise.c * &j * v + v * &j * &noise.c - &noise.d / noise.hbar));

    let mut notes = Vec::new();
    let closed_form_residual = match jd_over_jc(noise) {
        Some(x) => Some(max_abs(&(&jv - x))),
        None => {
            notes.push("closed form inapplicable: JC is singular".to_string());
            None
        }
    };
    let verdict = comm_jd_jc <= threshold
        && comm_jv_jd <= threshold
        && comm_jv_jc <= threshold
        && lyapunov_residual <= threshold
        && closed_form_residual.is_none_or(|r| r <= tol * scale);
    Ok(ThermalAuditReport {
        comm_jd_jc,
        comm_jv_jd,
        comm_jv_jc,
        closed_form_residual,
        lyapunov_residual,
        threshold,
        verdict,
        notes,
    })
}

/// `V = −J (1/2ħ) JD (JC)⁻¹`, the stationary covariance when `JC` is invertible.
pub fn closed_form_covariance(noise: &NoiseMatrices) -> Result<RealMatrix> {
    let x = jd_over_jc(noise).ok_or_else(|| GdsError::Singular("JC is singular".into()))?;
    let j = j_matrix(noise.dim() / 2);
    Ok(symmetrize(&(-(j * x))))
}

/// `∫₀^∞ e^{−CJt} (D/ħ) e^{−JCt} dt` by composite Simpson up to `T = 60/|abscissa|`.
pub fn integral_form_covariance(noise: &NoiseMatrices) -> Result<RealMatrix> {
    let n = noise.dim() / 2;
    let j = j_matrix(n);
    let gen = -(&noise.c * &j);
    let abscissa = spectral_abscissa(&gen);
    if !(abscissa < -1e-12) {
        return Err(GdsError::NoStationaryState { abscissa });
    }
    let horizon = 60.0 / abscissa.abs();
    let norm = gen.norm().max(abscissa.abs());
    let mut steps = (horizon * norm / 0.02).ceil() as usize;
    steps += steps % 2;
    let h = horizon / steps as f64;
    let step = expm(&(&gen * h));
    let q = &noise.d / noise.hbar;
    let mut e = RealMatrix::identity(2 * n, 2 * n);
    let mut acc = RealMatrix::zeros(2 * n, 2 * n);
    for k in 0..=steps {
        let w = if k == 0 || k == steps {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += (&e * &q * e.transpose()) * w;
        e = &step * e;
    }
    Ok(symmetrize(&(acc * (h / 3.0))))
}

/// Per-mode diagonals of `JD` and `JC` in the thermal normal-mode frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectraRelation {
    pub d: Vec<f64>,
    pub jc: Vec<f64>,
    /// `d_j / jc_j`.
    pub ratio: Vec<f64>,
    /// `2 k_j = coth(ħβw_j/2)`.
    pub expected: Vec<f64>,
    /// Largest entry of the transformed matrices off their canonical diagonal.
    pub off_diagonal: f64,
}

impl SpectraRelation {
    pub fn max_ratio_defect(&self) -> f64 {
        self.ratio
            .iter()
            .zip(&self.expected)
            .map(|(r, e)| ((r - e) / e).abs())
            .fold(0.0, f64::max)
    }

    /// `max_j |d_j − 2 jc_j k_j|`.
    pub fn max_identity_defect(&self) -> f64 {
        self.d
            .iter()
            .zip(&self.jc)
            .zip(&self.expected)
            .map(|((d, c), e)| (d - c * e).abs())
            .fold(0.0, f64::max)
    }
}

fn normal_frame(profile: &ThermalProfile, m: &RealMatrix) -> ComplexMatrix {
    // Q (S^th)⁻ᵀ M (S^th)ᵀ Q†
    let n = profile.modes();
    let q = q_matrix(n);
    let s_inv_t = profile.s_th_inverse().transpose();
    let inner = s_inv_t * m * profile.s_th.transpose();
    &q * to_complex(&inner) * q.adjoint()
}

/// Extracts `d_j`, `jc_j` from `(JD)_d = (iħd) ⊕ (−iħd)` and `(JC)_d = jc ⊕ jc`.
pub fn spectra_relation(noise: &NoiseMatrices, profile: &ThermalProfile) -> Result<SpectraRelation> {
    let audit = thermal_audit(noise, &profile.v_th, DEFAULT_AUDIT_TOL)?;
    if !audit.verdict {
        return Err(GdsError::AuditFailed(format!(
            "noise matrices do not commute with the thermal covariance (max residual {:e})",
            audit.max_residual()
        )));
    }
    let n = profile.modes();
    let j = j_matrix(n);
    let jd = normal_frame(profile, &(&j * &noise.d));
    let jc = normal_frame(profile, &(&j * &noise.c));
    let hbar = noise.hbar;
    let d: Vec<f64> = (0..n).map(|k| jd[(k, k)].im / hbar).collect();
    let c: Vec<f64> = (0..n).map(|k| jc[(k, k)].re).collect();

    let mut jd_canon = ComplexMatrix::zeros(2 * n, 2 * n);
    let mut jc_canon = ComplexMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        jd_canon[(k, k)] = num_complex::Complex64::new(0.0, hbar * d[k]);
        jd_canon[(n + k, n + k)] = num_complex::Complex64::new(0.0, -hbar * d[k]);
        jc_canon[(k, k)] = c[k].into();
        jc_canon[(n + k, n + k)] = c[k].into();
    }
    let off_diagonal = max_abs_c(&(jd - jd_canon)).max(max_abs_c(&(jc - jc_canon)));
    let ratio = d.iter().zip(&c).map(|(a, b)| a / b).collect();
    let expected = profile.kappa.iter().map(|k| 2.0 * k).collect();
    Ok(SpectraRelation {
        d,
        jc: c,
        ratio,
        expected,
        off_diagonal,
    })
}

/// Effective Hessian `B′ = (S^th)ᵀ (λ ⊕ λ) S^th`, which commutes with `B` under `J`.
///
/// Degenerate frequencies admit a larger commuting family (mixing inside each
/// degenerate block); only the diagonal family is generated here, and
/// [`heff_commutation_defect`] accepts any member.
pub fn commuting_heff(profile: &ThermalProfile, lambda: &[f64]) -> Result<RealMatrix> {
    if lambda.len() != profile.modes() {
        return Err(GdsError::DimensionMismatch {
            expected: profile.modes(),
            found: lambda.len(),
        });
    }
    Ok(symmetrize(&(profile.s_th.transpose() * doubled_diagonal(lambda) * &profile.s_th)))
}

/// `‖[J B, J B′]‖_max`.
pub fn heff_commutation_defect(b: &RealMatrix, b_prime: &RealMatrix) -> f64 {
    let j = j_matrix(b.nrows() / 2);
    max_abs(&commutator(&(&j * b), &(&j * b_prime)))
}
