//! Synthesis of noise matrices and Lindblad vectors that satisfy quantum
//! detailed balance with respect to a target Gibbs state.

use num_complex::Complex64;

use crate::error::{GdsError, Result};
use crate::gds::{decoherence_matrix, GdsSpec, NoiseMatrices};
use crate::linalg::{
    doubled_diagonal, invert, max_abs, max_abs_c, spectral_abscissa, to_complex, ComplexMatrix,
    ComplexVector, RealMatrix,
};
use crate::moments::stationary_moments;
use crate::symplectic::{hamiltonian_flow, j_matrix, q_matrix};
use crate::thermal::{ThermalProfile, ThermalSpec};

/// How the couplings `γ̄_j` depend on temperature.
#[derive(Debug, Clone, PartialEq)]
pub enum CouplingModel {
    /// Temperature-independent couplings.
    Constant(Vec<f64>),
    /// Couplings tabulated against `β`, linearly interpolated and clamped at the ends.
    Table(Vec<(f64, Vec<f64>)>),
}

impl CouplingModel {
    pub fn modes(&self) -> usize {
        match self {
            CouplingModel::Constant(g) => g.len(),
            CouplingModel::Table(rows) => rows.first().map_or(0, |r| r.1.len()),
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        let rows: Vec<&Vec<f64>> = match self {
            CouplingModel::Constant(g) => vec![g],
            CouplingModel::Table(rows) => {
                if rows.is_empty() {
                    return Err(GdsError::InvalidParameter("empty coupling table".into()));
                }
                if rows.windows(2).any(|w| !(w[0].0 < w[1].0)) {
                    return Err(GdsError::InvalidParameter(
                        "coupling table must be strictly increasing in beta".into(),
                    ));
                }
                rows.iter().map(|r| &r.1).collect()
            }
        };
        for g in rows {
            if g.len() != n {
                return Err(GdsError::DimensionMismatch {
                    expected: n,
                    found: g.len(),
                });
            }
            if let Some(bad) = g.iter().find(|x| !(**x > 0.0) || !x.is_finite()) {
                return Err(GdsError::InvalidParameter(format!(
                    "couplings must be positive, got {bad}"
                )));
            }
        }
        Ok(())
    }

    pub fn at(&self, beta: f64) -> Vec<f64> {
        match self {
            CouplingModel::Constant(g) => g.clone(),
            CouplingModel::Table(rows) => {
                if beta <= rows[0].0 {
                    return rows[0].1.clone();
                }
                for w in rows.windows(2) {
                    let ((b0, g0), (b1, g1)) = (&w[0], &w[1]);
                    if beta <= *b1 {
                        let s = (beta - b0) / (b1 - b0);
                        return g0.iter().zip(g1).map(|(a, b)| a + s * (b - a)).collect();
                    }
                }
                rows[rows.len() - 1].1.clone()
            }
        }
    }
}

/// Target Gibbs state plus system-bath couplings.
#[derive(Debug, Clone, PartialEq)]
pub struct QdbcSpec {
    pub thermal: ThermalSpec,
    pub couplings: CouplingModel,
}

impl QdbcSpec {
    pub fn new(thermal: ThermalSpec, couplings: CouplingModel) -> Result<Self> {
        couplings.validate(thermal.modes())?;
        Ok(Self { thermal, couplings })
    }

    pub fn constant(b: RealMatrix, beta: f64, hbar: f64, gamma: Vec<f64>) -> Result<Self> {
        Self::new(ThermalSpec::new(b, beta, hbar)?, CouplingModel::Constant(gamma))
    }

    /// One mode with `B = ω I₂`.
    pub fn single_mode(omega: f64, gamma: f64, beta: f64, hbar: f64) -> Result<Self> {
        Self::constant(RealMatrix::identity(2, 2) * omega, beta, hbar, vec![gamma])
    }

    pub fn modes(&self) -> usize {
        self.thermal.modes()
    }

    pub fn beta(&self) -> f64 {
        self.thermal.beta
    }

    pub fn hbar(&self) -> f64 {
        self.thermal.hbar
    }

    pub fn gamma(&self) -> Vec<f64> {
        self.couplings.at(self.thermal.beta)
    }

    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        Self::new(self.thermal.with_beta(beta)?, self.couplings.clone())
    }

    pub fn profile(&self) -> Result<ThermalProfile> {
        self.thermal.profile()
    }

    /// Generator with `H_eff = H` (or the given Hessian) and the canonical Lindblad set.
    pub fn gds_spec(&self, b_prime: Option<RealMatrix>) -> Result<GdsSpec> {
        let set = build_lindblad_vectors(self)?;
        GdsSpec::centered(
            self.hbar(),
            b_prime.unwrap_or_else(|| self.thermal.b.clone()),
            set.vectors,
        )
    }
}

/// `D = ħ² (S^th)⁻¹ (ḡk ⊕ ḡk) (S^th)⁻ᵀ`, `C = (ħ/2) (S^th)⁻¹ Jᵀ (ḡ ⊕ ḡ) (S^th)⁻ᵀ`.
pub fn build_noise(spec: &QdbcSpec) -> Result<NoiseMatrices> {
    let profile = spec.profile()?;
    Ok(noise_from_profile(&profile, &spec.gamma()))
}

pub(crate) fn noise_from_profile(profile: &ThermalProfile, gamma: &[f64]) -> NoiseMatrices {
    let hbar = profile.hbar;
    let inv = profile.s_th_inverse();
    let gk: Vec<f64> = gamma.iter().zip(&profile.kappa).map(|(g, k)| g * k).collect();
    let d = &inv * doubled_diagonal(&gk) * inv.transpose() * (hbar * hbar);
    let j = j_matrix(profile.modes());
    let c = &inv * j.transpose() * doubled_diagonal(gamma) * inv.transpose() * (hbar / 2.0);
    NoiseMatrices::from_parts(d, c, hbar).expect("dimensions follow the profile")
}

/// Canonical Lindblad vectors `l_j = |s_j| l̄_j`, `l_{n+j} = |s_j| e^{−ħβω_j/2} l̄_j*`.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladSet {
    pub vectors: Vec<ComplexVector>,
    /// `l̄_j`, column `j` of `(Q S^th)⁻¹`.
    pub eigenvectors: Vec<ComplexVector>,
    pub frequencies: Vec<f64>,
    /// `|s_j|² = ħγ̄_j(n̄_j + 1)`.
    pub s2: Vec<f64>,
    /// `|r_j|² = e^{−ħβω_j} |s_j|²`.
    pub r2: Vec<f64>,
    pub hbar: f64,
}

impl LindbladSet {
    pub fn modes(&self) -> usize {
        self.frequencies.len()
    }

    pub fn noise(&self) -> Result<NoiseMatrices> {
        decoherence_matrix(&self.vectors, 2 * self.modes(), self.hbar)
    }

    /// `l′_k = Σ_j W_kj l_j`; a unitary `W` leaves the generator unchanged.
    pub fn mixed(&self, w: &ComplexMatrix) -> Result<Vec<ComplexVector>> {
        let k = self.vectors.len();
        if w.shape() != (k, k) {
            return Err(GdsError::DimensionMismatch {
                expected: k,
                found: w.nrows(),
            });
        }
        Ok((0..k)
            .map(|row| {
                self.vectors
                    .iter()
                    .enumerate()
                    .fold(ComplexVector::zeros(self.vectors[0].len()), |acc, (j, l)| {
                        acc + l * w[(row, j)]
                    })
            })
            .collect())
    }
}

pub fn build_lindblad_vectors(spec: &QdbcSpec) -> Result<LindbladSet> {
    let profile = spec.profile()?;
    Ok(lindblad_from_profile(&profile, &spec.gamma()))
}

pub(crate) fn lindblad_from_profile(profile: &ThermalProfile, gamma: &[f64]) -> LindbladSet {
    let n = profile.modes();
    let hbar = profile.hbar;
    let frame = to_complex(&profile.s_th_inverse()) * q_matrix(n).adjoint();
    let mut eigenvectors = Vec::with_capacity(n);
    let mut vectors = vec![ComplexVector::zeros(2 * n); 2 * n];
    let mut s2 = Vec::with_capacity(n);
    let mut r2 = Vec::with_capacity(n);
    for j in 0..n {
        let x = hbar * profile.beta * profile.frequencies[j];
        let s2j = hbar * gamma[j] * (profile.occupations[j] + 1.0);
        let lbar = frame.column(j).into_owned();
        let s = s2j.sqrt();
        vectors[j] = &lbar * Complex64::from(s);
        vectors[n + j] = lbar.conjugate() * Complex64::from(s * (-x / 2.0).exp());
        eigenvectors.push(lbar);
        s2.push(s2j);
        r2.push(s2j * (-x).exp());
    }
    LindbladSet {
        vectors,
        eigenvectors,
        frequencies: profile.frequencies.clone(),
        s2,
        r2,
        hbar,
    }
}

/// Invariance of `D`, `C`, `Γ` under the Hamiltonian flow `S̃_t = exp(JBt)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CongruenceReport {
    pub times: Vec<f64>,
    pub d_defect: f64,
    pub c_defect: f64,
    pub gamma_defect: f64,
}

impl CongruenceReport {
    pub fn max_defect(&self) -> f64 {
        self.d_defect.max(self.c_defect).max(self.gamma_defect)
    }
}

/// `{0.1, 1, 5, 2π/w_1}` with `w_1` the lowest normal-mode frequency.
pub fn default_congruence_times(profile: &ThermalProfile) -> Vec<f64> {
    vec![0.1, 1.0, 5.0, 2.0 * std::f64::consts::PI / profile.frequencies[0]]
}

pub fn verify_congruence(noise: &NoiseMatrices, thermal: &ThermalSpec, times: &[f64]) -> Result<CongruenceReport> {
    if noise.dim() != thermal.b.nrows() {
        return Err(GdsError::DimensionMismatch {
            expected: thermal.b.nrows(),
            found: noise.dim(),
        });
    }
    let mut report = CongruenceReport {
        times: times.to_vec(),
        d_defect: 0.0,
        c_defect: 0.0,
        gamma_defect: 0.0,
    };
    for &t in times {
        let s = hamiltonian_flow(&thermal.b, t)?;
        let st = s.transpose();
        report.d_defect = report.d_defect.max(max_abs(&(&s * &noise.d * &st - &noise.d)));
        report.c_defect = report.c_defect.max(max_abs(&(&s * &noise.c * &st - &noise.c)));
        let sc = to_complex(&s);
        let g = &sc * &noise.gamma * sc.transpose() - &noise.gamma;
        report.gamma_defect = report.gamma_defect.max(max_abs_c(&g));
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeEigenCheck {
    /// `‖JB l_j − iω_j l_j‖ / ‖l_j‖`.
    pub lowering_residual: f64,
    /// `‖JB l_{n+j} + iω_j l_{n+j}‖ / ‖l_{n+j}‖`.
    pub raising_residual: f64,
    /// `‖l_{n+j}‖² / ‖l_j‖²`.
    pub ratio: f64,
    /// `e^{−ħβω_j}`.
    pub expected_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenoperatorReport {
    pub modes: Vec<ModeEigenCheck>,
}

impl EigenoperatorReport {
    pub fn max_residual(&self) -> f64 {
        self.modes
            .iter()
            .map(|m| m.lowering_residual.max(m.raising_residual))
            .fold(0.0, f64::max)
    }

    /// Largest relative deviation of the modulus ratio from `e^{−ħβω}`.
    pub fn max_ratio_defect(&self) -> f64 {
        self.modes
            .iter()
            .map(|m| ((m.ratio - m.expected_ratio) / m.expected_ratio).abs())
            .fold(0.0, f64::max)
    }
}

/// Checks that `l_j`, `l_{n+j}` are eigenvectors of `JB` with eigenvalues `±iω_j`
/// and that their squared norms stand in the Boltzmann ratio.
pub fn verify_eigenoperators(vectors: &[ComplexVector], thermal: &ThermalSpec) -> Result<EigenoperatorReport> {
    let profile = thermal.profile()?;
    let n = profile.modes();
    if vectors.len() != 2 * n {
        return Err(GdsError::DimensionMismatch {
            expected: 2 * n,
            found: vectors.len(),
        });
    }
    let jb = to_complex(&(j_matrix(n) * &thermal.b));
    let residual = |l: &ComplexVector, w: f64| -> f64 {
        let norm = l.norm();
        if norm == 0.0 {
            return 0.0;
        }
        (&jb * l - l * Complex64::new(0.0, w)).norm() / norm
    };
    let modes = (0..n)
        .map(|j| {
            let w = profile.frequencies[j];
            let (lo, hi) = (&vectors[j], &vectors[n + j]);
            ModeEigenCheck {
                lowering_residual: residual(lo, w),
                raising_residual: residual(hi, -w),
                ratio: hi.norm_squared() / lo.norm_squared(),
                expected_ratio: (-thermal.hbar * thermal.beta * w).exp(),
            }
        })
        .collect();
    Ok(EigenoperatorReport { modes })
}

/// Per-mode coefficients of the optical master equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeCoefficients {
    pub omega: f64,
    pub occupation: f64,
    pub coupling: f64,
    /// `γ̄(n̄ + 1)`.
    pub loss_rate: f64,
    /// `γ̄ n̄`.
    pub gain_rate: f64,
}

pub fn qome_coefficients(spec: &QdbcSpec) -> Result<Vec<ModeCoefficients>> {
    let profile = spec.profile()?;
    let gamma = spec.gamma();
    Ok(profile
        .frequencies
        .iter()
        .zip(&profile.occupations)
        .zip(&gamma)
        .map(|((&omega, &occupation), &coupling)| ModeCoefficients {
            omega,
            occupation,
            coupling,
            loss_rate: coupling * (occupation + 1.0),
            gain_rate: coupling * occupation,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub enum Regime {
    High,
    Low,
    /// `β → 0`, `γ̄ → 0` with `c̄_j = n̄_j γ̄_j` fixed.
    Diffusive { c_bar: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitReport {
    pub regime: Regime,
    pub d: RealMatrix,
    pub c: RealMatrix,
    /// Limiting covariance; `None` in the diffusive regime.
    pub v_approx: Option<RealMatrix>,
    /// `‖V^th − V_approx‖_max / ‖V^th‖_max`.
    pub v_relative_error: Option<f64>,
    /// `‖D − D_approx‖_max / ‖D‖_max`.
    pub d_relative_error: Option<f64>,
    /// `k_j − ½` per mode.
    pub kappa_excess: Vec<f64>,
    /// `ħβ max_j w_j`.
    pub hbar_beta_w: f64,
    /// Spectral abscissa of the drift with `B′ = B`.
    pub abscissa: f64,
    pub stationary: bool,
}

/// Limiting forms of the detailed-balance noise.
pub fn limit_regimes(spec: &QdbcSpec, regime: &Regime) -> Result<LimitReport> {
    let profile = spec.profile()?;
    let hbar = spec.hbar();
    let beta = spec.beta();
    let n = profile.modes();
    let inv = profile.s_th_inverse();
    let w_max = profile.frequencies.iter().cloned().fold(0.0, f64::max);
    let rel = |a: &RealMatrix, b: &RealMatrix| max_abs(&(a - b)) / max_abs(a);
    let kappa_excess = profile.occupations.clone();
    let j = j_matrix(n);

    let (d, c, v_approx, v_err, d_err) = match regime {
        Regime::High | Regime::Low => {
            let noise = build_noise(spec)?;
            let gamma = spec.gamma();
            let (v_approx, d_approx) = if *regime == Regime::High {
                let v = invert(&(&spec.thermal.b * (hbar * beta)))?;
                let gw: Vec<f64> = gamma.iter().zip(&profile.frequencies).map(|(g, w)| g / w).collect();
                let d = &inv * doubled_diagonal(&gw) * inv.transpose() * (hbar / beta);
                (v, d)
            } else {
                let v = profile.ground_state_covariance();
                let d = &inv * inv.transpose() * &j * &noise.c * hbar;
                (v, d)
            };
            let v_err = rel(&profile.v_th, &v_approx);
            let d_err = rel(&noise.d, &d_approx);
            (noise.d, noise.c, Some(v_approx), Some(v_err), Some(d_err))
        }
        Regime::Diffusive { c_bar } => {
            if c_bar.len() != n {
                return Err(GdsError::DimensionMismatch {
                    expected: n,
                    found: c_bar.len(),
                });
            }
            if let Some(bad) = c_bar.iter().find(|x| !(**x > 0.0) || !x.is_finite()) {
                return Err(GdsError::InvalidParameter(format!(
                    "diffusive regime needs positive c_bar, got {bad}"
                )));
            }
            let d = &inv * doubled_diagonal(c_bar) * inv.transpose() * (hbar * hbar);
            (d, RealMatrix::zeros(2 * n, 2 * n), None, None, None)
        }
    };

    let a = &j * &spec.thermal.b - &c * &j;
    let abscissa = spectral_abscissa(&a);
    let gds = GdsSpec::centered(hbar, spec.thermal.b.clone(), Vec::new())?;
    let noise = NoiseMatrices::from_parts(d.clone(), c.clone(), hbar)?;
    let stationary = match stationary_moments(&gds, &noise) {
        Ok(_) => true,
        Err(GdsError::NoStationaryState { .. }) => false,
        Err(e) => return Err(e),
    };
    Ok(LimitReport {
        regime: regime.clone(),
        d,
        c,
        v_approx,
        v_relative_error: v_err,
        d_relative_error: d_err,
        kappa_excess,
        hbar_beta_w: hbar * beta * w_max,
        abscissa,
        stationary,
    })
}

/// Lindblad vectors whose `|r|²/|s|²` ratio is scaled by `factor` relative to detailed balance.
pub fn perturb_ratio(set: &LindbladSet, factor: f64) -> Vec<ComplexVector> {
    let n = set.modes();
    let mut out = set.vectors.clone();
    for j in 0..n {
        out[n + j] = &out[n + j] * Complex64::from(factor.sqrt());
    }
    out
}
