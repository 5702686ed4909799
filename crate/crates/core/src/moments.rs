//! First and second moments under a Gaussian dynamical semigroup.
//!
//! Means follow `d⟨x⟩/dt = A ⟨x⟩ − ξ` and covariances follow
//! `dV/dt = A V + V Aᵀ + D/ħ`.

use nalgebra::linalg::LU;

use crate::error::{GdsError, Result};
use crate::gds::{GaussianState, GdsSpec, NoiseMatrices};
use crate::linalg::{
    ensure_square, expm, max_abs, spectral_abscissa, symmetrize, RealMatrix, RealVector,
};

pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_HURWITZ_TOL: f64 = 1e-10;

/// Relative agreement demanded between the RK4 and quadrature covariance routes.
const CROSS_CHECK_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentConfig {
    pub dt: f64,
    pub hurwitz_tol: f64,
}

impl Default for MomentConfig {
    fn default() -> Self {
        Self {
            dt: DEFAULT_DT,
            hurwitz_tol: DEFAULT_HURWITZ_TOL,
        }
    }
}

impl MomentConfig {
    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(GdsError::InvalidParameter(format!(
                "time step must be positive, got {}",
                self.dt
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentTrajectory {
    pub times: Vec<f64>,
    pub means: Vec<RealVector>,
    pub covariances: Vec<RealMatrix>,
}

impl MomentTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_covariance(&self) -> Option<&RealMatrix> {
        self.covariances.last()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HurwitzReport {
    pub abscissa: f64,
    pub hurwitz: bool,
}

/// `A` is Hurwitz when its spectral abscissa is below `-tol`.
pub fn is_hurwitz(a: &RealMatrix, tol: f64) -> HurwitzReport {
    let abscissa = spectral_abscissa(a);
    HurwitzReport {
        abscissa,
        hurwitz: abscissa < -tol,
    }
}

fn check_vector(a: &RealMatrix, v: &RealVector) -> Result<usize> {
    let dim = ensure_square(a)?;
    if v.len() != dim {
        return Err(GdsError::DimensionMismatch {
            expected: dim,
            found: v.len(),
        });
    }
    Ok(dim)
}

fn check_matrix(a: &RealMatrix, m: &RealMatrix) -> Result<usize> {
    let dim = ensure_square(a)?;
    if m.shape() != (dim, dim) {
        return Err(GdsError::DimensionMismatch {
            expected: dim,
            found: m.nrows(),
        });
    }
    Ok(dim)
}

/// Mean at time `t`.
///
/// Uses `e^{At}(m₀ − A⁻¹ξ) + A⁻¹ξ` when `A` is comfortably invertible and the
/// augmented exponential `exp([[A, −ξ], [0, 0]] t)` otherwise.
pub fn evolve_mean(a: &RealMatrix, xi: &RealVector, mean0: &RealVector, t: f64) -> Result<RealVector> {
    let dim = check_vector(a, xi)?;
    check_vector(a, mean0)?;
    if t == 0.0 {
        return Ok(mean0.clone());
    }
    let lu = LU::new(a.clone());
    let pivots = lu.u().diagonal().iter().fold((f64::INFINITY, 0.0_f64), |(lo, hi), x| {
        (lo.min(x.abs()), hi.max(x.abs()))
    });
    if pivots.0 > 1e-10 * pivots.1 {
        if let Some(fixed) = lu.solve(xi) {
            let e = expm(&(a * t));
            return Ok(e * (mean0 - &fixed) + fixed);
        }
    }
    let mut aug = RealMatrix::zeros(dim + 1, dim + 1);
    aug.view_mut((0, 0), (dim, dim)).copy_from(a);
    for i in 0..dim {
        aug[(i, dim)] = -xi[i];
    }
    let e = expm(&(aug * t));
    let mut x0 = RealVector::zeros(dim + 1);
    x0.rows_mut(0, dim).copy_from(mean0);
    x0[dim] = 1.0;
    Ok((e * x0).rows(0, dim).into_owned())
}

fn cov_rhs(a: &RealMatrix, q: &RealMatrix, v: &RealMatrix) -> RealMatrix {
    let av = a * v;
    &av + av.transpose() + q
}

fn step_count(t: f64, dt: f64) -> usize {
    ((t / dt).ceil() as usize).max(1)
}

/// Covariance at time `t ≥ 0` by fixed-step RK4, cross-checked against
/// Simpson quadrature of the variation-of-constants formula.
pub fn evolve_cov(
    a: &RealMatrix,
    d: &RealMatrix,
    v0: &RealMatrix,
    t: f64,
    hbar: f64,
    config: &MomentConfig,
) -> Result<RealMatrix> {
    check_matrix(a, d)?;
    check_matrix(a, v0)?;
    config.validate()?;
    if t < 0.0 {
        return Err(GdsError::InvalidParameter(format!("negative time {t}")));
    }
    if t == 0.0 {
        return Ok(v0.clone());
    }
    let steps = step_count(t, config.dt);
    let h = t / steps as f64;
    let q = d / hbar;
    let mut v = v0.clone();
    for _ in 0..steps {
        v = rk4_cov_step(a, &q, &v, h);
    }
    let v = symmetrize(&v);
    let quad = evolve_cov_quadrature(a, d, v0, t, hbar, config.dt)?;
    let scale = max_abs(&v).max(max_abs(&quad)).max(1.0);
    let residual = max_abs(&(&v - &quad)) / scale;
    if !(residual <= CROSS_CHECK_TOL) {
        return Err(GdsError::Integration {
            reason: format!("RK4 and quadrature disagree with dt = {}", config.dt),
            residual,
        });
    }
    Ok(v)
}

fn rk4_cov_step(a: &RealMatrix, q: &RealMatrix, v: &RealMatrix, h: f64) -> RealMatrix {
    let k1 = cov_rhs(a, q, v);
    let k2 = cov_rhs(a, q, &(v + &k1 * (h / 2.0)));
    let k3 = cov_rhs(a, q, &(v + &k2 * (h / 2.0)));
    let k4 = cov_rhs(a, q, &(v + &k3 * h));
    v + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

/// `e^{At} V₀ e^{Aᵀt} + (1/ħ) ∫₀ᵗ e^{As} D e^{Aᵀs} ds` with composite Simpson
/// on a grid no coarser than `dt`.
pub fn evolve_cov_quadrature(
    a: &RealMatrix,
    d: &RealMatrix,
    v0: &RealMatrix,
    t: f64,
    hbar: f64,
    dt: f64,
) -> Result<RealMatrix> {
    let dim = check_matrix(a, d)?;
    check_matrix(a, v0)?;
    if !(dt > 0.0) {
        return Err(GdsError::InvalidParameter(format!("time step must be positive, got {dt}")));
    }
    let mut steps = step_count(t, dt);
    if steps % 2 == 1 {
        steps += 1;
    }
    let h = t / steps as f64;
    let step = expm(&(a * h));
    let mut e = RealMatrix::identity(dim, dim);
    let mut acc = RealMatrix::zeros(dim, dim);
    for k in 0..=steps {
        let w = if k == 0 || k == steps {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += (&e * d * e.transpose()) * w;
        if k < steps {
            e = &step * e;
        }
    }
    let integral = acc * (h / 3.0 / hbar);
    Ok(symmetrize(&(&e * v0 * e.transpose() + integral)))
}

/// Joint RK4 evolution of mean and covariance, sampled every `sample_every`
/// steps (the final time is always included).
#[allow(clippy::too_many_arguments)]
pub fn integrate_moments(
    a: &RealMatrix,
    xi: &RealVector,
    d: &RealMatrix,
    hbar: f64,
    initial: &GaussianState,
    t_max: f64,
    sample_every: usize,
    config: &MomentConfig,
) -> Result<MomentTrajectory> {
    check_vector(a, xi)?;
    check_matrix(a, d)?;
    check_matrix(a, &initial.cov)?;
    config.validate()?;
    if !(t_max > 0.0) {
        return Err(GdsError::InvalidParameter(format!("horizon must be positive, got {t_max}")));
    }
    let sample_every = sample_every.max(1);
    let steps = step_count(t_max, config.dt);
    let h = t_max / steps as f64;
    let q = d / hbar;
    let mean_rhs = |m: &RealVector| a * m - xi;

    let mut traj = MomentTrajectory {
        times: vec![0.0],
        means: vec![initial.mean.clone()],
        covariances: vec![initial.cov.clone()],
    };
    let mut m = initial.mean.clone();
    let mut v = initial.cov.clone();
    for s in 1..=steps {
        let k1 = mean_rhs(&m);
        let k2 = mean_rhs(&(&m + &k1 * (h / 2.0)));
        let k3 = mean_rhs(&(&m + &k2 * (h / 2.0)));
        let k4 = mean_rhs(&(&m + &k3 * h));
        m += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        v = symmetrize(&rk4_cov_step(a, &q, &v, h));
        if s % sample_every == 0 || s == steps {
            traj.times.push(s as f64 * h);
            traj.means.push(m.clone());
            traj.covariances.push(v.clone());
        }
    }
    Ok(traj)
}

/// Solves `A V + V Aᵀ + Q = 0` for Hurwitz `A` through the Kronecker-sum system.
pub fn lyapunov_solve(a: &RealMatrix, q: &RealMatrix) -> Result<RealMatrix> {
    lyapunov_solve_with(a, q, DEFAULT_HURWITZ_TOL)
}

pub fn lyapunov_solve_with(a: &RealMatrix, q: &RealMatrix, hurwitz_tol: f64) -> Result<RealMatrix> {
    let dim = check_matrix(a, q)?;
    let report = is_hurwitz(a, hurwitz_tol);
    if !report.hurwitz {
        return Err(GdsError::NoStationaryState {
            abscissa: report.abscissa,
        });
    }
    // Column-major vec: vec(A V) = (I ⊗ A) vec V, vec(V Aᵀ) = (A ⊗ I) vec V.
    let id = RealMatrix::identity(dim, dim);
    let kron = id.kronecker(a) + a.kronecker(&id);
    let rhs = RealVector::from_iterator(dim * dim, q.iter().map(|x| -x));
    let sol = kron
        .lu()
        .solve(&rhs)
        .ok_or_else(|| GdsError::Singular("Kronecker-sum Lyapunov system".into()))?;
    let v = RealMatrix::from_column_slice(dim, dim, sol.as_slice());
    Ok(symmetrize(&v))
}

/// `‖A V + V Aᵀ + Q‖_max`.
pub fn lyapunov_residual(a: &RealMatrix, v: &RealMatrix, q: &RealMatrix) -> f64 {
    max_abs(&cov_rhs(a, q, v))
}

/// Stationary mean `A⁻¹ ξ′` and covariance solving `A V + V Aᵀ + D/ħ = 0`.
pub fn stationary_moments(spec: &GdsSpec, noise: &NoiseMatrices) -> Result<GaussianState> {
    stationary_moments_with(spec, noise, DEFAULT_HURWITZ_TOL)
}

pub fn stationary_moments_with(
    spec: &GdsSpec,
    noise: &NoiseMatrices,
    hurwitz_tol: f64,
) -> Result<GaussianState> {
    let a = crate::gds::drift_matrix(&spec.b_prime, &noise.c)?;
    let v = lyapunov_solve_with(&a, &(&noise.d / noise.hbar), hurwitz_tol)?;
    let mean = a
        .clone()
        .lu()
        .solve(&spec.xi_prime)
        .ok_or_else(|| GdsError::Singular("drift matrix".into()))?;
    let state = GaussianState::new(mean, v, spec.hbar)?;
    let margin = state.bona_fide_margin();
    if margin < -1e-10 {
        return Err(GdsError::InvalidParameter(format!(
            "stationary covariance is not a quantum state (V + iJ/2 has eigenvalue {margin:e})"
        )));
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::j_matrix;

    fn damped(w: f64, g: f64) -> RealMatrix {
        j_matrix(1) * w - RealMatrix::identity(2, 2) * (g / 2.0)
    }

    #[test]
    fn mean_decays() {
        let a = -RealMatrix::identity(2, 2);
        let m0 = RealVector::from_vec(vec![1.0, 0.0]);
        let xi = RealVector::zeros(2);
        let m = evolve_mean(&a, &xi, &m0, 2.0).unwrap();
        assert!((m[0] - (-2.0_f64).exp()).abs() < 1e-14 && m[1].abs() < 1e-15);
        assert_eq!(evolve_mean(&a, &xi, &m0, 0.0).unwrap(), m0);
    }

    #[test]
    fn mean_singular_drift_uses_augmented_exponential() {
        // A = 0: ⟨x⟩_t = m₀ − ξ t.
        let a = RealMatrix::zeros(2, 2);
        let xi = RealVector::from_vec(vec![0.5, -1.0]);
        let m0 = RealVector::from_vec(vec![1.0, 2.0]);
        let m = evolve_mean(&a, &xi, &m0, 3.0).unwrap();
        assert!((m - RealVector::from_vec(vec![-0.5, 5.0])).amax() < 1e-13);
    }

    #[test]
    fn hurwitz_examples() {
        let r = is_hurwitz(&damped(1.0, 0.2), 1e-10);
        assert!(r.hurwitz && (r.abscissa + 0.1).abs() < 1e-14);
        let r = is_hurwitz(&j_matrix(1), 1e-10);
        assert!(!r.hurwitz && r.abscissa.abs() < 1e-14);
        assert!(!is_hurwitz(&RealMatrix::identity(2, 2), 1e-10).hurwitz);
    }

    #[test]
    fn lyapunov_scalar_balance() {
        let v = lyapunov_solve(&-RealMatrix::identity(2, 2), &RealMatrix::identity(2, 2)).unwrap();
        assert!(max_abs(&(v - RealMatrix::identity(2, 2) * 0.5)) < 1e-15);
        assert!(matches!(
            lyapunov_solve(&j_matrix(1), &RealMatrix::identity(2, 2)),
            Err(GdsError::NoStationaryState { .. })
        ));
    }

    #[test]
    fn lyapunov_reference_case() {
        let k = 0.5 / 0.5_f64.tanh();
        let g = 0.2;
        let q = RealMatrix::identity(2, 2) * (g * k);
        let v = lyapunov_solve(&damped(1.0, g), &q).unwrap();
        assert!(max_abs(&(v - RealMatrix::identity(2, 2) * k)) < 1e-14);
    }

    #[test]
    fn cov_relaxes_to_reference() {
        let k = 0.5 / 0.5_f64.tanh();
        let g = 0.2;
        let d = RealMatrix::identity(2, 2) * (g * k);
        let v0 = RealMatrix::identity(2, 2) * 0.5;
        let v = evolve_cov(&damped(1.0, g), &d, &v0, 200.0, 1.0, &MomentConfig::default()).unwrap();
        assert!(max_abs(&(v - RealMatrix::identity(2, 2) * k)) < 1e-6);
        assert_eq!(evolve_cov(&damped(1.0, g), &d, &v0, 0.0, 1.0, &MomentConfig::default()).unwrap(), v0);
        let bad = MomentConfig { dt: 0.0, ..MomentConfig::default() };
        assert!(evolve_cov(&damped(1.0, g), &d, &v0, 1.0, 1.0, &bad).is_err());
    }
}
