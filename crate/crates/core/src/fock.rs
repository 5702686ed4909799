//! Truncated Fock-space master-equation backend, used as an independent
//! check on the phase-space results.
//!
//! Mode ordering is little-endian: the basis index of `|n_1, ..., n_m⟩` is
//! `Σ_j n_j N^j`, so mode 0 varies fastest.

use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use crate::error::{GdsError, Result};
use crate::gds::{check_hbar, GdsSpec};
use crate::moments::{evolve_cov, evolve_mean, MomentConfig};
use crate::thermal::ThermalSpec;
use crate::linalg::{
    ensure_symmetric, max_abs_c, phase_space_modes, ComplexMatrix, ComplexVector, RealMatrix,
    RealVector, I,
};
use crate::symplectic::j_matrix;

/// Largest Hilbert-space dimension the oracle will build.
pub const DIM_BUDGET: usize = 4096;
/// Levels excluded at the top of each mode when checking ladder identities.
pub const INTERIOR_MARGIN: usize = 5;

/// Integrator settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub cutoff: usize,
    pub dt: f64,
    pub t_max: f64,
    /// Allowed `|Tr ρ − 1|`.
    pub trace_tol: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            cutoff: 40,
            dt: 0.01,
            t_max: 10.0,
            trace_tol: 1e-8,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.cutoff < 8 {
            return Err(GdsError::InvalidParameter(format!(
                "cutoff must be at least 8, got {}",
                self.cutoff
            )));
        }
        if !(self.dt > 0.0) || !(self.t_max > 0.0) {
            return Err(GdsError::InvalidParameter("dt and t_max must be positive".into()));
        }
        Ok(())
    }

    /// Cutoff heuristic `N ≥ 20 (n̄ + 1)`.
    pub fn recommended_cutoff(occupation: f64) -> usize {
        (20.0 * (occupation + 1.0)).ceil() as usize
    }
}

/// Position and momentum operators on a truncated multimode Fock space.
#[derive(Debug, Clone)]
pub struct CanonicalOps {
    pub modes: usize,
    pub cutoff: usize,
    pub hbar: f64,
    /// `(q_1..q_n, p_1..p_n)`.
    pub x: Vec<ComplexMatrix>,
    /// Symmetrized products `(x_i x_j + x_j x_i)/2`, computed without truncation error.
    pub x2: Vec<Vec<ComplexMatrix>>,
}

impl CanonicalOps {
    pub fn dim(&self) -> usize {
        self.cutoff.pow(self.modes as u32)
    }

    pub fn q(&self, j: usize) -> &ComplexMatrix {
        &self.x[j]
    }

    pub fn p(&self, j: usize) -> &ComplexMatrix {
        &self.x[self.modes + j]
    }

    /// Annihilation operator of mode `j`.
    pub fn annihilation(&self, j: usize) -> ComplexMatrix {
        let s = (2.0 * self.hbar).sqrt();
        (self.q(j) + self.p(j) * I) / Complex64::from(s)
    }

    pub fn identity(&self) -> ComplexMatrix {
        ComplexMatrix::identity(self.dim(), self.dim())
    }

    /// Diagonal projector onto states with every `n_j < N − margin`.
    pub fn interior_projector(&self, margin: usize) -> ComplexMatrix {
        let dim = self.dim();
        let limit = self.cutoff.saturating_sub(margin);
        let mut p = ComplexMatrix::zeros(dim, dim);
        for idx in 0..dim {
            if occupations(idx, self.cutoff, self.modes).iter().all(|&k| k < limit) {
                p[(idx, idx)] = Complex64::from(1.0);
            }
        }
        p
    }
}

fn occupations(mut idx: usize, cutoff: usize, modes: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(modes);
    for _ in 0..modes {
        out.push(idx % cutoff);
        idx /= cutoff;
    }
    out
}

fn ladder(cutoff: usize) -> ComplexMatrix {
    let mut a = ComplexMatrix::zeros(cutoff, cutoff);
    for k in 1..cutoff {
        a[(k - 1, k)] = Complex64::from((k as f64).sqrt());
    }
    a
}

/// `I ⊗ ... ⊗ op ⊗ ... ⊗ I` with `op` acting on mode `j` (little-endian).
fn embed(op: &ComplexMatrix, j: usize, modes: usize, cutoff: usize) -> ComplexMatrix {
    let high = ComplexMatrix::identity(cutoff.pow((modes - 1 - j) as u32), cutoff.pow((modes - 1 - j) as u32));
    let low = ComplexMatrix::identity(cutoff.pow(j as u32), cutoff.pow(j as u32));
    high.kronecker(&op.kronecker(&low))
}

fn quadratures(modes: usize, cutoff: usize, hbar: f64) -> Vec<ComplexMatrix> {
    let a = ladder(cutoff);
    let ad = a.adjoint();
    let s = Complex64::from((hbar / 2.0).sqrt());
    let q1 = (&a + &ad) * s;
    let p1 = (&a - &ad) * (s * -I);
    let mut x: Vec<ComplexMatrix> = (0..modes).map(|j| embed(&q1, j, modes, cutoff)).collect();
    x.extend((0..modes).map(|j| embed(&p1, j, modes, cutoff)));
    x
}

/// Restriction of a padded-space operator to the cutoff-`N` subspace.
fn restrict(m: &ComplexMatrix, padded: usize, cutoff: usize, modes: usize) -> ComplexMatrix {
    let dim = cutoff.pow(modes as u32);
    let map: Vec<usize> = (0..dim)
        .map(|idx| {
            occupations(idx, cutoff, modes)
                .iter()
                .rev()
                .fold(0, |acc, &k| acc * padded + k)
        })
        .collect();
    ComplexMatrix::from_fn(dim, dim, |r, c| m[(map[r], map[c])])
}

/// Builds `q̂_j`, `p̂_j` from ladder operators at cutoff `N` per mode.
pub fn build_canonical_ops(modes: usize, cutoff: usize, hbar: f64) -> Result<CanonicalOps> {
    check_hbar(hbar)?;
    if modes == 0 {
        return Err(GdsError::ZeroModes);
    }
    if cutoff < 2 {
        return Err(GdsError::InvalidParameter(format!("cutoff must be at least 2, got {cutoff}")));
    }
    let dim = (cutoff as u128).pow(modes as u32);
    let padded_dim = ((cutoff + 1) as u128).pow(modes as u32);
    if padded_dim > DIM_BUDGET as u128 * 2 || dim > DIM_BUDGET as u128 {
        return Err(GdsError::CutoffBudget {
            dim: dim.min(usize::MAX as u128) as usize,
            budget: DIM_BUDGET,
        });
    }
    let x = quadratures(modes, cutoff, hbar);
    // Products of two quadratures need one extra level per mode to be exact.
    let padded = cutoff + 1;
    let xp = quadratures(modes, padded, hbar);
    let mut x2 = vec![vec![ComplexMatrix::zeros(0, 0); 2 * modes]; 2 * modes];
    for i in 0..2 * modes {
        for j in i..2 * modes {
            let prod = (&xp[i] * &xp[j] + &xp[j] * &xp[i]) * Complex64::from(0.5);
            let m = restrict(&prod, padded, cutoff, modes);
            x2[j][i] = m.clone();
            x2[i][j] = m;
        }
    }
    Ok(CanonicalOps {
        modes,
        cutoff,
        hbar,
        x,
        x2,
    })
}

/// `Ĥ = ½ x̂ᵀ B x̂ + x̂ᵀ J ξ`.
pub fn build_hamiltonian(b: &RealMatrix, xi: Option<&RealVector>, ops: &CanonicalOps) -> Result<ComplexMatrix> {
    let n = phase_space_modes(b)?;
    if n != ops.modes {
        return Err(GdsError::DimensionMismatch {
            expected: 2 * ops.modes,
            found: b.nrows(),
        });
    }
    ensure_symmetric(b, 1e-12)?;
    let dim = ops.dim();
    let mut h = ComplexMatrix::zeros(dim, dim);
    for i in 0..2 * n {
        for j in 0..2 * n {
            let bij = 0.5 * (b[(i, j)] + b[(j, i)]);
            if bij != 0.0 {
                h += &ops.x2[i][j] * Complex64::from(0.5 * bij);
            }
        }
    }
    if let Some(xi) = xi {
        if xi.len() != 2 * n {
            return Err(GdsError::DimensionMismatch {
                expected: 2 * n,
                found: xi.len(),
            });
        }
        let jxi = j_matrix(n) * xi;
        for i in 0..2 * n {
            if jxi[i] != 0.0 {
                h += &ops.x[i] * Complex64::from(jxi[i]);
            }
        }
    }
    Ok((&h + h.adjoint()) * Complex64::from(0.5))
}

/// `L̂ = lᵀ J x̂` for each vector.
pub fn build_lindblad_ops(vectors: &[ComplexVector], ops: &CanonicalOps) -> Result<Vec<ComplexMatrix>> {
    let n = ops.modes;
    let j = crate::linalg::to_complex(&j_matrix(n));
    vectors
        .iter()
        .map(|l| {
            if l.len() != 2 * n {
                return Err(GdsError::DimensionMismatch {
                    expected: 2 * n,
                    found: l.len(),
                });
            }
            let coeff = j.transpose() * l;
            let mut m = ComplexMatrix::zeros(ops.dim(), ops.dim());
            for i in 0..2 * n {
                if coeff[i] != Complex64::from(0.0) {
                    m += &ops.x[i] * coeff[i];
                }
            }
            Ok(m)
        })
        .collect()
}

/// Lindblad generator `ρ ↦ −(i/ħ)[Ĥ, ρ] + (1/ħ) Σ (L ρ L† − ½{L†L, ρ})`.
#[derive(Debug, Clone)]
pub struct LindbladGenerator {
    pub hamiltonian: ComplexMatrix,
    pub lindblads: Vec<ComplexMatrix>,
    pub hbar: f64,
    /// `−(i/ħ)(Ĥ − (i/2) Σ L†L)`.
    effective: ComplexMatrix,
    /// `Σ L†L`.
    loss: ComplexMatrix,
}

impl LindbladGenerator {
    pub fn new(hamiltonian: ComplexMatrix, lindblads: Vec<ComplexMatrix>, hbar: f64) -> Result<Self> {
        check_hbar(hbar)?;
        let dim = hamiltonian.nrows();
        let mut loss = ComplexMatrix::zeros(dim, dim);
        for l in &lindblads {
            if l.shape() != (dim, dim) {
                return Err(GdsError::DimensionMismatch {
                    expected: dim,
                    found: l.nrows(),
                });
            }
            loss += l.adjoint() * l;
        }
        let effective = (&hamiltonian - &loss * Complex64::new(0.0, 0.5)) * Complex64::new(0.0, -1.0 / hbar);
        Ok(Self {
            hamiltonian,
            lindblads,
            hbar,
            effective,
            loss,
        })
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    /// `dρ/dt` for Hermitian `ρ`.
    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let k = &self.effective * rho;
        let mut out = &k + k.adjoint();
        let inv_hbar = Complex64::from(1.0 / self.hbar);
        for l in &self.lindblads {
            out += l * rho * l.adjoint() * inv_hbar;
        }
        out
    }

    /// Heisenberg-picture generator split into its Hamiltonian and dissipative parts.
    pub fn heisenberg_parts(&self, a: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
        let scale = Complex64::new(0.0, 1.0 / self.hbar);
        let unitary = (&self.hamiltonian * a - a * &self.hamiltonian) * scale;
        let inv_hbar = Complex64::from(1.0 / self.hbar);
        let mut diss = (&self.loss * a + a * &self.loss) * Complex64::from(-0.5 / self.hbar);
        for l in &self.lindblads {
            diss += l.adjoint() * a * l * inv_hbar;
        }
        (unitary, diss)
    }

    pub fn heisenberg_apply(&self, a: &ComplexMatrix) -> ComplexMatrix {
        let (u, d) = self.heisenberg_parts(a);
        u + d
    }

    fn rk4_step(&self, rho: &ComplexMatrix, h: f64) -> ComplexMatrix {
        let h2 = Complex64::from(h / 2.0);
        let k1 = self.apply(rho);
        let k2 = self.apply(&(rho + &k1 * h2));
        let k3 = self.apply(&(rho + &k2 * h2));
        let k4 = self.apply(&(rho + &k3 * Complex64::from(h)));
        let out = rho + (k1 + (k2 + k3) * Complex64::from(2.0) + k4) * Complex64::from(h / 6.0);
        (&out + out.adjoint()) * Complex64::from(0.5)
    }
}

/// Normalized Gibbs state `e^{−βĤ}/Z` from the eigendecomposition of the truncated `Ĥ`.
#[derive(Debug, Clone)]
pub struct GibbsState {
    pub rho: ComplexMatrix,
    /// Eigenvalues of `Ĥ`, ascending.
    pub energies: Vec<f64>,
    /// Eigenvectors of `Ĥ` as columns, matching `energies`.
    pub eigenvectors: ComplexMatrix,
    /// Populations in the energy eigenbasis.
    pub populations: Vec<f64>,
}

pub fn gibbs_state(h: &ComplexMatrix, beta: f64) -> GibbsState {
    let eig = SymmetricEigen::new((h + h.adjoint()) * Complex64::from(0.5));
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energies: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let e0 = energies[0];
    let weights: Vec<f64> = energies.iter().map(|e| (-beta * (e - e0)).exp()).collect();
    let z: f64 = weights.iter().sum();
    let populations: Vec<f64> = weights.iter().map(|w| w / z).collect();
    let dim = h.nrows();
    let mut vecs = ComplexMatrix::zeros(dim, dim);
    for (col, &k) in order.iter().enumerate() {
        vecs.set_column(col, &eig.eigenvectors.column(k));
    }
    let mut scaled = vecs.clone();
    for (col, p) in populations.iter().enumerate() {
        scaled.column_mut(col).scale_mut(*p);
    }
    let rho = &scaled * vecs.adjoint();
    GibbsState {
        rho: (&rho + rho.adjoint()) * Complex64::from(0.5),
        energies,
        eigenvectors: vecs,
        populations,
    }
}

/// Single-mode Planck populations `(1 − e^{−x}) e^{−kx}` for `k < count`.
pub fn planck_populations(hbar_beta_w: f64, count: usize) -> Vec<f64> {
    let norm = -(-hbar_beta_w).exp_m1();
    (0..count).map(|k| norm * (-(k as f64) * hbar_beta_w).exp()).collect()
}

/// Pure coherent state `|α_1, ..., α_n⟩`, truncated and renormalized.
pub fn coherent_state(alphas: &[Complex64], ops: &CanonicalOps) -> Result<ComplexMatrix> {
    if alphas.len() != ops.modes {
        return Err(GdsError::DimensionMismatch {
            expected: ops.modes,
            found: alphas.len(),
        });
    }
    let n = ops.cutoff;
    let single: Vec<Vec<Complex64>> = alphas
        .iter()
        .map(|&alpha| {
            let mut amp = Vec::with_capacity(n);
            let mut c = Complex64::from((-alpha.norm_sqr() / 2.0).exp());
            for k in 0..n {
                if k > 0 {
                    c = c * alpha / (k as f64).sqrt();
                }
                amp.push(c);
            }
            amp
        })
        .collect();
    let dim = ops.dim();
    let mut psi = ComplexVector::zeros(dim);
    for idx in 0..dim {
        psi[idx] = occupations(idx, n, ops.modes)
            .iter()
            .enumerate()
            .fold(Complex64::from(1.0), |acc, (m, &k)| acc * single[m][k]);
    }
    let norm = psi.norm();
    psi.unscale_mut(norm);
    Ok(&psi * psi.adjoint())
}

/// `Tr(ρ A)` without forming the product.
pub fn expectation(rho: &ComplexMatrix, a: &ComplexMatrix) -> Complex64 {
    rho.transpose().component_mul(a).sum()
}

/// Mean and covariance `V = (1/2ħ) ⟨{Δx, Δxᵀ}⟩` of a density matrix.
pub fn moments(rho: &ComplexMatrix, ops: &CanonicalOps) -> (RealVector, RealMatrix) {
    let d = 2 * ops.modes;
    let mean = RealVector::from_iterator(d, ops.x.iter().map(|x| expectation(rho, x).re));
    let mut v = RealMatrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let s = expectation(rho, &ops.x2[i][j]).re;
            let vij = (s - mean[i] * mean[j]) / ops.hbar;
            v[(i, j)] = vij;
            v[(j, i)] = vij;
        }
    }
    (mean, v)
}

/// Sampled moments of a truncated master-equation run.
#[derive(Debug, Clone, PartialEq)]
pub struct FockTrajectory {
    pub times: Vec<f64>,
    pub means: Vec<RealVector>,
    pub covariances: Vec<RealMatrix>,
    pub max_trace_drift: f64,
    /// Smallest eigenvalue of `ρ_t` seen at the samples.
    pub min_eigenvalue: f64,
    /// Largest population found on the top level of any mode.
    pub edge_population: f64,
}

fn edge_population(rho: &ComplexMatrix, ops: &CanonicalOps) -> f64 {
    (0..ops.dim())
        .filter(|&idx| occupations(idx, ops.cutoff, ops.modes).contains(&(ops.cutoff - 1)))
        .map(|idx| rho[(idx, idx)].re)
        .fold(0.0, f64::max)
}

/// RK4 evolution of `ρ`, recording moments every `sample_every` steps.
pub fn integrate_moments(
    rho0: &ComplexMatrix,
    generator: &LindbladGenerator,
    ops: &CanonicalOps,
    config: &OracleConfig,
    sample_every: usize,
) -> Result<FockTrajectory> {
    config.validate()?;
    if rho0.shape() != (ops.dim(), ops.dim()) || generator.dim() != ops.dim() {
        return Err(GdsError::DimensionMismatch {
            expected: ops.dim(),
            found: rho0.nrows(),
        });
    }
    let steps = ((config.t_max / config.dt).round() as usize).max(1);
    let h = config.t_max / steps as f64;
    let sample_every = sample_every.max(1);
    let mut rho = rho0.clone();
    let mut traj = FockTrajectory {
        times: Vec::new(),
        means: Vec::new(),
        covariances: Vec::new(),
        max_trace_drift: 0.0,
        min_eigenvalue: f64::INFINITY,
        edge_population: 0.0,
    };
    let record = |rho: &ComplexMatrix, t: f64, traj: &mut FockTrajectory| -> Result<()> {
        let drift = (rho.trace().re - 1.0).abs();
        traj.max_trace_drift = traj.max_trace_drift.max(drift);
        if !(drift <= config.trace_tol) {
            return Err(GdsError::TraceDrift { drift });
        }
        let (m, v) = moments(rho, ops);
        traj.times.push(t);
        traj.means.push(m);
        traj.covariances.push(v);
        traj.min_eigenvalue = traj.min_eigenvalue.min(crate::linalg::min_hermitian_eigenvalue(rho));
        traj.edge_population = traj.edge_population.max(edge_population(rho, ops));
        Ok(())
    };
    record(&rho, 0.0, &mut traj)?;
    for s in 1..=steps {
        rho = generator.rk4_step(&rho, h);
        if s % sample_every == 0 || s == steps {
            record(&rho, s as f64 * h, &mut traj)?;
        }
    }
    Ok(traj)
}

/// `⟨A, B⟩ = Tr(σ̄ A† B)`.
pub fn gns_inner(a: &ComplexMatrix, b: &ComplexMatrix, sigma: &ComplexMatrix) -> Complex64 {
    (sigma * a.adjoint() * b).trace()
}

/// Deviation of the Heisenberg generator from GNS symmetry.
///
/// The dissipative part must be self-adjoint and the Hamiltonian part
/// anti-self-adjoint; both defects are normalized by the largest
/// `|⟨A, L̄[B]⟩|` over the basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetailedBalanceReport {
    pub dissipative_defect: f64,
    pub hamiltonian_defect: f64,
    pub scale: f64,
}

impl DetailedBalanceReport {
    pub fn defect(&self) -> f64 {
        if self.scale == 0.0 {
            return self.dissipative_defect.max(self.hamiltonian_defect);
        }
        self.dissipative_defect.max(self.hamiltonian_defect) / self.scale
    }
}

/// `{1, q_j, p_j, q_j², p_j², (q_j p_j + p_j q_j)/2}` for every mode, cut to the interior block.
pub fn monomial_basis(ops: &CanonicalOps, margin: usize) -> Vec<ComplexMatrix> {
    let p = ops.interior_projector(margin);
    let n = ops.modes;
    let mut basis = vec![p.clone()];
    for j in 0..n {
        for m in [&ops.x[j], &ops.x[n + j], &ops.x2[j][j], &ops.x2[n + j][n + j], &ops.x2[j][n + j]] {
            basis.push(&p * m * &p);
        }
    }
    basis
}

pub fn detailed_balance_defect(
    generator: &LindbladGenerator,
    sigma: &ComplexMatrix,
    basis: &[ComplexMatrix],
) -> DetailedBalanceReport {
    let parts: Vec<(ComplexMatrix, ComplexMatrix)> = basis.iter().map(|b| generator.heisenberg_parts(b)).collect();
    let mut report = DetailedBalanceReport {
        dissipative_defect: 0.0,
        hamiltonian_defect: 0.0,
        scale: 0.0,
    };
    for (a, (ua, da)) in basis.iter().zip(&parts) {
        for (b, (ub, db)) in basis.iter().zip(&parts) {
            let d_ab = gns_inner(a, db, sigma) - gns_inner(da, b, sigma);
            let u_ab = gns_inner(a, ub, sigma) + gns_inner(ua, b, sigma);
            let full = gns_inner(a, &(ub + db), sigma);
            report.dissipative_defect = report.dissipative_defect.max(d_ab.norm());
            report.hamiltonian_defect = report.hamiltonian_defect.max(u_ab.norm());
            report.scale = report.scale.max(full.norm());
        }
    }
    report
}

/// `‖P [A, B] P‖_max` on the interior block.
pub fn interior_commutator(a: &ComplexMatrix, b: &ComplexMatrix, ops: &CanonicalOps, margin: usize) -> f64 {
    let p = ops.interior_projector(margin);
    max_abs_c(&(&p * (a * b - b * a) * &p))
}

/// Fock-space moments set against the Gaussian moment equations.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleComparison {
    pub fock: FockTrajectory,
    pub gaussian_means: Vec<RealVector>,
    pub gaussian_covariances: Vec<RealMatrix>,
    pub max_mean_deviation: f64,
    pub max_cov_deviation: f64,
}

/// Initial phase-space mean of a coherent state: `⟨q⟩ = √(2ħ) Re α`, `⟨p⟩ = √(2ħ) Im α`.
pub fn coherent_mean(alphas: &[Complex64], hbar: f64) -> RealVector {
    let n = alphas.len();
    let s = (2.0 * hbar).sqrt();
    RealVector::from_fn(2 * n, |i, _| if i < n { s * alphas[i].re } else { s * alphas[i - n].im })
}

pub fn compare_with_gaussian(
    spec: &GdsSpec,
    alphas: &[Complex64],
    config: &OracleConfig,
    sample_every: usize,
) -> Result<OracleComparison> {
    let n = spec.modes();
    let ops = build_canonical_ops(n, config.cutoff, spec.hbar)?;
    let h = build_hamiltonian(&spec.b_prime, Some(&spec.xi_prime), &ops)?;
    let ls = build_lindblad_ops(&spec.lindblad_vectors, &ops)?;
    let generator = LindbladGenerator::new(h, ls, spec.hbar)?;
    let rho0 = coherent_state(alphas, &ops)?;
    let fock = integrate_moments(&rho0, &generator, &ops, config, sample_every)?;

    let noise = spec.noise()?;
    let a = spec.drift()?;
    let mean0 = coherent_mean(alphas, spec.hbar);
    let v0 = RealMatrix::identity(2 * n, 2 * n) * 0.5;
    let moment_config = MomentConfig::default();
    let mut report = OracleComparison {
        gaussian_means: Vec::with_capacity(fock.times.len()),
        gaussian_covariances: Vec::with_capacity(fock.times.len()),
        max_mean_deviation: 0.0,
        max_cov_deviation: 0.0,
        fock,
    };
    for (k, &t) in report.fock.times.iter().enumerate() {
        let (m, v) = if t == 0.0 {
            (mean0.clone(), v0.clone())
        } else {
            (
                evolve_mean(&a, &spec.xi_prime, &mean0, t)?,
                evolve_cov(&a, &noise.d, &v0, t, spec.hbar, &moment_config)?,
            )
        };
        report.max_mean_deviation = report.max_mean_deviation.max((&m - &report.fock.means[k]).amax());
        report.max_cov_deviation = report.max_cov_deviation.max((&v - &report.fock.covariances[k]).amax());
        report.gaussian_means.push(m);
        report.gaussian_covariances.push(v);
    }
    Ok(report)
}

/// Stationarity and detailed-balance diagnostics of the Gibbs state of `Ĥ`.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsCheck {
    pub cutoff: usize,
    /// `max |L[ρ_G]|`.
    pub stationarity_residual: f64,
    pub detailed_balance: DetailedBalanceReport,
    /// Largest deviation from Planck populations over the lower half of the ladder (single mode only).
    pub planck_defect: Option<f64>,
}

pub fn gibbs_check(spec: &GdsSpec, thermal: &ThermalSpec, cutoff: usize) -> Result<GibbsCheck> {
    let n = spec.modes();
    if thermal.modes() != n {
        return Err(GdsError::DimensionMismatch {
            expected: 2 * n,
            found: thermal.b.nrows(),
        });
    }
    let ops = build_canonical_ops(n, cutoff, spec.hbar)?;
    let h0 = build_hamiltonian(&thermal.b, None, &ops)?;
    let gibbs = gibbs_state(&h0, thermal.beta);
    let h = build_hamiltonian(&spec.b_prime, Some(&spec.xi_prime), &ops)?;
    let ls = build_lindblad_ops(&spec.lindblad_vectors, &ops)?;
    let generator = LindbladGenerator::new(h, ls, spec.hbar)?;
    let stationarity_residual = max_abs_c(&generator.apply(&gibbs.rho));
    let basis = monomial_basis(&ops, INTERIOR_MARGIN);
    let detailed_balance = detailed_balance_defect(&generator, &gibbs.rho, &basis);
    let planck_defect = if n == 1 {
        let profile = thermal.profile()?;
        let x = thermal.hbar * thermal.beta * profile.frequencies[0];
        let expected = planck_populations(x, cutoff / 2);
        Some(
            expected
                .iter()
                .zip(&gibbs.populations)
                .map(|(e, p)| (e - p).abs())
                .fold(0.0, f64::max),
        )
    } else {
        None
    };
    Ok(GibbsCheck {
        cutoff,
        stationarity_residual,
        detailed_balance,
        planck_defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_commutator() {
        let ops = build_canonical_ops(1, 8, 1.0).unwrap();
        let c = ops.q(0) * ops.p(0) - ops.p(0) * ops.q(0);
        for k in 0..7 {
            assert!((c[(k, k)] - I).norm() < 1e-14);
        }
        assert!((c[(7, 7)] - I * -7.0).norm() < 1e-13);
        let q2 = ops.q(0) * ops.q(0);
        assert!((q2[(0, 0)].re - 0.5).abs() < 1e-15);
        for x in &ops.x {
            assert!(max_abs_c(&(x - x.adjoint())) < 1e-15);
        }
    }

    #[test]
    fn budget_enforced() {
        assert!(matches!(build_canonical_ops(2, 80, 1.0), Err(GdsError::CutoffBudget { .. })));
        assert!(build_canonical_ops(2, 16, 1.0).is_ok());
    }

    #[test]
    fn oscillator_spectrum() {
        let ops = build_canonical_ops(1, 12, 1.0).unwrap();
        let w = 1.7;
        let h = build_hamiltonian(&(RealMatrix::identity(2, 2) * w), None, &ops).unwrap();
        let g = gibbs_state(&h, 1.0);
        for (k, e) in g.energies.iter().enumerate() {
            assert!((e - w * (k as f64 + 0.5)).abs() < 1e-12);
        }
        let zero = build_hamiltonian(&RealMatrix::zeros(2, 2), None, &ops).unwrap();
        assert_eq!(max_abs_c(&zero), 0.0);
    }

    #[test]
    fn reference_lindblad_is_lowering() {
        let ops = build_canonical_ops(1, 10, 1.0).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let lbar = ComplexVector::from_vec(vec![Complex64::new(h, 0.0), Complex64::new(0.0, h)]);
        let l = &build_lindblad_ops(&[lbar], &ops).unwrap()[0];
        let expected = ops.annihilation(0) * -I;
        assert!(max_abs_c(&(l - expected)) < 1e-14);
        let real = ComplexVector::from_vec(vec![Complex64::from(0.3), Complex64::from(-1.2)]);
        let lr = &build_lindblad_ops(&[real], &ops).unwrap()[0];
        assert!(max_abs_c(&(lr - lr.adjoint())) < 1e-15);
    }

    #[test]
    fn generator_trace_free_and_unitary_fixed_point() {
        let ops = build_canonical_ops(1, 12, 1.0).unwrap();
        let h = build_hamiltonian(&RealMatrix::identity(2, 2), None, &ops).unwrap();
        let gibbs = gibbs_state(&h, 0.8);
        let unitary = LindbladGenerator::new(h.clone(), Vec::new(), 1.0).unwrap();
        assert!(max_abs_c(&unitary.apply(&gibbs.rho)) < 1e-14);
        let a = ops.annihilation(0);
        let gen = LindbladGenerator::new(h, vec![a.clone() * Complex64::from(0.3)], 1.0).unwrap();
        let rho = coherent_state(&[Complex64::new(0.6, 0.2)], &ops).unwrap();
        let d = gen.apply(&rho);
        assert!(d.trace().norm() < 1e-14);
        assert!(max_abs_c(&d) > 1e-3);
    }

    #[test]
    fn gns_basics() {
        let ops = build_canonical_ops(1, 40, 1.0).unwrap();
        let h = build_hamiltonian(&RealMatrix::identity(2, 2), None, &ops).unwrap();
        let g = gibbs_state(&h, 1.0);
        let id = ops.identity();
        assert!((gns_inner(&id, &id, &g.rho) - Complex64::from(1.0)).norm() < 1e-14);
        let a = ops.annihilation(0);
        let nbar = 1.0 / (1f64.exp() - 1.0);
        assert!((gns_inner(&a, &a, &g.rho).re - nbar).abs() < 1e-12);
        let b = ops.q(0) * ops.p(0);
        let lhs = gns_inner(&a, &b, &g.rho);
        let rhs = gns_inner(&b, &a, &g.rho).conj();
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn planck_matches_gibbs() {
        let ops = build_canonical_ops(1, 40, 1.0).unwrap();
        let h = build_hamiltonian(&(RealMatrix::identity(2, 2) * 1.3), None, &ops).unwrap();
        let g = gibbs_state(&h, 0.9);
        let expected = planck_populations(1.3 * 0.9, 20);
        for (p, e) in g.populations.iter().zip(&expected) {
            assert!((p - e).abs() < 1e-8);
        }
    }

    #[test]
    fn coherent_moments() {
        let ops = build_canonical_ops(1, 40, 1.0).unwrap();
        let rho = coherent_state(&[Complex64::from(std::f64::consts::FRAC_1_SQRT_2)], &ops).unwrap();
        let (m, v) = moments(&rho, &ops);
        assert!((m[0] - 1.0).abs() < 1e-12 && m[1].abs() < 1e-12);
        assert!((v - RealMatrix::identity(2, 2) * 0.5).amax() < 1e-12);
    }

    #[test]
    fn reference_oracle_agrees() {
        use crate::qdbc::{build_lindblad_vectors, QdbcSpec};
        let q = QdbcSpec::single_mode(1.0, 0.2, 1.0, 1.0).unwrap();
        let set = build_lindblad_vectors(&q).unwrap();
        let spec = q.gds_spec(None).unwrap();
        assert_eq!(spec.lindblad_vectors, set.vectors);
        let config = OracleConfig { cutoff: 30, t_max: 2.0, ..OracleConfig::default() };
        let cmp = compare_with_gaussian(&spec, &[Complex64::from(std::f64::consts::FRAC_1_SQRT_2)], &config, 20).unwrap();
        assert!(cmp.max_mean_deviation < 1e-6, "{}", cmp.max_mean_deviation);
        assert!(cmp.max_cov_deviation < 1e-6, "{}", cmp.max_cov_deviation);
        let check = gibbs_check(&spec, &q.thermal, 30).unwrap();
        assert!(check.stationarity_residual < 1e-12, "{}", check.stationarity_residual);
        assert!(check.detailed_balance.defect() < 1e-10, "{:?}", check.detailed_balance);
        assert!(check.planck_defect.unwrap() < 1e-12);
    }
}
