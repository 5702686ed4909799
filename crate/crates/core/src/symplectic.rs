//! Symplectic linear algebra on the phase space of `n` bosonic modes.
//!
//! All matrices use the block ordering `x = (q_1, ..., q_n, p_1, ..., p_n)`,
//! so the symplectic form is `J = [[0, 1], [-1, 0]]` in `n x n` blocks.
//! A real matrix `S` is symplectic when `S J Sᵀ = J`.

use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use crate::error::{GdsError, Result};
use crate::linalg::{
    antisymmetrize, ensure_positive_definite, ensure_symmetric, max_abs, max_abs_c,
    phase_space_modes, sym_sqrt_pair, symmetrize, to_complex, ComplexMatrix, ComplexVector,
    RealMatrix, I,
};

/// Relative threshold on the smallest eigenvalue used to accept a matrix as
/// positive definite.
pub const POSITIVE_DEFINITE_TOL: f64 = 1e-12;

/// Symplectic eigenvalues closer than this (relative) are treated as one
/// degenerate block.
const DEGENERACY_TOL: f64 = 1e-8;

/// The standard symplectic form for `n` modes.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticForm {
    n: usize,
    matrix: RealMatrix,
}

impl SymplecticForm {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(GdsError::ZeroModes);
        }
        Ok(Self {
            n,
            matrix: j_matrix(n),
        })
    }

    pub fn modes(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &RealMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> RealMatrix {
        self.matrix
    }
}

/// Builds `J` for `n` modes.
pub fn standard_form(n: usize) -> Result<SymplecticForm> {
    SymplecticForm::new(n)
}

/// `J` without the mode-count check; `n = 0` yields an empty matrix.
pub(crate) fn j_matrix(n: usize) -> RealMatrix {
    let mut j = RealMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        j[(k, n + k)] = 1.0;
        j[(n + k, k)] = -1.0;
    }
    j
}

/// `‖S J Sᵀ − J‖_max`.
pub fn symplectic_defect(s: &RealMatrix) -> f64 {
    let n = s.nrows() / 2;
    let j = j_matrix(n);
    max_abs(&(s * &j * s.transpose() - &j))
}

pub fn is_symplectic(s: &RealMatrix, tol: f64) -> bool {
    s.nrows() == s.ncols() && s.nrows().is_multiple_of(2) && symplectic_defect(s) <= tol
}

/// Inverse of a symplectic matrix, `S⁻¹ = Jᵀ Sᵀ J`.
pub fn symplectic_inverse(s: &RealMatrix) -> RealMatrix {
    let j = j_matrix(s.nrows() / 2);
    j.transpose() * s.transpose() * j
}

/// Result of a Williamson normal-form computation: `S V Sᵀ = diag(κ) ⊕ diag(κ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WilliamsonDecomposition {
    /// The symplectic matrix `S`.
    pub symplectic: RealMatrix,
    /// Symplectic eigenvalues, ascending.
    pub spectrum: Vec<f64>,
}

impl WilliamsonDecomposition {
    pub fn modes(&self) -> usize {
        self.spectrum.len()
    }

    /// `diag(κ) ⊕ diag(κ)`.
    pub fn normal_form(&self) -> RealMatrix {
        crate::linalg::doubled_diagonal(&self.spectrum)
    }

    /// `S⁻¹`, computed through the symplectic structure.
    pub fn symplectic_inverse(&self) -> RealMatrix {
        symplectic_inverse(&self.symplectic)
    }

    /// Rebuilds `V = S⁻¹ (κ ⊕ κ) S⁻ᵀ`.
    pub fn reconstruct(&self) -> RealMatrix {
        let inv = self.symplectic_inverse();
        &inv * self.normal_form() * inv.transpose()
    }
}

/// Williamson decomposition of a real symmetric positive-definite matrix.
///
/// `tol` is the relative positive-definiteness threshold (see
/// [`POSITIVE_DEFINITE_TOL`]). Within degenerate blocks of the spectrum the
/// mode basis is fixed by pivoted Gram-Schmidt against the canonical
/// vectors `(i e_k + e_{n+k}) / √2`, visited in index order, so the result
/// is a deterministic function of `V`. In particular any `V` that is already
/// in normal form returns `S = I`.
pub fn williamson(v: &RealMatrix, tol: f64) -> Result<WilliamsonDecomposition> {
    let n = phase_space_modes(v)?;
    ensure_symmetric(v, 1e-10)?;
    let v = symmetrize(v);
    ensure_positive_definite(&v, tol)?;

    let (_, inv_root) = sym_sqrt_pair(&v);
    let j = j_matrix(n);
    // M = V^{-1/2} J V^{-1/2} is real antisymmetric with eigenvalues ±i/κ_k;
    // iM is Hermitian and is similar to the Hamiltonian matrix JV up to i.
    let m = antisymmetrize(&(&inv_root * &j * &inv_root));
    let herm = to_complex(&m) * I;
    let eig = SymmetricEigen::new(herm);

    let mut positive: Vec<(f64, usize)> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &mu)| mu > 0.0)
        .map(|(k, &mu)| (mu, k))
        .collect();
    if positive.len() != n {
        return Err(GdsError::Singular(format!(
            "expected {n} positive symplectic frequencies, found {}",
            positive.len()
        )));
    }
    positive.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut orthogonal = RealMatrix::zeros(2 * n, 2 * n);
    let mut spectrum = Vec::with_capacity(n);
    let mu_scale = positive[0].0;
    let mut start = 0;
    let mut mode = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (positive[start].0 - positive[end].0).abs() <= DEGENERACY_TOL * mu_scale {
            end += 1;
        }
        let block: Vec<ComplexVector> = positive[start..end]
            .iter()
            .map(|&(_, k)| eig.eigenvectors.column(k).into_owned())
            .collect();
        let mu_mean = positive[start..end].iter().map(|p| p.0).sum::<f64>() / (end - start) as f64;
        for u in canonical_block_basis(&block, n) {
            let s2 = std::f64::consts::SQRT_2;
            for r in 0..2 * n {
                orthogonal[(r, mode)] = s2 * u[r].im;
                orthogonal[(r, n + mode)] = s2 * u[r].re;
            }
            spectrum.push(1.0 / mu_mean);
            mode += 1;
        }
        start = end;
    }

    let mut scale = RealMatrix::zeros(2 * n, 2 * n);
    for (k, &kappa) in spectrum.iter().enumerate() {
        scale[(k, k)] = kappa.sqrt();
        scale[(n + k, n + k)] = kappa.sqrt();
    }
    let symplectic = scale * orthogonal.transpose() * inv_root;
    Ok(WilliamsonDecomposition {
        symplectic,
        spectrum,
    })
}

/// Picks a deterministic orthonormal basis of the span of `block`.
fn canonical_block_basis(block: &[ComplexVector], n: usize) -> Vec<ComplexVector> {
    let dim = 2 * n;
    let want = block.len();
    let project = |w: &ComplexVector| -> ComplexVector {
        let mut out = ComplexVector::zeros(dim);
        for u in block {
            out += u * u.dotc(w);
        }
        out
    };
    let half = std::f64::consts::FRAC_1_SQRT_2;
    let mut chosen: Vec<(usize, ComplexVector)> = Vec::with_capacity(want);
    let mut remaining: Vec<usize> = (0..n).collect();
    while chosen.len() < want && !remaining.is_empty() {
        let mut best: Option<(usize, ComplexVector, f64)> = None;
        for (slot, &k) in remaining.iter().enumerate() {
            let mut c = ComplexVector::zeros(dim);
            c[k] = Complex64::new(0.0, half);
            c[n + k] = Complex64::new(half, 0.0);
            let mut w = project(&c);
            for (_, q) in &chosen {
                let coeff = q.dotc(&w);
                w -= q * coeff;
            }
            let norm = w.norm();
            if best.as_ref().is_none_or(|b| norm > b.2) {
                best = Some((slot, w, norm));
            }
        }
        let (slot, w, norm) = best.expect("remaining candidates");
        if norm < 1e-6 {
            break;
        }
        let k = remaining.remove(slot);
        chosen.push((k, w.unscale(norm)));
    }
    // Candidates nearly orthogonal to the block: complete with the raw vectors.
    let mut extra = Vec::new();
    for u in block {
        if chosen.len() + extra.len() >= want {
            break;
        }
        let mut w = u.clone();
        for q in chosen.iter().map(|c| &c.1).chain(extra.iter()) {
            let coeff = q.dotc(&w);
            w -= q * coeff;
        }
        let norm = w.norm();
        if norm > 1e-6 {
            extra.push(w.unscale(norm));
        }
    }
    chosen.sort_by_key(|c| c.0);
    chosen.into_iter().map(|c| c.1).chain(extra).collect()
}

/// The unitary `Q = (1/√2) [[1, -i], [-i, 1]]` (in `n x n` blocks).
pub fn q_matrix(n: usize) -> ComplexMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut q = ComplexMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        q[(k, k)] = Complex64::new(h, 0.0);
        q[(n + k, n + k)] = Complex64::new(h, 0.0);
        q[(k, n + k)] = Complex64::new(0.0, -h);
        q[(n + k, k)] = Complex64::new(0.0, -h);
    }
    q
}

/// Diagonal of a canonical form `(iλ) ⊕ (−iλ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalDiagonal {
    pub values: Vec<f64>,
}

impl CanonicalDiagonal {
    pub fn to_matrix(&self) -> ComplexMatrix {
        let n = self.values.len();
        let mut d = ComplexMatrix::zeros(2 * n, 2 * n);
        for (k, &v) in self.values.iter().enumerate() {
            d[(k, k)] = Complex64::new(0.0, v);
            d[(n + k, n + k)] = Complex64::new(0.0, -v);
        }
        d
    }
}

/// Complex diagonalization of the Hamiltonian matrix `O J` for `O = Oᵀ > 0`.
#[derive(Debug, Clone)]
pub struct HamiltonianDiagonalization {
    /// Williamson symplectic matrix of `O`.
    pub symplectic: RealMatrix,
    /// `M = Q S`, with `M (O J) M⁻¹ = (i o) ⊕ (−i o)`.
    pub transform: ComplexMatrix,
    pub canonical: CanonicalDiagonal,
}

impl HamiltonianDiagonalization {
    /// `M⁻¹ = S⁻¹ Q†`.
    pub fn inverse_transform(&self) -> ComplexMatrix {
        to_complex(&symplectic_inverse(&self.symplectic)) * self.transform_q().adjoint()
    }

    fn transform_q(&self) -> ComplexMatrix {
        q_matrix(self.canonical.values.len())
    }

    /// `Q S⁻ᵀ`, which brings `J O` to the same canonical form.
    pub fn dual_transform(&self) -> ComplexMatrix {
        let s_inv_t = symplectic_inverse(&self.symplectic).transpose();
        self.transform_q() * to_complex(&s_inv_t)
    }

    /// `‖M (O J) M⁻¹ − (i o) ⊕ (−i o)‖_max`.
    pub fn residual(&self, o: &RealMatrix) -> f64 {
        let j = j_matrix(o.nrows() / 2);
        let oj = to_complex(&(o * j));
        let lhs = &self.transform * oj * self.inverse_transform();
        max_abs_c(&(lhs - self.canonical.to_matrix()))
    }

    /// Residual of the `J O` variant, using [`Self::dual_transform`].
    pub fn dual_residual(&self, o: &RealMatrix) -> f64 {
        let j = j_matrix(o.nrows() / 2);
        let jo = to_complex(&(j * o));
        let m = self.dual_transform();
        let m_inv = q_matrix(self.canonical.values.len()).adjoint();
        let m_inv = to_complex(&self.symplectic.transpose()) * m_inv;
        max_abs_c(&(&m * jo * m_inv - self.canonical.to_matrix()))
    }
}

/// Diagonalizes `O J` through `Q S`, with `S` the Williamson matrix of `O`.
pub fn diagonalize_hamiltonian_matrix(o: &RealMatrix) -> Result<HamiltonianDiagonalization> {
    let w = williamson(o, POSITIVE_DEFINITE_TOL)?;
    let n = w.modes();
    let transform = q_matrix(n) * to_complex(&w.symplectic);
    Ok(HamiltonianDiagonalization {
        symplectic: w.symplectic,
        transform,
        canonical: CanonicalDiagonal { values: w.spectrum },
    })
}

/// Block rotation `exp(J (w ⊕ w) t)`.
pub(crate) fn normal_mode_rotation(frequencies: &[f64], t: f64) -> RealMatrix {
    let n = frequencies.len();
    let mut r = RealMatrix::zeros(2 * n, 2 * n);
    for (k, &w) in frequencies.iter().enumerate() {
        let (s, c) = (w * t).sin_cos();
        r[(k, k)] = c;
        r[(n + k, n + k)] = c;
        r[(k, n + k)] = s;
        r[(n + k, k)] = -s;
    }
    r
}

/// Linear Hamiltonian flow `exp(J B t)` of `H = ½ xᵀ B x`.
///
/// For `B > 0` the flow is assembled from the normal-mode rotation in the
/// Williamson frame of `B`; otherwise the exponential is taken directly.
pub fn hamiltonian_flow(b: &RealMatrix, t: f64) -> Result<RealMatrix> {
    let n = phase_space_modes(b)?;
    ensure_symmetric(b, 1e-10)?;
    let b = symmetrize(b);
    if t == 0.0 {
        return Ok(RealMatrix::identity(2 * n, 2 * n));
    }
    if ensure_positive_definite(&b, POSITIVE_DEFINITE_TOL).is_ok() {
        // S_B B S_Bᵀ = w ⊕ w, so J B = S_Bᵀ J (w ⊕ w) S_B⁻ᵀ.
        let w = williamson(&b, POSITIVE_DEFINITE_TOL)?;
        let rot = normal_mode_rotation(&w.spectrum, t);
        let s_inv_t = w.symplectic_inverse().transpose();
        return Ok(w.symplectic.transpose() * rot * s_inv_t);
    }
    let j = j_matrix(n);
    Ok(crate::linalg::expm(&(j * b * t)))
}

/// `g(x) = 2 arcoth(2x)`, defined for `x > 1/2`.
///
/// Maps a symplectic eigenvalue `κ = ½ coth(y/2)` back to `y`.
pub fn g_function(x: f64) -> Result<f64> {
    if !(x > 0.5) {
        return Err(GdsError::Domain {
            function: "g",
            value: x,
        });
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    Ok(2.0 * (0.5 / x).atanh())
}
