//! Model and audit input files.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::GdsError;
use crate::gds::{GdsSpec, NoiseMatrices};
use crate::linalg::{ComplexVector, RealMatrix, RealVector};
use crate::qdbc::{build_lindblad_vectors, limit_regimes, QdbcSpec, Regime};

use super::CliError;

/// Largest tolerated `|B − Bᵀ|` before symmetrization.
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum RegimeSpec {
    High,
    Low,
    Diffusive { c_bar: Vec<f64> },
}

impl From<&RegimeSpec> for Regime {
    fn from(r: &RegimeSpec) -> Self {
        match r {
            RegimeSpec::High => Regime::High,
            RegimeSpec::Low => Regime::Low,
            RegimeSpec::Diffusive { c_bar } => Regime::Diffusive { c_bar: c_bar.clone() },
        }
    }
}

fn default_hbar() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub n: usize,
    #[serde(default = "default_hbar")]
    pub hbar: f64,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
    pub beta: f64,
    pub gamma: Vec<f64>,
    #[serde(rename = "B_prime", default, skip_serializing_if = "Option::is_none")]
    pub b_prime: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi_prime: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lindblad_vectors: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regime: Option<RegimeSpec>,
}

/// `D`, `C` and optionally `V` given directly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitAudit {
    #[serde(default = "default_hbar")]
    pub hbar: f64,
    #[serde(rename = "D")]
    pub d: Vec<Vec<f64>>,
    #[serde(rename = "C")]
    pub c: Vec<Vec<f64>>,
    #[serde(rename = "V", default)]
    pub v: Option<Vec<Vec<f64>>>,
}

pub enum AuditInput {
    Model(Box<Model>),
    Explicit { noise: NoiseMatrices, v: Option<RealMatrix> },
}

pub fn matrix_from_rows(rows: &[Vec<f64>], dim: usize, field: &str) -> Result<RealMatrix, CliError> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(CliError::input(format!("{field}: expected a {dim}x{dim} matrix")));
    }
    if rows.iter().flatten().any(|x| !x.is_finite()) {
        return Err(CliError::input(format!("{field}: entries must be finite")));
    }
    Ok(RealMatrix::from_fn(dim, dim, |r, c| rows[r][c]))
}

pub fn rows_from_matrix(m: &RealMatrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn complex_pairs(v: &ComplexVector) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

fn symmetric_matrix(rows: &[Vec<f64>], dim: usize, field: &str) -> Result<RealMatrix, CliError> {
    let m = matrix_from_rows(rows, dim, field)?;
    let asym = (&m - m.transpose()).amax();
    if asym > SYMMETRY_TOL {
        return Err(CliError::input(format!(
            "{field}: not symmetric (max |M - M^T| = {asym:e})"
        )));
    }
    Ok((&m + m.transpose()) * 0.5)
}

/// Validated model with the derived library objects.
#[derive(Debug, Clone)]
pub struct Model {
    pub file: ModelFile,
    pub qdbc: QdbcSpec,
    pub b_prime: RealMatrix,
    pub xi_prime: RealVector,
    /// Lindblad vectors from the file, if present.
    pub explicit_vectors: Option<Vec<ComplexVector>>,
}

impl Model {
    pub fn from_file(file: ModelFile) -> Result<Self, CliError> {
        let n = file.n;
        if n == 0 {
            return Err(CliError::input("n: must be at least 1"));
        }
        if !(file.hbar > 0.0) || !file.hbar.is_finite() {
            return Err(CliError::input("hbar: must be positive and finite"));
        }
        if !(file.beta > 0.0) || !file.beta.is_finite() {
            return Err(CliError::input("beta: must be positive and finite"));
        }
        if file.gamma.len() != n {
            return Err(CliError::input(format!("gamma: expected {n} couplings")));
        }
        if let Some(g) = file.gamma.iter().find(|g| !(**g > 0.0) || !g.is_finite()) {
            return Err(CliError::input(format!("gamma: couplings must be positive, got {g}")));
        }
        let dim = 2 * n;
        let b = symmetric_matrix(&file.b, dim, "B")?;
        let qdbc = QdbcSpec::constant(b.clone(), file.beta, file.hbar, file.gamma.clone())
            .map_err(|e| CliError::input(format!("B: {e}")))?;
        let b_prime = match &file.b_prime {
            Some(rows) => symmetric_matrix(rows, dim, "B_prime")?,
            None => b,
        };
        let xi_prime = match &file.xi_prime {
            Some(xi) if xi.len() != dim => {
                return Err(CliError::input(format!("xi_prime: expected {dim} entries")))
            }
            Some(xi) => RealVector::from_column_slice(xi),
            None => RealVector::zeros(dim),
        };
        let explicit_vectors = match &file.lindblad_vectors {
            Some(vs) => {
                if let Some((k, _)) = vs.iter().enumerate().find(|(_, v)| v.len() != dim) {
                    return Err(CliError::input(format!(
                        "lindblad_vectors[{k}]: expected {dim} entries"
                    )));
                }
                Some(
                    vs.iter()
                        .map(|v| ComplexVector::from_iterator(dim, v.iter().map(|p| Complex64::new(p[0], p[1]))))
                        .collect(),
                )
            }
            None => None,
        };
        if let Some(RegimeSpec::Diffusive { c_bar }) = &file.regime {
            if c_bar.len() != n || c_bar.iter().any(|c| !(*c > 0.0) || !c.is_finite()) {
                return Err(CliError::input(format!("regime.diffusive.c_bar: expected {n} positive values")));
            }
        }
        Ok(Self {
            file,
            qdbc,
            b_prime,
            xi_prime,
            explicit_vectors,
        })
    }

    pub fn modes(&self) -> usize {
        self.file.n
    }

    pub fn hbar(&self) -> f64 {
        self.file.hbar
    }

    /// Lindblad vectors from the file, otherwise the detailed-balance construction.
    pub fn lindblad_vectors(&self) -> Result<Vec<ComplexVector>, CliError> {
        match &self.explicit_vectors {
            Some(v) => Ok(v.clone()),
            None => Ok(build_lindblad_vectors(&self.qdbc)?.vectors),
        }
    }

    /// Noise used for dynamics: the regime's limiting form if one is set.
    pub fn noise(&self) -> Result<NoiseMatrices, CliError> {
        if let Some(regime) = &self.file.regime {
            if self.explicit_vectors.is_none() {
                let report = limit_regimes(&self.qdbc, &Regime::from(regime))?;
                return Ok(NoiseMatrices::from_parts(report.d, report.c, self.hbar())?);
            }
        }
        Ok(self.gds_spec()?.noise()?)
    }

    pub fn gds_spec(&self) -> Result<GdsSpec, CliError> {
        Ok(GdsSpec::new(
            self.hbar(),
            self.b_prime.clone(),
            self.xi_prime.clone(),
            self.lindblad_vectors()?,
        )?)
    }

    pub fn drift(&self) -> Result<RealMatrix, CliError> {
        let noise = self.noise()?;
        Ok(crate::gds::drift_matrix(&self.b_prime, &noise.c)?)
    }
}

fn read_json(path: &Path) -> Result<serde_json::Value, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn parse_value<T: serde::de::DeserializeOwned>(value: serde_json::Value, path: &Path) -> Result<T, CliError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let at = e.path().to_string();
        CliError::input(format!("{}: at `{at}`: {}", path.display(), e.into_inner()))
    })
}

pub fn load_model(path: &Path) -> Result<Model, CliError> {
    let file: ModelFile = parse_value(read_json(path)?, path)?;
    Model::from_file(file)
}

pub fn load_audit_input(path: &Path) -> Result<AuditInput, CliError> {
    let value = read_json(path)?;
    if value.get("D").is_none() {
        return Ok(AuditInput::Model(Box::new(Model::from_file(parse_value(value, path)?)?)));
    }
    let e: ExplicitAudit = parse_value(value, path)?;
    let dim = e.d.len();
    if dim == 0 || !dim.is_multiple_of(2) {
        return Err(CliError::input("D: dimension must be a positive even number"));
    }
    let d = symmetric_matrix(&e.d, dim, "D")?;
    let c = matrix_from_rows(&e.c, dim, "C")?;
    let v = e.v.as_ref().map(|v| symmetric_matrix(v, dim, "V")).transpose()?;
    let noise = NoiseMatrices::from_parts(d, c, e.hbar).map_err(|err| CliError::input(err.to_string()))?;
    Ok(AuditInput::Explicit { noise, v })
}

pub fn load_matrix(path: &Path, dim: usize, field: &str) -> Result<RealMatrix, CliError> {
    let rows: Vec<Vec<f64>> = parse_value(read_json(path)?, path)?;
    symmetric_matrix(&rows, dim, field)
}

impl From<GdsError> for CliError {
    fn from(e: GdsError) -> Self {
        match e {
            GdsError::NoStationaryState { .. }
            | GdsError::AuditFailed(_)
            | GdsError::Integration { .. }
            | GdsError::TraceDrift { .. }
            | GdsError::Singular(_)
            | GdsError::PureStateBoundary { .. } => CliError::semantic(e.to_string()),
            _ => CliError::input(e.to_string()),
        }
    }
}
