//! Gaussian dynamical semigroups of bosonic modes: construction, moment
//! dynamics, thermal-equilibrium audits and detailed-balance synthesis, with a
//! truncated Fock-space backend for cross-checks.
//!
//! Phase-space vectors are ordered `(q_1..q_n, p_1..p_n)` and covariance
//! matrices follow `V = (1/2ħ) ⟨{Δx, Δxᵀ}⟩`, so the vacuum is `½ I`.

// Validation uses `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod fock;
pub mod gds;
pub mod linalg;
pub mod moments;
pub mod qdbc;
pub mod sampling;
pub mod symplectic;
pub mod thermal;

pub use error::{GdsError, Result};
