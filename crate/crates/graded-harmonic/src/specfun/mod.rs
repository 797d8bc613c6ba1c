//! Special functions: Γ, the regularized Kummer function, the ψ family and
//! the Euclidean φ_α profile.

pub mod gamma;
pub mod kummer;
pub mod phi;
pub mod psi;

use thiserror::Error;

use crate::quad::QuadError;

pub use gamma::{gamma, ln_gamma, rgamma};
pub use kummer::kummer_reg;
pub use phi::phi_alpha_euclidean;
pub use psi::{psi, psi_half_line, psi_kummer, PsiParams};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecFunError {
    #[error("argument outside the supported domain: {0}")]
    Domain(String),
    #[error("overflow: {0}")]
    Overflow(String),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}
