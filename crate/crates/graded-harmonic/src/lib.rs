//! Numerics on homogeneous groups (ℝⁿ and the first Heisenberg group):
//! group arithmetic, sampled fields, heat semigroups, fractional powers,
//! square functions and difference functionals, plus empirical checks of the
//! inequalities that relate them.

pub mod config;
pub mod field;
pub mod fracops;
pub mod group;
pub mod harness;
pub mod heat;
pub mod meanvalue;
pub mod quad;
pub mod scalar;
pub mod specfun;
pub mod spectral;
pub mod squarefn;
pub mod strichartz;
pub mod table;

pub use scalar::Real;

/// Double-precision aliases for the generic types.
pub type Point = group::Point<f64>;
pub type GroupSpec = group::GroupSpec<f64>;
pub type Grid = field::Grid<f64>;
pub type SampledField = field::SampledField<f64>;
pub type HeatModel = heat::HeatModel<f64>;
pub type PsiParams = specfun::psi::PsiParams<f64>;
pub type StrichartzParams = strichartz::StrichartzParams<f64>;
pub type TestFamily = meanvalue::TestFamily<f64>;
pub type VerificationReport = meanvalue::VerificationReport<f64>;
