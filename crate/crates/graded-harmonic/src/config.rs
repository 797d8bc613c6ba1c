//! Truncation radii, node counts and tolerances for every improper or
//! singular integral in the crate.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("invalid quadrature config: {0}")]
pub struct ConfigError(pub String);

/// Quadrature parameters. Stored in `f64` whatever the working scalar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Node budget for any single tensor rule.
    pub max_nodes: usize,
    /// Time-integral truncation [t_min, t_max] in units of the natural time
    /// scale of the grid.
    pub t_min: f64,
    pub t_max: f64,
    /// Dyadic radial levels for the difference functionals.
    pub r_levels: usize,
    /// Inner cutoff of singular integrals, in grid spacings.
    pub eps_singular: f64,
    /// Gauss–Legendre nodes in the radial variable.
    pub radial_nodes: usize,
    /// Gauss–Legendre nodes per angular piece of a sphere mesh (meshes are
    /// split along coordinate hyperplanes).
    pub angular_nodes: usize,
    /// Gauss–Legendre nodes per decade of geometric time grids.
    pub points_per_decade: usize,
    /// Zero-padding factor of the FFT grid for spectral multipliers.
    pub pad_factor: usize,
    /// Gauss–Legendre nodes per dyadic octave of radial integrals.
    pub sub_nodes_per_octave: usize,
    /// Evolved fields may be truncated to their support margin when the
    /// discarded values are below this fraction of the sup norm.
    pub tail_tol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-8,
            max_nodes: 4_000_000,
            t_min: 1e-4,
            t_max: 1e4,
            r_levels: 12,
            eps_singular: 2.0,
            radial_nodes: 32,
            angular_nodes: 16,
            points_per_decade: 24,
            pad_factor: 16,
            sub_nodes_per_octave: 8,
            tail_tol: 1e-8,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError(m.to_string()));
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if !(self.t_min > 0.0 && self.t_min < self.t_max && self.t_max.is_finite()) {
            return bad("need 0 < t_min < t_max < ∞");
        }
        if !(self.tail_tol > 0.0 && self.tail_tol < 1.0) {
            return bad("tail_tol must lie in (0, 1)");
        }
        if !(self.eps_singular > 0.0) {
            return bad("eps_singular must be positive");
        }
        if self.radial_nodes == 0
            || self.angular_nodes < 4
            || self.points_per_decade == 0
            || self.sub_nodes_per_octave == 0
            || self.r_levels == 0
        {
            return bad("node counts must be positive (angular_nodes ≥ 4)");
        }
        if self.pad_factor == 0 || self.max_nodes == 0 {
            return bad("pad_factor and max_nodes must be positive");
        }
        Ok(())
    }
}
