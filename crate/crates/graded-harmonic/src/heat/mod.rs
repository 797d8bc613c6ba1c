//! Heat kernels h_t and the semigroup T_t f = f * h_t for −Δ on ℝⁿ and the
//! sublaplacian −(X₁² + X₂²) on H¹.
//!
//! ℝⁿ: closed-form kernel, Fourier multipliers for fields. H¹: the kernel
//! comes from the tabulated oscillatory integral (`H1Quadrature`) or from a
//! Crank–Nicolson solve started at a small time from a mollified delta
//! (`H1Pde`); fields are evolved by the same Crank–Nicolson march.

pub mod cache;
pub mod gaveau;
pub mod pde;

use std::f64::consts::PI;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::QuadratureConfig;
use crate::field::{Axis, FieldError, Grid, SampledField};
use crate::group::GroupSpec;
use crate::scalar::Real;
use crate::spectral::PaddedSpectrum;

pub use gaveau::GaveauTable;
pub use pde::{march, Generator, MarchSettings};

#[derive(Debug, Error)]
pub enum HeatError {
    #[error("time must be positive, got {0}")]
    NonPositiveTime(f64),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("numerical non-convergence: {0}")]
    NonConvergence(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeatKind {
    EuclideanExplicit,
    H1Pde,
    H1Quadrature,
}

impl HeatKind {
    pub fn name(self) -> &'static str {
        match self {
            HeatKind::EuclideanExplicit => "euclidean_explicit",
            HeatKind::H1Pde => "h1_pde",
            HeatKind::H1Quadrature => "h1_quadrature",
        }
    }
}

impl FromStr for HeatKind {
    type Err = HeatError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "euclidean_explicit" => Ok(HeatKind::EuclideanExplicit),
            "h1_pde" => Ok(HeatKind::H1Pde),
            "h1_quadrature" => Ok(HeatKind::H1Quadrature),
            other => Err(HeatError::Unsupported(format!("unknown heat model kind `{other}`"))),
        }
    }
}

/// Controls of the H¹ Crank–Nicolson paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PdeSettings {
    /// Kernel grid: [−z_half_width, z_half_width]² × [−u_half_width, u_half_width].
    pub z_half_width: f64,
    pub u_half_width: f64,
    pub z_count: usize,
    pub u_count: usize,
    /// Start time of the kernel solve; `None` picks the smallest time whose
    /// marginals the grid resolves.
    pub start_time: Option<f64>,
    /// Largest Crank–Nicolson step, as a fraction of the final time.
    pub dt_fraction: f64,
    pub cg_tol: f64,
    /// Passes of h ← T_{1−τ}(τ⁻²h∘D_{1/√τ}) after the first solve; the fixed
    /// point is h_1.
    pub refinements: usize,
}

impl Default for PdeSettings {
    fn default() -> Self {
        Self {
            z_half_width: 8.0,
            u_half_width: 12.0,
            z_count: 49,
            u_count: 73,
            start_time: None,
            dt_fraction: 0.05,
            cg_tol: 1e-11,
            refinements: 4,
        }
    }
}

struct PdeKernel<T> {
    h1: SampledField<T>,
    dt1: SampledField<T>,
}

/// Heat semigroup of the canonical Rockland operator of a built-in group.
pub struct HeatModel<T> {
    group: Arc<GroupSpec<T>>,
    kind: HeatKind,
    cfg: QuadratureConfig,
    pde: PdeSettings,
    table: OnceLock<Arc<GaveauTable<T>>>,
    pde_kernel: OnceLock<Arc<PdeKernel<T>>>,
}

impl<T: Real> Clone for HeatModel<T> {
    fn clone(&self) -> Self {
        let out = Self::new_unchecked(self.group.clone(), self.kind, self.cfg.clone(), self.pde.clone());
        if let Some(t) = self.table.get() {
            let _ = out.table.set(t.clone());
        }
        if let Some(k) = self.pde_kernel.get() {
            let _ = out.pde_kernel.set(k.clone());
        }
        out
    }
}

impl<T: Real> std::fmt::Debug for HeatModel<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HeatModel")
            .field("group", &self.group.name())
            .field("kind", &self.kind)
            .finish()
    }
}

fn check_time<T: Real>(t: T) -> Result<(), HeatError> {
    if t > T::zero() && t.is_finite() {
        Ok(())
    } else {
        Err(HeatError::NonPositiveTime(t.as_f64()))
    }
}

impl<T: Real> HeatModel<T> {
    fn new_unchecked(group: Arc<GroupSpec<T>>, kind: HeatKind, cfg: QuadratureConfig, pde: PdeSettings) -> Self {
        Self {
            group,
            kind,
            cfg,
            pde,
            table: OnceLock::new(),
            pde_kernel: OnceLock::new(),
        }
    }

    pub fn new(group: Arc<GroupSpec<T>>, kind: HeatKind, cfg: QuadratureConfig) -> Result<Self, HeatError> {
        cfg.validate().map_err(|e| HeatError::Unsupported(e.to_string()))?;
        if group.nu() != 2 {
            return Err(HeatError::Unsupported(format!(
                "heat kernels need ν = 2, group has ν = {}",
                group.nu()
            )));
        }
        let ok = match kind {
            HeatKind::EuclideanExplicit => group.is_abelian() && group.weights().iter().all(|&w| w == 1),
            HeatKind::H1Pde | HeatKind::H1Quadrature => {
                let h = GroupSpec::<T>::heisenberg();
                group.weights() == h.weights() && group.law() == h.law() && group.field_table() == h.field_table()
            }
        };
        if !ok {
            return Err(HeatError::Unsupported(format!(
                "heat model `{}` does not apply to group `{}`",
                kind.name(),
                group.name()
            )));
        }
        Ok(Self::new_unchecked(group, kind, cfg, PdeSettings::default()))
    }

    pub fn euclidean(n: usize, cfg: QuadratureConfig) -> Self {
        Self::new(Arc::new(GroupSpec::euclidean(n)), HeatKind::EuclideanExplicit, cfg).expect("valid Euclidean model")
    }

    pub fn heisenberg(kind: HeatKind, cfg: QuadratureConfig) -> Result<Self, HeatError> {
        Self::new(Arc::new(GroupSpec::heisenberg()), kind, cfg)
    }

    /// Default model of a group: explicit on ℝⁿ, tabulated quadrature on H¹.
    pub fn default_for(group: Arc<GroupSpec<T>>, cfg: QuadratureConfig) -> Result<Self, HeatError> {
        let kind = if group.is_abelian() {
            HeatKind::EuclideanExplicit
        } else {
            HeatKind::H1Quadrature
        };
        Self::new(group, kind, cfg)
    }

    pub fn with_pde_settings(mut self, pde: PdeSettings) -> Self {
        self.pde = pde;
        self.pde_kernel = OnceLock::new();
        self
    }

    pub fn group(&self) -> &Arc<GroupSpec<T>> {
        &self.group
    }

    pub fn kind(&self) -> HeatKind {
        self.kind
    }

    pub fn nu(&self) -> u32 {
        self.group.nu()
    }

    pub fn cfg(&self) -> &QuadratureConfig {
        &self.cfg
    }

    pub fn pde_settings(&self) -> &PdeSettings {
        &self.pde
    }

    fn table(&self) -> &GaveauTable<T> {
        self.table.get_or_init(|| Arc::new(GaveauTable::standard()))
    }

    fn pde_kernel(&self) -> Result<&PdeKernel<T>, HeatError> {
        if let Some(k) = self.pde_kernel.get() {
            return Ok(k);
        }
        let k = Arc::new(self.solve_pde_kernel()?);
        let _ = self.pde_kernel.set(k);
        Ok(self.pde_kernel.get().expect("just set"))
    }

    /// h_1 on the kernel grid: starts at τ from the product of the exact
    /// marginals of h_τ, (4πτ)⁻¹e^{−|z|²/4τ} and (2τ)⁻¹sech(πu/2τ), and
    /// marches to t = 1.
    fn solve_pde_kernel(&self) -> Result<PdeKernel<T>, HeatError> {
        let s = &self.pde;
        let za = Axis::symmetric(T::lit(s.z_half_width), s.z_count)?;
        let ua = Axis::symmetric(T::lit(s.u_half_width), s.u_count)?;
        let grid = Grid::new(vec![za, za, ua])?;
        let (hz, hu) = (za.spacing.as_f64(), ua.spacing.as_f64());
        let tau = s.start_time.unwrap_or_else(|| (1.5 * hz * hz).max(2.0 * hu)).min(0.9);
        let start = SampledField::from_fn(self.group.clone(), grid.clone(), 0, |p| {
            let r2 = (p[0] * p[0] + p[1] * p[1]).as_f64();
            let u = p[2].as_f64();
            let z = (-r2 / (4.0 * tau)).exp() / (4.0 * PI * tau);
            let m = 1.0 / (2.0 * tau * (PI * u / (2.0 * tau)).cosh());
            T::lit(z * m)
        })?;
        let mass = start.integral();
        let start = start.map(|v| v / mass);
        let gen = Generator::new(&self.group, &grid)?;
        let settings = MarchSettings {
            dt_max: T::lit(s.dt_fraction),
            rough_start: true,
            cg_tol: T::lit(s.cg_tol),
        };
        let out = march(&gen, start.values(), T::lit(tau), &[T::one()], settings)?;
        let mut h1 = start.with_values(out.into_iter().next().expect("one snapshot"), 0)?;
        let smooth = MarchSettings {
            rough_start: false,
            ..settings
        };
        let tau_t = T::lit(tau);
        let shrink = T::one() / tau_t.sqrt();
        for _ in 0..s.refinements {
            let prev = &h1;
            let start = SampledField::from_fn(self.group.clone(), grid.clone(), 0, |p| {
                let mut q = [T::zero(); 3];
                self.group.dilate_into(shrink, p, &mut q);
                prev.eval(&q) / (tau_t * tau_t)
            })?;
            let mass = start.integral();
            let start = start.map(|v| v / mass);
            let out = march(&gen, start.values(), tau_t, &[T::one()], smooth)?;
            h1 = start.with_values(out.into_iter().next().expect("one snapshot"), 0)?;
        }
        let mut lh = vec![T::zero(); grid.len()];
        gen.apply(h1.values(), &mut lh);
        let dt1 = h1.with_values(lh, 0)?;
        Ok(PdeKernel { h1, dt1 })
    }

    /// h_t(x).
    pub fn heat_kernel(&self, t: T, x: &[T]) -> Result<T, HeatError> {
        check_time(t)?;
        self.check_point(x)?;
        Ok(match self.kind {
            HeatKind::EuclideanExplicit => {
                let n = T::from_count(x.len());
                let r2: T = x.iter().map(|c| *c * *c).sum();
                (T::lit(4.0) * T::PI() * t).powf(-n / T::lit(2.0)) * (-r2 / (T::lit(4.0) * t)).exp()
            }
            HeatKind::H1Quadrature => self.table().kernel(t, x),
            HeatKind::H1Pde => {
                let k = self.pde_kernel()?;
                let p = self.rescale(t, x);
                k.h1.eval(&p) / (t * t)
            }
        })
    }

    /// ∂_t h_t(x).
    pub fn heat_kernel_dt(&self, t: T, x: &[T]) -> Result<T, HeatError> {
        check_time(t)?;
        self.check_point(x)?;
        Ok(match self.kind {
            HeatKind::EuclideanExplicit => {
                let n = T::from_count(x.len());
                let r2: T = x.iter().map(|c| *c * *c).sum();
                let h = self.heat_kernel(t, x)?;
                h * (r2 / (T::lit(4.0) * t * t) - n / (T::lit(2.0) * t))
            }
            HeatKind::H1Quadrature => self.table().kernel_dt(t, x),
            HeatKind::H1Pde => {
                let k = self.pde_kernel()?;
                let p = self.rescale(t, x);
                k.dt1.eval(&p) / (t * t * t)
            }
        })
    }

    fn rescale(&self, t: T, x: &[T]) -> Vec<T> {
        let mut p = vec![T::zero(); x.len()];
        self.group.dilate_into(T::one() / t.sqrt(), x, &mut p);
        p
    }

    fn check_point(&self, x: &[T]) -> Result<(), HeatError> {
        if x.len() == self.group.dim() {
            Ok(())
        } else {
            Err(FieldError::DimensionMismatch {
                grid: x.len(),
                group: self.group.dim(),
            }
            .into())
        }
    }

    /// h_t sampled on a grid (margin 0).
    pub fn kernel_field(&self, t: T, grid: &Grid<T>) -> Result<SampledField<T>, HeatError> {
        check_time(t)?;
        if self.kind == HeatKind::H1Pde {
            self.pde_kernel()?;
        }
        Ok(SampledField::from_fn(self.group.clone(), grid.clone(), 0, |x| {
            self.heat_kernel(t, x).expect("validated time and dimension")
        })?)
    }

    /// T_t f.
    pub fn semigroup_apply(&self, t: T, f: &SampledField<T>) -> Result<SampledField<T>, HeatError> {
        Ok(self.semigroup_apply_many(&[t], f)?.pop().expect("one time"))
    }

    /// T_t f for each of the increasing `times`.
    pub fn semigroup_apply_many(&self, times: &[T], f: &SampledField<T>) -> Result<Vec<SampledField<T>>, HeatError> {
        for &t in times {
            check_time(t)?;
        }
        if times.windows(2).any(|w| w[1] < w[0]) {
            return Err(HeatError::Unsupported("times must increase".into()));
        }
        self.check_field(f)?;
        if self.group.is_abelian() {
            let spec = PaddedSpectrum::new(f, self.pad_factor(f.grid()));
            times
                .iter()
                .map(|&t| {
                    let v = spec.crop(&spec.apply(|k2| (-t * k2).exp()));
                    self.truncate(f, v)
                })
                .collect()
        } else {
            let gen = Generator::new(&self.group, f.grid())?;
            let last = *times.last().unwrap_or(&T::one());
            let settings = self.march_settings(last, false);
            march(&gen, f.values(), T::zero(), times, settings)?
                .into_iter()
                .map(|v| self.truncate(f, v))
                .collect()
        }
    }

    /// ∂_t T_t f: spectral on ℝⁿ, Richardson-extrapolated centered
    /// differences with δ = t/100 on H¹.
    pub fn semigroup_dt(&self, t: T, f: &SampledField<T>) -> Result<SampledField<T>, HeatError> {
        check_time(t)?;
        self.check_field(f)?;
        if self.group.is_abelian() {
            let spec = PaddedSpectrum::new(f, self.pad_factor(f.grid()));
            let v = spec.crop(&spec.apply(|k2| -k2 * (-t * k2).exp()));
            return self.truncate(f, v);
        }
        let d = t / T::lit(100.0);
        let half = d / T::lit(2.0);
        let gen = Generator::new(&self.group, f.grid())?;
        let mut settings = self.march_settings(t, false);
        // uniform fine steps through the differencing window
        settings.dt_max = settings.dt_max.min(half / T::lit(2.0));
        let coarse = march(&gen, f.values(), T::zero(), &[t - d], self.march_settings(t, false))?;
        let snaps = march(&gen, &coarse[0], t - d, &[t - half, t + half, t + d], settings)?;
        let (m1, p_half, p1) = (&coarse[0], &snaps[1], &snaps[2]);
        let m_half = &snaps[0];
        let v = (0..f.values().len())
            .map(|i| {
                let big = (p1[i] - m1[i]) / (d + d);
                let small = (p_half[i] - m_half[i]) / d;
                (T::lit(4.0) * small - big) / T::lit(3.0)
            })
            .collect();
        self.truncate(f, v)
    }

    /// L f = −ℛ f by the fourth-order stencil operator.
    pub fn generator_apply(&self, f: &SampledField<T>) -> Result<SampledField<T>, HeatError> {
        self.check_field(f)?;
        let gen = Generator::new(&self.group, f.grid())?;
        let mut out = vec![T::zero(); f.values().len()];
        gen.apply(f.values(), &mut out);
        Ok(f.with_values(out, f.margin().saturating_sub(2))?)
    }

    fn march_settings(&self, t: T, rough: bool) -> MarchSettings<T> {
        MarchSettings {
            dt_max: t * T::lit(self.pde.dt_fraction),
            rough_start: rough,
            cg_tol: T::lit(self.pde.cg_tol),
        }
    }

    /// Padding factor, reduced so the padded grid stays below 2²² nodes.
    pub fn pad_factor(&self, grid: &Grid<T>) -> usize {
        let mut pad = self.cfg.pad_factor.max(1);
        while pad > 1 && grid.len() as f64 * (pad as f64).powi(grid.dim() as i32) > (1u64 << 22) as f64 {
            pad /= 2;
        }
        pad
    }

    fn check_field(&self, f: &SampledField<T>) -> Result<(), HeatError> {
        if **f.group() == *self.group {
            Ok(())
        } else {
            Err(FieldError::Mismatch.into())
        }
    }

    /// Zeroes the margin layers of evolved values if what they hold is below
    /// tail_tol of the sup norm.
    fn truncate(&self, f: &SampledField<T>, values: Vec<T>) -> Result<SampledField<T>, HeatError> {
        let sup = values.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let grid = f.grid();
        let margin = f.margin().max(1);
        let mut idx = vec![0; grid.dim()];
        let mut worst = T::zero();
        for (i, v) in values.iter().enumerate() {
            grid.unravel(i, &mut idx);
            if grid.in_margin(&idx, margin) {
                worst = worst.max(v.abs());
            }
        }
        if worst > T::lit(self.cfg.tail_tol) * sup && worst > T::lit(self.cfg.abs_tol) {
            return Err(FieldError::SupportOverflow(format!(
                "evolved field reaches the grid boundary: {:e} of its sup norm lies in the {}-layer margin",
                (worst / sup).as_f64(),
                margin
            ))
            .into());
        }
        let mut out = f.with_values(values, 0)?;
        out.zero_margin(f.margin());
        Ok(out)
    }
}
