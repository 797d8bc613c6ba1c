//! Littlewood–Paley–Stein square functions
//!
//!   g_α f = (∫₀^∞ |(tℛ)^α T_t f|² dt/t)^{1/2},
//!   g_φ f = (∫₀^∞ |φ_{(t)} * f|² dt/t)^{1/2},  φ_{(t)} = t^{−Q} φ∘D_{1/t},
//!   G_s f = (∫₀^∞ t^{1−2s/ν} |∂_t T_t f|² dt)^{1/2}.
//!
//! Every t-integral runs over log-spaced Gauss–Legendre nodes; the pieces
//! below the first and beyond the last node are closed with the local power
//! law of the integrand.

use rayon::prelude::*;
use thiserror::Error;

use crate::config::QuadratureConfig;
use crate::field::{interp, lp_of, Axis, FieldError, Grid, SampledField};
use crate::fracops::{centroid, FracError};
use crate::group::GroupSpec;
use crate::heat::{march, Generator, HeatError, HeatModel, MarchSettings};
use crate::quad::{self, GaussLegendre, QuadError, Tolerance};
use crate::scalar::Real;
use crate::specfun::{phi_alpha_euclidean, rgamma, SpecFunError};
use crate::spectral::{linear_convolution, PaddedSpectrum};

#[derive(Debug, Error)]
pub enum SquareFnError {
    #[error("parameter out of range: {0}")]
    Parameter(String),
    #[error("t-grid under-resolved: {0}")]
    UnderResolved(String),
    #[error(transparent)]
    Heat(#[from] HeatError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Frac(#[from] FracError),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
}

/// Mass bookkeeping of a t-integral.
#[derive(Debug, Clone, Default)]
pub struct TimeDiagnostics<T> {
    /// (decade start 10^k, ∫∫ integrand dx dt/t over the nodes in it).
    pub decade_mass: Vec<(T, T)>,
    /// Power-law closures below the first and beyond the last node.
    pub tail_low: T,
    pub tail_high: T,
    pub total: T,
}

impl<T: Real> TimeDiagnostics<T> {
    /// Fraction of the total carried by the two closures.
    pub fn tail_fraction(&self) -> T {
        if self.total > T::zero() {
            (self.tail_low + self.tail_high) / self.total
        } else {
            T::zero()
        }
    }
}

#[derive(Debug, Clone)]
pub struct SquareFnResult<T> {
    pub field: SampledField<T>,
    /// ‖g f‖₂. On ℝⁿ over the whole space by Parseval on the padded grid,
    /// otherwise over the sampling box.
    pub lp: T,
    pub t_grid: Vec<T>,
    pub diagnostics: TimeDiagnostics<T>,
}

impl<T: Real> SquareFnResult<T> {
    pub fn lp_norm(&self, p: T) -> Result<T, FieldError> {
        self.field.lp_norm(p)
    }
}

/// Above this share of the total the closures dominate and the grid is
/// rejected.
const MAX_TAIL_FRACTION: f64 = 0.25;

/// Running Σ w v² over increasing nodes with power-law end closures.
struct Accumulator<T> {
    sum: Vec<T>,
    cell: T,
    grid_t: Vec<T>,
    decades: Vec<(i32, T)>,
    /// (t, w, ‖v_t‖₂² over the whole space) when available.
    global: Vec<(T, T, T)>,
    first: Vec<(T, Vec<T>)>,
    last: Vec<(T, Vec<T>)>,
}

impl<T: Real> Accumulator<T> {
    fn new(len: usize, cell: T) -> Self {
        Self {
            sum: vec![T::zero(); len],
            cell,
            grid_t: Vec::new(),
            decades: Vec::new(),
            global: Vec::new(),
            first: Vec::new(),
            last: Vec::new(),
        }
    }

    fn push(&mut self, t: T, w: T, v: Vec<T>) {
        let mut mass = T::zero();
        for (s, x) in self.sum.iter_mut().zip(&v) {
            let q = *x * *x;
            *s += w * q;
            mass += q;
        }
        mass = mass * w * self.cell;
        let d = t.log10().floor().to_i32().unwrap_or(0);
        match self.decades.last_mut() {
            Some((k, m)) if *k == d => *m += mass,
            _ => self.decades.push((d, mass)),
        }
        self.grid_t.push(t);
        if self.first.len() < 2 {
            self.first.push((t, v.clone()));
        }
        self.last.push((t, v));
        if self.last.len() > 2 {
            self.last.remove(0);
        }
    }

    fn push_global(&mut self, t: T, w: T, q: T) {
        self.global.push((t, w, q));
    }

    /// Σ w q with fitted power-law closures, or None without global data.
    fn global_norm(&self) -> Option<T> {
        let g = &self.global;
        if g.len() < 4 {
            return None;
        }
        let slope = |a: &(T, T, T), b: &(T, T, T)| {
            if a.2 > T::zero() && b.2 > T::zero() {
                ((b.2 / a.2).ln() / (b.0 / a.0).ln())
                    .abs()
                    .max(T::lit(0.05))
                    .min(T::lit(20.0))
            } else {
                T::one()
            }
        };
        let n = g.len();
        let body: T = g.iter().map(|(_, w, q)| *w * *q).sum();
        let low = g[0].2 / slope(&g[0], &g[1]);
        let high = g[n - 1].2 / slope(&g[n - 2], &g[n - 1]);
        Some((body + low + high).max(T::zero()).sqrt())
    }

    /// Closes both ends. `k_low`/`k_high` are the exponents of v² ~ t^{±k};
    /// `None` fits them from the two end nodes.
    fn finish(mut self, k_low: Option<T>, k_high: Option<T>) -> (Vec<T>, Vec<T>, TimeDiagnostics<T>) {
        let fit = |a: &(T, Vec<T>), b: &(T, Vec<T>), i: usize| -> T {
            let (va, vb) = (a.1[i] * a.1[i], b.1[i] * b.1[i]);
            if va > T::zero() && vb > T::zero() {
                ((vb / va).ln() / (b.0 / a.0).ln()).abs()
            } else {
                T::one()
            }
        };
        let clamp = |k: T| k.max(T::lit(0.05)).min(T::lit(20.0));
        let mut tail_low = T::zero();
        let mut tail_high = T::zero();
        if let (Some(lo), Some(hi)) = (self.first.first(), self.last.last()) {
            for i in 0..self.sum.len() {
                let kl = k_low.unwrap_or_else(|| {
                    if self.first.len() == 2 {
                        clamp(fit(&self.first[0], &self.first[1], i))
                    } else {
                        T::one()
                    }
                });
                let kh = k_high.unwrap_or_else(|| {
                    if self.last.len() == 2 {
                        clamp(fit(&self.last[0], &self.last[1], i))
                    } else {
                        T::one()
                    }
                });
                let a = lo.1[i] * lo.1[i] / kl;
                let b = hi.1[i] * hi.1[i] / kh;
                self.sum[i] += a + b;
                tail_low += a;
                tail_high += b;
            }
        }
        let diag = TimeDiagnostics {
            decade_mass: self.decades.iter().map(|(k, m)| (T::lit(10f64.powi(*k)), *m)).collect(),
            tail_low: tail_low * self.cell,
            tail_high: tail_high * self.cell,
            total: self.sum.iter().copied().sum::<T>() * self.cell,
        };
        let values = self.sum.into_iter().map(|s| s.max(T::zero()).sqrt()).collect();
        (values, self.grid_t, diag)
    }
}

fn log_nodes<T: Real>(lo: T, hi: T, cfg: &QuadratureConfig) -> Vec<(T, T)> {
    let rule = GaussLegendre::<T>::new(cfg.sub_nodes_per_octave.max(2));
    let panels = (cfg.points_per_decade / rule.len()).max(1);
    quad::log_panels(&rule, lo, hi, panels)
}

fn finish_result<T: Real>(
    f: &SampledField<T>,
    acc: Accumulator<T>,
    k_low: Option<T>,
    k_high: Option<T>,
) -> Result<SquareFnResult<T>, SquareFnError> {
    let global = acc.global_norm();
    let (values, t_grid, diagnostics) = acc.finish(k_low, k_high);
    if diagnostics.tail_fraction() > T::lit(MAX_TAIL_FRACTION) {
        return Err(SquareFnError::UnderResolved(format!(
            "power-law closures carry {:.3} of the total",
            diagnostics.tail_fraction().as_f64()
        )));
    }
    let field = f.with_values(values, 0)?;
    let lp = match global {
        Some(v) => v,
        None => field.lp_norm(T::lit(2.0))?,
    };
    Ok(SquareFnResult {
        field,
        lp,
        t_grid,
        diagnostics,
    })
}

fn check_same_group<T: Real>(m: &HeatModel<T>, f: &SampledField<T>) -> Result<(), SquareFnError> {
    if **f.group() == **m.group() {
        Ok(())
    } else {
        Err(FieldError::Mismatch.into())
    }
}

fn ratio<T: Real>(a: u32, b: u32) -> T {
    T::from_count(a as usize) / T::from_count(b as usize)
}

/// g_α f. ℝⁿ: the multiplier (t|ξ|²)^α e^{−t|ξ|²} on t ∈ [t_min, t_max],
/// cut where periodic images of the padded box start to matter. Other
/// groups: √ν·g_{φ_α} f with φ_α tabulated from ∂_t h_t (0 < α < 1).
pub fn g_alpha<T: Real>(
    m: &HeatModel<T>,
    f: &SampledField<T>,
    alpha: T,
    cfg: &QuadratureConfig,
) -> Result<SquareFnResult<T>, SquareFnError> {
    check_same_group(m, f)?;
    if !(alpha > T::zero()) {
        return Err(SquareFnError::Parameter(format!(
            "α must be positive, got {}",
            alpha.as_f64()
        )));
    }
    let g = m.group();
    if !g.is_abelian() {
        if alpha >= T::one() {
            return Err(SquareFnError::Parameter("the φ_α route needs α < 1".into()));
        }
        let phi = PhiAlpha::new(m, alpha, cfg)?;
        let nu = T::from_count(m.nu() as usize);
        let lo = T::lit(cfg.t_min).powf(T::one() / nu);
        let hi = T::lit(cfg.t_max).powf(T::one() / nu);
        let mut r = g_phi_range(f, &|x: &[T]| phi.eval(x), lo, hi, cfg)?;
        let c = nu.sqrt();
        r.field = r.field.map(|v| v * c);
        r.lp = r.lp * c;
        r.diagnostics.total = r.diagnostics.total * c * c;
        r.diagnostics.tail_low = r.diagnostics.tail_low * c * c;
        r.diagnostics.tail_high = r.diagnostics.tail_high * c * c;
        return Ok(r);
    }
    let spec = PaddedSpectrum::new(f, m.pad_factor(f.grid()));
    let hi = T::lit(cfg.t_max).min(spec.periodic_time_limit(cfg.tail_tol));
    let lo = T::lit(cfg.t_min);
    let nodes = log_nodes(lo, hi, cfg);
    let mut acc = Accumulator::new(f.values().len(), f.grid().cell_volume());
    for (t, w) in nodes {
        let mult = |k2: T| {
            let a = t * k2;
            if a > T::zero() {
                a.powf(alpha) * (-a).exp()
            } else {
                T::zero()
            }
        };
        acc.push_global(t, w, spec.quadratic_form(|k2| mult(k2) * mult(k2)));
        acc.push(t, w, spec.crop(&spec.apply(mult)));
    }
    // zero-mean data decay faster than t^{−Q/ν}: fit the high end
    finish_result(f, acc, Some(alpha + alpha), None)
}

/// g_φ f over dilations t ∈ [t_min^{1/2}, t_max^{1/2}].
pub fn g_phi<T: Real, K>(
    f: &SampledField<T>,
    phi: &K,
    cfg: &QuadratureConfig,
) -> Result<SquareFnResult<T>, SquareFnError>
where
    K: Fn(&[T]) -> T + Sync,
{
    let lo = T::lit(cfg.t_min).sqrt();
    let hi = T::lit(cfg.t_max).sqrt();
    g_phi_range(f, phi, lo, hi, cfg)
}

/// g_φ f over dilations in [lo, hi]. Dilations narrower than two grid
/// spacings are not sampled; the low closure covers them.
pub fn g_phi_range<T: Real, K>(
    f: &SampledField<T>,
    phi: &K,
    lo: T,
    hi: T,
    cfg: &QuadratureConfig,
) -> Result<SquareFnResult<T>, SquareFnError>
where
    K: Fn(&[T]) -> T + Sync,
{
    let g = f.group().clone();
    let h = f
        .grid()
        .axes()
        .iter()
        .zip(g.weights())
        .map(|(a, &w)| a.spacing.powf(T::one() / T::from_count(w as usize)))
        .fold(T::zero(), T::max);
    let lo = lo.max(h * T::lit(2.0));
    if !(hi > lo) {
        return Err(SquareFnError::Parameter(
            "dilation range is empty at this grid spacing".into(),
        ));
    }
    let q = T::from_count(g.homogeneous_dim() as usize);
    let mut acc = Accumulator::new(f.values().len(), f.grid().cell_volume());
    for (t, w) in log_nodes(lo, hi, cfg) {
        let dil = |x: &[T]| {
            let mut y = vec![T::zero(); x.len()];
            g.dilate_into(T::one() / t, x, &mut y);
            phi(&y) * t.powf(-q)
        };
        let v = convolve_restricted(f, &dil)?;
        acc.push(t, w, v);
    }
    finish_result(f, acc, None, None)
}

/// (f * k)(x) = ∫ f(y) k(y⁻¹x) dy at every node of the grid of `f`, with no
/// support restriction on `k`. Abelian: k is sampled on the difference
/// lattice and convolved by FFT. Otherwise direct summation.
fn convolve_restricted<T: Real, K>(f: &SampledField<T>, k: &K) -> Result<Vec<T>, SquareFnError>
where
    K: Fn(&[T]) -> T + Sync,
{
    let g = f.group();
    let grid = f.grid();
    let cell = grid.cell_volume();
    if g.is_abelian() {
        let axes: Vec<Axis<T>> = grid
            .axes()
            .iter()
            .map(|a| Axis {
                origin: -a.spacing * T::from_count(a.count - 1),
                spacing: a.spacing,
                count: 2 * a.count - 1,
            })
            .collect();
        let kgrid = Grid::new(axes)?;
        let kv: Vec<T> = (0..kgrid.len()).into_par_iter().map(|i| k(&kgrid.point(i))).collect();
        let shape = grid.shape();
        let kshape = kgrid.shape();
        let full = linear_convolution(f.values(), &shape, &kv, &kshape);
        let full_shape: Vec<usize> = shape.iter().zip(kshape.iter()).map(|(a, b)| a + b - 1).collect();
        let n = grid.dim();
        let mut idx = vec![0usize; n];
        Ok((0..grid.len())
            .map(|i| {
                grid.unravel(i, &mut idx);
                let mut off = 0usize;
                for d in 0..n {
                    off = off * full_shape[d] + idx[d] + shape[d] - 1;
                }
                full[off] * cell
            })
            .collect())
    } else {
        let n = g.dim();
        let support: Vec<(Vec<T>, T)> = f
            .values()
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != T::zero())
            .map(|(i, &v)| {
                let mut yi = vec![T::zero(); n];
                g.inv_into(&grid.point(i), &mut yi);
                (yi, v)
            })
            .collect();
        Ok((0..grid.len())
            .into_par_iter()
            .map_init(
                || (vec![T::zero(); n], vec![T::zero(); n]),
                |(x, z), i| {
                    grid.coords_of(i, x);
                    let mut acc = T::zero();
                    for (yi, fy) in &support {
                        g.mul_into(yi, x, z);
                        acc += *fy * k(z);
                    }
                    acc * cell
                },
            )
            .collect())
    }
}

/// G_s f for 0 < s < ν. ℝⁿ: the multiplier −t^{1−s/ν}|ξ|²e^{−t|ξ|²}.
/// Other groups: one Crank–Nicolson march through the t-nodes with
/// ∂_t T_t f = L T_t f from the stencil generator, and the far-field form
/// (∫f)∂_t h_t(c⁻¹x) once the evolved field reaches the support margin.
pub fn g_s<T: Real>(
    m: &HeatModel<T>,
    f: &SampledField<T>,
    s: T,
    cfg: &QuadratureConfig,
) -> Result<SquareFnResult<T>, SquareFnError> {
    check_same_group(m, f)?;
    let nu = T::from_count(m.nu() as usize);
    if !(s > T::zero() && s < nu) {
        return Err(SquareFnError::Parameter(format!(
            "G_s needs 0 < s < {}, got {}",
            nu.as_f64(),
            s.as_f64()
        )));
    }
    let g = m.group().clone();
    let q_over_nu: T = ratio(g.homogeneous_dim(), m.nu());
    let power = T::one() - s / nu;
    let k_low = power + power;
    let k_high = T::lit(2.0) * (q_over_nu + s / nu);
    let lo = T::lit(cfg.t_min);
    let mut acc = Accumulator::new(f.values().len(), f.grid().cell_volume());
    if g.is_abelian() {
        let spec = PaddedSpectrum::new(f, m.pad_factor(f.grid()));
        let hi = T::lit(cfg.t_max).min(spec.periodic_time_limit(cfg.tail_tol));
        for (t, w) in log_nodes(lo, hi, cfg) {
            let c = t.powf(power);
            let mult = |k2: T| -c * k2 * (-t * k2).exp();
            acc.push_global(t, w, spec.quadratic_form(|k2| mult(k2) * mult(k2)));
            acc.push(t, w, spec.crop(&spec.apply(mult)));
        }
        return finish_result(f, acc, Some(k_low), Some(k_high));
    }
    let hi = T::lit(cfg.t_max);
    let gen = Generator::new(&g, f.grid())?;
    let pde = m.pde_settings();
    let mass = f.integral();
    let c = centroid(f);
    let mut ci = vec![T::zero(); g.dim()];
    g.inv_into(&c, &mut ci);
    let mut u = f.values().to_vec();
    let mut now = T::zero();
    let mut on_grid = true;
    let margin = f.margin().max(1);
    let mut idx = vec![0; g.dim()];
    let mut lu = vec![T::zero(); u.len()];
    for (t, w) in log_nodes(lo, hi, cfg) {
        let scale = t.powf(power);
        if on_grid {
            let settings = MarchSettings {
                dt_max: t * T::lit(pde.dt_fraction),
                rough_start: false,
                cg_tol: T::lit(pde.cg_tol),
            };
            u = march(&gen, &u, now, &[t], settings)?.pop().expect("one snapshot");
            now = t;
            let sup = u.iter().fold(T::zero(), |a, v| a.max(v.abs()));
            let mut worst = T::zero();
            for (i, v) in u.iter().enumerate() {
                f.grid().unravel(i, &mut idx);
                if f.grid().in_margin(&idx, margin) {
                    worst = worst.max(v.abs());
                }
            }
            if worst <= T::lit(cfg.tail_tol) * sup {
                gen.apply(&u, &mut lu);
                acc.push(t, w, lu.iter().map(|v| *v * scale).collect());
                continue;
            }
            on_grid = false;
        }
        let far: Result<Vec<T>, HeatError> = (0..u.len())
            .into_par_iter()
            .map_init(
                || (vec![T::zero(); g.dim()], vec![T::zero(); g.dim()]),
                |(x, z), i| {
                    f.grid().coords_of(i, x);
                    g.mul_into(&ci, x, z);
                    m.heat_kernel_dt(t, z).map(|d| mass * d * scale)
                },
            )
            .collect();
        acc.push(t, w, far?);
    }
    finish_result(f, acc, Some(k_low), Some(k_high))
}

/// φ_α = ℛ^α h_1 = −(1/Γ(1−α)) ∫₁^∞ ∂_t h_t (t−1)^{−α} dt.
#[derive(Debug, Clone)]
pub enum PhiAlpha<T> {
    /// Closed Kummer form on ℝⁿ.
    Euclidean { n: usize, alpha: T },
    /// Table over (|z|, |u|) on H¹ with cubic interpolation, zero outside.
    Heisenberg { grid: Grid<T>, values: Vec<T> },
}

const PHI_TABLE_R: f64 = 8.0;
const PHI_TABLE_U: f64 = 16.0;
const PHI_TABLE_STEP: f64 = 0.1;

impl<T: Real> PhiAlpha<T> {
    pub fn new(m: &HeatModel<T>, alpha: T, cfg: &QuadratureConfig) -> Result<Self, SquareFnError> {
        if !(alpha > T::zero() && alpha < T::one()) {
            return Err(SquareFnError::Parameter(format!(
                "φ_α needs 0 < α < 1, got {}",
                alpha.as_f64()
            )));
        }
        let g = m.group();
        if g.is_abelian() {
            return Ok(PhiAlpha::Euclidean { n: g.dim(), alpha });
        }
        if g.dim() != 3 || g.weights() != GroupSpec::<T>::heisenberg().weights() {
            return Err(SquareFnError::Parameter(format!(
                "no φ_α construction for group `{}`",
                g.name()
            )));
        }
        let step = T::lit(PHI_TABLE_STEP);
        // three mirrored nodes below zero keep the cubic stencil symmetric
        let ra = Axis::new(-step * T::lit(3.0), step, (PHI_TABLE_R / PHI_TABLE_STEP) as usize + 4)?;
        let ua = Axis::new(-step * T::lit(3.0), step, (PHI_TABLE_U / PHI_TABLE_STEP) as usize + 4)?;
        let grid = Grid::new(vec![ra, ua])?;
        let values = (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let p = grid.point(i);
                phi_alpha_direct(m, alpha, &[p[0].abs(), T::zero(), p[1].abs()], cfg)
            })
            .collect::<Result<Vec<T>, SquareFnError>>()?;
        Ok(PhiAlpha::Heisenberg { grid, values })
    }

    pub fn eval(&self, x: &[T]) -> T {
        match self {
            PhiAlpha::Euclidean { n, alpha } => {
                let r = x.iter().map(|c| *c * *c).sum::<T>().sqrt();
                phi_alpha_euclidean(*n, *alpha, r).unwrap_or(T::zero())
            }
            PhiAlpha::Heisenberg { grid, values } => {
                let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
                interp::eval(grid, values, &[r, x[2].abs()])
            }
        }
    }
}

/// φ_α(x) by adaptive quadrature of the ∂_t h_t integral.
pub fn phi_alpha_direct<T: Real>(
    m: &HeatModel<T>,
    alpha: T,
    x: &[T],
    cfg: &QuadratureConfig,
) -> Result<T, SquareFnError> {
    let tol = Tolerance::new(T::lit(cfg.abs_tol) * T::lit(1e-2), T::lit(cfg.rel_tol));
    let mut failure = None;
    let mut dt = |t: T| match m.heat_kernel_dt(t, x) {
        Ok(v) => v,
        Err(e) => {
            failure.get_or_insert(e);
            T::zero()
        }
    };
    // s = (t − 1)^{1−α} removes the endpoint singularity on [1, 2]
    let e = T::one() / (T::one() - alpha);
    let near = quad::integrate(|s: T| dt(T::one() + s.powf(e)) * e, T::zero(), T::one(), tol)?;
    let far = quad::integrate_to_infinity(|t: T| dt(t) * (t - T::one()).powf(-alpha), T::lit(2.0), tol)?;
    if let Some(err) = failure {
        return Err(err.into());
    }
    Ok(-rgamma(T::one() - alpha) * (near.value + far.value))
}

/// ‖g‖_p of a result field for exponents other than 2.
pub fn lp_of_result<T: Real>(r: &SquareFnResult<T>, p: T) -> T {
    lp_of(r.field.values(), p, r.field.grid().cell_volume())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fracops::frac_power_spectral;
    use crate::specfun::gamma;

    fn r1(spacing: f64, f: impl Fn(f64) -> f64 + Sync) -> (HeatModel<f64>, SampledField<f64>) {
        let m = HeatModel::euclidean(1, QuadratureConfig::default());
        let grid = Grid::cube(1, spacing, 4096).unwrap();
        let field = SampledField::from_fn_truncated(m.group().clone(), grid, 8, |x: &[f64]| f(x[0])).unwrap();
        (m, field)
    }

    #[test]
    fn l2_isometry_constant() {
        let (m, f) = r1(0.01, |x| (-x * x).exp() * (1.0 + 0.3 * x));
        let cfg = QuadratureConfig::default();
        for alpha in [0.25, 0.5, 1.0] {
            let r = g_alpha(&m, &f, alpha, &cfg).unwrap();
            let want = (gamma(2.0 * alpha) / 4f64.powf(alpha)).sqrt();
            let got = r.lp / f.lp_norm(2.0).unwrap();
            assert!((got / want - 1.0).abs() < 2e-3, "{alpha}: {got} vs {want}");
            assert!(r.diagnostics.tail_fraction() < 0.05);
        }
        let zero = f.map(|_| 0.0);
        assert_eq!(g_alpha(&m, &zero, 0.5, &cfg).unwrap().lp, 0.0);
    }

    #[test]
    fn g_alpha_at_origin_matches_direct_t_integral() {
        // (tℛ)^{1/2}T_t e^{−x²} at 0 = (1/2π)∫ √t|ξ| e^{−tξ²} √π e^{−ξ²/4} dξ = √t/(2√π(t + 1/4))
        let (m, f) = r1(0.01, |x| (-x * x).exp());
        let r = g_alpha(&m, &f, 0.5, &QuadratureConfig::default()).unwrap();
        let want = quad::integrate_to_infinity(
            |t: f64| {
                let v = 0.5 * (t / std::f64::consts::PI).sqrt() / (t + 0.25);
                v * v / t
            },
            0.0,
            Tolerance::new(1e-14, 1e-12),
        )
        .unwrap()
        .value
        .sqrt();
        let got = r.field.values()[2048];
        assert!((got / want - 1.0).abs() < 1e-4, "{got} {want}");
    }

    #[test]
    fn g_phi_is_root_nu_times_g_alpha() {
        let (m, f) = r1(0.01, |x| (-x * x).exp() * (1.0 + 0.5 * (2.0 * x).sin()));
        let cfg = QuadratureConfig::default();
        let phi = PhiAlpha::new(&m, 0.5, &cfg).unwrap();
        let gp = g_phi(&f, &|x: &[f64]| phi.eval(x), &cfg).unwrap();
        let ga = g_alpha(&m, &f, 0.5, &cfg).unwrap();
        for i in [1800usize, 2048, 2200, 2500] {
            let r = ga.field.values()[i] / gp.field.values()[i];
            assert!((r / 2f64.sqrt() - 1.0).abs() < 1e-2, "{i}: {r}");
        }
    }

    #[test]
    fn g_s_matches_composition() {
        // ℛ^{s/2}f has |x|^{−1−s/2} tails, so the box is wide and only the
        // middle is compared
        let m = HeatModel::euclidean(1, QuadratureConfig::default());
        let grid = Grid::cube(1, 0.01, 16384).unwrap();
        let f = SampledField::from_fn_truncated(m.group().clone(), grid, 8, |x: &[f64]| (-x[0] * x[0]).exp()).unwrap();
        let cfg = QuadratureConfig::default();
        let s = 0.5;
        let gs = g_s(&m, &f, s, &cfg).unwrap();
        let rf = frac_power_spectral(&m, &f, s / 2.0).unwrap();
        let comp = g_alpha(&m, &rf, 1.0 - s / 2.0, &cfg).unwrap();
        let peak = gs.field.sup_norm();
        let err = (8192 - 1000..8192 + 1000)
            .map(|i| (gs.field.values()[i] - comp.field.values()[i]).abs())
            .fold(0.0, f64::max)
            / peak;
        assert!(err < 1e-3, "{err}");
        assert!(matches!(g_s(&m, &f, 2.0, &cfg), Err(SquareFnError::Parameter(_))));
    }

    #[test]
    fn heisenberg_phi_table_matches_direct() {
        let m = HeatModel::<f64>::heisenberg(crate::heat::HeatKind::H1Quadrature, QuadratureConfig::default()).unwrap();
        let cfg = QuadratureConfig::default();
        let a = phi_alpha_direct(&m, 0.5, &[0.3, 0.4, 0.2], &cfg).unwrap();
        let b = phi_alpha_direct(&m, 0.5, &[-0.3, -0.4, -0.2], &cfg).unwrap();
        assert_eq!(a, b);
        let table = PhiAlpha::new(&m, 0.5, &cfg).unwrap();
        for x in [[0.0, 0.0, 0.0], [0.3, 0.4, 0.2], [1.1, -0.7, 2.35], [0.0, 2.0, -4.0]] {
            let d = phi_alpha_direct(&m, 0.5, &x, &cfg).unwrap();
            let t = table.eval(&x);
            assert!((t - d).abs() < 1e-4 * a.abs(), "{x:?}: {t} vs {d}");
        }
    }
}
