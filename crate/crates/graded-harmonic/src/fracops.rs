//! Fractional powers ℛ^α of the heat generator: the kernel k_α, the
//! second-difference representation, the Balakrishnan t-integral and the
//! Euclidean Fourier multiplier.

use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::QuadratureConfig;
use crate::field::{lp_of, FieldError, SampledField};
use crate::group::{GroupSpec, QuasiNorm, QuasiSphere};
use crate::heat::{march, Generator, HeatError, HeatModel, MarchSettings};
use crate::quad::{self, GaussLegendre, QuadError, Tolerance};
use crate::scalar::Real;
use crate::specfun::rgamma;
use crate::spectral::PaddedSpectrum;

#[derive(Debug, Error)]
pub enum FracError {
    #[error("exponent out of range: {0}")]
    Exponent(String),
    #[error("k_α is singular at the identity")]
    Identity,
    #[error("evaluation point is too close to the grid boundary")]
    NearBoundary,
    #[error("Lebesgue exponent must exceed 1, got {0}")]
    BadP(f64),
    #[error("numerical non-convergence: {0}")]
    NonConvergence(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Heat(#[from] HeatError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}

/// Routes to ℛ^α f.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FracRoute {
    Pointwise,
    Balakrishnan,
    Spectral,
}

impl FracRoute {
    pub fn name(self) -> &'static str {
        match self {
            FracRoute::Pointwise => "pointwise",
            FracRoute::Balakrishnan => "balakrishnan",
            FracRoute::Spectral => "spectral",
        }
    }
}

impl FromStr for FracRoute {
    type Err = FracError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pointwise" => Ok(FracRoute::Pointwise),
            "balakrishnan" => Ok(FracRoute::Balakrishnan),
            "spectral" => Ok(FracRoute::Spectral),
            other => Err(FracError::Unsupported(format!("unknown route `{other}`"))),
        }
    }
}

fn check_alpha<T: Real>(alpha: T, upper: T, what: &str) -> Result<(), FracError> {
    if alpha > T::zero() && alpha < upper && alpha.is_finite() {
        Ok(())
    } else {
        Err(FracError::Exponent(format!(
            "{what} needs 0 < α < {}, got {}",
            upper.as_f64(),
            alpha.as_f64()
        )))
    }
}

/// ∫₀^∞ h_τ(ω) τ^{−1−α} dτ, integrated in s = ln τ over [10⁻³, 10⁶] with
/// the power-law tail h_τ ∝ τ^{−Q/ν} beyond.
fn kernel_time_integral<T: Real>(
    m: &HeatModel<T>,
    alpha: T,
    omega: &[T],
    cfg: &QuadratureConfig,
) -> Result<T, FracError> {
    let lo = T::lit(1e-3).ln();
    let hi = T::lit(1e6);
    let decay = T::from_count(m.group().homogeneous_dim() as usize) / T::from_count(m.nu() as usize);
    let tol = Tolerance::new(T::lit(cfg.abs_tol) * T::lit(1e-3), T::lit(cfg.rel_tol) * T::lit(1e-2));
    let mut failure = None;
    let body = quad::integrate(
        |s: T| {
            let t = s.exp();
            match m.heat_kernel(t, omega) {
                Ok(h) => h * (-alpha * s).exp(),
                Err(e) => {
                    failure.get_or_insert(e);
                    T::zero()
                }
            }
        },
        lo,
        hi.ln(),
        tol,
    )?;
    if let Some(e) = failure {
        return Err(e.into());
    }
    let tail = m.heat_kernel(hi, omega)? * hi.powf(-alpha) / (alpha + decay);
    Ok(body.value + tail)
}

/// k_α(y) = (1/Γ(−α)) ∫₀^∞ h_t(y) t^{−1−α} dt, evaluated on the unit
/// quasi-sphere after the substitution t = |y|^ν τ.
pub fn k_alpha<T: Real>(m: &HeatModel<T>, alpha: T, y: &[T], cfg: &QuadratureConfig) -> Result<T, FracError> {
    if !(alpha > T::zero()) {
        return Err(FracError::Exponent(format!("k_α needs α > 0, got {}", alpha.as_f64())));
    }
    let g = m.group();
    if y.len() != g.dim() {
        return Err(FieldError::DimensionMismatch {
            grid: y.len(),
            group: g.dim(),
        }
        .into());
    }
    let r = g.norm_of(y, QuasiNorm::Smooth);
    if r == T::zero() {
        return Err(FracError::Identity);
    }
    let mut omega = vec![T::zero(); y.len()];
    g.dilate_into(T::one() / r, y, &mut omega);
    let q = T::from_count(g.homogeneous_dim() as usize);
    let nu = T::from_count(m.nu() as usize);
    let j = kernel_time_integral(m, alpha, &omega, cfg)?;
    Ok(r.powf(-q - alpha * nu) * j * rgamma(-alpha))
}

/// k_α on the unit smooth quasi-sphere with the moments the pointwise
/// route needs.
#[derive(Debug, Clone)]
pub struct KernelProfile<T> {
    pub alpha: T,
    pub sphere: QuasiSphere<T>,
    /// k_α at each sphere node.
    pub values: Vec<T>,
    /// ∫_S k_α dσ.
    pub mass: T,
    /// ∫_S ω_i ω_j k_α dσ over the weight-one coordinates.
    pub moments: Vec<Vec<T>>,
    /// Indices of the weight-one coordinates.
    pub layer_one: Vec<usize>,
}

impl<T: Real> KernelProfile<T> {
    pub fn new(m: &HeatModel<T>, alpha: T, cfg: &QuadratureConfig) -> Result<Self, FracError> {
        let g = m.group();
        let sphere = QuasiSphere::new(g, QuasiNorm::Smooth, cfg.angular_nodes);
        let values = sphere
            .directions
            .par_iter()
            .map(|w| k_alpha(m, alpha, w, cfg))
            .collect::<Result<Vec<T>, FracError>>()?;
        let layer_one: Vec<usize> = (0..g.dim()).filter(|&j| g.weights()[j] == 1).collect();
        let mut moments = vec![vec![T::zero(); layer_one.len()]; layer_one.len()];
        let mut mass = T::zero();
        for ((w, dir), k) in sphere.weights.iter().zip(&sphere.directions).zip(&values) {
            mass += *w * *k;
            for (a, &i) in layer_one.iter().enumerate() {
                for (b, &j) in layer_one.iter().enumerate() {
                    moments[a][b] += *w * *k * dir[i] * dir[j];
                }
            }
        }
        Ok(Self {
            alpha,
            sphere,
            values,
            mass,
            moments,
            layer_one,
        })
    }
}

/// One evaluation of the second-difference representation.
#[derive(Debug, Clone, Copy)]
pub struct PointwiseValue<T> {
    pub value: T,
    /// Taylor estimate of the |y| < ε piece.
    pub inner: T,
    /// Polar quadrature over ε ≤ |y| ≤ R.
    pub outer: T,
    /// Analytic piece beyond R, where f(x·y^{±1}) = 0.
    pub tail: T,
    /// Change of the value when ε is doubled.
    pub eps_change: T,
}

/// Radial Gauss–Legendre panels on [ε, R]: first [ε, 2ε], then widths
/// growing by 2^{1/3} up to R/64.
fn radial_panels<T: Real>(eps: T, r_max: T, nodes: usize) -> Vec<(T, T)> {
    let rule = GaussLegendre::<T>::new(nodes);
    let mut out = Vec::new();
    let mut lo = eps;
    let mut width = eps;
    let cap = r_max / T::lit(64.0);
    let grow = T::lit(2f64.powf(1.0 / 3.0));
    while lo < r_max {
        let hi = (lo + width).min(r_max);
        out.extend(rule.mapped(lo, hi));
        lo = hi;
        width = (width * grow).min(cap.max(eps));
    }
    out
}

struct PointwiseSetup<T> {
    eps: T,
    rho: T,
    box_corners: Vec<Vec<T>>,
    profile: KernelProfile<T>,
    s: T,
}

impl<T: Real> PointwiseSetup<T> {
    fn new(m: &HeatModel<T>, f: &SampledField<T>, alpha: T, cfg: &QuadratureConfig) -> Result<Self, FracError> {
        let nu = T::from_count(m.nu() as usize);
        check_alpha(alpha, T::lit(2.0) / nu, "the pointwise representation")?;
        let g = m.group();
        let h = f
            .grid()
            .axes()
            .iter()
            .zip(g.weights())
            .map(|(a, &w)| a.spacing.powf(T::one() / T::from_count(w as usize)))
            .fold(T::zero(), T::max);
        let axes = f.grid().axes();
        let n = axes.len();
        let box_corners = (0..1usize << n)
            .map(|mask| {
                (0..n)
                    .map(|k| {
                        if mask >> k & 1 == 1 {
                            axes[k].last()
                        } else {
                            axes[k].origin
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            eps: T::lit(cfg.eps_singular) * h,
            rho: g.rho(QuasiNorm::Smooth),
            box_corners,
            profile: KernelProfile::new(m, alpha, cfg)?,
            s: alpha * nu,
        })
    }
}

/// Symmetrized second derivatives ∂_i∂_j f(x·y) at y = 0 over the
/// weight-one coordinates, by fourth-order differences with step 2h.
fn layer_one_hessian<T: Real>(g: &GroupSpec<T>, f: &SampledField<T>, x: &[T], layer: &[usize]) -> Vec<Vec<T>> {
    let n = g.dim();
    let mut y = vec![T::zero(); n];
    let mut xy = vec![T::zero(); n];
    let mut at = |pairs: &[(usize, T)]| -> T {
        y.iter_mut().for_each(|v| *v = T::zero());
        for &(k, v) in pairs {
            y[k] += v;
        }
        g.mul_into(x, &y, &mut xy);
        f.eval(&xy)
    };
    let f0 = at(&[]);
    let mut out = vec![vec![T::zero(); layer.len()]; layer.len()];
    for (a, &i) in layer.iter().enumerate() {
        let d = f.grid().axes()[i].spacing * T::lit(2.0);
        let (p1, m1, p2, m2) = (at(&[(i, d)]), at(&[(i, -d)]), at(&[(i, d + d)]), at(&[(i, -d - d)]));
        out[a][a] = (-p2 + T::lit(16.0) * (p1 + m1) - T::lit(30.0) * f0 - m2) / (T::lit(12.0) * d * d);
        for (b, &j) in layer.iter().enumerate().skip(a + 1) {
            let e = f.grid().axes()[j].spacing * T::lit(2.0);
            let mut mixed = |s: T| {
                (at(&[(i, d * s), (j, e * s)]) - at(&[(i, d * s), (j, -e * s)]) - at(&[(i, -d * s), (j, e * s)])
                    + at(&[(i, -d * s), (j, -e * s)]))
                    / (T::lit(4.0) * d * e * s * s)
            };
            // Richardson on the O(h²) cross difference
            let v = (T::lit(4.0) * mixed(T::one()) - mixed(T::lit(2.0))) / T::lit(3.0);
            out[a][b] = v;
            out[b][a] = v;
        }
    }
    out
}

fn pointwise_at<T: Real>(
    m: &HeatModel<T>,
    f: &SampledField<T>,
    setup: &PointwiseSetup<T>,
    x: &[T],
    nodes: usize,
) -> PointwiseValue<T> {
    let g = m.group();
    let n = g.dim();
    let prof = &setup.profile;
    let half = T::lit(0.5);
    let fx = f.eval(x);
    // every node of the grid box lies within R of x
    let xn = g.norm_of(x, QuasiNorm::Smooth);
    let far = setup
        .box_corners
        .iter()
        .map(|c| g.norm_of(c, QuasiNorm::Smooth))
        .fold(T::zero(), T::max);
    let r_max = (setup.rho * (xn + far)).max(setup.eps * T::lit(4.0));

    let hess = layer_one_hessian(g, f, x, &prof.layer_one);
    let quad_moment: T = hess
        .iter()
        .zip(&prof.moments)
        .map(|(hr, mr)| hr.iter().zip(mr).map(|(a, b)| *a * *b).sum::<T>())
        .sum();
    let inner_at = |eps: T| half * quad_moment * eps.powf(T::lit(2.0) - setup.s) / (T::lit(2.0) - setup.s);

    let mut y = vec![T::zero(); n];
    let mut yi = vec![T::zero(); n];
    let mut p = vec![T::zero(); n];
    let mut outer = T::zero();
    let mut first_panel = T::zero();
    let panels = radial_panels(setup.eps, r_max, nodes);
    for (idx, (r, w)) in panels.iter().enumerate() {
        let radial = *w * r.powf(-T::one() - setup.s);
        let mut ring = T::zero();
        for ((dir, wd), k) in prof
            .sphere
            .directions
            .iter()
            .zip(&prof.sphere.weights)
            .zip(&prof.values)
        {
            g.dilate_into(*r, dir, &mut y);
            g.mul_into(x, &y, &mut p);
            let plus = f.eval(&p);
            g.inv_into(&y, &mut yi);
            g.mul_into(x, &yi, &mut p);
            let minus = f.eval(&p);
            ring += *wd * *k * (plus + minus - fx - fx);
        }
        let c = half * radial * ring;
        outer += c;
        if idx < nodes {
            first_panel += c;
        }
    }
    let tail = -fx * prof.mass * r_max.powf(-setup.s) / setup.s;
    let inner = inner_at(setup.eps);
    let value = inner + outer + tail;
    let coarse = inner_at(setup.eps + setup.eps) + outer - first_panel + tail;
    PointwiseValue {
        value,
        inner,
        outer,
        tail,
        eps_change: (coarse - value).abs(),
    }
}

const STENCIL_REACH: usize = 4;

/// ℛ^α f(x) = ½ ∫ Δ²_y f(x) k_α(y) dy for 0 < α < 2/ν. The ball
/// |y| < ε uses the second-order Taylor term of Δ²_y f(x).
pub fn frac_power_pointwise<T: Real>(
    m: &HeatModel<T>,
    f: &SampledField<T>,
    alpha: T,
    x: &[T],
    cfg: &QuadratureConfig,
) -> Result<PointwiseValue<T>, FracError> {
    if x.len() != m.group().dim() {
        return Err(FieldError::DimensionMismatch {
            grid: x.len(),
            group: m.group().dim(),
        }
        .into());
    }
    let setup = PointwiseSetup::new(m, f, alpha, cfg)?;
    // the Taylor stencil reaches 4 spacings along every weight-one axis; a
    // zero margin that wide makes the zero extension smooth at the edge
    let inside = f.margin() >= STENCIL_REACH
        || f.grid().axes().iter().zip(x).all(|(a, &c)| {
            let reach = a.spacing * T::lit(4.0);
            c - reach >= a.origin && c + reach <= a.last()
        });
    if !inside {
        return Err(FracError::NearBoundary);
    }
    Ok(pointwise_at(m, f, &setup, x, cfg.sub_nodes_per_octave))
}

/// The pointwise route at every grid node. Unless `f` has a zero margin of
/// at least four nodes, nodes within four spacings of the boundary are set
/// to zero. Also returns the largest ε-doubling change.
pub fn frac_power_pointwise_field<T: Real>(
    m: &HeatModel<T>,
    f: &SampledField<T>,
    alpha: T,
    cfg: &QuadratureConfig,
) -> Result<(SampledField<T>, T), FracError> {
    check_field(m, f)?;
    let setup = PointwiseSetup::new(m, f, alpha, cfg)?;
    let grid = f.grid();
    let results: Vec<(T, T)> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let mut idx = vec![0; grid.dim()];
            grid.unravel(i, &mut idx);
            if f.margin() < STENCIL_REACH && grid.in_margin(&idx, STENCIL_REACH) {
                return (T::zero(), T::zero());
            }
            let x = grid.point(i);
            let v = pointwise_at(m, f, &setup, &x, cfg.sub_nodes_per_octave);
            (v.value, v.eps_change)
        })
        .collect();
    let change = results.iter().fold(T::zero(), |a, r| a.max(r.1));
    let values = results.into_iter().map(|r| r.0).collect();
    Ok((f.with_values(values, 0)?, change))
}

fn check_field<T: Real>(m: &HeatModel<T>, f: &SampledField<T>) -> Result<(), FracError> {
    if **f.group() == **m.group() {
        Ok(())
    } else {
        Err(FieldError::Mismatch.into())
    }
}

/// ℛ^α f with the Fourier multiplier |ξ|^{2α} (ℝⁿ only).
pub fn frac_power_spectral<T: Real>(
    m: &HeatModel<T>,
    f: &SampledField<T>,
    alpha: T,
) -> Result<SampledField<T>, FracError> {
    check_field(m, f)?;
    if !m.group().is_abelian() {
        return Err(FracError::Unsupported("the spectral route exists on ℝⁿ only".into()));
    }
    if !(alpha > T::zero()) {
        return Err(FracError::Exponent(format!(
            "α must be positive, got {}",
            alpha.as_f64()
        )));
    }
    let spec = PaddedSpectrum::new(f, m.pad_factor(f.grid()));
    let v = spec.crop(&spec.apply(|k2| if k2 > T::zero() { k2.powf(alpha) } else { T::zero() }));
    Ok(f.with_values(v, 0)?)
}

/// Output of the Balakrishnan route.
#[derive(Debug, Clone)]
pub struct BalakrishnanResult<T> {
    pub field: SampledField<T>,
    /// Relative L² change between extrapolations from (ε/4, ε/2, ε) and
    /// (ε/2, ε, 2ε).
    pub residual: T,
    /// Last time at which T_t f was computed on the grid; beyond it the
    /// far-field form T_t f ≈ (∫f) h_t(c⁻¹·x) is used.
    pub exact_until: T,
    /// 2‖f‖₂ t_max^{−α}/α, the size bound of the (t_max, ∞) piece.
    pub tail_bound: T,
}

/// ℛ^α f = (−1/Γ(−α)) lim_{ε→0} ∫_ε^∞ t^{−α−1}(f − T_t f) dt for 0 < α < 1.
///
/// Log-spaced Gauss–Legendre panels in t over [ε/4, t_max] with ε = t_min;
/// the ε → 0 limit is a two-term Richardson extrapolation with exponents
/// 1−α and 2−α.
pub fn frac_power_balakrishnan<T: Real>(
    m: &HeatModel<T>,
    f: &SampledField<T>,
    alpha: T,
    cfg: &QuadratureConfig,
) -> Result<BalakrishnanResult<T>, FracError> {
    check_field(m, f)?;
    check_alpha(alpha, T::one(), "the Balakrishnan integral")?;
    let g = m.group().clone();
    let eps = T::lit(cfg.t_min);
    let t_max = T::lit(cfg.t_max);
    let rule = GaussLegendre::<T>::new(cfg.sub_nodes_per_octave.max(2));
    let panels_per_decade = (cfg.points_per_decade / rule.len()).max(1);
    // buckets: 0 = [ε/4, ε/2], 1 = [ε/2, ε], 2 = [ε, 2ε], 3 = [2ε, t_max]
    let mut nodes: Vec<(T, T, usize)> = Vec::new();
    let quarter = eps / T::lit(4.0);
    for (b, lo) in [quarter, quarter * T::lit(2.0), eps].into_iter().enumerate() {
        for (t, w) in quad::log_panels(&rule, lo, lo * T::lit(2.0), 1) {
            nodes.push((t, w, b));
        }
    }
    for (t, w) in quad::log_panels(&rule, eps * T::lit(2.0), t_max, panels_per_decade) {
        nodes.push((t, w, 3));
    }
    let len = f.values().len();
    let mut sums = vec![vec![T::zero(); len]; 4];
    let mass = f.integral();
    let centroid = centroid(f);
    let q_over_nu = T::from_count(g.homogeneous_dim() as usize) / T::from_count(m.nu() as usize);

    // far-field form of T_t f
    let monopole = |t: T, out: &mut Vec<T>| -> Result<(), FracError> {
        let mut ci = vec![T::zero(); g.dim()];
        g.inv_into(&centroid, &mut ci);
        let vals: Result<Vec<T>, HeatError> = (0..len)
            .into_par_iter()
            .map_init(
                || (vec![T::zero(); g.dim()], vec![T::zero(); g.dim()]),
                |(x, z), i| {
                    f.grid().coords_of(i, x);
                    g.mul_into(&ci, x, z);
                    m.heat_kernel(t, z).map(|h| mass * h)
                },
            )
            .collect();
        *out = vals?;
        Ok(())
    };

    let mut exact_until = T::zero();
    if g.is_abelian() {
        let spec = PaddedSpectrum::new(f, m.pad_factor(f.grid()));
        let t_cut = spec.periodic_time_limit(cfg.tail_tol);
        for b in 0..4 {
            let mut weight_sum = T::zero();
            let mut coeff: Vec<(T, T)> = Vec::new();
            for &(t, w, bucket) in &nodes {
                if bucket != b {
                    continue;
                }
                let c = w * t.powf(-alpha);
                if t <= t_cut {
                    weight_sum += c;
                    coeff.push((t, c));
                    exact_until = exact_until.max(t);
                }
            }
            let tf = spec.crop(&spec.apply(|k2| coeff.iter().map(|&(t, c)| c * (-t * k2).exp()).sum()));
            for ((s, fv), tv) in sums[b].iter_mut().zip(f.values()).zip(&tf) {
                *s = weight_sum * *fv - *tv;
            }
        }
        let mut far = Vec::new();
        for &(t, w, b) in &nodes {
            if t > t_cut {
                monopole(t, &mut far)?;
                let c = w * t.powf(-alpha);
                for ((s, fv), tv) in sums[b].iter_mut().zip(f.values()).zip(&far) {
                    *s += c * (*fv - *tv);
                }
            }
        }
    } else {
        let gen = Generator::new(&g, f.grid())?;
        let settings = MarchSettings {
            dt_max: T::lit(m.pde_settings().dt_fraction),
            rough_start: false,
            cg_tol: T::lit(m.pde_settings().cg_tol),
        };
        let mut order: Vec<usize> = (0..nodes.len()).collect();
        order.sort_by(|&a, &b| nodes[a].0.partial_cmp(&nodes[b].0).expect("finite times"));
        let mut u = f.values().to_vec();
        let mut now = T::zero();
        let mut on_grid = true;
        let mut far = Vec::new();
        let margin = f.margin().max(1);
        let mut idx = vec![0; g.dim()];
        for k in order {
            let (t, w, b) = nodes[k];
            let c = w * t.powf(-alpha);
            if on_grid {
                let s = MarchSettings {
                    dt_max: settings.dt_max * t,
                    ..settings
                };
                u = march(&gen, &u, now, &[t], s)?.pop().expect("one snapshot");
                now = t;
                let sup = u.iter().fold(T::zero(), |a, v| a.max(v.abs()));
                let mut worst = T::zero();
                for (i, v) in u.iter().enumerate() {
                    f.grid().unravel(i, &mut idx);
                    if f.grid().in_margin(&idx, margin) {
                        worst = worst.max(v.abs());
                    }
                }
                if worst > T::lit(cfg.tail_tol) * sup {
                    on_grid = false;
                } else {
                    exact_until = t;
                    for ((s, fv), tv) in sums[b].iter_mut().zip(f.values()).zip(&u) {
                        *s += c * (*fv - *tv);
                    }
                    continue;
                }
            }
            monopole(t, &mut far)?;
            for ((s, fv), tv) in sums[b].iter_mut().zip(f.values()).zip(&far) {
                *s += c * (*fv - *tv);
            }
        }
    }

    // (t_max, ∞): f t_max^{−α}/α minus the far-field form with h_t ∝ t^{−Q/ν}
    let mut far = Vec::new();
    monopole(t_max, &mut far)?;
    let a = t_max.powf(-alpha);
    for ((s, fv), tv) in sums[3].iter_mut().zip(f.values()).zip(&far) {
        *s += *fv * a / alpha - *tv * a / (alpha + q_over_nu);
    }

    let p1 = T::one() - alpha;
    let p2 = T::lit(2.0) - alpha;
    let two = T::lit(2.0);
    let r1 = |coarse: T, fine: T| (two.powf(p1) * fine - coarse) / (two.powf(p1) - T::one());
    let r2 = |c: T, m_: T, fi: T| (two.powf(p2) * r1(m_, fi) - r1(c, m_)) / (two.powf(p2) - T::one());
    let scale = -rgamma(-alpha);
    let mut best = vec![T::zero(); len];
    let mut alt = vec![T::zero(); len];
    for i in 0..len {
        let i_2e = sums[3][i];
        let i_e = i_2e + sums[2][i];
        let i_half = i_e + sums[1][i];
        let i_quarter = i_half + sums[0][i];
        best[i] = scale * r2(i_e, i_half, i_quarter);
        alt[i] = scale * r2(i_2e, i_e, i_half);
    }
    let cell = f.grid().cell_volume();
    let norm = lp_of(&best, two, cell);
    let diff: Vec<T> = best.iter().zip(&alt).map(|(a, b)| *a - *b).collect();
    let residual = if norm > T::zero() {
        lp_of(&diff, two, cell) / norm
    } else {
        T::zero()
    };
    let tail_bound = two * f.lp_norm(two)? * a / alpha;
    Ok(BalakrishnanResult {
        field: f.with_values(best, 0)?,
        residual,
        exact_until,
        tail_bound,
    })
}

/// Coordinate centroid ∫x f / ∫f (origin if ∫f = 0).
pub(crate) fn centroid<T: Real>(f: &SampledField<T>) -> Vec<T> {
    let n = f.grid().dim();
    let mut acc = vec![T::zero(); n];
    let mut x = vec![T::zero(); n];
    let mut total = T::zero();
    for (i, v) in f.values().iter().enumerate() {
        f.grid().coords_of(i, &mut x);
        total += *v;
        for k in 0..n {
            acc[k] += *v * x[k];
        }
    }
    if total == T::zero() {
        return vec![T::zero(); n];
    }
    acc.iter().map(|a| *a / total).collect()
}

/// ℛ^α f by the default route of the model's group: the multiplier on ℝⁿ,
/// the Balakrishnan integral otherwise.
pub fn frac_power<T: Real>(
    m: &HeatModel<T>,
    f: &SampledField<T>,
    alpha: T,
    cfg: &QuadratureConfig,
) -> Result<SampledField<T>, FracError> {
    if m.group().is_abelian() {
        frac_power_spectral(m, f, alpha)
    } else {
        let r = frac_power_balakrishnan(m, f, alpha, cfg)?;
        check_residual(&r, cfg)?;
        Ok(r.field)
    }
}

/// Fails when the extrapolation residual exceeds rel_tol.
pub fn check_residual<T: Real>(r: &BalakrishnanResult<T>, cfg: &QuadratureConfig) -> Result<(), FracError> {
    if r.residual.as_f64() > cfg.rel_tol {
        Err(FracError::NonConvergence(format!(
            "ε-extrapolation residual {:e} exceeds rel_tol {:e}",
            r.residual.as_f64(),
            cfg.rel_tol
        )))
    } else {
        Ok(())
    }
}

/// ‖(I + ℛ)^{s/ν} f‖_p: the multiplier (1+|ξ|²)^{s/2} on ℝⁿ, and
/// ‖f‖_p + ‖ℛ^{s/ν} f‖_p otherwise.
pub fn sobolev_norm<T: Real>(
    m: &HeatModel<T>,
    f: &SampledField<T>,
    s: T,
    p: T,
    cfg: &QuadratureConfig,
) -> Result<T, FracError> {
    check_field(m, f)?;
    if !(p > T::one()) {
        return Err(FracError::BadP(p.as_f64()));
    }
    if !(s > T::zero()) {
        return Err(FracError::Exponent(format!("s must be positive, got {}", s.as_f64())));
    }
    if m.group().is_abelian() {
        let spec = PaddedSpectrum::new(f, m.pad_factor(f.grid()));
        let v = spec.crop(&spec.apply(|k2| (T::one() + k2).powf(s / T::lit(2.0))));
        return Ok(lp_of(&v, p, f.grid().cell_volume()));
    }
    let alpha = s / T::from_count(m.nu() as usize);
    let r = frac_power(m, f, alpha, cfg)?;
    Ok(f.lp_norm(p)? + r.lp_norm(p)?)
}

/// ‖f‖_{W^{1,p}} = ‖f‖_p + Σ_{σ_j = 1} ‖X_j f‖_p.
pub fn w1p_norm<T: Real>(f: &SampledField<T>, p: T) -> Result<T, FracError> {
    if !(p >= T::one()) {
        return Err(FracError::BadP(p.as_f64()));
    }
    let g = f.group().clone();
    let mut total = f.lp_norm(p)?;
    for j in (0..g.dim()).filter(|&j| g.weights()[j] == 1) {
        total += f.apply_vf(j)?.lp_norm(p)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid;
    use crate::specfun::gamma;
    use std::sync::Arc;

    fn r1_gaussian(h: f64, n: usize) -> (HeatModel<f64>, SampledField<f64>) {
        let m = HeatModel::euclidean(1, QuadratureConfig::default());
        let f = SampledField::from_fn_truncated(m.group().clone(), Grid::cube(1, h, n).unwrap(), 8, |x| {
            (-x[0] * x[0]).exp()
        })
        .unwrap();
        (m, f)
    }

    #[test]
    fn euclidean_kernel_matches_closed_form() {
        let m = HeatModel::<f64>::euclidean(1, QuadratureConfig::default());
        let cfg = QuadratureConfig::default();
        for alpha in [0.25, 0.5, 0.75] {
            let c = 4f64.powf(alpha) * gamma(0.5 + alpha) / (std::f64::consts::PI.sqrt() * gamma(-alpha));
            for x in [0.5, 1.0, 2.0, 4.0] {
                let k = k_alpha(&m, alpha, &[x], &cfg).unwrap();
                assert!((k * x.powf(1.0 + 2.0 * alpha) / c - 1.0).abs() < 1e-8, "{alpha} {x}");
            }
        }
        assert!(matches!(k_alpha(&m, 0.5, &[0.0], &cfg), Err(FracError::Identity)));
    }

    #[test]
    fn spectral_route_on_gaussian() {
        // (−Δ)^{1/2} e^{−x²} at 0 is (1/2π)∫|ξ|√π e^{−ξ²/4} dξ = 2/√π
        let (m, f) = r1_gaussian(0.01, 4096);
        let out = frac_power_spectral(&m, &f, 0.5).unwrap();
        let i = f.grid().flat(&[2048]);
        // periodic images of the −(√π/π)x⁻² far field shift the value by ~4e−6
        assert!(
            (out.values()[i] - 2.0 / std::f64::consts::PI.sqrt()).abs() < 1e-5,
            "{}",
            out.values()[i]
        );
    }

    #[test]
    fn balakrishnan_matches_spectral() {
        let (m, f) = r1_gaussian(0.02, 2048);
        let cfg = QuadratureConfig::default();
        let spec = frac_power_spectral(&m, &f, 0.5).unwrap();
        let bal = frac_power_balakrishnan(&m, &f, 0.5, &cfg).unwrap();
        let err = bal.field.add_scaled(&spec, -1.0).unwrap().lp_norm(2.0).unwrap() / spec.lp_norm(2.0).unwrap();
        assert!(err < 1e-4, "{err}");
        assert!(bal.residual < 1e-6, "{}", bal.residual);
    }

    #[test]
    fn pointwise_matches_spectral_at_points() {
        let (m, f) = r1_gaussian(0.01, 4096);
        let cfg = QuadratureConfig::default();
        let spec = frac_power_spectral(&m, &f, 0.5).unwrap();
        for x in [0.0, 0.37, 1.5] {
            let i = f.grid().axes()[0].position(x).round() as usize;
            let want = spec.values()[i];
            let xi = f.grid().point(i)[0];
            let v = frac_power_pointwise(&m, &f, 0.5, &[xi], &cfg).unwrap();
            assert!(
                (v.value - want).abs() < 1e-4 * want.abs().max(0.1),
                "{x}: {} vs {want}",
                v.value
            );
            assert!(v.eps_change < 1e-2);
        }
        let edge = f.grid().axes()[0].origin;
        let bare = f.with_values(f.values().to_vec(), 0).unwrap();
        assert!(matches!(
            frac_power_pointwise(&m, &bare, 0.5, &[edge], &cfg),
            Err(FracError::NearBoundary)
        ));
        // with a zero margin the edge is reachable: far field −x⁻²/√π
        let v = frac_power_pointwise(&m, &f, 0.5, &[edge], &cfg).unwrap().value;
        assert!(
            (v * edge * edge * std::f64::consts::PI.sqrt() + 1.0).abs() < 1e-2,
            "{v}"
        );
        assert!(matches!(
            frac_power_pointwise(&m, &f, 1.0, &[0.0], &cfg),
            Err(FracError::Exponent(_))
        ));
    }

    #[test]
    fn sobolev_norm_small_s_and_plancherel() {
        let (m, f) = r1_gaussian(0.01, 4096);
        let cfg = QuadratureConfig::default();
        let l2 = f.lp_norm(2.0).unwrap();
        let small = sobolev_norm(&m, &f, 1e-3, 2.0, &cfg).unwrap();
        assert!((small / l2 - 1.0).abs() < 0.02);
        // ‖(1+|ξ|²)^{1/2} f̂‖² = (1/2π)∫(1+ξ²)π e^{−ξ²/2} dξ
        let want = {
            let v = quad::integrate(
                |xi: f64| {
                    (1.0 + xi * xi) * std::f64::consts::PI * (-xi * xi / 2.0).exp() / (2.0 * std::f64::consts::PI)
                },
                -40.0,
                40.0,
                Tolerance::new(1e-14, 1e-13),
            )
            .unwrap()
            .value;
            v.sqrt()
        };
        let got = sobolev_norm(&m, &f, 1.0, 2.0, &cfg).unwrap();
        assert!((got / want - 1.0).abs() < 1e-6, "{got} {want}");
        assert!(matches!(sobolev_norm(&m, &f, 1.0, 1.0, &cfg), Err(FracError::BadP(_))));
    }

    #[test]
    fn heisenberg_kernel_scaling() {
        let m = HeatModel::<f64>::heisenberg(crate::heat::HeatKind::H1Quadrature, QuadratureConfig::default()).unwrap();
        let cfg = QuadratureConfig::default();
        let g = Arc::clone(m.group());
        let y = [0.4, -0.3, 0.2];
        let k = k_alpha(&m, 0.3, &y, &cfg).unwrap();
        let s = 1.7;
        let mut dy = [0.0; 3];
        g.dilate_into(s, &y, &mut dy);
        let ks = k_alpha(&m, 0.3, &dy, &cfg).unwrap();
        assert!((ks / (s.powf(-4.0 - 0.6) * k) - 1.0).abs() < 1e-6);
        assert!(k < 0.0);
    }
}
