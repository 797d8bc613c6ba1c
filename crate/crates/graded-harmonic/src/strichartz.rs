//! Strichartz difference functionals
//!
//!   S_s f(x)     = (∫₀^∞ [r^{−s−Q} ∫_{B(r)} |f(x·y) − f(x)| dy]² dr/r)^{1/2},
//!   S^{(2)}_s f(x) = the same with |Δ²_y f(x)|,
//!
//! and the exponent counterexamples on ℝ¹.
//!
//! The outer integral runs over dyadic octaves from r_min up to the radius at
//! which the ball around x covers the support of f. Past that radius the
//! inner integral is J + a·r^Q exactly, so the remainder is closed in closed
//! form. Below r_min the integrand follows the Taylor power law.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::QuadratureConfig;
use crate::field::{FieldError, SampledField};
use crate::fracops::{sobolev_norm, FracError};
use crate::group::{GroupSpec, QuasiNorm, QuasiSphere};
use crate::heat::HeatModel;
use crate::meanvalue::{Criterion, Sample, VerificationReport};
use crate::quad::{self, GaussLegendre, QuadError, Tolerance};
use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum StrichartzError {
    #[error("parameter out of range: {0}")]
    Parameter(String),
    #[error("field support reaches the grid edge; the functionals need a zero margin")]
    SupportOverflow,
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Frac(#[from] FracError),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}

/// First differences (S_s) or second differences (S^{(2)}_s).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DifferenceOrder {
    First,
    Second,
}

impl DifferenceOrder {
    pub fn name(self) -> &'static str {
        match self {
            DifferenceOrder::First => "first",
            DifferenceOrder::Second => "second",
        }
    }

    /// Exclusive upper end of the admissible s.
    pub fn s_cap(self) -> f64 {
        match self {
            DifferenceOrder::First => 1.0,
            DifferenceOrder::Second => 2.0,
        }
    }

    /// Taylor order of the difference at a generic point.
    fn taylor(self) -> f64 {
        self.s_cap()
    }
}

impl std::str::FromStr for DifferenceOrder {
    type Err = StrichartzError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "first" => Ok(DifferenceOrder::First),
            "second" => Ok(DifferenceOrder::Second),
            other => Err(StrichartzError::Parameter(format!(
                "unknown difference order `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct StrichartzParams<T> {
    pub order: DifferenceOrder,
    pub s: T,
    pub p: T,
    /// Inner cutoff; defaults to two grid spacings (in the homogeneous scale).
    pub r_min: Option<T>,
    /// Gauss–Legendre nodes per dyadic octave of the dr/r integral.
    pub sub_nodes: usize,
    /// Gauss–Legendre nodes between consecutive outer nodes for the
    /// cumulative ball integral.
    pub inner_nodes: usize,
    pub norm: QuasiNorm,
    pub angular_nodes: usize,
}

impl<T: Real> StrichartzParams<T> {
    pub fn new(order: DifferenceOrder, s: T, p: T) -> Result<Self, StrichartzError> {
        let prm = Self {
            order,
            s,
            p,
            r_min: None,
            sub_nodes: 8,
            inner_nodes: 4,
            norm: QuasiNorm::Smooth,
            angular_nodes: QuadratureConfig::default().angular_nodes,
        };
        prm.validate()?;
        Ok(prm)
    }

    pub fn validate(&self) -> Result<(), StrichartzError> {
        let cap = self.order.s_cap();
        if !(self.s > T::zero() && self.s.as_f64() < cap) {
            return Err(StrichartzError::Parameter(format!(
                "{} differences need 0 < s < {cap}, got {}",
                self.order.name(),
                self.s.as_f64()
            )));
        }
        if !(self.p >= T::one()) {
            return Err(StrichartzError::Parameter(format!(
                "p must be at least 1, got {}",
                self.p.as_f64()
            )));
        }
        if self.sub_nodes == 0 || self.inner_nodes == 0 {
            return Err(StrichartzError::Parameter("node counts must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrichartzValue<T> {
    pub value: T,
    /// ∫ F² dr/r below r_min (power-law closure).
    pub core: T,
    /// ∫ F² dr/r past the covering radius (closed form).
    pub tail: T,
}

/// Shared per-field data for repeated point evaluations.
struct Evaluator<'a, T: Real> {
    f: &'a SampledField<T>,
    g: &'a GroupSpec<T>,
    prm: &'a StrichartzParams<T>,
    sphere: QuasiSphere<T>,
    ball_unit: T,
    q: T,
    r_min: T,
    outer: GaussLegendre<T>,
    inner: GaussLegendre<T>,
    support: (Vec<T>, Vec<T>),
}

impl<'a, T: Real> Evaluator<'a, T> {
    fn new(f: &'a SampledField<T>, prm: &'a StrichartzParams<T>) -> Result<Self, StrichartzError> {
        prm.validate()?;
        if f.margin() < 2 {
            return Err(StrichartzError::SupportOverflow);
        }
        let g = f.group().as_ref();
        let sphere = QuasiSphere::new(g, prm.norm, prm.angular_nodes);
        let q = T::from_count(g.homogeneous_dim() as usize);
        let ball_unit = sphere.measure() / q;
        let h = f
            .grid()
            .axes()
            .iter()
            .zip(g.weights())
            .map(|(a, &w)| a.spacing.powf(T::one() / T::from_count(w as usize)))
            .fold(T::zero(), T::max);
        let r_min = prm.r_min.unwrap_or(h * T::lit(2.0));
        // cubic interpolation reads two nodes past the last nonzero value
        let support = match f.support_box() {
            Some((lo, hi)) => {
                let axes = f.grid().axes();
                let pad = T::lit(3.0);
                (
                    lo.iter()
                        .zip(axes)
                        .map(|(&i, a)| a.coord(i) - pad * a.spacing)
                        .collect(),
                    hi.iter()
                        .zip(axes)
                        .map(|(&i, a)| a.coord(i) + pad * a.spacing)
                        .collect(),
                )
            }
            None => (vec![T::zero(); g.dim()], vec![T::zero(); g.dim()]),
        };
        Ok(Self {
            f,
            g,
            prm,
            sphere,
            ball_unit,
            q,
            r_min,
            outer: GaussLegendre::new(prm.sub_nodes),
            inner: GaussLegendre::new(prm.inner_nodes),
            support,
        })
    }

    /// Radius beyond which x·B(r) ⊇ support, bounded through the support box
    /// corners coordinate by coordinate.
    fn cover_radius(&self, x: &[T]) -> T {
        let n = self.g.dim();
        let mut xi = vec![T::zero(); n];
        self.g.inv_into(x, &mut xi);
        let mut worst = vec![T::zero(); n];
        let mut corner = vec![T::zero(); n];
        let mut c = vec![T::zero(); n];
        for mask in 0..(1usize << n) {
            for k in 0..n {
                corner[k] = if mask >> k & 1 == 1 {
                    self.support.1[k]
                } else {
                    self.support.0[k]
                };
            }
            self.g.mul_into(&xi, &corner, &mut c);
            for k in 0..n {
                worst[k] = worst[k].max(c[k].abs());
            }
        }
        self.g.norm_of(&worst, self.prm.norm)
    }

    /// ∫_S |difference at D_ρω| dσ(ω).
    fn shell(&self, x: &[T], fx: T, rho: T, buf: &mut [T], yinv: &mut [T], y: &mut [T]) -> T {
        let two = T::lit(2.0);
        let mut acc = T::zero();
        for (omega, &w) in self.sphere.directions.iter().zip(&self.sphere.weights) {
            self.g.dilate_into(rho, omega, y);
            self.g.mul_into(x, y, buf);
            let plus = self.f.eval(buf);
            let d = match self.prm.order {
                DifferenceOrder::First => plus - fx,
                DifferenceOrder::Second => {
                    self.g.inv_into(y, yinv);
                    self.g.mul_into(x, yinv, buf);
                    plus + self.f.eval(buf) - two * fx
                }
            };
            acc += w * d.abs();
        }
        acc
    }

    fn at(&self, x: &[T]) -> StrichartzValue<T> {
        let n = self.g.dim();
        let (mut buf, mut yinv, mut y) = (vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n]);
        let fx = self.f.eval(x);
        let s = self.prm.s;
        let q = self.q;
        let ln2 = T::LN_2();
        let cover = self.cover_radius(x).max(self.r_min * T::lit(2.0));
        let octaves = (cover / self.r_min).log2().ceil().to_usize().unwrap_or(1).max(1);
        let r_top = self.r_min * T::lit(2.0).powi(octaves as i32);

        let mut radial = |a: T, b: T| -> T {
            self.inner
                .mapped(a, b)
                .map(|(rho, w)| w * rho.powf(q - T::one()) * self.shell(x, fx, rho, &mut buf, &mut yinv, &mut y))
                .sum::<T>()
        };
        let mut ball = radial(T::zero(), self.r_min);
        let mut prev = self.r_min;
        let integrand = |r: T, ball: T| {
            let v = ball * r.powf(-s - q);
            v * v
        };
        let f_min = integrand(self.r_min, ball);
        let mut body = T::zero();
        let mut first_two: Vec<(T, T)> = Vec::with_capacity(2);
        for k in 0..octaves {
            let lo = (self.r_min * T::lit(2.0).powi(k as i32)).ln();
            for (lr, w) in self.outer.mapped(lo, lo + ln2) {
                let r = lr.exp();
                ball += radial(prev, r);
                prev = r;
                let v = integrand(r, ball);
                if first_two.len() < 2 {
                    first_two.push((r, v));
                }
                body += w * v;
            }
        }
        ball += radial(prev, r_top);

        // Taylor law F² ~ r^{2k−2s}; a faster local decay (degenerate point) is
        // taken from the first two nodes
        let expected = T::lit(2.0 * self.prm.order.taylor()) - s - s;
        let exponent = match first_two.as_slice() {
            [(r0, v0), (r1, v1)] if *v0 > T::zero() && *v1 > T::zero() => {
                ((*v1 / *v0).ln() / (*r1 / *r0).ln()).max(expected).min(T::lit(20.0))
            }
            _ => expected,
        };
        let core = f_min / exponent;

        // past the cover radius: ∫_{B(r)} = J + a r^Q
        let a = match self.prm.order {
            DifferenceOrder::First => fx.abs() * self.ball_unit,
            DifferenceOrder::Second => T::lit(2.0) * fx.abs() * self.ball_unit,
        };
        let j = ball - a * r_top.powf(q);
        let tail = j * j * r_top.powf(-(s + s + q + q)) / (s + s + q + q)
            + T::lit(2.0) * j * a * r_top.powf(-(s + s + q)) / (s + s + q)
            + a * a * r_top.powf(-(s + s)) / (s + s);
        StrichartzValue {
            value: (body + core + tail).max(T::zero()).sqrt(),
            core,
            tail,
        }
    }
}

/// S_s f(x) or S^{(2)}_s f(x) at one chart point.
pub fn strichartz_at<T: Real>(
    f: &SampledField<T>,
    prm: &StrichartzParams<T>,
    x: &[T],
) -> Result<StrichartzValue<T>, StrichartzError> {
    let ev = Evaluator::new(f, prm)?;
    Ok(ev.at(x))
}

#[derive(Debug, Clone)]
pub struct StrichartzField<T> {
    pub field: SampledField<T>,
    /// Largest share of a point value carried by the two closures.
    pub max_closure_fraction: T,
}

/// The functional at every grid node.
pub fn strichartz_field<T: Real>(
    f: &SampledField<T>,
    prm: &StrichartzParams<T>,
) -> Result<StrichartzField<T>, StrichartzError> {
    let ev = Evaluator::new(f, prm)?;
    let grid = f.grid();
    let values: Vec<StrichartzValue<T>> = (0..grid.len())
        .into_par_iter()
        .map_init(
            || vec![T::zero(); grid.dim()],
            |x, i| {
                grid.coords_of(i, x);
                ev.at(x)
            },
        )
        .collect();
    let max_closure_fraction = values
        .iter()
        .filter(|v| v.value > T::zero())
        .map(|v| (v.core + v.tail) / (v.value * v.value))
        .fold(T::zero(), T::max);
    let field = f.with_values(values.iter().map(|v| v.value).collect(), 0)?;
    Ok(StrichartzField {
        field,
        max_closure_fraction,
    })
}

/// Ratios (‖f‖_p + ‖S f‖_p)/‖f‖_{L^p_s} over a family; passes when
/// max/min < `spread_bound`. Zero fields are skipped.
pub fn equivalence_report<T: Real>(
    m: &HeatModel<T>,
    family: &[(String, SampledField<T>)],
    prm: &StrichartzParams<T>,
    spread_bound: T,
) -> VerificationReport<T> {
    let name = format!(
        "strichartz_{}_s{}_p{}",
        prm.order.name(),
        prm.s.as_f64(),
        prm.p.as_f64()
    );
    let mut notes = Vec::new();
    let rows: Vec<Result<Option<Sample<T>>, String>> = family
        .par_iter()
        .map(|(label, f)| {
            let fp = f.lp_norm(prm.p).map_err(|e| e.to_string())?;
            if fp == T::zero() {
                return Ok(None);
            }
            let sf = strichartz_field(f, prm).map_err(|e| e.to_string())?;
            let lhs = fp + sf.field.lp_norm(prm.p).map_err(|e| e.to_string())?;
            let rhs = sobolev_norm(m, f, prm.s, prm.p, m.cfg()).map_err(|e| e.to_string())?;
            Ok(Some(Sample {
                label: label.clone(),
                ratio: lhs / rhs,
            }))
        })
        .collect();
    let mut samples = Vec::new();
    for (row, (label, _)) in rows.into_iter().zip(family) {
        match row {
            Ok(Some(s)) => samples.push(s),
            Ok(None) => notes.push(format!("{label}: zero field skipped")),
            Err(e) => notes.push(format!("{label}: {e}")),
        }
    }
    VerificationReport::new(
        &name,
        &format!("{} fields", family.len()),
        samples,
        Criterion::SpreadBelow(spread_bound),
        notes,
    )
}

/// Window equal to 1 on [−1, 1], a C¹ cubic ramp on 1 < |x| < 2, 0 beyond.
pub fn plateau_window<T: Real>(x: T) -> T {
    let a = x.abs();
    if a <= T::one() {
        T::one()
    } else if a < T::lit(2.0) {
        let t = a - T::one();
        T::one() - T::lit(3.0) * t * t + T::lit(2.0) * t * t * t
    } else {
        T::zero()
    }
}

/// Least-squares slope of log S(ε) against log ε, where S(ε) is the
/// functional of f₁ = x·φ (first) or f₂ = x²·φ (second) at x₀ = 1/2 with the
/// radial integral cut below at ε. For r ≤ 1/2 the ball stays on the plateau
/// and the inner integrals are r² and 4r³/3; the rest is by adaptive
/// quadrature and does not depend on ε.
pub fn counterexample_exponent<T: Real>(order: DifferenceOrder, s: T, eps: &[T]) -> Result<T, StrichartzError> {
    let cap = T::lit(order.s_cap());
    if !(s > cap) {
        return Err(StrichartzError::Parameter(format!(
            "the {} functional converges for s ≤ {}; no divergence to detect",
            order.name(),
            cap.as_f64()
        )));
    }
    if eps.len() < 2 || eps.windows(2).any(|w| !(w[1] < w[0])) || eps.iter().any(|e| !(*e > T::zero())) {
        return Err(StrichartzError::Parameter(
            "ε list must be positive and strictly decreasing".into(),
        ));
    }
    let half = T::lit(0.5);
    if eps[0] > half {
        return Err(StrichartzError::Parameter("ε must stay below 1/2".into()));
    }
    let x0 = half;
    let f = |x: T| match order {
        DifferenceOrder::First => x * plateau_window(x),
        DifferenceOrder::Second => x * x * plateau_window(x),
    };
    let fx = f(x0);
    let two = T::lit(2.0);
    let diff = |y: T| match order {
        DifferenceOrder::First => (f(x0 + y) - fx).abs() + (f(x0 - y) - fx).abs(),
        DifferenceOrder::Second => two * (f(x0 + y) + f(x0 - y) - two * fx).abs(),
    };
    let tol = Tolerance::new(T::lit(1e-14), T::lit(1e-11));
    // breakpoints of the window seen from x₀
    let breaks = [half, T::lit(1.5), T::lit(2.5)];
    let inner = |r: T| -> Result<T, QuadError> {
        let mut acc = match order {
            DifferenceOrder::First => half * half,
            DifferenceOrder::Second => T::lit(4.0 / 3.0) * half * half * half,
        };
        let mut lo = half;
        for &b in breaks.iter().skip(1).chain(std::iter::once(&r)) {
            let hi = b.min(r);
            if hi > lo {
                // Δ²: ∫_{−r}^{r} = 2∫_0^r; first: both signs of y folded in
                acc += quad::integrate(&diff, lo, hi, tol)?.value;
                lo = hi;
            }
        }
        Ok(acc)
    };
    let q = T::one();
    let cover = T::lit(2.5);
    let mut failure = None;
    let outer = quad::integrate(
        |r: T| match inner(r) {
            Ok(b) => {
                let v = b * r.powf(-s - q);
                v * v / r
            }
            Err(e) => {
                failure.get_or_insert(e);
                T::zero()
            }
        },
        half,
        cover,
        tol,
    )?
    .value;
    if let Some(e) = failure {
        return Err(e.into());
    }
    let a = match order {
        DifferenceOrder::First => two * fx.abs(),
        DifferenceOrder::Second => T::lit(4.0) * fx.abs(),
    };
    let j = inner(cover)? - a * cover;
    let tail = j * j * cover.powf(-(s + s + q + q)) / (s + s + q + q)
        + two * j * a * cover.powf(-(s + s + q)) / (s + s + q)
        + a * a * cover.powf(-(s + s)) / (s + s);
    // ∫_ε^{1/2} c² r^{2k−2s} dr/r with c = 1 or 4/3, k = 1 or 2
    let (c, k) = match order {
        DifferenceOrder::First => (T::one(), T::one()),
        DifferenceOrder::Second => (T::lit(4.0 / 3.0), two),
    };
    let e = two * k - s - s;
    let points: Vec<(T, T)> = eps
        .iter()
        .map(|&ep| {
            let near = c * c * (half.powf(e) - ep.powf(e)) / e;
            (ep.ln(), (near + outer + tail).sqrt().ln())
        })
        .collect();
    Ok(slope(&points))
}

fn slope<T: Real>(points: &[(T, T)]) -> T {
    let n = T::from_count(points.len());
    let mx = points.iter().map(|p| p.0).sum::<T>() / n;
    let my = points.iter().map(|p| p.1).sum::<T>() / n;
    let sxy: T = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: T = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid;
    use crate::group::GroupSpec;
    use std::sync::Arc;

    fn line(spacing: f64, count: usize, f: impl Fn(f64) -> f64 + Sync) -> SampledField<f64> {
        let g = Arc::new(GroupSpec::euclidean(1));
        SampledField::from_fn_truncated(g, Grid::cube(1, spacing, count).unwrap(), 4, |x: &[f64]| f(x[0])).unwrap()
    }

    fn bump(x: f64) -> f64 {
        (-2.0 * x * x).exp() * (1.0 + 0.4 * x)
    }

    /// Dense midpoint double integral of the same functional.
    fn brute(f: impl Fn(f64) -> f64, x: f64, s: f64, order: DifferenceOrder) -> f64 {
        let fx = f(x);
        let d = |y: f64| match order {
            DifferenceOrder::First => (f(x + y) - fx).abs() + (f(x - y) - fx).abs(),
            DifferenceOrder::Second => 2.0 * (f(x + y) + f(x - y) - 2.0 * fx).abs(),
        };
        // log-spaced r up to 1e3; inner midpoint in y over [0, r]
        let (lo, hi, n) = (1e-5f64.ln(), 1e3f64.ln(), 4000);
        let dl = (hi - lo) / n as f64;
        let mut total = 0.0;
        let mut ball = 0.0;
        let mut prev = 0.0;
        for i in 0..n {
            let r = (lo + (i as f64 + 0.5) * dl).exp();
            let m = 200;
            let dy = (r - prev) / m as f64;
            ball += (0..m).map(|k| d(prev + (k as f64 + 0.5) * dy)).sum::<f64>() * dy;
            prev = r;
            let v = ball * r.powf(-s - 1.0);
            total += v * v * dl;
        }
        total.sqrt()
    }

    #[test]
    fn matches_brute_force_on_the_line() {
        let f = line(0.01, 4096, bump);
        for order in [DifferenceOrder::First, DifferenceOrder::Second] {
            let prm = StrichartzParams::new(order, 0.5, 2.0).unwrap();
            for x in [0.0, 0.37, 2.5] {
                let got = strichartz_at(&f, &prm, &[x]).unwrap().value;
                let want = brute(bump, x, 0.5, order);
                assert!((got / want - 1.0).abs() < 1e-2, "{order:?} at {x}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn dilation_scaling() {
        // f_λ(x) = f(λx): S f_λ(x) = λ^s S f(λx)
        let lambda = 2.0;
        let f = line(0.01, 4096, bump);
        let fl = line(0.01, 4096, |x| bump(lambda * x));
        let prm = StrichartzParams::new(DifferenceOrder::Second, 0.75, 2.0).unwrap();
        let a = strichartz_at(&fl, &prm, &[0.2]).unwrap().value;
        let b = strichartz_at(&f, &prm, &[0.4]).unwrap().value;
        assert!((a / (lambda.powf(0.75) * b) - 1.0).abs() < 2e-2, "{a} {b}");
    }

    #[test]
    fn affine_plateau_has_no_small_scale_mass() {
        let f = line(0.01, 4096, |x| (1.0 + 0.5 * x) * plateau_window(x / 2.0));
        let prm = StrichartzParams::new(DifferenceOrder::Second, 1.5, 2.0).unwrap();
        let v = strichartz_at(&f, &prm, &[0.0]).unwrap();
        assert!(v.core < 1e-12, "{}", v.core);
        // reflection symmetry of Δ²
        let fr = line(0.01, 4096, |x| (1.0 - 0.5 * x) * plateau_window(x / 2.0));
        let a = strichartz_at(&f, &prm, &[0.3]).unwrap().value;
        let b = strichartz_at(&fr, &prm, &[-0.3]).unwrap().value;
        assert!((a - b).abs() < 1e-9 * a, "{a} {b}");
    }

    #[test]
    fn range_checks() {
        assert!(StrichartzParams::new(DifferenceOrder::First, 1.0, 2.0).is_err());
        assert!(StrichartzParams::new(DifferenceOrder::Second, 1.5, 2.0).is_ok());
        assert!(counterexample_exponent(DifferenceOrder::First, 0.5, &[0.1, 0.01]).is_err());
        assert!(counterexample_exponent(DifferenceOrder::First, 1.5, &[0.01, 0.1]).is_err());
    }

    #[test]
    fn counterexample_slopes() {
        let eps: Vec<f64> = (8..=20).map(|k| 2f64.powi(-k)).collect();
        let a = counterexample_exponent(DifferenceOrder::First, 1.5, &eps).unwrap();
        let b = counterexample_exponent(DifferenceOrder::Second, 2.5, &eps).unwrap();
        assert!((a + 0.5).abs() < 0.05, "{a}");
        assert!((b + 0.5).abs() < 0.05, "{b}");
    }

    #[test]
    fn zero_field_is_zero() {
        let f = line(0.01, 512, |_| 0.0);
        let prm = StrichartzParams::new(DifferenceOrder::First, 0.5, 2.0).unwrap();
        assert_eq!(strichartz_at(&f, &prm, &[0.0]).unwrap().value, 0.0);
    }
}
