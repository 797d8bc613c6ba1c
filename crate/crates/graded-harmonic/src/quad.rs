//! One-dimensional quadrature: Gauss–Legendre rules, adaptive
//! Gauss–Kronrod (7/15) with interval bisection, and geometric panel rules
//! for integrals over many decades.

use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error(
        "adaptive quadrature did not converge: value {value:e}, error estimate {error:e} after {intervals} intervals"
    )]
    NonConvergence { value: f64, error: f64, intervals: usize },
    #[error("integrand is not finite at {at:e}")]
    NonFinite { at: f64 },
    #[error("invalid interval [{a:e}, {b:e}]")]
    BadInterval { a: f64, b: f64 },
}

/// Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    /// Rule with `n ≥ 1` nodes (Newton iteration on the Legendre recurrence).
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss–Legendre rule needs at least one node");
        let mut nodes = vec![0.0f64; n];
        let mut weights = vec![0.0f64; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self {
            nodes: nodes.into_iter().map(T::lit).collect(),
            weights: weights.into_iter().map(T::lit).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to [a, b].
    pub fn mapped(&self, a: T, b: T) -> impl Iterator<Item = (T, T)> + '_ {
        let half = (b - a) * T::lit(0.5);
        let mid = (a + b) * T::lit(0.5);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> T {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Absolute/relative targets for adaptive quadrature.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance<T> {
    pub abs: T,
    pub rel: T,
    pub max_intervals: usize,
}

impl<T: Real> Tolerance<T> {
    pub fn new(abs: T, rel: T) -> Self {
        Self {
            abs,
            rel,
            max_intervals: 2000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Estimate<T> {
    pub value: T,
    pub error: T,
    pub intervals: usize,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod<T: Real, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> Result<(T, T), QuadError> {
    let half = (b - a) * T::lit(0.5);
    let mid = (a + b) * T::lit(0.5);
    let fc = f(mid);
    if !fc.is_finite() {
        return Err(QuadError::NonFinite { at: mid.as_f64() });
    }
    let mut k = fc * T::lit(WGK[7]);
    let mut g = fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = half * T::lit(XGK[j]);
        let (x1, x2) = (mid - dx, mid + dx);
        let (f1, f2) = (f(x1), f(x2));
        if !f1.is_finite() {
            return Err(QuadError::NonFinite { at: x1.as_f64() });
        }
        if !f2.is_finite() {
            return Err(QuadError::NonFinite { at: x2.as_f64() });
        }
        k += T::lit(WGK[j]) * (f1 + f2);
        if j % 2 == 1 {
            g += T::lit(WG[j / 2]) * (f1 + f2);
        }
    }
    let value = k * half;
    let error = ((k - g) * half).abs();
    Ok((value, error))
}

/// Adaptive Gauss–Kronrod integral of `f` over the finite interval [a, b].
///
/// Endpoint singularities are tolerated as long as `f` is finite at the
/// interior Kronrod nodes; the worst interval is bisected until the summed
/// error estimate meets `tol`.
pub fn integrate<T: Real, F: FnMut(T) -> T>(mut f: F, a: T, b: T, tol: Tolerance<T>) -> Result<Estimate<T>, QuadError> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(QuadError::BadInterval {
            a: a.as_f64(),
            b: b.as_f64(),
        });
    }
    if a == b {
        return Ok(Estimate {
            value: T::zero(),
            error: T::zero(),
            intervals: 0,
        });
    }
    let (v0, e0) = kronrod(&mut f, a, b)?;
    let mut parts = vec![(a, b, v0, e0)];
    let mut total = v0;
    let mut err = e0;
    loop {
        let target = tol.abs.max(tol.rel * total.abs());
        if err <= target {
            break;
        }
        if parts.len() >= tol.max_intervals {
            return Err(QuadError::NonConvergence {
                value: total.as_f64(),
                error: err.as_f64(),
                intervals: parts.len(),
            });
        }
        let (worst, _) =
            parts.iter().enumerate().fold(
                (0, T::neg_infinity()),
                |acc, (i, p)| {
                    if p.3 > acc.1 {
                        (i, p.3)
                    } else {
                        acc
                    }
                },
            );
        let (lo, hi, v, e) = parts.swap_remove(worst);
        let m = (lo + hi) * T::lit(0.5);
        if m <= lo || m >= hi {
            // interval cannot be split further in floating point
            parts.push((lo, hi, v, T::zero()));
            err = parts.iter().map(|p| p.3).sum();
            continue;
        }
        let (v1, e1) = kronrod(&mut f, lo, m)?;
        let (v2, e2) = kronrod(&mut f, m, hi)?;
        parts.push((lo, m, v1, e1));
        parts.push((m, hi, v2, e2));
        total = total - v + v1 + v2;
        err = err - e + e1 + e2;
        if err < T::zero() {
            err = parts.iter().map(|p| p.3).sum();
        }
    }
    // re-sum to avoid drift from incremental updates
    let value = parts.iter().map(|p| p.2).sum();
    Ok(Estimate {
        value,
        error: err,
        intervals: parts.len(),
    })
}

/// Adaptive integral of `f` over [a, ∞) via x = a + s/(1−s).
pub fn integrate_to_infinity<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    a: T,
    tol: Tolerance<T>,
) -> Result<Estimate<T>, QuadError> {
    let one = T::one();
    integrate(
        |s: T| {
            let d = one - s;
            if d <= T::zero() {
                return T::zero();
            }
            let x = a + s / d;
            let v = f(x) / (d * d);
            if v.is_finite() {
                v
            } else {
                T::zero()
            }
        },
        T::zero(),
        one,
        tol,
    )
}

/// Composite Gauss–Legendre rule in log-space: nodes `t_i` and weights `w_i`
/// with Σ w_i g(t_i) ≈ ∫_a^b g(t) dt/t, using `panels_per_decade` panels of
/// `rule.len()` nodes.
pub fn log_panels<T: Real>(rule: &GaussLegendre<T>, a: T, b: T, panels_per_decade: usize) -> Vec<(T, T)> {
    assert!(a > T::zero() && b > a);
    let (la, lb) = (a.ln(), b.ln());
    let decades = (lb - la) / T::LN_10();
    let panels = (decades * T::from_count(panels_per_decade))
        .ceil()
        .max(T::one())
        .to_usize()
        .unwrap_or(1);
    let width = (lb - la) / T::from_count(panels);
    let mut out = Vec::with_capacity(panels * rule.len());
    for p in 0..panels {
        let lo = la + width * T::from_count(p);
        for (s, w) in rule.mapped(lo, lo + width) {
            out.push((s.exp(), w));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_integrates_polynomials_exactly() {
        let rule = GaussLegendre::<f64>::new(6);
        // degree 11 is the exactness limit
        let v = rule.integrate(0.0, 2.0, |x| x.powi(11));
        assert!((v - 2f64.powi(12) / 12.0).abs() < 1e-10);
        let w: f64 = rule.weights.iter().sum();
        assert!((w - 2.0).abs() < 1e-14);
    }

    #[test]
    fn legendre_rule_f32() {
        let rule = GaussLegendre::<f32>::new(8);
        let v = rule.integrate(0.0, 1.0, |x| x * x);
        assert!((v - 1.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        // ∫_0^1 x^{-1/2} dx = 2
        let est = integrate(|x: f64| x.powf(-0.5), 0.0, 1.0, Tolerance::new(1e-12, 1e-12)).unwrap();
        assert!((est.value - 2.0).abs() < 1e-9, "{}", est.value);
    }

    #[test]
    fn adaptive_semi_infinite() {
        let est = integrate_to_infinity(|x: f64| (-x).exp(), 0.0, Tolerance::new(1e-14, 1e-13)).unwrap();
        assert!((est.value - 1.0).abs() < 1e-12);
        let est = integrate_to_infinity(|x: f64| 1.0 / (1.0 + x * x), 0.0, Tolerance::new(1e-14, 1e-13)).unwrap();
        assert!((est.value - std::f64::consts::FRAC_PI_2).abs() < 1e-11);
    }

    #[test]
    fn adaptive_reports_non_convergence() {
        let tol = Tolerance {
            abs: 1e-15,
            rel: 1e-15,
            max_intervals: 4,
        };
        let r = integrate(|x: f64| (1.0 / x).sin(), 1e-6, 1.0, tol);
        assert!(matches!(r, Err(QuadError::NonConvergence { .. })));
    }

    #[test]
    fn log_panels_integrate_power() {
        let rule = GaussLegendre::<f64>::new(8);
        let nodes = log_panels(&rule, 1e-3, 1e3, 2);
        // ∫ t^{1/2} dt/t over [1e-3, 1e3] = 2(1e1.5 - 1e-1.5)
        let v: f64 = nodes.iter().map(|&(t, w)| w * t.sqrt()).sum();
        let exact = 2.0 * (1e3f64.sqrt() - 1e-3f64.sqrt());
        assert!((v - exact).abs() < 1e-10 * exact);
    }
}
