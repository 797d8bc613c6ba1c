//! Regularized confluent hypergeometric function
//! φ(a, b; z) = Σ_k (a)_k / Γ(b+k) · z^k / k!  (= ₁F₁(a; b; z)/Γ(b)) for z ≤ 0.
//!
//! Branches:
//! - |z| ≤ 2: the defining power series;
//! - 2 < −z ≤ 60: Kummer's transformation e^z φ(b−a, b; −z), whose series has
//!   terms of one sign when b > a (no cancellation);
//! - −z > 60: the algebraic asymptotic series in (−z)^{-1}, dropping the
//!   e^{z} part (below double precision there).

use super::gamma::rgamma;
use super::SpecFunError;
use crate::scalar::Real;

/// Switch from the plain series to Kummer's transformation.
pub const SERIES_LIMIT: f64 = 2.0;
/// Switch from Kummer's transformation to the asymptotic expansion.
pub const ASYMPTOTIC_LIMIT: f64 = 60.0;
const MAX_TERMS: usize = 4000;

fn is_nonpositive_integer<T: Real>(x: T) -> bool {
    x <= T::zero() && x == x.floor()
}

/// Σ_k (a)_k x^k / (k! Γ(b+k)), stopping once terms are negligible, then
/// continuing for `extra` further terms.
pub(crate) fn power_series<T: Real>(a: T, b: T, x: T, extra: usize) -> T {
    let eps = T::epsilon();
    // terms below k0 vanish when b is a non-positive integer
    let k0 = if is_nonpositive_integer(b) {
        (-b).to_usize().unwrap_or(0) + 1
    } else {
        0
    };
    let mut pk = T::one();
    for k in 0..k0 {
        let kf = T::from_count(k);
        pk = pk * (a + kf) * x / (kf + T::one());
    }
    let mut term = pk * rgamma(b + T::from_count(k0));
    let mut sum = T::zero();
    let mut small = 0usize;
    let mut tail_left: Option<usize> = None;
    let mut k = k0;
    loop {
        let kf = T::from_count(k);
        sum += term;
        if let Some(left) = tail_left.as_mut() {
            if *left == 0 {
                break;
            }
            *left -= 1;
        } else {
            if term.abs() <= eps * sum.abs() && kf > x.abs() {
                small += 1;
            } else {
                small = 0;
            }
            if small >= 3 || term == T::zero() {
                tail_left = Some(extra);
                if extra == 0 {
                    break;
                }
            }
        }
        if k >= MAX_TERMS {
            break;
        }
        term = term * (a + kf) * x / ((kf + T::one()) * (b + kf));
        k += 1;
    }
    sum
}

fn asymptotic<T: Real>(a: T, b: T, x: T) -> T {
    // φ(a, b; −x) ~ x^{-a}/Γ(b−a) Σ_s (a)_s (a−b+1)_s / s! x^{-s}
    let eps = T::epsilon();
    let mut term = T::one();
    let mut sum = T::one();
    let c = a - b + T::one();
    for s in 0..200 {
        let sf = T::from_count(s);
        let next = term * (a + sf) * (c + sf) / ((sf + T::one()) * x);
        if next.abs() >= term.abs() && s > 0 {
            break;
        }
        term = next;
        sum += term;
        if term.abs() <= eps * sum.abs() {
            break;
        }
    }
    x.powf(-a) * rgamma(b - a) * sum
}

/// Regularized Kummer function φ(a, b; z) for z ≤ 0.
pub fn kummer_reg<T: Real>(a: T, b: T, z: T) -> Result<T, SpecFunError> {
    if !(a.is_finite() && b.is_finite() && z.is_finite()) {
        return Err(SpecFunError::Domain(format!(
            "kummer_reg arguments must be finite (a = {a}, b = {b}, z = {z})"
        )));
    }
    if z > T::zero() {
        return Err(SpecFunError::Domain(format!(
            "kummer_reg implemented for z ≤ 0, got z = {z}"
        )));
    }
    let x = -z;
    let value = if x <= T::lit(SERIES_LIMIT) {
        power_series(a, b, z, 0)
    } else if x <= T::lit(ASYMPTOTIC_LIMIT) || is_nonpositive_integer(b - a) {
        z.exp() * power_series(b - a, b, x, 0)
    } else {
        asymptotic(a, b, x)
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(SpecFunError::Overflow(format!(
            "kummer_reg({a}, {b}, {z}) is not representable"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate, Tolerance};
    use crate::specfun::gamma::{gamma, rgamma};

    /// Euler integral Γ(b)/(Γ(a)Γ(b−a)) ∫_0^1 e^{zu} u^{a−1}(1−u)^{b−a−1} du,
    /// divided by Γ(b); valid for b > a > 0.
    fn euler_oracle(a: f64, b: f64, z: f64) -> f64 {
        let tol = Tolerance::new(1e-300, 1e-14);
        // power substitutions remove both endpoint singularities
        let (p, q) = (1.0 / a, 1.0 / (b - a));
        let lower = integrate(
            |w: f64| {
                let u = w.powf(p);
                (z * u).exp() * (1.0 - u).powf(b - a - 1.0) * p
            },
            0.0,
            0.5f64.powf(a),
            tol,
        )
        .unwrap()
        .value;
        let upper = integrate(
            |w: f64| {
                let u = 1.0 - w.powf(q);
                (z * u).exp() * u.powf(a - 1.0) * q
            },
            0.0,
            0.5f64.powf(b - a),
            tol,
        )
        .unwrap()
        .value;
        (lower + upper) / (gamma(a) * gamma(b - a))
    }

    #[test]
    fn constant_term() {
        for (a, b) in [(0.3, 1.7), (2.5, 0.4), (-1.2, 3.3), (1.0, 1.0)] {
            let v = kummer_reg(a, b, 0.0f64).unwrap();
            assert!((v - rgamma(b)).abs() < 1e-15 * rgamma(b).abs().max(1.0));
        }
    }

    #[test]
    fn exponential_case() {
        for z in [-0.5f64, -1.9, -2.1, -10.0, -29.0, -59.0, -61.0, -150.0] {
            let v = kummer_reg(1.0, 1.0, z).unwrap();
            assert!(((v - z.exp()) / z.exp()).abs() < 1e-12, "z = {z}");
        }
    }

    #[test]
    fn agrees_with_euler_integral_across_branches() {
        let params = [(0.75, 1.5), (1.0, 1.5), (2.0, 2.5), (1.25, 2.0), (0.6, 3.1)];
        for (a, b) in params {
            for z in [-0.3, -1.5, -2.5, -8.0, -25.0, -55.0, -65.0, -200.0] {
                let v = kummer_reg(a, b, z).unwrap();
                let o = euler_oracle(a, b, z);
                assert!(((v - o) / o).abs() < 1e-11, "a={a} b={b} z={z}: {v} vs {o}");
            }
        }
    }

    #[test]
    fn terminating_cases() {
        // a = −2: φ(−2, b; z)Γ(b) = 1 − 2z/b + z²/(b(b+1))
        let b = 1.5f64;
        for z in [-0.5, -3.0, -80.0] {
            let exact = (1.0 - 2.0 * z / b + z * z / (b * (b + 1.0))) * rgamma(b);
            let v = kummer_reg(-2.0, b, z).unwrap();
            assert!(((v - exact) / exact).abs() < 1e-12, "z = {z}");
        }
    }

    #[test]
    fn doubling_terms_is_harmless() {
        for (a, b, x) in [(0.75f64, 1.5, 1.7), (1.5, 2.5, 30.0), (0.2, 4.0, 59.0)] {
            let v1 = power_series(a, b, x, 0);
            let n = (x.abs() as usize + 40).max(40);
            let v2 = power_series(a, b, x, n);
            assert!(((v1 - v2) / v1).abs() < 1e-14, "{a} {b} {x}: {v1} vs {v2}");
        }
    }

    #[test]
    fn rejects_positive_argument() {
        assert!(matches!(kummer_reg(1.0, 1.0, 0.5f64), Err(SpecFunError::Domain(_))));
    }
}
