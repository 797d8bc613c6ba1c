//! Closed form of φ_α = ℛ^α h_1 for ℛ = −Δ on ℝⁿ, as a function of r = |x|.

use super::gamma::gamma;
use super::kummer::kummer_reg;
use super::SpecFunError;
use crate::scalar::Real;

/// φ_α(x) for |x| = r on ℝⁿ:
///
/// (4π)^{−n/2} [ (n/2)Γ(α+n/2) φ(α+n/2, n/2+1; −r²/4)
///              − Γ(α+1+n/2)(r²/4) φ(α+n/2+1, n/2+2; −r²/4) ].
pub fn phi_alpha_euclidean<T: Real>(n: usize, alpha: T, r: T) -> Result<T, SpecFunError> {
    if n == 0 {
        return Err(SpecFunError::Domain("dimension must be positive".into()));
    }
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(SpecFunError::Domain(format!("φ_α needs 0 < α < 1, got {alpha}")));
    }
    if !(r >= T::zero() && r.is_finite()) {
        return Err(SpecFunError::Domain(format!("φ_α needs r ≥ 0, got {r}")));
    }
    let half_n = T::from_count(n) * T::lit(0.5);
    let x = r * r * T::lit(0.25);
    let first = half_n * gamma(alpha + half_n) * kummer_reg(alpha + half_n, half_n + T::one(), -x)?;
    let second = if x > T::zero() {
        gamma(alpha + T::one() + half_n) * x * kummer_reg(alpha + half_n + T::one(), half_n + T::lit(2.0), -x)?
    } else {
        T::zero()
    };
    let norm = (T::lit(4.0) * T::PI()).powf(-half_n);
    Ok(norm * (first - second))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate, integrate_to_infinity, Tolerance};

    /// −(1/Γ(1−α)) ∫_1^∞ ∂_t h_t(r) (t−1)^{−α} dt on ℝ¹, written out directly.
    fn time_route(alpha: f64, r: f64) -> f64 {
        let dh = |t: f64| {
            let h = (4.0 * std::f64::consts::PI * t).powf(-0.5) * (-r * r / (4.0 * t)).exp();
            h * (r * r / (4.0 * t * t) - 0.5 / t)
        };
        let tol = Tolerance::new(1e-300, 1e-13);
        let e = 1.0 / (1.0 - alpha);
        let near = integrate(|w: f64| dh(1.0 + w.powf(e)) * e, 0.0, 1.0, tol)
            .unwrap()
            .value;
        let far = integrate_to_infinity(|t: f64| dh(t) * (t - 1.0).powf(-alpha), 2.0, tol)
            .unwrap()
            .value;
        -(near + far) / gamma(1.0 - alpha)
    }

    #[test]
    fn matches_time_derivative_route() {
        for r in [0.0, 0.5, 1.0, 2.0, 3.7, 6.0, 10.0] {
            let k = phi_alpha_euclidean(1, 0.5, r).unwrap();
            let q = time_route(0.5, r);
            assert!((k - q).abs() < 1e-9, "r={r}: {k} vs {q}");
        }
    }

    #[test]
    fn value_at_origin() {
        // n = 1, α = 1/2: (4π)^{−1/2} (1/2) Γ(1) / Γ(3/2)
        let v = phi_alpha_euclidean(1, 0.5, 0.0).unwrap();
        let exact = (4.0 * std::f64::consts::PI).powf(-0.5) * 0.5 / gamma(1.5);
        assert!((v - exact).abs() < 1e-15);
    }

    #[test]
    fn decay_profile() {
        for n in [1usize, 2, 3] {
            let mut worst: f64 = 0.0;
            for i in 0..=100 {
                let r = 0.5 * i as f64;
                let v = phi_alpha_euclidean(n, 0.3, r).unwrap();
                worst = worst.max(v.abs() * (1.0 + r).powf(n as f64 + 0.6));
            }
            assert!(worst.is_finite() && worst < 10.0, "n={n}: {worst}");
        }
    }

    #[test]
    fn rejects_bad_order() {
        assert!(phi_alpha_euclidean(1, 1.5, 1.0f64).is_err());
        assert!(phi_alpha_euclidean(0, 0.5, 1.0f64).is_err());
    }
}
