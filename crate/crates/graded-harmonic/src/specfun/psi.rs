//! The two-parameter family ψ_{α,β,ν,c}(r) of improper integrals
//!
//!   ψ(r) = ∫_1^∞ t^{−β} exp(−c r^{ν/(ν−1)} t^{−1/(ν−1)}) (t−1)^{−α} dt
//!        = ∫_0^1 u^{α+β−2} exp(−c r^{ν/(ν−1)} u^{1/(ν−1)}) (1−u)^{−α} du,
//!
//! evaluated from the second form, with the first form and (for ν = 2) the
//! Kummer closed form available as independent routes.

use super::gamma::gamma;
use super::kummer::kummer_reg;
use super::SpecFunError;
use crate::quad::{integrate, Tolerance};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiParams<T> {
    pub alpha: T,
    pub beta: T,
    pub nu: T,
    pub c: T,
}

impl<T: Real> PsiParams<T> {
    pub fn new(alpha: T, beta: T, nu: T, c: T) -> Result<Self, SpecFunError> {
        let p = Self { alpha, beta, nu, c };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), SpecFunError> {
        let ok = self.alpha > T::zero()
            && self.alpha < T::one()
            && self.excess() > T::zero()
            && self.nu >= T::lit(2.0)
            && self.c > T::zero();
        if ok {
            Ok(())
        } else {
            Err(SpecFunError::Domain(format!(
                "psi needs 0 < α < 1, α+β−1 > 0, ν ≥ 2, c > 0 (got α={}, β={}, ν={}, c={})",
                self.alpha, self.beta, self.nu, self.c
            )))
        }
    }

    /// α + β − 1, the decay exponent divided by ν.
    pub fn excess(&self) -> T {
        self.alpha + self.beta - T::one()
    }

    /// c·r^{ν/(ν−1)}.
    fn scale(&self, r: T) -> T {
        self.c * r.powf(self.nu / (self.nu - T::one()))
    }
}

fn tolerance<T: Real>() -> Tolerance<T> {
    let rel = if T::epsilon() < T::lit(1e-10) { 1e-13 } else { 1e-6 };
    Tolerance {
        abs: T::min_positive_value(),
        rel: T::lit(rel),
        max_intervals: 4000,
    }
}

fn check_r<T: Real>(r: T) -> Result<(), SpecFunError> {
    if r >= T::zero() && r.is_finite() {
        Ok(())
    } else {
        Err(SpecFunError::Domain(format!("psi needs r ≥ 0, got {r}")))
    }
}

/// ψ_{α,β,ν,c}(r) from the unit-interval form, split at u = 1/2.
pub fn psi<T: Real>(p: &PsiParams<T>, r: T) -> Result<T, SpecFunError> {
    p.validate()?;
    check_r(r)?;
    let one = T::one();
    let half = T::lit(0.5);
    let g = p.excess();
    let a = p.alpha;
    let big_c = p.scale(r);
    let q = one / (p.nu - one);
    let tol = tolerance::<T>();

    // lower half: u = w^{1/g} absorbs u^{g−1}
    let w_max = half.powf(g);
    let lower_f = |w: T| {
        let u = w.powf(one / g);
        (-big_c * u.powf(q)).exp() * (one - u).powf(-a) / g
    };
    // break points where the exponent crosses 1, 10, 40
    let mut cuts = vec![T::zero()];
    for level in [1.0, 10.0, 40.0] {
        if big_c > T::zero() {
            let u = (T::lit(level) / big_c).powf(p.nu - one);
            let w = u.powf(g);
            if w > *cuts.last().unwrap() && w < w_max {
                cuts.push(w);
            }
        }
    }
    cuts.push(w_max);
    let mut lower = T::zero();
    for win in cuts.windows(2) {
        lower += integrate(lower_f, win[0], win[1], tol)?.value;
    }

    // upper half: 1 − u = w^{1/(1−α)} absorbs (1−u)^{−α}
    let e = one / (one - a);
    let upper = integrate(
        |w: T| {
            let u = one - w.powf(e);
            u.powf(g - one) * (-big_c * u.powf(q)).exp() * e
        },
        T::zero(),
        half.powf(one - a),
        tol,
    )?
    .value;
    Ok(lower + upper)
}

/// ψ_{α,β,ν,c}(r) from the half-line form (independent route).
pub fn psi_half_line<T: Real>(p: &PsiParams<T>, r: T) -> Result<T, SpecFunError> {
    p.validate()?;
    check_r(r)?;
    let one = T::one();
    let two = T::lit(2.0);
    let g = p.excess();
    let a = p.alpha;
    let big_c = p.scale(r);
    let q = one / (p.nu - one);
    let tol = tolerance::<T>();
    let integrand = |t: T| t.powf(-p.beta) * (-big_c * t.powf(-q)).exp();

    // [1, 2]: t − 1 = w^{1/(1−α)}
    let e = one / (one - a);
    let near = integrate(|w: T| integrand(one + w.powf(e)) * e, T::zero(), one, tol)?.value;
    // [2, ∞): t = 2 v^{−1/g} makes the algebraic tail regular
    let far = integrate(
        |v: T| {
            let limit = two.powf(one - a - p.beta) / g;
            if v <= T::zero() {
                return limit;
            }
            let t = two * v.powf(-one / g);
            let value = integrand(t) * (t - one).powf(-a) * two / g * v.powf(-one / g - one);
            if value.is_finite() {
                value
            } else {
                limit
            }
        },
        T::zero(),
        one,
        tol,
    )?
    .value;
    Ok(near + far)
}

/// ν = 2 closed form: ψ_{α,β,2,c}(r) = Γ(α+β−1)Γ(1−α) φ(α+β−1, β; −c r²).
pub fn psi_kummer<T: Real>(p: &PsiParams<T>, r: T) -> Result<T, SpecFunError> {
    p.validate()?;
    check_r(r)?;
    if p.nu != T::lit(2.0) {
        return Err(SpecFunError::Domain(format!(
            "Kummer closed form needs ν = 2, got {}",
            p.nu
        )));
    }
    let g = p.excess();
    let k = kummer_reg(g, p.beta, -p.c * r * r)?;
    Ok(gamma(g) * gamma(T::one() - p.alpha) * k)
}
