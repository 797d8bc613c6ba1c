//! Heisenberg heat kernel from its one-dimensional oscillatory integral
//!
//!   h_t(z, u) = (4π²t²)⁻¹ ∫₀^∞ cos(su/t) (s/sinh s) exp(−(|z|²/4t) s coth s) ds,
//!
//! tabulated at t = 1 over (|z|, u) and extended to all t by scaling,
//! h_t(z, u) = t⁻² h_1(z/√t, u/t). The integrand is even and analytic in
//! the strip |Im s| < π, so the trapezoid rule in s converges geometrically.

use std::f64::consts::PI;

use crate::field::interp::cubic_weights;
use crate::scalar::Real;

const DS: f64 = 0.05;
const S_MAX: f64 = 48.0;

/// (s/sinh s, s coth s) with the removable singularity at 0.
fn profile(s: f64) -> (f64, f64) {
    if s == 0.0 {
        (1.0, 1.0)
    } else {
        (s / s.sinh(), s / s.tanh())
    }
}

/// h_1(r, u) and (∂_t h_t)|_{t=1}(r, u) by direct trapezoid sums.
pub fn h1_point(r: f64, u: f64) -> (f64, f64) {
    let q = r * r / 4.0;
    let n = (S_MAX / DS) as usize;
    let (mut h, mut d) = (0.0, 0.0);
    for k in 0..=n {
        let s = k as f64 * DS;
        let w = if k == 0 { 0.5 } else { 1.0 };
        let (ss, sc) = profile(s);
        let e = ss * (-q * sc).exp();
        let (sn, cs) = (s * u).sin_cos();
        h += w * cs * e;
        d += w * e * (cs * (q * sc - 2.0) + s * u * sn);
    }
    let c = DS / (4.0 * PI * PI);
    (h * c, d * c)
}

/// h_1 and its time derivative on a uniform (r, u) table over
/// [0, r_max] × [0, u_max]; outside the table both read as 0.
#[derive(Debug, Clone)]
pub struct GaveauTable<T> {
    step: T,
    nr: usize,
    nu: usize,
    h: Vec<T>,
    dt: Vec<T>,
}

impl<T: Real> GaveauTable<T> {
    pub fn new(r_max: f64, u_max: f64, step: f64) -> Self {
        let nr = (r_max / step).round() as usize + 1;
        let nu = (u_max / step).round() as usize + 1;
        let ns = (S_MAX / DS) as usize + 1;
        let s: Vec<f64> = (0..ns).map(|k| k as f64 * DS).collect();
        let prof: Vec<(f64, f64)> = s.iter().map(|&x| profile(x)).collect();
        // cos(s u_j), s·u_j·sin(s u_j) reused for every r
        let trig: Vec<(f64, f64)> = (0..nu)
            .flat_map(|j| {
                let u = j as f64 * step;
                s.iter().map(move |&x| {
                    let (sn, cs) = (x * u).sin_cos();
                    (cs, x * u * sn)
                })
            })
            .collect();
        let c = DS / (4.0 * PI * PI);
        let mut h = vec![T::zero(); nr * nu];
        let mut dt = vec![T::zero(); nr * nu];
        let mut e = vec![0.0; ns];
        let mut a = vec![0.0; ns];
        for i in 0..nr {
            let r = i as f64 * step;
            let q = r * r / 4.0;
            for k in 0..ns {
                let (ss, sc) = prof[k];
                let w = if k == 0 { 0.5 } else { 1.0 };
                e[k] = w * ss * (-q * sc).exp();
                a[k] = q * sc - 2.0;
            }
            for j in 0..nu {
                let row = &trig[j * ns..(j + 1) * ns];
                let (mut hv, mut dv) = (0.0, 0.0);
                for k in 0..ns {
                    let (cs, sus) = row[k];
                    hv += cs * e[k];
                    dv += e[k] * (cs * a[k] + sus);
                }
                h[i * nu + j] = T::lit(hv * c);
                dt[i * nu + j] = T::lit(dv * c);
            }
        }
        Self {
            step: T::lit(step),
            nr,
            nu,
            h,
            dt,
        }
    }

    /// Table covering |z| ≤ 12, |u| ≤ 24 (kernel below 1e−15 beyond).
    pub fn standard() -> Self {
        Self::new(12.0, 24.0, 0.04)
    }

    fn lookup(&self, data: &[T], r: T, u: T) -> T {
        let pr = r.abs() / self.step;
        let pu = u.abs() / self.step;
        let (fr, fu) = (pr.floor(), pu.floor());
        let (ir, iu) = (
            fr.to_isize().unwrap_or(isize::MAX / 2),
            fu.to_isize().unwrap_or(isize::MAX / 2),
        );
        if ir - 1 >= self.nr as isize || iu - 1 >= self.nu as isize {
            return T::zero();
        }
        let (wr, wu) = (cubic_weights(pr - fr), cubic_weights(pu - fu));
        let mut acc = T::zero();
        for a in 0..4 {
            // even extension across 0
            let i = (ir - 1 + a as isize).unsigned_abs();
            if i >= self.nr {
                continue;
            }
            let mut row = T::zero();
            for b in 0..4 {
                let j = (iu - 1 + b as isize).unsigned_abs();
                if j < self.nu {
                    row += wu[b] * data[i * self.nu + j];
                }
            }
            acc += wr[a] * row;
        }
        acc
    }

    /// h_1(r, u).
    pub fn h1(&self, r: T, u: T) -> T {
        self.lookup(&self.h, r, u)
    }

    /// h_t at a chart point (x, y, u).
    pub fn kernel(&self, t: T, p: &[T]) -> T {
        let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
        self.lookup(&self.h, r / t.sqrt(), p[2] / t) / (t * t)
    }

    /// ∂_t h_t at a chart point: t⁻³ (∂_t h)|_{t=1}(z/√t, u/t).
    pub fn kernel_dt(&self, t: T, p: &[T]) -> T {
        let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
        self.lookup(&self.dt, r / t.sqrt(), p[2] / t) / (t * t * t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate, Tolerance};

    #[test]
    fn origin_value_and_marginal() {
        let (h0, _) = h1_point(0.0, 0.0);
        assert!((h0 - 1.0 / 16.0).abs() < 1e-14, "{h0}");
        // ∫ h_1(z, u) dz = ½ sech(πu/2): check at u = 0.7 by radial quadrature
        let u = 0.7;
        let m = integrate(
            |r: f64| 2.0 * PI * r * h1_point(r, u).0,
            0.0,
            14.0,
            Tolerance::new(1e-13, 1e-11),
        )
        .unwrap();
        assert!((m.value - 0.5 / (PI * u / 2.0).cosh()).abs() < 1e-10, "{}", m.value);
    }

    #[test]
    fn time_derivative_matches_difference_quotient() {
        // h_t(r,u) = t⁻² h_1(r/√t, u/t)
        let (r, u) = (0.9, -0.6);
        let ht = |t: f64| h1_point(r / t.sqrt(), u / t).0 / (t * t);
        let d = 1e-4;
        let fd = (ht(1.0 + d) - ht(1.0 - d)) / (2.0 * d);
        assert!((h1_point(r, u).1 - fd).abs() < 1e-8);
    }

    #[test]
    fn table_interpolates_direct_values() {
        let tab = GaveauTable::<f64>::new(6.0, 8.0, 0.04);
        for &(r, u) in &[(0.0, 0.0), (0.33, 0.71), (1.5, -2.25), (3.07, 4.4)] {
            let (h, d) = h1_point(r, u);
            assert!((tab.h1(r, u) - h).abs() < 1e-7, "{r} {u}");
            assert!((tab.kernel_dt(1.0, &[r, 0.0, u]) - d).abs() < 1e-6);
        }
        assert_eq!(tab.h1(7.0, 0.0), 0.0);
    }
}
