//! Gamma function via the Lanczos approximation (g = 7, nine terms) with the
//! reflection formula below 1/2.

use crate::scalar::Real;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum<T: Real>(x: T) -> T {
    let mut a = T::lit(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a += T::lit(c) / (x + T::from_count(i));
    }
    a
}

/// sin(πx), exact at integers.
pub fn sin_pi<T: Real>(x: T) -> T {
    let two = T::lit(2.0);
    let mut r = x % two;
    if r < T::zero() {
        r += two;
    }
    if r == T::zero() || r == T::one() {
        return T::zero();
    }
    if r > T::one() {
        return -sin_pi(r - T::one());
    }
    if r > T::lit(0.5) {
        r = T::one() - r;
    }
    (T::PI() * r).sin()
}

fn is_nonpositive_integer<T: Real>(x: T) -> bool {
    x <= T::zero() && x == x.floor()
}

/// Γ(x) for real x; ±∞ at the poles x ∈ {0, −1, −2, …}.
pub fn gamma<T: Real>(x: T) -> T {
    if is_nonpositive_integer(x) {
        return T::infinity();
    }
    if x < T::lit(0.5) {
        return T::PI() / (sin_pi(x) * gamma(T::one() - x));
    }
    let z = x - T::one();
    let t = z + T::lit(LANCZOS_G + 0.5);
    // split the power to postpone overflow
    let half = t.powf((z + T::lit(0.5)) * T::lit(0.5));
    let value = (T::TAU()).sqrt() * half * ((-t).exp() * half) * lanczos_sum(z);
    if value.is_nan() {
        // the power overflowed while the exponential underflowed
        T::infinity()
    } else {
        value
    }
}

/// ln|Γ(x)| for x > 0.
pub fn ln_gamma<T: Real>(x: T) -> T {
    assert!(x > T::zero(), "ln_gamma requires a positive argument");
    if x < T::lit(0.5) {
        return (T::PI() / sin_pi(x)).ln() - ln_gamma(T::one() - x);
    }
    let z = x - T::one();
    let t = z + T::lit(LANCZOS_G + 0.5);
    T::lit(0.5) * T::TAU().ln() + (z + T::lit(0.5)) * t.ln() - t + lanczos_sum(z).ln()
}

/// 1/Γ(x), an entire function (zero at the poles of Γ).
pub fn rgamma<T: Real>(x: T) -> T {
    if is_nonpositive_integer(x) {
        return T::zero();
    }
    if x < T::lit(0.5) {
        return sin_pi(x) * gamma(T::one() - x) / T::PI();
    }
    let g = gamma(x);
    if g.is_finite() {
        T::one() / g
    } else {
        (-ln_gamma(x)).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn factorials() {
        let mut fact = 1.0f64;
        for n in 1..30 {
            assert!(rel(gamma(n as f64), fact) < 1e-13, "n = {n}");
            fact *= n as f64;
        }
    }

    #[test]
    fn half_integers_and_reference_values() {
        let sqrt_pi = std::f64::consts::PI.sqrt();
        assert!(rel(gamma(0.5), sqrt_pi) < 1e-14);
        assert!(rel(gamma(1.5), 0.5 * sqrt_pi) < 1e-14);
        assert!(rel(gamma(-0.5), -2.0 * sqrt_pi) < 1e-14);
        // reference values from a 30-digit evaluation
        let table = [
            (0.1, 9.513_507_698_668_731_3),
            (0.25, 3.625_609_908_221_908_3),
            (2.7, 1.544_685_845_850_594),
            (7.3, 1_271.423_633_663_908_8),
            (17.9, 2.672_286_958_101_963_7e14),
            (29.5, 1.634_812_519_827_426_6e30),
            (-0.25, -4.901_666_809_860_710_6),
            (-1.5, 2.363_271_801_207_354_7),
        ];
        for (x, g) in table {
            assert!(rel(gamma(x), g) < 1e-13, "x = {x}: {} vs {g}", gamma(x));
        }
    }

    #[test]
    fn recurrence_and_reciprocal() {
        for i in 1..200 {
            let x = 0.01 + 0.147 * i as f64;
            assert!(rel(gamma(x + 1.0), x * gamma(x)) < 2e-13);
            assert!(rel(ln_gamma(x), gamma(x).ln().max(-1e300)) < 1e-12 || gamma(x).ln().abs() < 1e-3);
            assert!(rel(rgamma(x) * gamma(x), 1.0) < 1e-14);
        }
        assert_eq!(rgamma(0.0f64), 0.0);
        assert_eq!(rgamma(-3.0f64), 0.0);
        assert!(gamma(-2.0f64).is_infinite());
    }

    #[test]
    fn single_precision() {
        assert!((gamma(5.0f32) - 24.0).abs() < 1e-4);
        assert!((sin_pi(0.5f32) - 1.0).abs() < 1e-7);
    }
}
