//! Polar coordinates x = D_r ω with dx = r^{Q−1} dr dσ(ω), ω on the unit
//! quasi-sphere.
//!
//! Max variant: the unit sphere is the boundary of [−1, 1]ⁿ; on the faces
//! c_j = ±1 the measure is σ_j times Lebesgue measure on the remaining
//! coordinates. Sum and smooth variants: with Φ(ζ)_j = sgn(ζ_j)|ζ_j|^{σ_j}
//! one has Φ(sζ) = D_sΦ(ζ), so Euclidean polar coordinates in ζ give rays
//! ω = D_{1/|Φ(ζ)|}Φ(ζ) with dσ = Π σ_j|ζ_j|^{σ_j−1} |Φ(ζ)|^{−Q} dS(ζ).
//! In ζ both quasi-norms are free of root cusps; the remaining kinks sit on
//! coordinate hyperplanes, along which every mesh is split.

use std::f64::consts::FRAC_PI_2;

use super::{GroupError, GroupSpec, Point, QuasiNorm};
use crate::config::QuadratureConfig;
use crate::quad::GaussLegendre;
use crate::scalar::Real;

/// Nodes and weights on the unit quasi-sphere.
#[derive(Debug, Clone)]
pub struct QuasiSphere<T> {
    pub directions: Vec<Point<T>>,
    pub weights: Vec<T>,
}

impl<T: Real> QuasiSphere<T> {
    /// Mesh with `m` Gauss–Legendre nodes per angular piece.
    pub fn new(g: &GroupSpec<T>, variant: QuasiNorm, m: usize) -> Self {
        let rule = GaussLegendre::<T>::new(m.max(1));
        match variant {
            QuasiNorm::Max => box_faces(g, &rule),
            QuasiNorm::Sum | QuasiNorm::Smooth => {
                let q = T::from_count(g.homogeneous_dim() as usize);
                let mut out = Self {
                    directions: Vec::new(),
                    weights: Vec::new(),
                };
                let mut phi = Point::origin(g.dim());
                for (zeta, w) in euclidean_sphere(g.dim(), &rule) {
                    let mut jac = T::one();
                    for ((p, z), &s) in phi.iter_mut().zip(&zeta).zip(g.weights()) {
                        *p = z.signum() * z.abs().powi(s as i32);
                        jac *= T::lit(f64::from(s)) * z.abs().powi(s as i32 - 1);
                    }
                    let norm = g.norm_of(&phi, variant);
                    let mut omega = Point::origin(g.dim());
                    g.dilate_into(T::one() / norm, &phi, &mut omega);
                    out.directions.push(omega);
                    out.weights.push(w * jac * norm.powf(-q));
                }
                out
            }
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// σ(S), so that vol(B(r)) = σ(S) r^Q / Q.
    pub fn measure(&self) -> T {
        self.weights.iter().copied().sum()
    }

    /// ∫_S f(D_r ω) dσ(ω).
    pub fn average_at<F: FnMut(&[T]) -> T>(&self, g: &GroupSpec<T>, r: T, mut f: F) -> T {
        let mut y = vec![T::zero(); g.dim()];
        let mut acc = T::zero();
        for (omega, &w) in self.directions.iter().zip(&self.weights) {
            g.dilate_into(r, omega, &mut y);
            acc += w * f(&y);
        }
        acc
    }
}

fn box_faces<T: Real>(g: &GroupSpec<T>, rule: &GaussLegendre<T>) -> QuasiSphere<T> {
    let n = g.dim();
    let half: Vec<(T, T)> = rule
        .mapped(-T::one(), T::zero())
        .chain(rule.mapped(T::zero(), T::one()))
        .collect();
    let mut out = QuasiSphere {
        directions: Vec::new(),
        weights: Vec::new(),
    };
    for (j, &sigma) in g.weights().iter().enumerate() {
        for sign in [T::one(), -T::one()] {
            for_each_tensor(n - 1, &half, |coords, w| {
                let mut p = Point::origin(n);
                let mut it = coords.iter();
                for (k, c) in p.iter_mut().enumerate() {
                    *c = if k == j { sign } else { *it.next().unwrap() };
                }
                out.directions.push(p);
                out.weights.push(w * T::lit(f64::from(sigma)));
            });
        }
    }
    out
}

fn for_each_tensor<T: Real, F: FnMut(&[T], T)>(dim: usize, axis: &[(T, T)], mut f: F) {
    let mut idx = vec![0usize; dim];
    let mut coords = vec![T::zero(); dim];
    loop {
        let mut w = T::one();
        for (c, &i) in coords.iter_mut().zip(&idx) {
            *c = axis[i].0;
            w *= axis[i].1;
        }
        f(&coords, w);
        let mut k = 0;
        loop {
            if k == dim {
                return;
            }
            idx[k] += 1;
            if idx[k] < axis.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Euclidean unit sphere S^{n−1} with surface weights. n = 1: {±1};
/// n = 2: four quarter arcs; n ≥ 3: θ = (sin β, cos β η) with weight
/// cos^{n−2}β, β split at 0, η on S^{n−2}.
fn euclidean_sphere<T: Real>(n: usize, rule: &GaussLegendre<T>) -> Vec<(Vec<T>, T)> {
    match n {
        0 => unreachable!("groups have positive dimension"),
        1 => vec![(vec![T::one()], T::one()), (vec![-T::one()], T::one())],
        2 => {
            let mut out = Vec::new();
            for quarter in 0..4 {
                let a = T::lit(FRAC_PI_2 * quarter as f64);
                for (phi, w) in rule.mapped(a, a + T::lit(FRAC_PI_2)) {
                    out.push((vec![phi.cos(), phi.sin()], w));
                }
            }
            out
        }
        _ => {
            let lower = euclidean_sphere(n - 1, rule);
            let hp = T::lit(FRAC_PI_2);
            let mut out = Vec::new();
            for (beta, wb) in rule.mapped(-hp, T::zero()).chain(rule.mapped(T::zero(), hp)) {
                let (s, c) = beta.sin_cos();
                let wb = wb * c.powi(n as i32 - 2);
                for (eta, we) in &lower {
                    let mut theta = Vec::with_capacity(n);
                    theta.push(s);
                    theta.extend(eta.iter().map(|e| c * *e));
                    out.push((theta, wb * *we));
                }
            }
            out
        }
    }
}

/// Product rule on the ball {|y| < r_max}: Gauss–Legendre in r against
/// r^{Q−1}, times a quasi-sphere mesh.
#[derive(Debug, Clone)]
pub struct PolarRule<T> {
    pub radial: Vec<(T, T)>,
    pub sphere: QuasiSphere<T>,
}

impl<T: Real> PolarRule<T> {
    pub fn len(&self) -> usize {
        self.radial.len() * self.sphere.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flattened node/weight pairs.
    pub fn nodes(&self, g: &GroupSpec<T>) -> Vec<(Point<T>, T)> {
        let mut out = Vec::with_capacity(self.len());
        for &(r, wr) in &self.radial {
            for (omega, &ws) in self.sphere.directions.iter().zip(&self.sphere.weights) {
                out.push((g.dilate(r, omega).expect("positive radius"), wr * ws));
            }
        }
        out
    }

    pub fn integrate<F: FnMut(&[T]) -> T>(&self, g: &GroupSpec<T>, mut f: F) -> T {
        self.radial
            .iter()
            .map(|&(r, wr)| wr * self.sphere.average_at(g, r, &mut f))
            .sum()
    }
}

/// Ball quadrature of radius `r_max` for the chosen quasi-norm.
pub fn polar_quadrature<T: Real>(
    g: &GroupSpec<T>,
    r_max: T,
    variant: QuasiNorm,
    cfg: &QuadratureConfig,
) -> Result<PolarRule<T>, GroupError> {
    if !(r_max > T::zero()) || !r_max.is_finite() {
        return Err(GroupError::NonPositiveRadius(r_max.as_f64()));
    }
    let pieces = match variant {
        QuasiNorm::Max => 2 * g.dim() * (2 * cfg.angular_nodes).pow(g.dim() as u32 - 1),
        _ => {
            let n = g.dim();
            if n == 1 {
                2
            } else {
                4 * cfg.angular_nodes * (2 * cfg.angular_nodes).pow(n as u32 - 2)
            }
        }
    };
    let requested = pieces * cfg.radial_nodes;
    if requested > cfg.max_nodes {
        return Err(GroupError::NodeBudget {
            requested,
            budget: cfg.max_nodes,
        });
    }
    let q = g.homogeneous_dim() as i32;
    let radial = GaussLegendre::<T>::new(cfg.radial_nodes)
        .mapped(T::zero(), r_max)
        .map(|(r, w)| (r, w * r.powi(q - 1)))
        .collect();
    Ok(PolarRule {
        radial,
        sphere: QuasiSphere::new(g, variant, cfg.angular_nodes),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn interval_length() {
        let g = GroupSpec::<f64>::euclidean(1);
        for v in QuasiNorm::ALL {
            let rule = polar_quadrature(&g, 1.0, v, &cfg()).unwrap();
            assert!((rule.integrate(&g, |_| 1.0) - 2.0).abs() < 1e-10);
        }
    }

    #[test]
    fn disc_second_moment() {
        let g = GroupSpec::<f64>::euclidean(2);
        let rule = polar_quadrature(&g, 1.0, QuasiNorm::Smooth, &cfg()).unwrap();
        let v = rule.integrate(&g, |y| y[0] * y[0] + y[1] * y[1]);
        assert!((v - std::f64::consts::FRAC_PI_2).abs() < 1e-8, "{v}");
    }

    #[test]
    fn heisenberg_ball_volumes() {
        let g = GroupSpec::<f64>::heisenberg();
        let c = cfg();
        // max ball = box [−r, r]² × [−r², r²]
        let box_vol = polar_quadrature(&g, 1.0, QuasiNorm::Max, &c)
            .unwrap()
            .integrate(&g, |_| 1.0);
        assert!((box_vol - 8.0).abs() < 1e-12);
        // sum ball: ∫_{|x|+|y|<1} 2(1−|x|−|y|)² = 2/3
        let sum_vol = polar_quadrature(&g, 1.0, QuasiNorm::Sum, &c)
            .unwrap()
            .integrate(&g, |_| 1.0);
        assert!((sum_vol - 2.0 / 3.0).abs() < 1e-6, "{sum_vol}");
        for v in QuasiNorm::ALL {
            let v1 = polar_quadrature(&g, 1.0, v, &c).unwrap().integrate(&g, |_| 1.0);
            for r in [0.5, 2.0, 4.0] {
                let vr = polar_quadrature(&g, r, v, &c).unwrap().integrate(&g, |_| 1.0);
                assert!((vr / v1 / r.powi(4) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn smooth_ball_matches_monte_carlo() {
        use rand::{Rng, SeedableRng};
        let g = GroupSpec::<f64>::heisenberg();
        let exact = polar_quadrature(&g, 1.0, QuasiNorm::Smooth, &cfg())
            .unwrap()
            .integrate(&g, |_| 1.0);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let trials = 400_000;
        let hits = (0..trials)
            .filter(|_| {
                let p = [
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                ];
                g.norm_of(&p, QuasiNorm::Smooth) < 1.0
            })
            .count();
        let mc = 8.0 * hits as f64 / trials as f64;
        assert!((mc - exact).abs() < 0.02, "{mc} vs {exact}");
    }

    #[test]
    fn errors() {
        let g = GroupSpec::<f64>::heisenberg();
        assert!(matches!(
            polar_quadrature(&g, 0.0, QuasiNorm::Max, &cfg()),
            Err(GroupError::NonPositiveRadius(_))
        ));
        let tight = QuadratureConfig { max_nodes: 10, ..cfg() };
        assert!(matches!(
            polar_quadrature(&g, 1.0, QuasiNorm::Max, &tight),
            Err(GroupError::NodeBudget { .. })
        ));
    }
}
