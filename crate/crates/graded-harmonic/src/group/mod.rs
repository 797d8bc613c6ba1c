//! Homogeneous groups in exponential coordinates: polynomial group law,
//! inversion, dilations, quasi-norms, polar quadrature and the coefficients
//! of the left-invariant Jacobian vector fields.

mod polar;
mod poly;
mod text;

use std::fmt;
use std::ops::{Deref, DerefMut};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

use crate::scalar::Real;

pub use polar::{polar_quadrature, PolarRule, QuasiSphere};
pub use poly::{Monomial, Polynomial};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroupError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("dilation factor must be positive, got {0}")]
    NonPositiveDilation(f64),
    #[error("vector field index {index} out of range for dimension {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("quadrature needs {requested} nodes, budget is {budget}")]
    NodeBudget { requested: usize, budget: usize },
    #[error("quadrature volume check failed: relative change {change:e} exceeds {tol:e}")]
    Resolution { change: f64, tol: f64 },
    #[error("invalid group description: {0}")]
    Invalid(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Point of the group in its global exponential chart.
#[derive(Clone, PartialEq, Default)]
pub struct Point<T>(pub SmallVec<[T; 4]>);

impl<T: Real> Point<T> {
    pub fn new(coords: &[T]) -> Self {
        Self(SmallVec::from_slice(coords))
    }

    pub fn origin(n: usize) -> Self {
        Self(SmallVec::from_elem(T::zero(), n))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    pub fn is_origin(&self) -> bool {
        self.0.iter().all(|c| *c == T::zero())
    }
}

impl<T> Deref for Point<T> {
    type Target = [T];
    fn deref(&self) -> &[T] {
        &self.0
    }
}

impl<T> DerefMut for Point<T> {
    fn deref_mut(&mut self) -> &mut [T] {
        &mut self.0
    }
}

impl<T: fmt::Debug> fmt::Debug for Point<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Point").field(&self.0.as_slice()).finish()
    }
}

impl<T: Real> From<Vec<T>> for Point<T> {
    fn from(v: Vec<T>) -> Self {
        Self(SmallVec::from_vec(v))
    }
}

/// Homogeneous quasi-norm built from the exponential coordinates c_j.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuasiNorm {
    /// max_j |c_j|^{1/σ_j}
    #[default]
    Max,
    /// Σ_j |c_j|^{1/σ_j}
    Sum,
    /// (Σ_j |c_j|^{2κ/σ_j})^{1/(2κ)} with κ = lcm(σ); Euclidean on ℝⁿ and
    /// smooth away from the identity.
    Smooth,
}

impl QuasiNorm {
    pub const ALL: [QuasiNorm; 3] = [QuasiNorm::Max, QuasiNorm::Sum, QuasiNorm::Smooth];

    pub fn name(self) -> &'static str {
        match self {
            QuasiNorm::Max => "max",
            QuasiNorm::Sum => "sum",
            QuasiNorm::Smooth => "smooth",
        }
    }
}

impl std::str::FromStr for QuasiNorm {
    type Err = GroupError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "max" => Ok(QuasiNorm::Max),
            "sum" => Ok(QuasiNorm::Sum),
            "smooth" => Ok(QuasiNorm::Smooth),
            other => Err(GroupError::Invalid(format!("unknown quasi-norm `{other}`"))),
        }
    }
}

/// Quasi-triangle constants |x·y| ≤ ρ(|x| + |y|), one per quasi-norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiTriangle<T> {
    pub max: T,
    pub sum: T,
    pub smooth: T,
}

impl<T: Real> QuasiTriangle<T> {
    pub fn get(&self, variant: QuasiNorm) -> T {
        match variant {
            QuasiNorm::Max => self.max,
            QuasiNorm::Sum => self.sum,
            QuasiNorm::Smooth => self.smooth,
        }
    }
}

/// A homogeneous group given by polynomial tables in exponential coordinates.
///
/// Product: (x·y)_k = x_k + y_k + Q_k(x, y); inverse: (x⁻¹)_k = −x_k + q_k(x);
/// vector fields: X_j = Σ_k a_k^{(j)}(x) ∂_k with a_j^{(j)} = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSpec<T> {
    name: String,
    weights: Vec<u32>,
    nu: u32,
    law: Vec<Polynomial<T>>,
    inv: Vec<Polynomial<T>>,
    fields: Vec<Vec<Polynomial<T>>>,
    rho: QuasiTriangle<T>,
}

/// Residuals of the group axioms on random samples.
#[derive(Debug, Clone, Copy)]
pub struct AxiomResiduals<T> {
    pub identity: T,
    pub inverse: T,
    pub associativity: T,
    pub dilation_automorphism: T,
    pub law_homogeneity: T,
    pub field_homogeneity: T,
}

impl<T: Real> AxiomResiduals<T> {
    pub fn max(&self) -> T {
        [
            self.identity,
            self.inverse,
            self.associativity,
            self.dilation_automorphism,
            self.law_homogeneity,
            self.field_homogeneity,
        ]
        .into_iter()
        .fold(T::zero(), T::max)
    }
}

fn lcm(a: u32, b: u32) -> u32 {
    fn gcd(a: u32, b: u32) -> u32 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}

impl<T: Real> GroupSpec<T> {
    /// Builds and structurally validates a group description.
    ///
    /// `fields[j][k]` holds a_k^{(j)}; entries with k ≤ j are ignored and
    /// replaced by δ_{jk}.
    pub fn new(
        name: impl Into<String>,
        weights: Vec<u32>,
        nu: u32,
        law: Vec<Polynomial<T>>,
        inv: Vec<Polynomial<T>>,
        mut fields: Vec<Vec<Polynomial<T>>>,
        rho: QuasiTriangle<T>,
    ) -> Result<Self, GroupError> {
        let name = name.into();
        let n = weights.len();
        let invalid = |m: String| Err(GroupError::Invalid(m));
        if n == 0 {
            return invalid("group needs at least one coordinate".into());
        }
        if name.is_empty() || name.contains(char::is_whitespace) {
            return invalid(format!("group name `{name}` must be a non-empty identifier"));
        }
        if weights[0] < 1 || weights.windows(2).any(|w| w[1] < w[0]) {
            return invalid(format!("weights must be ≥ 1 and ascending, got {weights:?}"));
        }
        if nu < 2 || nu % 2 == 1 {
            return invalid(format!("homogeneous degree ν must be even and ≥ 2, got {nu}"));
        }
        if law.len() != n || inv.len() != n || fields.len() != n {
            return invalid("law, inverse and field tables need one entry per coordinate".into());
        }
        let w2: Vec<u32> = weights.iter().chain(weights.iter()).copied().collect();
        for (k, q) in law.iter().enumerate() {
            if q.nvars != 2 * n {
                return invalid(format!("law component {} must use 2n variables", k + 1));
            }
            for m in &q.terms {
                if m.weighted_degree(&w2) != weights[k] {
                    return invalid(format!(
                        "law component {} is not homogeneous of degree {}",
                        k + 1,
                        weights[k]
                    ));
                }
                let uses_high = m.powers.iter().enumerate().any(|(i, &p)| p > 0 && w2[i] >= weights[k]);
                if uses_high {
                    return invalid(format!(
                        "law component {} depends on a coordinate of weight ≥ {}",
                        k + 1,
                        weights[k]
                    ));
                }
            }
        }
        for (k, q) in inv.iter().enumerate() {
            if q.nvars != n {
                return invalid(format!("inverse component {} must use n variables", k + 1));
            }
            for m in &q.terms {
                if m.weighted_degree(&weights) != weights[k]
                    || m.powers
                        .iter()
                        .enumerate()
                        .any(|(i, &p)| p > 0 && weights[i] >= weights[k])
                {
                    return invalid(format!("inverse component {} is not admissible", k + 1));
                }
            }
        }
        for (j, row) in fields.iter_mut().enumerate() {
            if row.len() != n {
                return invalid(format!("field {} needs n coefficients", j + 1));
            }
            for (k, a) in row.iter_mut().enumerate() {
                if k <= j {
                    *a = if k == j {
                        Polynomial::constant(n, T::one())
                    } else {
                        Polynomial::zero(n)
                    };
                    continue;
                }
                if a.nvars != n {
                    return invalid(format!("field {} coefficient {} must use n variables", j + 1, k + 1));
                }
                for m in &a.terms {
                    let deg = m.weighted_degree(&weights);
                    if weights[k] < weights[j] || deg != weights[k] - weights[j] || m.is_constant() {
                        return invalid(format!(
                            "field {} coefficient {} must be homogeneous of degree {} without constant term",
                            j + 1,
                            k + 1,
                            weights[k].saturating_sub(weights[j])
                        ));
                    }
                }
            }
        }
        for v in QuasiNorm::ALL {
            if !(rho.get(v) >= T::one()) {
                return invalid("quasi-triangle constants must be ≥ 1".into());
            }
        }
        Ok(Self {
            name,
            weights,
            nu,
            law,
            inv,
            fields,
            rho,
        })
    }

    /// Abelian ℝⁿ with all weights 1 and ν = 2 (−Δ).
    pub fn euclidean(n: usize) -> Self {
        assert!(n >= 1);
        let law = (0..n).map(|_| Polynomial::zero(2 * n)).collect();
        let inv = (0..n).map(|_| Polynomial::zero(n)).collect();
        let fields = (0..n).map(|_| (0..n).map(|_| Polynomial::zero(n)).collect()).collect();
        let one = T::one();
        Self::new(
            format!("R{n}"),
            vec![1; n],
            2,
            law,
            inv,
            fields,
            QuasiTriangle {
                max: one,
                sum: one,
                smooth: one,
            },
        )
        .expect("Euclidean description is valid")
    }

    /// First Heisenberg group, chart (x, y, u), law
    /// (x,y,u)·(x',y',u') = (x+x', y+y', u+u'+(xy'−yx')/2), weights (1,1,2).
    pub fn heisenberg() -> Self {
        let half = T::lit(0.5);
        let law = vec![
            Polynomial::zero(6),
            Polynomial::zero(6),
            Polynomial::zero(6)
                .with_term(half, &[1, 0, 0, 0, 1, 0])
                .with_term(-half, &[0, 1, 0, 1, 0, 0]),
        ];
        let inv = (0..3).map(|_| Polynomial::zero(3)).collect();
        let fields = vec![
            vec![
                Polynomial::zero(3),
                Polynomial::zero(3),
                Polynomial::zero(3).with_term(-half, &[0, 1, 0]),
            ],
            vec![
                Polynomial::zero(3),
                Polynomial::zero(3),
                Polynomial::zero(3).with_term(half, &[1, 0, 0]),
            ],
            vec![Polynomial::zero(3), Polynomial::zero(3), Polynomial::zero(3)],
        ];
        // max: exact (|xy'−yx'| ≤ 2|x||y|); sum and smooth: rounded-up maxima of a
        // multi-start local search of |x·y|/(|x|+|y|)
        let rho = QuasiTriangle {
            max: T::one(),
            sum: T::lit(1.34),
            smooth: T::lit(1.001),
        };
        Self::new("H1", vec![1, 1, 2], 2, law, inv, fields, rho).expect("Heisenberg description is valid")
    }

    /// Built-in group by name: `R<n>` (n ≥ 1) or `H1`.
    pub fn builtin(name: &str) -> Option<Self> {
        if name == "H1" {
            return Some(Self::heisenberg());
        }
        let n: usize = name.strip_prefix('R')?.parse().ok()?;
        (n >= 1).then(|| Self::euclidean(n))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Topological dimension n.
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    /// Homogeneous dimension Q = Σσ_j.
    pub fn homogeneous_dim(&self) -> u32 {
        self.weights.iter().sum()
    }

    /// Homogeneous degree ν of the canonical Rockland operator.
    pub fn nu(&self) -> u32 {
        self.nu
    }

    pub fn rho(&self, variant: QuasiNorm) -> T {
        self.rho.get(variant)
    }

    pub fn quasi_triangle(&self) -> QuasiTriangle<T> {
        self.rho
    }

    pub fn is_abelian(&self) -> bool {
        self.law.iter().all(Polynomial::is_zero)
    }

    pub fn law(&self) -> &[Polynomial<T>] {
        &self.law
    }

    pub fn inverse_table(&self) -> &[Polynomial<T>] {
        &self.inv
    }

    pub fn field_table(&self) -> &[Vec<Polynomial<T>>] {
        &self.fields
    }

    fn check_dim(&self, got: usize) -> Result<(), GroupError> {
        if got == self.dim() {
            Ok(())
        } else {
            Err(GroupError::DimensionMismatch {
                expected: self.dim(),
                got,
            })
        }
    }

    /// out = x·y (no dimension checks).
    #[inline]
    pub fn mul_into(&self, x: &[T], y: &[T], out: &mut [T]) {
        for k in 0..x.len() {
            out[k] = x[k] + y[k] + self.law[k].eval_split(x, y);
        }
    }

    /// out = x⁻¹ (no dimension checks).
    #[inline]
    pub fn inv_into(&self, x: &[T], out: &mut [T]) {
        for k in 0..x.len() {
            out[k] = -x[k] + self.inv[k].eval(x);
        }
    }

    /// out = D_λ x (no checks).
    #[inline]
    pub fn dilate_into(&self, lambda: T, x: &[T], out: &mut [T]) {
        for k in 0..x.len() {
            out[k] = x[k] * lambda.powi(self.weights[k] as i32);
        }
    }

    /// Quasi-norm of raw coordinates (no checks).
    #[inline]
    pub fn norm_of(&self, x: &[T], variant: QuasiNorm) -> T {
        let w = &self.weights;
        match variant {
            QuasiNorm::Max => x.iter().zip(w).map(|(c, &s)| root(c.abs(), s)).fold(T::zero(), T::max),
            QuasiNorm::Sum => x.iter().zip(w).map(|(c, &s)| root(c.abs(), s)).sum(),
            QuasiNorm::Smooth => {
                let kappa = w.iter().copied().fold(1, lcm);
                let s: T = x
                    .iter()
                    .zip(w)
                    .map(|(c, &sj)| c.abs().powi((2 * kappa / sj) as i32))
                    .sum();
                s.powf(T::one() / T::lit(f64::from(2 * kappa)))
            }
        }
    }

    pub fn multiply(&self, x: &Point<T>, y: &Point<T>) -> Result<Point<T>, GroupError> {
        self.check_dim(x.dim())?;
        self.check_dim(y.dim())?;
        let mut out = Point::origin(self.dim());
        self.mul_into(x, y, &mut out);
        Ok(out)
    }

    pub fn inverse(&self, x: &Point<T>) -> Result<Point<T>, GroupError> {
        self.check_dim(x.dim())?;
        let mut out = Point::origin(self.dim());
        self.inv_into(x, &mut out);
        Ok(out)
    }

    pub fn dilate(&self, lambda: T, x: &Point<T>) -> Result<Point<T>, GroupError> {
        if !(lambda > T::zero()) {
            return Err(GroupError::NonPositiveDilation(lambda.as_f64()));
        }
        self.check_dim(x.dim())?;
        let mut out = Point::origin(self.dim());
        self.dilate_into(lambda, x, &mut out);
        Ok(out)
    }

    pub fn quasi_norm(&self, x: &Point<T>, variant: QuasiNorm) -> Result<T, GroupError> {
        self.check_dim(x.dim())?;
        Ok(self.norm_of(x, variant))
    }

    /// (a_j^{(j)}(x), …, a_n^{(j)}(x)) for the 0-based field index `j`.
    pub fn vf_coeffs(&self, j: usize, x: &Point<T>) -> Result<Vec<T>, GroupError> {
        if j >= self.dim() {
            return Err(GroupError::IndexOutOfRange {
                index: j,
                n: self.dim(),
            });
        }
        self.check_dim(x.dim())?;
        Ok(self.fields[j][j..].iter().map(|a| a.eval(x)).collect())
    }

    /// Full coefficient row a_k^{(j)}(x), k = 0..n (zeros below j).
    #[inline]
    pub fn vf_row_into(&self, j: usize, x: &[T], out: &mut [T]) {
        for (k, a) in self.fields[j].iter().enumerate() {
            out[k] = a.eval(x);
        }
    }

    /// Whether X_j has constant coefficients (a pure coordinate derivative).
    pub fn field_is_coordinate(&self, j: usize) -> bool {
        self.fields[j].iter().enumerate().all(|(k, a)| k == j || a.is_zero())
    }

    /// Residuals of the group axioms and homogeneity properties at `samples`
    /// random points drawn from [−2, 2]ⁿ.
    pub fn check_axioms(&self, samples: usize, seed: u64) -> AxiomResiduals<T> {
        let n = self.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draw =
            |rng: &mut ChaCha8Rng| -> Point<T> { Point((0..n).map(|_| T::lit(rng.gen_range(-2.0..2.0))).collect()) };
        let zero = Point::origin(n);
        let mut res = AxiomResiduals {
            identity: T::zero(),
            inverse: T::zero(),
            associativity: T::zero(),
            dilation_automorphism: T::zero(),
            law_homogeneity: T::zero(),
            field_homogeneity: T::zero(),
        };
        let dist = |a: &[T], b: &[T]| a.iter().zip(b).map(|(p, q)| (*p - *q).abs()).fold(T::zero(), T::max);
        let w2: Vec<u32> = self.weights.iter().chain(self.weights.iter()).copied().collect();
        for _ in 0..samples {
            let (x, y, z) = (draw(&mut rng), draw(&mut rng), draw(&mut rng));
            let lambda = T::lit(rng.gen_range(0.1..3.0));
            let xe = self.multiply(&x, &zero).unwrap();
            let ex = self.multiply(&zero, &x).unwrap();
            res.identity = res.identity.max(dist(&xe, &x)).max(dist(&ex, &x));
            let xi = self.inverse(&x).unwrap();
            res.inverse = res
                .inverse
                .max(dist(&self.multiply(&x, &xi).unwrap(), &zero))
                .max(dist(&self.multiply(&xi, &x).unwrap(), &zero));
            let l = self.multiply(&self.multiply(&x, &y).unwrap(), &z).unwrap();
            let r = self.multiply(&x, &self.multiply(&y, &z).unwrap()).unwrap();
            res.associativity = res.associativity.max(dist(&l, &r));
            let dl = self.dilate(lambda, &self.multiply(&x, &y).unwrap()).unwrap();
            let dr = self
                .multiply(&self.dilate(lambda, &x).unwrap(), &self.dilate(lambda, &y).unwrap())
                .unwrap();
            res.dilation_automorphism = res.dilation_automorphism.max(dist(&dl, &dr));
            let (dx, dy) = (self.dilate(lambda, &x).unwrap(), self.dilate(lambda, &y).unwrap());
            for (k, q) in self.law.iter().enumerate() {
                let scaled = q.eval_split(&dx, &dy);
                let expect = lambda.powi(self.weights[k] as i32) * q.eval_split(&x, &y);
                res.law_homogeneity = res.law_homogeneity.max((scaled - expect).abs());
                debug_assert!(q.terms.iter().all(|m| m.weighted_degree(&w2) == self.weights[k]));
            }
            for j in 0..n {
                for k in j..n {
                    let a = &self.fields[j][k];
                    let deg = self.weights[k] as i32 - self.weights[j] as i32;
                    let scaled = a.eval(&dx);
                    let expect = lambda.powi(deg) * a.eval(&x);
                    res.field_homogeneity = res.field_homogeneity.max((scaled - expect).abs());
                }
            }
        }
        res
    }

    /// Largest observed |x·y|/(|x|+|y|) over `samples` random pairs with
    /// coordinates spread over several scales.
    pub fn estimate_rho(&self, variant: QuasiNorm, samples: usize, seed: u64) -> T {
        let n = self.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut best = T::zero();
        let mut xy = vec![T::zero(); n];
        for _ in 0..samples {
            let x: Vec<T> = (0..n)
                .map(|_| T::lit(rng.gen_range(-1.0..1.0) * 4f64.powf(rng.gen_range(-1.0..1.0))))
                .collect();
            let y: Vec<T> = (0..n)
                .map(|_| T::lit(rng.gen_range(-1.0..1.0) * 4f64.powf(rng.gen_range(-1.0..1.0))))
                .collect();
            self.mul_into(&x, &y, &mut xy);
            let d = self.norm_of(&x, variant) + self.norm_of(&y, variant);
            if d > T::zero() {
                best = best.max(self.norm_of(&xy, variant) / d);
            }
        }
        best
    }
}

#[inline]
fn root<T: Real>(v: T, s: u32) -> T {
    match s {
        1 => v,
        2 => v.sqrt(),
        _ => v.powf(T::one() / T::lit(f64::from(s))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[f64]) -> Point<f64> {
        Point::new(c)
    }

    #[test]
    fn heisenberg_product_and_inverse() {
        let g = GroupSpec::<f64>::heisenberg();
        assert_eq!(
            g.multiply(&p(&[1., 0., 0.]), &p(&[0., 1., 0.])).unwrap(),
            p(&[1., 1., 0.5])
        );
        assert_eq!(g.inverse(&p(&[1., 2., 3.])).unwrap(), p(&[-1., -2., -3.]));
        assert_eq!(g.inverse(&Point::origin(3)).unwrap(), Point::origin(3));
        assert_eq!(g.dilate(2.0, &p(&[1., 1., 1.])).unwrap(), p(&[2., 2., 4.]));
        assert_eq!(g.homogeneous_dim(), 4);
        assert!(!g.is_abelian());
    }

    #[test]
    fn euclidean_product() {
        let g = GroupSpec::<f64>::euclidean(2);
        assert_eq!(g.multiply(&p(&[1., 2.]), &p(&[3., 4.])).unwrap(), p(&[4., 6.]));
        assert_eq!(g.inverse(&p(&[1., -2.])).unwrap(), p(&[-1., 2.]));
        assert!(g.is_abelian());
        for j in 0..2 {
            let c = g.vf_coeffs(j, &p(&[0.3, 0.7])).unwrap();
            assert_eq!(c[0], 1.0);
            assert!(c[1..].iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn quasi_norm_values() {
        let g = GroupSpec::<f64>::heisenberg();
        assert_eq!(g.quasi_norm(&p(&[0., 0., 4.]), QuasiNorm::Max).unwrap(), 2.0);
        assert_eq!(g.quasi_norm(&p(&[1., 1., 1.]), QuasiNorm::Sum).unwrap(), 3.0);
        let e = GroupSpec::<f64>::euclidean(2);
        assert!((e.quasi_norm(&p(&[3., 4.]), QuasiNorm::Smooth).unwrap() - 5.0).abs() < 1e-14);
    }

    #[test]
    fn vector_field_coefficients() {
        let g = GroupSpec::<f64>::heisenberg();
        let x = p(&[0.4, -1.2, 3.0]);
        assert_eq!(g.vf_coeffs(0, &x).unwrap(), vec![1.0, 0.0, 0.6]);
        assert_eq!(g.vf_coeffs(1, &x).unwrap(), vec![1.0, 0.2]);
        assert_eq!(g.vf_coeffs(2, &x).unwrap(), vec![1.0]);
        assert!(matches!(g.vf_coeffs(3, &x), Err(GroupError::IndexOutOfRange { .. })));
    }

    #[test]
    fn errors() {
        let g = GroupSpec::<f64>::heisenberg();
        assert!(matches!(
            g.multiply(&p(&[1., 2.]), &p(&[1., 2., 3.])),
            Err(GroupError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            g.dilate(0.0, &p(&[1., 2., 3.])),
            Err(GroupError::NonPositiveDilation(_))
        ));
        // a law component that is not homogeneous is rejected
        let bad = GroupSpec::<f64>::new(
            "bad",
            vec![1, 1, 2],
            2,
            vec![
                Polynomial::zero(6),
                Polynomial::zero(6),
                Polynomial::zero(6).with_term(1.0, &[1, 0, 0, 0, 0, 0]),
            ],
            vec![Polynomial::zero(3), Polynomial::zero(3), Polynomial::zero(3)],
            vec![vec![Polynomial::zero(3); 3]; 3],
            QuasiTriangle {
                max: 1.0,
                sum: 1.0,
                smooth: 1.0,
            },
        );
        assert!(matches!(bad, Err(GroupError::Invalid(_))));
    }

    #[test]
    fn axioms_hold_on_builtins() {
        for g in [
            GroupSpec::<f64>::euclidean(1),
            GroupSpec::euclidean(3),
            GroupSpec::heisenberg(),
        ] {
            let r = g.check_axioms(1000, 7);
            assert!(r.max() < 1e-12, "{}: {r:?}", g.name());
        }
    }

    #[test]
    fn stored_rho_dominates_samples() {
        let g = GroupSpec::<f64>::heisenberg();
        for v in QuasiNorm::ALL {
            let est = g.estimate_rho(v, 20_000, 3);
            assert!(est <= g.rho(v), "{v:?}: {est}");
            assert!(est > 0.9);
        }
    }

    #[test]
    fn single_precision_group() {
        let g = GroupSpec::<f32>::heisenberg();
        let r = g.check_axioms(200, 1);
        assert!(r.max() < 1e-4);
    }
}
