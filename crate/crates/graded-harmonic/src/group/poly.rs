//! Sparse real polynomials in a fixed number of variables, used for the
//! group law, inversion and vector-field coefficient tables.

use smallvec::SmallVec;

use crate::scalar::Real;

/// c · Π v_i^{p_i}
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial<T> {
    pub coeff: T,
    pub powers: SmallVec<[u8; 6]>,
}

impl<T: Real> Monomial<T> {
    pub fn new(coeff: T, powers: &[u8]) -> Self {
        Self {
            coeff,
            powers: SmallVec::from_slice(powers),
        }
    }

    /// Evaluate with variables split across two slices (x then y).
    #[inline]
    pub fn eval_split(&self, x: &[T], y: &[T]) -> T {
        let mut v = self.coeff;
        for (i, &p) in self.powers.iter().enumerate() {
            if p == 0 {
                continue;
            }
            let base = if i < x.len() { x[i] } else { y[i - x.len()] };
            v *= base.powi(i32::from(p));
        }
        v
    }

    /// Σ p_i w_i for per-variable weights `w`.
    pub fn weighted_degree(&self, w: &[u32]) -> u32 {
        self.powers.iter().zip(w).map(|(&p, &wi)| u32::from(p) * wi).sum()
    }

    pub fn is_constant(&self) -> bool {
        self.powers.iter().all(|&p| p == 0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial<T> {
    pub nvars: usize,
    pub terms: Vec<Monomial<T>>,
}

impl<T: Real> Polynomial<T> {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: Vec::new(),
        }
    }

    pub fn constant(nvars: usize, c: T) -> Self {
        let mut p = Self::zero(nvars);
        if c != T::zero() {
            p.terms.push(Monomial::new(c, &vec![0; nvars]));
        }
        p
    }

    pub fn with_term(mut self, coeff: T, powers: &[u8]) -> Self {
        assert_eq!(powers.len(), self.nvars, "monomial arity");
        if coeff != T::zero() {
            self.terms.push(Monomial::new(coeff, powers));
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// ∂/∂v_var.
    pub fn derivative(&self, var: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for m in &self.terms {
            let p = m.powers[var];
            if p == 0 {
                continue;
            }
            let mut powers = m.powers.clone();
            powers[var] = p - 1;
            out.terms.push(Monomial {
                coeff: m.coeff * T::from_count(p as usize),
                powers,
            });
        }
        out
    }

    #[inline]
    pub fn eval(&self, v: &[T]) -> T {
        self.eval_split(v, &[])
    }

    #[inline]
    pub fn eval_split(&self, x: &[T], y: &[T]) -> T {
        self.terms.iter().map(|m| m.eval_split(x, y)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluation_and_degree() {
        // 0.5 x1 y2 − 0.5 x2 y1 over (x1, x2, x3, y1, y2, y3)
        let p = Polynomial::<f64>::zero(6)
            .with_term(0.5, &[1, 0, 0, 0, 1, 0])
            .with_term(-0.5, &[0, 1, 0, 1, 0, 0]);
        assert_eq!(p.eval_split(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]), 0.5);
        let w = [1, 1, 2, 1, 1, 2];
        assert!(p.terms.iter().all(|m| m.weighted_degree(&w) == 2));
        assert!(Polynomial::<f64>::constant(3, 0.0).is_zero());
        let q = Polynomial::<f64>::zero(2).with_term(3.0, &[2, 1]);
        assert_eq!(q.derivative(0).eval(&[2.0, 5.0]), 60.0);
        assert!(q.derivative(1).derivative(1).is_zero());
    }
}
