//! Stencil sublaplacian L = Σ_{σ_j = 1} X_j² on a grid (zero outside) and
//! Crank–Nicolson time stepping with conjugate-gradient solves.
//!
//! L = Σ_{k,l} C_kl ∂_k∂_l + Σ_l b_l ∂_l with C_kl = Σ_j a_k^{(j)} a_l^{(j)} and
//! b_l = Σ_j X_j a_l^{(j)}. Pure second derivatives use the five-point
//! fourth-order stencil, mixed ones the product of fourth-order first
//! differences. With b = 0 (both built-ins) the matrix is symmetric.

use rayon::prelude::*;

use super::HeatError;
use crate::field::Grid;
use crate::group::GroupSpec;
use crate::scalar::Real;

const D1: [(isize, f64); 4] = [(-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0)];
const D2: [(isize, f64); 5] = [(-2, -1.0), (-1, 16.0), (0, -30.0), (1, 16.0), (2, -1.0)];

enum Coef<T> {
    Const(T),
    Field(Vec<T>),
}

impl<T: Real> Coef<T> {
    #[inline]
    fn at(&self, i: usize) -> T {
        match self {
            Coef::Const(c) => *c,
            Coef::Field(v) => v[i],
        }
    }
}

struct Term<T> {
    k: usize,
    l: usize,
    coef: Coef<T>,
}

/// Discrete generator on a fixed grid.
pub struct Generator<T> {
    grid: Grid<T>,
    strides: Vec<usize>,
    counts: Vec<usize>,
    terms: Vec<Term<T>>,
}

impl<T: Real> Generator<T> {
    pub fn new(group: &GroupSpec<T>, grid: &Grid<T>) -> Result<Self, HeatError> {
        let n = group.dim();
        let horizontal: Vec<usize> = (0..n).filter(|&j| group.weights()[j] == 1).collect();
        let table = group.field_table();
        // the drift b_l = Σ_j Σ_k a_k^{(j)} ∂_k a_l^{(j)} must vanish; checked at
        // sample points since the coefficients are polynomials of low degree
        for probe in 0..8 {
            let x: Vec<T> = (0..n)
                .map(|k| T::lit(0.37 * (probe as f64 + 1.0) - 0.21 * k as f64))
                .collect();
            for &j in &horizontal {
                for l in 0..n {
                    let b: T = (j..n)
                        .map(|k| {
                            let ak = if k == j { T::one() } else { table[j][k].eval(&x) };
                            ak * table[j][l].derivative(k).eval(&x)
                        })
                        .sum();
                    if b.abs() > T::lit(1e-12) {
                        return Err(HeatError::Unsupported(
                            "sublaplacian with first-order terms (non-symmetric stencil)".into(),
                        ));
                    }
                }
            }
        }
        let mut terms = Vec::new();
        let mut x = vec![T::zero(); n];
        for k in 0..n {
            for l in k..n {
                let coef_at = |x: &[T]| -> T {
                    let mut c = T::zero();
                    for &j in &horizontal {
                        let a = |m: usize| {
                            if m == j {
                                T::one()
                            } else if m < j {
                                T::zero()
                            } else {
                                table[j][m].eval(x)
                            }
                        };
                        c += a(k) * a(l);
                    }
                    if k == l {
                        c
                    } else {
                        c + c
                    }
                };
                let constant = horizontal.iter().all(|&j| {
                    (k <= j || table[j][k].terms.iter().all(|m| m.is_constant()))
                        && (l <= j || table[j][l].terms.iter().all(|m| m.is_constant()))
                });
                let coef = if constant {
                    let c = coef_at(&x);
                    if c == T::zero() {
                        continue;
                    }
                    Coef::Const(c)
                } else {
                    Coef::Field(
                        (0..grid.len())
                            .map(|i| {
                                grid.coords_of(i, &mut x);
                                coef_at(&x)
                            })
                            .collect(),
                    )
                };
                terms.push(Term { k, l, coef });
            }
        }
        Ok(Self {
            grid: grid.clone(),
            strides: grid.strides().to_vec(),
            counts: grid.shape().to_vec(),
            terms,
        })
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    /// out = L v.
    pub fn apply(&self, v: &[T], out: &mut [T]) {
        let n = self.counts.len();
        let h: Vec<T> = self.grid.axes().iter().map(|a| a.spacing).collect();
        let c12 = T::lit(12.0);
        let c144 = T::lit(144.0);
        let d1: Vec<(isize, T)> = D1.iter().map(|&(o, c)| (o, T::lit(c))).collect();
        let d2: Vec<(isize, T)> = D2.iter().map(|&(o, c)| (o, T::lit(c))).collect();
        out.par_iter_mut().enumerate().for_each_init(
            || vec![0usize; n],
            |idx, (i, o)| {
                self.grid.unravel(i, idx);
                let interior = idx.iter().zip(&self.counts).all(|(&a, &c)| a >= 2 && a + 2 < c);
                // v at idx + a·e_k + b·e_l, zero off the grid
                let get = |k: usize, a: isize, l: usize, b: isize| -> T {
                    if !interior {
                        let mk = idx[k] as isize + a + if k == l { b } else { 0 };
                        if mk < 0 || mk as usize >= self.counts[k] {
                            return T::zero();
                        }
                        let ml = idx[l] as isize + b;
                        if k != l && (ml < 0 || ml as usize >= self.counts[l]) {
                            return T::zero();
                        }
                    }
                    let off = a * self.strides[k] as isize + b * self.strides[l] as isize;
                    v[(i as isize + off) as usize]
                };
                let mut acc = T::zero();
                for t in &self.terms {
                    let c = t.coef.at(i);
                    if t.k == t.l {
                        let s: T = d2.iter().map(|&(a, w)| w * get(t.k, a, t.k, 0)).sum();
                        acc += c * s / (c12 * h[t.k] * h[t.k]);
                    } else {
                        let mut s = T::zero();
                        for &(a, wa) in &d1 {
                            for &(b, wb) in &d1 {
                                s += wa * wb * get(t.k, a, t.l, b);
                            }
                        }
                        acc += c * s / (c144 * h[t.k] * h[t.l]);
                    }
                }
                *o = acc;
            },
        );
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

/// Solves (I − θ L) x = rhs by conjugate gradients, starting from `x`.
fn solve<T: Real>(gen: &Generator<T>, theta: T, rhs: &[T], x: &mut [T], rel_tol: T) -> Result<(), HeatError> {
    let n = rhs.len();
    let mut ax = vec![T::zero(); n];
    let op = |v: &[T], out: &mut [T]| {
        gen.apply(v, out);
        out.par_iter_mut()
            .zip(v.par_iter())
            .for_each(|(o, &vi)| *o = vi - theta * *o);
    };
    op(x, &mut ax);
    let mut r: Vec<T> = rhs.iter().zip(&ax).map(|(b, a)| *b - *a).collect();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let bnorm = dot(rhs, rhs).sqrt();
    if bnorm == T::zero() {
        x.iter_mut().for_each(|v| *v = T::zero());
        return Ok(());
    }
    let target = rel_tol * bnorm;
    for _ in 0..2000 {
        if rr.sqrt() <= target {
            return Ok(());
        }
        op(&p, &mut ax);
        let alpha = rr / dot(&p, &ax);
        x.par_iter_mut()
            .zip(p.par_iter())
            .for_each(|(xi, &pi)| *xi += alpha * pi);
        r.par_iter_mut()
            .zip(ax.par_iter())
            .for_each(|(ri, &ai)| *ri -= alpha * ai);
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        p.par_iter_mut()
            .zip(r.par_iter())
            .for_each(|(pi, &ri)| *pi = ri + beta * *pi);
    }
    Err(HeatError::NonConvergence(format!(
        "conjugate gradients stalled at relative residual {:e}",
        (rr.sqrt() / bnorm).as_f64()
    )))
}

/// Time-stepping controls.
#[derive(Debug, Clone, Copy)]
pub struct MarchSettings<T> {
    /// Largest step.
    pub dt_max: T,
    /// Replace the first step by two backward-Euler half steps (rough data).
    pub rough_start: bool,
    pub cg_tol: T,
}

/// Evolves u₀ from `t0` through the increasing `times`, returning the state
/// at each. Segments use equal Crank–Nicolson steps no larger than dt_max.
pub fn march<T: Real>(
    gen: &Generator<T>,
    u0: &[T],
    t0: T,
    times: &[T],
    settings: MarchSettings<T>,
) -> Result<Vec<Vec<T>>, HeatError> {
    let n = u0.len();
    let mut u = u0.to_vec();
    let mut next = u.clone();
    let mut lu = vec![T::zero(); n];
    let mut rhs = vec![T::zero(); n];
    let mut now = t0;
    let mut first = settings.rough_start;
    let half = T::lit(0.5);
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        if target < now {
            return Err(HeatError::Unsupported("march times must increase".into()));
        }
        let span = target - now;
        if span > T::zero() {
            let steps = (span / settings.dt_max).ceil().to_usize().unwrap_or(1).max(1);
            let dt = span / T::from_count(steps);
            for _ in 0..steps {
                if first {
                    for _ in 0..2 {
                        solve(gen, dt * half, &u, &mut next, settings.cg_tol)?;
                        std::mem::swap(&mut u, &mut next);
                    }
                    first = false;
                } else {
                    gen.apply(&u, &mut lu);
                    rhs.par_iter_mut()
                        .zip(u.par_iter().zip(lu.par_iter()))
                        .for_each(|(r, (&ui, &li))| *r = ui + dt * half * li);
                    next.copy_from_slice(&u);
                    solve(gen, dt * half, &rhs, &mut next, settings.cg_tol)?;
                    std::mem::swap(&mut u, &mut next);
                }
            }
        }
        now = target;
        out.push(u.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_generator_is_the_laplacian() {
        let g = GroupSpec::<f64>::euclidean(2);
        let grid = Grid::cube(2, 0.05, 64).unwrap();
        let gen = Generator::new(&g, &grid).unwrap();
        let v: Vec<f64> = (0..grid.len())
            .map(|i| {
                let p = grid.point(i);
                (-(p[0] * p[0] + p[1] * p[1]) * 4.0).exp()
            })
            .collect();
        let mut out = vec![0.0; v.len()];
        gen.apply(&v, &mut out);
        let i = grid.flat(&[32, 35]);
        let p = grid.point(i);
        let r2 = p[0] * p[0] + p[1] * p[1];
        let exact = (64.0 * r2 - 16.0) * (-4.0 * r2).exp();
        assert!((out[i] - exact).abs() < 1e-3, "{} {exact}", out[i]);
    }

    #[test]
    fn heisenberg_generator_on_polynomials() {
        // L = ∂x² + ∂y² + (r²/4)∂u² + (x∂y − y∂x)∂u applied to x²u + yu²
        let g = GroupSpec::<f64>::heisenberg();
        let grid = Grid::cube(3, 0.1, 16).unwrap();
        let gen = Generator::new(&g, &grid).unwrap();
        let f = |p: &[f64]| p[0] * p[0] * p[2] + p[1] * p[2] * p[2];
        let v: Vec<f64> = (0..grid.len()).map(|i| f(&grid.point(i))).collect();
        let mut out = vec![0.0; v.len()];
        gen.apply(&v, &mut out);
        let exact = |p: &[f64]| {
            let (x, y, u) = (p[0], p[1], p[2]);
            let lap = 2.0 * u;
            let uu = (x * x + y * y) / 4.0 * 2.0 * y;
            let mixed = x * (2.0 * u) - y * (2.0 * x);
            lap + uu + mixed
        };
        let i = grid.flat(&[8, 7, 9]);
        assert!((out[i] - exact(&grid.point(i))).abs() < 1e-10);
    }

    #[test]
    fn crank_nicolson_on_a_gaussian() {
        let g = GroupSpec::<f64>::euclidean(1);
        let grid = Grid::cube(1, 0.02, 1024).unwrap();
        let gen = Generator::new(&g, &grid).unwrap();
        let u0: Vec<f64> = (0..grid.len())
            .map(|i| {
                let x = grid.point(i)[0];
                (-x * x).exp()
            })
            .collect();
        let s = MarchSettings {
            dt_max: 0.001,
            rough_start: false,
            cg_tol: 1e-12,
        };
        let out = march(&gen, &u0, 0.0, &[0.25, 0.5], s).unwrap();
        for (t, u) in [0.25, 0.5].iter().zip(&out) {
            let err = (0..grid.len())
                .map(|i| {
                    let x = grid.point(i)[0];
                    (u[i] - (-x * x / (1.0 + 4.0 * t)).exp() / (1.0 + 4.0 * t).sqrt()).abs()
                })
                .fold(0.0, f64::max);
            assert!(err < 1e-6, "{err}");
        }
    }
}
