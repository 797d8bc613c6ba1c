//! Compactly supported scalar fields sampled on uniform grids over a group
//! chart: Lᵖ norms, right translation, second differences, left-invariant
//! derivatives and group convolution.

pub mod grid;
pub mod interp;
pub mod io;

use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::group::{GroupError, GroupSpec, Point};
use crate::scalar::Real;
use crate::spectral;

pub use grid::{Axis, Grid};

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("grid has {grid} axes, group has dimension {group}")]
    DimensionMismatch { grid: usize, group: usize },
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("fields live on different groups or grids")]
    Mismatch,
    #[error("non-finite value at node {0}")]
    NonFinite(usize),
    #[error("nonzero value {value:e} at node {node} inside the {margin}-layer support margin")]
    SupportViolation { node: usize, value: f64, margin: usize },
    #[error("support overflow: {0}")]
    SupportOverflow(String),
    #[error("Lebesgue exponent must be ≥ 1, got {0}")]
    BadExponent(f64),
    #[error("vector field index {index} out of range for dimension {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("field file: {0}")]
    Format(String),
}

/// Scalar field on a grid over the chart of `group`. Values in the outer
/// `margin` layers are exactly zero.
#[derive(Debug, Clone)]
pub struct SampledField<T> {
    group: Arc<GroupSpec<T>>,
    grid: Grid<T>,
    values: Vec<T>,
    margin: usize,
}

impl<T: Real> SampledField<T> {
    pub fn new(group: Arc<GroupSpec<T>>, grid: Grid<T>, values: Vec<T>, margin: usize) -> Result<Self, FieldError> {
        if grid.dim() != group.dim() {
            return Err(FieldError::DimensionMismatch {
                grid: grid.dim(),
                group: group.dim(),
            });
        }
        if values.len() != grid.len() {
            return Err(FieldError::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(FieldError::NonFinite(i));
        }
        if margin > 0 {
            let mut idx = vec![0; grid.dim()];
            for (i, v) in values.iter().enumerate() {
                if *v != T::zero() {
                    grid.unravel(i, &mut idx);
                    if grid.in_margin(&idx, margin) {
                        return Err(FieldError::SupportViolation {
                            node: i,
                            value: v.as_f64(),
                            margin,
                        });
                    }
                }
            }
        }
        Ok(Self {
            group,
            grid,
            values,
            margin,
        })
    }

    /// Samples `f` at every node; fails if `f` is nonzero inside the margin.
    pub fn from_fn<F>(group: Arc<GroupSpec<T>>, grid: Grid<T>, margin: usize, f: F) -> Result<Self, FieldError>
    where
        F: Fn(&[T]) -> T + Sync,
    {
        let values = sample(&grid, f);
        Self::new(group, grid, values, margin)
    }

    /// Samples `f` and zeroes the margin layers (for Schwartz data whose
    /// tails are below the precision of interest).
    pub fn from_fn_truncated<F>(
        group: Arc<GroupSpec<T>>,
        grid: Grid<T>,
        margin: usize,
        f: F,
    ) -> Result<Self, FieldError>
    where
        F: Fn(&[T]) -> T + Sync,
    {
        let mut values = sample(&grid, f);
        let mut idx = vec![0; grid.dim()];
        for (i, v) in values.iter_mut().enumerate() {
            grid.unravel(i, &mut idx);
            if grid.in_margin(&idx, margin) {
                *v = T::zero();
            }
        }
        Self::new(group, grid, values, margin)
    }

    pub fn zeros(group: Arc<GroupSpec<T>>, grid: Grid<T>, margin: usize) -> Result<Self, FieldError> {
        let n = grid.len();
        Self::new(group, grid, vec![T::zero(); n], margin)
    }

    pub fn group(&self) -> &Arc<GroupSpec<T>> {
        &self.group
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn margin(&self) -> usize {
        self.margin
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    /// Same group and grid, new values.
    pub fn with_values(&self, values: Vec<T>, margin: usize) -> Result<Self, FieldError> {
        Self::new(self.group.clone(), self.grid.clone(), values, margin)
    }

    pub fn same_layout(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.group, &other.group) || self.group == other.group) && self.grid == other.grid
    }

    pub fn map<F: Fn(T) -> T>(&self, f: F) -> Self {
        let values = self.values.iter().map(|&v| f(v)).collect();
        Self { values, ..self.clone() }
    }

    /// self + c·other.
    pub fn add_scaled(&self, other: &Self, c: T) -> Result<Self, FieldError> {
        if !self.same_layout(other) {
            return Err(FieldError::Mismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| a + c * b)
            .collect();
        self.with_values(values, self.margin.min(other.margin))
    }

    /// Interpolated value at an arbitrary chart point (zero off the grid).
    pub fn eval(&self, x: &[T]) -> T {
        interp::eval(&self.grid, &self.values, x)
    }

    pub fn integral(&self) -> T {
        self.values.iter().copied().sum::<T>() * self.grid.cell_volume()
    }

    /// (Σ|f|ᵖ·cell)^{1/p}; `p = ∞` gives the sup norm.
    pub fn lp_norm(&self, p: T) -> Result<T, FieldError> {
        if !(p >= T::one()) {
            return Err(FieldError::BadExponent(p.as_f64()));
        }
        if p.is_infinite() {
            return Ok(self.sup_norm());
        }
        Ok(lp_of(&self.values, p, self.grid.cell_volume()))
    }

    pub fn sup_norm(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Index ranges [lo, hi] per axis of the nonzero values.
    pub fn support_box(&self) -> Option<(Vec<usize>, Vec<usize>)> {
        let n = self.grid.dim();
        let mut lo = vec![usize::MAX; n];
        let mut hi = vec![0; n];
        let mut idx = vec![0; n];
        let mut any = false;
        for (i, v) in self.values.iter().enumerate() {
            if *v != T::zero() {
                any = true;
                self.grid.unravel(i, &mut idx);
                for k in 0..n {
                    lo[k] = lo[k].min(idx[k]);
                    hi[k] = hi[k].max(idx[k]);
                }
            }
        }
        any.then_some((lo, hi))
    }

    /// Sample points of the support box widened by `pad` nodes: a lattice
    /// with 5 points per axis including the corners.
    fn support_lattice(&self, pad: usize) -> Vec<Vec<T>> {
        let Some((lo, hi)) = self.support_box() else {
            return Vec::new();
        };
        let n = self.grid.dim();
        let axes = self.grid.axes();
        let ends: Vec<(T, T)> = (0..n)
            .map(|k| {
                let a = &axes[k];
                let p = T::from_count(pad);
                (a.coord(lo[k]) - p * a.spacing, a.coord(hi[k]) + p * a.spacing)
            })
            .collect();
        let per = 5usize;
        let mut out = Vec::with_capacity(per.pow(n as u32));
        for combo in 0..per.pow(n as u32) {
            let mut c = combo;
            let mut x = vec![T::zero(); n];
            for k in 0..n {
                let s = T::from_count(c % per) / T::from_count(per - 1);
                c /= per;
                x[k] = ends[k].0 + s * (ends[k].1 - ends[k].0);
            }
            out.push(x);
        }
        out
    }

    fn inside_interior(&self, x: &[T]) -> bool {
        let m = T::from_count(self.margin);
        x.iter().zip(self.grid.axes()).all(|(&c, a)| {
            let lo = a.origin + m * a.spacing;
            let hi = a.last() - m * a.spacing;
            c >= lo && c <= hi
        })
    }

    /// x ↦ f(x·y) by cubic interpolation.
    ///
    /// The support check maps a lattice over the (stencil-widened) support
    /// box through z ↦ z·y⁻¹; it is exact when the law is affine in z for
    /// fixed y, which holds for both built-in groups.
    pub fn translate_sample(&self, y: &Point<T>) -> Result<Self, FieldError> {
        let g = &self.group;
        if y.dim() != g.dim() {
            return Err(GroupError::DimensionMismatch {
                expected: g.dim(),
                got: y.dim(),
            }
            .into());
        }
        if y.is_origin() {
            return Ok(self.clone());
        }
        let yinv = g.inverse(y)?;
        let mut img = vec![T::zero(); g.dim()];
        for z in self.support_lattice(2) {
            g.mul_into(&z, &yinv, &mut img);
            if !self.inside_interior(&img) {
                return Err(FieldError::SupportOverflow(format!(
                    "translation by {:?} moves support point {:?} to {:?}, outside the {}-layer interior",
                    &y[..],
                    z,
                    img,
                    self.margin
                )));
            }
        }
        let values = self.map_nodes(|x, buf| {
            g.mul_into(x, y, buf);
            self.eval(buf)
        });
        self.with_values(values, self.margin)
    }

    /// Δ²_y f(x) = f(x·y) + f(x·y⁻¹) − 2f(x).
    pub fn second_difference(&self, y: &Point<T>) -> Result<Self, FieldError> {
        let plus = self.translate_sample(y)?;
        let minus = self.translate_sample(&self.group.inverse(y)?)?;
        let two = T::lit(2.0);
        let values = plus
            .values
            .iter()
            .zip(&minus.values)
            .zip(&self.values)
            .map(|((&a, &b), &c)| a + b - two * c)
            .collect();
        self.with_values(values, self.margin)
    }

    /// X_j f = Σ_k a_k^{(j)}(x) ∂_k f with fourth-order central stencils
    /// (0-based `j`). The margin shrinks by two layers.
    pub fn apply_vf(&self, j: usize) -> Result<Self, FieldError> {
        let n = self.group.dim();
        if j >= n {
            return Err(FieldError::IndexOutOfRange { index: j, n });
        }
        let g = &self.group;
        let strides = self.grid.strides();
        let axes = self.grid.axes();
        let coordinate = g.field_is_coordinate(j);
        let twelve = T::lit(12.0);
        let eight = T::lit(8.0);
        let values: Vec<T> = (0..self.values.len())
            .into_par_iter()
            .map_init(
                || (vec![0usize; n], vec![T::zero(); n], vec![T::zero(); n]),
                |(idx, x, row), flat| {
                    self.grid.unravel(flat, idx);
                    let mut acc = T::zero();
                    if coordinate {
                        row.iter_mut().for_each(|r| *r = T::zero());
                        row[j] = T::one();
                    } else {
                        self.grid.coords_of(flat, x);
                        g.vf_row_into(j, x, row);
                    }
                    for k in j..n {
                        let a = row[k];
                        if a == T::zero() {
                            continue;
                        }
                        let at = |off: isize| -> T {
                            let i = idx[k] as isize + off;
                            if i < 0 || i as usize >= axes[k].count {
                                T::zero()
                            } else {
                                self.values[(flat as isize + off * strides[k] as isize) as usize]
                            }
                        };
                        let d = (at(-2) - eight * at(-1) + eight * at(1) - at(2)) / (twelve * axes[k].spacing);
                        acc += a * d;
                    }
                    acc
                },
            )
            .collect();
        self.with_values(values, self.margin.saturating_sub(2))
    }

    /// (f*k)(x) = ∫ f(y) k(y⁻¹·x) dy on the grid of `self`.
    ///
    /// Abelian groups: FFT linear convolution, which needs equal spacings
    /// and a kernel origin on the spacing lattice. Otherwise direct
    /// quadrature over the support of `self` with `k` interpolated.
    pub fn group_convolve(&self, k: &Self) -> Result<Self, FieldError> {
        let g = &self.group;
        if !(Arc::ptr_eq(g, &k.group) || **g == *k.group) {
            return Err(FieldError::Mismatch);
        }
        let (fb, kb) = (self.support_lattice(0), k.support_lattice(0));
        if fb.is_empty() || kb.is_empty() {
            return self.with_values(vec![T::zero(); self.values.len()], self.margin);
        }
        let mut img = vec![T::zero(); g.dim()];
        for y in &fb {
            for z in &kb {
                g.mul_into(y, z, &mut img);
                if !self.inside_interior(&img) {
                    return Err(FieldError::SupportOverflow(format!(
                        "convolution support reaches {img:?}, outside the {}-layer interior",
                        self.margin
                    )));
                }
            }
        }
        if g.is_abelian() {
            self.convolve_fft(k)
        } else {
            self.convolve_direct(k)
        }
    }

    fn convolve_fft(&self, k: &Self) -> Result<Self, FieldError> {
        let n = self.grid.dim();
        let mut shift = Vec::with_capacity(n);
        for (a, b) in self.grid.axes().iter().zip(k.grid.axes()) {
            let tol = T::lit(1e-9) * a.spacing;
            if (a.spacing - b.spacing).abs() > tol {
                return Err(FieldError::Mismatch);
            }
            let s = b.origin / a.spacing;
            if (s - s.round()).abs() > T::lit(1e-9) {
                return Err(FieldError::Mismatch);
            }
            shift.push(s.round().to_isize().unwrap());
        }
        let full = spectral::linear_convolution(&self.values, &self.grid.shape(), &k.values, &k.grid.shape());
        let full_shape: Vec<usize> = self
            .grid
            .shape()
            .iter()
            .zip(k.grid.shape().iter())
            .map(|(a, b)| a + b - 1)
            .collect();
        let cell = self.grid.cell_volume();
        let mut idx = vec![0usize; n];
        let values = (0..self.values.len())
            .map(|flat| {
                self.grid.unravel(flat, &mut idx);
                let mut off = 0usize;
                for d in 0..n {
                    let l = idx[d] as isize - shift[d];
                    if l < 0 || l as usize >= full_shape[d] {
                        return T::zero();
                    }
                    off = off * full_shape[d] + l as usize;
                }
                full[off] * cell
            })
            .collect();
        let mut out = self.with_values(values, 0)?;
        out.zero_margin(self.margin);
        Ok(out)
    }

    fn convolve_direct(&self, k: &Self) -> Result<Self, FieldError> {
        let g = &self.group;
        let n = g.dim();
        let support: Vec<(Vec<T>, T)> = self
            .values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != T::zero())
            .map(|(i, &v)| (self.grid.point(i), v))
            .collect();
        let kbox: Vec<(T, T)> = match k.support_box() {
            Some((lo, hi)) => k
                .grid
                .axes()
                .iter()
                .enumerate()
                .map(|(d, a)| {
                    (
                        a.coord(lo[d]) - a.spacing * T::lit(2.0),
                        a.coord(hi[d]) + a.spacing * T::lit(2.0),
                    )
                })
                .collect(),
            None => unreachable!("checked nonempty"),
        };
        let cell = self.grid.cell_volume();
        let mut values = self.map_nodes(|x, buf| {
            let mut acc = T::zero();
            let mut yinv = vec![T::zero(); n];
            for (y, fy) in &support {
                g.inv_into(y, &mut yinv);
                g.mul_into(&yinv, x, buf);
                if buf.iter().zip(&kbox).all(|(c, (lo, hi))| *c >= *lo && *c <= *hi) {
                    acc += *fy * k.eval(buf);
                }
            }
            acc * cell
        });
        let mut idx = vec![0; n];
        for (i, v) in values.iter_mut().enumerate() {
            self.grid.unravel(i, &mut idx);
            if self.grid.in_margin(&idx, self.margin) {
                *v = T::zero();
            }
        }
        self.with_values(values, self.margin)
    }

    /// Sets the outer `margin` layers to zero and records the margin.
    pub fn zero_margin(&mut self, margin: usize) {
        let mut idx = vec![0; self.grid.dim()];
        for (i, v) in self.values.iter_mut().enumerate() {
            self.grid.unravel(i, &mut idx);
            if self.grid.in_margin(&idx, margin) {
                *v = T::zero();
            }
        }
        self.margin = margin;
    }

    /// Parallel map over nodes with a per-thread scratch buffer.
    fn map_nodes<F>(&self, f: F) -> Vec<T>
    where
        F: Fn(&[T], &mut [T]) -> T + Sync,
    {
        let n = self.grid.dim();
        (0..self.values.len())
            .into_par_iter()
            .map_init(
                || (vec![T::zero(); n], vec![T::zero(); n]),
                |(x, buf), flat| {
                    self.grid.coords_of(flat, x);
                    f(x, buf)
                },
            )
            .collect()
    }
}

fn sample<T: Real, F: Fn(&[T]) -> T + Sync>(grid: &Grid<T>, f: F) -> Vec<T> {
    let n = grid.dim();
    (0..grid.len())
        .into_par_iter()
        .map_init(
            || vec![T::zero(); n],
            |x, i| {
                grid.coords_of(i, x);
                f(x)
            },
        )
        .collect()
}

/// (Σ|v|ᵖ·cell)^{1/p}, summed sequentially.
pub fn lp_of<T: Real>(values: &[T], p: T, cell: T) -> T {
    if p == T::one() {
        return values.iter().map(|v| v.abs()).sum::<T>() * cell;
    }
    if p == T::lit(2.0) {
        return (values.iter().map(|v| *v * *v).sum::<T>() * cell).sqrt();
    }
    // scale by the max to avoid overflow for large p
    let m = values.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    if m == T::zero() {
        return T::zero();
    }
    let s: T = values.iter().map(|v| (v.abs() / m).powf(p)).sum();
    m * (s * cell).powf(T::one() / p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r1(count: usize, h: f64) -> (Arc<GroupSpec<f64>>, Grid<f64>) {
        (Arc::new(GroupSpec::euclidean(1)), Grid::cube(1, h, count).unwrap())
    }

    fn h1(count: usize, h: f64) -> (Arc<GroupSpec<f64>>, Grid<f64>) {
        (Arc::new(GroupSpec::heisenberg()), Grid::cube(3, h, count).unwrap())
    }

    fn bump(r2: f64) -> f64 {
        if r2 < 1.0 {
            (-1.0 / (1.0 - r2)).exp()
        } else {
            0.0
        }
    }

    #[test]
    fn norms() {
        let (g, grid) = r1(4096, 0.01);
        let z = SampledField::zeros(g.clone(), grid.clone(), 4).unwrap();
        assert_eq!(z.lp_norm(2.0).unwrap(), 0.0);
        let gauss = SampledField::from_fn_truncated(g.clone(), grid.clone(), 4, |x| (-x[0] * x[0]).exp()).unwrap();
        let want = (std::f64::consts::PI / 2.0).powf(0.25);
        assert!((gauss.lp_norm(2.0).unwrap() - want).abs() < 1e-6);
        // plateau of measure 1 (nodes at −0.5 … 0.49)
        let plateau =
            SampledField::from_fn(g, grid, 4, |x| if x[0] >= -0.5 && x[0] < 0.495 { 1.0 } else { 0.0 }).unwrap();
        for p in [1.0, 1.5, 3.0] {
            assert!((plateau.lp_norm(p).unwrap() - 1.0).abs() < 1e-9);
        }
        let c = plateau.map(|v| -3.0 * v);
        assert!((c.lp_norm(1.5).unwrap() - 3.0 * plateau.lp_norm(1.5).unwrap()).abs() < 1e-12);
        assert!(matches!(plateau.lp_norm(0.5), Err(FieldError::BadExponent(_))));
    }

    #[test]
    fn margin_contract() {
        let (g, grid) = r1(16, 0.1);
        let e = SampledField::from_fn(g, grid, 2, |_| 1.0).unwrap_err();
        assert!(matches!(e, FieldError::SupportViolation { .. }));
    }

    #[test]
    fn translation_on_the_line() {
        let (g, grid) = r1(1024, 0.01);
        let cut = |x: f64, v: f64| if x.abs() < 3.0 { v } else { 0.0 };
        let f = SampledField::from_fn(g, grid, 8, |x| cut(x[0], (-(x[0] * x[0]) / 0.25).exp())).unwrap();
        let h = 0.01;
        let t = f.translate_sample(&Point::new(&[h])).unwrap();
        let exact = SampledField::from_fn(f.group().clone(), f.grid().clone(), 8, |x| {
            cut(x[0] + h, (-((x[0] + h) * (x[0] + h)) / 0.25).exp())
        })
        .unwrap();
        let err = t.add_scaled(&exact, -1.0).unwrap().sup_norm();
        assert!(err < 1e-12, "{err}");
        let off = f.translate_sample(&Point::new(&[0.0037])).unwrap();
        let exact = SampledField::from_fn(f.group().clone(), f.grid().clone(), 8, |x| {
            cut(x[0] + 0.0037, (-((x[0] + 0.0037).powi(2)) / 0.25).exp())
        })
        .unwrap();
        assert!(off.add_scaled(&exact, -1.0).unwrap().sup_norm() < 1e-6);
        assert_eq!(f.translate_sample(&Point::new(&[0.0])).unwrap().values(), f.values());
        assert!(matches!(
            f.translate_sample(&Point::new(&[9.0])),
            Err(FieldError::SupportOverflow(_))
        ));
    }

    #[test]
    fn second_difference_of_quadratic() {
        let (g, grid) = r1(256, 0.01);
        // x² on a plateau |x| < 0.5, smoothly cut off outside
        let f = SampledField::from_fn(g, grid, 8, |x| {
            let a = x[0].abs();
            if a < 0.5 {
                x[0] * x[0]
            } else if a < 1.0 {
                x[0] * x[0] * bump_step((a - 0.5) / 0.5)
            } else {
                0.0
            }
        })
        .unwrap();
        let h = 0.01;
        let d = f.second_difference(&Point::new(&[h])).unwrap();
        for (i, v) in d.values().iter().enumerate() {
            let x = d.grid().point(i)[0];
            if x.abs() < 0.45 {
                assert!((v - 2.0 * h * h).abs() < 1e-15);
            }
        }
        let zero = f.second_difference(&Point::new(&[0.0])).unwrap();
        assert!(zero.sup_norm() == 0.0);
    }

    fn bump_step(s: f64) -> f64 {
        // 1 at s = 0, 0 at s = 1, smooth
        let a = bump_raw(1.0 - s);
        a / (a + bump_raw(s))
    }

    fn bump_raw(s: f64) -> f64 {
        if s <= 0.0 {
            0.0
        } else {
            (-1.0 / s).exp()
        }
    }

    #[test]
    fn heisenberg_translation_is_haar_invariant() {
        let (g, grid) = h1(48, 0.1);
        let f = SampledField::from_fn(g, grid, 3, |x| {
            bump((x[0] * x[0] + x[1] * x[1]) / 1.0 + x[2] * x[2] / 1.2)
        })
        .unwrap();
        let n0 = f.lp_norm(2.0).unwrap();
        let t = f.translate_sample(&Point::new(&[0.3, -0.2, 0.25])).unwrap();
        assert!((t.lp_norm(2.0).unwrap() / n0 - 1.0).abs() < 1e-3);
        // Δ² is symmetric in y ↔ y⁻¹
        let y = Point::new(&[0.2, 0.1, -0.3]);
        let yi = f.group().inverse(&y).unwrap();
        let a = f.second_difference(&y).unwrap();
        let b = f.second_difference(&yi).unwrap();
        assert!(a.add_scaled(&b, -1.0).unwrap().sup_norm() < 1e-14);
    }

    #[test]
    fn vector_fields() {
        let (g, grid) = r1(2048, 2.0 / 2048.0);
        let f = SampledField::from_fn(g, grid, 8, |x| {
            let s = (3.0 * x[0]).sin();
            s * bump(x[0] * x[0] / 0.8)
        })
        .unwrap();
        let d = f.apply_vf(0).unwrap();
        let fd = |x: f64| {
            let b = bump(x * x / 0.8);
            if b == 0.0 {
                return 0.0;
            }
            let r2 = x * x / 0.8;
            let db = b * (-2.0 * x / 0.8) / (1.0 - r2).powi(2);
            3.0 * (3.0 * x).cos() * b + (3.0 * x).sin() * db
        };
        let err = d
            .values()
            .iter()
            .enumerate()
            .map(|(i, v)| (v - fd(d.grid().point(i)[0])).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "{err}");
        assert!(matches!(f.apply_vf(1), Err(FieldError::IndexOutOfRange { .. })));

        // H¹: X₁u = −y/2 and X₂u = x/2 where f = u on a window plateau
        let (g, grid) = h1(24, 0.25);
        let f = SampledField::from_fn(g, grid, 3, |x| {
            let w = x
                .iter()
                .map(|c| bump_step(((c.abs() - 1.0) / 1.2).clamp(0.0, 1.0)))
                .product::<f64>();
            x[2] * w
        })
        .unwrap();
        let x1 = f.apply_vf(0).unwrap();
        let x2 = f.apply_vf(1).unwrap();
        for i in 0..f.values().len() {
            let p = f.grid().point(i);
            if p.iter().all(|c| c.abs() < 0.51) {
                assert!((x1.values()[i] + p[1] / 2.0).abs() < 1e-12);
                assert!((x2.values()[i] - p[0] / 2.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn convolution_of_gaussians() {
        let (g, grid) = r1(2048, 0.01);
        let gauss = |v: f64| {
            move |x: &[f64]| {
                if x[0].abs() > 4.5 {
                    return 0.0;
                }
                (-x[0] * x[0] / (2.0 * v)).exp() / (2.0 * std::f64::consts::PI * v).sqrt()
            }
        };
        let f = SampledField::from_fn(g.clone(), grid.clone(), 8, gauss(0.5)).unwrap();
        let k = SampledField::from_fn(g.clone(), Grid::cube(1, 0.01, 1024).unwrap(), 8, gauss(0.3)).unwrap();
        let c = f.group_convolve(&k).unwrap();
        let want = SampledField::from_fn_truncated(g, grid, 8, gauss(0.8)).unwrap();
        let err = c.add_scaled(&want, -1.0).unwrap().sup_norm();
        assert!(err < 1e-5, "{err}");
    }

    #[test]
    fn direct_convolution_on_heisenberg_with_delta() {
        let (g, grid) = h1(20, 0.2);
        let f = SampledField::from_fn(g.clone(), grid.clone(), 3, |x| {
            bump((x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / 0.8)
        })
        .unwrap();
        // normalized grid delta at the identity
        let mut dv = vec![0.0; grid.len()];
        let mid = grid.flat(&[10, 10, 10]);
        dv[mid] = 1.0 / grid.cell_volume();
        let delta = SampledField::new(g, grid, dv, 3).unwrap();
        let c = f.group_convolve(&delta).unwrap();
        assert!(c.add_scaled(&f, -1.0).unwrap().sup_norm() < 1e-12);
    }
}
