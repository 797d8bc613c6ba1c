//! Uniform tensor grids over a coordinate chart. Flat indices are row-major
//! with the last axis fastest.

use std::fmt;

use smallvec::SmallVec;

use super::FieldError;
use crate::scalar::Real;

/// Minimum node count per axis.
pub const MIN_COUNT: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis<T> {
    pub origin: T,
    pub spacing: T,
    pub count: usize,
}

impl<T: Real> Axis<T> {
    pub fn new(origin: T, spacing: T, count: usize) -> Result<Self, FieldError> {
        if !(spacing > T::zero()) || !spacing.is_finite() || !origin.is_finite() {
            return Err(FieldError::Grid(format!(
                "spacing must be positive and finite, got {spacing}"
            )));
        }
        if count < MIN_COUNT {
            return Err(FieldError::Grid(format!(
                "need at least {MIN_COUNT} nodes per axis, got {count}"
            )));
        }
        Ok(Self { origin, spacing, count })
    }

    /// Nodes −(count/2)·h, …, with a node at 0 (index count/2).
    pub fn centered(spacing: T, count: usize) -> Result<Self, FieldError> {
        Self::new(-spacing * T::from_count(count / 2), spacing, count)
    }

    /// Nodes symmetric about 0 spanning [−half_width, half_width].
    pub fn symmetric(half_width: T, count: usize) -> Result<Self, FieldError> {
        let h = (half_width + half_width) / T::from_count(count.max(2) - 1);
        Self::new(-half_width, h, count)
    }

    #[inline]
    pub fn coord(&self, i: usize) -> T {
        self.origin + self.spacing * T::from_count(i)
    }

    pub fn last(&self) -> T {
        self.coord(self.count - 1)
    }

    /// Fractional index of a coordinate.
    #[inline]
    pub fn position(&self, x: T) -> T {
        (x - self.origin) / self.spacing
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    axes: SmallVec<[Axis<T>; 3]>,
}

impl<T: Real> Grid<T> {
    pub fn new(axes: Vec<Axis<T>>) -> Result<Self, FieldError> {
        if axes.is_empty() {
            return Err(FieldError::Grid("grid needs at least one axis".into()));
        }
        for a in &axes {
            Axis::new(a.origin, a.spacing, a.count)?;
        }
        Ok(Self {
            axes: SmallVec::from_vec(axes),
        })
    }

    /// `dim` identical centered axes.
    pub fn cube(dim: usize, spacing: T, count: usize) -> Result<Self, FieldError> {
        Self::new(vec![Axis::centered(spacing, count)?; dim])
    }

    pub fn axes(&self) -> &[Axis<T>] {
        &self.axes
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn shape(&self) -> SmallVec<[usize; 3]> {
        self.axes.iter().map(|a| a.count).collect()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> T {
        self.axes.iter().map(|a| a.spacing).fold(T::one(), |a, b| a * b)
    }

    pub fn strides(&self) -> SmallVec<[usize; 3]> {
        let mut s: SmallVec<[usize; 3]> = SmallVec::from_elem(1, self.dim());
        for k in (0..self.dim().saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.axes[k + 1].count;
        }
        s
    }

    #[inline]
    pub fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.axes).fold(0, |acc, (&i, a)| acc * a.count + i)
    }

    #[inline]
    pub fn unravel(&self, mut flat: usize, idx: &mut [usize]) {
        for k in (0..self.dim()).rev() {
            let c = self.axes[k].count;
            idx[k] = flat % c;
            flat /= c;
        }
    }

    #[inline]
    pub fn coords_of(&self, flat: usize, out: &mut [T]) {
        let mut f = flat;
        for k in (0..self.dim()).rev() {
            let a = &self.axes[k];
            out[k] = a.coord(f % a.count);
            f /= a.count;
        }
    }

    pub fn point(&self, flat: usize) -> Vec<T> {
        let mut v = vec![T::zero(); self.dim()];
        self.coords_of(flat, &mut v);
        v
    }

    /// Whether the node lies within `margin` layers of the boundary.
    #[inline]
    pub fn in_margin(&self, idx: &[usize], margin: usize) -> bool {
        idx.iter()
            .zip(&self.axes)
            .any(|(&i, a)| i < margin || i + margin >= a.count)
    }

    /// Same extent with every spacing halved (counts 2n − 1).
    pub fn refined(&self) -> Self {
        Self {
            axes: self
                .axes
                .iter()
                .map(|a| Axis {
                    origin: a.origin,
                    spacing: a.spacing / T::lit(2.0),
                    count: 2 * a.count - 1,
                })
                .collect(),
        }
    }

    /// Every other node: spacing doubled, counts ⌈n/2⌉.
    pub fn coarsened(&self) -> Self {
        Self {
            axes: self
                .axes
                .iter()
                .map(|a| Axis {
                    origin: a.origin,
                    spacing: a.spacing * T::lit(2.0),
                    count: a.count.div_ceil(2),
                })
                .collect(),
        }
    }

    /// Compact form `origin:spacing:count` per axis, comma separated.
    pub fn spec(&self) -> String {
        self.axes
            .iter()
            .map(|a| format!("{}:{}:{}", a.origin.as_f64(), a.spacing.as_f64(), a.count))
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn parse_spec(s: &str) -> Result<Self, FieldError> {
        let axes = s
            .split(',')
            .map(|part| {
                let bits: Vec<&str> = part.trim().split(':').collect();
                let bad = || FieldError::Grid(format!("bad axis spec `{part}` (want origin:spacing:count)"));
                if bits.len() != 3 {
                    return Err(bad());
                }
                let o: f64 = bits[0].parse().map_err(|_| bad())?;
                let h: f64 = bits[1].parse().map_err(|_| bad())?;
                let n: usize = bits[2].parse().map_err(|_| bad())?;
                Axis::new(T::lit(o), T::lit(h), n)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(axes)
    }
}

impl<T: Real> fmt::Display for Grid<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.spec())
    }
}
