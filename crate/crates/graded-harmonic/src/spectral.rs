//! Multidimensional FFTs on zero-padded grids: Fourier multipliers m(|ξ|²)
//! and linear convolution.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::field::{Axis, Grid, SampledField};
use crate::scalar::Real;

/// Separable n-dimensional complex FFT over a row-major array.
pub struct FftNd<T: Real> {
    shape: Vec<usize>,
    forward: Vec<Arc<dyn Fft<T>>>,
    inverse: Vec<Arc<dyn Fft<T>>>,
}

impl<T: Real> FftNd<T> {
    pub fn new(shape: &[usize]) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            shape: shape.to_vec(),
            forward: shape.iter().map(|&n| planner.plan_fft_forward(n)).collect(),
            inverse: shape.iter().map(|&n| planner.plan_fft_inverse(n)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn forward(&self, buf: &mut [Complex<T>]) {
        self.run(buf, &self.forward);
    }

    /// Inverse transform including the 1/N normalization.
    pub fn inverse(&self, buf: &mut [Complex<T>]) {
        self.run(buf, &self.inverse);
        let s = T::one() / T::from_count(self.len());
        buf.iter_mut().for_each(|c| *c = *c * s);
    }

    fn run(&self, buf: &mut [Complex<T>], plans: &[Arc<dyn Fft<T>>]) {
        assert_eq!(buf.len(), self.len());
        let d = self.shape.len();
        let mut inner = 1usize;
        for axis in (0..d).rev() {
            let n = self.shape[axis];
            let plan = &plans[axis];
            if axis == d - 1 {
                plan.process(buf);
            } else {
                let outer = self.len() / (n * inner);
                let mut line = vec![Complex::new(T::zero(), T::zero()); n];
                for o in 0..outer {
                    for i in 0..inner {
                        let base = o * n * inner + i;
                        for (k, c) in line.iter_mut().enumerate() {
                            *c = buf[base + k * inner];
                        }
                        plan.process(&mut line);
                        for (k, c) in line.iter().enumerate() {
                            buf[base + k * inner] = *c;
                        }
                    }
                }
            }
            inner *= n;
        }
    }
}

/// Angular frequencies 2πk/(N h) in FFT order.
pub fn frequencies<T: Real>(count: usize, spacing: T) -> Vec<T> {
    let scale = T::TAU() / (T::from_count(count) * spacing);
    (0..count)
        .map(|k| {
            let signed = if k <= count / 2 {
                k as f64
            } else {
                k as f64 - count as f64
            };
            T::lit(signed) * scale
        })
        .collect()
}

/// Full linear convolution Σ_j a[j] b[l − j] of two row-major arrays; the
/// result has shape a + b − 1 per axis.
pub fn linear_convolution<T: Real>(a: &[T], shape_a: &[usize], b: &[T], shape_b: &[usize]) -> Vec<T> {
    let d = shape_a.len();
    let full: Vec<usize> = shape_a.iter().zip(shape_b).map(|(x, y)| x + y - 1).collect();
    let fft_shape: Vec<usize> = full.iter().map(|n| n.next_power_of_two()).collect();
    let fft = FftNd::<T>::new(&fft_shape);
    let embed = |v: &[T], shape: &[usize]| {
        let mut buf = vec![Complex::new(T::zero(), T::zero()); fft.len()];
        let mut idx = vec![0usize; d];
        for (i, &x) in v.iter().enumerate() {
            let mut r = i;
            for k in (0..d).rev() {
                idx[k] = r % shape[k];
                r /= shape[k];
            }
            let off = idx.iter().zip(&fft_shape).fold(0, |acc, (&i, &n)| acc * n + i);
            buf[off] = Complex::new(x, T::zero());
        }
        buf
    };
    let mut fa = embed(a, shape_a);
    let mut fb = embed(b, shape_b);
    fft.forward(&mut fa);
    fft.forward(&mut fb);
    fa.iter_mut().zip(&fb).for_each(|(x, y)| *x = *x * *y);
    fft.inverse(&mut fa);
    let total: usize = full.iter().product();
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; d];
    for i in 0..total {
        let mut r = i;
        for k in (0..d).rev() {
            idx[k] = r % full[k];
            r /= full[k];
        }
        let off = idx.iter().zip(&fft_shape).fold(0, |acc, (&i, &n)| acc * n + i);
        out.push(fa[off].re);
    }
    out
}

/// Spectrum of a field embedded in the middle of a grid `pad` times larger
/// per axis. Multipliers act on the periodic padded grid.
pub struct PaddedSpectrum<T: Real> {
    original: Grid<T>,
    padded: Grid<T>,
    offset: Vec<usize>,
    hat: Vec<Complex<T>>,
    xi2: Vec<T>,
    fft: FftNd<T>,
}

impl<T: Real> PaddedSpectrum<T> {
    pub fn new(f: &SampledField<T>, pad: usize) -> Self {
        Self::from_values(f.grid(), f.values(), pad)
    }

    pub fn from_values(grid: &Grid<T>, values: &[T], pad: usize) -> Self {
        let pad = pad.max(1);
        let d = grid.dim();
        let mut axes = Vec::with_capacity(d);
        let mut offset = Vec::with_capacity(d);
        for a in grid.axes() {
            let n = (a.count * pad).next_power_of_two().max(a.count * pad);
            let off = (n - a.count) / 2;
            axes.push(Axis {
                origin: a.origin - a.spacing * T::from_count(off),
                spacing: a.spacing,
                count: n,
            });
            offset.push(off);
        }
        let padded = Grid::new(axes).expect("padded grid is valid");
        let fft = FftNd::new(&padded.shape());
        let mut hat = vec![Complex::new(T::zero(), T::zero()); padded.len()];
        let mut idx = vec![0usize; d];
        for (i, &v) in values.iter().enumerate() {
            grid.unravel(i, &mut idx);
            for k in 0..d {
                idx[k] += offset[k];
            }
            hat[padded.flat(&idx)] = Complex::new(v, T::zero());
        }
        fft.forward(&mut hat);
        let freqs: Vec<Vec<T>> = padded.axes().iter().map(|a| frequencies(a.count, a.spacing)).collect();
        let mut xi2 = vec![T::zero(); padded.len()];
        for (i, x) in xi2.iter_mut().enumerate() {
            padded.unravel(i, &mut idx);
            *x = idx.iter().enumerate().map(|(k, &j)| freqs[k][j] * freqs[k][j]).sum();
        }
        Self {
            original: grid.clone(),
            padded,
            offset,
            hat,
            xi2,
            fft,
        }
    }

    pub fn padded_grid(&self) -> &Grid<T> {
        &self.padded
    }

    /// |ξ|² of every mode in FFT order.
    pub fn xi2(&self) -> &[T] {
        &self.xi2
    }

    pub fn hat(&self) -> &[Complex<T>] {
        &self.hat
    }

    /// Real part of F⁻¹[m(|ξ|²) f̂] on the padded grid.
    pub fn apply<M: Fn(T) -> T>(&self, m: M) -> Vec<T> {
        let mut buf: Vec<Complex<T>> = self.hat.iter().zip(&self.xi2).map(|(c, &x)| *c * m(x)).collect();
        self.fft.inverse(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }

    /// Σ m(|ξ|²)|f̂|² mapped to physical units: ∫ m(|ξ|²)|f̂(ξ)|² dξ/(2π)ⁿ,
    /// which equals ‖F⁻¹[√m f̂]‖₂² by Parseval.
    pub fn quadratic_form<M: Fn(T) -> T>(&self, m: M) -> T {
        let s: T = self.hat.iter().zip(&self.xi2).map(|(c, &x)| c.norm_sqr() * m(x)).sum();
        s * self.padded.cell_volume() / T::from_count(self.padded.len())
    }

    /// Largest t for which the heat kernel e^{−d²/4t} at the distance d of the
    /// nearest periodic image of the original box stays below `tol`.
    pub fn periodic_time_limit(&self, tol: f64) -> T {
        let d = self
            .padded
            .axes()
            .iter()
            .zip(self.original.axes())
            .map(|(p, a)| p.spacing * T::from_count(p.count - a.count))
            .fold(T::infinity(), T::min);
        d * d / (T::lit(4.0) * -T::lit(tol).ln())
    }

    /// Restricts padded-grid values to the original grid.
    pub fn crop(&self, padded_values: &[T]) -> Vec<T> {
        let d = self.original.dim();
        let mut idx = vec![0usize; d];
        (0..self.original.len())
            .map(|i| {
                self.original.unravel(i, &mut idx);
                for k in 0..d {
                    idx[k] += self.offset[k];
                }
                padded_values[self.padded.flat(&idx)]
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupSpec;

    #[test]
    fn fft_roundtrip_2d() {
        let shape = [8, 12];
        let fft = FftNd::<f64>::new(&shape);
        let orig: Vec<Complex<f64>> = (0..96)
            .map(|i| Complex::new((i as f64).sin(), (i as f64 * 0.3).cos()))
            .collect();
        let mut buf = orig.clone();
        fft.forward(&mut buf);
        // DC term is the plain sum
        let sum: Complex<f64> = orig.iter().sum();
        assert!((buf[0] - sum).norm() < 1e-12);
        fft.inverse(&mut buf);
        for (a, b) in buf.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn linear_convolution_matches_direct_sum() {
        let a = [1.0f64, 2.0, 3.0];
        let b = [0.5, -1.0];
        let c = linear_convolution(&a, &[3], &b, &[2]);
        let want = [0.5, 0.0, -0.5, -3.0];
        for (x, y) in c.iter().zip(&want) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn heat_multiplier_on_gaussian() {
        // e^{t∂²} e^{−x²} = (1+4t)^{−1/2} e^{−x²/(1+4t)}
        let g = Arc::new(GroupSpec::<f64>::euclidean(1));
        let grid = Grid::cube(1, 0.01, 2048).unwrap();
        let f = SampledField::from_fn_truncated(g, grid, 4, |x| (-x[0] * x[0]).exp()).unwrap();
        let spec = PaddedSpectrum::new(&f, 4);
        let t = 0.7;
        let out = spec.crop(&spec.apply(|k2| (-t * k2).exp()));
        for (i, v) in out.iter().enumerate() {
            let x = f.grid().point(i)[0];
            let want = (-x * x / (1.0 + 4.0 * t)).exp() / (1.0 + 4.0 * t).sqrt();
            assert!((v - want).abs() < 1e-12);
        }
        let l2 = f.lp_norm(2.0).unwrap();
        assert!((spec.quadratic_form(|_| 1.0).sqrt() - l2).abs() < 1e-12);
    }
}
