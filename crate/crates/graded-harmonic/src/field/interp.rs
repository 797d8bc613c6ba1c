//! Separable four-point cubic Lagrange interpolation. Nodes outside the grid
//! read as zero (compact support).

use super::grid::Grid;
use crate::scalar::Real;

/// Weights of nodes i−1, i, i+1, i+2 at fractional offset t from node i.
#[inline]
pub fn cubic_weights<T: Real>(t: T) -> [T; 4] {
    let one = T::one();
    let two = T::lit(2.0);
    let six = T::lit(6.0);
    let (tm1, tm2, tp1) = (t - one, t - two, t + one);
    [
        -t * tm1 * tm2 / six,
        tp1 * tm1 * tm2 / two,
        -tp1 * t * tm2 / two,
        tp1 * t * tm1 / six,
    ]
}

/// Interpolated value at `x` (grid coordinates), zero far outside.
pub fn eval<T: Real>(grid: &Grid<T>, values: &[T], x: &[T]) -> T {
    let n = grid.dim();
    let mut base = [0isize; 8];
    let mut w = [[T::zero(); 4]; 8];
    for k in 0..n {
        let a = &grid.axes()[k];
        let pos = a.position(x[k]);
        let fl = pos.floor();
        let i0 = fl.to_isize().unwrap_or(isize::MIN / 2);
        if i0 + 2 < 0 || i0 - 1 >= a.count as isize {
            return T::zero();
        }
        base[k] = i0 - 1;
        w[k] = cubic_weights(pos - fl);
    }
    let axes = grid.axes();
    match n {
        1 => (0..4)
            .filter_map(|a| {
                let i = base[0] + a as isize;
                (i >= 0 && (i as usize) < axes[0].count).then(|| w[0][a] * values[i as usize])
            })
            .sum(),
        _ => {
            let strides = grid.strides();
            let mut acc = T::zero();
            for combo in 0..4usize.pow(n as u32) {
                let mut c = combo;
                let mut flat = 0usize;
                let mut weight = T::one();
                let mut inside = true;
                for k in (0..n).rev() {
                    let a = c % 4;
                    c /= 4;
                    let i = base[k] + a as isize;
                    if i < 0 || i as usize >= axes[k].count {
                        inside = false;
                        break;
                    }
                    flat += i as usize * strides[k];
                    weight *= w[k][a];
                }
                if inside {
                    acc += weight * values[flat];
                }
            }
            acc
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::grid::Axis;

    #[test]
    fn weights_partition_unity_and_reproduce_cubics() {
        for t in [0.0, 0.25, 0.5, 0.9] {
            let w = cubic_weights(t);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            let p = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x * x;
            let v: f64 = (0..4).map(|a| w[a] * p(a as f64 - 1.0)).sum();
            assert!((v - p(t)).abs() < 1e-13);
        }
    }

    #[test]
    fn tensor_interpolation_exact_for_cubic_polynomials() {
        let g = Grid::new(vec![
            Axis::new(0.0, 0.5, 12).unwrap(),
            Axis::new(-1.0, 0.25, 12).unwrap(),
        ])
        .unwrap();
        let f = |x: f64, y: f64| x * x * y - y * y * y + 2.0;
        let vals: Vec<f64> = (0..g.len())
            .map(|i| {
                let p = g.point(i);
                f(p[0], p[1])
            })
            .collect();
        let x = [2.3, 0.61];
        assert!((eval(&g, &vals, &x) - f(x[0], x[1])).abs() < 1e-12);
        assert_eq!(eval(&g, &vals, &[-10.0, 0.0]), 0.0);
    }
}
