//! Cubic spline interpolation on a fixed grid.
//!
//! Expensive conditional quantities are tabulated once on a dense grid and
//! then read back through a natural cubic spline; this module supplies that
//! spline. Construction solves the standard tridiagonal system for the second
//! derivatives (Thomas algorithm), evaluation clamps to the grid range so the
//! flat tails of the tabulated functions stay flat.

use crate::error::{Error, Result};
use crate::real::{real, Real};

/// Natural cubic spline through `(x[i], y[i])` with zero second derivative at
/// both ends.
#[derive(Debug, Clone)]
pub struct CubicSpline<R> {
    xs: Vec<R>,
    ys: Vec<R>,
    /// Second derivatives at the nodes.
    d2: Vec<R>,
}

impl<R: Real> CubicSpline<R> {
    /// Build from strictly increasing abscissae. Needs at least two points.
    pub fn natural(xs: &[R], ys: &[R]) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::Domain(format!(
                "spline needs matching grids, got {} abscissae and {} values",
                xs.len(),
                ys.len()
            )));
        }
        if xs.len() < 2 {
            return Err(Error::Domain(
                "spline needs at least two points".to_string(),
            ));
        }
        for pair in xs.windows(2) {
            if !(pair[0] < pair[1]) {
                return Err(Error::Domain(format!(
                    "spline abscissae must increase strictly, got {} then {}",
                    pair[0], pair[1]
                )));
            }
        }

        let n = xs.len();
        let mut d2 = vec![R::zero(); n];
        if n > 2 {
            // Tridiagonal system over the interior nodes; natural ends pin
            // d2[0] = d2[n-1] = 0 so the first/last equations lose a term.
            let m = n - 2;
            let mut diag = vec![R::zero(); m];
            let mut rhs = vec![R::zero(); m];
            let mut sub = vec![R::zero(); m];
            let mut sup = vec![R::zero(); m];
            let six = real::<R>(6.0);
            for i in 0..m {
                let h0 = xs[i + 1] - xs[i];
                let h1 = xs[i + 2] - xs[i + 1];
                sub[i] = h0;
                sup[i] = h1;
                diag[i] = real::<R>(2.0) * (h0 + h1);
                rhs[i] = six * ((ys[i + 2] - ys[i + 1]) / h1 - (ys[i + 1] - ys[i]) / h0);
            }
            // Thomas forward sweep, then back substitution.
            for i in 1..m {
                let w = sub[i] / diag[i - 1];
                diag[i] = diag[i] - w * sup[i - 1];
                rhs[i] = rhs[i] - w * rhs[i - 1];
            }
            d2[m] = rhs[m - 1] / diag[m - 1];
            for i in (0..m - 1).rev() {
                d2[i + 1] = (rhs[i] - sup[i] * d2[i + 2]) / diag[i];
            }
        }

        Ok(Self {
            xs: xs.to_vec(),
            ys: ys.to_vec(),
            d2,
        })
    }

    /// Evaluate at `x`, clamped to the grid range.
    pub fn eval(&self, x: R) -> R {
        let n = self.xs.len();
        let x = x.max(self.xs[0]).min(self.xs[n - 1]);
        // partition_point gives the first node strictly beyond x.
        let hi = self
            .xs
            .partition_point(|&node| node <= x)
            .clamp(1, n - 1);
        let lo = hi - 1;
        let h = self.xs[hi] - self.xs[lo];
        let t = x - self.xs[lo];
        let six = real::<R>(6.0);
        let slope = (self.ys[hi] - self.ys[lo]) / h
            - h * (real::<R>(2.0) * self.d2[lo] + self.d2[hi]) / six;
        let half = real::<R>(0.5);
        let curve = self.d2[lo] * half;
        let jerk = (self.d2[hi] - self.d2[lo]) / (six * h);
        self.ys[lo] + t * (slope + t * (curve + t * jerk))
    }

    /// Grid range covered without clamping.
    pub fn range(&self) -> (R, R) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_nodes_exactly() {
        let xs = [0.0f64, 0.7, 1.1, 2.0, 3.5];
        let ys: Vec<f64> = xs.iter().map(|x| (x * 1.3).sin()).collect();
        let s = CubicSpline::natural(&xs, &ys).unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            assert!((s.eval(*x) - y).abs() < 1e-15);
        }
    }

    #[test]
    fn linear_data_is_exact_everywhere() {
        let xs: Vec<f64> = (0..9).map(|i| i as f64 * 0.5).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 1.0).collect();
        let s = CubicSpline::natural(&xs, &ys).unwrap();
        for i in 0..=40 {
            let x = i as f64 * 0.1;
            assert!((s.eval(x) - (3.0 * x - 1.0)).abs() < 1e-13);
        }
    }

    #[test]
    fn smooth_function_on_dense_grid() {
        // Dense-grid accuracy is what the cache layer relies on: the spline
        // error of a C^4 function scales like h^4 away from the ends.
        let n = 257;
        let xs: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64 * 4.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (-x).exp() * (2.0 * x).cos()).collect();
        let s = CubicSpline::natural(&xs, &ys).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..=1000 {
            let x = 0.2 + i as f64 / 1000.0 * 3.6;
            let exact = (-x).exp() * (2.0 * x).cos();
            worst = worst.max((s.eval(x) - exact).abs());
        }
        assert!(worst < 1e-7, "worst spline error {worst:.3e}");
    }

    #[test]
    fn clamps_outside_the_grid() {
        let s = CubicSpline::natural(&[0.0, 1.0, 2.0], &[1.0, 4.0, 2.0]).unwrap();
        assert_eq!(s.eval(-5.0), 1.0);
        assert_eq!(s.eval(17.0), 2.0);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(CubicSpline::natural(&[0.0, 0.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(CubicSpline::natural(&[0.0f64], &[1.0]).is_err());
        assert!(CubicSpline::natural(&[0.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn two_point_spline_is_the_chord() {
        let s = CubicSpline::natural(&[1.0f64, 3.0], &[2.0, 8.0]).unwrap();
        assert!((s.eval(2.0) - 5.0).abs() < 1e-15);
    }

    #[test]
    fn f32_smoke() {
        let xs: [f32; 4] = [0.0, 1.0, 2.0, 3.0];
        let ys: [f32; 4] = [0.0, 1.0, 0.0, -1.0];
        let s = CubicSpline::natural(&xs, &ys).unwrap();
        assert!((s.eval(1.0f32) - 1.0).abs() < 1e-6);
    }
}
