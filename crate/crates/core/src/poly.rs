//! Small dense bivariate polynomials in shifted coordinates.

use ndarray::Array2;

use crate::grid::Rect;

/// `p(x, y) = sum_{m,n} k[m][n] (x - x0)^m (y - y0)^n`.
///
/// The vertical offsets `q_ij` of the surface maps are bilinear (degree 1 in
/// each variable); their x-antiderivatives are quadratic in x.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly2 {
    pub x0: f64,
    pub y0: f64,
    coeffs: Array2<f64>,
}

impl Poly2 {
    pub fn new(x0: f64, y0: f64, coeffs: Array2<f64>) -> Self {
        assert!(coeffs.nrows() > 0 && coeffs.ncols() > 0, "empty coefficient matrix");
        Poly2 { x0, y0, coeffs }
    }

    pub fn zero(x0: f64, y0: f64) -> Self {
        Poly2::new(x0, y0, Array2::zeros((1, 1)))
    }

    /// The bilinear function over `rect` with corner values
    /// `[p(a,c), p(b,c), p(a,d), p(b,d)]`, anchored at `(a, c)`.
    pub fn bilinear_through_corners(rect: &Rect, corners: [f64; 4]) -> Self {
        let [v00, v10, v01, v11] = corners;
        let (w, h) = (rect.width(), rect.height());
        let mut k = Array2::zeros((2, 2));
        k[[0, 0]] = v00;
        k[[1, 0]] = (v10 - v00) / w;
        k[[0, 1]] = (v01 - v00) / h;
        k[[1, 1]] = (v11 - v10 - v01 + v00) / (w * h);
        Poly2::new(rect.a, rect.c, k)
    }

    pub fn coeffs(&self) -> &Array2<f64> {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut Array2<f64> {
        &mut self.coeffs
    }

    /// Coefficient of `X^m Y^n`, zero beyond the stored degree.
    pub fn coeff(&self, m: usize, n: usize) -> f64 {
        self.coeffs.get([m, n]).copied().unwrap_or(0.0)
    }

    pub fn degree_x(&self) -> usize {
        self.coeffs.nrows() - 1
    }

    pub fn degree_y(&self) -> usize {
        self.coeffs.ncols() - 1
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let (dx, dy) = (x - self.x0, y - self.y0);
        let mut acc = 0.0;
        for row in self.coeffs.outer_iter().rev() {
            let mut inner = 0.0;
            for &k in row.iter().rev() {
                inner = inner * dy + k;
            }
            acc = acc * dx + inner;
        }
        acc
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Poly2::new(self.x0, self.y0, &self.coeffs * factor)
    }

    /// Partial derivative in x.
    pub fn deriv_x(&self) -> Self {
        let (rows, cols) = self.coeffs.dim();
        if rows == 1 {
            return Poly2::new(self.x0, self.y0, Array2::zeros((1, cols)));
        }
        let k = Array2::from_shape_fn((rows - 1, cols), |(m, n)| (m + 1) as f64 * self.coeffs[[m + 1, n]]);
        Poly2::new(self.x0, self.y0, k)
    }

    /// `x -> int_{x0}^{x} p(s, y) ds`.
    pub fn antiderivative_x(&self) -> Self {
        let (rows, cols) = self.coeffs.dim();
        let k = Array2::from_shape_fn(
            (rows + 1, cols),
            |(m, n)| {
                if m == 0 {
                    0.0
                } else {
                    self.coeffs[[m - 1, n]] / m as f64
                }
            },
        );
        Poly2::new(self.x0, self.y0, k)
    }

    pub fn transpose(&self) -> Self {
        Poly2::new(self.y0, self.x0, self.coeffs.t().to_owned())
    }

    /// Upper bound for `|p|` over `rect`. Exact (corner maximum) for bilinear
    /// polynomials anchored at the rectangle corner.
    pub fn sup_bound(&self, rect: &Rect) -> f64 {
        let anchored = self.x0 == rect.a && self.y0 == rect.c;
        if anchored && self.degree_x() <= 1 && self.degree_y() <= 1 {
            return [(rect.a, rect.c), (rect.b, rect.c), (rect.a, rect.d), (rect.b, rect.d)]
                .iter()
                .map(|&(x, y)| self.eval(x, y).abs())
                .fold(0.0, f64::max);
        }
        let wx = (rect.a - self.x0).abs().max((rect.b - self.x0).abs());
        let wy = (rect.c - self.y0).abs().max((rect.d - self.y0).abs());
        self.coeffs.indexed_iter().map(|((m, n), k)| k.abs() * wx.powi(m as i32) * wy.powi(n as i32)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corners_reproduced() {
        let r = Rect::new(1.0, 3.0, -1.0, 0.5).unwrap();
        let p = Poly2::bilinear_through_corners(&r, [1.0, -2.0, 0.5, 4.0]);
        assert!((p.eval(1.0, -1.0) - 1.0).abs() < 1e-14);
        assert!((p.eval(3.0, -1.0) + 2.0).abs() < 1e-14);
        assert!((p.eval(1.0, 0.5) - 0.5).abs() < 1e-14);
        assert!((p.eval(3.0, 0.5) - 4.0).abs() < 1e-14);
        assert!((p.sup_bound(&r) - 4.0).abs() < 1e-14);
    }

    #[test]
    fn antiderivative_then_derivative_is_identity() {
        let r = Rect::new(0.0, 1.0, 0.0, 1.0).unwrap();
        let p = Poly2::bilinear_through_corners(&r, [0.3, 1.0, -0.7, 2.0]);
        let back = p.antiderivative_x().deriv_x();
        for &(x, y) in &[(0.1, 0.2), (0.9, 0.4), (0.5, 1.0)] {
            assert!((back.eval(x, y) - p.eval(x, y)).abs() < 1e-14);
        }
        // int_0^1 of (0.3 + 0.7 x) at y = 0 is 0.65
        assert!((p.antiderivative_x().eval(1.0, 0.0) - 0.65).abs() < 1e-14);
    }

    #[test]
    fn general_bound_dominates() {
        let r = Rect::new(0.0, 2.0, 0.0, 1.0).unwrap();
        let p = Poly2::bilinear_through_corners(&r, [1.0, -1.0, 2.0, 0.0]).antiderivative_x();
        let bound = p.sup_bound(&r);
        for i in 0..=20 {
            for j in 0..=20 {
                let (x, y) = (2.0 * i as f64 / 20.0, j as f64 / 20.0);
                assert!(p.eval(x, y).abs() <= bound + 1e-12);
            }
        }
    }
}
