//! Partial integrals and derivatives of fractal interpolation surfaces.
//!
//! If `f` is the fixed point of `{u_i, v_j, s_ij z + q_ij}` then `I_x f(x, y) =
//! int_a^x f(s, y) ds` is the fixed point of the system with scalings
//! `s_ij a_i` and offsets `a_i I_x q_ij(x, y) + int_a^{u_i(a)} f(s, v_j(y)) ds`.
//! The y-analogue swaps the roles of the axes.

use ndarray::Array2;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::SampledField;
use crate::fif::{sample_fixed_point, FifSystem, Geometry, SelfAffine};
use crate::grid::Axis;
use crate::poly::Poly2;

/// Probe abscissae `lo + (hi - lo)(k + 1/3)/count`, `k < count`.
///
/// Probing at a fixed third of the spacing keeps the position of the probes
/// within raster cells constant under resolution doubling.
pub(crate) fn probe_points(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| lo + (hi - lo) * (k as f64 + 1.0 / 3.0) / count as f64).collect()
}

pub(crate) const PROBES_PER_AXIS: usize = 16;

/// Composite trapezoid integral from the lower edge along `axis`.
pub fn cumulative_integral(field: &SampledField, axis: Axis) -> SampledField {
    let v = field.values();
    let (nx, ny) = v.dim();
    let mut out = Array2::zeros((nx, ny));
    match axis {
        Axis::X => {
            let half = 0.5 * field.hx();
            for r in 1..nx {
                for c in 0..ny {
                    out[[r, c]] = out[[r - 1, c]] + half * (v[[r - 1, c]] + v[[r, c]]);
                }
            }
        }
        Axis::Y => {
            let half = 0.5 * field.hy();
            for r in 0..nx {
                for c in 1..ny {
                    out[[r, c]] = out[[r, c - 1]] + half * (v[[r, c - 1]] + v[[r, c]]);
                }
            }
        }
    }
    field.with_values(out).expect("same shape")
}

/// Central differences inside, second-order one-sided differences at the edges.
pub fn partial_derivative(field: &SampledField, axis: Axis) -> Result<SampledField> {
    let t = match axis {
        Axis::X => field.clone(),
        Axis::Y => field.transpose(),
    };
    let (nx, ny) = t.values().dim();
    if nx < 3 {
        return Err(Error::DimensionMismatch(format!("differentiation needs at least 3 samples, got {nx}")));
    }
    let v = t.values();
    let h2 = 2.0 * t.hx();
    let d = Array2::from_shape_fn((nx, ny), |(r, c)| {
        if r == 0 {
            (-3.0 * v[[0, c]] + 4.0 * v[[1, c]] - v[[2, c]]) / h2
        } else if r == nx - 1 {
            (3.0 * v[[r, c]] - 4.0 * v[[r - 1, c]] + v[[r - 2, c]]) / h2
        } else {
            (v[[r + 1, c]] - v[[r - 1, c]]) / h2
        }
    });
    let out = t.with_values(d)?;
    Ok(match axis {
        Axis::X => out,
        Axis::Y => out.transpose(),
    })
}

/// Integrals of the hat functions of a uniform lattice over `[l, r]`, as
/// `(first index, weights)`. Requires `lo <= l <= r <= hi`.
pub(crate) fn hat_integrals(lo: f64, h: f64, n: usize, l: f64, r: f64) -> (usize, Vec<f64>) {
    if r <= l {
        return (0, Vec::new());
    }
    let cell = |t: f64| (((t - lo) / h).floor().max(0.0) as usize).min(n - 2);
    let (k0, k1) = (cell(l), cell(r));
    let mut w = vec![0.0; k1 - k0 + 2];
    for k in k0..=k1 {
        let xk = lo + k as f64 * h;
        let s0 = l.max(xk);
        let s1 = r.min(xk + h);
        if s1 <= s0 {
            continue;
        }
        // int (s - x_k)/h ds over [s0, s1]
        let m1 = ((s1 - xk).powi(2) - (s0 - xk).powi(2)) / (2.0 * h);
        w[k - k0] += (s1 - s0) - m1;
        w[k - k0 + 1] += m1;
    }
    (k0, w)
}

/// Oriented integral of the bilinear interpolant of `field` over
/// `[x0, x1] x [y0, y1]`; limits must lie in the field's rectangle.
pub fn integrate_rect(field: &SampledField, x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
    let rect = field.rect();
    let sign = if (x1 < x0) != (y1 < y0) { -1.0 } else { 1.0 };
    let (xl, xr) = (x0.min(x1), x0.max(x1));
    let (yl, yr) = (y0.min(y1), y0.max(y1));
    let (r0, wx) = hat_integrals(rect.a, field.hx(), field.nx(), xl, xr);
    let (c0, wy) = hat_integrals(rect.c, field.hy(), field.ny(), yl, yr);
    let v = field.values();
    let mut acc = 0.0;
    for (dr, &u) in wx.iter().enumerate() {
        if u == 0.0 {
            continue;
        }
        let row: f64 = wy.iter().enumerate().map(|(dc, &w)| w * v[[r0 + dr, c0 + dc]]).sum();
        acc += u * row;
    }
    sign * acc
}

/// `int_{x0}^{x} p(s, y) ds` style antiderivative along `axis`.
fn antiderivative(p: &Poly2, axis: Axis) -> Poly2 {
    match axis {
        Axis::X => p.antiderivative_x(),
        Axis::Y => p.transpose().antiderivative_x().transpose(),
    }
}

/// Fractal system of a partial integral, built from a base system and a
/// sampling of its fixed point.
#[derive(Debug, Clone)]
pub struct TransformedSystem {
    axis: Axis,
    geom: Geometry,
    scalings: Array2<f64>,
    polys: Array2<Poly2>,
    /// Boundary term per patch, sampled on the lattice of the other axis.
    traces: Array2<Vec<f64>>,
    trace_lo: f64,
    trace_h: f64,
}

impl TransformedSystem {
    /// System of `I_x f` (or `I_y f`) where `f_field` samples the fixed point
    /// of `sys`.
    pub fn partial_integral(sys: &FifSystem, f_field: &SampledField, axis: Axis) -> Result<Self> {
        if f_field.rect() != sys.rect() {
            return Err(Error::MismatchedDomain);
        }
        let geom = sys.geometry().clone();
        let rect = geom.rect;
        let (n, m) = sys.scalings().dim();
        let cumulative = cumulative_integral(f_field, axis);
        let slope = |i: usize, j: usize| match axis {
            Axis::X => geom.u[i].a,
            Axis::Y => geom.v[j].a,
        };
        let scalings = Array2::from_shape_fn((n, m), |(i, j)| sys.scalings()[[i, j]] * slope(i, j));
        let polys =
            Array2::from_shape_fn((n, m), |(i, j)| antiderivative(&sys.offsets()[[i, j]], axis).scaled(slope(i, j)));
        let lattice = match axis {
            Axis::X => f_field.ys(),
            Axis::Y => f_field.xs(),
        };
        let traces = Array2::from_shape_fn((n, m), |(i, j)| {
            lattice
                .iter()
                .map(|&t| match axis {
                    Axis::X => cumulative.interpolate(geom.u[i].apply(rect.a), geom.v[j].apply(t)),
                    Axis::Y => cumulative.interpolate(geom.u[i].apply(t), geom.v[j].apply(rect.c)),
                })
                .collect()
        });
        let (trace_lo, trace_h) = match axis {
            Axis::X => (rect.c, f_field.hy()),
            Axis::Y => (rect.a, f_field.hx()),
        };
        Ok(TransformedSystem { axis, geom, scalings, polys, traces, trace_lo, trace_h })
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn scalings(&self) -> &Array2<f64> {
        &self.scalings
    }

    fn trace(&self, i: usize, j: usize, t: f64) -> f64 {
        let tr = &self.traces[[i, j]];
        let pos = ((t - self.trace_lo) / self.trace_h).clamp(0.0, (tr.len() - 1) as f64);
        let k = (pos.floor() as usize).min(tr.len() - 2);
        let w = pos - k as f64;
        tr[k] + w * (tr[k + 1] - tr[k])
    }

    /// `q̂_ij(x, y)`, 1-based patch indices.
    pub fn offset_at(&self, i: usize, j: usize, x: f64, y: f64) -> Result<f64> {
        let (n, m) = self.scalings.dim();
        if i < 1 || i > n {
            return Err(Error::IndexOutOfRange { index: i, max: n });
        }
        if j < 1 || j > m {
            return Err(Error::IndexOutOfRange { index: j, max: m });
        }
        Ok(self.offset(i - 1, j - 1, x, y))
    }
}

impl SelfAffine for TransformedSystem {
    fn geometry(&self) -> &Geometry {
        &self.geom
    }

    fn scaling(&self, i: usize, j: usize) -> f64 {
        self.scalings[[i, j]]
    }

    fn offset(&self, i: usize, j: usize, x: f64, y: f64) -> f64 {
        let t = match self.axis {
            Axis::X => y,
            Axis::Y => x,
        };
        self.polys[[i, j]].eval(x, y) + self.trace(i, j, t)
    }

    fn offset_bound(&self) -> f64 {
        let rect = self.geom.rect;
        self.polys
            .iter()
            .zip(self.traces.iter())
            .map(|(p, tr)| p.sup_bound(&rect) + tr.iter().fold(0.0_f64, |a, v| a.max(v.abs())))
            .fold(0.0, f64::max)
    }
}

/// Outcome of [`check_thm_partial_integral`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartialIntegralCheck {
    /// Largest functional-equation residual over patches and probe points.
    pub residual: f64,
    /// Sup distance between the fixed point of the transformed system and
    /// the quadrature of `f`.
    pub generator_diff: f64,
}

/// Checks `I f(u_i x, v_j y) = s_ij a_i I f(x, y) + q̂_ij(x, y)` (with `c_j` in
/// place of `a_i` for the y-axis) against trapezoid quadrature of a
/// `resolution x resolution` sampling of `f`.
pub fn check_thm_partial_integral(
    sys: &FifSystem,
    axis: Axis,
    resolution: usize,
    tol: f64,
) -> Result<PartialIntegralCheck> {
    if resolution < 3 {
        return Err(Error::InvalidArgument(format!("resolution must be at least 3, got {resolution}")));
    }
    let f_field = sys.sample(resolution, resolution, tol)?;
    let integral = cumulative_integral(&f_field, axis);
    let hat = TransformedSystem::partial_integral(sys, &f_field, axis)?;
    let geom = sys.geometry();
    let rect = geom.rect;
    let xs = probe_points(rect.a, rect.b, PROBES_PER_AXIS);
    let ys = probe_points(rect.c, rect.d, PROBES_PER_AXIS);
    let (n, m) = sys.scalings().dim();
    let residual = (0..n * m)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / m, k % m);
            let mut worst: f64 = 0.0;
            for &x in &xs {
                for &y in &ys {
                    let lhs = integral.interpolate(geom.u[i].apply(x), geom.v[j].apply(y));
                    let rhs = hat.scaling(i, j) * integral.interpolate(x, y) + hat.offset(i, j, x, y);
                    worst = worst.max((lhs - rhs).abs());
                }
            }
            worst
        })
        .reduce(|| 0.0, f64::max);
    let generated = sample_fixed_point(&hat, resolution, resolution, tol)?;
    let generator_diff = generated.max_abs_diff(&integral)?;
    Ok(PartialIntegralCheck { residual, generator_diff })
}

/// The x-theorem followed by the y-theorem: per-patch residuals of
/// `I_y I_x f(u_i x, v_j y) = s_ij a_i c_j I_y I_x f(x, y) + q̂_ij(x, y)` with
/// the composed offset
/// `a_i c_j I_y I_x q_ij + int_c^{v_j(c)} I_x f(u_i x, t) dt + c_j int_c^y I_x f(u_i a, v_j t) dt`.
pub fn check_thm_double_integral(sys: &FifSystem, resolution: usize, tol: f64) -> Result<Array2<f64>> {
    if resolution < 3 {
        return Err(Error::InvalidArgument(format!("resolution must be at least 3, got {resolution}")));
    }
    let f_field = sys.sample(resolution, resolution, tol)?;
    let integral = cumulative_integral(&cumulative_integral(&f_field, Axis::X), Axis::Y);
    let geom = sys.geometry();
    let rect = geom.rect;
    let xs = probe_points(rect.a, rect.b, crate::fractional::PROBES_PER_AXIS);
    let ys = probe_points(rect.c, rect.d, crate::fractional::PROBES_PER_AXIS);
    let (n, m) = sys.scalings().dim();
    let worst: Vec<f64> = (0..n * m)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / m, k % m);
            let (u, v) = (geom.u[i], geom.v[j]);
            let q2 = sys.offsets()[[i, j]].antiderivative_x().transpose().antiderivative_x().transpose();
            let s = sys.scalings()[[i, j]] * u.a * v.a;
            let mut worst: f64 = 0.0;
            for &x in &xs {
                for &y in &ys {
                    let boundary_y = integrate_rect(&f_field, rect.a, u.apply(x), rect.c, v.apply(rect.c));
                    let boundary_x = integrate_rect(&f_field, rect.a, u.apply(rect.a), v.apply(rect.c), v.apply(y));
                    let qhat = u.a * v.a * q2.eval(x, y) + boundary_y + boundary_x;
                    let lhs = integral.interpolate(u.apply(x), v.apply(y));
                    worst = worst.max((lhs - s * integral.interpolate(x, y) - qhat).abs());
                }
            }
            worst
        })
        .collect();
    Ok(Array2::from_shape_vec((n, m), worst).expect("patch count"))
}

/// Checks the relations between a system and the system of its x-derivative
/// candidate: `ŝ_ij / a_i = s_ij` and `∂_x q̂_ij = a_i q_ij` patch-wise.
/// Polynomials are compared by value on a lattice fine enough to determine
/// them.
pub fn check_remark_derivative(sys_hat: &FifSystem, sys: &FifSystem, tol: f64) -> Result<bool> {
    let (g, gh) = (sys.geometry(), sys_hat.geometry());
    if g.xs != gh.xs || g.ys != gh.ys {
        return Err(Error::GeometryMismatch);
    }
    let rect = g.rect;
    let (n, m) = sys.scalings().dim();
    for i in 0..n {
        let a = g.u[i].a;
        for j in 0..m {
            if (sys_hat.scalings()[[i, j]] / a - sys.scalings()[[i, j]]).abs() > tol {
                return Ok(false);
            }
            let lhs = sys_hat.offsets()[[i, j]].deriv_x();
            let rhs = sys.offsets()[[i, j]].scaled(a);
            let kx = lhs.degree_x().max(rhs.degree_x()) + 1;
            let ky = lhs.degree_y().max(rhs.degree_y()) + 1;
            for r in 0..=kx {
                for c in 0..=ky {
                    let x = rect.a + rect.width() * r as f64 / kx as f64;
                    let y = rect.c + rect.height() * c as f64 / ky as f64;
                    if (lhs.eval(x, y) - rhs.eval(x, y)).abs() > tol {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}
