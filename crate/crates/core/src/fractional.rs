//! Mixed Riemann-Liouville fractional integrals and derivatives.
//!
//! `I^γ f(x, y) = 1/(Γ(p)Γ(q)) ∫_a^x ∫_c^y (x-s)^{p-1} (y-t)^{q-1} f(s, t) dt ds`
//! and `D^γ f = ∂x ∂y I^{(1-p, 1-q)} f`. Quadrature integrates the kernel
//! exactly against the piecewise-linear interpolant of the data.

use ndarray::Array2;
use rayon::prelude::*;

use crate::calculus::{partial_derivative, probe_points};
use crate::error::{Error, Result};
use crate::field::SampledField;
use crate::fif::{FifSystem, Geometry, SelfAffine};
use crate::grid::{AffineMap1D, Axis};
use crate::poly::Poly2;

pub(crate) const PROBES_PER_AXIS: usize = 8;
const SAMPLE_TOL: f64 = 1e-9;

/// Gamma function. Poles at zero and the negative integers are errors.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if x <= 0.0 && x.fract() == 0.0 {
        return Err(Error::PoleAtNonpositiveInteger(x));
    }
    Ok(libm::tgamma(x))
}

/// Order `γ = (p, q)` of a mixed fractional operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracOrder {
    p: f64,
    q: f64,
}

impl FracOrder {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(p > 0.0 && p.is_finite() && q > 0.0 && q.is_finite()) {
            return Err(Error::InvalidOrder(format!("orders must be positive, got ({p}, {q})")));
        }
        Ok(FracOrder { p, q })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// `(1 - p, 1 - q)`, the integral order behind the derivative of order
    /// `(p, q)`. Needs `0 < p, q < 1`.
    pub fn complement(&self) -> Result<FracOrder> {
        if !(self.p < 1.0 && self.q < 1.0) {
            return Err(Error::InvalidOrder(format!(
                "derivative orders must lie in (0, 1), got ({}, {})",
                self.p, self.q
            )));
        }
        FracOrder::new(1.0 - self.p, 1.0 - self.q)
    }

    fn gamma_product(&self) -> f64 {
        libm::tgamma(self.p) * libm::tgamma(self.q)
    }
}

/// Weights `w` with `Σ w_k φ(nodes_k) = ∫ |center - s|^{order-1} φ(s) ds`
/// over `[nodes_0, nodes_last]` for every `φ` linear between the nodes.
/// The center may lie anywhere; nodes must be nondecreasing.
pub fn kernel_weights(nodes: &[f64], center: f64, order: f64) -> Vec<f64> {
    let mut w = vec![0.0; nodes.len()];
    for k in 0..nodes.len().saturating_sub(1) {
        let (xl, xr) = (nodes[k], nodes[k + 1]);
        let h = xr - xl;
        if h <= 0.0 {
            continue;
        }
        let (mut m0, mut m1) = (0.0, 0.0);
        let mut piece = |l: f64, r: f64| {
            let (d0, d1) = moments(center, xl, l, r, order);
            m0 += d0;
            m1 += d1;
        };
        if center > xl && center < xr {
            piece(xl, center);
            piece(center, xr);
        } else {
            piece(xl, xr);
        }
        let m1 = m1.clamp(0.0, h * m0);
        w[k] += m0 - m1 / h;
        w[k + 1] += m1 / h;
    }
    w
}

/// `(∫ |c - s|^{p-1} ds, ∫ |c - s|^{p-1} (s - x0) ds)` over `[l, r]`, which
/// must not contain `c` in its interior.
#[inline]
fn moments(c: f64, x0: f64, l: f64, r: f64, p: f64) -> (f64, f64) {
    if c >= r {
        let (u0, u1) = (c - l, c - r);
        let m0 = (u0.powf(p) - u1.powf(p)) / p;
        let m1 = (c - x0) * m0 - (u0.powf(p + 1.0) - u1.powf(p + 1.0)) / (p + 1.0);
        (m0, m1)
    } else {
        let (u0, u1) = (l - c, r - c);
        let m0 = (u1.powf(p) - u0.powf(p)) / p;
        let m1 = (c - x0) * m0 + (u1.powf(p + 1.0) - u0.powf(p + 1.0)) / (p + 1.0);
        (m0, m1)
    }
}

/// Lower-triangular matrix of the one-dimensional operator of order `p` on
/// the nodes, normalized by `Γ(p)`.
fn operator_matrix(nodes: &[f64], p: f64) -> Array2<f64> {
    let n = nodes.len();
    let g = libm::tgamma(p);
    let rows: Vec<Vec<f64>> = (0..n).into_par_iter().map(|r| kernel_weights(&nodes[..=r], nodes[r], p)).collect();
    Array2::from_shape_fn((n, n), |(r, k)| if k <= r { rows[r][k] / g } else { 0.0 })
}

/// Riemann-Liouville integral of order `p` along one axis.
pub fn frac_integral_axis(field: &SampledField, axis: Axis, p: f64) -> Result<SampledField> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::InvalidOrder(format!("order must be positive, got {p}")));
    }
    let out = match axis {
        Axis::X => operator_matrix(field.xs(), p).dot(field.values()),
        Axis::Y => field.values().dot(&operator_matrix(field.ys(), p).t()),
    };
    field.with_values(out)
}

/// `I^γ f` on the raster of `field`.
pub fn frac_integral_mixed(field: &SampledField, order: FracOrder) -> Result<SampledField> {
    let wx = operator_matrix(field.xs(), order.p);
    let wy = operator_matrix(field.ys(), order.q);
    field.with_values(wx.dot(field.values()).dot(&wy.t()))
}

/// `D^γ f = ∂x ∂y I^{(1-p, 1-q)} f`, the mixed partial by finite differences.
pub fn frac_derivative_mixed(field: &SampledField, order: FracOrder) -> Result<SampledField> {
    let inner = frac_integral_mixed(field, order.complement()?)?;
    partial_derivative(&partial_derivative(&inner, Axis::X)?, Axis::Y)
}

/// Sup over interior raster nodes of `|D^γ I^γ f - f|`.
pub fn inverse_pair_error(field: &SampledField, order: FracOrder) -> Result<f64> {
    let back = frac_derivative_mixed(&frac_integral_mixed(field, order)?, order)?;
    let (nx, ny) = (field.nx(), field.ny());
    let mut worst: f64 = 0.0;
    for r in 1..nx - 1 {
        for c in 1..ny - 1 {
            worst = worst.max((back.get(r, c) - field.get(r, c)).abs());
        }
    }
    Ok(worst)
}

/// `Σ k_mn X^m Y^n`, `X = x - x0`, mapped through per-degree factors and
/// shifted exponents: `Σ k_mn g(m) h(n) X^{m+e} Y^{n+f}`.
fn power_map(poly: &Poly2, x: f64, y: f64, e: f64, f: f64, g: impl Fn(usize) -> f64, h: impl Fn(usize) -> f64) -> f64 {
    let (dx, dy) = (x - poly.x0, y - poly.y0);
    let mut acc = 0.0;
    for ((m, n), &k) in poly.coeffs().indexed_iter() {
        if k != 0.0 {
            acc += k * g(m) * h(n) * dx.powf(m as f64 + e) * dy.powf(n as f64 + f);
        }
    }
    acc
}

/// Closed-form `I^γ p(x, y)` with lower limits at the polynomial's anchor.
pub fn poly_frac_integral(poly: &Poly2, order: FracOrder, x: f64, y: f64) -> f64 {
    use libm::tgamma as gamma;
    let (p, q) = (order.p, order.q);
    power_map(
        poly,
        x,
        y,
        p,
        q,
        |m| gamma(m as f64 + 1.0) / gamma(m as f64 + 1.0 + p),
        |n| gamma(n as f64 + 1.0) / gamma(n as f64 + 1.0 + q),
    )
}

/// Closed-form `D^γ p(x, y)`, `0 < p, q < 1`, lower limits at the anchor.
pub fn poly_frac_derivative(poly: &Poly2, order: FracOrder, x: f64, y: f64) -> Result<f64> {
    use libm::tgamma as gamma;
    order.complement()?;
    let (p, q) = (order.p, order.q);
    Ok(power_map(
        poly,
        x,
        y,
        -p,
        -q,
        |m| gamma(m as f64 + 1.0) / gamma(m as f64 + 1.0 - p),
        |n| gamma(n as f64 + 1.0) / gamma(n as f64 + 1.0 - q),
    ))
}

/// Lattice nodes strictly inside `(lo, hi)`, bracketed by `lo` and `hi`.
fn bracketed(lattice: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let gap = 1e-12 * (hi - lo);
    let mut out = Vec::with_capacity(lattice.len() + 2);
    out.push(lo);
    out.extend(lattice.iter().copied().filter(|&t| t > lo + gap && t < hi - gap));
    out.push(hi);
    out
}

fn weighted_sum(ws: &[f64], s: &[f64], wt: &[f64], t: &[f64], f: impl Fn(f64, f64) -> f64) -> f64 {
    let mut acc = 0.0;
    for (&wk, &sk) in ws.iter().zip(s) {
        if wk == 0.0 {
            continue;
        }
        let inner: f64 = wt.iter().zip(t).map(|(&wl, &tl)| wl * f(sk, tl)).sum();
        acc += wk * inner;
    }
    acc
}

/// The two boundary integrals of the offset, without the Gamma normalization
/// and without the `c_j^q` factor of the second:
///
/// `∫_a^{u_i(x)} ∫_c^{v_j(c)} |u_i(x)-s|^{p-1} |v_j(y)-t|^{q-1} f(s,t)` and
/// `∫_a^{u_i(a)} ∫_c^y |u_i(x)-s|^{p-1} |y-t|^{q-1} f(s, v_j(t))`.
fn boundary_integrals(
    field: &SampledField,
    u: AffineMap1D,
    v: AffineMap1D,
    order: FracOrder,
    x: f64,
    y: f64,
) -> (f64, f64) {
    let rect = field.rect();
    let (p, q) = (order.p, order.q);
    let ux = u.apply(x);
    let f = |s: f64, t: f64| field.interpolate(s, t);

    let y0 = v.apply(rect.c);
    let first = if ux > rect.a && y0 > rect.c {
        let s = bracketed(field.xs(), rect.a, ux);
        let t = bracketed(field.ys(), rect.c, y0);
        let ws = kernel_weights(&s, ux, p);
        let wt = kernel_weights(&t, v.apply(y), q);
        weighted_sum(&ws, &s, &wt, &t, f)
    } else {
        0.0
    };

    let x0 = u.apply(rect.a);
    let second = if x0 > rect.a && y > rect.c {
        let s = bracketed(field.xs(), rect.a, x0);
        let (lo, hi) = {
            let (e0, e1) = (v.apply(rect.c), v.apply(y));
            (e0.min(e1), e0.max(e1))
        };
        let mut pulled: Vec<f64> = field.ys().iter().filter(|&&t| t > lo && t < hi).map(|&t| v.inverse(t)).collect();
        pulled.sort_by(f64::total_cmp);
        let t = bracketed(&pulled, rect.c, y);
        let ws = kernel_weights(&s, ux, p);
        let wt = kernel_weights(&t, y, q);
        weighted_sum(&ws, &s, &wt, &t, |s, t| f(s, v.apply(t)))
    } else {
        0.0
    };
    (first, second)
}

/// Offset `q̂_ij(x, y)` of the system of `I^γ f`, 1-based patch indices.
/// `f_field` must sample the fixed point of `sys`.
pub fn qhat_frac(
    sys: &FifSystem,
    f_field: &SampledField,
    order: FracOrder,
    i: usize,
    j: usize,
    x: f64,
    y: f64,
) -> Result<f64> {
    let (n, m) = sys.scalings().dim();
    if i < 1 || i > n {
        return Err(Error::IndexOutOfRange { index: i, max: n });
    }
    if j < 1 || j > m {
        return Err(Error::IndexOutOfRange { index: j, max: m });
    }
    if f_field.rect() != sys.rect() {
        return Err(Error::MismatchedDomain);
    }
    if !sys.rect().contains(x, y) {
        return Err(Error::OutOfDomain(if sys.rect().contains(x, sys.rect().c) { y } else { x }));
    }
    Ok(qhat_integral(sys.geometry(), sys, f_field, order, i - 1, j - 1, x, y))
}

#[allow(clippy::too_many_arguments)]
fn qhat_integral(
    geom: &Geometry,
    sys: &FifSystem,
    field: &SampledField,
    order: FracOrder,
    i: usize,
    j: usize,
    x: f64,
    y: f64,
) -> f64 {
    let (u, v) = (geom.u[i], geom.v[j]);
    let (a, c) = (u.a.abs(), v.a.abs());
    let (first, second) = boundary_integrals(field, u, v, order, x, y);
    (first + c.powf(order.q) * second) / order.gamma_product()
        + a.powf(order.p) * c.powf(order.q) * poly_frac_integral(&sys.offsets()[[i, j]], order, x, y)
}

/// Per-patch residuals of
/// `I^γ f(u_i x, v_j y) = s_ij a_i^p c_j^q I^γ f(x, y) + q̂_ij(x, y)`
/// over a probe lattice, with `I^γ f` from a `resolution^2` raster.
///
/// The derivation raises `a_i`, `c_j` to fractional powers, so only patches
/// with odd `i` and odd `j` are expected to satisfy the identity; elsewhere
/// `|a_i|`, `|c_j|` are used and the residual is informative only.
pub fn check_thm_frac_integral(sys: &FifSystem, order: FracOrder, resolution: usize) -> Result<Array2<f64>> {
    if resolution < 3 {
        return Err(Error::InvalidArgument(format!("resolution must be at least 3, got {resolution}")));
    }
    let field = sys.sample(resolution, resolution, SAMPLE_TOL)?;
    let integral = frac_integral_mixed(&field, order)?;
    let geom = sys.geometry();
    per_patch(sys, |i, j, x, y| {
        let (u, v) = (geom.u[i], geom.v[j]);
        let scale = sys.scalings()[[i, j]] * u.a.abs().powf(order.p) * v.a.abs().powf(order.q);
        let lhs = integral.interpolate(u.apply(x), v.apply(y));
        lhs - scale * integral.interpolate(x, y) - qhat_integral(geom, sys, &field, order, i, j, x, y)
    })
}

/// Per-patch residuals of the derivative identity
/// `a_i c_j D^γ f(u_i x, v_j y) = s_ij a_i^{1-p} c_j^{1-q} D^γ f(x, y) + q̂_ij(x, y)`.
///
/// The factor `a_i c_j` is the chain rule for differentiating the composite
/// `(x, y) -> I^{(1-p,1-q)} f(u_i x, v_j y)`. The boundary parts of `q̂_ij` are
/// differentiated by centered mixed differences with the raster spacing.
pub fn check_thm_frac_derivative(sys: &FifSystem, order: FracOrder, resolution: usize) -> Result<Array2<f64>> {
    if resolution < 3 {
        return Err(Error::InvalidArgument(format!("resolution must be at least 3, got {resolution}")));
    }
    let inner_order = order.complement()?;
    let field = sys.sample(resolution, resolution, SAMPLE_TOL)?;
    let derivative = frac_derivative_mixed(&field, order)?;
    let geom = sys.geometry();
    let (hx, hy) = (field.hx(), field.hy());
    let norm = inner_order.gamma_product();
    per_patch(sys, |i, j, x, y| {
        let (u, v) = (geom.u[i], geom.v[j]);
        let (a, c) = (u.a.abs(), v.a.abs());
        let boundary = |x: f64, y: f64| {
            let (first, second) = boundary_integrals(&field, u, v, inner_order, x, y);
            (first + c.powf(inner_order.q) * second) / norm
        };
        let mixed = (boundary(x + hx, y + hy) - boundary(x + hx, y - hy) - boundary(x - hx, y + hy)
            + boundary(x - hx, y - hy))
            / (4.0 * hx * hy);
        let poly_part = poly_frac_derivative(&sys.offsets()[[i, j]], order, x, y).expect("order checked");
        let scale_hat = a.powf(inner_order.p) * c.powf(inner_order.q);
        let qhat = mixed + scale_hat * poly_part;
        let lhs = u.a * v.a * derivative.interpolate(u.apply(x), v.apply(y));
        lhs - sys.scalings()[[i, j]] * scale_hat * derivative.interpolate(x, y) - qhat
    })
}

/// Max of `|residual(i, j, x, y)|` over the probe lattice, per patch.
fn per_patch(sys: &FifSystem, residual: impl Fn(usize, usize, f64, f64) -> f64 + Sync) -> Result<Array2<f64>> {
    let rect = sys.rect();
    let xs = probe_points(rect.a, rect.b, PROBES_PER_AXIS);
    let ys = probe_points(rect.c, rect.d, PROBES_PER_AXIS);
    let (n, m) = sys.scalings().dim();
    let worst: Vec<f64> = (0..n * m)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / m, k % m);
            let mut worst: f64 = 0.0;
            for &x in &xs {
                for &y in &ys {
                    worst = worst.max(residual(i, j, x, y).abs());
                }
            }
            worst
        })
        .collect();
    Ok(Array2::from_shape_vec((n, m), worst).expect("patch count"))
}

/// Largest entry over patches with odd `i` and odd `j` (1-based).
pub fn max_over_preserving(residuals: &Array2<f64>) -> f64 {
    residuals.indexed_iter().filter(|((i, j), _)| i % 2 == 0 && j % 2 == 0).fold(0.0, |a, (_, &r)| a.max(r))
}
