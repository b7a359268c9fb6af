//! Integral transforms of fractal interpolation surfaces over the compact
//! domain `I x J`, and the functional equations they inherit from the
//! self-referential equation.
//!
//! Fractional-order kernels use the Mittag-Leffler function and a Jumarie
//! measure, `∫_a^b g(x) (dx)^λ = λ ∫_a^b (b - x)^{λ-1} g(x) dx`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::SampledField;
use crate::fif::{FifSystem, SelfAffine};
use crate::fractional::kernel_weights;
use crate::poly::Poly2;

const MAX_TERMS: usize = 500;
const SAMPLE_TOL: f64 = 1e-10;

/// Coefficients `1/Γ(λm + 1)` of the Mittag-Leffler series.
struct MittagLeffler {
    lambda: f64,
    coeffs: Vec<f64>,
}

impl MittagLeffler {
    fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidOrder(format!("Mittag-Leffler order must be positive, got {lambda}")));
        }
        let coeffs = (0..MAX_TERMS)
            .map(|m| {
                let z = lambda * m as f64 + 1.0;
                if z < 170.0 {
                    1.0 / libm::tgamma(z)
                } else {
                    (-libm::lgamma(z)).exp()
                }
            })
            .collect();
        Ok(MittagLeffler { lambda, coeffs })
    }

    /// Sums until a term drops below `1e-16` of the partial sum. Fails when
    /// the term budget runs out or cancellation would cost more than about
    /// eight digits.
    fn eval(&self, x: f64) -> Result<f64> {
        let budget = || Error::SeriesBudgetExceeded { lambda: self.lambda, x };
        let mut sum = self.coeffs[0];
        let mut power = 1.0;
        let mut largest: f64 = 1.0;
        for &c in &self.coeffs[1..] {
            power *= x;
            let term = c * power;
            if !term.is_finite() {
                return Err(budget());
            }
            sum += term;
            largest = largest.max(term.abs());
            if term.abs() < 1e-16 * sum.abs() || term == 0.0 {
                if largest > 6.7e7 * sum.abs().max(1.0) {
                    return Err(budget());
                }
                return Ok(sum);
            }
        }
        Err(budget())
    }
}

/// `E_λ(x) = Σ x^m / Γ(λm + 1)`.
pub fn mittag_leffler(lambda: f64, x: f64) -> Result<f64> {
    MittagLeffler::new(lambda)?.eval(x)
}

/// `z^λ` extended to negative `z` as an odd function.
#[inline]
fn odd_pow(z: f64, lambda: f64) -> f64 {
    if lambda == 1.0 {
        z
    } else {
        z.signum() * z.abs().powf(lambda)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Laplace,
    LaplaceCarson,
    Fourier,
    FracSumudu,
    FracLaplace,
}

impl KernelKind {
    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Laplace => "laplace",
            KernelKind::LaplaceCarson => "laplace_carson",
            KernelKind::Fourier => "fourier",
            KernelKind::FracSumudu => "frac_sumudu",
            KernelKind::FracLaplace => "frac_laplace",
        }
    }

    pub fn is_fractional(self) -> bool {
        matches!(self, KernelKind::FracSumudu | KernelKind::FracLaplace)
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "laplace" => KernelKind::Laplace,
            "laplace_carson" => KernelKind::LaplaceCarson,
            "fourier" => KernelKind::Fourier,
            "frac_sumudu" => KernelKind::FracSumudu,
            "frac_laplace" => KernelKind::FracLaplace,
            other => return Err(Error::InvalidArgument(format!("unknown kernel '{other}'"))),
        })
    }
}

/// Transform kernel and its order `λ` (1 for the classical kernels).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub lambda: f64,
}

impl KernelSpec {
    pub fn new(kind: KernelKind, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::InvalidOrder(format!("transform order must lie in (0, 1], got {lambda}")));
        }
        if !kind.is_fractional() && lambda != 1.0 {
            return Err(Error::InvalidOrder(format!("{kind} has order 1, got {lambda}")));
        }
        Ok(KernelSpec { kind, lambda })
    }

    pub fn classical(kind: KernelKind) -> Self {
        KernelSpec { kind, lambda: 1.0 }
    }

    pub fn complex_valued(&self) -> bool {
        self.kind == KernelKind::Fourier
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformPoint {
    pub s: f64,
    pub t: f64,
}

impl TransformPoint {
    pub fn new(s: f64, t: f64) -> Self {
        TransformPoint { s, t }
    }
}

/// Composite trapezoid weights of a uniform lattice.
fn trapezoid(n: usize, h: f64) -> Vec<f64> {
    (0..n).map(|k| if k == 0 || k == n - 1 { 0.5 * h } else { h }).collect()
}

/// `∫∫_{I x J} exp(-κ(σx + τy)) g(x, y)` by the trapezoid rule.
fn exp_transform(field: &SampledField, kappa: Complex64, sigma: f64, tau: f64) -> Complex64 {
    let wx = trapezoid(field.nx(), field.hx());
    let wy = trapezoid(field.ny(), field.hy());
    let ey: Vec<Complex64> = field.ys().iter().zip(&wy).map(|(&y, &w)| (-kappa * tau * y).exp() * w).collect();
    let v = field.values();
    field
        .xs()
        .iter()
        .zip(&wx)
        .enumerate()
        .map(|(r, (&x, &w))| {
            let row: Complex64 = ey.iter().enumerate().map(|(c, e)| e * v[[r, c]]).sum();
            (-kappa * sigma * x).exp() * w * row
        })
        .sum()
}

/// `∫_0^L u^m exp(-λu) du` for complex `λ` and real `L`.
fn exp_moment(lambda: Complex64, len: f64, m: usize) -> Complex64 {
    if (lambda * len).norm() < 1.0 {
        let mut sum = Complex64::new(0.0, 0.0);
        let mut coef = Complex64::new(len.powi(m as i32 + 1), 0.0);
        for k in 0..60 {
            let term = coef / (m + k + 1) as f64;
            sum += term;
            if term.norm() < 1e-17 * sum.norm() {
                break;
            }
            coef *= -lambda * len / (k + 1) as f64;
        }
        return sum;
    }
    let tail = (-lambda * len).exp();
    let mut mu = (1.0 - tail) / lambda;
    for k in 1..=m {
        mu = (k as f64 * mu - len.powi(k as i32) * tail) / lambda;
    }
    mu
}

/// `∫_lo^hi exp(-κσz) (z - z0)^m dz`.
fn exp_poly_integral(kappa: Complex64, sigma: f64, z0: f64, lo: f64, hi: f64, m: usize) -> Complex64 {
    let lam = kappa * sigma;
    (-lam * z0).exp() * (exp_moment(lam, hi - z0, m) - exp_moment(lam, lo - z0, m))
}

/// Closed-form `∫∫_{I x J} exp(-κ(σx + τy)) p(x, y)` for a polynomial.
fn exp_transform_poly(poly: &Poly2, rect: &crate::grid::Rect, kappa: Complex64, sigma: f64, tau: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for ((m, n), &k) in poly.coeffs().indexed_iter() {
        if k != 0.0 {
            acc += k
                * exp_poly_integral(kappa, sigma, poly.x0, rect.a, rect.b, m)
                * exp_poly_integral(kappa, tau, poly.y0, rect.c, rect.d, n);
        }
    }
    acc
}

fn kappa(kind: KernelKind) -> Complex64 {
    match kind {
        KernelKind::Fourier => Complex64::new(0.0, 2.0 * PI),
        _ => Complex64::new(1.0, 0.0),
    }
}

fn check_laplace_domain(field: &SampledField, kind: KernelKind, pt: TransformPoint) -> Result<()> {
    if matches!(kind, KernelKind::Laplace | KernelKind::LaplaceCarson) {
        let r = field.rect();
        if !(r.a > 0.0 && r.c > 0.0) {
            return Err(Error::DomainViolation { a: r.a, c: r.c });
        }
        if !(pt.s > 0.0 && pt.t > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "{kind} needs positive transform variables, got ({}, {})",
                pt.s, pt.t
            )));
        }
    }
    Ok(())
}

/// Transform of the sampled function over its rectangle by direct quadrature.
pub fn transform_direct(field: &SampledField, k: KernelSpec, pt: TransformPoint) -> Result<Complex64> {
    if k.kind.is_fractional() {
        return frac_transform_direct(field, k.kind, k.lambda, pt).map(|v| Complex64::new(v, 0.0));
    }
    check_laplace_domain(field, k.kind, pt)?;
    let plain = exp_transform(field, kappa(k.kind), pt.s, pt.t);
    Ok(match k.kind {
        KernelKind::LaplaceCarson => plain * (pt.s * pt.t),
        _ => plain,
    })
}

/// `λ |c - x|^{λ-1}` product weights, center at `hi` (or `lo`).
fn jumarie_weights(nodes: &[f64], center: f64, lambda: f64) -> Vec<f64> {
    kernel_weights(nodes, center, lambda).into_iter().map(|w| lambda * w).collect()
}

/// Fractional Laplace `∫∫ E_λ(-(sx+ty)^λ) f (dx)^λ (dy)^λ` or fractional
/// Sumudu `∫∫ E_λ(-(x+y)^λ) f(sx, ty) (dx)^λ (dy)^λ` over the support of `f`.
///
/// For the Sumudu kernel the substitution `X = sx` turns the integral into
/// `|st|^{-λ} ∫∫_{I x J} E_λ(-(X/s + Y/t)^λ) f(X, Y) (dX)^λ (dY)^λ`, the
/// measure anchored at the upper end of the support in the original variable.
pub fn frac_transform_direct(field: &SampledField, kind: KernelKind, lambda: f64, pt: TransformPoint) -> Result<f64> {
    let ml = MittagLeffler::new(lambda)?;
    frac_transform_with(&ml, field, kind, pt)
}

type KernelArg = Box<dyn Fn(f64, f64) -> f64 + Sync>;

fn frac_transform_with(ml: &MittagLeffler, field: &SampledField, kind: KernelKind, pt: TransformPoint) -> Result<f64> {
    let lambda = ml.lambda;
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::InvalidOrder(format!("transform order must lie in (0, 1], got {lambda}")));
    }
    let rect = field.rect();
    let (xs, ys) = (field.xs(), field.ys());
    let (wx, wy, scale, arg): (Vec<f64>, Vec<f64>, f64, KernelArg) = match kind {
        KernelKind::FracLaplace => (
            jumarie_weights(xs, rect.b, lambda),
            jumarie_weights(ys, rect.d, lambda),
            1.0,
            Box::new(move |x, y| pt.s * x + pt.t * y),
        ),
        KernelKind::FracSumudu => {
            if pt.s == 0.0 || pt.t == 0.0 {
                return Err(Error::ZeroScale);
            }
            let cx = if pt.s > 0.0 { rect.b } else { rect.a };
            let cy = if pt.t > 0.0 { rect.d } else { rect.c };
            (
                jumarie_weights(xs, cx, lambda),
                jumarie_weights(ys, cy, lambda),
                (pt.s * pt.t).abs().powf(-lambda),
                Box::new(move |x, y| x / pt.s + y / pt.t),
            )
        }
        other => return Err(Error::InvalidArgument(format!("{other} is not a fractional kernel"))),
    };
    let v = field.values();
    let rows: Vec<f64> = (0..xs.len())
        .into_par_iter()
        .map(|r| {
            let mut acc = 0.0;
            for c in 0..ys.len() {
                let f = v[[r, c]];
                if f != 0.0 {
                    acc += wy[c] * ml.eval(-odd_pow(arg(xs[r], ys[c]), lambda))? * f;
                }
            }
            Ok(wx[r] * acc)
        })
        .collect::<Result<_>>()?;
    Ok(scale * rows.iter().sum::<f64>())
}

/// Per-patch data of the transform equation: the prefactor and the point at
/// which the transforms of `q_ij` and `f` are taken.
struct PatchTerm {
    i: usize,
    j: usize,
    prefactor: Complex64,
    at: TransformPoint,
}

fn patch_terms(
    sys: &FifSystem,
    k: KernelSpec,
    pt: TransformPoint,
    ml: Option<&MittagLeffler>,
) -> Result<Vec<PatchTerm>> {
    let g = sys.geometry();
    let mut out = Vec::with_capacity(g.n() * g.m());
    for i in 0..g.n() {
        for j in 0..g.m() {
            let (u, v) = (g.u[i], g.v[j]);
            let jac = (u.a * v.a).abs();
            let (prefactor, at) = match k.kind {
                KernelKind::Laplace | KernelKind::LaplaceCarson | KernelKind::Fourier => {
                    let carson = if k.kind == KernelKind::LaplaceCarson { pt.s * pt.t } else { 1.0 };
                    let e = (-kappa(k.kind) * (u.b * pt.s + v.b * pt.t)).exp();
                    (e * jac * carson, TransformPoint::new(u.a * pt.s, v.a * pt.t))
                }
                KernelKind::FracLaplace => {
                    let ml = ml.expect("fractional kernel");
                    let e = ml.eval(-odd_pow(u.b * pt.s + v.b * pt.t, k.lambda))?;
                    (Complex64::new(jac.powf(k.lambda) * e, 0.0), TransformPoint::new(u.a * pt.s, v.a * pt.t))
                }
                KernelKind::FracSumudu => {
                    if pt.s == 0.0 || pt.t == 0.0 {
                        return Err(Error::ZeroScale);
                    }
                    let ml = ml.expect("fractional kernel");
                    let e = ml.eval(-odd_pow(u.b / pt.s + v.b / pt.t, k.lambda))?;
                    (Complex64::new(e, 0.0), TransformPoint::new(pt.s / u.a, pt.t / v.a))
                }
            };
            out.push(PatchTerm { i, j, prefactor, at });
        }
    }
    Ok(out)
}

/// Right-hand side of the transform equation
/// `f̂(s, t) = Σ_ij P_ij(s, t) [q̂_ij + s_ij f̂](scaled point)`.
///
/// For the exponential kernels `P_ij = |a_i c_j| C(s,t) exp(-κ(b_i s + d_j t))`
/// and the transforms are taken at `(a_i s, c_j t)` without the Carson factor;
/// the `q_ij` part is in closed form. For the fractional Laplace kernel
/// `P_ij = |a_i c_j|^λ E_λ(-(b_i s + d_j t)^λ)`; for the fractional Sumudu
/// kernel `P_ij = E_λ(-(b_i/s + d_j/t)^λ)` with transforms at
/// `(s/a_i, t/c_j)`. Only at `λ = 1` do the fractional forms equal the
/// direct transform.
pub fn transform_rhs(sys: &FifSystem, f_field: &SampledField, k: KernelSpec, pt: TransformPoint) -> Result<Complex64> {
    if f_field.rect() != sys.rect() {
        return Err(Error::MismatchedDomain);
    }
    check_laplace_domain(f_field, k.kind, pt)?;
    let rect = sys.rect();
    if k.kind.is_fractional() {
        let ml = MittagLeffler::new(k.lambda)?;
        let terms = patch_terms(sys, k, pt, Some(&ml))?;
        let (nx, ny) = (f_field.nx(), f_field.ny());
        let mut acc = 0.0;
        for term in terms {
            let q = &sys.offsets()[[term.i, term.j]];
            let q_field = SampledField::from_fn(rect, nx, ny, |x, y| q.eval(x, y))?;
            let q_part = frac_transform_with(&ml, &q_field, k.kind, term.at)?;
            let f_part = frac_transform_with(&ml, f_field, k.kind, term.at)?;
            acc += term.prefactor.re * (q_part + sys.scalings()[[term.i, term.j]] * f_part);
        }
        return Ok(Complex64::new(acc, 0.0));
    }
    let kap = kappa(k.kind);
    let terms = patch_terms(sys, k, pt, None)?;
    Ok(terms
        .par_iter()
        .map(|term| {
            let q = &sys.offsets()[[term.i, term.j]];
            let q_part = exp_transform_poly(q, &rect, kap, term.at.s, term.at.t);
            let f_part = exp_transform(f_field, kap, term.at.s, term.at.t);
            term.prefactor * (q_part + sys.scalings()[[term.i, term.j]] * f_part)
        })
        .sum())
}

/// `Σ_ij |P_ij s_ij|`, the weight the equation puts on transforms of `f`.
pub fn transform_contraction_coefficient(sys: &FifSystem, k: KernelSpec, pt: TransformPoint) -> Result<f64> {
    let ml = if k.kind.is_fractional() { Some(MittagLeffler::new(k.lambda)?) } else { None };
    Ok(patch_terms(sys, k, pt, ml.as_ref())?.iter().map(|t| (t.prefactor * sys.scalings()[[t.i, t.j]]).norm()).sum())
}

/// `max |direct - rhs| / (|direct| + 1e-12)` over the points, with `f`
/// sampled on a `resolution^2` raster.
pub fn check_transform_identity(
    sys: &FifSystem,
    k: KernelSpec,
    pts: &[TransformPoint],
    resolution: usize,
) -> Result<f64> {
    if pts.is_empty() {
        return Err(Error::InvalidArgument("no transform points".into()));
    }
    if resolution < 2 {
        return Err(Error::InvalidArgument(format!("resolution must be at least 2, got {resolution}")));
    }
    let field = sys.sample(resolution, resolution, SAMPLE_TOL)?;
    let residuals: Vec<f64> = pts
        .iter()
        .map(|&pt| {
            let direct = transform_direct(&field, k, pt)?;
            let rhs = transform_rhs(sys, &field, k, pt)?;
            Ok((direct - rhs).norm() / (direct.norm() + 1e-12))
        })
        .collect::<Result<_>>()?;
    Ok(residuals.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fif::build_system;
    use crate::grid::{NodeGrid, Rect};

    fn shifted() -> Rect {
        Rect::new(1.0, 2.0, 1.0, 2.0).unwrap()
    }

    #[test]
    fn mittag_leffler_identities() {
        assert!((mittag_leffler(1.0, 1.0).unwrap() - std::f64::consts::E).abs() < 1e-14);
        assert!((mittag_leffler(2.0, 1.0).unwrap() - 1f64.cosh()).abs() < 1e-14);
        assert!((mittag_leffler(2.0, 4.0).unwrap() - 2f64.cosh()).abs() < 1e-12);
        assert!((mittag_leffler(2.0, -1.0).unwrap() - 1f64.cos()).abs() < 1e-14);
        for &l in &[0.3, 0.5, 1.0, 2.5] {
            assert_eq!(mittag_leffler(l, 0.0).unwrap(), 1.0);
        }
        // E_{1/2}(0.7) = exp(0.49) erfc(-0.7)
        let expect = 2.7387021025613167;
        let got = mittag_leffler(0.5, 0.7).unwrap();
        assert!((got - expect).abs() < 1e-12, "{got} vs {expect}");
    }

    #[test]
    fn mittag_leffler_budget() {
        assert!(matches!(mittag_leffler(1.0, -40.0), Err(Error::SeriesBudgetExceeded { .. })));
        assert!(matches!(mittag_leffler(0.5, 500.0), Err(Error::SeriesBudgetExceeded { .. })));
        assert!(mittag_leffler(0.0, 1.0).is_err());
    }

    #[test]
    fn exponential_moments() {
        for &lam in &[
            Complex64::new(0.3, 0.0),
            Complex64::new(5.0, 0.0),
            Complex64::new(0.0, 2.0 * PI),
            Complex64::new(-2.0, 0.0),
        ] {
            for &len in &[0.25, 1.0, -0.5] {
                for m in 0..3 {
                    let n = 100_000;
                    let h = len / n as f64;
                    let brute: Complex64 = (0..n)
                        .map(|k| {
                            let u = (k as f64 + 0.5) * h;
                            (-lam * u).exp() * u.powi(m as i32) * h
                        })
                        .sum();
                    let got = exp_moment(lam, len, m);
                    assert!((got - brute).norm() < 1e-9, "λ={lam} L={len} m={m}: {got} vs {brute}");
                }
            }
        }
    }

    #[test]
    fn constant_field_transforms() {
        let r = shifted();
        let f = SampledField::from_fn(r, 257, 257, |_, _| 1.0).unwrap();
        let (s, t): (f64, f64) = (0.7, 1.9);
        let exact = ((-s).exp() - (-2.0 * s).exp()) * ((-t).exp() - (-2.0 * t).exp()) / (s * t);
        let lap = transform_direct(&f, KernelSpec::classical(KernelKind::Laplace), TransformPoint::new(s, t)).unwrap();
        assert!((lap.re - exact).abs() < 1e-5 * exact);
        let car =
            transform_direct(&f, KernelSpec::classical(KernelKind::LaplaceCarson), TransformPoint::new(s, t)).unwrap();
        assert!((car.re - s * t * lap.re).abs() < 1e-14);
        let fou =
            transform_direct(&f, KernelSpec::classical(KernelKind::Fourier), TransformPoint::new(0.0, 0.0)).unwrap();
        assert!((fou - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn laplace_needs_positive_corner() {
        let f = SampledField::from_fn(Rect::new(0.0, 1.0, 1.0, 2.0).unwrap(), 5, 5, |_, _| 1.0).unwrap();
        let r = transform_direct(&f, KernelSpec::classical(KernelKind::Laplace), TransformPoint::new(1.0, 1.0));
        assert!(matches!(r, Err(Error::DomainViolation { .. })));
        let ok = transform_direct(&f, KernelSpec::classical(KernelKind::Fourier), TransformPoint::new(1.0, 1.0));
        assert!(ok.is_ok());
    }

    #[test]
    fn fractional_laplace_reduces_at_unit_order() {
        let grid = NodeGrid::from_fn(|x, y| (x * x + y * y).sin(), 4, 4, shifted()).unwrap();
        let sys = build_system(&grid, 0.2).unwrap();
        let f = sys.sample(65, 65, 1e-10).unwrap();
        for &(s, t) in &[(0.5, 0.5), (1.0, 2.0), (2.0, 2.0)] {
            let pt = TransformPoint::new(s, t);
            let a = frac_transform_direct(&f, KernelKind::FracLaplace, 1.0, pt).unwrap();
            let b = transform_direct(&f, KernelSpec::classical(KernelKind::Laplace), pt).unwrap();
            assert!((a - b.re).abs() < 1e-10);
        }
    }

    /// Separable Jumarie integral of `E_λ(-(sx+ty)^λ)` on a dense grid after
    /// removing the endpoint singularity with `x = b - w^{1/λ}`.
    fn brute_frac_laplace(lambda: f64, s: f64, t: f64, r: &Rect) -> f64 {
        let n = 1500;
        let ml = MittagLeffler::new(lambda).unwrap();
        let (wx, wy) = ((r.b - r.a).powf(lambda), (r.d - r.c).powf(lambda));
        let (hx, hy) = (wx / n as f64, wy / n as f64);
        let mut acc = 0.0;
        for i in 0..n {
            let x = r.b - ((i as f64 + 0.5) * hx).powf(1.0 / lambda);
            for j in 0..n {
                let y = r.d - ((j as f64 + 0.5) * hy).powf(1.0 / lambda);
                acc += ml.eval(-(s * x + t * y).powf(lambda)).unwrap();
            }
        }
        acc * hx * hy
    }

    #[test]
    fn fractional_laplace_of_constant_against_brute_force() {
        let r = shifted();
        let f = SampledField::from_fn(r, 257, 257, |_, _| 1.0).unwrap();
        let got = frac_transform_direct(&f, KernelKind::FracLaplace, 0.8, TransformPoint::new(1.0, 0.5)).unwrap();
        let brute = brute_frac_laplace(0.8, 1.0, 0.5, &r);
        assert!((got - brute).abs() < 1e-4, "{got} vs {brute}");
    }

    #[test]
    fn sumudu_arguments() {
        let f = SampledField::from_fn(shifted(), 9, 9, |_, _| 0.0).unwrap();
        assert!(matches!(
            frac_transform_direct(&f, KernelKind::FracSumudu, 0.5, TransformPoint::new(0.0, 1.0)),
            Err(Error::ZeroScale)
        ));
        assert_eq!(frac_transform_direct(&f, KernelKind::FracSumudu, 0.5, TransformPoint::new(1.0, 1.0)).unwrap(), 0.0);
        assert!(frac_transform_direct(&f, KernelKind::FracLaplace, 1.5, TransformPoint::new(1.0, 1.0)).is_err());
    }

    #[test]
    fn zero_grid_rhs_vanishes() {
        let grid = NodeGrid::from_fn(|_, _| 0.0, 4, 4, shifted()).unwrap();
        let sys = build_system(&grid, 0.2).unwrap();
        let f = sys.sample(17, 17, 1e-9).unwrap();
        for kind in [KernelKind::Laplace, KernelKind::Fourier] {
            let v = transform_rhs(&sys, &f, KernelSpec::classical(kind), TransformPoint::new(1.0, 0.5)).unwrap();
            assert_eq!(v.norm(), 0.0);
        }
    }

    #[test]
    fn constant_grid_laplace_rhs_is_analytic() {
        let grid = NodeGrid::from_fn(|_, _| 1.0, 4, 4, shifted()).unwrap();
        let sys = build_system(&grid, 0.4).unwrap();
        let f = sys.sample(129, 129, 1e-12).unwrap();
        let (s, t): (f64, f64) = (1.3, 0.6);
        let exact = ((-s).exp() - (-2.0 * s).exp()) * ((-t).exp() - (-2.0 * t).exp()) / (s * t);
        let rhs =
            transform_rhs(&sys, &f, KernelSpec::classical(KernelKind::Laplace), TransformPoint::new(s, t)).unwrap();
        assert!((rhs.re - exact).abs() < 1e-6);
    }

    #[test]
    fn sumudu_identity_at_unit_order() {
        let grid = NodeGrid::from_fn(|x, y| (x * x + y * y).sin(), 4, 4, shifted()).unwrap();
        let sys = build_system(&grid, 0.2).unwrap();
        let k = KernelSpec::new(KernelKind::FracSumudu, 1.0).unwrap();
        let pts = [TransformPoint::new(1.0, 2.0), TransformPoint::new(0.5, 0.5)];
        let coarse = check_transform_identity(&sys, k, &pts, 33).unwrap();
        let fine = check_transform_identity(&sys, k, &pts, 129).unwrap();
        assert!(fine < 1e-2 && fine < coarse, "{coarse} -> {fine}");
    }
}
