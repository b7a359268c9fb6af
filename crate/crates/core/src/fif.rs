//! The iterated function system `W_ij(x, y, z) = (u_i(x), v_j(y), s_ij z + q_ij(x, y))`
//! and its attractor, the graph of the fractal interpolation function `f`.
//!
//! `f` is the fixed point of the Read-Bajraktarević operator
//! `(Tg)(x, y) = s_ij g(u_i^-1 x, v_j^-1 y) + q_ij(u_i^-1 x, v_j^-1 y)` on `I_i x J_j`.
//! Point values are obtained by unrolling that equation along the address
//! chain of `(x, y)`; the truncation depth follows from the geometric bound on
//! the remainder.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{PointCloud, SampledField};
use crate::grid::{locate_clamped, locate_clamped_right, rho, AffineMap1D, Axis, NodeGrid, Rect};
use crate::poly::Poly2;

const MAX_DEPTH: usize = 100_000;

/// Node abscissae together with the maps `u_i`, `v_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub u: Vec<AffineMap1D>,
    pub v: Vec<AffineMap1D>,
    pub rect: Rect,
}

impl Geometry {
    pub fn from_grid(grid: &NodeGrid) -> Self {
        Geometry {
            xs: grid.xs().to_vec(),
            ys: grid.ys().to_vec(),
            u: grid.maps(Axis::X),
            v: grid.maps(Axis::Y),
            rect: grid.rect(),
        }
    }

    pub fn n(&self) -> usize {
        self.u.len()
    }

    pub fn m(&self) -> usize {
        self.v.len()
    }

    pub fn transpose(&self) -> Self {
        Geometry {
            xs: self.ys.clone(),
            ys: self.xs.clone(),
            u: self.v.clone(),
            v: self.u.clone(),
            rect: self.rect.transpose(),
        }
    }

    pub fn maps(&self, axis: Axis) -> &[AffineMap1D] {
        match axis {
            Axis::X => &self.u,
            Axis::Y => &self.v,
        }
    }

    /// Patch (0-based) holding `(x, y)` and the pulled-back point.
    #[inline]
    fn pullback(&self, x: f64, y: f64, right_ties: bool) -> (usize, usize, f64, f64) {
        let (i, j) = if right_ties {
            (locate_clamped_right(&self.xs, x), locate_clamped_right(&self.ys, y))
        } else {
            (locate_clamped(&self.xs, x), locate_clamped(&self.ys, y))
        };
        let r = &self.rect;
        (i - 1, j - 1, pull(&self.xs, i, x, r.a, r.b), pull(&self.ys, j, y, r.c, r.d))
    }

    fn check_domain(&self, x: f64, y: f64) -> Result<()> {
        let r = &self.rect;
        if !(x >= r.a && x <= r.b) {
            return Err(Error::OutOfDomain(x));
        }
        if !(y >= r.c && y <= r.d) {
            return Err(Error::OutOfDomain(y));
        }
        Ok(())
    }
}

/// Inverse of the `i`-th fold-out map at `x`, through the local coordinate of
/// `[nodes[i-1], nodes[i]]` so that interval ends land exactly on `lo` and
/// `hi`. Rounding residue at a node would otherwise be expanded by every
/// later pullback and, on rough surfaces, shift the value noticeably.
#[inline]
fn pull(nodes: &[f64], i: usize, x: f64, lo: f64, hi: f64) -> f64 {
    let (l, r) = (nodes[i - 1], nodes[i]);
    let t = ((x - l) / (r - l)).clamp(0.0, 1.0);
    let t = if i % 2 == 1 { t } else { 1.0 - t };
    if t <= 0.5 {
        lo + (hi - lo) * t
    } else {
        hi - (hi - lo) * (1.0 - t)
    }
}

/// A self-affine functional equation `g(u_i x, v_j y) = s_ij g(x, y) + offset_ij(x, y)`.
///
/// Indices passed to `scaling` and `offset` are 0-based.
pub trait SelfAffine: Sync {
    fn geometry(&self) -> &Geometry;
    fn scaling(&self, i: usize, j: usize) -> f64;
    fn offset(&self, i: usize, j: usize, x: f64, y: f64) -> f64;
    /// Upper bound of `|offset_ij|` over the domain, all patches.
    fn offset_bound(&self) -> f64;

    /// Stand-in for the fixed point once the series is truncated.
    fn baseline(&self, _x: f64, _y: f64) -> f64 {
        0.0
    }

    fn baseline_bound(&self) -> f64 {
        0.0
    }

    fn max_scaling(&self) -> f64 {
        let g = self.geometry();
        let mut sigma: f64 = 0.0;
        for i in 0..g.n() {
            for j in 0..g.m() {
                sigma = sigma.max(self.scaling(i, j).abs());
            }
        }
        sigma
    }
}

/// Number of unrolled steps guaranteeing a remainder below `tol`.
fn truncation_depth(sigma: f64, remainder: f64, tol: f64) -> usize {
    if sigma == 0.0 || remainder == 0.0 || tol >= remainder {
        return 1;
    }
    let k = ((tol / remainder).ln() / sigma.ln()).ceil();
    (k as usize).clamp(1, MAX_DEPTH)
}

/// Evaluation plan shared by every point of a sampling run.
struct Unroller<'a, S: SelfAffine + ?Sized> {
    sys: &'a S,
    depth: usize,
}

impl<'a, S: SelfAffine + ?Sized> Unroller<'a, S> {
    fn new(sys: &'a S, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
        }
        let sigma = sys.max_scaling();
        if !(sigma < 1.0) {
            return Err(Error::NonContractive(format!("max |s_ij| = {sigma}")));
        }
        let remainder = sys.offset_bound() / (1.0 - sigma) + sys.baseline_bound();
        Ok(Unroller { sys, depth: truncation_depth(sigma, remainder, tol) })
    }

    fn value(&self, x: f64, y: f64, right_ties: bool) -> f64 {
        let g = self.sys.geometry();
        let (mut px, mut py) = (x, y);
        let mut acc = 0.0;
        let mut weight = 1.0;
        for _ in 0..self.depth {
            let (i, j, qx, qy) = g.pullback(px, py, right_ties);
            px = qx;
            py = qy;
            acc += weight * self.sys.offset(i, j, px, py);
            weight *= self.sys.scaling(i, j);
            if weight == 0.0 {
                return acc;
            }
        }
        acc + weight * self.sys.baseline(px, py)
    }
}

/// Fixed-point value at `(x, y)` with absolute error at most `tol`.
pub fn fixed_point_value<S: SelfAffine + ?Sized>(sys: &S, x: f64, y: f64, tol: f64) -> Result<f64> {
    sys.geometry().check_domain(x, y)?;
    Ok(Unroller::new(sys, tol)?.value(x, y, false))
}

/// Samples the fixed point on a uniform `nx x ny` raster, rows in parallel.
pub fn sample_fixed_point<S: SelfAffine + ?Sized>(sys: &S, nx: usize, ny: usize, tol: f64) -> Result<SampledField> {
    let plan = Unroller::new(sys, tol)?;
    let template = SampledField::from_fn(sys.geometry().rect, nx, ny, |_, _| 0.0)?;
    let (xs, ys) = (template.xs(), template.ys());
    let rows: Vec<Vec<f64>> = xs.par_iter().map(|&x| ys.iter().map(|&y| plan.value(x, y, false)).collect()).collect();
    let values = Array2::from_shape_fn((nx, ny), |(r, c)| rows[r][c]);
    template.with_values(values)
}

/// Fractal interpolation system over a [`NodeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct FifSystem {
    grid: NodeGrid,
    geom: Geometry,
    /// `scalings[[i-1, j-1]] = s_ij`.
    scalings: Array2<f64>,
    /// `q[[i-1, j-1]] = q_ij`, defined on the whole of `I x J`.
    q: Array2<Poly2>,
    baseline: Poly2,
}

/// System with constant vertical scaling `alpha` and bilinear `q_ij`
/// satisfying `q_ij(x_k, y_l) = z_{rho(i,k), rho(j,l)} - alpha z_kl` at the
/// four corners of the domain.
pub fn build_system(grid: &NodeGrid, alpha: f64) -> Result<FifSystem> {
    if !(alpha.abs() < 1.0) {
        return Err(Error::ScalingOutOfRange(alpha));
    }
    let (n, m) = (grid.n(), grid.m());
    let rect = grid.rect();
    let mut q = Vec::with_capacity(n * m);
    for i in 1..=n {
        for j in 1..=m {
            let corner =
                |k: usize, l: usize| -> Result<f64> { Ok(grid.z(rho(i, k, n)?, rho(j, l, m)?) - alpha * grid.z(k, l)) };
            let values = [corner(0, 0)?, corner(n, 0)?, corner(0, m)?, corner(n, m)?];
            q.push(Poly2::bilinear_through_corners(&rect, values));
        }
    }
    let q = Array2::from_shape_vec((n, m), q).expect("patch count");
    FifSystem::from_parts(grid.clone(), Array2::from_elem((n, m), alpha), q)
}

impl FifSystem {
    /// Assembles a system from explicit per-patch scalings and offsets. No
    /// contraction check is made here; the fixed-point routines make it.
    pub fn from_parts(grid: NodeGrid, scalings: Array2<f64>, q: Array2<Poly2>) -> Result<Self> {
        let dims = (grid.n(), grid.m());
        if scalings.dim() != dims || q.dim() != dims {
            return Err(Error::DimensionMismatch(format!(
                "expected {dims:?} patches, got scalings {:?} and offsets {:?}",
                scalings.dim(),
                q.dim()
            )));
        }
        let rect = grid.rect();
        let (n, m) = dims;
        let baseline = Poly2::bilinear_through_corners(&rect, [grid.z(0, 0), grid.z(n, 0), grid.z(0, m), grid.z(n, m)]);
        Ok(FifSystem { geom: Geometry::from_grid(&grid), grid, scalings, q, baseline })
    }

    pub fn grid(&self) -> &NodeGrid {
        &self.grid
    }

    pub fn scalings(&self) -> &Array2<f64> {
        &self.scalings
    }

    pub fn offsets(&self) -> &Array2<Poly2> {
        &self.q
    }

    pub fn offsets_mut(&mut self) -> &mut Array2<Poly2> {
        &mut self.q
    }

    pub fn rect(&self) -> Rect {
        self.geom.rect
    }

    pub fn sigma(&self) -> f64 {
        self.max_scaling()
    }

    /// Map `u_i` (axis x) or `v_j` (axis y), 1-based.
    pub fn map(&self, axis: Axis, i: usize) -> Result<AffineMap1D> {
        let maps = self.geom.maps(axis);
        maps.get(i.wrapping_sub(1)).copied().ok_or(Error::IndexOutOfRange { index: i, max: maps.len() })
    }

    /// `s_ij`, 1-based.
    pub fn scaling_at(&self, i: usize, j: usize) -> Result<f64> {
        self.patch_index(i, j).map(|(i, j)| self.scalings[[i, j]])
    }

    fn patch_index(&self, i: usize, j: usize) -> Result<(usize, usize)> {
        let (n, m) = self.scalings.dim();
        if i < 1 || i > n {
            return Err(Error::IndexOutOfRange { index: i, max: n });
        }
        if j < 1 || j > m {
            return Err(Error::IndexOutOfRange { index: j, max: m });
        }
        Ok((i - 1, j - 1))
    }

    /// `q_ij(x, y)`, 1-based patch indices.
    pub fn q_eval(&self, i: usize, j: usize, x: f64, y: f64) -> Result<f64> {
        let (i, j) = self.patch_index(i, j)?;
        self.geom.check_domain(x, y)?;
        Ok(self.q[[i, j]].eval(x, y))
    }

    /// Value of the fractal interpolation function, absolute error `<= tol`.
    pub fn evaluate(&self, x: f64, y: f64, tol: f64) -> Result<f64> {
        fixed_point_value(self, x, y, tol)
    }

    /// Like [`FifSystem::evaluate`] but points on an interior node line are
    /// pulled back through the patch on their right (or above).
    pub fn evaluate_right_ties(&self, x: f64, y: f64, tol: f64) -> Result<f64> {
        self.geom.check_domain(x, y)?;
        Ok(Unroller::new(self, tol)?.value(x, y, true))
    }

    pub fn sample(&self, nx: usize, ny: usize, tol: f64) -> Result<SampledField> {
        sample_fixed_point(self, nx, ny, tol)
    }

    /// One application of the Read-Bajraktarević operator to a raster; the
    /// argument is read through bilinear interpolation.
    pub fn apply_operator(&self, g: &SampledField) -> Result<SampledField> {
        if g.rect() != self.rect() {
            return Err(Error::MismatchedDomain);
        }
        let values = Array2::from_shape_fn((g.nx(), g.ny()), |(r, c)| {
            let (i, j, px, py) = self.geom.pullback(g.xs()[r], g.ys()[c], false);
            self.scalings[[i, j]] * g.interpolate(px, py) + self.q[[i, j]].eval(px, py)
        });
        g.with_values(values)
    }

    /// Random iteration of the maps `W_ij` starting at `(a, c, 0)`. The first
    /// `burn_in` iterates are discarded, so `n_points - burn_in` points are
    /// returned.
    pub fn chaos_game(&self, n_points: usize, seed: u64, burn_in: usize) -> Result<PointCloud> {
        if n_points <= burn_in {
            return Err(Error::InvalidArgument(format!("n_points ({n_points}) must exceed burn_in ({burn_in})")));
        }
        let sigma = self.sigma();
        if !(sigma < 1.0) {
            return Err(Error::NonContractive(format!("max |s_ij| = {sigma}")));
        }
        if let Some(map) = self.geom.u.iter().chain(&self.geom.v).find(|m| m.a.abs() >= 1.0) {
            return Err(Error::NonContractive(format!("map slope {} is not below 1 in magnitude", map.a)));
        }
        let (n, m) = self.scalings.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rect = self.rect();
        let (mut x, mut y, mut z) = (rect.a, rect.c, 0.0);
        let mut points = Vec::with_capacity(n_points - burn_in);
        for step in 0..n_points {
            let k = rng.random_range(0..n * m);
            let (i, j) = (k / m, k % m);
            z = self.scalings[[i, j]] * z + self.q[[i, j]].eval(x, y);
            x = self.geom.u[i].apply(x);
            y = self.geom.v[j].apply(y);
            if step >= burn_in {
                points.push([x, y, z]);
            }
        }
        Ok(PointCloud { points })
    }

    /// Largest vertical distance between the cloud and the graph of `f`.
    pub fn attractor_distance(&self, cloud: &PointCloud, tol: f64) -> Result<f64> {
        if cloud.is_empty() {
            return Err(Error::InvalidArgument("empty point cloud".into()));
        }
        let plan = Unroller::new(self, tol)?;
        let rect = self.rect();
        cloud
            .points
            .par_iter()
            .map(|&[x, y, z]| {
                if !rect.contains(x, y) {
                    return Err(Error::OutOfDomain(if rect.contains(x, rect.c) { y } else { x }));
                }
                Ok((z - plan.value(x, y, false)).abs())
            })
            .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
    }

    /// Largest violation of the seam matching conditions
    /// `F_ij(x*, y, z) = F_{i+1,j}(x*, y, z)` (and the y analogue), sampled at
    /// `n_samples` points along each seam and three heights.
    pub fn check_matching(&self, n_samples: usize) -> f64 {
        let n_samples = n_samples.max(2);
        let (n, m) = self.scalings.dim();
        let rect = self.rect();
        let zmax = self.grid.zs().iter().fold(1.0_f64, |a, z| a.max(z.abs()));
        let heights = [-zmax, 0.0, zmax];
        let along = |lo: f64, hi: f64| (0..n_samples).map(move |k| lo + (hi - lo) * k as f64 / (n_samples - 1) as f64);
        let f = |i: usize, j: usize, x: f64, y: f64, z: f64| self.scalings[[i, j]] * z + self.q[[i, j]].eval(x, y);
        let mut worst: f64 = 0.0;
        for i in 0..n.saturating_sub(1) {
            let seam = self.grid.xs()[i + 1];
            let xstar = self.geom.u[i].inverse(seam);
            for j in 0..m {
                for y in along(rect.c, rect.d) {
                    for &z in &heights {
                        worst = worst.max((f(i, j, xstar, y, z) - f(i + 1, j, xstar, y, z)).abs());
                    }
                }
            }
        }
        for j in 0..m.saturating_sub(1) {
            let seam = self.grid.ys()[j + 1];
            let ystar = self.geom.v[j].inverse(seam);
            for i in 0..n {
                for x in along(rect.a, rect.b) {
                    for &z in &heights {
                        worst = worst.max((f(i, j, x, ystar, z) - f(i, j + 1, x, ystar, z)).abs());
                    }
                }
            }
        }
        worst
    }

    /// Largest residual of `f(u_i x, v_j y) = s_ij f(x, y) + q_ij(x, y)` over
    /// every patch and `n_points` Halton points of the domain.
    pub fn check_self_referential(&self, n_points: usize, tol: f64) -> Result<f64> {
        let plan = Unroller::new(self, tol)?;
        let rect = self.rect();
        let (n, m) = self.scalings.dim();
        let worst = (1..=n_points)
            .into_par_iter()
            .map(|k| {
                let x = rect.a + rect.width() * radical_inverse(k, 2);
                let y = rect.c + rect.height() * radical_inverse(k, 3);
                let fxy = plan.value(x, y, false);
                let mut worst: f64 = 0.0;
                for i in 0..n {
                    for j in 0..m {
                        let image = plan.value(self.geom.u[i].apply(x), self.geom.v[j].apply(y), false);
                        let rhs = self.scalings[[i, j]] * fxy + self.q[[i, j]].eval(x, y);
                        worst = worst.max((image - rhs).abs());
                    }
                }
                worst
            })
            .reduce(|| 0.0, f64::max);
        Ok(worst)
    }

    /// The same system with x and y exchanged.
    pub fn transpose(&self) -> FifSystem {
        FifSystem {
            grid: self.grid.transpose(),
            geom: self.geom.transpose(),
            scalings: self.scalings.t().to_owned(),
            q: self.q.t().mapv(|p| p.transpose()),
            baseline: self.baseline.transpose(),
        }
    }
}

impl SelfAffine for FifSystem {
    fn geometry(&self) -> &Geometry {
        &self.geom
    }

    #[inline]
    fn scaling(&self, i: usize, j: usize) -> f64 {
        self.scalings[[i, j]]
    }

    #[inline]
    fn offset(&self, i: usize, j: usize, x: f64, y: f64) -> f64 {
        self.q[[i, j]].eval(x, y)
    }

    fn offset_bound(&self) -> f64 {
        let rect = self.rect();
        self.q.iter().map(|p| p.sup_bound(&rect)).fold(0.0, f64::max)
    }

    fn baseline(&self, x: f64, y: f64) -> f64 {
        self.baseline.eval(x, y)
    }

    fn baseline_bound(&self) -> f64 {
        self.baseline.sup_bound(&self.rect())
    }
}

/// Van der Corput radical inverse of `k` in `base`.
pub(crate) fn radical_inverse(mut k: usize, base: usize) -> f64 {
    let inv = 1.0 / base as f64;
    let (mut value, mut scale) = (0.0, inv);
    while k > 0 {
        value += (k % base) as f64 * scale;
        k /= base;
        scale *= inv;
    }
    value
}
