//! Interpolation data on a rectangular node grid and the affine contractions
//! `u_i`, `v_j` that fold the whole rectangle onto each node interval.
//!
//! Patch and interval indices in this module are 1-based (`1..=N`), matching
//! the usual notation for the maps; storage is 0-based.

use ndarray::Array2;

use crate::error::{Error, Result};

/// Coordinate axis selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub fn other(self) -> Axis {
        match self {
            Axis::X => Axis::Y,
            Axis::Y => Axis::X,
        }
    }
}

/// Closed rectangle `[a, b] x [c, d]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Rect {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let finite = [a, b, c, d].iter().all(|v| v.is_finite());
        if !finite || a >= b || c >= d {
            return Err(Error::InvalidRect { a, b, c, d });
        }
        Ok(Rect { a, b, c, d })
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    pub fn height(&self) -> f64 {
        self.d - self.c
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.a && x <= self.b && y >= self.c && y <= self.d
    }

    pub fn transpose(&self) -> Rect {
        Rect { a: self.c, b: self.d, c: self.a, d: self.b }
    }

    /// Lower and upper end along `axis`.
    pub fn span(&self, axis: Axis) -> (f64, f64) {
        match axis {
            Axis::X => (self.a, self.b),
            Axis::Y => (self.c, self.d),
        }
    }
}

/// Interpolation data `(x_i, y_j, z_ij)`, `i = 0..=N`, `j = 0..=M`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeGrid {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// `zs[[i, j]]` is the height over `(xs[i], ys[j])`.
    zs: Array2<f64>,
}

impl NodeGrid {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, zs: Array2<f64>) -> Result<Self> {
        if xs.len() < 2 || ys.len() < 2 {
            return Err(Error::DimensionMismatch(format!(
                "need at least two nodes per axis, got {} x {}",
                xs.len(),
                ys.len()
            )));
        }
        check_increasing(&xs, 'x')?;
        check_increasing(&ys, 'y')?;
        if zs.dim() != (xs.len(), ys.len()) {
            return Err(Error::DimensionMismatch(format!(
                "heights are {:?}, nodes require ({}, {})",
                zs.dim(),
                xs.len(),
                ys.len()
            )));
        }
        if zs.iter().any(|z| !z.is_finite()) {
            return Err(Error::InvalidArgument("non-finite height".into()));
        }
        if xs.len() == 2 || ys.len() == 2 {
            log::warn!(
                "grid with a single interval along an axis: the corresponding map is the identity, not a contraction"
            );
        }
        Ok(NodeGrid { xs, ys, zs })
    }

    /// Builds a grid from nested rows, `rows[i][j] = z_ij`.
    pub fn from_rows(xs: Vec<f64>, ys: Vec<f64>, rows: &[Vec<f64>]) -> Result<Self> {
        if rows.len() != xs.len() || rows.iter().any(|r| r.len() != ys.len()) {
            return Err(Error::DimensionMismatch(format!("height matrix must be {} x {}", xs.len(), ys.len())));
        }
        let zs = Array2::from_shape_fn((xs.len(), ys.len()), |(i, j)| rows[i][j]);
        Self::new(xs, ys, zs)
    }

    /// Samples `f` on `N+1` by `M+1` uniform nodes of `rect`.
    pub fn from_fn<F>(f: F, n: usize, m: usize, rect: Rect) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64,
    {
        if n < 1 || m < 1 {
            return Err(Error::DimensionMismatch(format!("N = {n}, M = {m}; both must be >= 1")));
        }
        let xs = uniform_nodes(rect.a, rect.b, n + 1);
        let ys = uniform_nodes(rect.c, rect.d, m + 1);
        let zs = Array2::from_shape_fn((n + 1, m + 1), |(i, j)| f(xs[i], ys[j]));
        Self::new(xs, ys, zs)
    }

    /// Number of intervals along x.
    pub fn n(&self) -> usize {
        self.xs.len() - 1
    }

    /// Number of intervals along y.
    pub fn m(&self) -> usize {
        self.ys.len() - 1
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn nodes(&self, axis: Axis) -> &[f64] {
        match axis {
            Axis::X => &self.xs,
            Axis::Y => &self.ys,
        }
    }

    pub fn zs(&self) -> &Array2<f64> {
        &self.zs
    }

    pub fn z(&self, i: usize, j: usize) -> f64 {
        self.zs[[i, j]]
    }

    pub fn rect(&self) -> Rect {
        Rect { a: self.xs[0], b: self.xs[self.n()], c: self.ys[0], d: self.ys[self.m()] }
    }

    /// Swaps the roles of x and y.
    pub fn transpose(&self) -> NodeGrid {
        NodeGrid { xs: self.ys.clone(), ys: self.xs.clone(), zs: self.zs.t().to_owned() }
    }

    /// All maps along `axis`, `maps[k]` being the map of interval `k + 1`.
    pub fn maps(&self, axis: Axis) -> Vec<AffineMap1D> {
        let nodes = self.nodes(axis);
        (1..nodes.len()).map(|i| fold_map(nodes, i)).collect()
    }
}

fn check_increasing(nodes: &[f64], axis: char) -> Result<()> {
    for (k, w) in nodes.windows(2).enumerate() {
        if !(w[1] > w[0]) || !w[0].is_finite() || !w[1].is_finite() {
            return Err(Error::NonMonotoneNodes { axis, index: k + 1 });
        }
    }
    Ok(())
}

/// `n` equispaced points from `lo` to `hi`, endpoints exact.
pub fn uniform_nodes(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let last = (n - 1) as f64;
    (0..n).map(|k| if k + 1 == n { hi } else { lo + (hi - lo) * (k as f64) / last }).collect()
}

/// The interval-selection map: odd `i` sends the lower end of the domain to
/// the left node and even `i` to the right node.
///
/// `k` must be `0` or `last` (the endpoint index `N` or `M`).
pub fn rho(i: usize, k: usize, last: usize) -> Result<usize> {
    if i < 1 {
        return Err(Error::IndexOutOfRange { index: i, max: last });
    }
    let odd = i % 2 == 1;
    match (k == 0, k == last) {
        (true, _) if odd => Ok(i - 1),
        (true, _) => Ok(i),
        (false, true) if odd => Ok(i),
        (false, true) => Ok(i - 1),
        _ => Err(Error::BadEndpointIndex { k, last }),
    }
}

/// One-dimensional affine map `t -> a t + b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap1D {
    pub a: f64,
    pub b: f64,
}

impl AffineMap1D {
    #[inline]
    pub fn apply(&self, t: f64) -> f64 {
        self.a * t + self.b
    }

    #[inline]
    pub fn inverse(&self, s: f64) -> f64 {
        (s - self.b) / self.a
    }

    /// Whether the map reverses orientation.
    pub fn is_reversing(&self) -> bool {
        self.a < 0.0
    }
}

fn fold_map(nodes: &[f64], i: usize) -> AffineMap1D {
    let last = nodes.len() - 1;
    let (lo, hi) = (nodes[0], nodes[last]);
    let len = hi - lo;
    let (left, right) = (nodes[i - 1], nodes[i]);
    if i % 2 == 1 {
        AffineMap1D { a: (right - left) / len, b: (left * hi - right * lo) / len }
    } else {
        AffineMap1D { a: (left - right) / len, b: (right * hi - left * lo) / len }
    }
}

/// Coefficients of `u_i` (axis x) or `v_j` (axis y), `i` in `1..=N`.
pub fn affine_coeffs(grid: &NodeGrid, axis: Axis, i: usize) -> Result<AffineMap1D> {
    let nodes = grid.nodes(axis);
    let max = nodes.len() - 1;
    if i < 1 || i > max {
        return Err(Error::IndexOutOfRange { index: i, max });
    }
    Ok(fold_map(nodes, i))
}

/// 1-based index `i` of the interval `[nodes[i-1], nodes[i]]` holding `x`.
/// Interior nodes belong to the interval on their left.
pub fn locate_interval(nodes: &[f64], x: f64) -> Result<usize> {
    let last = nodes.len() - 1;
    if !(x >= nodes[0] && x <= nodes[last]) {
        return Err(Error::OutOfDomain(x));
    }
    Ok(locate_clamped(nodes, x))
}

/// Same as [`locate_interval`] without the domain check; out-of-range values
/// go to the first or last interval.
#[inline]
pub(crate) fn locate_clamped(nodes: &[f64], x: f64) -> usize {
    let k = nodes.partition_point(|&v| v < x);
    k.clamp(1, nodes.len() - 1)
}

/// Right-biased variant: interior nodes belong to the interval on their right.
#[inline]
pub(crate) fn locate_clamped_right(nodes: &[f64], x: f64) -> usize {
    let k = nodes.partition_point(|&v| v <= x);
    k.clamp(1, nodes.len() - 1)
}
