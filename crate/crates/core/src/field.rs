//! Uniform rasters over a rectangle and point clouds.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::grid::{uniform_nodes, Rect};

/// Scalar samples on a uniform `nx x ny` lattice of `rect`, endpoints included.
/// `values[[r, c]]` is the value at `(x_r, y_c)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    rect: Rect,
    xs: Vec<f64>,
    ys: Vec<f64>,
    values: Array2<f64>,
}

impl SampledField {
    pub fn new(rect: Rect, values: Array2<f64>) -> Result<Self> {
        let (nx, ny) = values.dim();
        if nx < 2 || ny < 2 {
            return Err(Error::DimensionMismatch(format!("raster must be at least 2 x 2, got {nx} x {ny}")));
        }
        Ok(SampledField { rect, xs: uniform_nodes(rect.a, rect.b, nx), ys: uniform_nodes(rect.c, rect.d, ny), values })
    }

    pub fn from_fn<F: Fn(f64, f64) -> f64>(rect: Rect, nx: usize, ny: usize, f: F) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::DimensionMismatch(format!("raster must be at least 2 x 2, got {nx} x {ny}")));
        }
        let xs = uniform_nodes(rect.a, rect.b, nx);
        let ys = uniform_nodes(rect.c, rect.d, ny);
        let values = Array2::from_shape_fn((nx, ny), |(r, c)| f(xs[r], ys[c]));
        Ok(SampledField { rect, xs, ys, values })
    }

    pub fn rect(&self) -> Rect {
        self.rect
    }

    pub fn nx(&self) -> usize {
        self.xs.len()
    }

    pub fn ny(&self) -> usize {
        self.ys.len()
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn hx(&self) -> f64 {
        self.rect.width() / (self.nx() - 1) as f64
    }

    pub fn hy(&self) -> f64 {
        self.rect.height() / (self.ny() - 1) as f64
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[[r, c]]
    }

    /// Same raster geometry, new values.
    pub fn with_values(&self, values: Array2<f64>) -> Result<Self> {
        if values.dim() != self.values.dim() {
            return Err(Error::DimensionMismatch(format!("expected {:?}, got {:?}", self.values.dim(), values.dim())));
        }
        Ok(SampledField { rect: self.rect, xs: self.xs.clone(), ys: self.ys.clone(), values })
    }

    pub fn same_lattice(&self, other: &SampledField) -> bool {
        self.rect == other.rect && self.values.dim() == other.values.dim()
    }

    /// Bilinear interpolation; arguments are clamped into the rectangle.
    pub fn interpolate(&self, x: f64, y: f64) -> f64 {
        let (r, tx) = cell_of(self.rect.a, self.hx(), self.nx(), x);
        let (c, ty) = cell_of(self.rect.c, self.hy(), self.ny(), y);
        let v = &self.values;
        let lo = v[[r, c]] + tx * (v[[r + 1, c]] - v[[r, c]]);
        let hi = v[[r, c + 1]] + tx * (v[[r + 1, c + 1]] - v[[r, c + 1]]);
        lo + ty * (hi - lo)
    }

    /// Linear interpolation of row `r` (fixed x node) at ordinate `y`.
    pub fn interpolate_row(&self, r: usize, y: f64) -> f64 {
        let (c, ty) = cell_of(self.rect.c, self.hy(), self.ny(), y);
        let v = &self.values;
        v[[r, c]] + ty * (v[[r, c + 1]] - v[[r, c]])
    }

    pub fn transpose(&self) -> SampledField {
        SampledField {
            rect: self.rect.transpose(),
            xs: self.ys.clone(),
            ys: self.xs.clone(),
            values: self.values.t().to_owned(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &SampledField) -> Result<f64> {
        if !self.same_lattice(other) {
            return Err(Error::MismatchedDomain);
        }
        Ok(self.values.iter().zip(other.values.iter()).fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }
}

/// Cell index and fractional offset of `t` on a uniform lattice.
#[inline]
fn cell_of(lo: f64, h: f64, n: usize, t: f64) -> (usize, f64) {
    let pos = ((t - lo) / h).clamp(0.0, (n - 1) as f64);
    let k = (pos.floor() as usize).min(n - 2);
    (k, pos - k as f64)
}

/// Finite sample of points `(x, y, z)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    pub points: Vec<[f64; 3]>,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Bins the cloud into an `nx x ny` heightmap over `rect` keeping the
    /// largest height per cell. Empty cells take the global minimum height.
    pub fn rasterize(&self, rect: Rect, nx: usize, ny: usize) -> Result<SampledField> {
        if self.points.is_empty() {
            return Err(Error::InvalidArgument("empty point cloud".into()));
        }
        let mut cells = Array2::from_elem((nx.max(2), ny.max(2)), f64::NEG_INFINITY);
        let (nx, ny) = cells.dim();
        let zmin = self.points.iter().map(|p| p[2]).fold(f64::INFINITY, f64::min);
        for &[x, y, z] in &self.points {
            let r = (((x - rect.a) / rect.width()) * (nx - 1) as f64).round();
            let c = (((y - rect.c) / rect.height()) * (ny - 1) as f64).round();
            if r < 0.0 || c < 0.0 || r > (nx - 1) as f64 || c > (ny - 1) as f64 {
                continue;
            }
            let cell = &mut cells[[r as usize, c as usize]];
            *cell = cell.max(z);
        }
        cells.mapv_inplace(|v| if v.is_finite() { v } else { zmin });
        SampledField::new(rect, cells)
    }
}
