#![allow(dead_code)]

use fracsurf::{NodeGrid, Rect};
use ndarray::Array2;
use proptest::prelude::*;

/// Strictly increasing nodes from positive gaps starting at `lo`.
pub fn nodes(count: usize, lo: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..1.0, count - 1).prop_map(move |gaps| {
        let mut out = vec![lo];
        for g in gaps {
            out.push(out.last().unwrap() + g);
        }
        out
    })
}

/// Random grids with `2..=max` intervals per axis and heights in [-1, 1].
pub fn grid(max: usize) -> impl Strategy<Value = NodeGrid> {
    (2..=max, 2..=max, -1.0f64..1.0, -1.0f64..1.0)
        .prop_flat_map(|(n, m, x0, y0)| {
            (nodes(n + 1, x0), nodes(m + 1, y0), prop::collection::vec(-1.0f64..1.0, (n + 1) * (m + 1)))
        })
        .prop_map(|(xs, ys, z)| {
            let shape = (xs.len(), ys.len());
            NodeGrid::new(xs, ys, Array2::from_shape_vec(shape, z).unwrap()).unwrap()
        })
}

pub fn unit() -> Rect {
    Rect::new(0.0, 1.0, 0.0, 1.0).unwrap()
}

/// Smallest slope of the fold-out maps, `min (x_i - x_{i-1}) / (x_N - x_0)`
/// over both axes.
pub fn min_slope(grid: &NodeGrid) -> f64 {
    [grid.xs(), grid.ys()]
        .iter()
        .map(|n| n.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min) / (n[n.len() - 1] - n[0]))
        .fold(f64::INFINITY, f64::min)
}
