//! Bivariate fractal interpolation surfaces over rectangular grids.
//!
//! The crate builds the iterated function system associated with gridded
//! data, evaluates and samples its attractor, and provides partial and
//! fractional integration, fractional differentiation and integral transforms
//! of the resulting surfaces, with checkers for the functional identities they
//! satisfy.

// `!(x > 0.0)` style guards deliberately reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calculus;
pub mod cli;
pub mod error;
pub mod field;
pub mod fif;
pub mod fractional;
pub mod grid;
pub mod poly;
pub mod transforms;

pub use error::{Error, Result};
pub use field::{PointCloud, SampledField};
pub use fif::{build_system, FifSystem, SelfAffine};
pub use grid::{Axis, NodeGrid, Rect};
