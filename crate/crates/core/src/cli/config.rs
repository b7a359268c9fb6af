//! Experiment configuration files.
//!
//! A configuration is a TOML document with a top-level `alpha` and the
//! tables `[grid]`, `[run]` and `[output]`:
//!
//! ```toml
//! alpha = 0.2
//!
//! [grid]
//! preset = "sin_x2_plus_y2"   # or "bilinear" (with coeffs) / "constant" (with value)
//! N = 4
//! M = 4
//! rect = [0.0, 1.0, 0.0, 1.0]
//!
//! [run]
//! resolution = 129
//! tol = 1e-9
//!
//! [output]
//! dir = "out"
//! format = "csv"
//! ```
//!
//! Instead of a preset, `[grid]` may hold an inline height matrix `z`
//! (rows indexed by x) with optional node vectors `xs` and `ys`; missing
//! node vectors default to uniform nodes of `rect`. Unknown keys are
//! rejected.

use std::fmt;
use std::path::PathBuf;

use serde::Deserialize;

use crate::error::Error;
use crate::fif::{build_system, FifSystem};
use crate::fractional::FracOrder;
use crate::grid::{uniform_nodes, Axis, NodeGrid, Rect};
use crate::transforms::{KernelKind, KernelSpec, TransformPoint};

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    /// The document is not valid TOML or does not fit the schema.
    Parse { line: Option<usize>, message: String },
    /// A value violates a constraint of the numerical routines.
    Validation { invariant: String, message: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Parse { line: Some(l), message } => write!(f, "parse error at line {l}: {message}"),
            ConfigError::Parse { line: None, message } => write!(f, "parse error: {message}"),
            ConfigError::Validation { invariant, message } => write!(f, "validation error ({invariant}): {message}"),
        }
    }
}

impl std::error::Error for ConfigError {}

impl From<Error> for ConfigError {
    fn from(e: Error) -> Self {
        ConfigError::Validation { invariant: e.kind().to_string(), message: e.to_string() }
    }
}

fn invalid(invariant: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Validation { invariant: invariant.to_string(), message: message.into() }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub grid: RawGrid,
    pub alpha: f64,
    #[serde(default)]
    pub run: RawRun,
    #[serde(default)]
    pub output: RawOutput,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawGrid {
    pub preset: Option<String>,
    #[serde(rename = "N", alias = "n")]
    pub n: Option<usize>,
    #[serde(rename = "M", alias = "m")]
    pub m: Option<usize>,
    pub rect: Option<[f64; 4]>,
    pub coeffs: Option<[f64; 4]>,
    pub value: Option<f64>,
    pub xs: Option<Vec<f64>>,
    pub ys: Option<Vec<f64>>,
    pub z: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawRun {
    pub resolution: Option<usize>,
    pub tol: Option<f64>,
    pub max_residual: Option<f64>,
    pub gamma: Option<[f64; 2]>,
    pub axis: Option<String>,
    pub kernel: Option<String>,
    pub lambda: Option<f64>,
    pub points: Option<Vec<[f64; 2]>>,
    pub seed: Option<u64>,
    pub n_points: Option<usize>,
    pub burn_in: Option<usize>,
    pub probes: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawOutput {
    pub dir: Option<PathBuf>,
    pub format: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preset {
    SinX2PlusY2,
    /// `k0 + k1 x + k2 y + k3 x y`.
    Bilinear([f64; 4]),
    Constant(f64),
}

impl Preset {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match *self {
            Preset::SinX2PlusY2 => (x * x + y * y).sin(),
            Preset::Bilinear([k0, k1, k2, k3]) => k0 + k1 * x + k2 * y + k3 * x * y,
            Preset::Constant(v) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GridSource {
    Inline(NodeGrid),
    Preset { preset: Preset, n: usize, m: usize, rect: Rect },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Pgm16,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunParams {
    pub resolution: usize,
    pub tol: f64,
    /// Pass threshold for verification commands; each command has its own
    /// default when unset.
    pub max_residual: Option<f64>,
    pub gamma: FracOrder,
    pub axis: Axis,
    pub kernel: Option<KernelSpec>,
    pub points: Vec<TransformPoint>,
    pub seed: u64,
    pub n_points: usize,
    pub burn_in: usize,
    pub probes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub format: OutputFormat,
}

/// Validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub grid: GridSource,
    pub alpha: f64,
    pub run: RunParams,
    pub output: OutputSpec,
}

impl RunSpec {
    pub fn node_grid(&self) -> crate::Result<NodeGrid> {
        match &self.grid {
            GridSource::Inline(g) => Ok(g.clone()),
            GridSource::Preset { preset, n, m, rect } => NodeGrid::from_fn(|x, y| preset.eval(x, y), *n, *m, *rect),
        }
    }

    pub fn system(&self) -> crate::Result<FifSystem> {
        build_system(&self.node_grid()?, self.alpha)
    }
}

/// The worked example: `sin(x^2 + y^2)` on a 4 x 4 grid of the unit square
/// with vertical scaling 0.2.
pub fn example_config() -> RawConfig {
    RawConfig {
        grid: RawGrid { preset: Some("sin_x2_plus_y2".into()), n: Some(4), m: Some(4), ..Default::default() },
        alpha: 0.2,
        ..Default::default()
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

pub fn parse_raw(text: &str) -> Result<RawConfig, ConfigError> {
    toml::from_str(text).map_err(|e| ConfigError::Parse {
        line: e.span().map(|s| line_of(text, s.start)),
        message: e.message().to_string(),
    })
}

pub fn parse_config(text: &str) -> Result<RunSpec, ConfigError> {
    validate(parse_raw(text)?)
}

fn default_points() -> Vec<TransformPoint> {
    let vals = [0.5, 1.0, 2.0];
    vals.iter().flat_map(|&s| vals.iter().map(move |&t| TransformPoint::new(s, t))).collect()
}

fn positive(name: &str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(invalid("InvalidArgument", format!("{name} must be positive and finite, got {v}")))
    }
}

pub fn validate(raw: RawConfig) -> Result<RunSpec, ConfigError> {
    let rect = match raw.grid.rect {
        Some([a, b, c, d]) => Rect::new(a, b, c, d)?,
        None => Rect::new(0.0, 1.0, 0.0, 1.0)?,
    };
    let g = &raw.grid;
    let grid = match (&g.z, &g.preset) {
        (Some(_), Some(_)) => return Err(invalid("GridSource", "give either grid.z or grid.preset, not both")),
        (None, None) => return Err(invalid("GridSource", "grid needs grid.z or grid.preset")),
        (Some(rows), None) => {
            if g.coeffs.is_some() || g.value.is_some() || g.n.is_some() || g.m.is_some() {
                return Err(invalid("GridSource", "grid.N, grid.M, grid.coeffs and grid.value apply to presets only"));
            }
            let n = rows.len();
            let m = rows.first().map_or(0, Vec::len);
            if n < 2 || m < 2 {
                return Err(invalid("DimensionMismatch", "grid.z needs at least 2 x 2 entries"));
            }
            let xs = g.xs.clone().unwrap_or_else(|| uniform_nodes(rect.a, rect.b, n));
            let ys = g.ys.clone().unwrap_or_else(|| uniform_nodes(rect.c, rect.d, m));
            GridSource::Inline(NodeGrid::from_rows(xs, ys, rows)?)
        }
        (None, Some(name)) => {
            if g.xs.is_some() || g.ys.is_some() {
                return Err(invalid("GridSource", "grid.xs and grid.ys apply to inline grids only"));
            }
            let preset = match name.as_str() {
                "sin_x2_plus_y2" => Preset::SinX2PlusY2,
                "bilinear" => Preset::Bilinear(
                    g.coeffs.ok_or_else(|| invalid("GridSource", "bilinear preset needs grid.coeffs"))?,
                ),
                "constant" => {
                    Preset::Constant(g.value.ok_or_else(|| invalid("GridSource", "constant preset needs grid.value"))?)
                }
                other => return Err(invalid("GridSource", format!("unknown preset '{other}'"))),
            };
            if (g.coeffs.is_some() && name != "bilinear") || (g.value.is_some() && name != "constant") {
                return Err(invalid("GridSource", format!("grid.coeffs / grid.value do not apply to preset '{name}'")));
            }
            let n = g.n.ok_or_else(|| invalid("GridSource", "preset grids need grid.N"))?;
            let m = g.m.ok_or_else(|| invalid("GridSource", "preset grids need grid.M"))?;
            GridSource::Preset { preset, n, m, rect }
        }
    };

    let r = &raw.run;
    let gamma = r.gamma.unwrap_or([0.5, 0.5]);
    let gamma = FracOrder::new(gamma[0], gamma[1])?;
    gamma.complement()?;
    let axis = match r.axis.as_deref().unwrap_or("x") {
        "x" => Axis::X,
        "y" => Axis::Y,
        other => return Err(invalid("InvalidArgument", format!("axis must be 'x' or 'y', got '{other}'"))),
    };
    let kernel = match &r.kernel {
        Some(name) => Some(KernelSpec::new(name.parse::<KernelKind>()?, r.lambda.unwrap_or(1.0))?),
        None if r.lambda.is_some() => return Err(invalid("InvalidArgument", "run.lambda needs run.kernel")),
        None => None,
    };
    let points = match &r.points {
        Some(p) => p.iter().map(|&[s, t]| TransformPoint::new(s, t)).collect(),
        None => default_points(),
    };
    if points.is_empty() {
        return Err(invalid("InvalidArgument", "run.points is empty"));
    }
    if let Some(k) = kernel {
        if matches!(k.kind, KernelKind::Laplace | KernelKind::LaplaceCarson) {
            if !(rect.a > 0.0 && rect.c > 0.0) {
                return Err(Error::DomainViolation { a: rect.a, c: rect.c }.into());
            }
            if points.iter().any(|p| !(p.s > 0.0 && p.t > 0.0)) {
                return Err(invalid("InvalidArgument", format!("{} needs positive transform points", k.kind)));
            }
        }
        if k.kind == KernelKind::FracSumudu && points.iter().any(|p| p.s == 0.0 || p.t == 0.0) {
            return Err(Error::ZeroScale.into());
        }
    }
    let resolution = r.resolution.unwrap_or(129);
    if resolution < 3 {
        return Err(invalid("InvalidArgument", format!("run.resolution must be at least 3, got {resolution}")));
    }
    let n_points = r.n_points.unwrap_or(100_000);
    let burn_in = r.burn_in.unwrap_or(50);
    if n_points <= burn_in {
        return Err(invalid(
            "InvalidArgument",
            format!("run.n_points ({n_points}) must exceed run.burn_in ({burn_in})"),
        ));
    }
    let probes = r.probes.unwrap_or(1000);
    if probes == 0 {
        return Err(invalid("InvalidArgument", "run.probes must be positive"));
    }
    let run = RunParams {
        resolution,
        tol: positive("run.tol", r.tol.unwrap_or(1e-9))?,
        max_residual: r.max_residual.map(|v| positive("run.max_residual", v)).transpose()?,
        gamma,
        axis,
        kernel,
        points,
        seed: r.seed.unwrap_or(0),
        n_points,
        burn_in,
        probes,
    };

    let format = match raw.output.format.as_deref().unwrap_or("csv") {
        "csv" => OutputFormat::Csv,
        "pgm16" => OutputFormat::Pgm16,
        other => {
            return Err(invalid("InvalidArgument", format!("output.format must be 'csv' or 'pgm16', got '{other}'")))
        }
    };
    let output = OutputSpec { dir: raw.output.dir.clone().unwrap_or_else(|| PathBuf::from("out")), format };

    let spec = RunSpec { grid, alpha: raw.alpha, run, output };
    spec.system()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = "alpha = 0.2\n[grid]\npreset = \"sin_x2_plus_y2\"\nN = 4\nM = 4\n";

    #[test]
    fn example_document() {
        let spec = parse_config(EXAMPLE).unwrap();
        assert_eq!(spec.alpha, 0.2);
        let grid = spec.node_grid().unwrap();
        assert_eq!((grid.n(), grid.m()), (4, 4));
        assert!((grid.z(4, 4) - 2f64.sin()).abs() < 1e-15);
        assert_eq!(spec, validate(example_config()).unwrap());
    }

    #[test]
    fn scaling_out_of_range() {
        let err = parse_config(&EXAMPLE.replace("0.2", "1.5")).unwrap_err();
        assert!(
            matches!(err, ConfigError::Validation { ref invariant, .. } if invariant == "ScalingOutOfRange"),
            "{err}"
        );
    }

    #[test]
    fn empty_document() {
        assert!(matches!(parse_config(""), Err(ConfigError::Parse { .. })));
    }

    #[test]
    fn unknown_key_reports_line() {
        let err = parse_config(&format!("{EXAMPLE}bogus = 1\n")).unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: Some(6), .. }), "{err}");
    }

    #[test]
    fn inline_grid() {
        let text = "alpha = 0.1\n[grid]\nz = [[0.0, 1.0], [2.0, 3.0], [4.0, 5.0]]\nys = [0.0, 2.0]\nrect = [0.0, 1.0, 0.0, 2.0]\n";
        let grid = parse_config(text).unwrap().node_grid().unwrap();
        assert_eq!(grid.xs(), &[0.0, 0.5, 1.0]);
        assert_eq!(grid.z(2, 1), 5.0);
        let bad = text.replace("ys = [0.0, 2.0]", "ys = [2.0, 0.0]");
        assert!(matches!(parse_config(&bad), Err(ConfigError::Validation { .. })));
    }

    #[test]
    fn laplace_kernel_needs_positive_corner() {
        let err = parse_config(&format!("{EXAMPLE}[run]\nkernel = \"laplace\"\n")).unwrap_err();
        assert!(matches!(err, ConfigError::Validation { ref invariant, .. } if invariant == "DomainViolation"));
        let shifted = EXAMPLE.replace("M = 4\n", "M = 4\nrect = [1.0, 2.0, 1.0, 2.0]\n");
        assert!(parse_config(&format!("{shifted}[run]\nkernel = \"laplace\"\n")).is_ok());
    }

    #[test]
    fn run_constraints() {
        for run in [
            "gamma = [1.0, 0.5]",
            "resolution = 2",
            "tol = 0.0",
            "kernel = \"fourier\"\nlambda = 0.5",
            "n_points = 10\nburn_in = 10",
            "axis = \"z\"",
        ] {
            let text = format!("{EXAMPLE}[run]\n{run}\n");
            assert!(matches!(parse_config(&text), Err(ConfigError::Validation { .. })), "{run}");
        }
    }
}
