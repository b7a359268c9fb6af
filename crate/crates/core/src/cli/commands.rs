use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use ndarray::Array2;

use super::config::{example_config, parse_raw, validate, ConfigError, OutputFormat, RawConfig, RunSpec};
use super::export::{write_atomic, write_cloud_csv, write_field_csv, write_pgm16};
use crate::calculus::{check_thm_partial_integral, TransformedSystem};
use crate::error::Error;
use crate::field::SampledField;
use crate::fif::{sample_fixed_point, FifSystem};
use crate::fractional::{check_thm_frac_derivative, check_thm_frac_integral, frac_integral_mixed, max_over_preserving};
use crate::grid::{Axis, NodeGrid};
use crate::transforms::{check_transform_identity, transform_direct, KernelSpec};

#[derive(Debug, Parser)]
#[command(name = "fracsurf", version, about = "Bivariate fractal interpolation surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Build the system and print its maps and scalings.
    Build,
    /// Sample the surface on a resolution^2 raster.
    Sample,
    /// Sample the surface and write a 16-bit PGM heightmap.
    Render,
    /// Generate the attractor by random iteration.
    Chaos,
    /// Residual of the self-referential equation.
    VerifySelfref,
    /// Fixed point of the partial-integral system.
    Integrate,
    /// Residual of the partial-integral functional equation.
    VerifyPartial,
    /// Mixed fractional integral of the sampled surface.
    FracIntegrate,
    /// Per-patch residuals of the fractional-integral functional equation.
    VerifyFrac,
    /// Per-patch residuals of the fractional-derivative functional equation.
    VerifyFracDeriv,
    /// Transform of the sampled surface at the configured points.
    Transform,
    /// Relative residual of the transform functional equation.
    VerifyTransform,
    /// Regenerate the worked example: node matrix, raster and residual report.
    ReproduceExample,
}

/// Flags that override configuration keys.
#[derive(Debug, Clone, Default, Args)]
struct Overrides {
    /// Configuration file (TOML); defaults to the worked example.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Vertical scaling shared by all patches.
    #[arg(long, global = true, allow_negative_numbers = true)]
    alpha: Option<f64>,
    /// Raster side length.
    #[arg(long, global = true)]
    resolution: Option<usize>,
    /// Evaluation tolerance of the fixed-point solver.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Pass threshold of verify-* commands.
    #[arg(long, global = true)]
    max_residual: Option<f64>,
    /// Chaos-game seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// csv or pgm16.
    #[arg(long, global = true)]
    format: Option<String>,
    /// laplace, laplace_carson, fourier, frac_laplace or frac_sumudu.
    #[arg(long, global = true)]
    kernel: Option<String>,
    /// Order of the fractional kernels, in (0, 1].
    #[arg(long, global = true)]
    lambda: Option<f64>,
    /// x or y.
    #[arg(long, global = true)]
    axis: Option<String>,
    /// Fractional orders p and q.
    #[arg(long, global = true, num_args = 2, value_names = ["P", "Q"])]
    gamma: Option<Vec<f64>>,
}

impl Overrides {
    fn apply(&self, raw: &mut RawConfig) {
        let run = &mut raw.run;
        if let Some(v) = self.alpha {
            raw.alpha = v;
        }
        macro_rules! set {
            ($($field:ident => $target:expr),*) => {$(
                if let Some(v) = &self.$field {
                    $target = Some(v.clone());
                }
            )*};
        }
        set!(resolution => run.resolution, tol => run.tol, max_residual => run.max_residual, seed => run.seed,
             kernel => run.kernel, lambda => run.lambda, axis => run.axis,
             out => raw.output.dir, format => raw.output.format);
        if let Some(g) = &self.gamma {
            run.gamma = Some([g[0], g[1]]);
        }
    }
}

#[derive(Debug)]
enum Failure {
    Validation(String),
    Verification(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Verification(_) => 2,
            Failure::Io(_) => 3,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Validation(format!("{} ({})", e, e.kind()))
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type Outcome = std::result::Result<(), Failure>;

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit code: 0 success, 1 invalid input, 2 failed verification,
/// 3 I/O error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return 1;
    }
    match execute(&cli) {
        Ok(()) => 0,
        Err(f) => {
            match &f {
                Failure::Validation(m) => eprintln!("error: {m}"),
                Failure::Verification(m) => eprintln!("verification failed: {m}"),
                Failure::Io(m) => eprintln!("i/o error: {m}"),
            }
            f.code()
        }
    }
}

/// Honors `FRACSURF_THREADS` (0 or unset: rayon's default).
fn configure_threads() -> std::result::Result<(), String> {
    let Ok(value) = std::env::var("FRACSURF_THREADS") else {
        return Ok(());
    };
    let n: usize =
        value.trim().parse().map_err(|_| format!("FRACSURF_THREADS must be a non-negative integer, got '{value}'"))?;
    if n > 0 {
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn load_spec(overrides: &Overrides) -> std::result::Result<RunSpec, Failure> {
    let mut raw = match &overrides.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
            parse_raw(&text)?
        }
        None => example_config(),
    };
    overrides.apply(&mut raw);
    Ok(validate(raw)?)
}

fn execute(cli: &Cli) -> Outcome {
    let spec = load_spec(&cli.overrides)?;
    let sys = spec.system()?;
    log::info!("system: {} x {} patches, sigma = {}", sys.grid().n(), sys.grid().m(), sys.sigma());
    match cli.command {
        Command::Build => build(&sys),
        Command::Sample => {
            let field = sample(&spec, &sys)?;
            emit_field(&spec, "surface", &field)
        }
        Command::Render => {
            let field = sample(&spec, &sys)?;
            emit(&spec.output.dir.join("surface.pgm"), |p| write_pgm16(&field, p).map(|_| ()))
        }
        Command::Chaos => chaos(&spec, &sys),
        Command::VerifySelfref => {
            let r = sys.check_self_referential(spec.run.probes, spec.run.tol)?;
            verdict("self-referential", r, spec.run.max_residual.unwrap_or(2.0 * spec.run.tol))
        }
        Command::Integrate => {
            let f = sample(&spec, &sys)?;
            let hat = TransformedSystem::partial_integral(&sys, &f, spec.run.axis)?;
            let field = sample_fixed_point(&hat, spec.run.resolution, spec.run.resolution, spec.run.tol)?;
            emit_field(&spec, &format!("integral_{}", axis_name(spec.run.axis)), &field)
        }
        Command::VerifyPartial => {
            let check = check_thm_partial_integral(&sys, spec.run.axis, spec.run.resolution, spec.run.tol)?;
            println!("generator_diff {:e}", check.generator_diff);
            verdict("partial-integral", check.residual, spec.run.max_residual.unwrap_or(5e-3))
        }
        Command::FracIntegrate => {
            let field = frac_integral_mixed(&sample(&spec, &sys)?, spec.run.gamma)?;
            emit_field(&spec, "frac_integral", &field)
        }
        Command::VerifyFrac => {
            let table = check_thm_frac_integral(&sys, spec.run.gamma, spec.run.resolution)?;
            patch_verdict("fractional-integral", &table, spec.run.max_residual.unwrap_or(1e-2))
        }
        Command::VerifyFracDeriv => {
            let table = check_thm_frac_derivative(&sys, spec.run.gamma, spec.run.resolution)?;
            patch_verdict("fractional-derivative", &table, spec.run.max_residual.unwrap_or(5e-2))
        }
        Command::Transform => transform(&spec, &sys),
        Command::VerifyTransform => {
            let k = kernel(&spec)?;
            let r = check_transform_identity(&sys, k, &spec.run.points, spec.run.resolution)?;
            if k.kind.is_fractional() && k.lambda != 1.0 {
                println!("{} residual {:e}", k.kind, r);
                println!("diagnostic only: the identity is not expected to hold for lambda != 1");
                Ok(())
            } else {
                verdict(k.kind.name(), r, spec.run.max_residual.unwrap_or(1e-2))
            }
        }
        Command::ReproduceExample => reproduce_example(&spec, &sys),
    }
}

fn axis_name(axis: Axis) -> &'static str {
    match axis {
        Axis::X => "x",
        Axis::Y => "y",
    }
}

fn kernel(spec: &RunSpec) -> std::result::Result<KernelSpec, Failure> {
    spec.run.kernel.ok_or_else(|| Failure::Validation("this command needs run.kernel (or --kernel)".into()))
}

fn sample(spec: &RunSpec, sys: &FifSystem) -> std::result::Result<SampledField, Failure> {
    Ok(sys.sample(spec.run.resolution, spec.run.resolution, spec.run.tol)?)
}

fn emit(path: &Path, write: impl FnOnce(&Path) -> io::Result<()>) -> Outcome {
    write(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn emit_field(spec: &RunSpec, stem: &str, field: &SampledField) -> Outcome {
    match spec.output.format {
        OutputFormat::Csv => emit(&spec.output.dir.join(format!("{stem}.csv")), |p| write_field_csv(field, p)),
        OutputFormat::Pgm16 => {
            emit(&spec.output.dir.join(format!("{stem}.pgm")), |p| write_pgm16(field, p).map(|_| ()))
        }
    }
}

fn verdict(name: &str, residual: f64, threshold: f64) -> Outcome {
    let pass = residual <= threshold;
    println!("{name} residual {residual:e} threshold {threshold:e} {}", if pass { "PASS" } else { "FAIL" });
    if pass {
        Ok(())
    } else {
        Err(Failure::Verification(format!("{name} residual {residual:e} exceeds {threshold:e}")))
    }
}

/// Prints the per-patch table; orientation-preserving patches (odd, odd)
/// are marked with `*` and decide the verdict.
fn patch_verdict(name: &str, table: &Array2<f64>, threshold: f64) -> Outcome {
    println!("patch residuals (1-based i, j; * = orientation preserving in both axes)");
    for ((i, j), r) in table.indexed_iter() {
        let mark = if i % 2 == 0 && j % 2 == 0 { "*" } else { " " };
        println!("{:>3} {:>3} {mark} {r:e}", i + 1, j + 1);
    }
    verdict(name, max_over_preserving(table), threshold)
}

fn build(sys: &FifSystem) -> Outcome {
    let g = sys.grid();
    println!("patches {} x {}, sigma {:e}", g.n(), g.m(), sys.sigma());
    for i in 1..=g.n() {
        let u = sys.map(Axis::X, i)?;
        println!("u_{i}(x) = {:e} x + {:e}", u.a, u.b);
    }
    for j in 1..=g.m() {
        let v = sys.map(Axis::Y, j)?;
        println!("v_{j}(y) = {:e} y + {:e}", v.a, v.b);
    }
    print!("{}", matrix_text("Z", g.zs(), 4));
    Ok(())
}

fn chaos(spec: &RunSpec, sys: &FifSystem) -> Outcome {
    let cloud = sys.chaos_game(spec.run.n_points, spec.run.seed, spec.run.burn_in)?;
    println!("points {}", cloud.len());
    println!("attractor distance {:e}", sys.attractor_distance(&cloud, spec.run.tol)?);
    match spec.output.format {
        OutputFormat::Csv => emit(&spec.output.dir.join("chaos.csv"), |p| write_cloud_csv(&cloud, p)),
        OutputFormat::Pgm16 => {
            let img = cloud.rasterize(sys.rect(), spec.run.resolution, spec.run.resolution)?;
            emit(&spec.output.dir.join("chaos.pgm"), |p| write_pgm16(&img, p).map(|_| ()))
        }
    }
}

fn transform(spec: &RunSpec, sys: &FifSystem) -> Outcome {
    let k = kernel(spec)?;
    let field = sample(spec, sys)?;
    let mut csv = String::from("s,t,re,im\n");
    println!("{} (lambda {})", k.kind, k.lambda);
    for pt in &spec.run.points {
        let v = transform_direct(&field, k, *pt)?;
        println!("s {:e} t {:e} value {:e} {:+e}i", pt.s, pt.t, v.re, v.im);
        writeln!(csv, "{:.16e},{:.16e},{:.16e},{:.16e}", pt.s, pt.t, v.re, v.im).expect("write to string");
    }
    emit(&spec.output.dir.join(format!("transform_{}.csv", k.kind)), |p| write_atomic(p, csv.as_bytes()))
}

fn matrix_text(name: &str, m: &Array2<f64>, decimals: usize) -> String {
    let mut out = format!("{name} =\n");
    for row in m.rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:>w$.decimals$}", w = decimals + 4)).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}

fn grid_field(grid: &NodeGrid) -> String {
    let mut out = String::from("x,y,z\n");
    for (i, &x) in grid.xs().iter().enumerate() {
        for (j, &y) in grid.ys().iter().enumerate() {
            writeln!(out, "{x:.16e},{y:.16e},{:.16e}", grid.z(i, j)).expect("write to string");
        }
    }
    out
}

fn reproduce_example(spec: &RunSpec, sys: &FifSystem) -> Outcome {
    let dir = &spec.output.dir;
    let grid = sys.grid();
    emit(&dir.join("Z.csv"), |p| write_atomic(p, grid_field(grid).as_bytes()))?;
    let field = sample(spec, sys)?;
    emit(&dir.join("surface.csv"), |p| write_field_csv(&field, p))?;
    emit(&dir.join("surface.pgm"), |p| write_pgm16(&field, p).map(|_| ()))?;

    let mut node_err: f64 = 0.0;
    for (i, &x) in grid.xs().iter().enumerate() {
        for (j, &y) in grid.ys().iter().enumerate() {
            node_err = node_err.max((sys.evaluate(x, y, spec.run.tol)? - grid.z(i, j)).abs());
        }
    }
    let mut report = matrix_text("Z", grid.zs(), 4);
    writeln!(report, "alpha {:e}", spec.alpha).expect("write to string");
    writeln!(report, "sigma {:e}", sys.sigma()).expect("write to string");
    writeln!(report, "raster {0} x {0}, tol {1:e}", spec.run.resolution, spec.run.tol).expect("write to string");
    writeln!(report, "interpolation residual {node_err:e}").expect("write to string");
    writeln!(report, "matching residual {:e}", sys.check_matching(64)).expect("write to string");
    let selfref = sys.check_self_referential(spec.run.probes, spec.run.tol)?;
    writeln!(report, "self-referential residual {selfref:e} ({} points)", spec.run.probes).expect("write to string");
    print!("{report}");
    emit(&dir.join("report.txt"), |p| write_atomic(p, report.as_bytes()))
}
