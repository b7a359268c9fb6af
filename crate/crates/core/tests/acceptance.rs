//! Acceptance criteria. Prints one PASS/FAIL line per criterion and fails if
//! any criterion fails.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use fracsurf::calculus::{check_thm_double_integral, check_thm_partial_integral};
use fracsurf::fractional::{
    check_thm_frac_derivative, check_thm_frac_integral, inverse_pair_error, max_over_preserving, FracOrder,
};
use fracsurf::transforms::{
    check_transform_identity, frac_transform_direct, mittag_leffler, transform_direct, KernelKind, KernelSpec,
    TransformPoint,
};
use fracsurf::{build_system, Axis, FifSystem, NodeGrid, Rect};

/// The worked example's height matrix, printed to four decimals.
const EXAMPLE_Z: [[f64; 5]; 5] = [
    [0.0, 0.0625, 0.2474, 0.5333, 0.8415],
    [0.0625, 0.1247, 0.3074, 0.5851, 0.8736],
    [0.2474, 0.3074, 0.4794, 0.7260, 0.9490],
    [0.5333, 0.5851, 0.7260, 0.9023, 1.0000],
    [0.8415, 0.8736, 0.9490, 1.0000, 0.9093],
];

fn unit() -> Rect {
    Rect::new(0.0, 1.0, 0.0, 1.0).unwrap()
}

fn example_grid(rect: Rect) -> NodeGrid {
    NodeGrid::from_fn(|x, y| (x * x + y * y).sin(), 4, 4, rect).unwrap()
}

fn example_system(rect: Rect) -> FifSystem {
    build_system(&example_grid(rect), 0.2).unwrap()
}

/// `z = xy` with zero vertical scaling: the attractor is exactly `xy`.
fn smooth_surrogate() -> FifSystem {
    build_system(&NodeGrid::from_fn(|x, y| x * y, 4, 4, unit()).unwrap(), 0.0).unwrap()
}

struct Report {
    failures: Vec<u32>,
}

impl Report {
    fn record(&mut self, id: u32, title: &str, pass: bool, detail: String, elapsed: Duration, limit: Option<Duration>) {
        let in_time = limit.is_none_or(|l| elapsed <= l);
        let ok = pass && in_time;
        let time = match limit {
            Some(l) => format!("{:.2}s of {:.0}s", elapsed.as_secs_f64(), l.as_secs_f64()),
            None => format!("{:.2}s", elapsed.as_secs_f64()),
        };
        println!("{} criterion {id}: {title}: {detail} [{time}]", if ok { "PASS" } else { "FAIL" });
        if !ok {
            self.failures.push(id);
        }
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

fn example_reproduction(rep: &mut Report) {
    let (worst, t) = timed(|| {
        let grid = example_grid(unit());
        let mut worst: f64 = 0.0;
        for (i, row) in EXAMPLE_Z.iter().enumerate() {
            for (j, &z) in row.iter().enumerate() {
                worst = worst.max((grid.z(i, j) - z).abs());
            }
        }
        worst
    });
    rep.record(
        1,
        "example matrix to 4 decimals",
        worst <= 5e-5,
        format!("max |z - Z| = {worst:.3e} <= 5e-5"),
        t,
        secs(1),
    );
}

fn interpolation(rep: &mut Report) {
    let (worst, t) = timed(|| {
        let sys = example_system(unit());
        let grid = sys.grid();
        let mut worst: f64 = 0.0;
        for (i, &x) in grid.xs().iter().enumerate() {
            for (j, &y) in grid.ys().iter().enumerate() {
                worst = worst.max((sys.evaluate(x, y, 1e-9).unwrap() - grid.z(i, j)).abs());
            }
        }
        worst
    });
    rep.record(2, "interpolation at 25 nodes", worst <= 1e-8, format!("max error {worst:.3e} <= 1e-8"), t, secs(1));
}

fn self_referential(rep: &mut Report) {
    let (r, t) = timed(|| example_system(unit()).check_self_referential(1000, 1e-6).unwrap());
    rep.record(
        3,
        "self-referential equation, 1000 points x 16 patches",
        r <= 2e-6,
        format!("residual {r:.3e} <= 2e-6"),
        t,
        secs(5),
    );
}

fn chaos_game(rep: &mut Report) {
    let (d, t) = timed(|| {
        let sys = example_system(unit());
        let cloud = sys.chaos_game(100_000, 7, 50).unwrap();
        sys.attractor_distance(&cloud, 1e-9).unwrap()
    });
    rep.record(4, "chaos game on the graph", d <= 1e-3, format!("distance {d:.3e} <= 1e-3"), t, secs(5));
}

fn partial_integral(rep: &mut Report) {
    let ((example, ladder), t) = timed(|| {
        let example = check_thm_partial_integral(&example_system(unit()), Axis::X, 257, 1e-10).unwrap().residual;
        let sur = smooth_surrogate();
        let ladder: Vec<f64> = [65, 129, 257]
            .iter()
            .map(|&r| check_thm_partial_integral(&sur, Axis::X, r, 1e-12).unwrap().residual)
            .collect();
        (example, ladder)
    });
    let ratios = [ladder[0] / ladder[1], ladder[1] / ladder[2]];
    let pass = example <= 5e-3 && ratios.iter().all(|&q| q >= 3.0);
    rep.record(
        5,
        "partial-integral equation",
        pass,
        format!(
            "residual {example:.3e} <= 5e-3; surrogate {:.3e} / {:.3e} / {:.3e}, ratios {:.2}, {:.2} >= 3",
            ladder[0], ladder[1], ladder[2], ratios[0], ratios[1]
        ),
        t,
        secs(30),
    );
}

fn frac_integral(rep: &mut Report) {
    let ((half, reduction), t) = timed(|| {
        let sys = example_system(unit());
        let half = max_over_preserving(&check_thm_frac_integral(&sys, FracOrder::new(0.5, 0.5).unwrap(), 257).unwrap());
        let unit_order = check_thm_frac_integral(&sys, FracOrder::new(1.0, 1.0).unwrap(), 257).unwrap();
        let iterated = check_thm_double_integral(&sys, 257, 1e-10).unwrap();
        // Patches with odd i and odd j, where both identities are claimed.
        let reduction = unit_order
            .indexed_iter()
            .filter(|((i, j), _)| i % 2 == 0 && j % 2 == 0)
            .fold(0.0f64, |m, (ij, a)| m.max((a - iterated[ij]).abs()));
        (half, reduction)
    });
    let pass = half <= 1e-2 && reduction <= 1e-6;
    rep.record(
        6,
        "fractional-integral equation",
        pass,
        format!(
            "odd/odd residual {half:.3e} <= 1e-2; odd/odd unit order vs iterated integrals {reduction:.3e} <= 1e-6"
        ),
        t,
        secs(60),
    );
}

fn frac_derivative(rep: &mut Report) {
    let ((inverse, deriv), t) = timed(|| {
        let order = FracOrder::new(0.5, 0.5).unwrap();
        let f = smooth_surrogate().sample(257, 257, 1e-12).unwrap();
        let inverse = inverse_pair_error(&f, order).unwrap();
        let deriv = max_over_preserving(&check_thm_frac_derivative(&example_system(unit()), order, 257).unwrap());
        (inverse, deriv)
    });
    let pass = inverse <= 5e-2 && deriv <= 5e-2;
    rep.record(
        7,
        "fractional derivative",
        pass,
        format!("inverse pair {inverse:.3e} <= 5e-2; odd/odd residual {deriv:.3e} <= 5e-2"),
        t,
        secs(60),
    );
}

fn grid_points(vals: [f64; 3]) -> Vec<TransformPoint> {
    vals.iter().flat_map(|&s| vals.iter().map(move |&t| TransformPoint::new(s, t))).collect()
}

fn transforms(rep: &mut Report) {
    let (res, t) = timed(|| {
        let sys = example_system(Rect::new(1.0, 2.0, 1.0, 2.0).unwrap());
        let positive = grid_points([0.5, 1.0, 2.0]);
        let fourier = grid_points([0.0, 0.5, 1.0]);
        [(KernelKind::Laplace, &positive), (KernelKind::LaplaceCarson, &positive), (KernelKind::Fourier, &fourier)]
            .map(|(kind, pts)| (kind, check_transform_identity(&sys, KernelSpec::classical(kind), pts, 513).unwrap()))
    });
    let pass = res.iter().all(|&(_, r)| r <= 1e-2);
    let detail: Vec<String> = res.iter().map(|(k, r)| format!("{k} {r:.3e}")).collect();
    rep.record(8, "transform equations", pass, format!("{} <= 1e-2", detail.join(", ")), t, secs(60));
}

fn unit_order_reduction(rep: &mut Report) {
    let ((frac, ml), t) = timed(|| {
        let sys = example_system(Rect::new(1.0, 2.0, 1.0, 2.0).unwrap());
        let f = sys.sample(129, 129, 1e-10).unwrap();
        let mut frac: f64 = 0.0;
        for pt in grid_points([0.5, 1.0, 2.0]) {
            let a = frac_transform_direct(&f, KernelKind::FracLaplace, 1.0, pt).unwrap();
            let b = transform_direct(&f, KernelSpec::classical(KernelKind::Laplace), pt).unwrap().re;
            frac = frac.max((a - b).abs() / b.abs().max(1.0));
        }
        let mut ml: f64 = 0.0;
        for &x in &[-3.0, -1.0, -0.25, 0.0, 0.5, 1.0, 2.5, 4.0] {
            let exp = mittag_leffler(1.0, x).unwrap();
            let cosh = mittag_leffler(2.0, x * x).unwrap();
            ml = ml.max((exp - f64::exp(x)).abs() / f64::exp(x).max(1.0));
            ml = ml.max((cosh - f64::cosh(x)).abs() / f64::cosh(x));
        }
        (frac, ml)
    });
    let pass = frac <= 1e-10 && ml <= 1e-10;
    rep.record(
        9,
        "unit-order reduction",
        pass,
        format!("frac_laplace vs laplace {frac:.3e} <= 1e-10; Mittag-Leffler vs exp/cosh {ml:.3e} <= 1e-10"),
        t,
        secs(1),
    );
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}

fn determinism(rep: &mut Report) {
    let ((same, files), t) = timed(|| {
        let tmp = tempfile::tempdir().unwrap();
        let runs: Vec<_> = ["a", "b"]
            .iter()
            .map(|name| {
                let dir = tmp.path().join(name);
                let status = Command::new(env!("CARGO_BIN_EXE_fracsurf"))
                    .args(["reproduce-example", "--out"])
                    .arg(&dir)
                    .output()
                    .unwrap()
                    .status;
                assert!(status.success());
                csv_files(&dir)
            })
            .collect();
        (runs[0] == runs[1] && !runs[0].is_empty(), runs[0].len())
    });
    rep.record(10, "byte-identical reproduce-example output", same, format!("{files} csv files compared"), t, None);
}

fn main() {
    let mut rep = Report { failures: Vec::new() };
    example_reproduction(&mut rep);
    interpolation(&mut rep);
    self_referential(&mut rep);
    chaos_game(&mut rep);
    partial_integral(&mut rep);
    frac_integral(&mut rep);
    frac_derivative(&mut rep);
    transforms(&mut rep);
    unit_order_reduction(&mut rep);
    determinism(&mut rep);
    if !rep.failures.is_empty() {
        println!("failed criteria: {:?}", rep.failures);
        std::process::exit(1);
    }
}
