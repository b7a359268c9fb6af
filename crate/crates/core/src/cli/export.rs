//! CSV and 16-bit PGM writers. Every file is written to a temporary file in
//! the target directory and renamed into place.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};

use crate::field::{PointCloud, SampledField};

/// Writes `bytes` to `path` through a sibling temporary file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn csv_rows<I: IntoIterator<Item = [f64; 3]>>(rows: I) -> String {
    let mut out = String::from("x,y,z\n");
    for [x, y, z] in rows {
        writeln!(out, "{x:.16e},{y:.16e},{z:.16e}").expect("write to string");
    }
    out
}

/// Header `x,y,z`, then one row per sample with x as the outer index.
pub fn field_csv(field: &SampledField) -> String {
    csv_rows(
        field
            .xs()
            .iter()
            .enumerate()
            .flat_map(|(r, &x)| field.ys().iter().enumerate().map(move |(c, &y)| [x, y, field.get(r, c)])),
    )
}

pub fn cloud_csv(cloud: &PointCloud) -> String {
    csv_rows(cloud.points.iter().copied())
}

pub fn write_field_csv(field: &SampledField, path: &Path) -> io::Result<()> {
    write_atomic(path, field_csv(field).as_bytes())
}

pub fn write_cloud_csv(cloud: &PointCloud, path: &Path) -> io::Result<()> {
    write_atomic(path, cloud_csv(cloud).as_bytes())
}

/// Reads back the rows of a file written by [`write_field_csv`] or
/// [`write_cloud_csv`].
pub fn read_csv(path: &Path) -> io::Result<Vec<[f64; 3]>> {
    let text = fs::read_to_string(path)?;
    let bad = |line: usize, msg: &str| io::Error::new(io::ErrorKind::InvalidData, format!("line {line}: {msg}"));
    let mut lines = text.lines();
    if lines.next() != Some("x,y,z") {
        return Err(bad(1, "expected header 'x,y,z'"));
    }
    lines
        .enumerate()
        .map(|(k, line)| {
            let vals: Vec<f64> = line
                .split(',')
                .map(|v| v.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| bad(k + 2, &e.to_string()))?;
            <[f64; 3]>::try_from(vals).map_err(|_| bad(k + 2, "expected three columns"))
        })
        .collect()
}

/// Normalization recorded next to a PGM image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PgmBounds {
    pub min: f64,
    pub max: f64,
    /// All samples equal; every pixel is 0.
    pub degenerate: bool,
}

/// Binary P5 image with maxval 65535, big-endian samples, min-max
/// normalized. Row 0 holds the largest y, column 0 the smallest x.
pub fn pgm16(field: &SampledField) -> (Vec<u8>, PgmBounds) {
    let v = field.values();
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let degenerate = !(max > min);
    let (nx, ny) = (field.nx(), field.ny());
    let mut out = format!("P5\n{nx} {ny}\n65535\n").into_bytes();
    out.reserve(2 * nx * ny);
    for c in (0..ny).rev() {
        for r in 0..nx {
            let level = if degenerate { 0 } else { ((v[[r, c]] - min) / (max - min) * 65535.0).round() as u16 };
            out.extend_from_slice(&level.to_be_bytes());
        }
    }
    (out, PgmBounds { min, max, degenerate })
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("txt")
}

/// Writes the image and its sidecar (`min`, `max`, `degenerate` lines).
pub fn write_pgm16(field: &SampledField, path: &Path) -> io::Result<PgmBounds> {
    let (bytes, bounds) = pgm16(field);
    write_atomic(path, &bytes)?;
    let sidecar = format!("min = {:.16e}\nmax = {:.16e}\ndegenerate = {}\n", bounds.min, bounds.max, bounds.degenerate);
    write_atomic(&sidecar_path(path), sidecar.as_bytes())?;
    Ok(bounds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Rect;

    fn unit() -> Rect {
        Rect::new(0.0, 1.0, 0.0, 1.0).unwrap()
    }

    #[test]
    fn two_by_two_csv() {
        let f = SampledField::from_fn(unit(), 2, 2, |x, y| x + 10.0 * y).unwrap();
        let text = field_csv(&f);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], "x,y,z");
        assert_eq!(lines[2], "0.0000000000000000e0,1.0000000000000000e0,1.0000000000000000e1");
        assert!(!text.contains('\r'));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let f = SampledField::from_fn(unit(), 7, 5, |x, y| (x * 3.7 + y).sin() / 3.0 + 1e-300 * x).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        write_field_csv(&f, &path).unwrap();
        let rows = read_csv(&path).unwrap();
        assert_eq!(rows.len(), 35);
        for (k, row) in rows.iter().enumerate() {
            let (r, c) = (k / 5, k % 5);
            assert_eq!(row[0].to_bits(), f.xs()[r].to_bits());
            assert_eq!(row[1].to_bits(), f.ys()[c].to_bits());
            assert_eq!(row[2].to_bits(), f.get(r, c).to_bits());
        }
    }

    #[test]
    fn constant_field_pgm() {
        let f = SampledField::from_fn(unit(), 3, 2, |_, _| 4.0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.pgm");
        let bounds = write_pgm16(&f, &path).unwrap();
        assert!(bounds.degenerate);
        let bytes = fs::read(&path).unwrap();
        let header = b"P5\n3 2\n65535\n";
        assert_eq!(&bytes[..header.len()], header);
        assert!(bytes[header.len()..].iter().all(|&b| b == 0));
        assert_eq!(bytes.len(), header.len() + 12);
        let side = fs::read_to_string(sidecar_path(&path)).unwrap();
        assert!(side.contains("degenerate = true"));
    }

    #[test]
    fn pgm_orientation() {
        let f = SampledField::from_fn(unit(), 2, 2, |x, y| x + 2.0 * y).unwrap();
        let (bytes, b) = pgm16(&f);
        let px = &bytes[bytes.len() - 8..];
        let at = |k: usize| u16::from_be_bytes([px[2 * k], px[2 * k + 1]]);
        // top row is y = 1: values 2 and 3; bottom row y = 0: values 0 and 1
        assert_eq!([at(0), at(1), at(2), at(3)], [43690, 65535, 0, 21845]);
        assert_eq!((b.min, b.max, b.degenerate), (0.0, 3.0, false));
    }
}
