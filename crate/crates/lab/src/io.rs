//! File formats: results CSV, summary JSON, coordinate matrix dumps, mesh
//! lists and coefficient grids.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use dtn_core::coefficients::{CoefTensor, TensorGrid};
use dtn_core::fem::CsrMatrix;
use dtn_core::geometry::TriMesh;
use dtn_core::Point;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::report::Summary;

/// One row of `results.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub scenario: String,
    pub level: usize,
    pub h: f64,
    pub quantity: String,
    pub value: f64,
}

pub const RESULTS_HEADER: [&str; 5] = ["scenario", "level", "h", "quantity", "value"];

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| LabError::io(path, e))
}

pub fn write_results(path: &Path, records: &[Record]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    if records.is_empty() {
        w.write_record(RESULTS_HEADER)?;
    }
    for r in records {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| LabError::io(path, e))
}

pub fn read_results(path: &Path) -> Result<Vec<Record>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

pub fn write_summary(path: &Path, summary: &Summary) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, summary)?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| LabError::io(path, e))
}

/// Nonzero entries as `row col value` lines, 0-based.
pub fn write_coordinates(path: &Path, entries: impl Iterator<Item = (usize, usize, f64)>) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| LabError::io(path, e);
    for (r, c, v) in entries {
        if v != 0.0 {
            writeln!(w, "{r} {c} {v:e}").map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

pub fn write_dense(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let (rows, cols) = m.shape();
    write_coordinates(path, (0..rows).flat_map(|r| (0..cols).map(move |c| (r, c, m[(r, c)]))))
}

pub fn write_sparse(path: &Path, m: &CsrMatrix) -> Result<()> {
    write_coordinates(path, m.triplets())
}

pub fn read_coordinates(path: &Path) -> Result<Vec<(usize, usize, f64)>> {
    let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let bad = || LabError::Format {
                path: path.to_path_buf(),
                message: format!("line {}: expected `row col value`", i + 1),
            };
            let mut it = l.split_whitespace();
            let r = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            let c = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            let v = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            Ok((r, c, v))
        })
        .collect()
}

/// Header `nodes triangles`, then one `x y` line per node and one `i j k`
/// line per triangle, 0-based.
pub fn write_mesh(path: &Path, mesh: &TriMesh) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| LabError::io(path, e);
    writeln!(w, "{} {}", mesh.node_count(), mesh.triangle_count()).map_err(io)?;
    for p in mesh.nodes() {
        writeln!(w, "{:e} {:e}", p.x, p.y).map_err(io)?;
    }
    for t in mesh.triangles() {
        writeln!(w, "{} {} {}", t[0], t[1], t[2]).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn read_mesh(path: &Path) -> Result<(Vec<Point>, Vec<[usize; 3]>)> {
    let file = File::open(path).map_err(|e| LabError::io(path, e))?;
    let lines: Vec<String> =
        BufReader::new(file).lines().collect::<std::io::Result<_>>().map_err(|e| LabError::io(path, e))?;
    let bad = |line: usize, what: &str| LabError::Format {
        path: path.to_path_buf(),
        message: format!("line {line}: {what}"),
    };
    let row = |i: usize, width: usize, what: &str| -> Result<Vec<&str>> {
        let f: Vec<&str> = lines.get(i).map(|l| l.split_whitespace().collect()).unwrap_or_default();
        if f.len() == width {
            Ok(f)
        } else {
            Err(bad(i + 1, what))
        }
    };
    let index = |i: usize, s: &str| s.parse::<usize>().map_err(|_| bad(i + 1, "expected an index"));
    let number = |i: usize, s: &str| s.parse::<f64>().map_err(|_| bad(i + 1, "expected a number"));

    let head = row(0, 2, "expected `nodes triangles`")?;
    let (nn, nt) = (index(0, head[0])?, index(0, head[1])?);
    let mut nodes = Vec::with_capacity(nn);
    for i in 1..=nn {
        let f = row(i, 2, "expected `x y`")?;
        nodes.push(Point::new(number(i, f[0])?, number(i, f[1])?));
    }
    let mut tris = Vec::with_capacity(nt);
    for i in nn + 1..=nn + nt {
        let f = row(i, 3, "expected `i j k`")?;
        let t = [index(i, f[0])?, index(i, f[1])?, index(i, f[2])?];
        if t.iter().any(|&k| k >= nn) {
            return Err(bad(i + 1, "node index out of range"));
        }
        tris.push(t);
    }
    Ok((nodes, tris))
}

/// Coefficient grid over `bbox`: header `nx ny m`, then `nx·ny` sample lines
/// in row-major order (x fastest), each holding the `4m²` tensor entries in
/// `((i·2 + j)·m + α)·m + β` order.
pub fn read_coefficient_grid(path: &Path, bbox: [f64; 4]) -> Result<TensorGrid> {
    let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    let bad = |line: usize, message: String| LabError::Format {
        path: path.to_path_buf(),
        message: format!("line {line}: {message}"),
    };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let (i, head) = lines.next().ok_or_else(|| bad(1, "missing `nx ny m` header".into()))?;
    let head: Vec<usize> = head
        .split_whitespace()
        .map(|s| s.parse())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| bad(i + 1, "header must be `nx ny m`".into()))?;
    let [nx, ny, m] = head[..] else {
        return Err(bad(i + 1, "header must be `nx ny m`".into()));
    };
    if !(1..=2).contains(&m) {
        return Err(bad(i + 1, format!("m must be 1 or 2, got {m}")));
    }
    let width = 4 * m * m;
    let mut samples = Vec::with_capacity(nx * ny);
    for (i, l) in lines {
        let v: Vec<f64> = l
            .split_whitespace()
            .map(|s| s.parse())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad(i + 1, "expected numbers".into()))?;
        if v.len() != width {
            return Err(bad(i + 1, format!("expected {width} entries, got {}", v.len())));
        }
        samples.push(CoefTensor::from_slice(m, &v));
    }
    Ok(TensorGrid::new(m, nx, ny, bbox, samples)?)
}

pub fn write_coefficient_grid(path: &Path, grid: &TensorGrid) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| LabError::io(path, e);
    writeln!(w, "{} {} {}", grid.nx, grid.ny, grid.m).map_err(io)?;
    for s in &grid.samples {
        let line = s.as_slice().iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(" ");
        writeln!(w, "{line}").map_err(io)?;
    }
    w.flush().map_err(io)
}
