//! Deterministic triangulators for the domain presets.
//!
//! Squares and L-shapes use a structured grid split along the `/` diagonal,
//! the sawtooth uses graded columns over the profile, regular polygons use
//! concentric rings stitched inward to a central fan, and custom polygons are
//! ear-clipped and then refined uniformly.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float as _;

use super::domain::{sawtooth, DomainPreset, PolygonalDomain};
use super::mesh::{corner_angle, signed_tri_area, TriMesh, DEFAULT_QUALITY_FLOOR_DEG};
use crate::error::{Error, Result};
use crate::Point;

/// Triangulates `domain` with target diameter `h` and the default quality floor.
pub fn triangulate(domain: &PolygonalDomain, h: f64) -> Result<TriMesh> {
    triangulate_with_floor(domain, h, DEFAULT_QUALITY_FLOOR_DEG)
}

pub fn triangulate_with_floor(domain: &PolygonalDomain, h: f64, floor_deg: f64) -> Result<TriMesh> {
    if !(h > 0.0 && h < domain.diameter()) {
        return Err(Error::InvalidMeshParameter(format!("target diameter {h} must lie in (0, {})", domain.diameter())));
    }
    match domain.preset() {
        DomainPreset::Square { side } => {
            let n = (side / h).ceil() as usize;
            let (nodes, tris) = grid(side, n, |_, _| true);
            TriMesh::from_parts(domain.clone(), nodes, tris, floor_deg)
        }
        DomainPreset::LShape { side } => {
            let mut n = (side / h).ceil() as usize;
            n += n % 2;
            let half = n / 2;
            let (nodes, tris) = grid(side, n, |i, j| i < half || j < half);
            TriMesh::from_parts(domain.clone(), nodes, tris, floor_deg)
        }
        DomainPreset::Sawtooth { slope, teeth } => {
            let (nodes, tris) = sawtooth_columns(slope, teeth, h);
            TriMesh::from_parts(domain.clone(), nodes, tris, floor_deg)
        }
        DomainPreset::Ngon { .. } => {
            let mut last = None;
            for grading in [1.3, 1.15, 1.0] {
                let (nodes, tris) = rings(domain, h, grading);
                match TriMesh::from_parts(domain.clone(), nodes, tris, floor_deg) {
                    Err(e @ Error::QualityFloor { .. }) => last = Some(e),
                    other => return other,
                }
            }
            Err(last.unwrap())
        }
        DomainPreset::Custom => {
            let tris = ear_clip(domain.vertices())?;
            let mut mesh = TriMesh::from_parts(domain.clone(), domain.vertices().to_vec(), tris, floor_deg)?;
            while mesh.h() > 1.5 * h {
                mesh = mesh.refine()?;
            }
            Ok(mesh)
        }
    }
}

/// `(n+1)²` grid on `[0, side]²`, keeping cells `(i, j)` accepted by `keep`.
fn grid(side: f64, n: usize, keep: impl Fn(usize, usize) -> bool) -> (Vec<Point>, Vec<[usize; 3]>) {
    let cell = side / n as f64;
    let mut index = alloc::vec![usize::MAX; (n + 1) * (n + 1)];
    let mut nodes = Vec::new();
    let mut tris = Vec::new();
    let mut id = |i: usize, j: usize, nodes: &mut Vec<Point>| {
        let slot = &mut index[j * (n + 1) + i];
        if *slot == usize::MAX {
            *slot = nodes.len();
            nodes.push(Point::new(i as f64 * cell, j as f64 * cell));
        }
        *slot
    };
    for j in 0..n {
        for i in 0..n {
            if !keep(i, j) {
                continue;
            }
            let a = id(i, j, &mut nodes);
            let b = id(i + 1, j, &mut nodes);
            let c = id(i + 1, j + 1, &mut nodes);
            let d = id(i, j + 1, &mut nodes);
            tris.push([a, b, c]);
            tris.push([a, c, d]);
        }
    }
    (nodes, tris)
}

/// Columns over the sawtooth profile; every kink is a column line.
fn sawtooth_columns(slope: f64, teeth: usize, h: f64) -> (Vec<Point>, Vec<[usize; 3]>) {
    let kinks = 2 * teeth;
    let nx = (1.0 / h).ceil() as usize;
    let nx = nx.div_ceil(kinks) * kinks;
    let ny = (1.0 / h).ceil() as usize;
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for i in 0..=nx {
        let x = i as f64 / nx as f64;
        let yb = sawtooth(x, slope, teeth);
        for j in 0..=ny {
            nodes.push(Point::new(x, yb + (1.0 - yb) * j as f64 / ny as f64));
        }
    }
    let id = |i: usize, j: usize| i * (ny + 1) + j;
    let mut tris = Vec::with_capacity(2 * nx * ny);
    for i in 0..nx {
        for j in 0..ny {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            tris.extend_from_slice(&best_split(&nodes, [a, b, c, d]));
        }
    }
    (nodes, tris)
}

/// Splits quad `abcd` along the diagonal giving the larger minimum angle.
fn best_split(nodes: &[Point], [a, b, c, d]: [usize; 4]) -> [[usize; 3]; 2] {
    let ac = [[a, b, c], [a, c, d]];
    let bd = [[a, b, d], [b, c, d]];
    let q = |t: &[[usize; 3]; 2]| min_angle(nodes, t[0]).min(min_angle(nodes, t[1]));
    if q(&bd) > q(&ac) {
        bd
    } else {
        ac
    }
}

fn min_angle(nodes: &[Point], [a, b, c]: [usize; 3]) -> f64 {
    let (pa, pb, pc) = (nodes[a], nodes[b], nodes[c]);
    corner_angle(pa, pb, pc).min(corner_angle(pb, pc, pa)).min(corner_angle(pc, pa, pb))
}

/// Concentric scaled copies of a regular polygon, spacing graded inward from
/// the boundary edge length towards `0.85 h`.
fn rings(domain: &PolygonalDomain, h: f64, grading: f64) -> (Vec<Point>, Vec<[usize; 3]>) {
    let verts = domain.vertices();
    let n = verts.len();
    let center = Point::from(verts.iter().map(|p| p.coords).sum::<crate::Vector>() / n as f64);
    let inradius = {
        let (a, b) = domain.edge(0);
        (nalgebra::center(&a, &b) - center).norm()
    };

    let mut nodes: Vec<Point> = Vec::new();
    for k in 0..n {
        let (a, b) = domain.edge(k);
        let pieces = ((b - a).norm() / h).ceil().max(1.0) as usize;
        for p in 0..pieces {
            nodes.push(a + (b - a) * (p as f64 / pieces as f64));
        }
    }
    let s_max = (0.85 * h).max(domain.perimeter() / nodes.len() as f64);
    let mut ring: Vec<usize> = (0..nodes.len()).collect();
    let mut spacing = domain.perimeter() / ring.len() as f64;
    let mut depth = 0.0;
    let mut tris = Vec::new();
    let mut parity = 0;
    loop {
        let next_spacing = (spacing * grading).min(s_max);
        let step = 0.5 * 3f64.sqrt() * 0.5 * (spacing + next_spacing);
        let remaining = inradius - depth - step;
        if remaining < next_spacing {
            break;
        }
        depth += step;
        parity ^= 1;
        let t = remaining / inradius;
        let perimeter = t * domain.perimeter();
        let count = ((perimeter / next_spacing).round() as usize).max(6);
        let offset = if parity == 1 { 0.5 } else { 0.0 };
        let inner: Vec<usize> = (0..count)
            .map(|k| {
                let sigma = (k as f64 + offset) * perimeter / count as f64;
                nodes.push(center + (point_at_arclength(verts, sigma / t) - center) * t);
                nodes.len() - 1
            })
            .collect();
        stitch(&nodes, &ring, &inner, center, &mut tris);
        ring = inner;
        spacing = next_spacing;
    }
    nodes.push(center);
    let c = nodes.len() - 1;
    for k in 0..ring.len() {
        tris.push([c, ring[k], ring[(k + 1) % ring.len()]]);
    }
    (nodes, tris)
}

fn point_at_arclength(verts: &[Point], mut sigma: f64) -> Point {
    let n = verts.len();
    for k in 0..n {
        let (a, b) = (verts[k], verts[(k + 1) % n]);
        let len = (b - a).norm();
        if sigma <= len || k == n - 1 {
            return a + (b - a) * (sigma / len).min(1.0);
        }
        sigma -= len;
    }
    unreachable!()
}

/// Fills the annulus between two counterclockwise rings, advancing on the
/// side that yields the better triangle.
fn stitch(nodes: &[Point], outer: &[usize], inner: &[usize], center: Point, tris: &mut Vec<[usize; 3]>) {
    let angle = |p: Point| (p.y - center.y).atan2(p.x - center.x);
    let a0 = angle(nodes[outer[0]]);
    let gap = |i: usize| {
        let raw = angle(nodes[inner[i]]) - a0;
        let d = raw - 2.0 * PI * (raw / (2.0 * PI)).floor();
        d.min(2.0 * PI - d)
    };
    let start = (0..inner.len()).min_by(|&x, &y| gap(x).partial_cmp(&gap(y)).unwrap()).unwrap();
    let (no, ni) = (outer.len(), inner.len());
    let o = |a: usize| outer[a % no];
    let i = |b: usize| inner[(start + b) % ni];
    let (mut a, mut b) = (0, 0);
    while a < no || b < ni {
        let advance_outer = [o(a), o(a + 1), i(b)];
        let advance_inner = [o(a), i(b + 1), i(b)];
        let quality = |t: [usize; 3]| {
            if signed_tri_area(nodes[t[0]], nodes[t[1]], nodes[t[2]]) <= 0.0 {
                -1.0
            } else {
                min_angle(nodes, t)
            }
        };
        let take_outer = if a == no {
            false
        } else if b == ni {
            true
        } else {
            quality(advance_outer) >= quality(advance_inner)
        };
        if take_outer {
            tris.push(advance_outer);
            a += 1;
        } else {
            tris.push(advance_inner);
            b += 1;
        }
    }
}

/// Greedy ear clipping, always removing the ear with the largest minimum angle.
fn ear_clip(verts: &[Point]) -> Result<Vec<[usize; 3]>> {
    let mut live: Vec<usize> = (0..verts.len()).collect();
    let mut tris = Vec::with_capacity(verts.len() - 2);
    while live.len() > 3 {
        let m = live.len();
        let mut best: Option<(f64, usize)> = None;
        for k in 0..m {
            let (p, q, r) = (live[(k + m - 1) % m], live[k], live[(k + 1) % m]);
            let (a, b, c) = (verts[p], verts[q], verts[r]);
            if signed_tri_area(a, b, c) <= 0.0 {
                continue;
            }
            let blocked = live.iter().any(|&s| s != p && s != q && s != r && inside_closed(verts[s], a, b, c));
            if blocked {
                continue;
            }
            let quality = min_angle(verts, [p, q, r]);
            if best.is_none_or(|(bq, _)| quality > bq) {
                best = Some((quality, k));
            }
        }
        let (_, k) = best.ok_or_else(|| Error::InvalidMesh("ear clipping found no ear".into()))?;
        let m = live.len();
        tris.push([live[(k + m - 1) % m], live[k], live[(k + 1) % m]]);
        live.remove(k);
    }
    tris.push([live[0], live[1], live[2]]);
    Ok(tris)
}

fn inside_closed(p: Point, a: Point, b: Point, c: Point) -> bool {
    signed_tri_area(a, b, p) >= 0.0 && signed_tri_area(b, c, p) >= 0.0 && signed_tri_area(c, a, p) >= 0.0
}
