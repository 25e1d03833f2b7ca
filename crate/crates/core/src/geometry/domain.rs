use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float as _;

use crate::error::{Error, Result};
use crate::{Point, Vector};

/// Named domain families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DomainPreset {
    /// Axis-aligned square `[0, side]²`.
    Square { side: f64 },
    /// `[0, side]²` with the upper-right quadrant removed.
    LShape { side: f64 },
    /// Regular `n`-gon inscribed in the circle of radius `radius` about the origin.
    Ngon { n: usize, radius: f64 },
    /// `{0 < x < 1, ψ(x) < y < 1}` with ψ a sawtooth of the given slope.
    Sawtooth { slope: f64, teeth: usize },
    /// User-supplied vertex list.
    Custom,
}

/// Result of a boundary distance query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryDistance {
    pub value: f64,
    /// `false` when the query point lies outside the closed polygon.
    pub inside: bool,
}

/// Simple counterclockwise polygon.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonalDomain {
    vertices: Vec<Point>,
    lipschitz_constant: f64,
    preset: DomainPreset,
}

impl PolygonalDomain {
    pub fn build(preset: DomainPreset) -> Result<Self> {
        match preset {
            DomainPreset::Square { side } => {
                positive("side", side)?;
                let v = [(0.0, 0.0), (side, 0.0), (side, side), (0.0, side)];
                Ok(Self::from_parts(points(&v), 0.0, preset))
            }
            DomainPreset::LShape { side } => {
                positive("side", side)?;
                let h = 0.5 * side;
                let v = [(0.0, 0.0), (side, 0.0), (side, h), (h, h), (h, side), (0.0, side)];
                Ok(Self::from_parts(points(&v), 0.0, preset))
            }
            DomainPreset::Ngon { n, radius } => {
                if n < 8 {
                    return Err(Error::InvalidDomain(format!("ngon needs n >= 8, got {n}")));
                }
                positive("radius", radius)?;
                let vertices = (0..n)
                    .map(|k| {
                        let a = 2.0 * PI * k as f64 / n as f64;
                        Point::new(radius * a.cos(), radius * a.sin())
                    })
                    .collect();
                // Chart through a vertex along the bisector sees both edges at slope tan(π/n).
                Ok(Self::from_parts(vertices, (PI / n as f64).tan(), preset))
            }
            DomainPreset::Sawtooth { slope, teeth } => {
                positive("slope", slope)?;
                if teeth == 0 {
                    return Err(Error::InvalidDomain("sawtooth needs at least one tooth".into()));
                }
                let amplitude = slope / (2.0 * teeth as f64);
                if amplitude >= 0.5 {
                    return Err(Error::InvalidDomain(format!(
                        "sawtooth amplitude {amplitude} leaves no room below y = 1"
                    )));
                }
                let mut vertices = Vec::with_capacity(2 * teeth + 3);
                for k in 0..=2 * teeth {
                    let x = k as f64 / (2.0 * teeth as f64);
                    vertices.push(Point::new(x, sawtooth(x, slope, teeth)));
                }
                vertices.push(Point::new(1.0, 1.0));
                vertices.push(Point::new(0.0, 1.0));
                Ok(Self::from_parts(vertices, slope, preset))
            }
            DomainPreset::Custom => Err(Error::InvalidDomain("use PolygonalDomain::custom for vertex lists".into())),
        }
    }

    /// Validates a user polygon. Clockwise input is reoriented.
    pub fn custom(mut vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidDomain("polygon needs at least 3 vertices".into()));
        }
        check_simple(&vertices)?;
        if signed_area(&vertices) < 0.0 {
            vertices.reverse();
        }
        if signed_area(&vertices) <= 0.0 {
            return Err(Error::InvalidDomain("polygon has zero area".into()));
        }
        let mut lipschitz: f64 = 0.0;
        let n = vertices.len();
        for k in 0..n {
            let turn = turning_angle(&vertices, k);
            if turn.abs() >= PI - 1e-9 {
                return Err(Error::InvalidDomain(format!("cusp at vertex {k}")));
            }
            lipschitz = lipschitz.max((0.5 * turn.abs()).tan());
        }
        Ok(Self::from_parts(vertices, lipschitz, DomainPreset::Custom))
    }

    fn from_parts(vertices: Vec<Point>, lipschitz_constant: f64, preset: DomainPreset) -> Self {
        Self { vertices, lipschitz_constant, preset }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn lipschitz_constant(&self) -> f64 {
        self.lipschitz_constant
    }

    pub fn preset(&self) -> DomainPreset {
        self.preset
    }

    pub fn edge_count(&self) -> usize {
        self.vertices.len()
    }

    /// Edge `k` runs from vertex `k` to vertex `k + 1` (cyclically).
    pub fn edge(&self, k: usize) -> (Point, Point) {
        let n = self.vertices.len();
        (self.vertices[k % n], self.vertices[(k + 1) % n])
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        (0..self.edge_count()).map(move |k| self.edge(k))
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(a, b)| (b - a).norm()).sum()
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                d = d.max((b - a).norm());
            }
        }
        d
    }

    pub fn bounding_box(&self) -> [f64; 4] {
        let mut bb = [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY];
        for p in &self.vertices {
            bb[0] = bb[0].min(p.x);
            bb[1] = bb[1].max(p.x);
            bb[2] = bb[2].min(p.y);
            bb[3] = bb[3].max(p.y);
        }
        bb
    }

    /// Signed turning angle at vertex `k` (positive for convex corners).
    pub fn turning_angle(&self, k: usize) -> f64 {
        turning_angle(&self.vertices, k)
    }

    /// Even-odd containment test; boundary points count as inside.
    pub fn contains(&self, p: Point) -> bool {
        if self.edges().any(|(a, b)| segment_distance(p, a, b) <= 1e-13) {
            return true;
        }
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if x > p.x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Exact Euclidean distance to the polygon boundary.
    pub fn distance(&self, p: Point) -> BoundaryDistance {
        BoundaryDistance { value: self.delta(p), inside: self.contains(p) }
    }

    /// `δ(x) = dist(x, ∂Ω)`, the minimum over all edges.
    pub fn delta(&self, p: Point) -> f64 {
        self.edges().map(|(a, b)| segment_distance(p, a, b)).fold(f64::INFINITY, f64::min)
    }

    /// Distance to the boundary with edge `skip` removed.
    pub fn delta_excluding(&self, p: Point, skip: &[usize]) -> f64 {
        (0..self.edge_count())
            .filter(|k| !skip.contains(k))
            .map(|k| {
                let (a, b) = self.edge(k);
                segment_distance(p, a, b)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Index of an edge containing `p` (within `tol`), if any.
    pub fn edge_containing(&self, p: Point, tol: f64) -> Option<usize> {
        (0..self.edge_count()).find(|&k| {
            let (a, b) = self.edge(k);
            segment_distance(p, a, b) <= tol
        })
    }
}

/// Sawtooth profile with peaks of height `slope / (2 teeth)`.
pub fn sawtooth(x: f64, slope: f64, teeth: usize) -> f64 {
    let period = 1.0 / teeth as f64;
    let r = x - period * (x / period).floor();
    slope * r.min(period - r)
}

pub fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 > 0.0 { ((p - a).dot(&ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (p - (a + ab * t)).norm()
}

pub(crate) fn cross(a: Vector, b: Vector) -> f64 {
    a.x * b.y - a.y * b.x
}

pub(crate) fn signed_area(v: &[Point]) -> f64 {
    let n = v.len();
    0.5 * (0..n).map(|k| cross(v[k].coords, v[(k + 1) % n].coords)).sum::<f64>()
}

fn turning_angle(v: &[Point], k: usize) -> f64 {
    let n = v.len();
    let d_in = v[k] - v[(k + n - 1) % n];
    let d_out = v[(k + 1) % n] - v[k];
    cross(d_in, d_out).atan2(d_in.dot(&d_out))
}

fn segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let o = |p: Point, q: Point, r: Point| cross(q - p, r - p);
    let (d1, d2, d3, d4) = (o(c, d, a), o(c, d, b), o(a, b, c), o(a, b, d));
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    let on = |p: Point, q: Point, r: Point| segment_distance(r, p, q) <= 1e-14;
    on(c, d, a) || on(c, d, b) || on(a, b, c) || on(a, b, d)
}

fn check_simple(v: &[Point]) -> Result<()> {
    let n = v.len();
    for i in 0..n {
        for j in i + 1..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            if segments_cross(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]) {
                return Err(Error::SelfIntersecting(i, j));
            }
        }
    }
    Ok(())
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidDomain(format!("{name} must be positive, got {x}")))
    }
}

fn points(v: &[(f64, f64)]) -> Vec<Point> {
    v.iter().map(|&(x, y)| Point::new(x, y)).collect()
}
