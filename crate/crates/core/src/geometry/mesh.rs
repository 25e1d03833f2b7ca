use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float as _;

use super::domain::{cross, PolygonalDomain};
use crate::error::{Error, Result};
use crate::{Point, Vector};

/// Default minimum interior angle, in degrees.
pub const DEFAULT_QUALITY_FLOOR_DEG: f64 = 20.0;

/// Aperture of the nontangential approach region `|x − Q| < α₀ δ(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeParams {
    alpha0: f64,
}

impl ConeParams {
    pub fn new(alpha0: f64) -> Result<Self> {
        if alpha0 > 1.0 && alpha0.is_finite() {
            Ok(Self { alpha0 })
        } else {
            Err(Error::InvalidMeshParameter(format!("cone aperture must exceed 1, got {alpha0}")))
        }
    }

    /// `2 (1 + L)` for a domain with Lipschitz constant `L`.
    pub fn for_domain(domain: &PolygonalDomain) -> Self {
        Self { alpha0: 2.0 * (1.0 + domain.lipschitz_constant()) }
    }

    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }
}

/// Conforming triangulation of a polygonal domain.
///
/// Boundary nodes are listed counterclockwise; boundary edge `k` joins
/// `boundary_nodes[k]` and `boundary_nodes[k + 1]` (cyclically).
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    domain: PolygonalDomain,
    nodes: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary_nodes: Vec<usize>,
    boundary_edge_lengths: Vec<f64>,
    outward_normals: Vec<Vector>,
    boundary_slot: Vec<Option<usize>>,
    node_delta: Vec<f64>,
    centroid_delta: Vec<f64>,
    h: f64,
    min_angle_deg: f64,
    quality_floor_deg: f64,
    level: usize,
}

impl TriMesh {
    /// Validates and indexes a raw triangulation.
    pub fn from_parts(
        domain: PolygonalDomain,
        nodes: Vec<Point>,
        mut triangles: Vec<[usize; 3]>,
        quality_floor_deg: f64,
    ) -> Result<Self> {
        let scale = domain.diameter();
        for (t, tri) in triangles.iter_mut().enumerate() {
            if tri.iter().any(|&i| i >= nodes.len()) {
                return Err(Error::InvalidMesh(format!("triangle {t} references a missing node")));
            }
            let a = signed_tri_area(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]);
            if a.abs() <= 1e-14 * scale * scale {
                return Err(Error::DegenerateTriangle(t));
            }
            if a < 0.0 {
                tri.swap(1, 2);
            }
        }

        let mut edge_use: BTreeMap<(usize, usize), (usize, (usize, usize))> = BTreeMap::new();
        for tri in &triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let e = edge_use.entry((a.min(b), a.max(b))).or_insert((0, (a, b)));
                e.0 += 1;
                if e.0 > 2 {
                    return Err(Error::InvalidMesh(format!("edge ({a}, {b}) shared by more than two triangles")));
                }
            }
        }
        let mut next = vec![usize::MAX; nodes.len()];
        let mut boundary_edge_count = 0;
        for &(count, (a, b)) in edge_use.values() {
            if count == 1 {
                if next[a] != usize::MAX {
                    return Err(Error::InvalidMesh(format!("boundary is not a simple cycle at node {a}")));
                }
                next[a] = b;
                boundary_edge_count += 1;
            }
        }
        let start = nearest_boundary_start(&nodes, &next, domain.vertices()[0])
            .ok_or_else(|| Error::InvalidMesh("mesh has no boundary".into()))?;
        let mut boundary_nodes = Vec::with_capacity(boundary_edge_count);
        let mut cur = start;
        loop {
            boundary_nodes.push(cur);
            cur = next[cur];
            if cur == usize::MAX {
                return Err(Error::InvalidMesh("open boundary chain".into()));
            }
            if cur == start {
                break;
            }
            if boundary_nodes.len() > boundary_edge_count {
                return Err(Error::InvalidMesh("boundary cycle does not close".into()));
            }
        }
        if boundary_nodes.len() != boundary_edge_count {
            return Err(Error::InvalidMesh("boundary has more than one component".into()));
        }

        let nb = boundary_nodes.len();
        let mut boundary_slot = vec![None; nodes.len()];
        let mut boundary_edge_lengths = Vec::with_capacity(nb);
        let mut outward_normals = Vec::with_capacity(nb);
        for (k, &a) in boundary_nodes.iter().enumerate() {
            boundary_slot[a] = Some(k);
            let b = boundary_nodes[(k + 1) % nb];
            let d = nodes[b] - nodes[a];
            let len = d.norm();
            let mid = nodes[a] + d * 0.5;
            for p in [nodes[a], mid] {
                if domain.delta(p) > 1e-10 * scale {
                    return Err(Error::InvalidMesh(format!("boundary edge {k} leaves the polygon")));
                }
            }
            boundary_edge_lengths.push(len);
            outward_normals.push(Vector::new(d.y, -d.x) / len);
        }
        let perimeter: f64 = boundary_edge_lengths.iter().sum();
        if (perimeter - domain.perimeter()).abs() > 1e-12 * domain.perimeter() {
            return Err(Error::InvalidMesh(format!(
                "boundary length {perimeter} differs from polygon perimeter {}",
                domain.perimeter()
            )));
        }

        let mut h: f64 = 0.0;
        let mut min_angle = f64::INFINITY;
        for tri in &triangles {
            let p = [nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]];
            for k in 0..3 {
                h = h.max((p[(k + 1) % 3] - p[k]).norm());
                min_angle = min_angle.min(corner_angle(p[k], p[(k + 1) % 3], p[(k + 2) % 3]));
            }
        }
        let min_angle_deg = min_angle.to_degrees();
        if min_angle_deg < quality_floor_deg {
            return Err(Error::QualityFloor { floor_deg: quality_floor_deg, achieved_deg: min_angle_deg });
        }

        let node_delta = nodes
            .iter()
            .zip(&boundary_slot)
            .map(|(p, slot)| if slot.is_some() { 0.0 } else { domain.delta(*p) })
            .collect();
        let centroid_delta = triangles.iter().map(|t| domain.delta(centroid(&nodes, t))).collect();

        Ok(Self {
            domain,
            nodes,
            triangles,
            boundary_nodes,
            boundary_edge_lengths,
            outward_normals,
            boundary_slot,
            node_delta,
            centroid_delta,
            h,
            min_angle_deg,
            quality_floor_deg,
            level: 0,
        })
    }

    /// Uniform 4-way split of every triangle through its edge midpoints.
    pub fn refine(&self) -> Result<Self> {
        let mut nodes = self.nodes.clone();
        let mut midpoint: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut mid = |a: usize, b: usize, nodes: &mut Vec<Point>| -> usize {
            *midpoint.entry((a.min(b), a.max(b))).or_insert_with(|| {
                nodes.push(nalgebra::center(&nodes[a], &nodes[b]));
                nodes.len() - 1
            })
        };
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for &[a, b, c] in &self.triangles {
            let ab = mid(a, b, &mut nodes);
            let bc = mid(b, c, &mut nodes);
            let ca = mid(c, a, &mut nodes);
            triangles.extend_from_slice(&[[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
        }
        let mut fine = Self::from_parts(self.domain.clone(), nodes, triangles, self.quality_floor_deg)?;
        fine.level = self.level + 1;
        Ok(fine)
    }

    pub fn domain(&self) -> &PolygonalDomain {
        &self.domain
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> Point {
        self.nodes[i]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn boundary_nodes(&self) -> &[usize] {
        &self.boundary_nodes
    }

    pub fn boundary_count(&self) -> usize {
        self.boundary_nodes.len()
    }

    pub fn boundary_edge_lengths(&self) -> &[f64] {
        &self.boundary_edge_lengths
    }

    pub fn outward_normals(&self) -> &[Vector] {
        &self.outward_normals
    }

    /// Position of a node in the boundary cycle.
    pub fn boundary_slot(&self, node: usize) -> Option<usize> {
        self.boundary_slot[node]
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        self.boundary_slot[node].is_some()
    }

    pub fn boundary_points(&self) -> Vec<Point> {
        self.boundary_nodes.iter().map(|&i| self.nodes[i]).collect()
    }

    /// Lumped boundary mass: half the length of the two adjacent boundary edges.
    pub fn boundary_mass(&self) -> Vec<f64> {
        let nb = self.boundary_count();
        (0..nb).map(|k| 0.5 * (self.boundary_edge_lengths[k] + self.boundary_edge_lengths[(k + nb - 1) % nb])).collect()
    }

    /// Maximum triangle diameter.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn min_angle_deg(&self) -> f64 {
        self.min_angle_deg
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        signed_tri_area(self.nodes[a], self.nodes[b], self.nodes[c])
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangle_count()).map(|t| self.area(t)).sum()
    }

    pub fn centroid(&self, t: usize) -> Point {
        centroid(&self.nodes, &self.triangles[t])
    }

    /// Gradients of the three barycentric hat functions on triangle `t`.
    pub fn hat_gradients(&self, t: usize) -> [Vector; 3] {
        let [a, b, c] = self.triangles[t];
        let p = [self.nodes[a], self.nodes[b], self.nodes[c]];
        let two_area = 2.0 * signed_tri_area(p[0], p[1], p[2]);
        core::array::from_fn(|i| {
            let e = p[(i + 2) % 3] - p[(i + 1) % 3];
            Vector::new(-e.y, e.x) / two_area
        })
    }

    /// `δ` at each node, exactly zero on boundary nodes.
    pub fn node_delta(&self) -> &[f64] {
        &self.node_delta
    }

    /// `δ` at each triangle centroid.
    pub fn centroid_delta(&self) -> &[f64] {
        &self.centroid_delta
    }

    /// Nodes `x` with `|x − Q| < α₀ δ(x)` for the boundary node in slot `q`.
    pub fn cone_of(&self, q: usize, cone: ConeParams) -> Vec<usize> {
        let qp = self.nodes[self.boundary_nodes[q]];
        (0..self.node_count()).filter(|&i| (self.nodes[i] - qp).norm() < cone.alpha0 * self.node_delta[i]).collect()
    }

    /// Smallest aperture for which every interior node lies in some cone:
    /// `max_x min_Q |x − Q| / δ(x)`.
    pub fn cone_threshold(&self) -> f64 {
        let bpts = self.boundary_points();
        let mut worst: f64 = 1.0;
        for i in 0..self.node_count() {
            if self.is_boundary(i) {
                continue;
            }
            let nearest = bpts.iter().map(|q| (self.nodes[i] - q).norm()).fold(f64::INFINITY, f64::min);
            worst = worst.max(nearest / self.node_delta[i]);
        }
        worst
    }

    /// Interior nodes that lie in no cone for the given aperture.
    pub fn uncovered_nodes(&self, cone: ConeParams) -> Vec<usize> {
        let bpts = self.boundary_points();
        (0..self.node_count())
            .filter(|&i| {
                !self.is_boundary(i)
                    && bpts.iter().all(|q| (self.nodes[i] - q).norm() >= cone.alpha0 * self.node_delta[i])
            })
            .collect()
    }
}

pub(crate) fn signed_tri_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * cross(b - a, c - a)
}

fn centroid(nodes: &[Point], t: &[usize; 3]) -> Point {
    Point::from((nodes[t[0]].coords + nodes[t[1]].coords + nodes[t[2]].coords) / 3.0)
}

/// Interior angle at `a` of triangle `(a, b, c)`, in radians.
pub(crate) fn corner_angle(a: Point, b: Point, c: Point) -> f64 {
    let (u, v) = (b - a, c - a);
    cross(u, v).abs().atan2(u.dot(&v))
}

fn nearest_boundary_start(nodes: &[Point], next: &[usize], target: Point) -> Option<usize> {
    (0..nodes.len()).filter(|&i| next[i] != usize::MAX).min_by(|&i, &j| {
        let di = (nodes[i] - target).norm();
        let dj = (nodes[j] - target).norm();
        di.partial_cmp(&dj).unwrap()
    })
}
