//! Square function, nontangential maximal function, Carleson norms and the
//! two sides of the bilinear estimate.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float as _;

use crate::error::{Error, Result};
use crate::fem::{weighted_grad_norm, BoundaryTrace, CellField, DiscreteField, StiffnessSystem};
use crate::geometry::{ConeParams, TriMesh};
use crate::Point;

/// Nonnegative per-triangle weights (density at the centroid times area).
#[derive(Debug, Clone, PartialEq)]
pub struct CellMeasure<'a> {
    mesh: &'a TriMesh,
    weights: Vec<f64>,
}

impl<'a> CellMeasure<'a> {
    pub fn new(mesh: &'a TriMesh, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != mesh.triangle_count() {
            return Err(Error::Dimension { expected: mesh.triangle_count(), got: weights.len() });
        }
        if let Some(t) = weights.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidMeshParameter(alloc::format!(
                "measure weight {} on triangle {t} is not a finite nonnegative number",
                weights[t]
            )));
        }
        Ok(Self { mesh, weights })
    }

    /// `dx` restricted to `Ω`.
    pub fn lebesgue(mesh: &'a TriMesh) -> Self {
        Self { mesh, weights: (0..mesh.triangle_count()).map(|t| mesh.area(t)).collect() }
    }

    /// `density(x_T) · area(T)`.
    pub fn from_density(mesh: &'a TriMesh, density: impl Fn(usize) -> f64) -> Result<Self> {
        let weights = (0..mesh.triangle_count()).map(|t| density(t) * mesh.area(t)).collect();
        Self::new(mesh, weights)
    }

    pub fn mesh(&self) -> &'a TriMesh {
        self.mesh
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn scaled(&self, t: f64) -> Result<Self> {
        Self::new(self.mesh, self.weights.iter().map(|w| w * t).collect())
    }

    /// Location and value of the Carleson supremum.
    pub fn carleson(&self) -> CarlesonSup {
        let centers: Vec<Point> = (0..self.mesh.triangle_count()).map(|t| self.mesh.centroid(t)).collect();
        let radii = dyadic_radii(self.mesh.h(), self.mesh.domain().diameter());
        carleson_sup(&centers, &self.weights, &self.mesh.boundary_points(), &radii)
    }

    pub fn carleson_norm(&self) -> f64 {
        self.carleson().value
    }
}

/// `h, 2h, 4h, …` below `diam`, then `diam` itself.
pub fn dyadic_radii(h: f64, diam: f64) -> Vec<f64> {
    let mut radii = Vec::new();
    let mut r = h;
    while r < diam {
        radii.push(r);
        r *= 2.0;
    }
    radii.push(diam);
    radii
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarlesonSup {
    pub value: f64,
    /// Index into the boundary points of the maximizing ball center.
    pub slot: usize,
    pub radius: f64,
}

/// Points sorted into a uniform grid of buckets with tight bounding boxes.
struct Buckets {
    /// Point indices grouped by bucket.
    order: Vec<usize>,
    /// `order[starts[b]..starts[b + 1]]` lies in bucket `b`.
    starts: Vec<usize>,
    boxes: Vec<[f64; 4]>,
}

impl Buckets {
    const PER_BUCKET: usize = 32;

    fn new(points: &[Point], ids: &[usize]) -> Self {
        let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for &i in ids {
            let p = points[i];
            (x0, y0, x1, y1) = (x0.min(p.x), y0.min(p.y), x1.max(p.x), y1.max(p.y));
        }
        let n = ((ids.len() / Self::PER_BUCKET) as f64).sqrt().ceil().clamp(1.0, 512.0) as usize;
        let (sx, sy) = ((x1 - x0).max(f64::MIN_POSITIVE), (y1 - y0).max(f64::MIN_POSITIVE));
        let cell = |p: Point| {
            let i = (((p.x - x0) / sx * n as f64) as usize).min(n - 1);
            let j = (((p.y - y0) / sy * n as f64) as usize).min(n - 1);
            j * n + i
        };
        let mut counts = vec![0usize; n * n + 1];
        for &i in ids {
            counts[cell(points[i]) + 1] += 1;
        }
        for b in 0..n * n {
            counts[b + 1] += counts[b];
        }
        let starts = counts.clone();
        let mut order = vec![0; ids.len()];
        let mut boxes = vec![[f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY]; n * n];
        for &i in ids {
            let p = points[i];
            let b = cell(p);
            order[counts[b]] = i;
            counts[b] += 1;
            let bx = &mut boxes[b];
            *bx = [bx[0].min(p.x), bx[1].min(p.y), bx[2].max(p.x), bx[3].max(p.y)];
        }
        Self { order, starts, boxes }
    }

    fn len(&self) -> usize {
        self.boxes.len()
    }

    fn members(&self, b: usize) -> &[usize] {
        &self.order[self.starts[b]..self.starts[b + 1]]
    }

    /// Smallest and largest distance from `q` to the box of bucket `b`.
    fn distance_range(&self, b: usize, q: Point) -> (f64, f64) {
        let [x0, y0, x1, y1] = self.boxes[b];
        let dx = (x0 - q.x).max(q.x - x1).max(0.0);
        let dy = (y0 - q.y).max(q.y - y1).max(0.0);
        let fx = (q.x - x0).abs().max((q.x - x1).abs());
        let fy = (q.y - y0).abs().max((q.y - y1).abs());
        (dx.hypot(dy), fx.hypot(fy))
    }
}

/// `max_{Q, r} ν(B(Q, r)) / r` with point masses at `centers`; `radii` ascending.
pub fn carleson_sup(centers: &[Point], weights: &[f64], boundary: &[Point], radii: &[f64]) -> CarlesonSup {
    let mut best = CarlesonSup { value: 0.0, slot: 0, radius: radii.first().copied().unwrap_or(0.0) };
    let support: Vec<usize> = (0..weights.len()).filter(|&t| weights[t] > 0.0).collect();
    let buckets = Buckets::new(centers, &support);
    let sums: Vec<f64> = (0..buckets.len()).map(|b| buckets.members(b).iter().map(|&t| weights[t]).sum()).collect();
    let bin = |d: f64| radii.partition_point(|&r| r <= d);
    let mut bins = vec![0.0; radii.len() + 1];
    for (slot, &q) in boundary.iter().enumerate() {
        bins.iter_mut().for_each(|b| *b = 0.0);
        for b in 0..buckets.len() {
            let members = buckets.members(b);
            if members.is_empty() {
                continue;
            }
            let (lo, hi) = buckets.distance_range(b, q);
            let k = bin(lo);
            if k == bin(hi) {
                bins[k] += sums[b];
            } else {
                for &t in members {
                    bins[bin((centers[t] - q).norm())] += weights[t];
                }
            }
        }
        let mut acc = 0.0;
        for (k, &r) in radii.iter().enumerate() {
            acc += bins[k];
            let value = acc / r;
            if value > best.value {
                best = CarlesonSup { value, slot, radius: r };
            }
        }
    }
    best
}

/// `∫_Ω |∇u|² δ dx` with centroid quadrature.
pub fn square_function_integral(u: &DiscreteField<'_>) -> f64 {
    weighted_grad_norm(u, 1.0, false)
}

/// Cone membership per boundary slot for a fixed aperture.
///
/// A slot whose cone contains no node falls back to the nearest interior
/// node and is flagged as degenerate.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeIndex {
    cone: ConeParams,
    members: Vec<Vec<usize>>,
    degenerate: Vec<usize>,
}

impl ConeIndex {
    pub fn new(mesh: &TriMesh, cone: ConeParams) -> Self {
        let mut members = Vec::with_capacity(mesh.boundary_count());
        let mut degenerate = Vec::new();
        let delta = mesh.node_delta();
        let interior: Vec<usize> = (0..mesh.node_count()).filter(|&i| !mesh.is_boundary(i)).collect();
        let buckets = Buckets::new(mesh.nodes(), &interior);
        let reach: Vec<f64> = (0..buckets.len())
            .map(|b| cone.alpha0() * buckets.members(b).iter().map(|&i| delta[i]).fold(0.0, f64::max))
            .collect();
        for (slot, q) in mesh.boundary_points().into_iter().enumerate() {
            let mut inside = Vec::new();
            for b in 0..buckets.len() {
                if buckets.distance_range(b, q).0 >= reach[b] {
                    continue;
                }
                inside.extend(
                    buckets
                        .members(b)
                        .iter()
                        .copied()
                        .filter(|&i| (mesh.node(i) - q).norm() < cone.alpha0() * delta[i]),
                );
            }
            if inside.is_empty() {
                let nearest = interior
                    .iter()
                    .copied()
                    .min_by(|&a, &b| (mesh.node(a) - q).norm().total_cmp(&(mesh.node(b) - q).norm()));
                if let Some(i) = nearest {
                    inside.push(i);
                    degenerate.push(slot);
                }
            }
            members.push(inside);
        }
        Self { cone, members, degenerate }
    }

    pub fn params(&self) -> ConeParams {
        self.cone
    }

    pub fn members(&self, slot: usize) -> &[usize] {
        &self.members[slot]
    }

    /// Boundary slots whose cone was empty.
    pub fn degenerate(&self) -> &[usize] {
        &self.degenerate
    }
}

/// `(w)*(Q) = max { |w(x)| : x ∈ cone(Q) }` at every boundary node.
pub fn nt_max<'a>(w: &DiscreteField<'a>, cones: &ConeIndex) -> BoundaryTrace<'a> {
    let mesh = w.mesh();
    let values = (0..mesh.boundary_count())
        .map(|q| cones.members(q).iter().map(|&i| w.magnitude(i)).fold(0.0, f64::max))
        .collect();
    BoundaryTrace::new(mesh, 1, values).expect("magnitudes are finite")
}

/// [`nt_max`] of a cellwise field through its area-weighted nodal representative.
pub fn nt_max_cells<'a>(f: &CellField, mesh: &'a TriMesh, cones: &ConeIndex) -> Result<BoundaryTrace<'a>> {
    Ok(nt_max(&f.to_nodes(mesh)?, cones))
}

/// `Σ_Q mass_Q · t(Q)` for a scalar boundary function.
fn boundary_integral(t: &BoundaryTrace<'_>) -> f64 {
    t.mesh().boundary_mass().iter().zip(t.values()).map(|(m, v)| m * v).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddingCheck {
    /// `Σ_T |w|(x_T) ν(T)`.
    pub lhs: f64,
    /// `‖ν‖_C · ∫_{∂Ω} (w)*`.
    pub rhs: f64,
    pub c_emp: f64,
    /// `rhs = 0` while `lhs > 0`: the cones miss part of the support.
    pub coverage_defect: bool,
}

/// Both sides of `∫_Ω |w| dν ≤ C ‖ν‖_C ∫_{∂Ω} (w)*`.
pub fn carleson_embedding_check(w: &DiscreteField<'_>, nu: &CellMeasure<'_>, cones: &ConeIndex) -> EmbeddingCheck {
    let mesh = w.mesh();
    let k = w.components();
    let lhs: f64 = (0..mesh.triangle_count())
        .map(|t| {
            let c = w.centroid_value(t);
            c[..k].iter().map(|v| v * v).sum::<f64>().sqrt() * nu.weights[t]
        })
        .sum();
    let rhs = nu.carleson_norm() * boundary_integral(&nt_max(w, cones));
    let (c_emp, coverage_defect) = if rhs > 0.0 {
        (lhs / rhs, false)
    } else if lhs > 0.0 {
        (f64::INFINITY, true)
    } else {
        (0.0, false)
    };
    EmbeddingCheck { lhs, rhs, c_emp, coverage_defect }
}

/// Which factor bounds `u` on the right of the bilinear estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BilinearVariant {
    /// `(∫ |∇u|² δ)^{1/2}`.
    SquareWeight,
    /// `‖u‖_{L²(∂Ω)}`.
    BoundaryL2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BilinearSides {
    /// `|∫_Ω ∇u · v|`.
    pub lhs: f64,
    pub rhs: f64,
    /// `∫ |∇v|² δ + ∫_{∂Ω} ((v)*)²`.
    pub v_bracket: f64,
    /// Interior residual of `𝓛u`, relative to `‖K‖ ‖u‖_∞`.
    pub harmonic_residual: f64,
}

impl BilinearSides {
    /// Whether `u` passed as a discrete solution of `𝓛u = 0`.
    pub fn is_harmonic(&self) -> bool {
        self.harmonic_residual <= 1e-8
    }
}

/// The two sides of `|∫ ∇u · v| ≤ C (…)_u (∫ |∇v|² δ + ∫ ((v)*)²)^{1/2}`.
///
/// `v` carries `∂_i`-paired components at index `2α + i`, so it has `2m`
/// components; its cellwise value is the centroid value of the nodal field.
pub fn bilinear_sides(
    sys: &StiffnessSystem<'_>,
    u: &DiscreteField<'_>,
    v: &DiscreteField<'_>,
    cones: &ConeIndex,
    variant: BilinearVariant,
) -> Result<BilinearSides> {
    let mesh = sys.mesh();
    let m = sys.m();
    if u.components() != m {
        return Err(Error::Dimension { expected: m, got: u.components() });
    }
    if v.components() != 2 * m {
        return Err(Error::Dimension { expected: 2 * m, got: v.components() });
    }
    let mut pairing = 0.0;
    for t in 0..mesh.triangle_count() {
        let g = u.cell_gradient(t);
        let c = v.centroid_value(t);
        pairing += mesh.area(t) * (0..2 * m).map(|i| g[i] * c[i]).sum::<f64>();
    }
    let lhs = pairing.abs();

    let vstar = nt_max(v, cones);
    let mass = mesh.boundary_mass();
    let vstar_sq: f64 = mass.iter().zip(vstar.values()).map(|(w, s)| w * s * s).sum();
    let v_bracket = square_function_integral(v) + vstar_sq;
    let u_factor = match variant {
        BilinearVariant::SquareWeight => square_function_integral(u).sqrt(),
        BilinearVariant::BoundaryL2 => {
            let tr = u.trace();
            (0..mesh.boundary_count())
                .map(|q| mass[q] * tr.node(q).iter().map(|x| x * x).sum::<f64>())
                .sum::<f64>()
                .sqrt()
        }
    };
    let rhs = u_factor * v_bracket.sqrt();

    let ku = sys.matrix().mul_vec(u.values());
    let res = sys.interior_dofs().iter().fold(0.0, |r: f64, &d| r.max(ku[d].abs()));
    let scale = sys.matrix().max_abs() * u.values().iter().fold(0.0, |s: f64, x| s.max(x.abs()));
    let harmonic_residual = if scale > 0.0 { res / scale } else { 0.0 };
    Ok(BilinearSides { lhs, rhs, v_bracket, harmonic_residual })
}
