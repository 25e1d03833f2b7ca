//! Extensions of boundary data into the domain: harmonic, entrywise harmonic
//! for coefficient tensors, and the mollifier extension over graph charts.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float as _;

use crate::coefficients::{CoefTensor, CoefficientField};
use crate::error::{Error, Result};
use crate::fem::{assemble, solve_dirichlet, BoundaryTrace, CellField, DiscreteField, StiffnessSystem};
use crate::functionals::CellMeasure;
use crate::geometry::{segment_distance, GraphMap, Mollifier, PiecewiseLinear, PolygonalDomain, TriMesh};
use crate::{Point, Vector};

/// Scalar Laplacian solves on a fixed mesh, reused across components.
#[derive(Debug, Clone)]
pub struct HarmonicExtender<'a> {
    sys: StiffnessSystem<'a>,
}

impl<'a> HarmonicExtender<'a> {
    pub fn new(mesh: &'a TriMesh) -> Result<Self> {
        Ok(Self { sys: assemble(mesh, &CoefficientField::identity(1)?)? })
    }

    /// Componentwise discrete harmonic extension.
    pub fn extend(&self, g: &BoundaryTrace<'_>) -> Result<DiscreteField<'a>> {
        let mesh = self.sys.mesh();
        let k = g.components();
        if g.values().len() != mesh.boundary_count() * k {
            return Err(Error::Dimension { expected: mesh.boundary_count() * k, got: g.values().len() });
        }
        let mut values = alloc::vec![0.0; mesh.node_count() * k];
        for c in 0..k {
            let comp: Vec<f64> = (0..mesh.boundary_count()).map(|q| g.node(q)[c]).collect();
            let u = solve_dirichlet(&self.sys, &BoundaryTrace::new(mesh, 1, comp)?)?;
            for (i, v) in u.values().iter().enumerate() {
                values[i * k + c] = *v;
            }
        }
        DiscreteField::new(mesh, k, values)
    }
}

/// Discrete harmonic extension of `g` with identity coefficients.
pub fn harmonic_extension<'a>(g: &BoundaryTrace<'a>) -> Result<DiscreteField<'a>> {
    HarmonicExtender::new(g.mesh())?.extend(g)
}

/// Entrywise harmonic extension `B` of the boundary values of `A`.
#[derive(Debug, Clone)]
pub struct MatrixExtension<'a> {
    mesh: &'a TriMesh,
    nodal: Vec<CoefTensor>,
    eta: f64,
    /// `max_T |∇B|(x_T) δ(x_T)^{1−η}`.
    pub grad_bound_profile: f64,
    /// `max_T |A − B|(x_T) δ(x_T)^{−η}`.
    pub deviation_profile: f64,
    /// Smallest eigenvalue of the symmetric part of `B` over centroids.
    pub mu_emp: f64,
    /// Largest eigenvalue of the symmetric part of `B` over centroids.
    pub upper_emp: f64,
}

impl<'a> MatrixExtension<'a> {
    pub fn mesh(&self) -> &'a TriMesh {
        self.mesh
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn nodal(&self) -> &[CoefTensor] {
        &self.nodal
    }

    /// `B` at the centroid of triangle `t`.
    pub fn cell_tensor(&self, t: usize) -> CoefTensor {
        let [a, b, c] = self.mesh.triangles()[t];
        (self.nodal[a] + self.nodal[b] + self.nodal[c]) * (1.0 / 3.0)
    }

    /// `[∂_1 B, ∂_2 B]` on triangle `t`.
    pub fn cell_gradient(&self, t: usize) -> [CoefTensor; 2] {
        let m = self.nodal[0].m();
        let grads = self.mesh.hat_gradients(t);
        let tri = self.mesh.triangles()[t];
        let mut out = [CoefTensor::zeros(m), CoefTensor::zeros(m)];
        for (corner, &node) in tri.iter().enumerate() {
            out[0] = out[0] + self.nodal[node] * grads[corner].x;
            out[1] = out[1] + self.nodal[node] * grads[corner].y;
        }
        out
    }

    /// Whether `mu_emp ≥ (1 − tol) μ`.
    pub fn inherits_ellipticity(&self, mu: f64, tol: f64) -> bool {
        self.mu_emp >= (1.0 - tol) * mu
    }
}

pub fn matrix_extension<'a>(a: &CoefficientField, mesh: &'a TriMesh) -> Result<MatrixExtension<'a>> {
    let m = a.m();
    let entries = 4 * m * m;
    let ext = HarmonicExtender::new(mesh)?;
    let boundary: Vec<CoefTensor> = mesh.boundary_points().into_iter().map(|p| a.eval(p)).collect();
    let mut nodal = alloc::vec![CoefTensor::zeros(m); mesh.node_count()];
    let mut slices: Vec<Vec<f64>> = alloc::vec![alloc::vec![0.0; entries]; mesh.node_count()];
    for e in 0..entries {
        let trace = BoundaryTrace::new(mesh, 1, boundary.iter().map(|t| t.as_slice()[e]).collect())?;
        let b = ext.extend(&trace)?;
        for (i, v) in b.values().iter().enumerate() {
            slices[i][e] = *v;
        }
    }
    for (i, s) in slices.iter().enumerate() {
        nodal[i] = CoefTensor::from_slice(m, s);
    }

    let eta = a.holder_exponent();
    let mut out = MatrixExtension {
        mesh,
        nodal,
        eta,
        grad_bound_profile: 0.0,
        deviation_profile: 0.0,
        mu_emp: f64::INFINITY,
        upper_emp: 0.0,
    };
    for t in 0..mesh.triangle_count() {
        let d = mesh.centroid_delta()[t];
        let [gx, gy] = out.cell_gradient(t);
        let grad = (gx.frobenius_sq() + gy.frobenius_sq()).sqrt();
        out.grad_bound_profile = out.grad_bound_profile.max(grad * d.powf(1.0 - eta));
        let b = out.cell_tensor(t);
        let dev = (a.eval(mesh.centroid(t)) - b).frobenius();
        out.deviation_profile = out.deviation_profile.max(dev * d.powf(-eta));
        let (lo, hi) = b.form_bounds();
        out.mu_emp = out.mu_emp.min(lo);
        out.upper_emp = out.upper_emp.max(hi);
    }
    Ok(out)
}

fn bump(z: f64) -> f64 {
    if z.abs() >= 1.0 {
        0.0
    } else {
        let w = 1.0 - z * z;
        w * w * w
    }
}

fn smoothstep(z: f64) -> f64 {
    let z = z.clamp(0.0, 1.0);
    z * z * z * (z * (6.0 * z - 15.0) + 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum ChartShape {
    /// Ball of this radius around the vertex.
    Vertex { radius: f64 },
    /// Box `lo < y′ < hi`, `0 ≤ t < depth` over the edge.
    Edge { lo: f64, hi: f64, depth: f64 },
}

/// One boundary chart: a frame, the graph `ψ` in that frame, and the boundary
/// data `f` read as a function of the tangential coordinate.
#[derive(Debug, Clone)]
pub struct Chart {
    origin: Point,
    tangent: Vector,
    normal: Vector,
    shape: ChartShape,
    map: GraphMap,
    slots: Vec<usize>,
    knots: Vec<f64>,
}

impl Chart {
    pub fn map(&self) -> &GraphMap {
        &self.map
    }

    /// Boundary slots whose values define the chart data.
    pub fn slots(&self) -> &[usize] {
        &self.slots
    }

    fn local(&self, x: Point) -> (f64, f64) {
        let d = x - self.origin;
        (d.dot(&self.tangent), d.dot(&self.normal))
    }

    fn weight(&self, x: Point) -> f64 {
        let (y, t) = self.local(x);
        match self.shape {
            ChartShape::Vertex { radius } => bump((x - self.origin).norm() / radius),
            ChartShape::Edge { lo, hi, depth } => {
                if t < 0.0 || y <= lo || y >= hi {
                    0.0
                } else {
                    let mid = 0.5 * (lo + hi);
                    bump((y - mid) / (0.5 * (hi - lo))) * bump(t / depth)
                }
            }
        }
    }

    fn data(&self, g: &[f64]) -> Result<PiecewiseLinear> {
        PiecewiseLinear::from_knots(self.knots.clone(), self.slots.iter().map(|&q| g[q]).collect())
    }

    /// `F(y′, t) = (η_s ∗ f)(y′)` with `s` chosen so that `Φ(y′, s) = (y′, t)`.
    fn extend(&self, f: &PiecewiseLinear, x: Point) -> f64 {
        let (y, t) = self.local(x);
        let s = self.map.invert_height(y, t);
        if s > 0.0 {
            f.mollify(y, s)
        } else {
            f.eval(y)
        }
    }
}

/// Vertex and edge charts covering a boundary collar, plus the interior cutoff.
#[derive(Debug, Clone)]
pub struct ChartCover<'a> {
    mesh: &'a TriMesh,
    charts: Vec<Chart>,
    /// Interior weight ramps from 0 at distance `collar` from an edge to 1 at `2·collar`.
    collar: f64,
}

impl<'a> ChartCover<'a> {
    pub fn new(mesh: &'a TriMesh) -> Result<Self> {
        let domain = mesh.domain();
        let n = domain.edge_count();
        let verts = domain.vertices();
        let tol = 1e-9 * domain.diameter();
        let bpts = mesh.boundary_points();
        let on_edge: Vec<Vec<usize>> = (0..n)
            .map(|e| {
                let (a, b) = domain.edge(e);
                (0..bpts.len()).filter(|&q| segment_distance(bpts[q], a, b) <= tol).collect()
            })
            .collect();
        let edge_len = |e: usize| {
            let (a, b) = domain.edge(e);
            (b - a).norm()
        };
        let radii: Vec<f64> = (0..n).map(|k| 0.4 * edge_len((k + n - 1) % n).min(edge_len(k))).collect();
        let r_min = radii.iter().copied().fold(f64::INFINITY, f64::min);
        if r_min < 2.0 * mesh.h() {
            return Err(Error::UnderResolved { spacing: mesh.h(), s: r_min });
        }

        let mut charts = Vec::with_capacity(2 * n);
        for k in 0..n {
            let v = verts[k];
            let prev = (k + n - 1) % n;
            let e_in = {
                let (a, b) = domain.edge(prev);
                (b - a).normalize()
            };
            let e_out = {
                let (a, b) = domain.edge(k);
                (b - a).normalize()
            };
            let normal = (left(e_in) + left(e_out)).normalize();
            let tangent = Vector::new(normal.y, -normal.x);
            let slope = e_out.dot(&normal) / e_out.dot(&tangent).abs();
            let far = 4.0 * radii[k];
            let psi =
                PiecewiseLinear::from_knots(alloc::vec![-far, 0.0, far], alloc::vec![slope * far, 0.0, slope * far])?;
            let mut slots: Vec<usize> = on_edge[prev].iter().chain(&on_edge[k]).copied().collect();
            slots.sort_unstable();
            slots.dedup();
            charts.push(chart_with_data(
                v,
                tangent,
                normal,
                ChartShape::Vertex { radius: radii[k] },
                GraphMap::with_stretch(psi, vertex_stretch(slope))?,
                slots,
                &bpts,
            )?);
        }
        for e in 0..n {
            let (a, b) = domain.edge(e);
            let len = (b - a).norm();
            let tangent = (b - a) / len;
            let normal = left(tangent);
            let shape = ChartShape::Edge {
                lo: -0.5 * len + 0.5 * radii[e],
                hi: 0.5 * len - 0.5 * radii[(e + 1) % n],
                depth: r_min,
            };
            let flat = PiecewiseLinear::from_knots(alloc::vec![-len, len], alloc::vec![0.0, 0.0])?;
            charts.push(chart_with_data(
                Point::from((a.coords + b.coords) * 0.5),
                tangent,
                normal,
                shape,
                GraphMap::new(flat),
                on_edge[e].clone(),
                &bpts,
            )?);
        }
        Ok(Self { mesh, charts, collar: 0.35 * r_min })
    }

    pub fn charts(&self) -> &[Chart] {
        &self.charts
    }

    pub fn collar(&self) -> f64 {
        self.collar
    }

    /// `Π_e S((dist(x, e) − collar) / collar)` over the edges, with `S` the
    /// quintic smoothstep. Unlike a cutoff in `δ` it has no kink on the medial axis.
    pub fn interior_weight(&self, x: Point) -> f64 {
        let domain = self.mesh.domain();
        (0..domain.edge_count())
            .map(|e| {
                let (a, b) = domain.edge(e);
                smoothstep((segment_distance(x, a, b) - self.collar) / self.collar)
            })
            .product()
    }

    pub fn domain(&self) -> &PolygonalDomain {
        self.mesh.domain()
    }
}

/// Twice the minimum for `∂F/∂s ≥ 1`. The default stretch works too but makes
/// the smoothed corner kink `c` times narrower than `δ`, which coarse meshes
/// cannot resolve.
fn vertex_stretch(slope: f64) -> f64 {
    1.0 + 2.0 * slope.abs() * Mollifier::FIRST_MOMENT
}

fn left(v: Vector) -> Vector {
    Vector::new(-v.y, v.x)
}

fn chart_with_data(
    origin: Point,
    tangent: Vector,
    normal: Vector,
    shape: ChartShape,
    map: GraphMap,
    slots: Vec<usize>,
    bpts: &[Point],
) -> Result<Chart> {
    let mut keyed: Vec<(f64, usize)> = slots.iter().map(|&q| ((bpts[q] - origin).dot(&tangent), q)).collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (knots, slots) = keyed.into_iter().unzip();
    Ok(Chart { origin, tangent, normal, shape, map, slots, knots })
}

/// The mollifier extension of a Lipschitz trace and its audit quantities.
#[derive(Debug, Clone)]
pub struct LipschitzExtension<'a> {
    pub v: DiscreteField<'a>,
    /// `max_T |∇v|`.
    pub grad_sup: f64,
    /// Carleson norm of `|D²v|² δ dx`.
    pub hessian_carleson: f64,
    /// `max_Q |v(Q) − g(Q)|`.
    pub boundary_defect: f64,
}

/// `v = w_0 H + (1 − w_0) Σ_k w_k F_k / Σ_k w_k`, with `F_k` the chart
/// extensions, `H` the harmonic extension, `w_0` the interior cutoff, and
/// boundary nodes set to `g`.
pub fn lipschitz_extension<'a>(g: &BoundaryTrace<'a>, cover: &ChartCover<'a>) -> Result<LipschitzExtension<'a>> {
    let mesh = cover.mesh;
    if g.components() != 1 {
        return Err(Error::Dimension { expected: 1, got: g.components() });
    }
    if !core::ptr::eq(g.mesh(), mesh) {
        return Err(Error::InvalidMesh("trace and chart cover live on different meshes".into()));
    }
    check_lipschitz(g)?;
    let gv = g.values();
    let data: Vec<PiecewiseLinear> = cover.charts.iter().map(|c| c.data(gv)).collect::<Result<_>>()?;
    let interior = harmonic_extension(g)?;
    let mut values = Vec::with_capacity(mesh.node_count());
    for (i, &x) in mesh.nodes().iter().enumerate() {
        if let Some(slot) = mesh.boundary_slot(i) {
            values.push(gv[slot]);
            continue;
        }
        let w0 = cover.interior_weight(x);
        if w0 >= 1.0 {
            values.push(interior.values()[i]);
            continue;
        }
        let (mut num, mut den) = (0.0, 0.0);
        for (chart, f) in cover.charts.iter().zip(&data) {
            let w = chart.weight(x);
            if w > 0.0 {
                num += w * chart.extend(f, x);
                den += w;
            }
        }
        if !(den > 0.0) {
            return Err(Error::InvalidMesh(alloc::format!("node {i} lies outside every chart")));
        }
        values.push(w0 * interior.values()[i] + (1.0 - w0) * num / den);
    }
    let v = DiscreteField::new(mesh, 1, values)?;
    let grad_sup = (0..mesh.triangle_count()).map(|t| v.cell_gradient_sq(t).sqrt()).fold(0.0, f64::max);
    let hessian_carleson = hessian_measure(&v)?.carleson_norm();
    let boundary_defect =
        mesh.boundary_nodes().iter().enumerate().map(|(q, &i)| (v.values()[i] - gv[q]).abs()).fold(0.0, f64::max);
    Ok(LipschitzExtension { v, grad_sup, hessian_carleson, boundary_defect })
}

/// Rejects traces where a single boundary edge carries more than half the
/// oscillation, the discrete signature of a jump.
fn check_lipschitz(g: &BoundaryTrace<'_>) -> Result<()> {
    let v = g.values();
    let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let osc = hi - lo;
    if osc == 0.0 {
        return Ok(());
    }
    let lens = g.mesh().boundary_edge_lengths();
    let n = v.len();
    for e in 0..n {
        let jump = (v[(e + 1) % n] - v[e]).abs();
        if jump > 0.5 * osc {
            return Err(Error::NotLipschitz(jump / lens[e]));
        }
    }
    Ok(())
}

/// `|D²v|² δ dx` with `D²v` the cellwise gradient of the area-averaged nodal
/// gradient.
pub fn hessian_measure<'a>(v: &DiscreteField<'a>) -> Result<CellMeasure<'a>> {
    let mesh = v.mesh();
    if v.components() != 1 {
        return Err(Error::Dimension { expected: 1, got: v.components() });
    }
    let grad = CellField::gradient_of(v).to_nodes(mesh)?;
    let weights = (0..mesh.triangle_count())
        .map(|t| grad.cell_gradient_sq(t) * mesh.centroid_delta()[t] * mesh.area(t))
        .collect();
    CellMeasure::new(mesh, weights)
}
