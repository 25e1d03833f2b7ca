use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float as _;

use crate::error::{Error, Result};
use crate::geometry::TriMesh;
use crate::Point;

/// Largest number of components a field may carry (`d·m` with `d = m = 2`).
pub const MAX_COMPONENTS: usize = 4;

/// Nodal P1 field with `k` components; value `α` of node `p` at index `p·k + α`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteField<'a> {
    mesh: &'a TriMesh,
    k: usize,
    values: Vec<f64>,
}

impl<'a> DiscreteField<'a> {
    pub fn new(mesh: &'a TriMesh, k: usize, values: Vec<f64>) -> Result<Self> {
        check_components(k)?;
        if values.len() != mesh.node_count() * k {
            return Err(Error::Dimension { expected: mesh.node_count() * k, got: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMesh("field has non-finite entries".into()));
        }
        Ok(Self { mesh, k, values })
    }

    pub fn zeros(mesh: &'a TriMesh, k: usize) -> Self {
        Self { mesh, k, values: vec![0.0; mesh.node_count() * k] }
    }

    /// Nodal interpolant of `f`; only the first `k` outputs are used.
    pub fn from_fn(mesh: &'a TriMesh, k: usize, f: impl Fn(Point) -> [f64; MAX_COMPONENTS]) -> Self {
        let mut values = Vec::with_capacity(mesh.node_count() * k);
        for p in mesh.nodes() {
            values.extend_from_slice(&f(*p)[..k]);
        }
        Self { mesh, k, values }
    }

    pub fn scalar_from_fn(mesh: &'a TriMesh, f: impl Fn(Point) -> f64) -> Self {
        Self { mesh, k: 1, values: mesh.nodes().iter().map(|&p| f(p)).collect() }
    }

    pub fn mesh(&self) -> &'a TriMesh {
        self.mesh
    }

    pub fn components(&self) -> usize {
        self.k
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.values[i * self.k..(i + 1) * self.k]
    }

    /// Euclidean magnitude at node `i`.
    pub fn magnitude(&self, i: usize) -> f64 {
        self.node(i).iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `max_i |u(x_i)|`.
    pub fn max_magnitude(&self) -> f64 {
        (0..self.mesh.node_count()).map(|i| self.magnitude(i)).fold(0.0, f64::max)
    }

    /// Values at boundary nodes in boundary order.
    pub fn trace(&self) -> BoundaryTrace<'a> {
        let mut values = Vec::with_capacity(self.mesh.boundary_count() * self.k);
        for &i in self.mesh.boundary_nodes() {
            values.extend_from_slice(self.node(i));
        }
        BoundaryTrace { mesh: self.mesh, k: self.k, values }
    }

    /// Constant cellwise gradient; `∂_i u^c` at index `2c + i`.
    pub fn cell_gradient(&self, t: usize) -> [f64; 2 * MAX_COMPONENTS] {
        let grads = self.mesh.hat_gradients(t);
        let tri = self.mesh.triangles()[t];
        let mut g = [0.0; 2 * MAX_COMPONENTS];
        for (corner, &node) in tri.iter().enumerate() {
            for c in 0..self.k {
                let v = self.values[node * self.k + c];
                g[2 * c] += v * grads[corner].x;
                g[2 * c + 1] += v * grads[corner].y;
            }
        }
        g
    }

    /// `|∇u|²` on triangle `t`.
    pub fn cell_gradient_sq(&self, t: usize) -> f64 {
        self.cell_gradient(t)[..2 * self.k].iter().map(|v| v * v).sum()
    }

    /// Value at the centroid of triangle `t`.
    pub fn centroid_value(&self, t: usize) -> [f64; MAX_COMPONENTS] {
        let mut v = [0.0; MAX_COMPONENTS];
        for &node in &self.mesh.triangles()[t] {
            for c in 0..self.k {
                v[c] += self.values[node * self.k + c] / 3.0;
            }
        }
        v
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { values: self.values.iter().map(|v| v * s).collect(), ..self.clone() }
    }

    pub fn add_constant(&self, c: f64) -> Self {
        Self { values: self.values.iter().map(|v| v + c).collect(), ..self.clone() }
    }

    /// `self − other`, componentwise.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        if other.values.len() != self.values.len() {
            return Err(Error::Dimension { expected: self.values.len(), got: other.values.len() });
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(Self { values, ..self.clone() })
    }

    /// Componentwise nodal product with a scalar field.
    pub fn times_scalar(&self, g: &DiscreteField<'_>) -> Self {
        let mut values = self.values.clone();
        for (i, v) in values.iter_mut().enumerate() {
            *v *= g.values[i / self.k];
        }
        Self { values, ..self.clone() }
    }
}

/// Nodal data on the boundary cycle, `k` components per boundary node.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTrace<'a> {
    mesh: &'a TriMesh,
    k: usize,
    values: Vec<f64>,
}

impl<'a> BoundaryTrace<'a> {
    pub fn new(mesh: &'a TriMesh, k: usize, values: Vec<f64>) -> Result<Self> {
        check_components(k)?;
        if values.len() != mesh.boundary_count() * k {
            return Err(Error::Dimension { expected: mesh.boundary_count() * k, got: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMesh("trace has non-finite entries".into()));
        }
        Ok(Self { mesh, k, values })
    }

    pub fn from_fn(mesh: &'a TriMesh, k: usize, f: impl Fn(Point) -> [f64; MAX_COMPONENTS]) -> Self {
        let mut values = Vec::with_capacity(mesh.boundary_count() * k);
        for p in mesh.boundary_points() {
            values.extend_from_slice(&f(p)[..k]);
        }
        Self { mesh, k, values }
    }

    pub fn scalar_from_fn(mesh: &'a TriMesh, f: impl Fn(Point) -> f64) -> Self {
        Self { mesh, k: 1, values: mesh.boundary_points().into_iter().map(f).collect() }
    }

    pub fn constant(mesh: &'a TriMesh, k: usize, c: f64) -> Self {
        Self { mesh, k, values: vec![c; mesh.boundary_count() * k] }
    }

    pub fn mesh(&self) -> &'a TriMesh {
        self.mesh
    }

    pub fn components(&self) -> usize {
        self.k
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn node(&self, slot: usize) -> &[f64] {
        &self.values[slot * self.k..(slot + 1) * self.k]
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { values: self.values.iter().map(|v| v * s).collect(), ..self.clone() }
    }

    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.mesh, self.k, values)
    }
}

/// Per-triangle vectors with `k` components (for example a `d × m` source `f`).
#[derive(Debug, Clone, PartialEq)]
pub struct CellField {
    k: usize,
    values: Vec<f64>,
}

impl CellField {
    pub fn new(mesh: &TriMesh, k: usize, values: Vec<f64>) -> Result<Self> {
        if k == 0 || k > 2 * MAX_COMPONENTS {
            return Err(Error::Dimension { expected: 2 * MAX_COMPONENTS, got: k });
        }
        if values.len() != mesh.triangle_count() * k {
            return Err(Error::Dimension { expected: mesh.triangle_count() * k, got: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMesh("cell field has non-finite entries".into()));
        }
        Ok(Self { k, values })
    }

    /// Samples `f` at every centroid; only the first `k` outputs are used.
    pub fn from_fn(mesh: &TriMesh, k: usize, f: impl Fn(Point) -> [f64; MAX_COMPONENTS]) -> Self {
        let mut values = Vec::with_capacity(mesh.triangle_count() * k);
        for t in 0..mesh.triangle_count() {
            values.extend_from_slice(&f(mesh.centroid(t))[..k]);
        }
        Self { k, values }
    }

    /// Cellwise gradient of a nodal field.
    pub fn gradient_of(u: &DiscreteField<'_>) -> Self {
        let k = 2 * u.components();
        let mut values = Vec::with_capacity(u.mesh().triangle_count() * k);
        for t in 0..u.mesh().triangle_count() {
            values.extend_from_slice(&u.cell_gradient(t)[..k]);
        }
        Self { k, values }
    }

    pub fn components(&self) -> usize {
        self.k
    }

    pub fn cell(&self, t: usize) -> &[f64] {
        &self.values[t * self.k..(t + 1) * self.k]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cell_sq(&self, t: usize) -> f64 {
        self.cell(t).iter().map(|v| v * v).sum()
    }

    /// Area-weighted average onto nodes.
    pub fn to_nodes<'a>(&self, mesh: &'a TriMesh) -> Result<DiscreteField<'a>> {
        check_components(self.k)?;
        let k = self.k;
        let mut acc = vec![0.0; mesh.node_count() * k];
        let mut area = vec![0.0; mesh.node_count()];
        for (t, tri) in mesh.triangles().iter().enumerate() {
            let a = mesh.area(t);
            for &n in tri {
                area[n] += a;
                for c in 0..k {
                    acc[n * k + c] += a * self.values[t * self.k + c];
                }
            }
        }
        for (i, v) in acc.iter_mut().enumerate() {
            *v /= area[i / k];
        }
        Ok(DiscreteField { mesh, k, values: acc })
    }
}

fn check_components(k: usize) -> Result<()> {
    if k == 0 || k > MAX_COMPONENTS {
        Err(Error::Dimension { expected: MAX_COMPONENTS, got: k })
    } else {
        Ok(())
    }
}
