use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float as _;

use super::fields::{BoundaryTrace, CellField, DiscreteField};
use super::lu::SparseLu;
use super::sparse::CsrMatrix;
use crate::coefficients::{CoefTensor, CoefficientField};
use crate::error::{Error, Result};
use crate::geometry::TriMesh;

/// Relative interior residual accepted from a direct solve.
pub const SOLVE_TOLERANCE: f64 = 1e-10;

/// Assembled P1 stiffness matrix with its interior/boundary partition and the
/// factored interior block.
///
/// Dof `(p, α)` of the full matrix is `p·m + α`. Boundary dofs are numbered by
/// boundary slot, `k·m + α`; interior dofs by the order of interior nodes.
#[derive(Debug, Clone)]
pub struct StiffnessSystem<'a> {
    mesh: &'a TriMesh,
    m: usize,
    symmetric: bool,
    tensors: Vec<CoefTensor>,
    coefficients: Option<CoefficientField>,
    matrix: CsrMatrix,
    interior_nodes: Vec<usize>,
    interior_dofs: Vec<usize>,
    boundary_dofs: Vec<usize>,
    k_ii: CsrMatrix,
    k_ib: CsrMatrix,
    k_bi: CsrMatrix,
    k_bb: CsrMatrix,
    factor: core::result::Result<SparseLu, Error>,
}

/// `K_T[(p,α),(q,β)] = area · a_ij^{αβ} ∂_iφ_p ∂_jφ_q` for one triangle.
pub fn local_stiffness(mesh: &TriMesh, t: usize, a: &CoefTensor) -> Vec<f64> {
    let m = a.m();
    let grads = mesh.hat_gradients(t);
    let area = mesh.area(t);
    let n = 3 * m;
    let mut k = vec![0.0; n * n];
    for p in 0..3 {
        let gp = [grads[p].x, grads[p].y];
        for q in 0..3 {
            let gq = [grads[q].x, grads[q].y];
            for al in 0..m {
                for be in 0..m {
                    let mut s = 0.0;
                    for i in 0..2 {
                        for j in 0..2 {
                            s += a.get(i, j, al, be) * gp[i] * gq[j];
                        }
                    }
                    k[(p * m + al) * n + q * m + be] = area * s;
                }
            }
        }
    }
    k
}

/// Assembles `−div(A∇·)` with `A` sampled at triangle centroids.
pub fn assemble<'a>(mesh: &'a TriMesh, a: &CoefficientField) -> Result<StiffnessSystem<'a>> {
    let tensors: Vec<CoefTensor> = (0..mesh.triangle_count()).map(|t| a.eval(mesh.centroid(t))).collect();
    let mut sys = assemble_cellwise(mesh, &tensors, a.is_symmetric())?;
    sys.coefficients = Some(a.clone());
    Ok(sys)
}

/// Assembles from one tensor per triangle.
pub fn assemble_cellwise<'a>(
    mesh: &'a TriMesh,
    tensors: &[CoefTensor],
    symmetric: bool,
) -> Result<StiffnessSystem<'a>> {
    if tensors.len() != mesh.triangle_count() {
        return Err(Error::Dimension { expected: mesh.triangle_count(), got: tensors.len() });
    }
    let m = tensors.first().map_or(1, |t| t.m());
    let scale = mesh.domain().diameter();
    let mut triplets = Vec::with_capacity(mesh.triangle_count() * 9 * m * m);
    for (t, tensor) in tensors.iter().enumerate() {
        if mesh.area(t) <= 1e-14 * scale * scale {
            return Err(Error::DegenerateTriangle(t));
        }
        let k = local_stiffness(mesh, t, tensor);
        let tri = mesh.triangles()[t];
        let n = 3 * m;
        for p in 0..3 {
            for al in 0..m {
                for q in 0..3 {
                    for be in 0..m {
                        triplets.push((tri[p] * m + al, tri[q] * m + be, k[(p * m + al) * n + q * m + be]));
                    }
                }
            }
        }
    }
    let ndof = mesh.node_count() * m;
    let matrix = CsrMatrix::from_triplets(ndof, ndof, &triplets);

    let interior_nodes: Vec<usize> = (0..mesh.node_count()).filter(|&i| !mesh.is_boundary(i)).collect();
    let interior_dofs: Vec<usize> = interior_nodes.iter().flat_map(|&i| (0..m).map(move |al| i * m + al)).collect();
    let boundary_dofs: Vec<usize> =
        mesh.boundary_nodes().iter().flat_map(|&i| (0..m).map(move |al| i * m + al)).collect();
    let mut to_interior = vec![usize::MAX; ndof];
    let mut to_boundary = vec![usize::MAX; ndof];
    for (k, &d) in interior_dofs.iter().enumerate() {
        to_interior[d] = k;
    }
    for (k, &d) in boundary_dofs.iter().enumerate() {
        to_boundary[d] = k;
    }
    let (ni, nb) = (interior_dofs.len(), boundary_dofs.len());
    let k_ii = matrix.select(&interior_dofs, &to_interior, ni);
    let k_ib = matrix.select(&interior_dofs, &to_boundary, nb);
    let k_bi = matrix.select(&boundary_dofs, &to_interior, ni);
    let k_bb = matrix.select(&boundary_dofs, &to_boundary, nb);
    let factor = factor_by_nodes(&k_ii, &interior_nodes, mesh, m);
    Ok(StiffnessSystem {
        mesh,
        m,
        symmetric,
        tensors: tensors.to_vec(),
        coefficients: None,
        matrix,
        interior_nodes,
        interior_dofs,
        boundary_dofs,
        k_ii,
        k_ib,
        k_bi,
        k_bb,
        factor,
    })
}

/// Orders the node graph and expands the ordering to node-major dofs.
fn factor_by_nodes(
    k_ii: &CsrMatrix,
    interior_nodes: &[usize],
    mesh: &TriMesh,
    m: usize,
) -> core::result::Result<SparseLu, Error> {
    let mut local = vec![usize::MAX; mesh.node_count()];
    for (k, &i) in interior_nodes.iter().enumerate() {
        local[i] = k;
    }
    let mut adj = vec![Vec::new(); interior_nodes.len()];
    for tri in mesh.triangles() {
        for &p in tri {
            for &q in tri {
                if p != q && local[p] != usize::MAX && local[q] != usize::MAX {
                    adj[local[p]].push(local[q]);
                }
            }
        }
    }
    for row in &mut adj {
        row.sort_unstable();
        row.dedup();
    }
    let node_order = super::ordering::nested_dissection(&adj);
    let perm: Vec<usize> = node_order.iter().flat_map(|&n| (0..m).map(move |al| n * m + al)).collect();
    SparseLu::factor_with_order(k_ii, perm).map_err(|e| match e {
        Error::SingularPivot { dof, pivot } => {
            Error::SingularPivot { dof: interior_nodes[dof / m] * m + dof % m, pivot }
        }
        other => other,
    })
}

impl<'a> StiffnessSystem<'a> {
    pub fn mesh(&self) -> &'a TriMesh {
        self.mesh
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Whether the coefficients were declared with `A* = A`.
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    /// Centroid tensors used in assembly.
    pub fn tensors(&self) -> &[CoefTensor] {
        &self.tensors
    }

    /// The field the system was assembled from, if any.
    pub fn coefficients(&self) -> Option<&CoefficientField> {
        self.coefficients.as_ref()
    }

    /// System of `𝓛* = −div(A*∇·)`; its matrix is `Kᵀ`. Reuses `self` when `A* = A`.
    pub fn adjoint(&self) -> Result<Self> {
        if self.symmetric {
            return Ok(self.clone());
        }
        let tensors: Vec<CoefTensor> = self.tensors.iter().map(CoefTensor::adjoint).collect();
        let mut sys = assemble_cellwise(self.mesh, &tensors, false)?;
        sys.coefficients = self.coefficients.as_ref().map(CoefficientField::adjoint);
        Ok(sys)
    }

    pub fn interior_dofs(&self) -> &[usize] {
        &self.interior_dofs
    }

    pub fn boundary_dofs(&self) -> &[usize] {
        &self.boundary_dofs
    }

    pub fn interior_nodes(&self) -> &[usize] {
        &self.interior_nodes
    }

    pub fn blocks(&self) -> (&CsrMatrix, &CsrMatrix, &CsrMatrix, &CsrMatrix) {
        (&self.k_ii, &self.k_ib, &self.k_bi, &self.k_bb)
    }

    pub fn interior_factor(&self) -> Result<&SparseLu> {
        self.factor.as_ref().map_err(Clone::clone)
    }

    /// Discrete form `a(u, w) = wᵀ K u`, with `u` the trial and `w` the test field.
    pub fn form(&self, u: &DiscreteField<'_>, w: &DiscreteField<'_>) -> f64 {
        self.matrix.form(w.values(), u.values())
    }

    /// `max |K − Kᵀ| / max |K|`.
    pub fn symmetry_defect(&self) -> f64 {
        self.matrix.asymmetry() / self.matrix.max_abs()
    }

    /// Solves `K_ii x = rhs` with one step of iterative refinement when the
    /// residual misses [`SOLVE_TOLERANCE`].
    pub fn solve_interior(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let lu = self.interior_factor()?;
        let mut x = lu.solve(rhs);
        let norm = inf_norm(rhs).max(f64::MIN_POSITIVE);
        let mut res = residual(&self.k_ii, &x, rhs);
        if inf_norm(&res) > SOLVE_TOLERANCE * norm {
            let dx = lu.solve(&res);
            x.iter_mut().zip(&dx).for_each(|(a, b)| *a += b);
            res = residual(&self.k_ii, &x, rhs);
        }
        let r = inf_norm(&res);
        if r > SOLVE_TOLERANCE * norm {
            return Err(Error::Residual { residual: r / norm, tolerance: SOLVE_TOLERANCE });
        }
        Ok(x)
    }

    fn scatter(&self, interior: &[f64], boundary: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.matrix.rows()];
        for (k, &d) in self.interior_dofs.iter().enumerate() {
            full[d] = interior[k];
        }
        for (k, &d) in self.boundary_dofs.iter().enumerate() {
            full[d] = boundary[k];
        }
        full
    }
}

fn residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> Vec<f64> {
    a.mul_vec(x).iter().zip(b).map(|(p, q)| q - p).collect()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Discrete solution of `𝓛u = 0` with `u = f` on boundary nodes.
pub fn solve_dirichlet<'a>(sys: &StiffnessSystem<'a>, f: &BoundaryTrace<'_>) -> Result<DiscreteField<'a>> {
    if f.values().len() != sys.boundary_dofs.len() {
        return Err(Error::Dimension { expected: sys.boundary_dofs.len(), got: f.values().len() });
    }
    let rhs: Vec<f64> = sys.k_ib.mul_vec(f.values()).into_iter().map(|v| -v).collect();
    let x = sys.solve_interior(&rhs)?;
    DiscreteField::new(sys.mesh, sys.m, sys.scatter(&x, f.values()))
}

/// `u ∈ H¹₀` with `⟨A∇u, ∇φ⟩ = −⟨f, ∇φ⟩` for interior hats `φ`; `f` carries
/// `f_i^α` at index `2α + i` per triangle.
pub fn solve_div_source<'a>(sys: &StiffnessSystem<'a>, f: &CellField) -> Result<DiscreteField<'a>> {
    let mesh = sys.mesh;
    let m = sys.m;
    if f.components() != 2 * m || f.values().len() != 2 * m * mesh.triangle_count() {
        return Err(Error::Dimension { expected: 2 * m * mesh.triangle_count(), got: f.values().len() });
    }
    let mut load = vec![0.0; mesh.node_count() * m];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let grads = mesh.hat_gradients(t);
        let area = mesh.area(t);
        let ft = f.cell(t);
        for (c, &node) in tri.iter().enumerate() {
            for al in 0..m {
                load[node * m + al] -= area * (ft[2 * al] * grads[c].x + ft[2 * al + 1] * grads[c].y);
            }
        }
    }
    let rhs: Vec<f64> = sys.interior_dofs.iter().map(|&d| load[d]).collect();
    let x = sys.solve_interior(&rhs)?;
    let zeros = vec![0.0; sys.boundary_dofs.len()];
    DiscreteField::new(mesh, m, sys.scatter(&x, &zeros))
}

/// `φ(t) = (|ln t| + 1)²`.
pub fn log_weight(t: f64) -> f64 {
    let v = t.ln().abs() + 1.0;
    v * v
}

/// `Σ_T |∇u|²(T) δ(x_T)^α [φ(δ(x_T))] area(T)`.
pub fn weighted_grad_norm(u: &DiscreteField<'_>, alpha: f64, log_factor: bool) -> f64 {
    let mesh = u.mesh();
    (0..mesh.triangle_count())
        .map(|t| u.cell_gradient_sq(t) * cell_weight(mesh, t, alpha, log_factor) * mesh.area(t))
        .sum()
}

/// `Σ_T |f|²(T) δ(x_T)^α [φ(δ(x_T))] area(T)` for a cellwise field.
pub fn weighted_cell_norm(mesh: &TriMesh, f: &CellField, alpha: f64, log_factor: bool) -> f64 {
    (0..mesh.triangle_count()).map(|t| f.cell_sq(t) * cell_weight(mesh, t, alpha, log_factor) * mesh.area(t)).sum()
}

fn cell_weight(mesh: &TriMesh, t: usize, alpha: f64, log_factor: bool) -> f64 {
    let d = mesh.centroid_delta()[t];
    let w = if alpha == 0.0 { 1.0 } else { d.powf(alpha) };
    if log_factor {
        w * log_weight(d)
    } else {
        w
    }
}
