//! The Dirichlet-to-Neumann map as a boundary Schur complement.
//!
//! `⟨Λf, w⟩_M = a(u_f, E w)` for every trace `w` and every extension `E w`,
//! where `u_f` is the discrete solution with data `f` and `M` is the lumped
//! boundary mass. Multiplication by `g` is nodal.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};
#[allow(unused_imports)]
use num_traits::Float as _;

use crate::coefficients::{CoefficientField, MultiplierField};
use crate::error::{Error, Result};
use crate::fem::{solve_dirichlet, BoundaryTrace, DiscreteField, StiffnessSystem};
use crate::geometry::TriMesh;

#[derive(Debug, Clone)]
pub struct DtNOperator<'a> {
    mesh: &'a TriMesh,
    m: usize,
    symmetric: bool,
    coefficients: Option<CoefficientField>,
    schur: DMatrix<f64>,
    matrix: DMatrix<f64>,
    mass: Vec<f64>,
    dof_mass: Vec<f64>,
}

/// `S = K_bb − K_bi K_ii⁻¹ K_ib` and `Λ = M⁻¹ S`.
pub fn steklov_poincare<'a>(sys: &StiffnessSystem<'a>) -> Result<DtNOperator<'a>> {
    let mesh = sys.mesh();
    let m = sys.m();
    let lu = sys.interior_factor()?;
    let (_, k_ib, k_bi, k_bb) = sys.blocks();
    let nb = sys.boundary_dofs().len();
    let ni = sys.interior_dofs().len();
    let k_ib_t = k_ib.transpose();

    let mut schur = DMatrix::zeros(nb, nb);
    let mut col = vec![0.0; ni];
    for c in 0..nb {
        col.iter_mut().for_each(|v| *v = 0.0);
        let (rows, vals) = k_ib_t.row(c);
        for (&r, &v) in rows.iter().zip(vals) {
            col[r] = v;
        }
        let y = lu.solve(&col);
        let coupling = k_bi.mul_vec(&y);
        for r in 0..nb {
            schur[(r, c)] = k_bb.get(r, c) - coupling[r];
        }
    }

    let mass = mesh.boundary_mass();
    let dof_mass: Vec<f64> = mass.iter().flat_map(|&w| core::iter::repeat_n(w, m)).collect();
    let mut matrix = schur.clone();
    for (r, mut row) in matrix.row_iter_mut().enumerate() {
        row /= dof_mass[r];
    }
    Ok(DtNOperator {
        mesh,
        m,
        symmetric: sys.is_symmetric(),
        coefficients: sys.coefficients().cloned(),
        schur,
        matrix,
        mass,
        dof_mass,
    })
}

/// Structural checks of a computed `Λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DtNInvariants {
    /// `‖MΛ − (MΛ)ᵀ‖ / ‖MΛ‖` (max-entry norms).
    pub mass_symmetry: f64,
    /// `min_f ⟨Λf, f⟩_M / ‖f‖²_M`.
    pub min_form: f64,
    /// `‖Λ 1‖_∞ / ‖Λ‖_∞` for `m = 1`.
    pub constant_kernel: Option<f64>,
}

impl<'a> DtNOperator<'a> {
    pub fn mesh(&self) -> &'a TriMesh {
        self.mesh
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.dof_mass.len()
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn coefficients(&self) -> Option<&CoefficientField> {
        self.coefficients.as_ref()
    }

    /// Nodal values of `Λf` from nodal values of `f`.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `M Λ`, the Schur complement itself.
    pub fn schur(&self) -> &DMatrix<f64> {
        &self.schur
    }

    /// Lumped mass per boundary node.
    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// Lumped mass per boundary dof.
    pub fn dof_mass(&self) -> &[f64] {
        &self.dof_mass
    }

    pub fn apply_vec(&self, f: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n).map(|r| (0..n).map(|c| self.matrix[(r, c)] * f[c]).sum()).collect()
    }

    pub fn apply(&self, f: &BoundaryTrace<'_>) -> Result<BoundaryTrace<'a>> {
        self.check_trace(f)?;
        BoundaryTrace::new(self.mesh, self.m, self.apply_vec(f.values()))
    }

    /// `⟨a, b⟩_M`.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        self.dof_mass.iter().zip(a).zip(b).map(|((w, x), y)| w * x * y).sum()
    }

    fn check_trace(&self, f: &BoundaryTrace<'_>) -> Result<()> {
        if f.components() != self.m || f.values().len() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), got: f.values().len() });
        }
        Ok(())
    }

    /// `M^{1/2} Λ M^{−1/2} = M^{−1/2} S M^{−1/2}`.
    pub fn similarity(&self) -> DMatrix<f64> {
        similarity(&self.matrix, &self.dof_mass)
    }

    /// Eigenvalues of the symmetric part of `M^{1/2} Λ M^{−1/2}`, ascending.
    pub fn spectrum(&self) -> Vec<f64> {
        let b = self.similarity();
        let sym = (&b + b.transpose()) * 0.5;
        let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn invariants(&self) -> DtNInvariants {
        let s = &self.schur;
        let mass_symmetry = (s - s.transpose()).amax() / s.amax().max(f64::MIN_POSITIVE);
        let min_form = self.spectrum().first().copied().unwrap_or(0.0);
        let constant_kernel = (self.m == 1).then(|| {
            let ones = vec![1.0; self.dim()];
            let r = self.apply_vec(&ones).iter().fold(0.0, |a: f64, v| a.max(v.abs()));
            let norm = self.matrix.row_iter().map(|row| row.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
            r / norm.max(f64::MIN_POSITIVE)
        });
        DtNInvariants { mass_symmetry, min_form, constant_kernel }
    }

    fn check_multiplier(&self, g: &MultiplierField) -> Result<()> {
        if g.len() != self.mesh.boundary_count() {
            return Err(Error::Dimension { expected: self.mesh.boundary_count(), got: g.len() });
        }
        if let MultiplierField::Matrix { m, .. } = g {
            if *m != self.m {
                return Err(Error::Dimension { expected: self.m, got: *m });
            }
            if let Some(a) = &self.coefficients {
                g.check_commutes(a, self.mesh)?;
            }
        }
        Ok(())
    }
}

/// `[Λ, g] = Λ G − G Λ` as a dense matrix in the nodal boundary basis.
///
/// Entries are formed as `Λ_rc (g_c − g_r)` (blockwise in matrix mode), so a
/// constant `g` gives exactly zero and scaling `g` scales the result exactly.
pub fn commutator_matrix(l: &DtNOperator<'_>, g: &MultiplierField) -> Result<DMatrix<f64>> {
    l.check_multiplier(g)?;
    let n = l.dim();
    let m = l.m;
    let lam = &l.matrix;
    let mut c = DMatrix::zeros(n, n);
    match g {
        MultiplierField::Scalar(gv) => {
            for col in 0..n {
                let gc = gv[col / m];
                for row in 0..n {
                    c[(row, col)] = lam[(row, col)] * (gc - gv[row / m]);
                }
            }
        }
        MultiplierField::Matrix { .. } => {
            for row in 0..n {
                let (r, al) = (row / m, row % m);
                for col in 0..n {
                    let (q, be) = (col / m, col % m);
                    let mut s = 0.0;
                    for ga in 0..m {
                        s += lam[(row, q * m + ga)] * g.entry(q, ga, be) - g.entry(r, al, ga) * lam[(r * m + ga, col)];
                    }
                    c[(row, col)] = s;
                }
            }
        }
    }
    Ok(c)
}

/// `Λ(gf) − gΛf`.
pub fn apply_commutator<'a>(
    l: &DtNOperator<'a>,
    g: &MultiplierField,
    f: &BoundaryTrace<'_>,
) -> Result<BoundaryTrace<'a>> {
    l.check_trace(f)?;
    let c = commutator_matrix(l, g)?;
    let n = l.dim();
    let fv = f.values();
    let out = (0..n).map(|r| (0..n).map(|k| c[(r, k)] * fv[k]).sum()).collect();
    BoundaryTrace::new(l.mesh, l.m, out)
}

fn similarity(op: &DMatrix<f64>, dof_mass: &[f64]) -> DMatrix<f64> {
    let mut b = op.clone();
    for r in 0..b.nrows() {
        for c in 0..b.ncols() {
            b[(r, c)] *= (dof_mass[r] / dof_mass[c]).sqrt();
        }
    }
    b
}

/// `‖Op‖_{L²(∂Ω) → L²(∂Ω)} = σ_max(M^{1/2} Op M^{−1/2})`.
pub fn operator_norm(op: &DMatrix<f64>, dof_mass: &[f64]) -> Result<f64> {
    if op.nrows() != dof_mass.len() || op.ncols() != dof_mass.len() {
        return Err(Error::Dimension { expected: dof_mass.len(), got: op.nrows().max(op.ncols()) });
    }
    if op.amax() == 0.0 {
        return Ok(0.0);
    }
    let b = similarity(op, dof_mass);
    Ok(b.singular_values().iter().copied().fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryNormKind {
    L2,
    H1,
    C01,
    Linf,
}

/// Edgewise arclength difference quotients `|t(Q_{k+1}) − t(Q_k)| / len_k`.
fn edge_quotients(t: &BoundaryTrace<'_>) -> Vec<f64> {
    let mesh = t.mesh();
    let n = mesh.boundary_count();
    let k = t.components();
    mesh.boundary_edge_lengths()
        .iter()
        .enumerate()
        .map(|(e, len)| {
            let (a, b) = (t.node(e), t.node((e + 1) % n));
            (0..k).map(|c| (b[c] - a[c]).powi(2)).sum::<f64>().sqrt() / len
        })
        .collect()
}

fn pointwise(t: &BoundaryTrace<'_>, q: usize) -> f64 {
    t.node(q).iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Tangential part of the norm: the `L²` norm of the arclength derivative for
/// `H1`, the largest difference quotient for `C01`, zero otherwise.
pub fn boundary_seminorm(t: &BoundaryTrace<'_>, kind: BoundaryNormKind) -> f64 {
    let quotients = edge_quotients(t);
    match kind {
        BoundaryNormKind::H1 => {
            let lens = t.mesh().boundary_edge_lengths();
            quotients.iter().zip(lens).map(|(q, l)| q * q * l).sum::<f64>().sqrt()
        }
        BoundaryNormKind::C01 => quotients.iter().copied().fold(0.0, f64::max),
        BoundaryNormKind::L2 | BoundaryNormKind::Linf => 0.0,
    }
}

/// Discrete boundary norms with the trace read as piecewise linear in arclength.
pub fn boundary_norm(t: &BoundaryTrace<'_>, kind: BoundaryNormKind) -> f64 {
    let n = t.mesh().boundary_count();
    let l2 = || {
        let mass = t.mesh().boundary_mass();
        (0..n).map(|q| mass[q] * pointwise(t, q).powi(2)).sum::<f64>().sqrt()
    };
    let linf = || (0..n).map(|q| pointwise(t, q)).fold(0.0, f64::max);
    match kind {
        BoundaryNormKind::L2 => l2(),
        BoundaryNormKind::Linf => linf(),
        BoundaryNormKind::H1 => (l2().powi(2) + boundary_seminorm(t, kind).powi(2)).sqrt(),
        BoundaryNormKind::C01 => linf() + boundary_seminorm(t, kind),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrilinearSides {
    /// `⟨Λ(gf) − gΛf, h⟩_M`.
    pub lhs: f64,
    /// `∫ ∂_i v u^α a_ji^{βα} ∂_j H^β − ∫ ∂_i v a_ij^{αβ} ∂_j u^β H^α`.
    pub rhs: f64,
    pub residual: f64,
}

/// Both sides of the identity expressing `⟨[Λ, g]f, h⟩` through any extension
/// `v` of `g`, with `u` the solution for `f` and `H` the `𝓛*`-solution for `h`.
pub fn trilinear_residual(
    sys: &StiffnessSystem<'_>,
    l: &DtNOperator<'_>,
    f: &BoundaryTrace<'_>,
    g: &MultiplierField,
    hb: &BoundaryTrace<'_>,
    v: &DiscreteField<'_>,
) -> Result<TrilinearSides> {
    let mesh = sys.mesh();
    let m = sys.m();
    let MultiplierField::Scalar(gv) = g else {
        return Err(Error::Dimension { expected: 1, got: m });
    };
    if v.components() != 1 {
        return Err(Error::Dimension { expected: 1, got: v.components() });
    }
    if gv.len() != mesh.boundary_count() {
        return Err(Error::Dimension { expected: mesh.boundary_count(), got: gv.len() });
    }
    for (slot, &node) in mesh.boundary_nodes().iter().enumerate() {
        let defect = (v.values()[node] - gv[slot]).abs();
        if defect > 1e-12 {
            return Err(Error::ExtensionMismatch { node, defect });
        }
    }
    l.check_trace(hb)?;

    let comm = apply_commutator(l, g, f)?;
    let lhs = l.inner(comm.values(), hb.values());

    let u = solve_dirichlet(sys, f)?;
    let adjoint = sys.adjoint()?;
    let hf = solve_dirichlet(&adjoint, hb)?;
    let mut rhs = 0.0;
    for (t, a) in sys.tensors().iter().enumerate() {
        let dv = v.cell_gradient(t);
        let du = u.cell_gradient(t);
        let dh = hf.cell_gradient(t);
        let uc = u.centroid_value(t);
        let hc = hf.centroid_value(t);
        let mut s = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                for al in 0..m {
                    for be in 0..m {
                        s += dv[i] * uc[al] * a.get(j, i, be, al) * dh[2 * be + j];
                        s -= dv[i] * a.get(i, j, al, be) * du[2 * be + j] * hc[al];
                    }
                }
            }
        }
        rhs += mesh.area(t) * s;
    }
    Ok(TrilinearSides { lhs, rhs, residual: (lhs - rhs).abs() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::assemble;
    use crate::geometry::{triangulate, DomainPreset, PolygonalDomain};

    #[test]
    fn unit_square_l2_norm_of_one() {
        let d = PolygonalDomain::build(DomainPreset::Square { side: 1.0 }).unwrap();
        let mesh = triangulate(&d, 0.1).unwrap();
        let one = BoundaryTrace::constant(&mesh, 1, 1.0);
        assert!((boundary_norm(&one, BoundaryNormKind::L2) - 2.0).abs() < 1e-12);
        assert_eq!(boundary_seminorm(&one, BoundaryNormKind::H1), 0.0);
    }

    #[test]
    fn identity_operator_has_unit_norm() {
        let mass = [0.1, 0.5, 2.0];
        assert!((operator_norm(&DMatrix::identity(3, 3), &mass).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(operator_norm(&DMatrix::zeros(3, 3), &mass).unwrap(), 0.0);
    }

    #[test]
    fn square_laplacian_invariants() {
        let d = PolygonalDomain::build(DomainPreset::Square { side: 1.0 }).unwrap();
        let mesh = triangulate(&d, 0.125).unwrap();
        let sys = assemble(&mesh, &CoefficientField::identity(1).unwrap()).unwrap();
        let l = steklov_poincare(&sys).unwrap();
        let inv = l.invariants();
        assert!(inv.mass_symmetry < 1e-12);
        assert!(inv.min_form > -1e-10);
        assert!(inv.constant_kernel.unwrap() < 1e-12);
    }
}
