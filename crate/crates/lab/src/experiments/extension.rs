use dtn_core::dtn::{boundary_norm, BoundaryNormKind};
use dtn_core::extensions::{harmonic_extension, hessian_measure, lipschitz_extension, matrix_extension, ChartCover};
use dtn_core::fem::CellField;
use dtn_core::functionals::{nt_max_cells, ConeIndex};

use super::{Context, LevelData, Table};
use crate::error::Result;
use crate::report::{drift, CriterionOutcome};

pub fn level(ctx: &Context<'_>, k: usize) -> Result<LevelData> {
    let sc = ctx.scenario;
    let mesh = &ctx.levels.meshes[k];
    let a = &ctx.levels.coefficients;
    let g = ctx.require(&sc.g, "g")?.trace(mesh);
    let mut out = LevelData::default();

    let c01 = boundary_norm(&g, BoundaryNormKind::C01);
    let lip = lipschitz_extension(&g, &ChartCover::new(mesh)?)?;
    out.put("grad_sup", lip.grad_sup);
    out.put("hessian_carleson", lip.hessian_carleson);
    out.put("boundary_defect", lip.boundary_defect);
    out.put("grad_ratio", lip.grad_sup / c01);
    out.put("hessian_ratio", lip.hessian_carleson / (c01 * c01));

    let hv = harmonic_extension(&g)?;
    let cones = ConeIndex::new(mesh, ctx.levels.cone);
    let nt = nt_max_cells(&CellField::gradient_of(&hv), mesh, &cones)?;
    let nt_l2 = boundary_norm(&nt, BoundaryNormKind::L2);
    let square = hessian_measure(&hv)?.total_mass();
    let h1 = boundary_norm(&g, BoundaryNormKind::H1);
    out.put("harmonic_nt_l2", nt_l2);
    out.put("harmonic_square", square);
    out.put("harmonic_ratio", (nt_l2 * nt_l2 + square) / (h1 * h1));

    let b = matrix_extension(a, mesh)?;
    out.put("grad_bound_profile", b.grad_bound_profile);
    out.put("deviation_profile", b.deviation_profile);
    out.put("mu_emp", b.mu_emp);
    out.put("upper_emp", b.upper_emp);
    out.put("mu_declared", a.mu());
    Ok(out)
}

fn stable(t: &Table<'_>, q: &str, tol: f64) -> CriterionOutcome {
    let s = t.series(q);
    let d = if s.iter().all(|v| v.is_finite()) { drift(&s) } else { f64::INFINITY };
    CriterionOutcome::at_most(q, d, tol, format!("{s:?}"))
}

pub fn criteria(ctx: &Context<'_>, t: &Table<'_>) -> Vec<CriterionOutcome> {
    let th = ctx.thresholds;
    let mu = ctx.levels.coefficients.mu();
    vec![
        CriterionOutcome::all(
            "lipschitz_extension",
            vec![
                stable(t, "grad_ratio", th.lipschitz_extension_drift),
                stable(t, "hessian_ratio", th.lipschitz_extension_drift),
                CriterionOutcome::at_most("boundary_defect", t.max("boundary_defect"), 0.0, ""),
            ],
        ),
        CriterionOutcome::all(
            "matrix_extension",
            vec![
                stable(t, "deviation_profile", th.matrix_extension_drift),
                stable(t, "grad_bound_profile", th.matrix_extension_drift),
                CriterionOutcome::at_least("mu_emp", t.min("mu_emp"), (1.0 - th.mu_tolerance) * mu, ""),
            ],
        ),
    ]
}
