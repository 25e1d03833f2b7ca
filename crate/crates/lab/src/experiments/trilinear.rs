use dtn_core::dtn::{boundary_norm, steklov_poincare, trilinear_residual, BoundaryNormKind};
use dtn_core::extensions::{harmonic_extension, lipschitz_extension, ChartCover};
use dtn_core::fem::{assemble, DiscreteField};

use super::{multiplier, replicated, Context, LevelData, Table};
use crate::config::ExtensionKind;
use crate::error::Result;
use crate::io::write_sparse;
use crate::report::CriterionOutcome;

pub fn level(ctx: &Context<'_>, k: usize) -> Result<LevelData> {
    let sc = ctx.scenario;
    let mesh = &ctx.levels.meshes[k];
    let a = &ctx.levels.coefficients;
    let (f_spec, g_spec) = (ctx.require(&sc.f, "f")?, ctx.require(&sc.g, "g")?);
    let h_spec = sc.hb.as_ref().unwrap_or(f_spec);
    let sys = assemble(mesh, a)?;
    let l = steklov_poincare(&sys)?;
    let f = replicated(f_spec, mesh, a.m());
    let hb = replicated(h_spec, mesh, a.m());
    let (g_trace, g) = multiplier(g_spec, mesh);

    let v = match sc.extension {
        ExtensionKind::Harmonic => harmonic_extension(&g_trace)?,
        ExtensionKind::Lipschitz => lipschitz_extension(&g_trace, &ChartCover::new(mesh)?)?.v,
        ExtensionKind::Interpolant => {
            if g_spec.at(mesh.node(0)).is_none() {
                return Err(ctx.unsupported("interpolant extension needs a g defined inside the domain"));
            }
            DiscreteField::scalar_from_fn(mesh, |p| g_spec.at(p).unwrap())
        }
    };
    let sides = trilinear_residual(&sys, &l, &f, &g, &hb, &v)?;
    let scale = boundary_norm(&f, BoundaryNormKind::L2)
        * boundary_norm(&g_trace, BoundaryNormKind::C01)
        * boundary_norm(&hb, BoundaryNormKind::L2);
    let mut out = LevelData::default();
    out.put("lhs", sides.lhs);
    out.put("rhs", sides.rhs);
    out.put("residual", sides.residual);
    out.put("data_scale", scale);
    out.put("relative_residual", sides.residual / (sides.lhs.abs() + sides.rhs.abs() + scale));
    if let Some(p) = ctx.dump_path(k, "stiffness") {
        write_sparse(&p, sys.matrix())?;
    }
    Ok(out)
}

pub fn criteria(ctx: &Context<'_>, t: &Table<'_>) -> Vec<CriterionOutcome> {
    let sc = ctx.scenario;
    let th = ctx.thresholds;
    let affine = [&sc.f, &sc.g, &sc.hb].iter().all(|s| s.as_ref().is_none_or(|s| s.is_affine()));
    let mut out = vec![CriterionOutcome::at_most(
        "trilinear_exact",
        t.max("relative_residual"),
        th.trilinear_exact,
        "residual / (|lhs| + |rhs| + data scale)",
    )];
    if t.levels.len() >= 2 {
        out.push(CriterionOutcome::at_least(
            "trilinear_contraction",
            t.min_contraction("residual"),
            th.trilinear_contraction,
            format!("residuals {:?}", t.series("residual")),
        ));
    }
    // Exactness is the claim for affine data, contraction the claim otherwise.
    if sc.criteria.is_none() {
        out.retain(|c| (c.name == "trilinear_exact") == affine);
    }
    out
}
