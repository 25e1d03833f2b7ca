use dtn_core::coefficients::CoefficientPreset;
use dtn_core::dtn::{boundary_norm, commutator_matrix, operator_norm, steklov_poincare, BoundaryNormKind};
use dtn_core::fem::{assemble, solve_dirichlet, BoundaryTrace};
use dtn_core::oracle::{disk_commutator_fourier, FourierTrace};

use super::{multiplier, Context, LevelData, Table};
use crate::config::TraceSpec;
use crate::error::Result;
use crate::io::write_dense;
use crate::report::{drift, CriterionOutcome};

/// Highest mode compared against the Fourier oracle.
pub const ORACLE_MAX_MODE: usize = 8;

pub fn level(ctx: &Context<'_>, k: usize) -> Result<LevelData> {
    let sc = ctx.scenario;
    let mesh = &ctx.levels.meshes[k];
    let a = &ctx.levels.coefficients;
    let g_spec = ctx.require(&sc.g, "g")?;
    let sys = assemble(mesh, a)?;
    let l = steklov_poincare(&sys)?;
    let (g_trace, g) = multiplier(g_spec, mesh);
    let c = commutator_matrix(&l, &g)?;
    let mut out = LevelData::default();
    out.put("commutator_norm", operator_norm(&c, l.dof_mass())?);
    out.put("dtn_norm", operator_norm(l.matrix(), l.dof_mass())?);

    let modes = sc.modes.as_deref().unwrap_or(&[]);
    if !modes.is_empty() {
        if a.m() != 1 {
            return Err(ctx.unsupported("mode sweeps need m = 1"));
        }
        let g_h1 = boundary_norm(&g_trace, BoundaryNormKind::H1);
        let center = ctx.levels.center();
        let oracle_g = (sc.domain.is_unit_disk() && matches!(a.preset(), CoefficientPreset::Identity))
            .then(|| g_spec.fourier())
            .flatten();
        let mut constant: f64 = 0.0;
        let mut oracle_err: Option<f64> = None;
        for &kk in modes {
            let f = TraceSpec::Angular { k: kk, phase: 0.0, center }.trace(mesh);
            let u = solve_dirichlet(&sys, &f)?;
            let cf: Vec<f64> =
                (0..c.nrows()).map(|r| c.row(r).iter().zip(f.values()).map(|(x, y)| x * y).sum()).collect();
            let cf = BoundaryTrace::new(mesh, 1, cf)?;
            let ratio = boundary_norm(&cf, BoundaryNormKind::L2) / (u.max_magnitude() * g_h1);
            out.put(format!("mode_ratio_{kk}"), ratio);
            constant = constant.max(ratio);
            if let Some(gf) = oracle_g.as_ref().filter(|_| kk <= ORACLE_MAX_MODE) {
                let exact = disk_commutator_fourier(gf, &FourierTrace::cos_mode(kk, 1.0)?)?.sample(mesh);
                let diff = cf.values().iter().zip(exact.values()).map(|(x, y)| x - y).collect();
                let err = boundary_norm(&cf.with_values(diff)?, BoundaryNormKind::L2)
                    / boundary_norm(&exact, BoundaryNormKind::L2);
                out.put(format!("oracle_rel_err_{kk}"), err);
                oracle_err = Some(oracle_err.unwrap_or(0.0).max(err));
            }
        }
        out.put("mode_constant", constant);
        if let Some(e) = oracle_err {
            out.put("oracle_rel_err", e);
        }
    }

    if let Some(p) = ctx.dump_path(k, "dtn") {
        write_dense(&p, l.matrix())?;
        write_dense(&ctx.dump_path(k, "commutator").unwrap(), &c)?;
    }
    Ok(out)
}

pub fn criteria(ctx: &Context<'_>, t: &Table<'_>) -> Vec<CriterionOutcome> {
    let th = ctx.thresholds;
    let mut out = Vec::new();
    if t.levels.len() >= 2 {
        out.push(CriterionOutcome::all(
            "commutator_stability",
            vec![
                CriterionOutcome::at_most(
                    "commutator_drift",
                    drift(&t.series("commutator_norm")),
                    th.commutator_drift,
                    "",
                ),
                CriterionOutcome::at_least("dtn_growth", t.min_growth("dtn_norm"), th.dtn_growth, ""),
            ],
        ));
        if t.has("mode_constant") {
            out.push(CriterionOutcome::at_most(
                "mode_constant",
                drift(&t.series("mode_constant")),
                th.mode_constant_drift,
                format!("constants {:?}", t.series("mode_constant")),
            ));
        }
    }
    if t.has("oracle_rel_err") {
        out.push(CriterionOutcome::at_most("oracle", t.max("oracle_rel_err"), th.oracle_rel, ""));
    }
    out
}
