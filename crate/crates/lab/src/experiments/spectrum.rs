use dtn_core::coefficients::CoefficientPreset;
use dtn_core::dtn::{commutator_matrix, steklov_poincare};
use dtn_core::fem::assemble;

use super::{multiplier, Context, LevelData, Table};
use crate::config::TraceSpec;
use crate::error::Result;
use crate::io::{write_dense, write_mesh, write_sparse};
use crate::report::CriterionOutcome;

const DEFAULT_EIGS: usize = 9;

/// `0, 1, 1, 2, 2, …`: the Steklov eigenvalues of the unit disk.
pub fn disk_eigenvalues(n: usize) -> Vec<f64> {
    (0..n).map(|i| i.div_ceil(2) as f64).collect()
}

fn oracle_applies(ctx: &Context<'_>) -> bool {
    ctx.scenario.domain.is_unit_disk()
        && ctx.levels.coefficients.m() == 1
        && matches!(ctx.levels.coefficients.preset(), CoefficientPreset::Identity)
}

pub fn level(ctx: &Context<'_>, k: usize) -> Result<LevelData> {
    let mesh = &ctx.levels.meshes[k];
    let sys = assemble(mesh, &ctx.levels.coefficients)?;
    let l = steklov_poincare(&sys)?;
    let mut out = LevelData::default();

    let spectrum = l.spectrum();
    let n = ctx.scenario.eigs.unwrap_or(DEFAULT_EIGS).min(spectrum.len());
    for (i, ev) in spectrum.iter().take(n).enumerate() {
        out.put(format!("eig_{i}"), *ev);
    }
    let inv = l.invariants();
    out.put("mass_symmetry", inv.mass_symmetry);
    out.put("min_form", inv.min_form);
    if let Some(c) = inv.constant_kernel {
        out.put("constant_kernel", c);
    }

    let default_g = TraceSpec::Linear { c0: 0.0, cx: 1.0, cy: 0.5 };
    let (_, g) = multiplier(ctx.scenario.g.as_ref().unwrap_or(&default_g), mesh);
    let c = commutator_matrix(&l, &g)?;
    if l.is_symmetric() {
        let mut mc = c.clone();
        for (r, w) in l.dof_mass().iter().enumerate() {
            mc.row_mut(r).scale_mut(*w);
        }
        let skew = (&mc + mc.transpose()).amax() / mc.amax().max(f64::MIN_POSITIVE);
        out.put("commutator_skew", skew);
    }

    if oracle_applies(ctx) {
        let exact = disk_eigenvalues(n);
        out.put("oracle_zero_abs", spectrum[0].abs());
        let rel = (1..n).map(|i| (spectrum[i] - exact[i]).abs() / exact[i]).fold(0.0, f64::max);
        out.put("oracle_rel_err", rel);
    }

    if let Some(p) = ctx.dump_path(k, "stiffness") {
        write_sparse(&p, sys.matrix())?;
        write_dense(&ctx.dump_path(k, "dtn").unwrap(), l.matrix())?;
        write_dense(&ctx.dump_path(k, "commutator").unwrap(), &c)?;
        write_mesh(&ctx.dump_path(k, "mesh").unwrap(), mesh)?;
    }
    Ok(out)
}

pub fn criteria(ctx: &Context<'_>, t: &Table<'_>) -> Vec<CriterionOutcome> {
    let th = ctx.thresholds;
    let mut out = Vec::new();
    if t.has("oracle_rel_err") {
        out.push(CriterionOutcome::all(
            "spectrum_oracle",
            vec![
                CriterionOutcome::at_most("max_rel_err", t.max("oracle_rel_err"), th.spectrum_rel, ""),
                CriterionOutcome::at_most("zero_mode", t.max("oracle_zero_abs"), th.spectrum_zero, ""),
            ],
        ));
    }
    if ctx.levels.coefficients.is_symmetric() {
        let mut parts = vec![
            CriterionOutcome::at_most("mass_symmetry", t.max("mass_symmetry"), th.mass_symmetry, ""),
            CriterionOutcome::at_least("min_form", t.min("min_form"), -th.min_form, ""),
            CriterionOutcome::at_most("commutator_skew", t.max("commutator_skew"), th.skew_adjointness, ""),
        ];
        if t.has("constant_kernel") {
            parts.push(CriterionOutcome::at_most("constant_kernel", t.max("constant_kernel"), th.constant_kernel, ""));
        }
        out.push(CriterionOutcome::all("structure", parts));
    }
    out
}
