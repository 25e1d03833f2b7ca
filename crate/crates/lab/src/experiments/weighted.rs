use dtn_core::fem::{assemble, solve_div_source, weighted_cell_norm, weighted_grad_norm, CellField};

use super::{Context, LevelData, Table};
use crate::error::Result;
use crate::random::SmoothField;
use crate::report::{drift, CriterionOutcome};

const DEFAULT_SAMPLES: usize = 10;
const ALPHAS: [(f64, &str); 3] = [(0.25, "0.25"), (0.5, "0.5"), (0.75, "0.75")];
/// Round-off allowance on the energy bound.
const ENERGY_SLACK: f64 = 1e-10;

pub fn level(ctx: &Context<'_>, k: usize) -> Result<LevelData> {
    let sc = ctx.scenario;
    let mesh = &ctx.levels.meshes[k];
    let a = &ctx.levels.coefficients;
    let m = a.m();
    let sys = assemble(mesh, a)?;
    let diam = ctx.levels.domain.diameter();

    let (mut weighted, mut energy) = (0.0f64, 0.0f64);
    let mut alpha = [0.0f64; ALPHAS.len()];
    for s in 0..ctx.samples(DEFAULT_SAMPLES) {
        let field = SmoothField::new(sc.seed(), s as u64, 2 * m, diam);
        let f = CellField::from_fn(mesh, 2 * m, |p| field.eval(p));
        let u = solve_div_source(&sys, &f)?;
        weighted = weighted.max(weighted_grad_norm(&u, 1.0, false) / weighted_cell_norm(mesh, &f, 1.0, true));
        energy = energy
            .max(a.mu() * weighted_grad_norm(&u, 0.0, false).sqrt() / weighted_cell_norm(mesh, &f, 0.0, false).sqrt());
        for (slot, &(al, _)) in alpha.iter_mut().zip(&ALPHAS) {
            *slot = slot.max(weighted_grad_norm(&u, al, false) / weighted_cell_norm(mesh, &f, al, false));
        }
    }
    let mut out = LevelData::default();
    out.put("weighted_gradient_ratio", weighted);
    out.put("energy_ratio", energy);
    for (v, (_, name)) in alpha.iter().zip(ALPHAS) {
        out.put(format!("alpha_ratio_{name}"), *v);
    }
    Ok(out)
}

pub fn criteria(ctx: &Context<'_>, t: &Table<'_>) -> Vec<CriterionOutcome> {
    let th = ctx.thresholds;
    let s = t.series("weighted_gradient_ratio");
    let d = if s.iter().all(|v| v.is_finite()) { drift(&s) } else { f64::INFINITY };
    vec![
        CriterionOutcome::at_most("weighted_gradient", d, th.weighted_drift, format!("ratios {s:?}")),
        CriterionOutcome::at_most("energy", t.max("energy_ratio"), 1.0 + ENERGY_SLACK, "μ‖∇u‖ / ‖f‖"),
    ]
}
