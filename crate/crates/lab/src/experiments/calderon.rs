use dtn_core::dtn::{apply_commutator, boundary_norm, steklov_poincare, BoundaryNormKind};
use dtn_core::fem::{assemble, BoundaryTrace};

use super::{multiplier, Context, LevelData};
use crate::error::Result;
use crate::random::SmoothField;

const DEFAULT_SAMPLES: usize = 10;
const EXPONENTS: [u32; 3] = [2, 4, 8];

/// `(Σ_Q w_Q |t(Q)|^p)^{1/p}` with the lumped boundary mass.
pub fn lp_norm(t: &BoundaryTrace<'_>, p: u32) -> f64 {
    let mass = t.mesh().boundary_mass();
    (0..t.mesh().boundary_count())
        .map(|q| mass[q] * t.node(q).iter().map(|v| v * v).sum::<f64>().sqrt().powi(p as i32))
        .sum::<f64>()
        .powf(1.0 / p as f64)
}

pub fn level(ctx: &Context<'_>, k: usize) -> Result<LevelData> {
    let sc = ctx.scenario;
    let mesh = &ctx.levels.meshes[k];
    let a = &ctx.levels.coefficients;
    if a.m() != 1 {
        return Err(ctx.unsupported("calderon-smooth needs m = 1"));
    }
    let l = steklov_poincare(&assemble(mesh, a)?)?;
    let (g_trace, g) = multiplier(ctx.require(&sc.g, "g")?, mesh);
    let c01 = boundary_norm(&g_trace, BoundaryNormKind::C01);
    let diam = ctx.levels.domain.diameter();

    let mut worst = [0.0f64; EXPONENTS.len()];
    for s in 0..ctx.samples(DEFAULT_SAMPLES) {
        let field = SmoothField::new(sc.seed(), s as u64, 1, diam);
        let f = BoundaryTrace::scalar_from_fn(mesh, |p| field.eval_scalar(p));
        let cf = apply_commutator(&l, &g, &f)?;
        for (w, &p) in worst.iter_mut().zip(&EXPONENTS) {
            *w = w.max(lp_norm(&cf, p) / (c01 * lp_norm(&f, p)));
        }
    }
    let mut out = LevelData::default();
    for (w, p) in worst.iter().zip(EXPONENTS) {
        out.put(format!("calderon_p{p}"), *w);
    }
    Ok(out)
}
