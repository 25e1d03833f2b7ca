use dtn_core::fem::{assemble, solve_dirichlet, DiscreteField};
use dtn_core::functionals::{bilinear_sides, BilinearVariant, ConeIndex};

use super::{replicated, Context, LevelData, Table};
use crate::config::TraceSpec;
use crate::error::Result;
use crate::random::SmoothField;
use crate::report::{drift, CriterionOutcome};

const DEFAULT_SAMPLES: usize = 20;

/// Traces of four harmonic functions about `center`, used when `f` is absent.
fn harmonic_presets(center: [f64; 2]) -> Vec<TraceSpec> {
    vec![
        TraceSpec::Linear { c0: 0.5, cx: 1.0, cy: -0.5 },
        TraceSpec::Polar { k: 2, phase: 0.0, amp: 1.0, center },
        TraceSpec::Polar { k: 3, phase: 0.7, amp: 1.0, center },
        TraceSpec::ExpHarmonic { k: 1.0 },
    ]
}

pub fn level(ctx: &Context<'_>, k: usize) -> Result<LevelData> {
    let sc = ctx.scenario;
    let mesh = &ctx.levels.meshes[k];
    let a = &ctx.levels.coefficients;
    let m = a.m();
    let sys = assemble(mesh, a)?;
    let cones = ConeIndex::new(mesh, ctx.levels.cone);
    let diam = ctx.levels.domain.diameter();
    let us = match &sc.f {
        Some(f) => vec![f.clone()],
        None => harmonic_presets(ctx.levels.center()),
    };
    let vs: Vec<DiscreteField<'_>> = (0..ctx.samples(DEFAULT_SAMPLES))
        .map(|s| {
            let field = SmoothField::new(sc.seed(), s as u64, 2 * m, diam);
            DiscreteField::from_fn(mesh, 2 * m, |p| field.eval(p))
        })
        .collect();

    let mut out = LevelData::default();
    let mut worst_residual: f64 = 0.0;
    for (variant, name) in
        [(BilinearVariant::SquareWeight, "square_weight"), (BilinearVariant::BoundaryL2, "boundary_l2")]
    {
        let mut c_emp: f64 = 0.0;
        for spec in &us {
            let u = solve_dirichlet(&sys, &replicated(spec, mesh, m))?;
            for v in &vs {
                let s = bilinear_sides(&sys, &u, v, &cones, variant)?;
                worst_residual = worst_residual.max(s.harmonic_residual);
                if !s.is_harmonic() {
                    out.warnings
                        .push(format!("u from {spec:?} failed the harmonic check ({:.2e})", s.harmonic_residual));
                }
                let ratio = if s.rhs > 0.0 {
                    s.lhs / s.rhs
                } else if s.lhs > 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                };
                c_emp = c_emp.max(ratio);
            }
        }
        out.put(format!("c_emp_{name}"), c_emp);
    }
    out.put("harmonic_residual", worst_residual);
    if !cones.degenerate().is_empty() {
        out.warnings.push(format!("{} boundary nodes have empty cones", cones.degenerate().len()));
    }
    Ok(out)
}

pub fn criteria(ctx: &Context<'_>, t: &Table<'_>) -> Vec<CriterionOutcome> {
    let th = ctx.thresholds;
    let parts = ["c_emp_square_weight", "c_emp_boundary_l2"]
        .into_iter()
        .map(|q| {
            let s = t.series(q);
            let d = if s.iter().all(|v| v.is_finite()) { drift(&s) } else { f64::INFINITY };
            CriterionOutcome::at_most(q, d, th.bilinear_drift, format!("{s:?}"))
        })
        .collect();
    vec![CriterionOutcome::all("bilinear", parts)]
}
