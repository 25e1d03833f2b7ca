use dtn_core::coefficients::CoefficientPreset;
use dtn_core::fem::{assemble, solve_dirichlet};
use dtn_core::geometry::TriMesh;

use super::{replicated, Context, LevelData, Table};
use crate::error::Result;
use crate::report::CriterionOutcome;

/// Slack on the non-obtuse test for the mesh.
const ANGLE_TOL_DEG: f64 = 1e-9;

/// Largest interior angle over all triangles, in degrees.
pub fn max_angle_deg(mesh: &TriMesh) -> f64 {
    let mut worst: f64 = 0.0;
    for tri in mesh.triangles() {
        let p = tri.map(|i| mesh.node(i));
        for c in 0..3 {
            let (a, b) = (p[(c + 1) % 3] - p[c], p[(c + 2) % 3] - p[c]);
            let cos = (a.dot(&b) / (a.norm() * b.norm())).clamp(-1.0, 1.0);
            worst = worst.max(cos.acos().to_degrees());
        }
    }
    worst
}

pub fn level(ctx: &Context<'_>, k: usize) -> Result<LevelData> {
    let mesh = &ctx.levels.meshes[k];
    let a = &ctx.levels.coefficients;
    let f = replicated(ctx.require(&ctx.scenario.f, "f")?, mesh, a.m());
    let u = solve_dirichlet(&assemble(mesh, a)?, &f)?;
    let lo = f.values().iter().copied().fold(f64::INFINITY, f64::min);
    let hi = f.values().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let violation = u.values().iter().fold(0.0f64, |v, &x| v.max(lo - x).max(x - hi));
    let mut out = LevelData::default();
    out.put("violation", violation);
    out.put("overshoot_ratio", if hi > lo { violation / (hi - lo) } else { violation });
    out.put("max_angle_deg", max_angle_deg(mesh));
    Ok(out)
}

pub fn criteria(ctx: &Context<'_>, t: &Table<'_>) -> Vec<CriterionOutcome> {
    let a = &ctx.levels.coefficients;
    let applies = a.m() == 1
        && matches!(a.preset(), CoefficientPreset::Identity)
        && t.max("max_angle_deg") <= 90.0 + ANGLE_TOL_DEG;
    if !applies {
        return Vec::new();
    }
    vec![CriterionOutcome::at_most(
        "max_principle",
        t.max("violation"),
        ctx.thresholds.max_principle_slack,
        "max over nodes of (min f − u, u − max f)",
    )]
}
