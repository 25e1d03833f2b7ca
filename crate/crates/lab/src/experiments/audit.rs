use dtn_core::coefficients::grad_measure;
use dtn_core::extensions::{harmonic_extension, hessian_measure};
use dtn_core::fem::DiscreteField;
use dtn_core::functionals::{carleson_embedding_check, CellMeasure, ConeIndex};
use dtn_core::geometry::{sawtooth, GraphMap, PiecewiseLinear};

use super::{Context, LevelData, Table};
use crate::config::{DomainSpec, TraceSpec};
use crate::error::Result;
use crate::random::SmoothField;
use crate::report::{drift, CriterionOutcome};

const DEFAULT_SAMPLES: usize = 10;
const MEASURES: [&str; 3] = ["grad", "hessian", "lebesgue"];
/// Map evaluation window and strip height.
const PSI_RANGE: (f64, f64) = (-1.0, 2.0);
const STRIP_HEIGHT: f64 = 0.5;
/// Slack on `∂F/∂s ≥ 1` and on the singular value bracket.
const SAMPLE_TOL: f64 = 1e-12;

fn kenig_stein(slope: f64, teeth: usize, h: f64, out: &mut LevelData) -> Result<()> {
    let half = 0.5 / teeth as f64;
    let n = ((PSI_RANGE.1 - PSI_RANGE.0) / half).round() as usize;
    let xs: Vec<f64> = (0..=n).map(|j| PSI_RANGE.0 + j as f64 * half).collect();
    let ys = xs.iter().map(|&x| sawtooth(x, slope, teeth)).collect();
    let map = GraphMap::new(PiecewiseLinear::from_knots(xs, ys)?);
    let (nx, ns) = ((1.0 / h).ceil() as usize, (STRIP_HEIGHT / h).ceil() as usize);
    let (dx, ds) = (1.0 / nx as f64, STRIP_HEIGHT / ns as f64);

    let (mut min_dfds, mut sv_min, mut sv_max) = (f64::INFINITY, f64::INFINITY, 0.0f64);
    for j in 0..ns {
        for i in 0..nx {
            let e = map.eval((i as f64 + 0.5) * dx, (j as f64 + 0.5) * ds)?;
            let (lo, hi) = e.singular_values();
            min_dfds = min_dfds.min(e.df_ds());
            sv_min = sv_min.min(lo);
            sv_max = sv_max.max(hi);
        }
    }
    let (c_minus, c_plus) = map.singular_value_bounds();
    out.put("ks_carleson", map.hessian_strip_measure(0.0, 1.0, STRIP_HEIGHT, nx, ns)?.carleson_norm());
    out.put("ks_min_dfds", min_dfds);
    out.put("ks_sv_min", sv_min);
    out.put("ks_sv_max", sv_max);
    out.put("ks_c_minus", c_minus);
    out.put("ks_c_plus", c_plus);
    Ok(())
}

pub fn level(ctx: &Context<'_>, k: usize) -> Result<LevelData> {
    let sc = ctx.scenario;
    let mesh = &ctx.levels.meshes[k];
    let cones = ConeIndex::new(mesh, ctx.levels.cone);
    let default_g = TraceSpec::Polar { k: 3, phase: 0.0, amp: 1.0, center: ctx.levels.center() };
    let g = sc.g.as_ref().unwrap_or(&default_g).trace(mesh);
    let v = harmonic_extension(&g)?;
    let measures: [CellMeasure<'_>; 3] =
        [grad_measure(&ctx.levels.coefficients, mesh), hessian_measure(&v)?, CellMeasure::lebesgue(mesh)];
    let diam = ctx.levels.domain.diameter();
    let ws: Vec<DiscreteField<'_>> = (0..ctx.samples(DEFAULT_SAMPLES))
        .map(|s| {
            let field = SmoothField::new(sc.seed(), s as u64, 1, diam);
            DiscreteField::scalar_from_fn(mesh, |p| field.eval_scalar(p))
        })
        .collect();

    let mut out = LevelData::default();
    for (name, nu) in MEASURES.iter().zip(&measures) {
        let mut c_emp: f64 = 0.0;
        let mut defects = 0;
        for w in &ws {
            let e = carleson_embedding_check(w, nu, &cones);
            c_emp = c_emp.max(e.c_emp);
            defects += e.coverage_defect as usize;
        }
        out.put(format!("embedding_{name}"), c_emp);
        out.put(format!("carleson_{name}"), nu.carleson_norm());
        out.put(format!("coverage_defect_{name}"), defects as f64);
    }
    if let DomainSpec::Sawtooth { slope, teeth } = sc.domain {
        kenig_stein(slope, teeth, sc.levels[k], &mut out)?;
    }
    Ok(out)
}

pub fn criteria(ctx: &Context<'_>, t: &Table<'_>) -> Vec<CriterionOutcome> {
    let th = ctx.thresholds;
    let mut parts = Vec::new();
    for name in MEASURES {
        let s = t.series(&format!("embedding_{name}"));
        let d = if s.iter().all(|v| v.is_finite()) { drift(&s) } else { f64::INFINITY };
        parts.push(CriterionOutcome::at_most(format!("embedding_{name}"), d, th.embedding_drift, format!("{s:?}")));
        parts.push(CriterionOutcome::at_most(
            format!("coverage_defect_{name}"),
            t.max(&format!("coverage_defect_{name}")),
            0.0,
            "",
        ));
    }
    let mut out = vec![CriterionOutcome::all("carleson_embedding", parts)];
    if t.has("ks_carleson") {
        let s = t.series("ks_carleson");
        let d = if s.iter().all(|v| v.is_finite()) { drift(&s) } else { f64::INFINITY };
        out.push(CriterionOutcome::all(
            "kenig_stein",
            vec![
                CriterionOutcome::at_least("min_dfds", t.min("ks_min_dfds"), 1.0 - SAMPLE_TOL, ""),
                CriterionOutcome::at_least("c_minus", t.min("ks_c_minus"), f64::MIN_POSITIVE, ""),
                CriterionOutcome::at_least("sv_lower", t.min("ks_sv_min") - t.min("ks_c_minus"), -SAMPLE_TOL, ""),
                CriterionOutcome::at_most("sv_upper", t.max("ks_sv_max") - t.max("ks_c_plus"), SAMPLE_TOL, ""),
                CriterionOutcome::at_most("carleson_drift", d, th.kenig_stein_drift, format!("{s:?}")),
            ],
        ));
    }
    out
}
