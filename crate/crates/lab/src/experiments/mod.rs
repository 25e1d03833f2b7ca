//! One module per subcommand. Each computes a [`LevelData`] per mesh level
//! and then evaluates its criteria on the assembled [`Table`].

mod audit;
mod bilinear;
mod calderon;
mod commutator;
mod extension;
mod maxprinciple;
mod spectrum;
mod trilinear;
mod weighted;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::ValueEnum;
use dtn_core::coefficients::{CoefficientField, MultiplierField};
use dtn_core::fem::BoundaryTrace;
use dtn_core::geometry::{triangulate, ConeParams, PolygonalDomain, TriMesh};
use dtn_core::Point;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Scenario, Thresholds, TraceSpec};
use crate::error::{LabError, Result};
use crate::io::Record;
use crate::report::{CriterionOutcome, ScenarioReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    /// Lowest eigenvalues of Λ, structural invariants, disk oracle.
    Spectrum,
    /// Refinement behavior of ‖[Λ, g]‖ and ‖Λ‖, mode ratios, disk oracle.
    CommutatorSweep,
    /// Both sides of the bilinear estimate over random fields.
    Bilinear,
    /// Residual of the trilinear identity for `⟨[Λ, g]f, h⟩`.
    TrilinearCheck,
    /// Lipschitz, harmonic and harmonic matrix extensions.
    ExtensionAudit,
    /// Weighted estimates for `𝓛u = div f` with zero boundary data.
    WeightedSolve,
    /// Discrete maximum principle.
    #[value(name = "maxprinciple")]
    #[serde(rename = "maxprinciple")]
    MaxPrinciple,
    /// L^p ratios of the commutator for smooth data.
    CalderonSmooth,
    /// Carleson embedding and the Kenig–Stein map.
    Audit,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Spectrum => "spectrum",
            Subcommand::CommutatorSweep => "commutator-sweep",
            Subcommand::Bilinear => "bilinear",
            Subcommand::TrilinearCheck => "trilinear-check",
            Subcommand::ExtensionAudit => "extension-audit",
            Subcommand::WeightedSolve => "weighted-solve",
            Subcommand::MaxPrinciple => "maxprinciple",
            Subcommand::CalderonSmooth => "calderon-smooth",
            Subcommand::Audit => "audit",
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Directory for matrix and mesh dumps.
    pub dump_dir: Option<PathBuf>,
    pub base_dir: PathBuf,
}

/// Inputs shared by every level of one scenario.
pub struct Levels {
    pub domain: PolygonalDomain,
    pub meshes: Vec<TriMesh>,
    pub coefficients: CoefficientField,
    pub cone: ConeParams,
}

impl Levels {
    pub fn build(sc: &Scenario, base_dir: &Path) -> Result<Self> {
        let domain = sc.domain.build()?;
        let coefficients = sc.coefficients.build(&domain, base_dir)?;
        let cone = sc.cone(&domain)?;
        let mut mesh = triangulate(&domain, sc.levels[0])?;
        let mut meshes = Vec::with_capacity(sc.levels.len());
        for r in sc.refinements() {
            let mut next = mesh.refine()?;
            for _ in 1..r {
                next = next.refine()?;
            }
            meshes.push(std::mem::replace(&mut mesh, next));
        }
        meshes.push(mesh);
        Ok(Self { domain, meshes, coefficients, cone })
    }

    pub fn count(&self) -> usize {
        self.meshes.len()
    }

    /// Vertex average, used as the polar origin of angular data.
    pub fn center(&self) -> [f64; 2] {
        let v = self.domain.vertices();
        let n = v.len() as f64;
        [v.iter().map(|p| p.x).sum::<f64>() / n, v.iter().map(|p| p.y).sum::<f64>() / n]
    }
}

pub struct Context<'c> {
    pub scenario: &'c Scenario,
    pub thresholds: &'c Thresholds,
    pub options: &'c RunOptions,
    pub levels: &'c Levels,
}

impl Context<'_> {
    pub fn require<'s>(&self, spec: &'s Option<TraceSpec>, key: &str) -> Result<&'s TraceSpec> {
        spec.as_ref().ok_or_else(|| self.unsupported(format!("`{key}` is required by this subcommand")))
    }

    pub fn unsupported(&self, message: impl Into<String>) -> LabError {
        LabError::Unsupported { id: self.scenario.id.clone(), message: message.into() }
    }

    pub fn samples(&self, default: usize) -> usize {
        self.scenario.samples.unwrap_or(default)
    }

    /// Path for a per-level dump file, when dumps are enabled.
    pub fn dump_path(&self, level: usize, what: &str) -> Option<PathBuf> {
        self.options.dump_dir.as_ref().map(|d| d.join(format!("{}_L{level}_{what}.txt", self.scenario.id)))
    }
}

/// Scalar multiplier from a trace spec.
pub fn multiplier<'a>(spec: &TraceSpec, mesh: &'a TriMesh) -> (BoundaryTrace<'a>, MultiplierField) {
    let t = spec.trace(mesh);
    let g = MultiplierField::Scalar(t.values().to_vec());
    (t, g)
}

/// Scalar boundary datum replicated over `m` components.
pub fn replicated<'a>(spec: &TraceSpec, mesh: &'a TriMesh, m: usize) -> BoundaryTrace<'a> {
    let d = mesh.domain();
    BoundaryTrace::from_fn(mesh, m, |p: Point| {
        let v = spec.on_boundary(d, p);
        let mut out = [0.0; dtn_core::fem::MAX_COMPONENTS];
        out[..m].fill(v);
        out
    })
}

/// Named values computed on one level.
#[derive(Debug, Clone, Default)]
pub struct LevelData {
    pub values: Vec<(String, f64)>,
    pub warnings: Vec<String>,
}

impl LevelData {
    pub fn put(&mut self, quantity: impl Into<String>, value: f64) {
        self.values.push((quantity.into(), value));
    }

    pub fn get(&self, quantity: &str) -> Option<f64> {
        self.values.iter().find(|(q, _)| q == quantity).map(|&(_, v)| v)
    }
}

/// Per-level data of one scenario.
pub struct Table<'t> {
    pub levels: &'t [LevelData],
    pub refinements: Vec<u32>,
}

impl Table<'_> {
    /// Values across levels; missing entries are NaN.
    pub fn series(&self, quantity: &str) -> Vec<f64> {
        self.levels.iter().map(|l| l.get(quantity).unwrap_or(f64::NAN)).collect()
    }

    pub fn has(&self, quantity: &str) -> bool {
        self.levels.iter().any(|l| l.get(quantity).is_some())
    }

    /// Largest value across levels; NaN if any level lacks it.
    pub fn max(&self, quantity: &str) -> f64 {
        let s = self.series(quantity);
        if s.iter().any(|v| v.is_nan()) {
            f64::NAN
        } else {
            s.into_iter().fold(f64::NEG_INFINITY, f64::max)
        }
    }

    /// Smallest value across levels; NaN if any level lacks it.
    pub fn min(&self, quantity: &str) -> f64 {
        let s = self.series(quantity);
        if s.iter().any(|v| v.is_nan()) {
            f64::NAN
        } else {
            s.into_iter().fold(f64::INFINITY, f64::min)
        }
    }

    /// Smallest per-refinement factor `(q_k / q_{k+1})^{1/r}` between consecutive levels.
    pub fn min_contraction(&self, quantity: &str) -> f64 {
        let s = self.series(quantity);
        s.windows(2)
            .zip(&self.refinements)
            .map(|(w, &r)| (w[0] / w[1]).powf(1.0 / r as f64))
            .fold(f64::INFINITY, f64::min)
    }

    /// Smallest per-refinement growth `(q_{k+1} / q_k)^{1/r}`.
    pub fn min_growth(&self, quantity: &str) -> f64 {
        let s = self.series(quantity);
        s.windows(2)
            .zip(&self.refinements)
            .map(|(w, &r)| (w[1] / w[0]).powf(1.0 / r as f64))
            .fold(f64::INFINITY, f64::min)
    }
}

fn level(sub: Subcommand, ctx: &Context<'_>, k: usize) -> Result<LevelData> {
    match sub {
        Subcommand::Spectrum => spectrum::level(ctx, k),
        Subcommand::CommutatorSweep => commutator::level(ctx, k),
        Subcommand::Bilinear => bilinear::level(ctx, k),
        Subcommand::TrilinearCheck => trilinear::level(ctx, k),
        Subcommand::ExtensionAudit => extension::level(ctx, k),
        Subcommand::WeightedSolve => weighted::level(ctx, k),
        Subcommand::MaxPrinciple => maxprinciple::level(ctx, k),
        Subcommand::CalderonSmooth => calderon::level(ctx, k),
        Subcommand::Audit => audit::level(ctx, k),
    }
}

fn criteria(sub: Subcommand, ctx: &Context<'_>, table: &Table<'_>) -> Vec<CriterionOutcome> {
    let all = match sub {
        Subcommand::Spectrum => spectrum::criteria(ctx, table),
        Subcommand::CommutatorSweep => commutator::criteria(ctx, table),
        Subcommand::Bilinear => bilinear::criteria(ctx, table),
        Subcommand::TrilinearCheck => trilinear::criteria(ctx, table),
        Subcommand::ExtensionAudit => extension::criteria(ctx, table),
        Subcommand::WeightedSolve => weighted::criteria(ctx, table),
        Subcommand::MaxPrinciple => maxprinciple::criteria(ctx, table),
        Subcommand::CalderonSmooth => Vec::new(),
        Subcommand::Audit => audit::criteria(ctx, table),
    };
    all.into_iter().filter(|c| ctx.scenario.wants(&c.name)).collect()
}

/// Quantities reported as empirical constants (finest-level value).
fn constants(sub: Subcommand) -> &'static [&'static str] {
    match sub {
        Subcommand::Spectrum => &["oracle_rel_err", "mass_symmetry", "min_form"],
        Subcommand::CommutatorSweep => &["commutator_norm", "dtn_norm", "mode_constant", "oracle_rel_err"],
        Subcommand::Bilinear => &["c_emp_square_weight", "c_emp_boundary_l2"],
        Subcommand::TrilinearCheck => &["relative_residual"],
        Subcommand::ExtensionAudit => {
            &["grad_ratio", "hessian_ratio", "harmonic_ratio", "deviation_profile", "grad_bound_profile", "mu_emp"]
        }
        Subcommand::WeightedSolve => {
            &["weighted_gradient_ratio", "energy_ratio", "alpha_ratio_0.25", "alpha_ratio_0.5", "alpha_ratio_0.75"]
        }
        Subcommand::MaxPrinciple => &["overshoot_ratio"],
        Subcommand::CalderonSmooth => &["calderon_p2", "calderon_p4", "calderon_p8"],
        Subcommand::Audit => &["embedding_grad", "embedding_hessian", "embedding_lebesgue", "ks_carleson"],
    }
}

pub fn run_scenario(
    sub: Subcommand,
    sc: &Scenario,
    thresholds: &Thresholds,
    options: &RunOptions,
) -> Result<ScenarioReport> {
    let start = Instant::now();
    let run = || -> Result<ScenarioReport> {
        let levels = Levels::build(sc, &options.base_dir)?;
        let ctx = Context { scenario: sc, thresholds, options, levels: &levels };
        let data: Vec<LevelData> =
            (0..levels.count()).into_par_iter().map(|k| level(sub, &ctx, k)).collect::<Result<_>>()?;
        let table = Table { levels: &data, refinements: sc.refinements() };
        let criteria = criteria(sub, &ctx, &table);

        let mut records = Vec::new();
        let mut warnings = Vec::new();
        for (k, d) in data.iter().enumerate() {
            let h = sc.levels[k];
            records.push(Record {
                scenario: sc.id.clone(),
                level: k,
                h,
                quantity: "mesh_h".into(),
                value: levels.meshes[k].h(),
            });
            records.extend(d.values.iter().map(|(q, v)| Record {
                scenario: sc.id.clone(),
                level: k,
                h,
                quantity: q.clone(),
                value: *v,
            }));
            warnings.extend(d.warnings.iter().map(|w| format!("level {k}: {w}")));
        }
        let mut constants_map = BTreeMap::new();
        if let Some(last) = data.last() {
            for &q in constants(sub) {
                if let Some(v) = last.get(q) {
                    constants_map.insert(q.to_string(), v);
                }
            }
        }
        Ok(ScenarioReport {
            id: sc.id.clone(),
            subcommand: sub.name().into(),
            alpha0: levels.cone.alpha0(),
            seed: sc.seed(),
            levels: sc.levels.clone(),
            records,
            criteria,
            constants: constants_map,
            warnings,
            elapsed_s: 0.0,
        })
    };
    let mut report = run().map_err(|e| e.in_scenario(&sc.id))?;
    report.elapsed_s = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Runs every scenario of a config; reports come back in config order.
pub fn run_all(
    sub: Subcommand,
    scenarios: &[Scenario],
    thresholds: &Thresholds,
    options: &RunOptions,
) -> Result<Vec<ScenarioReport>> {
    scenarios.par_iter().map(|sc| run_scenario(sub, sc, thresholds, options)).collect()
}
