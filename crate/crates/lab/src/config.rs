//! Experiment configuration.
//!
//! A config file is TOML with an optional `[thresholds]` table and one or more
//! `[[scenario]]` tables:
//!
//! ```toml
//! [[scenario]]
//! id = "disk-laplace"
//! domain = { kind = "ngon", n = 256 }
//! coefficients = { preset = "identity" }
//! g = { kind = "polar", k = 1 }
//! levels = [0.05]
//! ```

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use dtn_core::coefficients::{CoefficientField, CoefficientPreset};
use dtn_core::fem::BoundaryTrace;
use dtn_core::geometry::{ConeParams, DomainPreset, PolygonalDomain, TriMesh};
use dtn_core::oracle::FourierTrace;
use dtn_core::Point;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::io::read_coefficient_grid;

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    Square {
        #[serde(default = "one")]
        side: f64,
    },
    Lshape {
        #[serde(default = "one")]
        side: f64,
    },
    Ngon {
        n: usize,
        #[serde(default = "one")]
        radius: f64,
    },
    Sawtooth {
        slope: f64,
        teeth: usize,
    },
    Custom {
        vertices: Vec<[f64; 2]>,
    },
}

impl DomainSpec {
    pub fn build(&self) -> Result<PolygonalDomain> {
        let preset = match *self {
            DomainSpec::Square { side } => DomainPreset::Square { side },
            DomainSpec::Lshape { side } => DomainPreset::LShape { side },
            DomainSpec::Ngon { n, radius } => DomainPreset::Ngon { n, radius },
            DomainSpec::Sawtooth { slope, teeth } => DomainPreset::Sawtooth { slope, teeth },
            DomainSpec::Custom { ref vertices } => {
                let pts = vertices.iter().map(|v| Point::new(v[0], v[1])).collect();
                return Ok(PolygonalDomain::custom(pts)?);
            }
        };
        Ok(PolygonalDomain::build(preset)?)
    }

    /// The unit disk oracle applies to regular polygons inscribed in the unit circle.
    pub fn is_unit_disk(&self) -> bool {
        matches!(*self, DomainSpec::Ngon { radius, .. } if radius == 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoefSpec {
    Identity {
        #[serde(default = "one_usize")]
        m: usize,
        eta: Option<f64>,
    },
    ScalarSmooth {
        #[serde(default = "one_usize")]
        m: usize,
        omega: f64,
        eta: Option<f64>,
    },
    RotatedAnisotropic {
        #[serde(default = "one_usize")]
        m: usize,
        theta: f64,
        lambda: f64,
        eta: Option<f64>,
    },
    SystemCoupled {
        kappa: f64,
        eta: Option<f64>,
    },
    Affine {
        #[serde(default = "one_usize")]
        m: usize,
        base: f64,
        slope: [f64; 2],
        eta: Option<f64>,
    },
    Skew {
        #[serde(default = "one_usize")]
        m: usize,
        omega: f64,
        skew: f64,
        eta: Option<f64>,
    },
    /// Tensor samples on the domain bounding box, file header `nx ny m`.
    Grid {
        path: PathBuf,
        eta: Option<f64>,
    },
}

impl Default for CoefSpec {
    fn default() -> Self {
        CoefSpec::Identity { m: 1, eta: None }
    }
}

impl CoefSpec {
    /// Builds the field; relative grid paths resolve against `base`.
    pub fn build(&self, domain: &PolygonalDomain, base: &Path) -> Result<CoefficientField> {
        let (field, eta) = match self {
            CoefSpec::Identity { m, eta } => (CoefficientField::identity(*m)?, eta),
            CoefSpec::ScalarSmooth { m, omega, eta } => (CoefficientField::scalar_smooth(*m, *omega)?, eta),
            CoefSpec::RotatedAnisotropic { m, theta, lambda, eta } => {
                (CoefficientField::rotated_anisotropic(*m, *theta, *lambda)?, eta)
            }
            CoefSpec::SystemCoupled { kappa, eta } => (CoefficientField::system_coupled(*kappa)?, eta),
            CoefSpec::Affine { m, base: b, slope, eta } => {
                (CoefficientField::affine(*m, *b, *slope, domain.bounding_box())?, eta)
            }
            CoefSpec::Skew { m, omega, skew, eta } => (CoefficientField::skew(*m, *omega, *skew)?, eta),
            CoefSpec::Grid { path, eta } => {
                let path = if path.is_absolute() { path.clone() } else { base.join(path) };
                let grid = read_coefficient_grid(&path, domain.bounding_box())?;
                (CoefficientField::grid(grid)?, eta)
            }
        };
        match eta {
            Some(eta) => Ok(field.with_holder_exponent(*eta, domain.diameter())?),
            None => Ok(field),
        }
    }

    /// Component count, or 0 when it is only known after reading a grid file.
    pub fn m(&self) -> usize {
        match self {
            CoefSpec::Identity { m, .. }
            | CoefSpec::ScalarSmooth { m, .. }
            | CoefSpec::RotatedAnisotropic { m, .. }
            | CoefSpec::Affine { m, .. }
            | CoefSpec::Skew { m, .. } => *m,
            CoefSpec::SystemCoupled { .. } => 2,
            CoefSpec::Grid { .. } => 0,
        }
    }
}

/// A scalar function on the closed domain, or on its boundary only.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TraceSpec {
    Constant {
        value: f64,
    },
    /// `c0 + cx·x + cy·y`.
    Linear {
        #[serde(default)]
        c0: f64,
        #[serde(default)]
        cx: f64,
        #[serde(default)]
        cy: f64,
    },
    /// `amp · r^k cos(kθ − phase)` in polar coordinates about `center`.
    Polar {
        k: usize,
        #[serde(default)]
        phase: f64,
        #[serde(default = "one")]
        amp: f64,
        #[serde(default)]
        center: [f64; 2],
    },
    /// `cos(kθ − phase)` with θ the polar angle about `center`; boundary only.
    Angular {
        k: usize,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        center: [f64; 2],
    },
    /// `cos(2πk s / perimeter)` with `s` the arclength from the first vertex; boundary only.
    CosArclength {
        #[serde(default = "one_usize")]
        k: usize,
    },
    /// `|x − center|`.
    Distance {
        center: [f64; 2],
    },
    /// `e^{kx} cos(ky)`.
    ExpHarmonic {
        k: f64,
    },
}

impl TraceSpec {
    /// Value at an arbitrary point of the closed domain, if defined there.
    pub fn at(&self, p: Point) -> Option<f64> {
        Some(match *self {
            TraceSpec::Constant { value } => value,
            TraceSpec::Linear { c0, cx, cy } => c0 + cx * p.x + cy * p.y,
            TraceSpec::Polar { k, phase, amp, center } => {
                let (dx, dy) = (p.x - center[0], p.y - center[1]);
                let r = dx.hypot(dy);
                amp * r.powi(k as i32) * (k as f64 * dy.atan2(dx) - phase).cos()
            }
            TraceSpec::Distance { center } => (p.x - center[0]).hypot(p.y - center[1]),
            TraceSpec::ExpHarmonic { k } => (k * p.x).exp() * (k * p.y).cos(),
            TraceSpec::Angular { .. } | TraceSpec::CosArclength { .. } => return None,
        })
    }

    /// Value at a boundary point.
    pub fn on_boundary(&self, domain: &PolygonalDomain, p: Point) -> f64 {
        match *self {
            TraceSpec::Angular { k, phase, center } => {
                (k as f64 * (p.y - center[1]).atan2(p.x - center[0]) - phase).cos()
            }
            TraceSpec::CosArclength { k } => (2.0 * PI * k as f64 * arclength(domain, p) / domain.perimeter()).cos(),
            _ => self.at(p).expect("interior-defined trace"),
        }
    }

    pub fn trace<'a>(&self, mesh: &'a TriMesh) -> BoundaryTrace<'a> {
        let d = mesh.domain();
        BoundaryTrace::scalar_from_fn(mesh, |p| self.on_boundary(d, p))
    }

    /// Polynomials of degree at most one.
    pub fn is_affine(&self) -> bool {
        matches!(self, TraceSpec::Constant { .. } | TraceSpec::Linear { .. })
            || matches!(self, TraceSpec::Polar { k, .. } if *k <= 1)
    }

    /// Fourier series on the unit circle, when one exists in closed form.
    pub fn fourier(&self) -> Option<FourierTrace> {
        let mode = |k: usize, phase: f64, amp: f64| {
            let mut cos = vec![0.0; k + 1];
            let mut sin = vec![0.0; k + 1];
            cos[k] = amp * phase.cos();
            if k > 0 {
                sin[k] = amp * phase.sin();
            }
            FourierTrace::new(cos, sin).ok()
        };
        match *self {
            TraceSpec::Constant { value } => Some(FourierTrace::constant(value)),
            TraceSpec::Linear { c0, cx, cy } => FourierTrace::new(vec![c0, cx], vec![0.0, cy]).ok(),
            TraceSpec::Polar { k, phase, amp, center: [0.0, 0.0] } => mode(k, phase, amp),
            TraceSpec::Angular { k, phase, center: [0.0, 0.0] } => mode(k, phase, 1.0),
            _ => None,
        }
    }
}

/// Arclength from the first vertex along the boundary to the boundary point `p`.
pub fn arclength(domain: &PolygonalDomain, p: Point) -> f64 {
    let tol = 1e-9 * domain.diameter();
    let e = domain.edge_containing(p, tol).unwrap_or(0);
    let before: f64 = (0..e)
        .map(|k| {
            let (a, b) = domain.edge(k);
            (b - a).norm()
        })
        .sum();
    before + (p - domain.edge(e).0).norm()
}

/// How the trilinear check extends `g` into the domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtensionKind {
    #[default]
    Harmonic,
    Lipschitz,
    /// Nodal values of the analytic `g`; requires an interior-defined trace.
    Interpolant,
}

fn one() -> f64 {
    1.0
}

fn one_usize() -> usize {
    1
}

/// Pass/fail thresholds; defaults mirror the acceptance criteria.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub spectrum_rel: f64,
    pub spectrum_zero: f64,
    pub mass_symmetry: f64,
    pub min_form: f64,
    pub constant_kernel: f64,
    pub skew_adjointness: f64,
    pub commutator_drift: f64,
    pub dtn_growth: f64,
    pub mode_constant_drift: f64,
    pub trilinear_exact: f64,
    pub trilinear_contraction: f64,
    pub bilinear_drift: f64,
    pub embedding_drift: f64,
    pub lipschitz_extension_drift: f64,
    pub matrix_extension_drift: f64,
    pub mu_tolerance: f64,
    pub weighted_drift: f64,
    pub kenig_stein_drift: f64,
    pub max_principle_slack: f64,
    pub oracle_rel: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            spectrum_rel: 0.05,
            spectrum_zero: 1e-6,
            mass_symmetry: 1e-10,
            min_form: 1e-10,
            constant_kernel: 1e-9,
            skew_adjointness: 1e-10,
            commutator_drift: 0.10,
            dtn_growth: 1.8,
            mode_constant_drift: 0.15,
            trilinear_exact: 1e-8,
            trilinear_contraction: 1.8,
            bilinear_drift: 0.25,
            embedding_drift: 0.25,
            lipschitz_extension_drift: 0.15,
            matrix_extension_drift: 0.15,
            mu_tolerance: 0.02,
            weighted_drift: 0.20,
            kenig_stein_drift: 0.10,
            max_principle_slack: 1e-12,
            oracle_rel: 0.08,
        }
    }
}

/// One scenario as written in the config file.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub id: String,
    pub domain: DomainSpec,
    #[serde(default)]
    pub coefficients: CoefSpec,
    pub g: Option<TraceSpec>,
    pub f: Option<TraceSpec>,
    /// Second boundary datum of the trilinear identity; defaults to `f`.
    pub hb: Option<TraceSpec>,
    /// Target diameters; level 0 is meshed directly and the rest by uniform refinement.
    pub levels: Vec<f64>,
    pub alpha0: Option<f64>,
    pub seed: Option<u64>,
    /// Count of random fields in randomized sweeps.
    pub samples: Option<usize>,
    /// Modes `k` of `f_k = cos kθ` in the commutator sweep.
    pub modes: Option<Vec<usize>>,
    /// Number of lowest eigenvalues reported by `spectrum`.
    pub eigs: Option<usize>,
    #[serde(default)]
    pub extension: ExtensionKind,
    /// Restricts the criteria evaluated; all applicable ones by default.
    pub criteria: Option<Vec<String>>,
    /// Line of the `[[scenario]]` header, for diagnostics.
    #[serde(skip)]
    pub line: usize,
}

impl Scenario {
    /// Uniform refinements between consecutive levels.
    pub fn refinements(&self) -> Vec<u32> {
        self.levels.windows(2).map(|w| (w[0] / w[1]).log2().round() as u32).collect()
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn cone(&self, domain: &PolygonalDomain) -> Result<ConeParams> {
        match self.alpha0 {
            Some(a) => Ok(ConeParams::new(a)?),
            None => Ok(ConeParams::for_domain(domain)),
        }
    }

    pub fn wants(&self, criterion: &str) -> bool {
        self.criteria.as_ref().is_none_or(|c| c.iter().any(|n| n == criterion))
    }

    fn validate(&self) -> std::result::Result<(), String> {
        if self.id.is_empty() {
            return Err("scenario id must not be empty".into());
        }
        if self.levels.is_empty() {
            return Err(format!("scenario `{}`: levels must not be empty", self.id));
        }
        if self.levels.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
            return Err(format!("scenario `{}`: levels must be positive and finite", self.id));
        }
        for w in self.levels.windows(2) {
            if !(w[1] < w[0]) {
                return Err(format!("scenario `{}`: levels must be strictly decreasing", self.id));
            }
            let r = (w[0] / w[1]).log2();
            if (r - r.round()).abs() > 1e-9 {
                return Err(format!(
                    "scenario `{}`: level ratio {} is not a power of two (levels are nested refinements)",
                    self.id,
                    w[0] / w[1]
                ));
            }
        }
        if let Some(a) = self.alpha0 {
            if !(a > 1.0 && a.is_finite()) {
                return Err(format!("scenario `{}`: alpha0 must exceed 1, got {a}", self.id));
            }
        }
        let m = self.coefficients.m();
        if m != 0 && !(1..=2).contains(&m) {
            return Err(format!("scenario `{}`: coefficient component count must be 1 or 2", self.id));
        }
        if self.samples == Some(0) {
            return Err(format!("scenario `{}`: samples must be positive", self.id));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize, Serialize)]
pub struct Config {
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub scenario: Vec<Scenario>,
    /// Directory against which relative paths resolve.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Deserialize)]
struct RawConfig {
    #[serde(default)]
    thresholds: Thresholds,
    #[serde(default)]
    scenario: Vec<toml::Spanned<Scenario>>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| LabError::Config {
            line: e.span().map(|s| line_of(text, s.start)).unwrap_or(0),
            message: e.message().to_string(),
        })?;
        let mut ids = BTreeSet::new();
        let mut scenario = Vec::with_capacity(raw.scenario.len());
        for spanned in raw.scenario {
            let line = line_of(text, spanned.span().start);
            let mut sc = spanned.into_inner();
            sc.line = line;
            sc.validate().map_err(|message| LabError::Config { line, message })?;
            if !ids.insert(sc.id.clone()) {
                return Err(LabError::Config { line, message: format!("duplicate scenario id `{}`", sc.id) });
            }
            scenario.push(sc);
        }
        if scenario.is_empty() {
            return Err(LabError::Config { line: 0, message: "config defines no [[scenario]]".into() });
        }
        Ok(Self { thresholds: raw.thresholds, scenario, base_dir: PathBuf::from(".") })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        let mut cfg = Self::parse(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    /// Applies a command-line seed to every scenario.
    pub fn override_seed(&mut self, seed: u64) {
        for sc in &mut self.scenario {
            sc.seed = Some(seed);
        }
    }
}

/// The coefficient preset a built field carries, for reporting.
pub fn preset_name(a: &CoefficientField) -> &'static str {
    match a.preset() {
        CoefficientPreset::Identity => "identity",
        CoefficientPreset::ScalarSmooth { .. } => "scalar_smooth",
        CoefficientPreset::RotatedAnisotropic { .. } => "rotated_anisotropic",
        CoefficientPreset::SystemCoupled { .. } => "system_coupled",
        CoefficientPreset::Affine { .. } => "affine",
        CoefficientPreset::Skew { .. } => "skew",
        CoefficientPreset::Grid(_) => "grid",
    }
}
