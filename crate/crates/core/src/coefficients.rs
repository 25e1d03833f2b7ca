//! Coefficient tensors `A(x) = (a_ij^{αβ}(x))` and boundary multipliers.
//!
//! Gradients of an `m`-vector field are stored with component `∂_i u^α` at
//! index `2α + i`. The tensor acts on them as the `2m × 2m` matrix with entry
//! `a_ij^{αβ}` at row `2α + i`, column `2β + j`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
#[allow(unused_imports)]
use num_traits::Float as _;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::functionals::CellMeasure;
use crate::geometry::TriMesh;
use crate::Point;

/// One tensor value, `m ∈ {1, 2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefTensor {
    m: usize,
    data: [f64; 16],
}

impl CoefTensor {
    pub fn zeros(m: usize) -> Self {
        assert!(m == 1 || m == 2, "component count must be 1 or 2");
        Self { m, data: [0.0; 16] }
    }

    /// `δ_ij δ^{αβ}`.
    pub fn identity(m: usize) -> Self {
        Self::from_fn(m, |i, j, a, b| if i == j && a == b { 1.0 } else { 0.0 })
    }

    pub fn from_fn(m: usize, f: impl Fn(usize, usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(m);
        for i in 0..2 {
            for j in 0..2 {
                for a in 0..m {
                    for b in 0..m {
                        t.data[Self::index(m, i, j, a, b)] = f(i, j, a, b);
                    }
                }
            }
        }
        t
    }

    /// `δ^{αβ} K_ij` for a 2×2 matrix `K`.
    pub fn block_diagonal(m: usize, k: [[f64; 2]; 2]) -> Self {
        Self::from_fn(m, |i, j, a, b| if a == b { k[i][j] } else { 0.0 })
    }

    #[inline]
    fn index(m: usize, i: usize, j: usize, a: usize, b: usize) -> usize {
        ((i * 2 + j) * m + a) * m + b
    }

    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, a: usize, b: usize) -> f64 {
        self.data[Self::index(self.m, i, j, a, b)]
    }

    pub fn set(&mut self, i: usize, j: usize, a: usize, b: usize, v: f64) {
        self.data[Self::index(self.m, i, j, a, b)] = v;
    }

    /// Raw entries in `((i·2 + j)·m + α)·m + β` order.
    pub fn as_slice(&self) -> &[f64] {
        &self.data[..4 * self.m * self.m]
    }

    pub fn from_slice(m: usize, v: &[f64]) -> Self {
        let mut t = Self::zeros(m);
        t.data[..4 * m * m].copy_from_slice(&v[..4 * m * m]);
        t
    }

    /// `a*_ij^{αβ} = a_ji^{βα}`.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.m, |i, j, a, b| self.get(j, i, b, a))
    }

    /// `a_ij^{αβ} ξ_i^α ζ_j^β`.
    pub fn form(&self, xi: &[f64], zeta: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                for a in 0..self.m {
                    for b in 0..self.m {
                        s += self.get(i, j, a, b) * xi[2 * a + i] * zeta[2 * b + j];
                    }
                }
            }
        }
        s
    }

    /// Flux `(A∇u)_i^α = a_ij^{αβ} ∂_j u^β`.
    pub fn apply(&self, grad: &[f64]) -> [f64; 4] {
        let mut out = [0.0; 4];
        for i in 0..2 {
            for a in 0..self.m {
                let mut s = 0.0;
                for j in 0..2 {
                    for b in 0..self.m {
                        s += self.get(i, j, a, b) * grad[2 * b + j];
                    }
                }
                out[2 * a + i] = s;
            }
        }
        out
    }

    pub fn as_matrix(&self) -> DMatrix<f64> {
        let n = 2 * self.m;
        DMatrix::from_fn(n, n, |r, c| self.get(r % 2, c % 2, r / 2, c / 2))
    }

    /// The `m × m` block `(a_ij^{αβ})_{αβ}` for fixed `i, j`.
    pub fn block(&self, i: usize, j: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.m, self.m, |a, b| self.get(i, j, a, b))
    }

    /// Extreme eigenvalues of the symmetric part, i.e. the exact bounds of the
    /// quadratic form on unit `ξ`.
    pub fn form_bounds(&self) -> (f64, f64) {
        let k = self.as_matrix();
        let sym = (&k + k.transpose()) * 0.5;
        let e = SymmetricEigen::new(sym).eigenvalues;
        (e.min(), e.max())
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.as_slice().iter().map(|v| v * v).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.frobenius_sq().sqrt()
    }

    pub fn symmetry_defect(&self) -> f64 {
        (*self - self.adjoint()).frobenius()
    }
}

impl Add for CoefTensor {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self.data.iter_mut().zip(rhs.data).for_each(|(a, b)| *a += b);
        self
    }
}

impl Sub for CoefTensor {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        self.data.iter_mut().zip(rhs.data).for_each(|(a, b)| *a -= b);
        self
    }
}

impl Mul<f64> for CoefTensor {
    type Output = Self;
    fn mul(mut self, rhs: f64) -> Self {
        self.data.iter_mut().for_each(|a| *a *= rhs);
        self
    }
}

/// Tensor samples on a uniform grid, bilinearly interpolated and clamped
/// outside the bounding box.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorGrid {
    pub m: usize,
    pub nx: usize,
    pub ny: usize,
    /// `[xmin, xmax, ymin, ymax]`.
    pub bbox: [f64; 4],
    /// Row-major (`x` fastest) samples.
    pub samples: Vec<CoefTensor>,
}

impl TensorGrid {
    pub fn new(m: usize, nx: usize, ny: usize, bbox: [f64; 4], samples: Vec<CoefTensor>) -> Result<Self> {
        if nx < 2 || ny < 2 || samples.len() != nx * ny {
            return Err(Error::InvalidCoefficients(format!(
                "grid {nx}x{ny} needs nx, ny >= 2 and {} samples, got {}",
                nx * ny,
                samples.len()
            )));
        }
        if !(bbox[1] > bbox[0] && bbox[3] > bbox[2]) {
            return Err(Error::InvalidCoefficients("grid bounding box is empty".into()));
        }
        if samples.iter().any(|t| t.m != m || t.as_slice().iter().any(|v| !v.is_finite())) {
            return Err(Error::InvalidCoefficients("grid samples must be finite with matching m".into()));
        }
        Ok(Self { m, nx, ny, bbox, samples })
    }

    fn spacing(&self) -> (f64, f64) {
        ((self.bbox[1] - self.bbox[0]) / (self.nx - 1) as f64, (self.bbox[3] - self.bbox[2]) / (self.ny - 1) as f64)
    }

    pub fn eval(&self, p: Point) -> CoefTensor {
        let (dx, dy) = self.spacing();
        let locate = |v: f64, lo: f64, d: f64, n: usize| {
            let u = ((v - lo) / d).clamp(0.0, (n - 1) as f64);
            let k = (u.floor() as usize).min(n - 2);
            (k, u - k as f64)
        };
        let (i, tx) = locate(p.x, self.bbox[0], dx, self.nx);
        let (j, ty) = locate(p.y, self.bbox[2], dy, self.ny);
        let s = |i: usize, j: usize| self.samples[j * self.nx + i];
        s(i, j) * ((1.0 - tx) * (1.0 - ty))
            + s(i + 1, j) * (tx * (1.0 - ty))
            + s(i, j + 1) * ((1.0 - tx) * ty)
            + s(i + 1, j + 1) * (tx * ty)
    }

    /// Lipschitz bound of the interpolant from the largest grid difference quotients.
    fn lipschitz(&self) -> f64 {
        let (dx, dy) = self.spacing();
        let (mut gx, mut gy): (f64, f64) = (0.0, 0.0);
        for j in 0..self.ny {
            for i in 0..self.nx {
                let here = self.samples[j * self.nx + i];
                if i + 1 < self.nx {
                    gx = gx.max((self.samples[j * self.nx + i + 1] - here).frobenius() / dx);
                }
                if j + 1 < self.ny {
                    gy = gy.max((self.samples[(j + 1) * self.nx + i] - here).frobenius() / dy);
                }
            }
        }
        (gx * gx + gy * gy).sqrt()
    }
}

/// Named coefficient families.
#[derive(Debug, Clone, PartialEq)]
pub enum CoefficientPreset {
    /// `δ_ij δ^{αβ}`.
    Identity,
    /// `(2 + sin ωx₁ sin ωx₂) δ_ij δ^{αβ}`.
    ScalarSmooth { omega: f64 },
    /// `δ^{αβ} (R_θ diag(1, λ) R_θᵀ)_ij`.
    RotatedAnisotropic { theta: f64, lambda: f64 },
    /// `δ_ij δ^{αβ} + κ δ_iα δ_jβ` (requires `m = 2`).
    SystemCoupled { kappa: f64 },
    /// `(base + g·x) δ_ij δ^{αβ}`, declared on a bounding box.
    Affine { base: f64, slope: [f64; 2], bbox: [f64; 4] },
    /// Scalar-smooth diagonal plus the constant antisymmetric part `skew·J`.
    Skew { omega: f64, skew: f64 },
    /// Sampled tensors.
    Grid(TensorGrid),
}

/// `A(x)` with its declared ellipticity and Hölder data.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientField {
    m: usize,
    preset: CoefficientPreset,
    mu: f64,
    holder_exponent: f64,
    holder_seminorm: f64,
    symmetric: bool,
    adjoint: bool,
}

impl CoefficientField {
    pub fn identity(m: usize) -> Result<Self> {
        Self::build(m, CoefficientPreset::Identity)
    }

    pub fn scalar_smooth(m: usize, omega: f64) -> Result<Self> {
        Self::build(m, CoefficientPreset::ScalarSmooth { omega })
    }

    pub fn rotated_anisotropic(m: usize, theta: f64, lambda: f64) -> Result<Self> {
        Self::build(m, CoefficientPreset::RotatedAnisotropic { theta, lambda })
    }

    pub fn system_coupled(kappa: f64) -> Result<Self> {
        Self::build(2, CoefficientPreset::SystemCoupled { kappa })
    }

    pub fn affine(m: usize, base: f64, slope: [f64; 2], bbox: [f64; 4]) -> Result<Self> {
        Self::build(m, CoefficientPreset::Affine { base, slope, bbox })
    }

    pub fn skew(m: usize, omega: f64, skew: f64) -> Result<Self> {
        Self::build(m, CoefficientPreset::Skew { omega, skew })
    }

    pub fn grid(grid: TensorGrid) -> Result<Self> {
        Self::build(grid.m, CoefficientPreset::Grid(grid))
    }

    /// Fills in the declared constants for a preset.
    pub fn build(m: usize, preset: CoefficientPreset) -> Result<Self> {
        if m != 1 && m != 2 {
            return Err(Error::InvalidCoefficients(format!("m must be 1 or 2, got {m}")));
        }
        let frob_id = ((2 * m) as f64).sqrt();
        let bounds = |lo: f64, hi: f64| lo.min(1.0 / hi);
        let (mu, seminorm, symmetric) = match &preset {
            CoefficientPreset::Identity => (1.0, 0.0, true),
            CoefficientPreset::ScalarSmooth { omega } => {
                finite("omega", *omega)?;
                (bounds(1.0, 3.0), omega.abs() * frob_id, true)
            }
            CoefficientPreset::RotatedAnisotropic { theta, lambda } => {
                finite("theta", *theta)?;
                if !(*lambda > 0.0 && lambda.is_finite()) {
                    return Err(Error::InvalidCoefficients(format!("lambda must be positive, got {lambda}")));
                }
                (bounds(lambda.min(1.0), lambda.max(1.0)), 0.0, true)
            }
            CoefficientPreset::SystemCoupled { kappa } => {
                if m != 2 {
                    return Err(Error::InvalidCoefficients("system_coupled requires m = 2".into()));
                }
                if !(*kappa > -0.5 && kappa.is_finite()) {
                    return Err(Error::InvalidCoefficients(format!("kappa must exceed -1/2, got {kappa}")));
                }
                let top = 1.0 + 2.0 * kappa;
                (bounds(top.min(1.0), top.max(1.0)), 0.0, true)
            }
            CoefficientPreset::Affine { base, slope, bbox } => {
                let corners = [(bbox[0], bbox[2]), (bbox[1], bbox[2]), (bbox[0], bbox[3]), (bbox[1], bbox[3])];
                let vals = corners.map(|(x, y)| base + slope[0] * x + slope[1] * y);
                let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if !(lo > 0.0) {
                    return Err(Error::InvalidCoefficients(format!(
                        "affine coefficient reaches {lo} on its bounding box"
                    )));
                }
                (bounds(lo, hi), (slope[0].hypot(slope[1])) * frob_id, true)
            }
            CoefficientPreset::Skew { omega, skew } => {
                finite("omega", *omega)?;
                finite("skew", *skew)?;
                (bounds(1.0, 3.0), omega.abs() * frob_id, *skew == 0.0)
            }
            CoefficientPreset::Grid(g) => {
                if g.m != m {
                    return Err(Error::InvalidCoefficients("grid m differs from field m".into()));
                }
                let mut mu = f64::INFINITY;
                for (k, t) in g.samples.iter().enumerate() {
                    let (lo, hi) = t.form_bounds();
                    if !(lo > 0.0) {
                        return Err(Error::InvalidCoefficients(format!(
                            "grid sample {k} is not elliptic (form minimum {lo})"
                        )));
                    }
                    mu = mu.min(bounds(lo, hi));
                }
                let symmetric = g.samples.iter().all(|t| t.symmetry_defect() <= 1e-14 * t.frobenius());
                (mu, g.lipschitz(), symmetric)
            }
        };
        Ok(Self { m, preset, mu, holder_exponent: 1.0, holder_seminorm: seminorm, symmetric, adjoint: false })
    }

    /// Re-declares the Hölder exponent `η` for a Lipschitz preset on a set of
    /// diameter `diameter`: `[A]_η ≤ [A]_1 · diameter^{1−η}`.
    pub fn with_holder_exponent(mut self, eta: f64, diameter: f64) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::InvalidCoefficients(format!("Hölder exponent must lie in (0, 1], got {eta}")));
        }
        self.holder_seminorm *= diameter.powf(self.holder_exponent - eta);
        self.holder_exponent = eta;
        Ok(self)
    }

    /// The field `A*` with `a*_ij^{αβ} = a_ji^{βα}`.
    pub fn adjoint(&self) -> Self {
        Self { adjoint: !self.adjoint, ..self.clone() }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn preset(&self) -> &CoefficientPreset {
        &self.preset
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn holder_exponent(&self) -> f64 {
        self.holder_exponent
    }

    pub fn holder_seminorm(&self) -> f64 {
        self.holder_seminorm
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn is_adjoint(&self) -> bool {
        self.adjoint
    }

    /// True when `A` is the same tensor at every point.
    pub fn is_constant(&self) -> bool {
        match &self.preset {
            CoefficientPreset::Identity
            | CoefficientPreset::RotatedAnisotropic { .. }
            | CoefficientPreset::SystemCoupled { .. } => true,
            CoefficientPreset::ScalarSmooth { omega } | CoefficientPreset::Skew { omega, .. } => *omega == 0.0,
            CoefficientPreset::Affine { slope, .. } => slope[0] == 0.0 && slope[1] == 0.0,
            CoefficientPreset::Grid(g) => g.samples.windows(2).all(|w| w[0] == w[1]),
        }
    }

    pub fn eval(&self, p: Point) -> CoefTensor {
        let t = self.eval_raw(p);
        if self.adjoint {
            t.adjoint()
        } else {
            t
        }
    }

    fn eval_raw(&self, p: Point) -> CoefTensor {
        let m = self.m;
        match &self.preset {
            CoefficientPreset::Identity => CoefTensor::identity(m),
            CoefficientPreset::ScalarSmooth { omega } => {
                CoefTensor::identity(m) * (2.0 + (omega * p.x).sin() * (omega * p.y).sin())
            }
            CoefficientPreset::RotatedAnisotropic { theta, lambda } => {
                let (s, c) = theta.sin_cos();
                let k = [
                    [c * c + lambda * s * s, (1.0 - lambda) * c * s],
                    [(1.0 - lambda) * c * s, s * s + lambda * c * c],
                ];
                CoefTensor::block_diagonal(m, k)
            }
            CoefficientPreset::SystemCoupled { kappa } => CoefTensor::from_fn(m, |i, j, a, b| {
                let diag = if i == j && a == b { 1.0 } else { 0.0 };
                let coupled = if i == a && j == b { *kappa } else { 0.0 };
                diag + coupled
            }),
            CoefficientPreset::Affine { base, slope, .. } => {
                CoefTensor::identity(m) * (base + slope[0] * p.x + slope[1] * p.y)
            }
            CoefficientPreset::Skew { omega, skew } => {
                let a = 2.0 + (omega * p.x).sin() * (omega * p.y).sin();
                CoefTensor::block_diagonal(m, [[a, *skew], [-skew, a]])
            }
            CoefficientPreset::Grid(g) => g.eval(p),
        }
    }

    /// `(∂₁A, ∂₂A)` when it is known in closed form.
    pub fn analytic_gradient(&self, p: Point) -> Option<[CoefTensor; 2]> {
        let m = self.m;
        let zero = CoefTensor::zeros(m);
        let g = match &self.preset {
            CoefficientPreset::Identity
            | CoefficientPreset::RotatedAnisotropic { .. }
            | CoefficientPreset::SystemCoupled { .. } => [zero, zero],
            CoefficientPreset::ScalarSmooth { omega } | CoefficientPreset::Skew { omega, .. } => {
                let (sx, cx) = (omega * p.x).sin_cos();
                let (sy, cy) = (omega * p.y).sin_cos();
                let id = CoefTensor::identity(m);
                [id * (omega * cx * sy), id * (omega * sx * cy)]
            }
            CoefficientPreset::Affine { slope, .. } => {
                let id = CoefTensor::identity(m);
                [id * slope[0], id * slope[1]]
            }
            CoefficientPreset::Grid(_) => return None,
        };
        Some(if self.adjoint { g.map(|t| t.adjoint()) } else { g })
    }

    /// Analytic gradient, or central differences with step `step`.
    pub fn gradient(&self, p: Point, step: f64) -> [CoefTensor; 2] {
        self.analytic_gradient(p).unwrap_or_else(|| {
            let dx = crate::Vector::new(step, 0.0);
            let dy = crate::Vector::new(0.0, step);
            [
                (self.eval(p + dx) - self.eval(p - dx)) * (0.5 / step),
                (self.eval(p + dy) - self.eval(p - dy)) * (0.5 / step),
            ]
        })
    }
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidCoefficients(format!("{name} must be finite")))
    }
}

/// `count` random unit directions in `ℝ^{2×m}`, isotropically distributed.
pub fn unit_directions(m: usize, count: usize, seed: u64) -> Vec<[f64; 4]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 2 * m;
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut v = [0.0; 4];
        for x in v.iter_mut().take(n) {
            *x = rng.random_range(-1.0..1.0);
        }
        let r2: f64 = v.iter().map(|x| x * x).sum();
        if r2 > 1e-4 && r2 <= 1.0 {
            let r = r2.sqrt();
            v.iter_mut().for_each(|x| *x /= r);
            out.push(v);
        }
    }
    out
}

/// Outcome of [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    /// Minimum Rayleigh quotient over samples and directions.
    pub mu_emp: f64,
    /// Maximum Rayleigh quotient over samples and directions.
    pub upper_emp: f64,
    pub mu_point: Point,
    /// Exact pointwise check `a_ij^{αβ} = a_ji^{βα}` to 1e−14.
    pub symmetric: bool,
    /// `max |A(x) − A(y)| / |x − y|^η` over sampled pairs.
    pub holder_emp: f64,
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn ensure(&self) -> Result<()> {
        match self.violations.first() {
            None => Ok(()),
            Some(v) => Err(Error::InvalidCoefficients(v.clone())),
        }
    }
}

/// Empirical ellipticity, symmetry and Hölder check of `A` on samples.
pub fn validate(a: &CoefficientField, samples: &[Point], directions: &[[f64; 4]]) -> Result<ValidationReport> {
    if samples.is_empty() || directions.is_empty() {
        return Err(Error::InvalidCoefficients("validation needs samples and directions".into()));
    }
    let tensors: Vec<CoefTensor> = samples.iter().map(|&p| a.eval(p)).collect();
    let mut mu_emp = f64::INFINITY;
    let mut upper_emp = f64::NEG_INFINITY;
    let mut mu_point = samples[0];
    let mut symmetric = true;
    for (t, &p) in tensors.iter().zip(samples) {
        for xi in directions {
            let norm2: f64 = xi[..2 * a.m()].iter().map(|v| v * v).sum();
            let q = t.form(xi, xi) / norm2;
            if q < mu_emp {
                mu_emp = q;
                mu_point = p;
            }
            upper_emp = upper_emp.max(q);
        }
        if t.symmetry_defect() > 1e-14 * t.frobenius().max(1.0) {
            symmetric = false;
        }
    }
    let eta = a.holder_exponent();
    let holder_emp = holder_quotient(samples, &tensors, eta);

    let mut violations = Vec::new();
    if mu_emp <= 0.0 {
        violations.push(format!("form not positive at ({}, {}): {mu_emp}", mu_point.x, mu_point.y));
    } else if mu_emp < a.mu() * (1.0 - 1e-10) {
        violations.push(format!(
            "form minimum {mu_emp} below declared mu {} at ({}, {})",
            a.mu(),
            mu_point.x,
            mu_point.y
        ));
    }
    if upper_emp > (1.0 + 1e-10) / a.mu() {
        violations.push(format!("form maximum {upper_emp} above declared 1/mu {}", 1.0 / a.mu()));
    }
    if a.is_symmetric() && !symmetric {
        violations.push("declared symmetric but a_ij^{ab} != a_ji^{ba}".into());
    }
    if holder_emp > a.holder_seminorm() * (1.0 + 1e-10) + 1e-14 {
        violations.push(format!("Hölder quotient {holder_emp} above declared {}", a.holder_seminorm()));
    }
    Ok(ValidationReport { mu_emp, upper_emp, mu_point, symmetric, holder_emp, violations })
}

/// `max |A(x) − A(y)|_F / |x − y|^η` over all pairs farther apart than 1e−6.
pub fn holder_quotient(samples: &[Point], tensors: &[CoefTensor], eta: f64) -> f64 {
    let mut best: f64 = 0.0;
    for i in 0..samples.len() {
        for j in i + 1..samples.len() {
            let d = (samples[i] - samples[j]).norm();
            if d < 1e-6 {
                continue;
            }
            best = best.max((tensors[i] - tensors[j]).frobenius() / d.powf(eta));
        }
    }
    best
}

/// Cellwise measure `|∇A(x_T)|² δ(x_T) area(T)`.
pub fn grad_measure<'a>(a: &CoefficientField, mesh: &'a TriMesh) -> CellMeasure<'a> {
    let step = 0.25 * mesh.h();
    let weights = (0..mesh.triangle_count())
        .map(|t| {
            let [gx, gy] = a.gradient(mesh.centroid(t), step);
            (gx.frobenius_sq() + gy.frobenius_sq()) * mesh.centroid_delta()[t] * mesh.area(t)
        })
        .collect();
    CellMeasure::new(mesh, weights).expect("gradient weights are nonnegative")
}

/// Carleson norm of `|∇A|² δ dx`.
pub fn grad_carleson_norm(a: &CoefficientField, mesh: &TriMesh) -> f64 {
    if a.is_constant() {
        return 0.0;
    }
    grad_measure(a, mesh).carleson_norm()
}

/// Multiplication operator `g` sampled at boundary nodes.
#[derive(Debug, Clone, PartialEq)]
pub enum MultiplierField {
    Scalar(Vec<f64>),
    /// Row-major `m × m` matrices per boundary node.
    Matrix {
        m: usize,
        values: Vec<[f64; 4]>,
    },
}

impl MultiplierField {
    pub fn scalar_from_fn(mesh: &TriMesh, g: impl Fn(Point) -> f64) -> Self {
        Self::Scalar(mesh.boundary_points().into_iter().map(g).collect())
    }

    pub fn matrix_from_fn(mesh: &TriMesh, m: usize, g: impl Fn(Point) -> [f64; 4]) -> Self {
        Self::Matrix { m, values: mesh.boundary_points().into_iter().map(g).collect() }
    }

    pub fn len(&self) -> usize {
        match self {
            Self::Scalar(v) => v.len(),
            Self::Matrix { values, .. } => values.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn scale(&self, t: f64) -> Self {
        match self {
            Self::Scalar(v) => Self::Scalar(v.iter().map(|x| x * t).collect()),
            Self::Matrix { m, values } => {
                Self::Matrix { m: *m, values: values.iter().map(|g| g.map(|x| x * t)).collect() }
            }
        }
    }

    /// Entry `(α, β)` of `g` at boundary slot `k` (scalar mode gives `g δ^{αβ}`).
    pub fn entry(&self, k: usize, a: usize, b: usize) -> f64 {
        match self {
            Self::Scalar(v) => {
                if a == b {
                    v[k]
                } else {
                    0.0
                }
            }
            Self::Matrix { m, values } => values[k][a * m + b],
        }
    }

    /// Checks `g a_ij = a_ij g` for every block at every boundary node.
    pub fn check_commutes(&self, a: &CoefficientField, mesh: &TriMesh) -> Result<()> {
        let Self::Matrix { m, values } = self else {
            return Ok(());
        };
        if *m != a.m() || values.len() != mesh.boundary_count() {
            return Err(Error::Dimension { expected: a.m() * mesh.boundary_count(), got: m * values.len() });
        }
        for (k, p) in mesh.boundary_points().into_iter().enumerate() {
            let t = a.eval(p);
            let g = DMatrix::from_fn(*m, *m, |r, c| values[k][r * m + c]);
            let mut defect: f64 = 0.0;
            let mut scale: f64 = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    let b = t.block(i, j);
                    defect = defect.max((&g * &b - &b * &g).amax());
                    scale = scale.max(g.amax() * b.amax());
                }
            }
            if defect > 1e-12 * scale.max(1.0) {
                return Err(Error::NonCommutingMultiplier { node: mesh.boundary_nodes()[k], defect });
            }
        }
        Ok(())
    }
}
