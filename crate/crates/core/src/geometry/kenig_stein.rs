//! The flattening map `Φ(y′, s) = (y′, c s + (η_s ∗ ψ)(y′))` of a Lipschitz
//! graph domain `{y > ψ(y′)}` onto the upper half-plane.
//!
//! All convolutions are taken against piecewise-linear `ψ`, so every integral
//! is evaluated exactly by splitting at the breakpoints.

use alloc::vec::Vec;

use nalgebra::Matrix2;
#[allow(unused_imports)]
use num_traits::Float as _;

use crate::error::{Error, Result};
use crate::functionals::{carleson_sup, dyadic_radii};
use crate::Point;

const GAUSS_X: [f64; 4] =
    [-0.861_136_311_594_052_6, -0.339_981_043_584_856_3, 0.339_981_043_584_856_3, 0.861_136_311_594_052_6];
const GAUSS_W: [f64; 4] =
    [0.347_854_845_137_453_8, 0.652_145_154_862_546_2, 0.652_145_154_862_546_2, 0.347_854_845_137_453_8];

/// The quartic bump `η(t) = (15/16)(1 − t²)²` on `[−1, 1]`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Mollifier;

impl Mollifier {
    /// `‖η′‖_{L¹}`.
    pub const DERIVATIVE_L1: f64 = 15.0 / 8.0;
    /// `∫ |τ| η(τ) dτ`.
    pub const FIRST_MOMENT: f64 = 5.0 / 16.0;

    pub fn eta(t: f64) -> f64 {
        if t.abs() >= 1.0 {
            0.0
        } else {
            let q = 1.0 - t * t;
            15.0 / 16.0 * q * q
        }
    }

    pub fn d1(t: f64) -> f64 {
        if t.abs() >= 1.0 {
            0.0
        } else {
            -15.0 / 4.0 * t * (1.0 - t * t)
        }
    }

    pub fn d2(t: f64) -> f64 {
        if t.abs() >= 1.0 {
            0.0
        } else {
            -15.0 / 4.0 * (1.0 - 3.0 * t * t)
        }
    }
}

/// Continuous piecewise-linear function, extended by constants beyond its knots.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Grid spacing when the knots are samples of some other Lipschitz function.
    sample_spacing: Option<f64>,
}

impl PiecewiseLinear {
    /// Exact piecewise-linear data; knots must be strictly increasing.
    pub fn from_knots(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() || xs.is_empty() {
            return Err(Error::InvalidGraphMap("knot and value counts differ or are empty".into()));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) || xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::InvalidGraphMap("knots must be finite and strictly increasing".into()));
        }
        Ok(Self { xs, ys, sample_spacing: None })
    }

    /// Samples `f` on `n + 1` equispaced points of `[a, b]`.
    pub fn sample(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> Result<Self> {
        if !(b > a) || n == 0 {
            return Err(Error::InvalidGraphMap("sampling needs a < b and n > 0".into()));
        }
        let dx = (b - a) / n as f64;
        let xs: Vec<f64> = (0..=n).map(|i| a + dx * i as f64).collect();
        let ys = xs.iter().map(|&x| f(x)).collect();
        let mut p = Self::from_knots(xs, ys)?;
        p.sample_spacing = Some(dx);
        Ok(p)
    }

    pub fn knots(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.ys
    }

    pub fn sample_spacing(&self) -> Option<f64> {
        self.sample_spacing
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let k = self.xs.partition_point(|&k| k <= x) - 1;
        let t = (x - self.xs[k]) / (self.xs[k + 1] - self.xs[k]);
        self.ys[k] + t * (self.ys[k + 1] - self.ys[k])
    }

    /// Largest slope.
    pub fn lipschitz(&self) -> f64 {
        self.xs
            .windows(2)
            .zip(self.ys.windows(2))
            .map(|(x, y)| ((y[1] - y[0]) / (x[1] - x[0])).abs())
            .fold(0.0, f64::max)
    }

    /// `∫_{−1}^{1} K_j(τ) f(y − sτ) dτ` for the kernels
    /// `[η, η′, η″, τη′, τη″, τ²η″]`.
    pub fn kernel_moments(&self, y: f64, s: f64) -> [f64; 6] {
        let (lo, hi) = (y - s, y + s);
        let first = self.xs.partition_point(|&k| k <= lo);
        let last = self.xs.partition_point(|&k| k < hi);
        let mut cuts = Vec::with_capacity(last.saturating_sub(first) + 2);
        cuts.push(lo);
        cuts.extend_from_slice(&self.xs[first..last]);
        cuts.push(hi);
        let mut out = [0.0; 6];
        for w in cuts.windows(2) {
            let (za, zb) = (w[0], w[1]);
            if zb <= za {
                continue;
            }
            let (mid, half) = (0.5 * (za + zb), 0.5 * (zb - za));
            for (gx, gw) in GAUSS_X.iter().zip(GAUSS_W) {
                let z = mid + half * gx;
                let tau = (y - z) / s;
                let weight = gw * half / s * self.eval(z);
                let (e0, e1, e2) = (Mollifier::eta(tau), Mollifier::d1(tau), Mollifier::d2(tau));
                out[0] += weight * e0;
                out[1] += weight * e1;
                out[2] += weight * e2;
                out[3] += weight * tau * e1;
                out[4] += weight * tau * e2;
                out[5] += weight * tau * tau * e2;
            }
        }
        out
    }

    /// `(η_s ∗ f)(y)`; equals `f(y)` at `s = 0`.
    pub fn mollify(&self, y: f64, s: f64) -> f64 {
        if s <= 0.0 {
            self.eval(y)
        } else {
            self.kernel_moments(y, s)[0]
        }
    }
}

/// `Φ`, `∇Φ` and the Hessians of both components at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphEval {
    pub value: Point,
    /// Rows are components, columns are `(∂_{y′}, ∂_s)`.
    pub jacobian: Matrix2<f64>,
    pub hessian: [Matrix2<f64>; 2],
}

impl GraphEval {
    /// `∂F/∂s`, which is also `det ∇Φ`.
    pub fn df_ds(&self) -> f64 {
        self.jacobian[(1, 1)]
    }

    /// Squared Frobenius norm of `∇²Φ`.
    pub fn hessian_norm_sq(&self) -> f64 {
        self.hessian[0].norm_squared() + self.hessian[1].norm_squared()
    }

    pub fn singular_values(&self) -> (f64, f64) {
        let sv = self.jacobian.singular_values();
        (sv.min(), sv.max())
    }
}

/// Kenig–Stein map for the graph of `ψ`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphMap {
    psi: PiecewiseLinear,
    c: f64,
}

impl GraphMap {
    /// Uses `c = 2 (1 + ‖ψ′‖_∞ ‖η′‖_{L¹})`.
    pub fn new(psi: PiecewiseLinear) -> Self {
        let c = 2.0 * (1.0 + psi.lipschitz() * Mollifier::DERIVATIVE_L1);
        Self { psi, c }
    }

    /// Custom stretch; must keep `∂F/∂s ≥ 1` for every `ψ` with this slope bound.
    pub fn with_stretch(psi: PiecewiseLinear, c: f64) -> Result<Self> {
        let floor = c - psi.lipschitz() * Mollifier::FIRST_MOMENT;
        if !(floor >= 1.0) {
            return Err(Error::InvalidGraphMap(alloc::format!("stretch {c} gives dF/ds lower bound {floor} < 1")));
        }
        Ok(Self { psi, c })
    }

    pub fn psi(&self) -> &PiecewiseLinear {
        &self.psi
    }

    pub fn stretch(&self) -> f64 {
        self.c
    }

    /// `F(y′, s)` without resolution checks.
    pub fn height(&self, y: f64, s: f64) -> f64 {
        self.c * s + self.psi.mollify(y, s)
    }

    pub fn eval(&self, y: f64, s: f64) -> Result<GraphEval> {
        if !(s > 0.0) {
            return Err(Error::NonPositiveHeight(s));
        }
        if let Some(spacing) = self.psi.sample_spacing {
            if spacing > s / 8.0 {
                return Err(Error::UnderResolved { spacing, s });
            }
        }
        let [k0, k1, k2, k3, k4, k5] = self.psi.kernel_moments(y, s);
        let f = self.c * s + k0;
        let fy = k1 / s;
        let fs = self.c - (k0 + k3) / s;
        let s2 = s * s;
        let fyy = k2 / s2;
        let fys = -(2.0 * k1 + k4) / s2;
        let fss = (2.0 * k0 + 4.0 * k3 + k5) / s2;
        Ok(GraphEval {
            value: Point::new(y, f),
            jacobian: Matrix2::new(1.0, 0.0, fy, fs),
            hessian: [Matrix2::zeros(), Matrix2::new(fyy, fys, fys, fss)],
        })
    }

    /// `(c₋, C₊)` bracketing the singular values of `∇Φ`, from `‖ψ′‖_∞` alone.
    pub fn singular_value_bounds(&self) -> (f64, f64) {
        let l = self.psi.lipschitz();
        let upper = (1.0 + l * l + (self.c + l * Mollifier::FIRST_MOMENT).powi(2)).sqrt();
        ((self.c - l * Mollifier::FIRST_MOMENT) / upper, upper)
    }

    /// Solves `F(y′, s) = t` for `s ≥ 0`, given `t ≥ ψ(y′)`.
    pub fn invert_height(&self, y: f64, t: f64) -> f64 {
        let base = self.psi.eval(y);
        if t <= base {
            return 0.0;
        }
        let spread = self.psi.lipschitz() * Mollifier::FIRST_MOMENT;
        let mut lo = (t - base) / (self.c + spread);
        let mut hi = (t - base) / (self.c - spread);
        let residual = |s: f64| self.height(y, s) - t;
        let mut s = 0.5 * (lo + hi);
        for _ in 0..100 {
            let r = residual(s);
            if r.abs() <= 1e-15 * t.abs().max(1.0) {
                break;
            }
            if r > 0.0 {
                hi = s;
            } else {
                lo = s;
            }
            let [k0, _, _, k3, _, _] = self.psi.kernel_moments(y, s);
            let slope = self.c - (k0 + k3) / s;
            let newton = s - r / slope;
            s = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if hi - lo <= 1e-16 * hi {
                break;
            }
        }
        s
    }

    /// Cell centers and weights `∫_cell |∇²Φ|² s` on the strip `[a, b] × (0, height]`
    /// split into `nx × ns` cells.
    ///
    /// At fixed `s` the integrand is polynomial in `y′` between the points
    /// `k` and `k ± s` for the knots `k` of `ψ`, so the `y′` integral splits
    /// there and is exact; the `s` integral uses Gauss points per row.
    pub fn hessian_strip_measure(&self, a: f64, b: f64, height: f64, nx: usize, ns: usize) -> Result<StripMeasure> {
        if !(b > a && height > 0.0 && nx > 0 && ns > 0) {
            return Err(Error::InvalidGraphMap("strip needs a < b, positive height and cells".into()));
        }
        let (dx, ds) = ((b - a) / nx as f64, height / ns as f64);
        let knots: Vec<f64> = self.psi.xs.iter().copied().filter(|&k| k > a - height && k < b + height).collect();
        let mut weights = alloc::vec![0.0; nx * ns];
        let mut cuts = Vec::new();
        for j in 0..ns {
            for (gs, ws) in GAUSS_X.iter().zip(GAUSS_W) {
                let s = (j as f64 + 0.5 * (1.0 + gs)) * ds;
                cuts.clear();
                cuts.extend((0..=nx).map(|i| a + i as f64 * dx));
                for &k in &knots {
                    cuts.extend([k - s, k, k + s].into_iter().filter(|&c| c > a && c < b));
                }
                cuts.sort_by(f64::total_cmp);
                cuts.dedup();
                for w in cuts.windows(2) {
                    let (za, zb) = (w[0], w[1]);
                    let (mid, half) = (0.5 * (za + zb), 0.5 * (zb - za));
                    let i = (((mid - a) / dx) as usize).min(nx - 1);
                    let mut piece = 0.0;
                    for (gy, wy) in GAUSS_X.iter().zip(GAUSS_W) {
                        piece += wy * self.eval(mid + half * gy, s)?.hessian_norm_sq();
                    }
                    weights[j * nx + i] += piece * half * s * 0.5 * ws * ds;
                }
            }
        }
        let centers = (0..ns)
            .flat_map(|j| (0..nx).map(move |i| Point::new(a + (i as f64 + 0.5) * dx, (j as f64 + 0.5) * ds)))
            .collect();
        let boundary = (0..=nx).map(|i| Point::new(a + i as f64 * dx, 0.0)).collect();
        let diam = ((b - a).powi(2) + height * height).sqrt();
        Ok(StripMeasure { centers, weights, boundary, radii: dyadic_radii(dx.max(ds), diam) })
    }
}

/// Cellwise measure on a half-plane strip together with its Carleson net.
#[derive(Debug, Clone, PartialEq)]
pub struct StripMeasure {
    pub centers: Vec<Point>,
    pub weights: Vec<f64>,
    pub boundary: Vec<Point>,
    pub radii: Vec<f64>,
}

impl StripMeasure {
    pub fn carleson_norm(&self) -> f64 {
        carleson_sup(&self.centers, &self.weights, &self.boundary, &self.radii).value
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abs_psi() -> PiecewiseLinear {
        PiecewiseLinear::from_knots(alloc::vec![-1.0, 0.0, 1.0], alloc::vec![1.0, 0.0, 1.0]).unwrap()
    }

    #[test]
    fn mollifier_constants() {
        let flat = PiecewiseLinear::from_knots(alloc::vec![0.0], alloc::vec![1.0]).unwrap();
        let m = flat.kernel_moments(0.3, 0.5);
        assert!((m[0] - 1.0).abs() < 1e-14);
        assert!(m[1].abs() < 1e-14);
        assert!((m[3] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn flat_graph_is_a_dilation() {
        let flat = PiecewiseLinear::from_knots(alloc::vec![0.0], alloc::vec![0.0]).unwrap();
        let g = GraphMap::new(flat);
        let e = g.eval(0.4, 0.7).unwrap();
        assert!((e.value - Point::new(0.4, g.stretch() * 0.7)).norm() < 1e-14);
        assert!((e.jacobian - Matrix2::new(1.0, 0.0, 0.0, g.stretch())).norm() < 1e-14);
        assert!(e.hessian_norm_sq() < 1e-28);
    }

    #[test]
    fn corner_height_matches_first_moment() {
        let g = GraphMap::new(abs_psi());
        let e = g.eval(0.0, 1.0).unwrap();
        assert!((e.value.y - (g.stretch() + 5.0 / 16.0)).abs() < 1e-14);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let g = GraphMap::new(abs_psi());
        let (y, s, h) = (0.23, 0.4, 1e-5);
        let e = g.eval(y, s).unwrap();
        let fy = (g.height(y + h, s) - g.height(y - h, s)) / (2.0 * h);
        let fs = (g.height(y, s + h) - g.height(y, s - h)) / (2.0 * h);
        assert!((e.jacobian[(1, 0)] - fy).abs() < 1e-8);
        assert!((e.jacobian[(1, 1)] - fs).abs() < 1e-8);
        let d = |y: f64, s: f64| g.eval(y, s).unwrap().jacobian;
        let fyy = (d(y + h, s)[(1, 0)] - d(y - h, s)[(1, 0)]) / (2.0 * h);
        let fys = (d(y, s + h)[(1, 0)] - d(y, s - h)[(1, 0)]) / (2.0 * h);
        let fss = (d(y, s + h)[(1, 1)] - d(y, s - h)[(1, 1)]) / (2.0 * h);
        let hess = e.hessian[1];
        assert!((hess[(0, 0)] - fyy).abs() < 1e-6);
        assert!((hess[(0, 1)] - fys).abs() < 1e-6);
        assert!((hess[(1, 1)] - fss).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_heights() {
        let g = GraphMap::new(PiecewiseLinear::sample(|x| x.abs(), -1.0, 1.0, 16).unwrap());
        assert!(matches!(g.eval(0.0, 0.0), Err(Error::NonPositiveHeight(_))));
        assert!(matches!(g.eval(0.0, 0.5), Err(Error::UnderResolved { .. })));
        assert!(g.eval(0.0, 1.0).is_ok());
    }

    #[test]
    fn inversion_round_trips() {
        let g = GraphMap::new(abs_psi());
        for &(y, s) in &[(0.1, 0.05), (-0.4, 0.3), (0.0, 1e-3)] {
            let t = g.height(y, s);
            assert!((g.invert_height(y, t) - s).abs() < 1e-12);
        }
    }

    #[test]
    fn weak_stretch_is_rejected() {
        assert!(GraphMap::with_stretch(abs_psi(), 1.1).is_err());
        assert!(GraphMap::with_stretch(abs_psi(), 1.5).is_ok());
    }
}
