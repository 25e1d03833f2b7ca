//! Fourier ground truth for the Laplacian on the unit disk.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float as _;

use crate::error::{Error, Result};
use crate::fem::BoundaryTrace;
use crate::geometry::TriMesh;
use crate::Point;

/// Default mode cap.
pub const MODE_CAP: usize = 128;

/// `f(θ) = Σ_{k=0}^{N} a_k cos kθ + b_k sin kθ`; `b_0` is ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierTrace {
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl FourierTrace {
    pub fn new(cos: Vec<f64>, sin: Vec<f64>) -> Result<Self> {
        Self::with_cap(cos, sin, MODE_CAP)
    }

    pub fn with_cap(mut cos: Vec<f64>, mut sin: Vec<f64>, cap: usize) -> Result<Self> {
        let n = cos.len().max(sin.len()).max(1);
        if n > cap + 1 {
            return Err(Error::Dimension { expected: cap + 1, got: n });
        }
        if cos.iter().chain(&sin).any(|v| !v.is_finite()) {
            return Err(Error::InvalidCoefficients("Fourier coefficients must be finite".into()));
        }
        cos.resize(n, 0.0);
        sin.resize(n, 0.0);
        sin[0] = 0.0;
        Ok(Self { cos, sin })
    }

    pub fn constant(c: f64) -> Self {
        Self { cos: vec![c], sin: vec![0.0] }
    }

    /// `amp · cos kθ`.
    pub fn cos_mode(k: usize, amp: f64) -> Result<Self> {
        let mut cos = vec![0.0; k + 1];
        cos[k] = amp;
        Self::new(cos, Vec::new())
    }

    /// `amp · sin kθ`.
    pub fn sin_mode(k: usize, amp: f64) -> Result<Self> {
        let mut sin = vec![0.0; k + 1];
        sin[k] = amp;
        Self::new(Vec::new(), sin)
    }

    /// Highest stored mode.
    pub fn modes(&self) -> usize {
        self.cos.len() - 1
    }

    pub fn cos_coeffs(&self) -> &[f64] {
        &self.cos
    }

    pub fn sin_coeffs(&self) -> &[f64] {
        &self.sin
    }

    pub fn eval(&self, theta: f64) -> f64 {
        (0..self.cos.len())
            .map(|k| {
                let (s, c) = (k as f64 * theta).sin_cos();
                self.cos[k] * c + self.sin[k] * s
            })
            .sum()
    }

    /// Values at the mesh boundary nodes, by polar angle.
    pub fn sample<'a>(&self, mesh: &'a TriMesh) -> BoundaryTrace<'a> {
        BoundaryTrace::scalar_from_fn(mesh, |p| self.eval(p.y.atan2(p.x)))
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.cos.len().max(other.cos.len());
        let get = |v: &[f64], k: usize| v.get(k).copied().unwrap_or(0.0);
        Self {
            cos: (0..n).map(|k| get(&self.cos, k) + get(&other.cos, k)).collect(),
            sin: (0..n).map(|k| get(&self.sin, k) + get(&other.sin, k)).collect(),
        }
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self { cos: self.cos.iter().map(|v| v * t).collect(), sin: self.sin.iter().map(|v| v * t).collect() }
    }

    /// `∫_0^{2π} f g dθ`.
    pub fn inner(&self, other: &Self) -> f64 {
        let n = self.cos.len().min(other.cos.len());
        let mut s = 2.0 * PI * self.cos[0] * other.cos[0];
        for k in 1..n {
            s += PI * (self.cos[k] * other.cos[k] + self.sin[k] * other.sin[k]);
        }
        s
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    /// `Σ |a_k| + |b_k|`, a bound for `max |f|` and for its harmonic extension.
    pub fn abs_sum(&self) -> f64 {
        self.cos.iter().chain(&self.sin).map(|v| v.abs()).sum()
    }

    /// Product by the product-to-sum rules, truncated at `N_f + N_g`.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        let n = self.modes() + other.modes();
        if n > MODE_CAP {
            return Err(Error::Dimension { expected: MODE_CAP, got: n });
        }
        let mut cos = vec![0.0; n + 1];
        let mut sin = vec![0.0; n + 1];
        for j in 0..self.cos.len() {
            let (aj, bj) = (self.cos[j], self.sin[j]);
            for k in 0..other.cos.len() {
                let (ak, bk) = (other.cos[k], other.sin[k]);
                let (sum, diff) = (j + k, j.abs_diff(k));
                // cos j cos k = ½[cos(j+k) + cos(j−k)], sin j sin k = ½[cos(j−k) − cos(j+k)]
                cos[sum] += 0.5 * (aj * ak - bj * bk);
                cos[diff] += 0.5 * (aj * ak + bj * bk);
                // sin j cos k = ½[sin(j+k) + sin(j−k)]
                sin[sum] += 0.5 * (bj * ak + aj * bk);
                let cross = 0.5 * (bj * ak - aj * bk);
                if j >= k {
                    sin[diff] += cross;
                } else {
                    sin[diff] -= cross;
                }
            }
        }
        sin[0] = 0.0;
        Ok(Self { cos, sin })
    }
}

/// `Λ cos kθ = k cos kθ`, `Λ sin kθ = k sin kθ`.
pub fn disk_dtn_apply(f: &FourierTrace) -> FourierTrace {
    FourierTrace {
        cos: f.cos.iter().enumerate().map(|(k, v)| k as f64 * v).collect(),
        sin: f.sin.iter().enumerate().map(|(k, v)| k as f64 * v).collect(),
    }
}

/// `Λ(gf) − gΛf` in Fourier space.
pub fn disk_commutator_fourier(g: &FourierTrace, f: &FourierTrace) -> Result<FourierTrace> {
    let lgf = disk_dtn_apply(&g.multiply(f)?);
    let glf = g.multiply(&disk_dtn_apply(f))?;
    Ok(lgf.add(&glf.scaled(-1.0)))
}

/// Poisson-series solution `Σ r^k (a_k cos kθ + b_k sin kθ)` at `x`, `|x| < 1`.
pub fn disk_harmonic_eval(f: &FourierTrace, x: Point) -> Result<f64> {
    let r = x.coords.norm();
    if !(r < 1.0) {
        return Err(Error::InvalidDomain(alloc::format!("point at radius {r} is not inside the unit disk")));
    }
    let theta = x.y.atan2(x.x);
    let mut rk = 1.0;
    let mut s = 0.0;
    for k in 0..f.cos.len() {
        let (sn, cs) = (k as f64 * theta).sin_cos();
        s += rk * (f.cos[k] * cs + f.sin[k] * sn);
        rk *= r;
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dtn_scales_modes() {
        let f = FourierTrace::cos_mode(3, 1.0).unwrap();
        assert_eq!(disk_dtn_apply(&f).cos_coeffs()[3], 3.0);
        assert_eq!(disk_dtn_apply(&FourierTrace::constant(2.0)).cos_coeffs()[0], 0.0);
    }

    #[test]
    fn commutator_with_cos_theta() {
        let g = FourierTrace::cos_mode(1, 1.0).unwrap();
        for k in 2..10 {
            let c = disk_commutator_fourier(&g, &FourierTrace::cos_mode(k, 1.0).unwrap()).unwrap();
            for (j, &v) in c.cos_coeffs().iter().enumerate() {
                let expected = if j == k + 1 {
                    0.5
                } else if j == k - 1 {
                    -0.5
                } else {
                    0.0
                };
                assert!((v - expected).abs() < 1e-14);
            }
            assert!(c.sin_coeffs().iter().all(|v| v.abs() < 1e-14));
        }
    }

    #[test]
    fn product_matches_pointwise() {
        let a = FourierTrace::new(vec![0.3, -1.0, 0.5], vec![0.0, 0.7, 0.2]).unwrap();
        let b = FourierTrace::new(vec![1.0, 0.0, 0.0, 0.4], vec![0.0, -0.3, 1.1, 0.0]).unwrap();
        let p = a.multiply(&b).unwrap();
        for i in 0..17 {
            let t = 0.37 * i as f64;
            assert!((p.eval(t) - a.eval(t) * b.eval(t)).abs() < 1e-13);
        }
    }

    #[test]
    fn harmonic_eval_of_cos() {
        let f = FourierTrace::cos_mode(1, 1.0).unwrap();
        assert!((disk_harmonic_eval(&f, Point::new(0.5, 0.0)).unwrap() - 0.5).abs() < 1e-15);
        assert!(disk_harmonic_eval(&f, Point::new(1.0, 0.0)).is_err());
    }
}
