//! Seeded smooth random fields for the randomized sweeps.
//!
//! Fields are defined analytically, independent of any mesh, so the same
//! `(seed, stream)` gives the same function at every refinement level.

use std::f64::consts::PI;

use dtn_core::fem::MAX_COMPONENTS;
use dtn_core::Point;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TERMS: usize = 4;
const MAX_FREQ: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Term {
    kx: f64,
    ky: f64,
    phase: f64,
    amp: f64,
}

/// `v_c(x) = a_c + Σ_j amp_j cos(2π(k_j · x)/L + phase_j)` per component.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothField {
    offsets: Vec<f64>,
    terms: Vec<[Term; TERMS]>,
    scale: f64,
}

impl SmoothField {
    /// `stream` separates the fields of one sweep; `scale` is the domain diameter.
    pub fn new(seed: u64, stream: u64, components: usize, scale: f64) -> Self {
        assert!(components <= MAX_COMPONENTS);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let mut offsets = Vec::with_capacity(components);
        let mut terms = Vec::with_capacity(components);
        for _ in 0..components {
            offsets.push(rng.random_range(-1.0..1.0));
            terms.push(core::array::from_fn(|_| {
                let kx = rng.random_range(-MAX_FREQ..=MAX_FREQ) as f64;
                let ky = rng.random_range(-MAX_FREQ..=MAX_FREQ) as f64;
                Term {
                    kx,
                    ky,
                    phase: rng.random_range(0.0..2.0 * PI),
                    amp: rng.random_range(-1.0..1.0) / (1.0 + kx.hypot(ky)),
                }
            }));
        }
        Self { offsets, terms, scale }
    }

    pub fn components(&self) -> usize {
        self.offsets.len()
    }

    pub fn eval(&self, p: Point) -> [f64; MAX_COMPONENTS] {
        let w = 2.0 * PI / self.scale;
        let mut out = [0.0; MAX_COMPONENTS];
        for (c, (a, ts)) in self.offsets.iter().zip(&self.terms).enumerate() {
            out[c] = a + ts.iter().map(|t| t.amp * (w * (t.kx * p.x + t.ky * p.y) + t.phase).cos()).sum::<f64>();
        }
        out
    }

    pub fn eval_scalar(&self, p: Point) -> f64 {
        self.eval(p)[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible_and_distinct() {
        let a = SmoothField::new(7, 0, 2, 1.0);
        let b = SmoothField::new(7, 0, 2, 1.0);
        let c = SmoothField::new(7, 1, 2, 1.0);
        let p = Point::new(0.3, 0.7);
        assert_eq!(a.eval(p), b.eval(p));
        assert_ne!(a.eval(p), c.eval(p));
        assert_eq!(a.eval(p)[2], 0.0);
    }
}
