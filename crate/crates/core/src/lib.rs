//! Finite-element laboratory for Dirichlet-to-Neumann maps of second-order
//! elliptic systems on planar polygonal (Lipschitz) domains.
//!
//! The crate is `no_std` and only needs an allocator. It covers:
//!
//! - [`geometry`]: polygonal domains, structured triangulations, boundary
//!   distance, nontangential cones and the Kenig–Stein flattening map.
//! - [`coefficients`]: coefficient tensors `a_ij^{αβ}(x)` with ellipticity and
//!   Hölder metadata, plus multiplier fields `g`.
//! - [`fem`]: P1 assembly, a sparse LU for the interior block, Dirichlet and
//!   divergence-source solves, weighted gradient norms.
//! - [`dtn`]: the Steklov–Poincaré (Schur complement) realization of Λ, the
//!   commutator `[Λ, g]`, boundary norms and the trilinear identity.
//! - [`extensions`]: Lipschitz mollifier extension, harmonic extension and the
//!   harmonic matrix extension `B` of a coefficient field.
//! - [`functionals`]: square function, nontangential maximal function,
//!   Carleson norm, Carleson embedding and bilinear estimate sides.
//! - [`oracle`]: closed-form Fourier ground truth for the unit disk.
#![no_std]

extern crate alloc;

pub mod coefficients;
pub mod dtn;
pub mod error;
pub mod extensions;
pub mod fem;
pub mod functionals;
pub mod geometry;
pub mod oracle;

pub use error::{Error, Result};

/// Planar point.
pub type Point = nalgebra::Point2<f64>;
/// Planar vector.
pub type Vector = nalgebra::Vector2<f64>;
