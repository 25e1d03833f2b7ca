use alloc::string::String;

use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("polygon is self-intersecting: edges {0} and {1} cross")]
    SelfIntersecting(usize, usize),
    #[error("invalid mesh parameter: {0}")]
    InvalidMeshParameter(String),
    #[error("mesh quality floor {floor_deg:.2} deg not attained (min angle {achieved_deg:.2} deg)")]
    QualityFloor { floor_deg: f64, achieved_deg: f64 },
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("degenerate triangle {0}")]
    DegenerateTriangle(usize),
    #[error("singular pivot at dof {dof} (pivot {pivot:e})")]
    SingularPivot { dof: usize, pivot: f64 },
    #[error("solver residual {residual:e} exceeds tolerance {tolerance:e}")]
    Residual { residual: f64, tolerance: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid coefficients: {0}")]
    InvalidCoefficients(String),
    #[error("multiplier does not commute with the coefficient tensor at boundary node {node} (defect {defect:e})")]
    NonCommutingMultiplier { node: usize, defect: f64 },
    #[error("extension does not match boundary data at boundary node {node} (defect {defect:e})")]
    ExtensionMismatch { node: usize, defect: f64 },
    #[error("boundary data is not Lipschitz: difference quotient {0:e}")]
    NotLipschitz(f64),
    #[error("graph map requires s > 0, got {0}")]
    NonPositiveHeight(f64),
    #[error("graph samples under-resolved: spacing {spacing:e} > s/8 with s = {s:e}")]
    UnderResolved { spacing: f64, s: f64 },
    #[error("invalid graph map: {0}")]
    InvalidGraphMap(String),
}
