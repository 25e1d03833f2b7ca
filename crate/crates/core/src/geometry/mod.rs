//! Domains, meshes, boundary distance, cones and the graph-flattening map.

mod domain;
mod kenig_stein;
mod mesh;
mod mesher;

pub use domain::{sawtooth, segment_distance, BoundaryDistance, DomainPreset, PolygonalDomain};
pub use kenig_stein::{GraphEval, GraphMap, Mollifier, PiecewiseLinear, StripMeasure};
pub use mesh::{ConeParams, TriMesh, DEFAULT_QUALITY_FLOOR_DEG};
pub use mesher::{triangulate, triangulate_with_floor};
