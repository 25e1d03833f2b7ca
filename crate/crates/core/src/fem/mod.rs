//! P1 finite elements for `−div(A∇u)`: assembly, direct solves and weighted norms.

mod assembly;
mod fields;
mod lu;
mod ordering;
mod sparse;

pub use assembly::{
    assemble, assemble_cellwise, local_stiffness, log_weight, solve_dirichlet, solve_div_source, weighted_cell_norm,
    weighted_grad_norm, StiffnessSystem, SOLVE_TOLERANCE,
};
pub use fields::{BoundaryTrace, CellField, DiscreteField, MAX_COMPONENTS};
pub use lu::SparseLu;
pub use ordering::nested_dissection;
pub use sparse::CsrMatrix;
