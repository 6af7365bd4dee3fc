//! P1 finite elements on interior dofs (homogeneous Dirichlet eliminated).

mod assembly;
mod quadrature;
mod solver;
mod sparse;

pub use assembly::{
    assemble_load, assemble_mass, assemble_nodal_integrals, assemble_reaction,
    assemble_reaction_jacobian, assemble_stiffness, local_values, ritz_projection, Element,
};
pub use quadrature::QuadratureRule;
pub use solver::{solve_sparse, BandedLu};
pub use sparse::SparseMatrix;
