//! Fully-discrete solver for the time-fractional subdiffusion equation with a
//! nonlocal diffusion coefficient,
//!
//! ```text
//! D_t^α u − a(l(u)) Δu = f(x, t, u),   l(u) = ∫_Ω u dx,
//! ```
//!
//! using the L1 approximation of the Caputo derivative on a graded time mesh,
//! P1 finite elements in space, and a Newton iteration on a bordered system
//! that keeps the Jacobian sparse.

// Index loops mirror the element formulas; negated float comparisons reject NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod experiment;
pub mod fem;
pub mod l1;
pub mod manufactured;
pub mod meshes;
pub mod stepper;
pub mod verify;

pub use analysis::{ErrorRecord, NormTag};
pub use error::{Error, Result};
pub use experiment::{Example, Grading, RunConfig};
pub use fem::{QuadratureRule, SparseMatrix};
pub use l1::{L1Row, PCoefficients};
pub use manufactured::{ExactSolution, ForcingMode, ManufacturedCase};
pub use meshes::{MeshKind, SpatialMesh, TimeGrid};
pub use stepper::{BorderedSystem, NewtonConfig, ProblemSpec, Solution, SpaceOperators, StepStats, TimeLoopState};
