//! Numerical laboratory for the singular quasilinear problem
//! `-Δ_p u + θ|∇u|^q = u^(-γ) + f(u)` with zero Dirichlet data.
//!
//! The crate solves the problem at desk scale on a closed domain catalogue,
//! constructs the explicit eigenfunction-based barrier families, and
//! quantitatively verifies boundary-layer rates, scaled directional
//! derivative limits, the Sobolev membership threshold, sub/supersolution
//! orderings, and moving-plane symmetry of the computed solutions.

pub mod asymptotics;
pub mod barriers;
pub mod comparison;
pub mod error;
pub mod field;
pub mod grid2d;
pub mod linalg;
pub mod mesh;
pub mod problem;
pub mod solver1d;
pub mod solver2d;
pub mod symmetry;
pub mod eigen;

pub use error::{Error, Result};
pub use field::{BoundaryProfile, Side, SolutionField, SyntheticProfile};
pub use mesh::{Grading, Mesh1D};
pub use problem::{
    distance_and_inward, validate_problem, DomainSpec, ProblemSpec, ReactionSpec, Regime,
    ValidatedProblem,
};
pub use solver1d::{solve_radial, weak_residual, GradScheme, SolverOptions};
