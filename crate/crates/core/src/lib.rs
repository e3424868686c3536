//! Numerical laboratory for X_p-type moment inequalities on discrete tori, hypercube
//! smoothness constants, explicit embeddings with exact distortion, and Schatten-class
//! trace inequalities.
//!
//! Every inequality is exposed as an [`InequalityReport`] with named sides and an implied
//! constant; expectations over (x, ε, S) are evaluated exhaustively or by seeded Monte Carlo
//! according to a [`SamplePlan`].

pub mod complexify;
pub mod embeddings;
pub mod error;
pub mod families;
pub mod inequalities;
pub mod lattice;
pub mod linalg;
pub mod operators;
pub mod report;
pub mod sampling;
pub mod schatten;

pub use error::{Error, Result};
pub use lattice::{Displacement, GridFunction, LatticePoint, SignLaw, SignVector};
pub use report::{Combine, InequalityReport};
pub use sampling::{make_sample_plan, Estimate, SamplePlan};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
