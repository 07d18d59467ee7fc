//! Excessive-gap Lagrangian decomposition for separable convex programs with
//! linear coupling constraints.
//!
//! The crate is organised bottom-up: [`problem`] describes instances,
//! [`inner`] solves the per-component subproblems, [`smoothing`] builds the
//! smoothed primal and dual models, [`algorithms`] runs the decomposition
//! schemes, [`reference`] produces independent high-accuracy solutions and
//! [`bench`] generates benchmark families and performance profiles.

pub mod algorithms;
pub mod bench;
pub mod error;
pub mod inner;
pub mod linalg;
pub mod objective;
pub mod problem;
pub mod reference;
pub mod smoothing;

pub use algorithms::{run, Algorithm, RunResult, SolverConfig};
pub use error::{Error, Result};
pub use linalg::{Block, BlockVector};
pub use objective::{Objective, Quadratic};
pub use problem::{ComponentSpec, Coupling, ProxFunction, SeparableProblem, SmoothingConstants};
