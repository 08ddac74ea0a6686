//! Simulation and verification toolkit for the triply nonlinear nonlocal
//! thermistor problem
//!
//! ```text
//! d alpha(v)/ds - div((|grad v|^2 + r)^{(m-2)/2} grad v) = kappa f(v) / (int f(v))^2
//! ```
//!
//! with homogeneous Dirichlet data on a uniform 1D or 2D grid.
//!
//! Layout:
//! - [`model`]: material and source laws, problem description, regularization.
//! - [`grid`], [`operator`], [`poincare`]: spatial discretization.
//! - [`solver`]: implicit Euler stepping, brute-force oracle, trajectories.
//! - [`analysis`]: inequality checkers and attractor/absorbing-set estimators.
//! - [`experiments`]: the batch scenarios driven by the command line tool.

pub mod analysis;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod linalg;
pub mod model;
pub mod operator;
pub mod poincare;
pub mod solver;

pub use error::{Error, Result};
pub use grid::{Field, Grid};
pub use model::{Domain, Forcing, InitialData, MaterialLaw, ProblemSpec, SourceLaw};
pub use solver::{StepReport, StepperConfig, TrajectoryRecord};
