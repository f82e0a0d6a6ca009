//! Parallel-in-time exponential integrator finite element solver for
//! linear parabolic problems `u_t = D·Δu + f(t)` on boxes with homogeneous
//! Dirichlet data.
//!
//! Space is discretized with piecewise-multilinear elements on a uniform
//! tensor grid. Mass and stiffness operators share the discrete sine
//! eigenbasis, so the semi-discrete operator is a diagonal array of
//! eigenvalues and every matrix function reduces to a scalar evaluation per
//! mode. Time is advanced with exponential Runge–Kutta steps ([`eife`]),
//! optionally wrapped in the Parareal predictor–corrector ([`parareal`]).

pub mod app;
pub mod eife;
mod error;
pub mod exp_weights;
pub mod grid_fem;
pub mod parareal;
pub mod problems;
pub mod spectral;
mod tensor;

pub use error::{Error, Result};

pub use eife::{EifePropagator, SourceMode, SourceProjector};
pub use exp_weights::{phi, NodePlacement, StageNodes, WeightTable};
pub use grid_fem::{NodalField, QuadratureRule, TensorGrid};
pub use parareal::{parareal_solve, IterationTrace, PararealOutcome, PararealRun, PararealSolver};
pub use problems::{BuiltinProblem, ProblemSpec, Source};
pub use spectral::{SpectralBasis, SpectralField};
