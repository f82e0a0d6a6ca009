//! Uniform tensor-product grid, quadrature, and the piecewise-multilinear
//! finite element space with homogeneous Dirichlet data.
//!
//! Only interior nodes carry unknowns. Fields are stored lexicographically
//! with direction 0 varying fastest.

mod assembly;
mod grid;
mod load;
mod norms;
mod quadrature;

pub use assembly::{assemble_1d_matrices, SymTridiagonal};
pub use grid::{Axis, NodalField, TensorGrid};
pub use load::{load_vector, load_vector_spatial};
pub use norms::{l2_error, l2_norm, linf_error};
pub use quadrature::QuadratureRule;
