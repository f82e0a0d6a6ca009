//! Simultaneous diagonalization of the tensor mass and stiffness operators
//! in the discrete sine basis.
//!
//! On a uniform grid the sine vectors `v_j(i) = sin(ijπ/(n+1))` are
//! eigenvectors of both 1D matrices, so the semi-discrete operator `L_h` is
//! diagonal in the tensor sine basis with eigenvalues
//! `μ_k = Σ_i κ_{i,k_i} / m_{i,k_i}`.

mod basis;
mod dst;

pub use basis::{project_l2, SpectralBasis, SpectralField};
pub use dst::{dst_backward, dst_forward, SineTransform};
