//! φ-functions, exponential Runge–Kutta weights `b_i(z)`, and per-step
//! weight tables over the eigenvalue array.

mod nodes;
mod phi;
mod table;

pub use nodes::{lagrange_monomial_matrix, weights_b, NodePlacement, StageNodes};
pub use phi::{phi, phi_all, phi_recurrence, phi_taylor};
pub use table::{WeightTable, WeightTableCache};
