use super::TensorGrid;
use crate::{Error, Result};

/// Symmetric tridiagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            a[i][i] = self.diag[i];
            if i + 1 < n {
                a[i][i + 1] = self.off[i];
                a[i + 1][i] = self.off[i];
            }
        }
        a
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    y += self.off[i] * x[i + 1];
                }
                y
            })
            .collect()
    }
}

/// Interior-node mass and stiffness matrices of 1D linear elements along
/// `direction` (zero based): `M = h/6 · tridiag(1, 4, 1)` and
/// `K = D/h · tridiag(-1, 2, -1)`.
///
/// The solver never forms these; they back the dense cross-checks of the
/// sine diagonalization.
pub fn assemble_1d_matrices(
    grid: &TensorGrid,
    direction: usize,
    diffusion: f64,
) -> Result<(SymTridiagonal, SymTridiagonal)> {
    if direction >= grid.dim() {
        return Err(Error::InvalidDirection {
            direction,
            dim: grid.dim(),
        });
    }
    if !(diffusion > 0.0) {
        return Err(Error::NonPositiveDiffusion(diffusion));
    }
    let axis = grid.axis(direction);
    let n = axis.interior;
    let h = axis.spacing();
    let mass = SymTridiagonal {
        diag: vec![4.0 * h / 6.0; n],
        off: vec![h / 6.0; n - 1],
    };
    let stiffness = SymTridiagonal {
        diag: vec![2.0 * diffusion / h; n],
        off: vec![-diffusion / h; n - 1],
    };
    Ok((mass, stiffness))
}
