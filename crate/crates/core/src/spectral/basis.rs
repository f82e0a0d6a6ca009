use std::f64::consts::PI;
use std::sync::Arc;

use super::SineTransform;
use crate::grid_fem::{NodalField, TensorGrid};
use crate::{tensor, Error, Result};

/// Spectral coefficients of a finite element function in the tensor sine
/// basis, aligned with [`SpectralBasis::eigenvalues`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Arc<TensorGrid>,
    coeffs: Vec<f64>,
}

impl SpectralField {
    pub fn new(grid: Arc<TensorGrid>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::ShapeMismatch {
                expected: grid.len(),
                found: coeffs.len(),
            });
        }
        if let Some(index) = coeffs.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteField { index });
        }
        Ok(Self { grid, coeffs })
    }

    pub(crate) fn from_raw(grid: Arc<TensorGrid>, coeffs: Vec<f64>) -> Self {
        debug_assert_eq!(coeffs.len(), grid.len());
        Self { grid, coeffs }
    }

    pub fn zeros(grid: Arc<TensorGrid>) -> Self {
        let n = grid.len();
        Self::from_raw(grid, vec![0.0; n])
    }

    /// Field holding a single unit coefficient at flat index `k`.
    pub fn unit(grid: Arc<TensorGrid>, k: usize) -> Self {
        let mut f = Self::zeros(grid);
        f.coeffs[k] = 1.0;
        f
    }

    pub fn grid(&self) -> &Arc<TensorGrid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max_k |self_k - other_k|`.
    pub fn max_abs_diff(&self, other: &SpectralField) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Per-direction eigenvalues of the 1D mass and stiffness matrices and the
/// combined eigenvalues of `L_h`, together with the transform plans.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    grid: Arc<TensorGrid>,
    diffusion: f64,
    stiffness: Vec<Vec<f64>>,
    mass: Vec<Vec<f64>>,
    eigenvalues: Vec<f64>,
    mass_product: Vec<f64>,
    transform: SineTransform,
}

impl SpectralBasis {
    pub fn build(grid: Arc<TensorGrid>, diffusion: f64) -> Result<Self> {
        if !(diffusion > 0.0 && diffusion.is_finite()) {
            return Err(Error::NonPositiveDiffusion(diffusion));
        }
        let mut stiffness = Vec::with_capacity(grid.dim());
        let mut mass = Vec::with_capacity(grid.dim());
        for axis in grid.axes() {
            let n = axis.interior;
            let h = axis.spacing();
            let (k, m): (Vec<f64>, Vec<f64>) = (1..=n)
                .map(|j| {
                    let theta = j as f64 * PI / (n + 1) as f64;
                    let s = (0.5 * theta).sin();
                    // 1 - cos θ = 2 sin²(θ/2) avoids cancellation for low modes
                    let kappa = 4.0 * diffusion / h * s * s;
                    let m = h / 3.0 * (2.0 + theta.cos());
                    (kappa, m)
                })
                .unzip();
            stiffness.push(k);
            mass.push(m);
        }

        let shape = grid.shape();
        let mut eigenvalues = vec![0.0; grid.len()];
        let mut mass_product = vec![0.0; grid.len()];
        tensor::for_each_index(&shape, |flat, idx| {
            let mut mu = 0.0;
            let mut mp = 1.0;
            for (a, &j) in idx.iter().enumerate() {
                mu += stiffness[a][j] / mass[a][j];
                mp *= mass[a][j];
            }
            eigenvalues[flat] = mu;
            mass_product[flat] = mp;
        });

        let transform = SineTransform::new(&grid);
        Ok(Self {
            grid,
            diffusion,
            stiffness,
            mass,
            eigenvalues,
            mass_product,
            transform,
        })
    }

    pub fn grid(&self) -> &Arc<TensorGrid> {
        &self.grid
    }

    pub fn diffusion(&self) -> f64 {
        self.diffusion
    }

    /// Eigenvalues `μ_k` of `L_h` in storage order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `Π_i m_{i,k_i}`, the eigenvalues of the tensor mass matrix.
    pub fn mass_product(&self) -> &[f64] {
        &self.mass_product
    }

    pub fn axis_stiffness(&self, axis: usize) -> &[f64] {
        &self.stiffness[axis]
    }

    pub fn axis_mass(&self, axis: usize) -> &[f64] {
        &self.mass[axis]
    }

    /// 1D operator eigenvalues `κ_j / m_j` along `axis`.
    pub fn axis_eigenvalues(&self, axis: usize) -> Vec<f64> {
        self.stiffness[axis]
            .iter()
            .zip(&self.mass[axis])
            .map(|(k, m)| k / m)
            .collect()
    }

    pub fn transform(&self) -> &SineTransform {
        &self.transform
    }

    pub fn forward(&self, field: &NodalField) -> SpectralField {
        SpectralField::from_raw(self.grid.clone(), self.transform.forward(field.values()))
    }

    pub fn backward(&self, spec: &SpectralField) -> NodalField {
        NodalField::from_raw(self.grid.clone(), self.transform.backward(spec.coeffs()))
    }

    /// Spectral coefficients of `P_h f` from its load vector `(f, φ_j)`.
    pub fn project_l2(&self, load: &NodalField) -> SpectralField {
        let mut spec = self.forward(load);
        for (c, m) in spec.coeffs.iter_mut().zip(&self.mass_product) {
            *c /= m;
        }
        spec
    }

    /// `Π_i (n_i + 1)/2`, the squared norm of each tensor sine vector.
    pub fn synthesis_scale(&self) -> f64 {
        self.grid
            .axes()
            .iter()
            .map(|a| (a.interior + 1) as f64 / 2.0)
            .product()
    }

    /// `uᵀ M u` for `u = S c`.
    pub fn mass_energy(&self, spec: &SpectralField) -> f64 {
        self.synthesis_scale()
            * spec
                .coeffs
                .iter()
                .zip(&self.mass_product)
                .map(|(c, m)| m * c * c)
                .sum::<f64>()
    }
}

pub fn project_l2(basis: &SpectralBasis, load: &NodalField) -> SpectralField {
    basis.project_l2(load)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid1(n: usize) -> Arc<TensorGrid> {
        Arc::new(TensorGrid::new(&[(0.0, 1.0)], &[n]).unwrap())
    }

    #[test]
    fn middle_mode_of_three_nodes() {
        let b = SpectralBasis::build(grid1(3), 1.0).unwrap();
        assert!((b.eigenvalues()[1] - 48.0).abs() < 1e-12);
    }

    #[test]
    fn eigenvalues_positive_and_increasing() {
        let b = SpectralBasis::build(
            Arc::new(TensorGrid::new(&[(0.0, 1.0), (0.0, 0.5)], &[15, 7]).unwrap()),
            0.3,
        )
        .unwrap();
        assert!(b.eigenvalues().iter().all(|&m| m > 0.0));
        assert_eq!(b.eigenvalues().len(), 105);
        assert_eq!(b.mass_product().len(), 105);
        for a in 0..2 {
            let e = b.axis_eigenvalues(a);
            assert!(e.windows(2).all(|w| w[0] < w[1]));
            assert!(b.axis_stiffness(a).windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn kronecker_sum_additivity() {
        let g = Arc::new(TensorGrid::new(&[(0.0, 1.0), (0.0, 2.0), (1.0, 2.0)], &[5, 4, 3]).unwrap());
        let b = SpectralBasis::build(g, 0.8).unwrap();
        let ex: Vec<Vec<f64>> = (0..3).map(|a| b.axis_eigenvalues(a)).collect();
        for k in 0..60 {
            let (i, j, l) = (k % 5, (k / 5) % 4, k / 20);
            assert_eq!(b.eigenvalues()[k], ex[0][i] + ex[1][j] + ex[2][l]);
        }
    }

    #[test]
    fn rejects_non_positive_diffusion() {
        assert!(SpectralBasis::build(grid1(3), 0.0).is_err());
        assert!(SpectralBasis::build(grid1(3), -1.0).is_err());
    }

    #[test]
    fn projection_of_zero_is_zero() {
        let b = SpectralBasis::build(grid1(9), 1.0).unwrap();
        let p = b.project_l2(&NodalField::zeros(b.grid().clone()));
        assert!(p.coeffs().iter().all(|&c| c == 0.0));
    }
}
