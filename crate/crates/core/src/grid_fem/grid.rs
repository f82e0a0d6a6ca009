use std::sync::Arc;

use crate::{tensor, Error, Result};

/// One direction of a uniform partition: `interior` nodes strictly inside
/// `(lo, hi)`, so `interior + 1` cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub interior: usize,
}

impl Axis {
    pub fn cells(&self) -> usize {
        self.interior + 1
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / self.cells() as f64
    }

    /// Coordinate of grid node `j`, where `0` and `interior + 1` are the
    /// boundary nodes.
    pub fn node(&self, j: usize) -> f64 {
        self.lo + j as f64 * self.spacing()
    }
}

/// Uniform rectangular partition of a box in one to three dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorGrid {
    axes: Vec<Axis>,
}

impl TensorGrid {
    pub const MAX_DIM: usize = 3;

    pub fn new(bounds: &[(f64, f64)], interior: &[usize]) -> Result<Self> {
        if bounds.is_empty() || bounds.len() > Self::MAX_DIM {
            return Err(Error::InvalidGrid(format!(
                "dimension must be between 1 and {}, got {}",
                Self::MAX_DIM,
                bounds.len()
            )));
        }
        if bounds.len() != interior.len() {
            return Err(Error::InvalidGrid(format!(
                "{} bounds but {} node counts",
                bounds.len(),
                interior.len()
            )));
        }
        let mut axes = Vec::with_capacity(bounds.len());
        let mut total = 1usize;
        for (i, (&(lo, hi), &n)) in bounds.iter().zip(interior).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(Error::InvalidGrid(format!(
                    "direction {i}: bounds [{lo}, {hi}] are not an interval"
                )));
            }
            if n == 0 {
                return Err(Error::InvalidGrid(format!(
                    "direction {i} needs at least one interior node"
                )));
            }
            total = total
                .checked_mul(n)
                .filter(|t| t.checked_mul(std::mem::size_of::<f64>()).is_some_and(|b| b <= isize::MAX as usize))
                .ok_or_else(|| Error::InvalidGrid("too many nodes".into()))?;
            axes.push(Axis { lo, hi, interior: n });
        }
        Ok(Self { axes })
    }

    /// Builds the grid from cell counts per direction, as the tables quote
    /// them (`N_x = 8` means seven interior nodes).
    pub fn from_cells(bounds: &[(f64, f64)], cells: &[usize]) -> Result<Self> {
        let interior: Vec<usize> = cells.iter().map(|&c| c.saturating_sub(1)).collect();
        Self::new(bounds, &interior)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, i: usize) -> &Axis {
        &self.axes[i]
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.interior).collect()
    }

    pub fn cells(&self) -> Vec<usize> {
        self.axes.iter().map(Axis::cells).collect()
    }

    /// Total number of interior nodes.
    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.interior).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Largest mesh spacing over all directions.
    pub fn h(&self) -> f64 {
        self.axes.iter().map(Axis::spacing).fold(0.0, f64::max)
    }

    /// Coordinates of the interior node with flat index `flat`.
    pub fn node_coords(&self, flat: usize) -> Vec<f64> {
        let mut rem = flat;
        self.axes
            .iter()
            .map(|a| {
                let j = rem % a.interior;
                rem /= a.interior;
                a.node(j + 1)
            })
            .collect()
    }

    /// Calls `visit(flat, x)` for every interior node in storage order.
    pub fn for_each_node(&self, mut visit: impl FnMut(usize, &[f64])) {
        let shape = self.shape();
        let mut x = vec![0.0; self.dim()];
        tensor::for_each_index(&shape, |flat, idx| {
            for (a, (xi, &j)) in x.iter_mut().zip(idx).enumerate() {
                *xi = self.axes[a].node(j + 1);
            }
            visit(flat, &x);
        });
    }
}

/// Nodal coefficient vector of a function in the finite element space.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalField {
    grid: Arc<TensorGrid>,
    values: Vec<f64>,
}

impl NodalField {
    pub fn new(grid: Arc<TensorGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch {
                expected: grid.len(),
                found: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteField { index });
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_raw(grid: Arc<TensorGrid>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: Arc<TensorGrid>) -> Self {
        let n = grid.len();
        Self::from_raw(grid, vec![0.0; n])
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate(grid: Arc<TensorGrid>, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let mut values = vec![0.0; grid.len()];
        let mut bad = None;
        grid.for_each_node(|i, x| {
            let v = f(x);
            if !v.is_finite() && bad.is_none() {
                bad = Some((x.to_vec(), v));
            }
            values[i] = v;
        });
        if let Some((x, value)) = bad {
            return Err(Error::NonFinite {
                what: "function value",
                t: None,
                x,
                value,
            });
        }
        Ok(Self::from_raw(grid, values))
    }

    pub fn grid(&self) -> &Arc<TensorGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}
