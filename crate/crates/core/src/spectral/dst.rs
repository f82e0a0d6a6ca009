use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::SpectralField;
use crate::grid_fem::{NodalField, TensorGrid};
use crate::tensor;

/// DST-I along one direction via a complex FFT of the odd extension of
/// length `2(n + 1)`.
#[derive(Clone)]
struct LinePlan {
    n: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for LinePlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LinePlan").field("n", &self.n).finish()
    }
}

struct LineScratch {
    buf: Vec<Complex64>,
    work: Vec<Complex64>,
}

impl LinePlan {
    fn scratch(&self) -> LineScratch {
        LineScratch {
            buf: vec![Complex64::default(); 2 * (self.n + 1)],
            work: vec![Complex64::default(); self.fft.get_inplace_scratch_len()],
        }
    }

    /// `dst[k] = scale · Σ_m src[m] sin((m+1)(k+1)π/(n+1))`.
    fn apply(&self, s: &mut LineScratch, src: &[f64], dst: &mut [f64], scale: f64) {
        let n = self.n;
        let len = 2 * (n + 1);
        s.buf[0] = Complex64::default();
        s.buf[n + 1] = Complex64::default();
        for (m, &u) in src.iter().enumerate() {
            s.buf[m + 1] = Complex64::new(u, 0.0);
            s.buf[len - 1 - m] = Complex64::new(-u, 0.0);
        }
        self.fft.process_with_scratch(&mut s.buf, &mut s.work);
        let half = -0.5 * scale;
        for (k, out) in dst.iter_mut().enumerate() {
            *out = half * s.buf[k + 1].im;
        }
    }
}

/// Sine synthesis `S` and its inverse, applied direction by direction.
///
/// The plans are immutable after construction and can be shared freely.
#[derive(Debug, Clone)]
pub struct SineTransform {
    shape: Vec<usize>,
    plans: Vec<LinePlan>,
}

impl SineTransform {
    pub fn new(grid: &TensorGrid) -> Self {
        let mut planner = FftPlanner::new();
        let plans = grid
            .axes()
            .iter()
            .map(|a| LinePlan {
                n: a.interior,
                fft: planner.plan_fft_forward(2 * (a.interior + 1)),
            })
            .collect();
        Self {
            shape: grid.shape(),
            plans,
        }
    }

    fn apply(&self, data: &[f64], inverse: bool) -> Vec<f64> {
        debug_assert_eq!(data.len(), tensor::size(&self.shape));
        let mut cur = data.to_vec();
        for (axis, plan) in self.plans.iter().enumerate() {
            let scale = if inverse { 2.0 / (plan.n + 1) as f64 } else { 1.0 };
            cur = tensor::map_axis(
                &cur,
                &self.shape,
                axis,
                plan.n,
                || plan.scratch(),
                |s, src, dst| plan.apply(s, src, dst, scale),
            );
        }
        cur
    }

    /// Coefficients in the sine basis: `(2/(n+1)) Sᵀ u` per direction.
    pub fn forward(&self, values: &[f64]) -> Vec<f64> {
        self.apply(values, true)
    }

    /// Plain sine synthesis `S c` per direction.
    pub fn backward(&self, coeffs: &[f64]) -> Vec<f64> {
        self.apply(coeffs, false)
    }
}

pub fn dst_forward(transform: &SineTransform, field: &NodalField) -> SpectralField {
    SpectralField::from_raw(field.grid().clone(), transform.forward(field.values()))
}

pub fn dst_backward(transform: &SineTransform, spec: &SpectralField) -> NodalField {
    NodalField::from_raw(spec.grid().clone(), transform.backward(spec.coeffs()))
}
