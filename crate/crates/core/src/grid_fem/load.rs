use std::sync::Arc;

use rayon::prelude::*;

use super::{NodalField, QuadratureRule, TensorGrid};
use crate::{tensor, Error, Result};

/// Tensor Gauss points of the whole mesh, element by element along each
/// direction: entry `e * q + p` is point `p` of cell `e`.
pub(crate) struct QuadGrid {
    pub coords: Vec<Vec<f64>>,
    pub weights: Vec<Vec<f64>>,
}

impl QuadGrid {
    pub fn new(grid: &TensorGrid, rule: &QuadratureRule) -> Self {
        let mut coords = Vec::with_capacity(grid.dim());
        let mut weights = Vec::with_capacity(grid.dim());
        for axis in grid.axes() {
            let h = axis.spacing();
            let mut c = Vec::with_capacity(axis.cells() * rule.len());
            let mut w = Vec::with_capacity(axis.cells() * rule.len());
            for e in 0..axis.cells() {
                for (&xi, &wi) in rule.points().iter().zip(rule.weights()) {
                    c.push(axis.lo + (e as f64 + xi) * h);
                    w.push(wi * h);
                }
            }
            coords.push(c);
            weights.push(w);
        }
        Self { coords, weights }
    }

    pub fn shape(&self) -> Vec<usize> {
        self.coords.iter().map(Vec::len).collect()
    }
}

/// Integrates a quadrature-point line against the hat functions.
fn contract_line(rule: &QuadratureRule, h: f64, src: &[f64], dst: &mut [f64]) {
    let q = rule.len();
    for (j, out) in dst.iter_mut().enumerate() {
        let rising = &src[j * q..(j + 1) * q];
        let falling = &src[(j + 1) * q..(j + 2) * q];
        let mut acc = 0.0;
        for p in 0..q {
            let xi = rule.points()[p];
            acc += rule.weights()[p] * (xi * rising[p] + (1.0 - xi) * falling[p]);
        }
        *out = h * acc;
    }
}

/// Load vector `(f(t), φ_j)` for every interior node.
pub fn load_vector(
    grid: &Arc<TensorGrid>,
    f: &(dyn Fn(f64, &[f64]) -> f64 + Sync),
    t: f64,
    rule: &QuadratureRule,
) -> Result<NodalField> {
    assemble(grid, rule, Some(t), |x| f(t, x))
}

/// Load vector `(g, φ_j)` of a time-independent function.
pub fn load_vector_spatial(
    grid: &Arc<TensorGrid>,
    g: &(dyn Fn(&[f64]) -> f64 + Sync),
    rule: &QuadratureRule,
) -> Result<NodalField> {
    assemble(grid, rule, None, g)
}

fn assemble(
    grid: &Arc<TensorGrid>,
    rule: &QuadratureRule,
    t: Option<f64>,
    f: impl Fn(&[f64]) -> f64 + Sync,
) -> Result<NodalField> {
    let qg = QuadGrid::new(grid, rule);
    let dim = grid.dim();
    let last = dim - 1;
    let nodes = grid.shape();
    let quad_shape = qg.shape();
    let slab_quad = &quad_shape[..last];
    let slab_len: usize = nodes[..last].iter().product();

    // Evaluate one quadrature plane of the last direction at a time and
    // contract the leading directions immediately; memory stays at
    // `q * nodes`.
    let mut partial = vec![0.0; slab_len * quad_shape[last]];
    let outcomes: Vec<Result<()>> = partial
        .par_chunks_mut(slab_len)
        .enumerate()
        .map(|(r, out)| {
            let mut values = vec![0.0; tensor::size(slab_quad)];
            let mut x = vec![0.0; dim];
            x[last] = qg.coords[last][r];
            let mut bad = None;
            tensor::for_each_index(slab_quad, |flat, idx| {
                for a in 0..last {
                    x[a] = qg.coords[a][idx[a]];
                }
                let v = f(&x);
                if !v.is_finite() && bad.is_none() {
                    bad = Some((x.clone(), v));
                }
                values[flat] = v;
            });
            if let Some((x, value)) = bad {
                return Err(Error::NonFinite {
                    what: "source value",
                    t,
                    x,
                    value,
                });
            }
            let mut shape = slab_quad.to_vec();
            for a in 0..last {
                let h = grid.axis(a).spacing();
                values = tensor::map_axis(&values, &shape, a, nodes[a], || (), |_, s, d| {
                    contract_line(rule, h, s, d)
                });
                shape[a] = nodes[a];
            }
            out.copy_from_slice(&values);
            Ok(())
        })
        .collect();
    outcomes.into_iter().collect::<Result<()>>()?;

    let mut shape = nodes.clone();
    shape[last] = quad_shape[last];
    let h = grid.axis(last).spacing();
    let values = tensor::map_axis(&partial, &shape, last, nodes[last], || (), |_, s, d| {
        contract_line(rule, h, s, d)
    });
    Ok(NodalField::from_raw(grid.clone(), values))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_source_1d() {
        let g = Arc::new(TensorGrid::new(&[(0.0, 1.0)], &[7]).unwrap());
        for q in 1..=4 {
            let rule = QuadratureRule::gauss_legendre(q).unwrap();
            let l = load_vector(&g, &|_, _| 1.0, 0.0, &rule).unwrap();
            for v in l.values() {
                assert!((v - 0.125).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn constant_source_2d_and_3d() {
        let g = Arc::new(TensorGrid::new(&[(0.25, 1.25), (0.125, 0.625)], &[7, 3]).unwrap());
        let l = load_vector_spatial(&g, &|_| 1.0, &QuadratureRule::default()).unwrap();
        for v in l.values() {
            assert!((v - 0.125 * 0.125).abs() < 1e-15);
        }
        let g = Arc::new(TensorGrid::new(&[(0.0, 1.0), (0.0, 2.0), (0.0, 3.0)], &[3, 3, 5]).unwrap());
        let l = load_vector_spatial(&g, &|_| 2.0, &QuadratureRule::default()).unwrap();
        for v in l.values() {
            assert!((v - 2.0 * 0.25 * 0.5 * 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn linear_source_is_exact() {
        // (x, φ_j) = h x_j for interior hats.
        let g = Arc::new(TensorGrid::new(&[(0.0, 1.0)], &[4]).unwrap());
        let l = load_vector_spatial(&g, &|x| x[0], &QuadratureRule::gauss_legendre(1).unwrap())
            .unwrap();
        for (j, v) in l.values().iter().enumerate() {
            let xj = (j + 1) as f64 * 0.2;
            assert!((v - 0.2 * xj).abs() < 1e-15);
        }
    }

    #[test]
    fn non_finite_source_reports_coordinates() {
        let g = Arc::new(TensorGrid::new(&[(0.0, 1.0), (0.0, 1.0)], &[3, 3]).unwrap());
        let err = load_vector(
            &g,
            &|_, x| if x[1] > 0.9 { f64::NAN } else { 0.0 },
            0.5,
            &QuadratureRule::default(),
        )
        .unwrap_err();
        match err {
            Error::NonFinite { t, x, .. } => {
                assert_eq!(t, Some(0.5));
                assert!(x[1] > 0.9);
            }
            e => panic!("unexpected {e}"),
        }
    }
}
