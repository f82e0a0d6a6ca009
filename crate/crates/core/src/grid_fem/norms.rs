use rayon::prelude::*;

use super::load::QuadGrid;
use super::{NodalField, QuadratureRule};
use crate::{tensor, Error, Result};

/// Evaluates the multilinear interpolant of a nodal line at the quadrature
/// points, using the zero boundary values.
fn interpolate_line(rule: &QuadratureRule, src: &[f64], dst: &mut [f64]) {
    let n = src.len();
    let q = rule.len();
    for e in 0..=n {
        let left = if e == 0 { 0.0 } else { src[e - 1] };
        let right = if e == n { 0.0 } else { src[e] };
        for (p, &xi) in rule.points().iter().enumerate() {
            dst[e * q + p] = (1.0 - xi) * left + xi * right;
        }
    }
}

/// `‖u_h - exact‖_{L²}` with `u_h` the multilinear interpolant of `field`,
/// integrated by the tensor Gauss rule cell by cell.
pub fn l2_error(
    field: &NodalField,
    exact: &(dyn Fn(&[f64]) -> f64 + Sync),
    rule: &QuadratureRule,
) -> Result<f64> {
    let grid = field.grid();
    let qg = QuadGrid::new(grid, rule);
    let dim = grid.dim();
    let last = dim - 1;
    let nodes = grid.shape();
    let quad_shape = qg.shape();
    let slab_quad = &quad_shape[..last];
    let slab_len: usize = nodes[..last].iter().product();

    let planes = tensor::map_axis(field.values(), &nodes, last, quad_shape[last], || (), |_, s, d| {
        interpolate_line(rule, s, d)
    });

    let partial: Vec<Result<f64>> = planes
        .par_chunks(slab_len)
        .enumerate()
        .map(|(r, plane)| {
            let mut values = plane.to_vec();
            let mut shape = nodes[..last].to_vec();
            for a in 0..last {
                values = tensor::map_axis(&values, &shape, a, quad_shape[a], || (), |_, s, d| {
                    interpolate_line(rule, s, d)
                });
                shape[a] = quad_shape[a];
            }
            let mut x = vec![0.0; dim];
            x[last] = qg.coords[last][r];
            let w_last = qg.weights[last][r];
            let mut acc = 0.0;
            let mut bad = None;
            tensor::for_each_index(slab_quad, |flat, idx| {
                let mut w = w_last;
                for a in 0..last {
                    x[a] = qg.coords[a][idx[a]];
                    w *= qg.weights[a][idx[a]];
                }
                let e = exact(&x);
                if !e.is_finite() && bad.is_none() {
                    bad = Some((x.clone(), e));
                }
                let d = values[flat] - e;
                acc += w * d * d;
            });
            match bad {
                Some((x, value)) => Err(Error::NonFinite {
                    what: "reference value",
                    t: None,
                    x,
                    value,
                }),
                None => Ok(acc),
            }
        })
        .collect();

    let mut total = 0.0;
    for p in partial {
        total += p?;
    }
    Ok(total.sqrt())
}

/// Continuous L² norm of the interpolant of `field`.
pub fn l2_norm(field: &NodalField, rule: &QuadratureRule) -> f64 {
    l2_error(field, &|_| 0.0, rule).expect("zero reference is finite")
}

/// Largest nodal deviation `max_j |field_j - exact(x_j)|`.
pub fn linf_error(field: &NodalField, exact: &dyn Fn(&[f64]) -> f64) -> f64 {
    let mut worst: f64 = 0.0;
    let values = field.values();
    field.grid().for_each_node(|i, x| {
        let d = (values[i] - exact(x)).abs();
        // NaN sticks as the worst case
        if d > worst || (d.is_nan() && !worst.is_nan()) {
            worst = d;
        }
    });
    worst
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::grid_fem::TensorGrid;

    #[test]
    fn zero_field_zero_exact() {
        let g = Arc::new(TensorGrid::new(&[(0.0, 1.0), (0.0, 1.0)], &[4, 5]).unwrap());
        let f = NodalField::zeros(g);
        assert_eq!(l2_error(&f, &|_| 0.0, &QuadratureRule::default()).unwrap(), 0.0);
        assert_eq!(linf_error(&f, &|_| 0.0), 0.0);
    }

    #[test]
    fn reproduces_functions_in_the_space() {
        // Hat-shaped tent functions are multilinear on the mesh with zero trace.
        let g = Arc::new(TensorGrid::new(&[(0.0, 1.0), (0.0, 2.0)], &[3, 3]).unwrap());
        let tent = |x: &[f64]| {
            let a = 1.0 - (x[0] - 0.5).abs() / 0.5;
            let b = 1.0 - (x[1] - 1.0).abs() / 1.0;
            3.0 * a.max(0.0) * b.max(0.0)
        };
        let f = NodalField::interpolate(g, tent).unwrap();
        let e = l2_error(&f, &tent, &QuadratureRule::default()).unwrap();
        assert!(e <= 1e-14, "{e}");
    }

    #[test]
    fn linf_definitions() {
        let g = Arc::new(TensorGrid::new(&[(0.0, 1.0)], &[9]).unwrap());
        let exact = |x: &[f64]| (std::f64::consts::PI * x[0]).sin();
        let mut f = NodalField::interpolate(g.clone(), exact).unwrap();
        assert_eq!(linf_error(&f, &exact), 0.0);
        f.values_mut()[4] += 1e-3;
        assert!((linf_error(&f, &exact) - 1e-3).abs() < 1e-15);

        let vals: Vec<f64> = (0..9).map(|i| ((i * 7) % 5) as f64 - 2.5).collect();
        let f = NodalField::new(g, vals.clone()).unwrap();
        let m = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert_eq!(linf_error(&f, &|_| 0.0), m);
    }

    #[test]
    fn l2_of_constant_interpolant_1d() {
        // u_h = hat at the single node on [0,1]: ∫ φ² = h·2/3 = 1/3 with h = 1/2.
        let g = Arc::new(TensorGrid::new(&[(0.0, 1.0)], &[1]).unwrap());
        let f = NodalField::new(g, vec![1.0]).unwrap();
        let n = l2_norm(&f, &QuadratureRule::default());
        assert!((n * n - 1.0 / 3.0).abs() < 1e-15);
    }
}
