//! Axis-wise line operators on flat tensors stored with axis 0 fastest.

use rayon::prelude::*;

pub(crate) fn size(shape: &[usize]) -> usize {
    shape.iter().product()
}

/// Applies `op` to every line along `axis`, replacing that axis' extent with
/// `out_len`. Lines are independent, so the result does not depend on how
/// the blocks are scheduled.
pub(crate) fn map_axis<S, I, F>(
    data: &[f64],
    shape: &[usize],
    axis: usize,
    out_len: usize,
    init: I,
    op: F,
) -> Vec<f64>
where
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, &[f64], &mut [f64]) + Sync + Send,
{
    debug_assert_eq!(data.len(), size(shape));
    let len_in = shape[axis];
    let inner: usize = shape[..axis].iter().product();
    let outer: usize = shape[axis + 1..].iter().product();
    let mut out = vec![0.0; inner * out_len * outer];
    if out.is_empty() {
        return out;
    }

    if inner == 1 {
        out.par_chunks_mut(out_len)
            .zip(data.par_chunks(len_in))
            .for_each_init(&init, |state, (dst, src)| op(state, src, dst));
        return out;
    }

    out.par_chunks_mut(out_len * inner)
        .zip(data.par_chunks(len_in * inner))
        .for_each_init(
            || (init(), vec![0.0; len_in], vec![0.0; out_len]),
            |(state, line_in, line_out), (dst, src)| {
                for i in 0..inner {
                    for (l, v) in line_in.iter_mut().enumerate() {
                        *v = src[l * inner + i];
                    }
                    op(state, line_in, line_out);
                    for (l, v) in line_out.iter().enumerate() {
                        dst[l * inner + i] = *v;
                    }
                }
            },
        );
    out
}

/// Visits every multi-index of `shape` in storage order.
pub(crate) fn for_each_index(shape: &[usize], mut visit: impl FnMut(usize, &[usize])) {
    let total = size(shape);
    let mut idx = vec![0usize; shape.len()];
    for flat in 0..total {
        visit(flat, &idx);
        for (a, i) in idx.iter_mut().enumerate() {
            *i += 1;
            if *i < shape[a] {
                break;
            }
            *i = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_axis_matches_manual_strides() {
        // shape 2x3, axis 1 reversed
        let data = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        let out = map_axis(&data, &[2, 3], 1, 3, || (), |_, src, dst| {
            for (d, s) in dst.iter_mut().zip(src.iter().rev()) {
                *d = *s;
            }
        });
        assert_eq!(out, vec![4.0, 5.0, 2.0, 3.0, 0.0, 1.0]);

        let summed = map_axis(&data, &[2, 3], 0, 1, || (), |_, src, dst| {
            dst[0] = src.iter().sum();
        });
        assert_eq!(summed, vec![1.0, 5.0, 9.0]);
    }

    #[test]
    fn index_order_is_axis_zero_fastest() {
        let mut seen = Vec::new();
        for_each_index(&[2, 2], |flat, idx| seen.push((flat, idx.to_vec())));
        assert_eq!(
            seen,
            vec![
                (0, vec![0, 0]),
                (1, vec![1, 0]),
                (2, vec![0, 1]),
                (3, vec![1, 1])
            ]
        );
    }
}
