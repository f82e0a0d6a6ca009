//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};

const GK_NODES: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const K_WEIGHTS: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const G_WEIGHTS: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn kronrod(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let fc = f(c);
    let mut k = K_WEIGHTS[7] * fc;
    let mut g = G_WEIGHTS[3] * fc;
    for i in 0..7 {
        let d = r * GK_NODES[i];
        let s = f(c - d) + f(c + d);
        k += K_WEIGHTS[i] * s;
        if i % 2 == 1 {
            g += G_WEIGHTS[i / 2] * s;
        }
    }
    (k * r, ((k - g) * r).abs())
}

/// Adaptive Gauss–Kronrod (7/15) quadrature to absolute tolerance `tol`.
pub fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (v, err) = kronrod(f, a, b);
        if err <= tol || depth == 0 || (b - a) < 1e-15 * (1.0 + a.abs()) {
            return v;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, 0.5 * tol, depth - 1) + rec(f, m, b, 0.5 * tol, depth - 1)
    }
    rec(f, a, b, tol, 60)
}

/// `∫₀¹ e^{z(1-θ)} g(θ) dθ`, splitting off the boundary layer at `θ = 1`.
pub fn exp_weighted(z: f64, g: &dyn Fn(f64) -> f64, tol: f64) -> f64 {
    let f = |th: f64| (z * (1.0 - th)).exp() * g(th);
    let layer = (60.0 / z.abs()).min(1.0);
    let cut = 1.0 - layer;
    let mut v = adaptive(&f, cut, 1.0, tol / 2.0);
    if cut > 0.0 {
        v += adaptive(&f, 0.0, cut, tol / 2.0);
    }
    v
}

/// `l_i(θ)` from the product formula.
pub fn lagrange(nodes: &[f64], i: usize, th: f64) -> f64 {
    nodes
        .iter()
        .enumerate()
        .filter(|&(m, _)| m != i)
        .map(|(_, &c)| (th - c) / (nodes[i] - c))
        .product()
}

/// `b_i(z)` straight from its defining integral.
pub fn weight_by_quadrature(nodes: &[f64], i: usize, z: f64) -> f64 {
    exp_weighted(z, &|th| lagrange(nodes, i, th), 1e-15)
}

/// Composite Gauss–Legendre with `panels` equal panels of `gl` points.
pub fn composite_gauss(f: &dyn Fn(f64) -> f64, a: f64, b: f64, panels: usize, gl: usize) -> f64 {
    let (x, w) = gauss_legendre(gl);
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|p| {
            let lo = a + p as f64 * h;
            x.iter().zip(&w).map(|(xi, wi)| wi * f(lo + 0.5 * h * (xi + 1.0))).sum::<f64>() * 0.5 * h
        })
        .sum()
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Golub–Welsch.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut j = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = k as f64 / ((4 * k * k - 1) as f64).sqrt();
        j[(k, k - 1)] = b;
        j[(k - 1, k)] = b;
    }
    let eig = j.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| (eig.eigenvalues[k], 2.0 * eig.eigenvectors[(0, k)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    pairs.into_iter().unzip()
}

/// 1D linear FE mass and stiffness matrices on `n` interior nodes.
pub fn dense_fem(n: usize, h: f64, d: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut m = DMatrix::zeros(n, n);
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = 4.0 * h / 6.0;
        k[(i, i)] = 2.0 * d / h;
        if i + 1 < n {
            m[(i, i + 1)] = h / 6.0;
            m[(i + 1, i)] = h / 6.0;
            k[(i, i + 1)] = -d / h;
            k[(i + 1, i)] = -d / h;
        }
    }
    (m, k)
}

/// Sorted generalized eigenvalues of `K v = λ M v` via Cholesky reduction.
pub fn generalized_eigenvalues(k: &DMatrix<f64>, m: &DMatrix<f64>) -> Vec<f64> {
    let l = m.clone().cholesky().expect("mass is SPD").l();
    let linv = l.clone().try_inverse().expect("invertible");
    let c = &linv * k * linv.transpose();
    let c = 0.5 * (&c + c.transpose());
    let mut ev: Vec<f64> = c.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// `S_{ij} = sin(ijπ/(n+1))`, 1-based indices.
pub fn sine_matrix(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| {
        ((i + 1) as f64 * (j + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).sin()
    })
}

pub fn dense_solve(a: &DMatrix<f64>, b: &[f64]) -> Vec<f64> {
    let x = a.clone().lu().solve(&DVector::from_column_slice(b)).expect("nonsingular");
    x.iter().copied().collect()
}

/// `(f, φ_j)` on a uniform 1D grid by adaptive quadrature over each
/// element of the support.
pub fn hat_load(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let h = (hi - lo) / (n + 1) as f64;
    (1..=n)
        .map(|j| {
            let xj = lo + j as f64 * h;
            let up = |x: f64| f(x) * (x - (xj - h)) / h;
            let down = |x: f64| f(x) * ((xj + h) - x) / h;
            adaptive(&up, xj - h, xj, 1e-16) + adaptive(&down, xj, xj + h, 1e-16)
        })
        .collect()
}

pub fn max_rel(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}
