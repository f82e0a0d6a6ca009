use crate::{Error, Result};

/// Gauss–Legendre rule on the reference interval `[0, 1]`, applied per
/// direction as a tensor product.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl Default for QuadratureRule {
    fn default() -> Self {
        Self::gauss_legendre(Self::DEFAULT_POINTS).expect("default rule")
    }
}

impl QuadratureRule {
    pub const DEFAULT_POINTS: usize = 3;
    pub const MAX_POINTS: usize = 64;

    /// `q` point rule, exact for polynomials of degree `2q - 1`.
    pub fn gauss_legendre(q: usize) -> Result<Self> {
        if q == 0 || q > Self::MAX_POINTS {
            return Err(Error::InvalidQuadrature(format!(
                "points per direction must be in 1..={}, got {q}",
                Self::MAX_POINTS
            )));
        }
        let mut points = vec![0.0; q];
        let mut weights = vec![0.0; q];
        // Newton iteration on P_q over [-1, 1], then map to [0, 1].
        for i in 0..(q + 1) / 2 {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(q, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(q, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            points[i] = 0.5 * (1.0 - x);
            points[q - 1 - i] = 0.5 * (1.0 + x);
            weights[i] = 0.5 * w;
            weights[q - 1 - i] = 0.5 * w;
        }
        if q % 2 == 1 {
            points[q / 2] = 0.5;
        }
        Ok(Self { points, weights })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integrates `f` over `[a, b]` with this rule on a single element.
    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let h = b - a;
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(a + h * x))
            .sum::<f64>()
            * h
    }
}

/// Legendre polynomial `P_n(x)` and its derivative.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_one() {
        for q in 1..=20 {
            let r = QuadratureRule::gauss_legendre(q).unwrap();
            let s: f64 = r.weights().iter().sum();
            assert!((s - 1.0).abs() < 1e-14, "q = {q}: {s}");
            assert!(r.points().windows(2).all(|w| w[0] < w[1]));
            assert!(r.points().iter().all(|&x| x > 0.0 && x < 1.0));
        }
    }

    #[test]
    fn exact_up_to_degree_2q_minus_1() {
        for q in 1..=10 {
            let r = QuadratureRule::gauss_legendre(q).unwrap();
            for deg in 0..=(2 * q - 1) {
                let approx = r.integrate(0.0, 1.0, |x| x.powi(deg as i32));
                let exact = 1.0 / (deg as f64 + 1.0);
                assert!((approx - exact).abs() < 1e-14, "q={q} deg={deg}");
            }
            let deg = 2 * q;
            let approx = r.integrate(0.0, 1.0, |x| x.powi(deg as i32));
            assert!((approx - 1.0 / (deg as f64 + 1.0)).abs() > 1e-16);
        }
    }

    #[test]
    fn three_point_rule_abscissae() {
        let r = QuadratureRule::default();
        let s = (0.6f64).sqrt();
        assert!((r.points()[0] - 0.5 * (1.0 - s)).abs() < 1e-15);
        assert!((r.weights()[1] - 4.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_zero_points() {
        assert!(QuadratureRule::gauss_legendre(0).is_err());
    }
}
