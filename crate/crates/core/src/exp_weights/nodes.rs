use super::phi_all;
use crate::{Error, Result};

/// Where equispaced nodes sit inside the unit step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodePlacement {
    /// `c_i = (i-1)/s`.
    #[default]
    Left,
    /// `c_i = (i-1)/(s-1)`, both ends included.
    Closed,
}

/// Distinct interpolation nodes `c_1 < … < c_s` in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StageNodes {
    nodes: Vec<f64>,
}

impl StageNodes {
    /// Smallest admissible gap between consecutive nodes; closer nodes make
    /// the Vandermonde system numerically singular.
    pub const MIN_GAP: f64 = 1e-6;

    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidNodes("at least one node is required".into()));
        }
        if let Some(c) = nodes.iter().find(|c| !(0.0..=1.0).contains(*c)) {
            return Err(Error::InvalidNodes(format!("node {c} is outside [0, 1]")));
        }
        if let Some(w) = nodes.windows(2).find(|w| !(w[1] - w[0] >= Self::MIN_GAP)) {
            return Err(Error::InvalidNodes(format!(
                "nodes must be strictly increasing with gaps of at least {}, got {} then {}",
                Self::MIN_GAP,
                w[0],
                w[1]
            )));
        }
        Ok(Self { nodes })
    }

    /// `c_i = (i-1)/s`: equispaced, starting at the left end of the step.
    pub fn uniform(s: usize) -> Result<Self> {
        Self::placed(s, NodePlacement::Left)
    }

    /// `{0}` for one stage, otherwise `c_i = (i-1)/(s-1)`.
    pub fn closed(s: usize) -> Result<Self> {
        Self::placed(s, NodePlacement::Closed)
    }

    pub fn placed(s: usize, placement: NodePlacement) -> Result<Self> {
        match (s, placement) {
            (0, _) => Err(Error::InvalidNodes("at least one stage is required".into())),
            (1, _) => Self::new(vec![0.0]),
            (_, NodePlacement::Left) => Self::new((0..s).map(|i| i as f64 / s as f64).collect()),
            (_, NodePlacement::Closed) => Self::new((0..s).map(|i| i as f64 / (s - 1) as f64).collect()),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.nodes
    }
}

/// Monomial coefficients of the Lagrange basis: `l_i(θ) = Σ_j a[i][j] θ^j`.
pub fn lagrange_monomial_matrix(nodes: &StageNodes) -> Vec<Vec<f64>> {
    let c = nodes.as_slice();
    let s = c.len();
    (0..s)
        .map(|i| {
            let mut poly = vec![0.0; s];
            poly[0] = 1.0;
            let mut deg = 0;
            for (m, &cm) in c.iter().enumerate() {
                if m == i {
                    continue;
                }
                let denom = c[i] - cm;
                // poly *= (θ - c_m) / (c_i - c_m)
                for d in (0..=deg + 1).rev() {
                    let lower = if d > 0 { poly[d - 1] } else { 0.0 };
                    poly[d] = (lower - cm * poly[d]) / denom;
                }
                deg += 1;
            }
            poly
        })
        .collect()
}

/// Exponential quadrature weights `b_i(z) = ∫₀¹ e^{z(1-θ)} l_i(θ) dθ`,
/// expanded as `Σ_j a_ij · j! · φ_{j+1}(z)`.
pub fn weights_b(nodes: &StageNodes, z: f64) -> Vec<f64> {
    let a = lagrange_monomial_matrix(nodes);
    weights_from_matrix(&a, z)
}

pub(crate) fn weights_from_matrix(a: &[Vec<f64>], z: f64) -> Vec<f64> {
    let s = a.len();
    let phis = phi_all(s, z);
    // j! φ_{j+1}(z) = ∫₀¹ e^{z(1-θ)} θ^j dθ
    let mut moments = Vec::with_capacity(s);
    let mut fact = 1.0;
    for j in 0..s {
        if j > 0 {
            fact *= j as f64;
        }
        moments.push(fact * phis[j + 1]);
    }
    a.iter()
        .map(|row| row.iter().zip(&moments).map(|(c, m)| c * m).sum())
        .collect()
}
