/// Below this magnitude the Taylor series is used; above it, upward
/// recurrence from `e^z`.
const TAYLOR_RADIUS: f64 = 1.0;

fn factorial(j: usize) -> f64 {
    (1..=j).fold(1.0, |acc, k| acc * k as f64)
}

/// `φ_j(z) = ∫₀¹ e^{z(1-θ)} θ^{j-1}/(j-1)! dθ`, with `φ_0(z) = e^z`.
///
/// Meant for `z ≤ 0`, the only arguments that arise for a positive
/// definite operator.
pub fn phi(j: usize, z: f64) -> f64 {
    if z.abs() < TAYLOR_RADIUS {
        phi_taylor(j, z)
    } else {
        phi_recurrence(j, z)[j]
    }
}

/// `[φ_0(z), …, φ_max(z)]`.
pub fn phi_all(max: usize, z: f64) -> Vec<f64> {
    if z.abs() < TAYLOR_RADIUS {
        (0..=max).map(|j| phi_taylor(j, z)).collect()
    } else {
        phi_recurrence(max, z)
    }
}

/// `Σ_{m≥0} z^m / (m + j)!`, truncated once terms drop below `1e-20` of
/// the running sum.
pub fn phi_taylor(j: usize, z: f64) -> f64 {
    let mut term = 1.0 / factorial(j);
    let mut sum = term;
    let mut m = 0usize;
    loop {
        m += 1;
        term *= z / (m + j) as f64;
        sum += term;
        if term.abs() <= 1e-20 * sum.abs() || m > 200 {
            return sum;
        }
    }
}

/// `φ_{j+1}(z) = (φ_j(z) - 1/j!) / z` starting from `φ_0 = e^z`. Cancels
/// badly for small `|z|`.
pub fn phi_recurrence(max: usize, z: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(max + 1);
    out.push(z.exp());
    let mut inv_fact = 1.0;
    for j in 0..max {
        let next = (out[j] - inv_fact) / z;
        out.push(next);
        inv_fact /= (j + 1) as f64;
    }
    out
}
