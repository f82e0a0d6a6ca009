//! Result rows and their CSV encoding.

use std::io::Write;

use crate::Result;

pub const RESULT_HEADERS: [&str; 7] =
    ["method", "n_t", "grid", "l2_error", "linf_error", "rate", "wall_seconds"];

/// `7.3e-3` → `7.3000e-03`: five significant digits, two-digit exponent.
pub fn format_sci(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let s = format!("{v:.4e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

pub fn format_rate(rate: Option<f64>) -> String {
    rate.map(|r| format!("{r:.2}")).unwrap_or_default()
}

/// Observed order between two levels whose resolution differs by `ratio`.
pub fn convergence_rate(coarse_error: f64, fine_error: f64, ratio: f64) -> f64 {
    (coarse_error / fine_error).ln() / ratio.ln()
}

/// `log2(t1/t0) / log2(n1/n0)`.
pub fn growth_factor(t0: f64, t1: f64, nodes0: usize, nodes1: usize) -> f64 {
    (t1 / t0).log2() / (nodes1 as f64 / nodes0 as f64).log2()
}

/// `EIFE-s2`, `PEIFE-p2q3`.
pub fn method_tag(parareal: bool, p: usize, q: usize) -> String {
    if parareal {
        format!("PEIFE-p{p}q{q}")
    } else {
        format!("EIFE-s{q}")
    }
}

pub fn join_dims(v: &[usize]) -> String {
    v.iter().map(usize::to_string).collect::<Vec<_>>().join("x")
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub method: String,
    /// `N_T` for sequential runs, `NxM` for Parareal.
    pub n_t: String,
    /// Cells per direction, `NxxNy`.
    pub grid: String,
    pub l2_error: f64,
    pub linf_error: f64,
    pub rate: Option<f64>,
    pub wall_seconds: f64,
}

impl ResultRow {
    pub fn record(&self) -> [String; 7] {
        [
            self.method.clone(),
            self.n_t.clone(),
            self.grid.clone(),
            format_sci(self.l2_error),
            format_sci(self.linf_error),
            format_rate(self.rate),
            format!("{:.3}", self.wall_seconds),
        ]
    }
}

/// Fills in the rate column from successive L² errors, `ratios[i]` being
/// the refinement factor between level `i` and `i + 1`.
pub fn attach_rates(rows: &mut [ResultRow], ratios: &[f64]) {
    if let Some(first) = rows.first_mut() {
        first.rate = None;
    }
    for i in 1..rows.len() {
        let r = convergence_rate(rows[i - 1].l2_error, rows[i].l2_error, ratios[i - 1]);
        rows[i].rate = Some(r);
    }
}

pub fn write_csv<W: Write>(out: W, headers: &[&str], records: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(headers)?;
    for r in records {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_rows<W: Write>(out: W, rows: &[ResultRow]) -> Result<()> {
    let records: Vec<Vec<String>> = rows.iter().map(|r| r.record().to_vec()).collect();
    write_csv(out, &RESULT_HEADERS, &records)
}
