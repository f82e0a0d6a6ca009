//! Sequential exponential Runge–Kutta stepping in spectral space.
//!
//! One step of size `Δτ` from `τ_n` is, per eigenmode `k`,
//!
//! ```text
//! u_k ← e^{-Δτ μ_k} u_k + Δτ Σ_i b_i(-Δτ μ_k) ĝ_{i,k},   ĝ_i = P_h f(τ_n + c_i Δτ)
//! ```
//!
//! which is exact for homogeneous problems and unconditionally stable.

use std::sync::Arc;

use crate::exp_weights::{StageNodes, WeightTable};
use crate::grid_fem::{
    l2_error, linf_error, load_vector, load_vector_spatial, NodalField, QuadratureRule,
};
use crate::problems::Source;
use crate::spectral::{SpectralBasis, SpectralField};
use crate::{Error, Result};

/// How `f(t)` enters the finite element space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SourceMode {
    /// `L²` projection through a quadrature load vector and the diagonal
    /// mass inverse.
    #[default]
    Projection,
    /// Nodal interpolation; cheaper, and no longer the `L²` projection.
    NodalInterpolation,
}

enum StageLoad<'a> {
    Zero,
    Scaled(f64, &'a SpectralField),
    Field(SpectralField),
}

/// Maps the source at a given time to spectral coefficients of `P_h f(t)`.
pub struct SourceProjector {
    basis: Arc<SpectralBasis>,
    rule: QuadratureRule,
    source: Source,
    mode: SourceMode,
    profile: Option<SpectralField>,
}

impl std::fmt::Debug for SourceProjector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SourceProjector")
            .field("source", &self.source)
            .field("mode", &self.mode)
            .finish()
    }
}

impl SourceProjector {
    pub fn new(
        basis: Arc<SpectralBasis>,
        source: Source,
        rule: QuadratureRule,
        mode: SourceMode,
    ) -> Result<Self> {
        let mut this = Self {
            basis,
            rule,
            source,
            mode,
            profile: None,
        };
        if let Source::Separable { profile, .. } = &this.source {
            let g = profile.clone();
            this.profile = Some(this.project_space(None, &*g)?);
        }
        Ok(this)
    }

    pub fn basis(&self) -> &Arc<SpectralBasis> {
        &self.basis
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn source(&self) -> &Source {
        &self.source
    }

    pub fn mode(&self) -> SourceMode {
        self.mode
    }

    fn project_space(
        &self,
        t: Option<f64>,
        g: &(dyn Fn(&[f64]) -> f64 + Sync),
    ) -> Result<SpectralField> {
        let grid = self.basis.grid();
        match self.mode {
            SourceMode::Projection => {
                let load = load_vector_spatial(grid, g, &self.rule).map_err(|e| with_time(e, t))?;
                Ok(self.basis.project_l2(&load))
            }
            SourceMode::NodalInterpolation => {
                let nodal = NodalField::interpolate(grid.clone(), g).map_err(|e| with_time(e, t))?;
                Ok(self.basis.forward(&nodal))
            }
        }
    }

    fn stage(&self, t: f64) -> Result<StageLoad<'_>> {
        match &self.source {
            Source::Zero => Ok(StageLoad::Zero),
            Source::Separable { amplitude, .. } => {
                let a = amplitude(t);
                if !a.is_finite() {
                    return Err(Error::NonFinite {
                        what: "source amplitude",
                        t: Some(t),
                        x: Vec::new(),
                        value: a,
                    });
                }
                Ok(StageLoad::Scaled(a, self.profile.as_ref().expect("separable profile")))
            }
            Source::General(f) => match self.mode {
                SourceMode::Projection => {
                    let load = load_vector(self.basis.grid(), &**f, t, &self.rule)?;
                    Ok(StageLoad::Field(self.basis.project_l2(&load)))
                }
                SourceMode::NodalInterpolation => {
                    Ok(StageLoad::Field(self.project_space(Some(t), &|x| f(t, x))?))
                }
            },
        }
    }

    /// Spectral coefficients of `P_h f(t)`.
    pub fn project(&self, t: f64) -> Result<SpectralField> {
        Ok(match self.stage(t)? {
            StageLoad::Zero => SpectralField::zeros(self.basis.grid().clone()),
            StageLoad::Scaled(a, p) => {
                let mut out = p.clone();
                out.coeffs_mut().iter_mut().for_each(|c| *c *= a);
                out
            }
            StageLoad::Field(f) => f,
        })
    }
}

fn with_time(e: Error, t: Option<f64>) -> Error {
    match e {
        Error::NonFinite { what, x, value, .. } => Error::NonFinite { what, t, x, value },
        e => e,
    }
}

/// Spectral coefficients of `P_h u_0`.
pub fn project_initial(
    basis: &SpectralBasis,
    u0: &(dyn Fn(&[f64]) -> f64 + Sync),
    rule: &QuadratureRule,
) -> Result<SpectralField> {
    let load = load_vector_spatial(basis.grid(), u0, rule)?;
    Ok(basis.project_l2(&load))
}

/// `(L², L∞)` distances between the finite element function with spectral
/// coefficients `state` and `reference`.
pub fn solution_errors(
    basis: &SpectralBasis,
    rule: &QuadratureRule,
    state: &SpectralField,
    reference: &(dyn Fn(&[f64]) -> f64 + Sync),
) -> Result<(f64, f64)> {
    let nodal = basis.backward(state);
    let l2 = l2_error(&nodal, reference, rule)?;
    Ok((l2, linf_error(&nodal, reference)))
}

/// One exponential Runge–Kutta scheme with a fixed step; immutable and
/// shareable across threads.
#[derive(Debug, Clone)]
pub struct EifePropagator {
    source: Arc<SourceProjector>,
    table: Arc<WeightTable>,
}

impl EifePropagator {
    pub fn new(source: Arc<SourceProjector>, nodes: &StageNodes, step: f64) -> Result<Self> {
        let table = WeightTable::build(nodes, step, source.basis().eigenvalues())?;
        Ok(Self {
            source,
            table: Arc::new(table),
        })
    }

    /// Uses a precomputed table, which must belong to the same basis.
    pub fn with_table(source: Arc<SourceProjector>, table: Arc<WeightTable>) -> Result<Self> {
        if table.len() != source.basis().eigenvalues().len() {
            return Err(Error::ShapeMismatch {
                expected: source.basis().eigenvalues().len(),
                found: table.len(),
            });
        }
        Ok(Self { source, table })
    }

    pub fn step_size(&self) -> f64 {
        self.table.step()
    }

    pub fn stages(&self) -> usize {
        self.table.stages()
    }

    pub fn nodes(&self) -> &StageNodes {
        self.table.nodes()
    }

    pub fn table(&self) -> &Arc<WeightTable> {
        &self.table
    }

    pub fn source(&self) -> &Arc<SourceProjector> {
        &self.source
    }

    pub fn basis(&self) -> &Arc<SpectralBasis> {
        self.source.basis()
    }

    fn check(&self, state: &SpectralField) -> Result<()> {
        let expected = self.table.len();
        if state.coeffs().len() != expected {
            return Err(Error::ShapeMismatch {
                expected,
                found: state.coeffs().len(),
            });
        }
        Ok(())
    }

    /// Advances `state` from `t` to `t + Δτ` in place.
    pub fn step_in_place(&self, state: &mut SpectralField, t: f64) -> Result<()> {
        self.check(state)?;
        let dt = self.table.step();
        let decay = self.table.decay();
        let c = self.table.nodes().as_slice();
        let coeffs = state.coeffs_mut();
        for (u, e) in coeffs.iter_mut().zip(decay) {
            *u *= e;
        }

        let mut scaled: Vec<f64> = Vec::new();
        let mut profile: Option<&SpectralField> = None;
        for (i, &ci) in c.iter().enumerate() {
            let w = self.table.stage_weights(i);
            match self.source.stage(t + ci * dt)? {
                StageLoad::Zero => {}
                StageLoad::Scaled(a, p) => {
                    if scaled.is_empty() {
                        scaled = vec![0.0; w.len()];
                    }
                    for (s, wk) in scaled.iter_mut().zip(w) {
                        *s += a * wk;
                    }
                    profile = Some(p);
                }
                StageLoad::Field(g) => {
                    for ((u, wk), gk) in coeffs.iter_mut().zip(w).zip(g.coeffs()) {
                        *u += dt * wk * gk;
                    }
                }
            }
        }
        if let Some(p) = profile {
            for ((u, s), pk) in coeffs.iter_mut().zip(&scaled).zip(p.coeffs()) {
                *u += dt * s * pk;
            }
        }
        Ok(())
    }

    pub fn step(&self, state: &SpectralField, t: f64) -> Result<SpectralField> {
        let mut out = state.clone();
        self.step_in_place(&mut out, t)?;
        Ok(out)
    }

    /// `n_steps` uniform steps from `t0`.
    pub fn integrate(&self, u0: &SpectralField, t0: f64, n_steps: usize) -> Result<SpectralField> {
        self.integrate_from(u0, t0, 0, n_steps)
    }

    /// Steps `first..first + n_steps` of the uniform time grid
    /// `t_l = t0 + l·Δτ`. Computing every stage time from the global step
    /// index keeps partial sweeps bitwise identical to one long sweep.
    pub fn integrate_from(
        &self,
        state: &SpectralField,
        t0: f64,
        first: usize,
        n_steps: usize,
    ) -> Result<SpectralField> {
        if n_steps == 0 {
            return Err(Error::InvalidRun("at least one step is required".into()));
        }
        let mut out = state.clone();
        let dt = self.table.step();
        for l in first..first + n_steps {
            self.step_in_place(&mut out, t0 + l as f64 * dt)?;
        }
        Ok(out)
    }

    /// Like [`integrate_from`](Self::integrate_from) but records the state
    /// after every `every` steps, starting with the input.
    pub fn integrate_checkpoints(
        &self,
        state: &SpectralField,
        t0: f64,
        every: usize,
        count: usize,
    ) -> Result<Vec<SpectralField>> {
        if every == 0 {
            return Err(Error::InvalidRun("checkpoint spacing must be positive".into()));
        }
        let mut out = Vec::with_capacity(count + 1);
        out.push(state.clone());
        let mut cur = state.clone();
        let dt = self.table.step();
        for n in 0..count {
            for l in n * every..(n + 1) * every {
                self.step_in_place(&mut cur, t0 + l as f64 * dt)?;
            }
            out.push(cur.clone());
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_fem::TensorGrid;

    fn setup(n: usize, source: Source) -> Arc<SourceProjector> {
        let grid = Arc::new(TensorGrid::new(&[(0.0, 1.0)], &[n]).unwrap());
        let basis = Arc::new(SpectralBasis::build(grid, 1.0).unwrap());
        Arc::new(
            SourceProjector::new(basis, source, QuadratureRule::default(), SourceMode::Projection)
                .unwrap(),
        )
    }

    #[test]
    fn homogeneous_mode_decays_exactly() {
        let src = setup(15, Source::Zero);
        let prop = EifePropagator::new(src.clone(), &StageNodes::uniform(2).unwrap(), 0.1).unwrap();
        let mu = src.basis().eigenvalues().to_vec();
        let grid = src.basis().grid().clone();
        for k in [0, 7, 14] {
            let u = SpectralField::unit(grid.clone(), k);
            let out = prop.step(&u, 0.0).unwrap();
            for (j, v) in out.coeffs().iter().enumerate() {
                let expect = if j == k { (-0.1 * mu[k]).exp() } else { 0.0 };
                assert_eq!(*v, expect);
            }
            let fin = prop.integrate(&u, 0.0, 10).unwrap();
            let exact = (-mu[k]).exp();
            assert!((fin.coeffs()[k] - exact).abs() <= 1e-13 * exact);
        }
    }

    #[test]
    fn tiny_step_barely_moves() {
        let src = setup(7, Source::General(Arc::new(|t, x| (1.0 + t) * x[0])));
        let u0 = project_initial(src.basis(), &|x| x[0] * (1.0 - x[0]), src.rule()).unwrap();
        let mut prev = f64::INFINITY;
        for dt in [1e-4, 1e-8, 1e-12] {
            let prop = EifePropagator::new(src.clone(), &StageNodes::uniform(2).unwrap(), dt).unwrap();
            let d = prop.step(&u0, 0.0).unwrap().max_abs_diff(&u0);
            assert!(d < prev);
            prev = d;
        }
        assert!(prev < 1e-9);
    }

    #[test]
    fn evaluates_source_once_per_stage() {
        use std::sync::atomic::{AtomicUsize, Ordering};
        let calls = Arc::new(AtomicUsize::new(0));
        let seen = Arc::new(std::sync::Mutex::new(Vec::new()));
        let (c2, s2) = (calls.clone(), seen.clone());
        // 1 node, 1 point rule → 2 quadrature points per load vector
        let grid = Arc::new(TensorGrid::new(&[(0.0, 1.0)], &[1]).unwrap());
        let basis = Arc::new(SpectralBasis::build(grid, 1.0).unwrap());
        let src = Arc::new(
            SourceProjector::new(
                basis,
                Source::General(Arc::new(move |t, _| {
                    c2.fetch_add(1, Ordering::SeqCst);
                    s2.lock().unwrap().push(t);
                    1.0
                })),
                QuadratureRule::gauss_legendre(1).unwrap(),
                SourceMode::Projection,
            )
            .unwrap(),
        );
        let prop = EifePropagator::new(src.clone(), &StageNodes::closed(3).unwrap(), 0.5).unwrap();
        prop.step(&SpectralField::zeros(src.basis().grid().clone()), 1.0).unwrap();
        assert_eq!(calls.load(Ordering::SeqCst), 3 * 2);
        let mut times = seen.lock().unwrap().clone();
        times.dedup();
        assert_eq!(times, vec![1.0, 1.25, 1.5]);
    }

    #[test]
    fn never_amplifies_without_source() {
        let src = setup(31, Source::Zero);
        let u: Vec<f64> = (0..31).map(|k| ((k * 13) % 7) as f64 - 3.0).collect();
        let u = SpectralField::new(src.basis().grid().clone(), u).unwrap();
        for dt in [1e-3, 1.0, 1e3] {
            let prop = EifePropagator::new(src.clone(), &StageNodes::uniform(3).unwrap(), dt).unwrap();
            assert!(prop.step(&u, 0.0).unwrap().max_abs() <= u.max_abs());
        }
    }

    #[test]
    fn partial_sweeps_match_one_sweep_bitwise() {
        let src = setup(9, Source::General(Arc::new(|t, x| t.sin() + x[0])));
        let u0 = project_initial(src.basis(), &|x| x[0] * (1.0 - x[0]), src.rule()).unwrap();
        let prop = EifePropagator::new(src, &StageNodes::uniform(3).unwrap(), 0.1).unwrap();
        let whole = prop.integrate(&u0, 0.3, 6).unwrap();
        let a = prop.integrate_from(&u0, 0.3, 0, 2).unwrap();
        let b = prop.integrate_from(&a, 0.3, 2, 4).unwrap();
        assert_eq!(whole, b);
        let cps = prop.integrate_checkpoints(&u0, 0.3, 3, 2).unwrap();
        assert_eq!(cps.len(), 3);
        assert_eq!(cps[2], whole);
        assert!(prop.integrate(&u0, 0.0, 0).is_err());
    }

    #[test]
    fn separable_matches_general_path() {
        let amp = |t: f64| t.exp();
        let prof = |x: &[f64]| 2.0 + x[0] * (1.0 - x[0]);
        let sep = setup(
            15,
            Source::Separable {
                amplitude: Arc::new(amp),
                profile: Arc::new(prof),
            },
        );
        let gen = setup(15, Source::General(Arc::new(move |t, x| amp(t) * prof(x))));
        let nodes = StageNodes::uniform(3).unwrap();
        let u0 = project_initial(sep.basis(), &|x| x[0] * (1.0 - x[0]), sep.rule()).unwrap();
        let a = EifePropagator::new(sep, &nodes, 0.125).unwrap().integrate(&u0, 0.0, 8).unwrap();
        let b = EifePropagator::new(gen, &nodes, 0.125).unwrap().integrate(&u0, 0.0, 8).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-13 * a.max_abs());
    }
}
