//! Parareal predictor–corrector around two exponential Runge–Kutta
//! propagators.
//!
//! The coarse propagator `G` takes one `p`-stage step per coarse interval;
//! the fine propagator `F^M` takes `M` substeps with `q ≥ p` stages. Each
//! iteration runs the `N` fine sweeps concurrently and then the sequential
//! correction
//!
//! ```text
//! U^{n+1,(k+1)} = F^M(U^{n,(k)}) + (G(U^{n,(k+1)}) - G(U^{n,(k)}))
//! ```
//!
//! The coarse difference is formed first, so once a checkpoint stops
//! changing the correction contributes an exact zero and the checkpoint is
//! bitwise equal to the sequential fine solution.

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use crate::eife::{project_initial, solution_errors, EifePropagator, SourceMode, SourceProjector};
use crate::exp_weights::{NodePlacement, StageNodes};
use crate::grid_fem::{QuadratureRule, TensorGrid};
use crate::problems::ProblemSpec;
use crate::spectral::{SpectralBasis, SpectralField};
use crate::{Error, Result};

/// Which iterations keep their checkpoint snapshots in the trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TraceRetention {
    #[default]
    None,
    LastOnly,
    Full,
}

/// Parareal parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct PararealRun {
    /// `N`, number of coarse intervals.
    pub coarse_intervals: usize,
    /// `M`, fine substeps per coarse interval.
    pub fine_substeps: usize,
    /// `p`, stages of the coarse propagator.
    pub coarse_stages: usize,
    /// `q`, stages of the fine propagator.
    pub fine_stages: usize,
    pub placement: NodePlacement,
    /// Iteration budget; `None` iterates until the tolerance is met.
    pub max_iterations: Option<usize>,
    /// Stop once the largest checkpoint increment (spectral max norm) is at
    /// most this; `0` disables the check.
    pub tolerance: f64,
    pub workers: usize,
    pub retention: TraceRetention,
    /// Also run the sequential fine propagator and report deviations from
    /// it in the trace.
    pub compare_reference: bool,
    /// Skip fine sweeps whose starting checkpoint did not change since the
    /// last iteration. Results are unaffected.
    pub reuse_unchanged: bool,
}

impl Default for PararealRun {
    fn default() -> Self {
        Self {
            coarse_intervals: 4,
            fine_substeps: 1,
            coarse_stages: 2,
            fine_stages: 2,
            placement: NodePlacement::Left,
            max_iterations: Some(4),
            tolerance: 0.0,
            workers: 1,
            retention: TraceRetention::None,
            compare_reference: false,
            reuse_unchanged: true,
        }
    }
}

impl PararealRun {
    pub fn new(n: usize, m: usize, p: usize, q: usize) -> Self {
        Self {
            coarse_intervals: n,
            fine_substeps: m,
            coarse_stages: p,
            fine_stages: q,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidRun(m));
        if self.coarse_intervals == 0 || self.fine_substeps == 0 {
            return fail("N and M must be at least 1".into());
        }
        if self.coarse_stages == 0 || self.coarse_stages > self.fine_stages {
            return fail(format!(
                "stage counts must satisfy 1 <= p <= q, got p = {}, q = {}",
                self.coarse_stages, self.fine_stages
            ));
        }
        if self.workers == 0 {
            return fail("at least one worker is required".into());
        }
        if !(self.tolerance >= 0.0 && self.tolerance.is_finite()) {
            return fail(format!("tolerance must be finite and >= 0, got {}", self.tolerance));
        }
        if self.max_iterations.is_none() && self.tolerance == 0.0 {
            return fail("either an iteration budget or a positive tolerance is required".into());
        }
        Ok(())
    }

    /// Total number of fine steps `N·M`.
    pub fn fine_steps(&self) -> usize {
        self.coarse_intervals * self.fine_substeps
    }
}

/// Per-iteration diagnostics. Errors refer to the terminal checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub l2_error: Option<f64>,
    pub linf_error: Option<f64>,
    /// Deviation from the sequential fine solution at the terminal time.
    pub reference_l2: Option<f64>,
    pub reference_linf: Option<f64>,
    /// `max_n ‖U^{n,(k)} - U^{n,(k-1)}‖_∞`; absent for the coarse sweep.
    pub max_increment: Option<f64>,
    pub fine_seconds: f64,
    pub correction_seconds: f64,
    /// `U^{0,(k)}, …, U^{N,(k)}` when retained.
    pub snapshots: Option<Vec<SpectralField>>,
}

impl IterationRecord {
    pub fn wall_seconds(&self) -> f64 {
        self.fine_seconds + self.correction_seconds
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IterationTrace {
    pub records: Vec<IterationRecord>,
    /// Sequential fine terminal errors against the exact solution.
    pub fine_l2_error: Option<f64>,
    pub fine_linf_error: Option<f64>,
}

impl IterationTrace {
    /// Mean wall time of the corrector iterations (excluding the coarse
    /// sweep).
    pub fn mean_iteration_seconds(&self) -> Option<f64> {
        let it: Vec<f64> = self.records.iter().skip(1).map(IterationRecord::wall_seconds).collect();
        (!it.is_empty()).then(|| it.iter().sum::<f64>() / it.len() as f64)
    }
}

#[derive(Debug, Clone)]
pub struct PararealOutcome {
    /// `U^{0}, …, U^{N}` after the final iteration.
    pub checkpoints: Vec<SpectralField>,
    pub iterations: usize,
    pub trace: IterationTrace,
}

/// Everything needed to solve one problem on one grid.
pub struct PararealSolver {
    problem: ProblemSpec,
    run: PararealRun,
    rule: QuadratureRule,
    coarse: EifePropagator,
    fine: EifePropagator,
    initial: SpectralField,
    pool: rayon::ThreadPool,
}

impl PararealSolver {
    pub fn new(
        problem: &ProblemSpec,
        grid: Arc<TensorGrid>,
        run: PararealRun,
        rule: QuadratureRule,
        mode: SourceMode,
    ) -> Result<Self> {
        run.validate()?;
        if grid.dim() != problem.dim() {
            return Err(Error::InvalidProblem(format!(
                "{}-dimensional grid for a {}-dimensional problem",
                grid.dim(),
                problem.dim()
            )));
        }
        let basis = Arc::new(SpectralBasis::build(grid, problem.diffusion)?);
        let source = Arc::new(SourceProjector::new(
            basis.clone(),
            problem.source.clone(),
            rule.clone(),
            mode,
        )?);
        let coarse_step = problem.duration / run.coarse_intervals as f64;
        let fine_step = coarse_step / run.fine_substeps as f64;
        let coarse = EifePropagator::new(
            source.clone(),
            &StageNodes::placed(run.coarse_stages, run.placement)?,
            coarse_step,
        )?;
        let fine = EifePropagator::new(source, &StageNodes::placed(run.fine_stages, run.placement)?, fine_step)?;
        let initial = project_initial(&basis, &*problem.initial, &rule)?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(run.workers)
            .build()
            .map_err(|e| Error::InvalidRun(format!("cannot start worker pool: {e}")))?;
        Ok(Self {
            problem: problem.clone(),
            run,
            rule,
            coarse,
            fine,
            initial,
            pool,
        })
    }

    pub fn run(&self) -> &PararealRun {
        &self.run
    }

    pub fn basis(&self) -> &Arc<SpectralBasis> {
        self.fine.basis()
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn coarse(&self) -> &EifePropagator {
        &self.coarse
    }

    pub fn fine(&self) -> &EifePropagator {
        &self.fine
    }

    /// `P_h u_0`.
    pub fn initial(&self) -> &SpectralField {
        &self.initial
    }

    /// Coarse checkpoint time `T_n`.
    pub fn checkpoint_time(&self, n: usize) -> f64 {
        self.problem.t0 + n as f64 * self.coarse.step_size()
    }

    fn coarse_step(&self, state: &SpectralField, n: usize) -> Result<SpectralField> {
        self.coarse.step(state, self.checkpoint_time(n))
    }

    fn fine_sweep(&self, state: &SpectralField, n: usize) -> Result<SpectralField> {
        let m = self.run.fine_substeps;
        self.fine
            .integrate_from(state, self.problem.t0, n * m, m)
            .map_err(|e| Error::Worker {
                interval: n,
                source: Box::new(e),
            })
    }

    /// The fine propagator applied sequentially over all `N·M` steps,
    /// recorded at every `T_n`.
    pub fn sequential_fine_reference(&self) -> Result<Vec<SpectralField>> {
        self.fine.integrate_checkpoints(
            &self.initial,
            self.problem.t0,
            self.run.fine_substeps,
            self.run.coarse_intervals,
        )
    }

    /// Terminal errors `(L², L∞)` of a checkpoint against the exact solution.
    pub fn exact_errors(&self, state: &SpectralField) -> Result<Option<(f64, f64)>> {
        match &self.problem.exact {
            None => Ok(None),
            Some(exact) => {
                let t = self.problem.t_end();
                let e = exact.clone();
                solution_errors(self.basis(), &self.rule, state, &move |x| e(t, x)).map(Some)
            }
        }
    }

    fn record(
        &self,
        iteration: usize,
        checkpoints: &[SpectralField],
        reference: Option<&[SpectralField]>,
        max_increment: Option<f64>,
        fine_seconds: f64,
        correction_seconds: f64,
    ) -> Result<IterationRecord> {
        let last = checkpoints.last().expect("N >= 1");
        let errs = self.exact_errors(last)?;
        let ref_errs = match reference {
            Some(r) => {
                let mut diff = last.clone();
                for (d, b) in diff.coeffs_mut().iter_mut().zip(r.last().expect("N >= 1").coeffs()) {
                    *d -= b;
                }
                Some(solution_errors(self.basis(), &self.rule, &diff, &|_| 0.0)?)
            }
            None => None,
        };
        let snapshots = match self.run.retention {
            TraceRetention::None => None,
            TraceRetention::LastOnly | TraceRetention::Full => Some(checkpoints.to_vec()),
        };
        Ok(IterationRecord {
            iteration,
            l2_error: errs.map(|e| e.0),
            linf_error: errs.map(|e| e.1),
            reference_l2: ref_errs.map(|e| e.0),
            reference_linf: ref_errs.map(|e| e.1),
            max_increment,
            fine_seconds,
            correction_seconds,
            snapshots,
        })
    }

    pub fn solve(&self) -> Result<PararealOutcome> {
        let n_int = self.run.coarse_intervals;
        let reference = if self.run.compare_reference {
            Some(self.sequential_fine_reference()?)
        } else {
            None
        };
        let mut trace = IterationTrace::default();
        if let Some(r) = &reference {
            if let Some((l2, linf)) = self.exact_errors(r.last().expect("N >= 1"))? {
                trace.fine_l2_error = Some(l2);
                trace.fine_linf_error = Some(linf);
            }
        }

        // k = 0: sequential coarse sweep
        let start = Instant::now();
        let mut u = Vec::with_capacity(n_int + 1);
        let mut g_prev = Vec::with_capacity(n_int);
        u.push(self.initial.clone());
        for n in 0..n_int {
            let g = self.coarse_step(&u[n], n)?;
            u.push(g.clone());
            g_prev.push(g);
        }
        let coarse_secs = start.elapsed().as_secs_f64();
        trace
            .records
            .push(self.record(0, &u, reference.as_deref(), None, 0.0, coarse_secs)?);

        let budget = self.run.max_iterations.unwrap_or(n_int + 1);
        let mut fine_cache: Vec<Option<(SpectralField, SpectralField)>> = vec![None; n_int];
        let mut k = 0;
        while k < budget {
            // parallel fine sweeps
            let start = Instant::now();
            let todo: Vec<usize> = (0..n_int)
                .filter(|&n| {
                    !(self.run.reuse_unchanged
                        && fine_cache[n].as_ref().is_some_and(|(input, _)| *input == u[n]))
                })
                .collect();
            let results: Vec<Result<SpectralField>> = self.pool.install(|| {
                todo.par_iter().map(|&n| self.fine_sweep(&u[n], n)).collect()
            });
            for (&n, r) in todo.iter().zip(results) {
                fine_cache[n] = Some((u[n].clone(), r?));
            }
            let fine_secs = start.elapsed().as_secs_f64();

            // sequential correction
            let start = Instant::now();
            let mut next = Vec::with_capacity(n_int + 1);
            next.push(self.initial.clone());
            for n in 0..n_int {
                let g_new = if self.run.reuse_unchanged && next[n] == u[n] {
                    g_prev[n].clone()
                } else {
                    self.coarse_step(&next[n], n)?
                };
                let fine = &fine_cache[n].as_ref().expect("fine sweep computed").1;
                let mut out = fine.clone();
                for ((o, gn), go) in out
                    .coeffs_mut()
                    .iter_mut()
                    .zip(g_new.coeffs())
                    .zip(g_prev[n].coeffs())
                {
                    *o += gn - go;
                }
                g_prev[n] = g_new;
                next.push(out);
            }
            let increment = next
                .iter()
                .zip(&u)
                .map(|(a, b)| a.max_abs_diff(b))
                .fold(0.0, f64::max);
            u = next;
            k += 1;
            let correction_secs = start.elapsed().as_secs_f64();

            if self.run.retention == TraceRetention::LastOnly {
                for r in &mut trace.records {
                    r.snapshots = None;
                }
            }
            trace.records.push(self.record(
                k,
                &u,
                reference.as_deref(),
                Some(increment),
                fine_secs,
                correction_secs,
            )?);
            if self.run.tolerance > 0.0 && increment <= self.run.tolerance {
                break;
            }
        }

        Ok(PararealOutcome {
            checkpoints: u,
            iterations: k,
            trace,
        })
    }
}

/// Convenience wrapper: builds a solver with the default quadrature and
/// the `L²` source projection, then solves.
pub fn parareal_solve(
    problem: &ProblemSpec,
    grid: Arc<TensorGrid>,
    run: PararealRun,
) -> Result<PararealOutcome> {
    PararealSolver::new(problem, grid, run, QuadratureRule::default(), SourceMode::Projection)?.solve()
}
