//! Convergence, Parareal-trace and cost-growth studies.

use std::sync::Arc;
use std::time::Instant;

use crate::app::config::{ExperimentConfig, Method, Study};
use crate::app::output::{
    attach_rates, format_sci, growth_factor, join_dims, method_tag, write_csv, ResultRow,
};
use crate::eife::{project_initial, solution_errors, EifePropagator, SourceProjector};
use crate::exp_weights::StageNodes;
use crate::parareal::{PararealRun, PararealSolver, TraceRetention};
use crate::problems::ProblemSpec;
use crate::spectral::{SpectralBasis, SpectralField};
use crate::{Error, Result};

/// Over-resolution factor of the self-convergence reference: it takes this
/// many times the finest level's step count.
pub const REFERENCE_REFINEMENT: usize = 64;

/// Relative distance from the sequential fine error that counts as having
/// reached the plateau.
pub const PLATEAU_FRACTION: f64 = 0.01;

/// Terminal state of one run and what it took.
pub struct SchemeRun {
    pub basis: Arc<SpectralBasis>,
    pub state: SpectralField,
    pub wall_seconds: f64,
}

fn eife_propagator(
    problem: &ProblemSpec,
    basis: &Arc<SpectralBasis>,
    cfg: &ExperimentConfig,
    stages: usize,
    steps: usize,
) -> Result<EifePropagator> {
    let source = Arc::new(SourceProjector::new(
        basis.clone(),
        problem.source.clone(),
        cfg.rule()?,
        cfg.source_mode.into(),
    )?);
    EifePropagator::new(source, &StageNodes::placed(stages, cfg.nodes)?, problem.duration / steps as f64)
}

/// Sequential `stages`-stage run with `steps` uniform steps.
pub fn run_eife(
    problem: &ProblemSpec,
    cells: &[usize],
    cfg: &ExperimentConfig,
    stages: usize,
    steps: usize,
) -> Result<SchemeRun> {
    let start = Instant::now();
    let basis = Arc::new(SpectralBasis::build(problem.grid(cells)?, problem.diffusion)?);
    let prop = eife_propagator(problem, &basis, cfg, stages, steps)?;
    let u0 = project_initial(&basis, &*problem.initial, &cfg.rule()?)?;
    let state = prop.integrate(&u0, problem.t0, steps)?;
    Ok(SchemeRun {
        basis,
        state,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

pub fn parareal_run(cfg: &ExperimentConfig, n: usize, m: usize, workers: usize) -> PararealRun {
    PararealRun {
        max_iterations: cfg.k_max,
        tolerance: cfg.tol,
        workers,
        placement: cfg.nodes,
        ..PararealRun::new(n, m, cfg.p, cfg.q)
    }
}

pub fn parareal_solver(
    problem: &ProblemSpec,
    cells: &[usize],
    cfg: &ExperimentConfig,
    run: PararealRun,
) -> Result<PararealSolver> {
    PararealSolver::new(
        problem,
        problem.grid(cells)?,
        run,
        cfg.rule()?,
        cfg.source_mode.into(),
    )
}

/// Runs the configured method at one resolution.
pub fn run_scheme(
    problem: &ProblemSpec,
    cells: &[usize],
    cfg: &ExperimentConfig,
    (n, m): (usize, usize),
    workers: usize,
) -> Result<SchemeRun> {
    match cfg.method {
        Method::Eife => run_eife(problem, cells, cfg, cfg.q, n * m),
        Method::Peife => {
            let start = Instant::now();
            let solver = parareal_solver(problem, cells, cfg, parareal_run(cfg, n, m, workers))?;
            let out = solver.solve()?;
            Ok(SchemeRun {
                basis: solver.basis().clone(),
                state: out.checkpoints.last().expect("N >= 1").clone(),
                wall_seconds: start.elapsed().as_secs_f64(),
            })
        }
    }
}

fn n_t_label(cfg: &ExperimentConfig, (n, m): (usize, usize)) -> String {
    match cfg.method {
        Method::Eife => (n * m).to_string(),
        Method::Peife => format!("{n}x{m}"),
    }
}

fn row(cfg: &ExperimentConfig, cells: &[usize], level: (usize, usize), errs: (f64, f64), wall: f64) -> ResultRow {
    ResultRow {
        method: method_tag(cfg.method == Method::Peife, cfg.p, cfg.q),
        n_t: n_t_label(cfg, level),
        grid: join_dims(cells),
        l2_error: errs.0,
        linf_error: errs.1,
        rate: None,
        wall_seconds: wall,
    }
}

fn exact_errors(problem: &ProblemSpec, cfg: &ExperimentConfig, run: &SchemeRun) -> Result<(f64, f64)> {
    let exact = problem.exact.clone().ok_or_else(|| no_exact(problem))?;
    let t = problem.t_end();
    solution_errors(&run.basis, &cfg.rule()?, &run.state, &move |x| exact(t, x))
}

fn no_exact(problem: &ProblemSpec) -> Error {
    Error::Config(format!(
        "problem {} has no exact solution; set \"self_convergence\": true for a temporal study \
         against a refined reference",
        problem.label
    ))
}

/// Errors `(L², L∞)` between two states on the same basis.
fn distance(basis: &SpectralBasis, cfg: &ExperimentConfig, a: &SpectralField, b: &SpectralField) -> Result<(f64, f64)> {
    let mut d = a.clone();
    for (x, y) in d.coeffs_mut().iter_mut().zip(b.coeffs()) {
        *x -= y;
    }
    solution_errors(basis, &cfg.rule()?, &d, &|_| 0.0)
}

/// Convergence study along the configured axis; rates use the actual
/// refinement ratio between consecutive levels.
pub fn run_convergence_study(cfg: &ExperimentConfig, workers: usize) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let problem = cfg.problem_spec()?;
    let levels = cfg.time_levels()?;
    let mut rows = Vec::new();
    let mut ratios = Vec::new();
    match cfg.study {
        Study::Spatial => {
            if cfg.self_convergence {
                return Err(Error::Config("self-convergence is available for temporal studies only".into()));
            }
            for (i, cells) in cfg.grids.iter().enumerate() {
                let run = run_scheme(&problem, cells, cfg, levels[0], workers)?;
                rows.push(row(cfg, cells, levels[0], exact_errors(&problem, cfg, &run)?, run.wall_seconds));
                if i > 0 {
                    ratios.push(cells[0] as f64 / cfg.grids[i - 1][0] as f64);
                }
            }
        }
        Study::Temporal => {
            let cells = &cfg.grids[0];
            let reference = if cfg.self_convergence {
                let finest = levels.iter().map(|(n, m)| n * m).max().expect("levels");
                Some(run_eife(&problem, cells, cfg, cfg.q, REFERENCE_REFINEMENT * finest)?)
            } else {
                if problem.exact.is_none() {
                    return Err(no_exact(&problem));
                }
                None
            };
            for (i, &level) in levels.iter().enumerate() {
                let run = run_scheme(&problem, cells, cfg, level, workers)?;
                let errs = match &reference {
                    Some(r) => distance(&run.basis, cfg, &run.state, &r.state)?,
                    None => exact_errors(&problem, cfg, &run)?,
                };
                rows.push(row(cfg, cells, level, errs, run.wall_seconds));
                if i > 0 {
                    let (a, b) = levels[i - 1];
                    ratios.push((level.0 * level.1) as f64 / (a * b) as f64);
                }
            }
        }
        other => {
            return Err(Error::Config(format!(
                "a convergence study needs study = spatial or temporal, got {other:?}"
            )))
        }
    }
    attach_rates(&mut rows, &ratios);
    Ok(rows)
}

/// One run at the first grid and time level.
pub fn run_single(cfg: &ExperimentConfig, workers: usize) -> Result<ResultRow> {
    let single = ExperimentConfig {
        study: Study::Temporal,
        grids: vec![cfg.grids.first().cloned().ok_or_else(|| Error::Config("no grid".into()))?],
        coarse_intervals: vec![cfg.time_levels()?[0].0],
        fine_substeps: vec![cfg.time_levels()?[0].1],
        ..cfg.clone()
    };
    Ok(run_convergence_study(&single, workers)?.remove(0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub k: usize,
    /// Against the exact solution, or against the sequential fine run when
    /// there is none.
    pub l2_error: f64,
    pub linf_error: f64,
    pub reference_l2: f64,
    pub reference_linf: f64,
    pub max_increment: Option<f64>,
    pub plateau: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceReport {
    pub rows: Vec<TraceRow>,
    /// Error of the sequential fine run, the level the curve should reach.
    pub plateau_level: f64,
    /// First iteration within [`PLATEAU_FRACTION`] of the plateau.
    pub plateau_iteration: Option<usize>,
}

pub const TRACE_HEADERS: [&str; 7] = [
    "k",
    "l2_error",
    "linf_error",
    "reference_l2",
    "reference_linf",
    "max_increment",
    "plateau",
];

impl TraceReport {
    pub fn records(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.k.to_string(),
                    format_sci(r.l2_error),
                    format_sci(r.linf_error),
                    format_sci(r.reference_l2),
                    format_sci(r.reference_linf),
                    r.max_increment.map(format_sci).unwrap_or_default(),
                    r.plateau.to_string(),
                ]
            })
            .collect()
    }

    pub fn write<W: std::io::Write>(&self, out: W) -> Result<()> {
        write_csv(out, &TRACE_HEADERS, &self.records())
    }
}

/// Error against iteration `k = 0..k_max` for the first grid and time
/// level.
pub fn run_parareal_trace(cfg: &ExperimentConfig, workers: usize) -> Result<TraceReport> {
    cfg.validate()?;
    let problem = cfg.problem_spec()?;
    let (n, m) = cfg.time_levels()?[0];
    let run = PararealRun {
        compare_reference: true,
        ..parareal_run(cfg, n, m, workers)
    };
    let solver = parareal_solver(&problem, &cfg.grids[0], cfg, run)?;
    let out = solver.solve()?;
    let (plateau_level, against_exact) = match out.trace.fine_l2_error {
        Some(e) => (e, true),
        None => {
            let fine = solver.sequential_fine_reference()?;
            let norm = solution_errors(solver.basis(), solver.rule(), fine.last().expect("N >= 1"), &|_| 0.0)?.0;
            (norm, false)
        }
    };
    let mut rows = Vec::new();
    let mut plateau_iteration = None;
    for rec in &out.trace.records {
        let (rl2, rlinf) = (rec.reference_l2.expect("reference"), rec.reference_linf.expect("reference"));
        let (l2, linf) = if against_exact {
            (rec.l2_error.expect("exact"), rec.linf_error.expect("exact"))
        } else {
            (rl2, rlinf)
        };
        let reached = if against_exact {
            (l2 - plateau_level).abs() <= PLATEAU_FRACTION * plateau_level
        } else {
            l2 <= PLATEAU_FRACTION * plateau_level
        };
        if reached && plateau_iteration.is_none() {
            plateau_iteration = Some(rec.iteration);
        }
        rows.push(TraceRow {
            k: rec.iteration,
            l2_error: l2,
            linf_error: linf,
            reference_l2: rl2,
            reference_linf: rlinf,
            max_increment: rec.max_increment,
            plateau: reached,
        });
    }
    Ok(TraceReport {
        rows,
        plateau_level,
        plateau_iteration,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerfRow {
    pub grid: String,
    /// Interior nodes.
    pub nodes: usize,
    pub n_m: String,
    pub iterations: usize,
    pub mean_iteration_seconds: f64,
    pub growth_factor: Option<f64>,
}

pub const PERF_HEADERS: [&str; 6] = [
    "grid",
    "nodes",
    "n_m",
    "iterations",
    "seconds_per_iteration",
    "growth_factor",
];

pub fn perf_records(rows: &[PerfRow]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            vec![
                r.grid.clone(),
                r.nodes.to_string(),
                r.n_m.clone(),
                r.iterations.to_string(),
                format!("{:.4}", r.mean_iteration_seconds),
                r.growth_factor.map(|g| format!("{g:.2}")).unwrap_or_default(),
            ]
        })
        .collect()
}

/// Mean wall time per corrector iteration across the configured grids.
///
/// Every stage recomputes its load vector here, and no fine sweep is
/// skipped, so each iteration does the full work.
pub fn run_perf_growth(cfg: &ExperimentConfig, workers: usize) -> Result<Vec<PerfRow>> {
    cfg.validate()?;
    let problem = cfg.problem_spec()?.with_general_source();
    let (n, m) = cfg.time_levels()?[0];
    if cfg.k_max == Some(0) {
        return Err(Error::Config("timing needs at least one iteration".into()));
    }
    let mut rows: Vec<PerfRow> = Vec::new();
    for cells in &cfg.grids {
        let run = PararealRun {
            reuse_unchanged: false,
            retention: TraceRetention::None,
            ..parareal_run(cfg, n, m, workers)
        };
        let solver = parareal_solver(&problem, cells, cfg, run)?;
        let out = solver.solve()?;
        let mean = out
            .trace
            .mean_iteration_seconds()
            .ok_or_else(|| Error::Config("no iteration was timed".into()))?;
        let nodes = solver.basis().grid().len();
        let growth = rows
            .last()
            .map(|prev| growth_factor(prev.mean_iteration_seconds, mean, prev.nodes, nodes));
        rows.push(PerfRow {
            grid: join_dims(cells),
            nodes,
            n_m: format!("{n}x{m}"),
            iterations: out.iterations,
            mean_iteration_seconds: mean,
            growth_factor: growth,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn temporal_rates_use_step_ratio() {
        let cfg = ExperimentConfig {
            study: Study::Temporal,
            method: Method::Eife,
            grids: vec![vec![256]],
            coarse_intervals: vec![2, 4],
            fine_substeps: vec![1],
            q: 2,
            ..Default::default()
        };
        let rows = run_convergence_study(&cfg, 1).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].rate, None);
        assert_eq!(rows[1].n_t, "4");
        assert!(rows[1].rate.unwrap() > 1.5);
    }

    #[test]
    fn missing_exact_needs_self_convergence() {
        let mut cfg = ExperimentConfig {
            problem: "oscillating".into(),
            study: Study::Temporal,
            grids: vec![vec![32]],
            ..Default::default()
        };
        assert!(matches!(run_convergence_study(&cfg, 1), Err(Error::Config(_))));
        cfg.self_convergence = true;
        cfg.coarse_intervals = vec![4];
        cfg.fine_substeps = vec![1, 2];
        let rows = run_convergence_study(&cfg, 1).unwrap();
        assert!(rows[1].l2_error < rows[0].l2_error);
    }

    #[test]
    fn trace_starts_with_coarse_error() {
        let cfg = ExperimentConfig {
            study: Study::PararealTrace,
            grids: vec![vec![32]],
            coarse_intervals: vec![4],
            fine_substeps: vec![4],
            p: 1,
            q: 2,
            ..Default::default()
        };
        let rep = run_parareal_trace(&cfg, 1).unwrap();
        assert_eq!(rep.rows.len(), 5);
        assert_eq!(rep.rows[0].max_increment, None);
        let coarse = run_eife(&cfg.problem_spec().unwrap(), &[32], &cfg, 1, 4).unwrap();
        let e = exact_errors(&cfg.problem_spec().unwrap(), &cfg, &coarse).unwrap();
        assert_eq!(rep.rows[0].l2_error, e.0);
        assert!(rep.plateau_iteration.is_some_and(|k| k <= 4));
    }
}
