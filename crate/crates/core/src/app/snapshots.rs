//! Nodal solution snapshots at requested times.

use std::path::PathBuf;
use std::sync::Arc;

use crate::app::config::{ensure_writable, ExperimentConfig, Method};
use crate::app::studies::{parareal_run, parareal_solver};
use crate::eife::{project_initial, EifePropagator};
use crate::grid_fem::NodalField;
use crate::spectral::{SpectralBasis, SpectralField};
use crate::{Error, Result};

/// Snapshot at `t`: values at interior nodes (the boundary is zero).
pub struct Snapshot {
    pub time: f64,
    pub field: NodalField,
}

/// States at fine indices `0, stride, 2·stride, …` plus the propagator
/// that connects them.
struct Trajectory {
    basis: Arc<SpectralBasis>,
    fine: EifePropagator,
    stride: usize,
    states: Vec<SpectralField>,
    t0: f64,
}

impl Trajectory {
    fn at(&self, t: f64) -> Result<SpectralField> {
        let dt = self.fine.step_size();
        let total = self.stride * (self.states.len() - 1);
        let pos = (t - self.t0) / dt;
        // snap to the grid when within roundoff
        let l = ((pos + 1e-9).floor().max(0.0) as usize).min(total);
        let idx = l / self.stride;
        let mut state = self.states[idx].clone();
        if l > idx * self.stride {
            state = self.fine.integrate_from(&state, self.t0, idx * self.stride, l - idx * self.stride)?;
        }
        let start = self.t0 + l as f64 * dt;
        let rest = t - start;
        if rest > 1e-9 * dt {
            let partial = EifePropagator::new(self.fine.source().clone(), self.fine.nodes(), rest)?;
            state = partial.step(&state, start)?;
        }
        Ok(state)
    }
}

fn trajectory(cfg: &ExperimentConfig, workers: usize) -> Result<Trajectory> {
    let problem = cfg.problem_spec()?;
    let cells = cfg.grids.first().ok_or_else(|| Error::Config("no grid".into()))?;
    let (n, m) = cfg.time_levels()?[0];
    let solver = parareal_solver(&problem, cells, cfg, parareal_run(cfg, n, m, workers))?;
    match cfg.method {
        Method::Peife => {
            let out = solver.solve()?;
            Ok(Trajectory {
                basis: solver.basis().clone(),
                fine: solver.fine().clone(),
                stride: m,
                states: out.checkpoints,
                t0: problem.t0,
            })
        }
        Method::Eife => {
            let fine = solver.fine().clone();
            let basis = solver.basis().clone();
            let u0 = project_initial(&basis, &*problem.initial, solver.rule())?;
            let states = fine.integrate_checkpoints(&u0, problem.t0, 1, n * m)?;
            Ok(Trajectory {
                basis,
                fine,
                stride: 1,
                states,
                t0: problem.t0,
            })
        }
    }
}

/// Solves once and samples the solution at each of `times`.
pub fn snapshot_fields(cfg: &ExperimentConfig, workers: usize, times: &[f64]) -> Result<Vec<Snapshot>> {
    cfg.validate()?;
    let problem = cfg.problem_spec()?;
    let (lo, hi) = (problem.t0, problem.t_end());
    let slack = 1e-12 * (hi - lo);
    if let Some(&t) = times.iter().find(|&&t| !(t >= lo - slack && t <= hi + slack)) {
        return Err(Error::Config(format!("snapshot time {t} lies outside [{lo}, {hi}]")));
    }
    let traj = trajectory(cfg, workers)?;
    times
        .iter()
        .map(|&t| {
            let state = traj.at(t.clamp(lo, hi))?;
            Ok(Snapshot {
                time: t,
                field: traj.basis.backward(&state),
            })
        })
        .collect()
}

pub fn snapshot_records(snap: &Snapshot) -> (Vec<String>, Vec<Vec<String>>) {
    let grid = snap.field.grid();
    let mut headers: Vec<String> = ["x", "y", "z"][..grid.dim()].iter().map(|s| s.to_string()).collect();
    headers.push("value".into());
    let mut rows = Vec::with_capacity(grid.len());
    let values = snap.field.values();
    grid.for_each_node(|j, x| {
        let mut r: Vec<String> = x.iter().map(|c| format!("{c:.10e}")).collect();
        r.push(format!("{:.10e}", values[j]));
        rows.push(r);
    });
    (headers, rows)
}

/// Writes `snapshot_<i>_t<time>.csv` per requested time into the output
/// directory.
pub fn emit_snapshots(cfg: &ExperimentConfig, workers: usize, times: &[f64]) -> Result<Vec<PathBuf>> {
    let dir = cfg
        .output_dir
        .clone()
        .ok_or_else(|| Error::Config("snapshots need an output directory".into()))?;
    ensure_writable(&dir)?;
    let snaps = snapshot_fields(cfg, workers, times)?;
    let mut paths = Vec::new();
    for (i, s) in snaps.iter().enumerate() {
        let path = dir.join(format!("snapshot_{i}_t{:.4}.csv", s.time));
        let (headers, rows) = snapshot_records(s);
        let h: Vec<&str> = headers.iter().map(String::as_str).collect();
        crate::app::output::write_csv(std::fs::File::create(&path)?, &h, &rows)?;
        paths.push(path);
    }
    Ok(paths)
}
