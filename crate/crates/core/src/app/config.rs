//! Experiment configuration, read from JSON and overridden by CLI flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::eife::SourceMode;
use crate::exp_weights::NodePlacement;
use crate::grid_fem::QuadratureRule;
use crate::problems::{BuiltinProblem, ProblemSpec};
use crate::{Error, Result};

/// Environment variable consulted for the worker count when neither the
/// command line nor the config sets one.
pub const WORKERS_ENV: &str = "PEIFE_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Study {
    #[default]
    SingleRun,
    Spatial,
    Temporal,
    PararealTrace,
    Perf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Sequential stepping with `q` stages and `N·M` uniform steps.
    Eife,
    #[default]
    Peife,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceHandling {
    #[default]
    Projection,
    Nodal,
}

impl From<SourceHandling> for SourceMode {
    fn from(s: SourceHandling) -> Self {
        match s {
            SourceHandling::Projection => SourceMode::Projection,
            SourceHandling::Nodal => SourceMode::NodalInterpolation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: String,
    /// Oscillating-source parameters.
    pub alpha: Option<f64>,
    pub frequency: Option<f64>,
    pub study: Study,
    pub method: Method,
    /// Cells per direction, one entry per refinement level.
    pub grids: Vec<Vec<usize>>,
    /// `N` per temporal level; a single entry is broadcast.
    pub coarse_intervals: Vec<usize>,
    /// `M` per temporal level; a single entry is broadcast.
    pub fine_substeps: Vec<usize>,
    pub p: usize,
    pub q: usize,
    /// Stage node placement.
    pub nodes: NodePlacement,
    /// `None` iterates until `tol` is met.
    pub k_max: Option<usize>,
    pub tol: f64,
    pub workers: Option<usize>,
    pub quadrature_points: usize,
    pub source_mode: SourceHandling,
    /// Evaluate separable sources through the general path anyway.
    pub general_source: bool,
    /// Temporal studies only: measure errors against an over-resolved fine
    /// run on the same grid instead of the exact solution.
    pub self_convergence: bool,
    pub output_dir: Option<PathBuf>,
    pub times: Vec<f64>,
    /// Reserved; nothing is random today.
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            problem: "ex1d".into(),
            alpha: None,
            frequency: None,
            study: Study::SingleRun,
            method: Method::Peife,
            grids: vec![vec![64]],
            coarse_intervals: vec![4],
            fine_substeps: vec![4],
            p: 2,
            q: 2,
            nodes: NodePlacement::Left,
            k_max: Some(4),
            tol: 0.0,
            workers: None,
            quadrature_points: QuadratureRule::DEFAULT_POINTS,
            source_mode: SourceHandling::Projection,
            general_source: false,
            self_convergence: false,
            output_dir: None,
            times: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn builtin(&self) -> Result<BuiltinProblem> {
        BuiltinProblem::from_label(&self.problem, self.alpha, self.frequency)
    }

    pub fn problem_spec(&self) -> Result<ProblemSpec> {
        let spec = self.builtin()?.spec();
        Ok(if self.general_source {
            spec.with_general_source()
        } else {
            spec
        })
    }

    pub fn rule(&self) -> Result<QuadratureRule> {
        QuadratureRule::gauss_legendre(self.quadrature_points)
    }

    /// `(N, M)` per temporal level.
    pub fn time_levels(&self) -> Result<Vec<(usize, usize)>> {
        let (a, b) = (&self.coarse_intervals, &self.fine_substeps);
        if a.is_empty() || b.is_empty() {
            return Err(Error::Config("coarse_intervals and fine_substeps must be non-empty".into()));
        }
        let len = a.len().max(b.len());
        if (a.len() != 1 && a.len() != len) || (b.len() != 1 && b.len() != len) {
            return Err(Error::Config(format!(
                "coarse_intervals ({}) and fine_substeps ({}) have incompatible lengths",
                a.len(),
                b.len()
            )));
        }
        let pick = |v: &[usize], i| if v.len() == 1 { v[0] } else { v[i] };
        Ok((0..len).map(|i| (pick(a, i), pick(b, i))).collect())
    }

    /// Flag beats config beats environment beats the machine's parallelism.
    pub fn resolve_workers(&self, flag: Option<usize>) -> Result<usize> {
        if let Some(w) = flag.or(self.workers) {
            return Ok(w);
        }
        match std::env::var(WORKERS_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("{WORKERS_ENV}={v:?} is not a worker count"))),
            Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        let problem = self.problem_spec()?;
        if self.grids.is_empty() {
            return fail("at least one grid is required".into());
        }
        for g in &self.grids {
            if g.len() != problem.dim() {
                return fail(format!(
                    "grid {g:?} does not match the {}-dimensional problem {}",
                    problem.dim(),
                    problem.label
                ));
            }
            if g.iter().any(|&c| c < 2) {
                return fail(format!("grid {g:?} needs at least 2 cells per direction"));
            }
        }
        let levels = self.time_levels()?;
        if levels.iter().any(|&(n, m)| n == 0 || m == 0) {
            return fail("N and M must be positive".into());
        }
        if self.p == 0 || self.p > self.q {
            return fail(format!("need 1 <= p <= q, got p = {}, q = {}", self.p, self.q));
        }
        if self.workers == Some(0) {
            return fail("workers must be positive".into());
        }
        self.rule()?;
        match self.study {
            Study::Spatial | Study::Perf => {
                let nodes: Vec<usize> = self.grids.iter().map(|g| g.iter().product()).collect();
                if nodes.windows(2).any(|w| w[1] <= w[0])
                    || self.grids.windows(2).any(|w| w[1].iter().zip(&w[0]).any(|(a, b)| a < b))
                {
                    return fail("grids must be strictly refined level by level".into());
                }
            }
            Study::Temporal => {
                let steps: Vec<usize> = levels.iter().map(|(n, m)| n * m).collect();
                if steps.windows(2).any(|w| w[1] <= w[0]) {
                    return fail("N*M must strictly increase level by level".into());
                }
            }
            Study::SingleRun | Study::PararealTrace => {}
        }
        if let Some(dir) = &self.output_dir {
            ensure_writable(dir)?;
        }
        Ok(())
    }
}

/// Creates `dir` if needed and checks a file can be written in it.
pub fn ensure_writable(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Error::Config(format!("cannot create {}: {e}", dir.display())))?;
    let probe = dir.join(".peife-write-probe");
    std::fs::write(&probe, b"")
        .and_then(|_| std::fs::remove_file(&probe))
        .map_err(|e| Error::Config(format!("{} is not writable: {e}", dir.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_and_defaults() {
        let c = ExperimentConfig::from_json(r#"{"problem": "ex2d", "grids": [[8, 4]], "study": "parareal-trace"}"#)
            .unwrap();
        assert_eq!(c.study, Study::PararealTrace);
        assert_eq!(c.k_max, Some(4));
        assert_eq!(c.tol, 0.0);
        c.validate().unwrap();
        let back = ExperimentConfig::from_json(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
        assert!(ExperimentConfig::from_json(r#"{"gridz": []}"#).is_err());
    }

    #[test]
    fn broadcast_levels() {
        let c = ExperimentConfig {
            coarse_intervals: vec![4],
            fine_substeps: vec![1, 2, 4],
            ..Default::default()
        };
        assert_eq!(c.time_levels().unwrap(), vec![(4, 1), (4, 2), (4, 4)]);
        let bad = ExperimentConfig {
            coarse_intervals: vec![4, 8],
            fine_substeps: vec![1, 2, 4],
            ..Default::default()
        };
        assert!(bad.time_levels().is_err());
    }

    #[test]
    fn refinement_must_increase() {
        let c = ExperimentConfig {
            study: Study::Spatial,
            grids: vec![vec![16], vec![8]],
            ..Default::default()
        };
        assert!(c.validate().is_err());
        let c = ExperimentConfig {
            study: Study::Temporal,
            fine_substeps: vec![2, 2],
            ..Default::default()
        };
        assert!(c.validate().is_err());
        let c = ExperimentConfig {
            grids: vec![vec![8, 8]],
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn worker_precedence() {
        let c = ExperimentConfig {
            workers: Some(3),
            ..Default::default()
        };
        assert_eq!(c.resolve_workers(Some(5)).unwrap(), 5);
        assert_eq!(c.resolve_workers(None).unwrap(), 3);
    }
}
