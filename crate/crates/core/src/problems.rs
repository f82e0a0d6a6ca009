//! Problem definitions: the built-in benchmark problems and a
//! manufactured-solution helper.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::grid_fem::TensorGrid;
use crate::{Error, Result};

pub type SpaceFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type TimeFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type SpaceTimeFn = Arc<dyn Fn(f64, &[f64]) -> f64 + Send + Sync>;

/// Right-hand side `f(t, x)`.
///
/// A separable source `a(t)·g(x)` lets the solver project `g` once and
/// rescale it at every stage.
#[derive(Clone)]
pub enum Source {
    Zero,
    General(SpaceTimeFn),
    Separable { amplitude: TimeFn, profile: SpaceFn },
}

impl Source {
    pub fn eval(&self, t: f64, x: &[f64]) -> f64 {
        match self {
            Source::Zero => 0.0,
            Source::General(f) => f(t, x),
            Source::Separable { amplitude, profile } => amplitude(t) * profile(x),
        }
    }

    /// The same function without the separable fast path.
    pub fn into_general(self) -> Source {
        match self {
            Source::Separable { amplitude, profile } => {
                Source::General(Arc::new(move |t, x| amplitude(t) * profile(x)))
            }
            other => other,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Source::Zero)
    }
}

impl fmt::Debug for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Zero => write!(f, "Zero"),
            Source::General(_) => write!(f, "General(..)"),
            Source::Separable { .. } => write!(f, "Separable(..)"),
        }
    }
}

/// `u_t = D Δu + f(t)` on a box over `[t0, t0 + duration]`, zero on the
/// boundary.
#[derive(Clone)]
pub struct ProblemSpec {
    pub label: String,
    pub bounds: Vec<(f64, f64)>,
    pub diffusion: f64,
    pub t0: f64,
    pub duration: f64,
    pub source: Source,
    pub initial: SpaceFn,
    pub exact: Option<SpaceTimeFn>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("label", &self.label)
            .field("bounds", &self.bounds)
            .field("diffusion", &self.diffusion)
            .field("t0", &self.t0)
            .field("duration", &self.duration)
            .field("source", &self.source)
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

impl ProblemSpec {
    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn t_end(&self) -> f64 {
        self.t0 + self.duration
    }

    pub fn grid(&self, cells: &[usize]) -> Result<Arc<TensorGrid>> {
        Ok(Arc::new(TensorGrid::from_cells(&self.bounds, cells)?))
    }

    /// Drops the separable fast path, forcing a fresh load vector at every
    /// stage.
    pub fn with_general_source(mut self) -> Self {
        self.source = self.source.into_general();
        self
    }

    /// Checks the compatibility conditions at sampled points: the initial
    /// data vanishes on the boundary and matches the exact solution at `t0`.
    pub fn validate(&self) -> Result<()> {
        if !(self.diffusion > 0.0) {
            return Err(Error::NonPositiveDiffusion(self.diffusion));
        }
        if !(self.duration > 0.0) {
            return Err(Error::InvalidProblem(format!(
                "duration must be positive, got {}",
                self.duration
            )));
        }
        TensorGrid::new(&self.bounds, &vec![1; self.dim()])?;
        let mut rng = StdRng::seed_from_u64(0x5eed);
        let d = self.dim();
        for _ in 0..32 {
            let mut x: Vec<f64> = self
                .bounds
                .iter()
                .map(|&(lo, hi)| rng.gen_range(lo..hi))
                .collect();
            if let Some(exact) = &self.exact {
                let (a, b) = (exact(self.t0, &x), (self.initial)(&x));
                if (a - b).abs() > 1e-12 {
                    return Err(Error::InvalidProblem(format!(
                        "exact solution at t0 differs from the initial data at {x:?}: {a} vs {b}"
                    )));
                }
            }
            let face = rng.gen_range(0..d);
            let (lo, hi) = self.bounds[face];
            x[face] = if rng.gen_bool(0.5) { lo } else { hi };
            let v = (self.initial)(&x);
            if v.abs() > 1e-12 {
                return Err(Error::InvalidProblem(format!(
                    "initial data does not vanish on the boundary at {x:?}: {v}"
                )));
            }
        }
        Ok(())
    }
}

/// The benchmark problems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BuiltinProblem {
    /// `[0,1]`, `u = x(1-x)eᵗ`, `T = 1`.
    Ex1d,
    /// `[¼,5/4]×[⅛,⅝]`, `u = e^{-4π²t} sin(π(x-¼)) sin(2π(y-⅛))`, `T = 0.6`.
    Ex2d,
    /// `[0,¼]×[⅛,⅜]×[0,¼]`, `D = ⅛`, separable `sin(4π·)` modes, `T = 0.4`.
    Ex3d,
    /// Moving hat source on `[0,1]` with diffusion `alpha` and frequency
    /// `frequency`; no closed-form solution.
    Oscillating { alpha: f64, frequency: f64 },
}

impl BuiltinProblem {
    pub const HAT_HALF_WIDTH: f64 = 0.05;

    pub fn from_label(label: &str, alpha: Option<f64>, frequency: Option<f64>) -> Result<Self> {
        match label {
            "ex1d" => Ok(Self::Ex1d),
            "ex2d" => Ok(Self::Ex2d),
            "ex3d" => Ok(Self::Ex3d),
            "oscillating" => {
                let alpha = alpha.unwrap_or(0.01);
                if !(alpha > 0.0) {
                    return Err(Error::InvalidProblem(format!(
                        "oscillating problem needs alpha > 0, got {alpha}"
                    )));
                }
                Ok(Self::Oscillating {
                    alpha,
                    frequency: frequency.unwrap_or(1.0),
                })
            }
            other => Err(Error::UnknownProblem(other.to_string())),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Ex1d => "ex1d".into(),
            Self::Ex2d => "ex2d".into(),
            Self::Ex3d => "ex3d".into(),
            Self::Oscillating { alpha, frequency } => format!("oscillating(alpha={alpha},f={frequency})"),
        }
    }

    /// Height `100 √α` of the oscillating hat.
    pub fn hat_height(alpha: f64) -> f64 {
        100.0 * alpha.sqrt()
    }

    /// Centre `0.5 + (0.5 - w) sin(2π f t)` of the oscillating hat.
    pub fn hat_centre(frequency: f64, t: f64) -> f64 {
        0.5 + (0.5 - Self::HAT_HALF_WIDTH) * (2.0 * PI * frequency * t).sin()
    }

    pub fn spec(&self) -> ProblemSpec {
        match *self {
            Self::Ex1d => ProblemSpec {
                label: self.label(),
                bounds: vec![(0.0, 1.0)],
                diffusion: 1.0,
                t0: 0.0,
                duration: 1.0,
                source: Source::Separable {
                    amplitude: Arc::new(f64::exp),
                    profile: Arc::new(|x| 2.0 + x[0] * (1.0 - x[0])),
                },
                initial: Arc::new(|x| x[0] * (1.0 - x[0])),
                exact: Some(Arc::new(|t, x| x[0] * (1.0 - x[0]) * t.exp())),
            },
            Self::Ex2d => {
                let mode = |x: &[f64]| (PI * (x[0] - 0.25)).sin() * (2.0 * PI * (x[1] - 0.125)).sin();
                ProblemSpec {
                    label: self.label(),
                    bounds: vec![(0.25, 1.25), (0.125, 0.625)],
                    diffusion: 1.0,
                    t0: 0.0,
                    duration: 0.6,
                    source: Source::Separable {
                        amplitude: Arc::new(|t| PI * PI * (-4.0 * PI * PI * t).exp()),
                        profile: Arc::new(mode),
                    },
                    initial: Arc::new(mode),
                    exact: Some(Arc::new(move |t, x| (-4.0 * PI * PI * t).exp() * mode(x))),
                }
            }
            Self::Ex3d => {
                let mode = |x: &[f64]| {
                    (4.0 * PI * (x[0] - 0.25)).sin()
                        * (4.0 * PI * (x[1] - 0.125)).sin()
                        * (4.0 * PI * (x[2] - 0.5)).sin()
                };
                ProblemSpec {
                    label: self.label(),
                    bounds: vec![(0.0, 0.25), (0.125, 0.375), (0.0, 0.25)],
                    diffusion: 0.125,
                    t0: 0.0,
                    duration: 0.4,
                    source: Source::Separable {
                        amplitude: Arc::new(|t| 2.0 * PI * PI * (-4.0 * PI * PI * t).exp()),
                        profile: Arc::new(mode),
                    },
                    initial: Arc::new(mode),
                    exact: Some(Arc::new(move |t, x| (-4.0 * PI * PI * t).exp() * mode(x))),
                }
            }
            Self::Oscillating { alpha, frequency } => {
                let height = Self::hat_height(alpha);
                let w = Self::HAT_HALF_WIDTH;
                ProblemSpec {
                    label: self.label(),
                    bounds: vec![(0.0, 1.0)],
                    diffusion: alpha,
                    t0: 0.0,
                    duration: 1.0,
                    source: Source::General(Arc::new(move |t, x| {
                        let c = Self::hat_centre(frequency, t);
                        height * (1.0 - (c - x[0]).abs() / w).max(0.0)
                    })),
                    initial: Arc::new(|x| 4.0 * x[0] * (1.0 - x[0])),
                    exact: None,
                }
            }
        }
    }
}

/// Derivatives of a manufactured solution, supplied by the caller.
pub struct Manufactured {
    pub solution: SpaceTimeFn,
    pub time_derivative: SpaceTimeFn,
    pub laplacian: SpaceTimeFn,
}

/// Builds the problem whose exact solution is `m.solution`, with
/// `f = u_t - D Δu`.
///
/// The supplied derivatives are spot-checked against fourth-order finite
/// differences at ten random space-time points.
pub fn manufactured(
    label: &str,
    bounds: Vec<(f64, f64)>,
    diffusion: f64,
    t0: f64,
    duration: f64,
    m: Manufactured,
) -> Result<ProblemSpec> {
    let Manufactured {
        solution,
        time_derivative,
        laplacian,
    } = m;

    let mut rng = StdRng::seed_from_u64(0x3a7e);
    let step = 1e-3;
    for _ in 0..10 {
        let t = t0 + rng.gen_range(0.0..duration);
        let x: Vec<f64> = bounds.iter().map(|&(lo, hi)| rng.gen_range(lo..hi)).collect();
        let fd_t = five_point_first(|s| solution(s, &x), t, step);
        let mut fd_lap = 0.0;
        for a in 0..x.len() {
            let mut y = x.clone();
            fd_lap += five_point_second(
                |s| {
                    y[a] = s;
                    solution(t, &y)
                },
                x[a],
                step,
            );
        }
        let (ut, lap) = (time_derivative(t, &x), laplacian(t, &x));
        for (name, fd, given) in [("time derivative", fd_t, ut), ("laplacian", fd_lap, lap)] {
            if (fd - given).abs() > 1e-8 * given.abs().max(1.0) {
                return Err(Error::InvalidProblem(format!(
                    "manufactured {name} is inconsistent at t = {t}, x = {x:?}: supplied {given}, finite differences give {fd}"
                )));
            }
        }
    }

    let (ut, lap, u) = (time_derivative.clone(), laplacian.clone(), solution.clone());
    let source = Source::General(Arc::new(move |t, x| ut(t, x) - diffusion * lap(t, x)));
    let spec = ProblemSpec {
        label: label.to_string(),
        bounds,
        diffusion,
        t0,
        duration,
        source,
        initial: Arc::new(move |x| u(t0, x)),
        exact: Some(solution),
    };
    Ok(spec)
}

fn five_point_first(mut f: impl FnMut(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

fn five_point_second(mut f: impl FnMut(f64) -> f64, x: f64, h: f64) -> f64 {
    (-f(x - 2.0 * h) + 16.0 * f(x - h) - 30.0 * f(x) + 16.0 * f(x + h) - f(x + 2.0 * h))
        / (12.0 * h * h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ex1d_source_at_origin() {
        let p = BuiltinProblem::Ex1d.spec();
        assert_eq!(p.source.eval(0.0, &[0.0]), 2.0);
        p.validate().unwrap();
    }

    #[test]
    fn builtins_are_compatible() {
        for b in [
            BuiltinProblem::Ex1d,
            BuiltinProblem::Ex2d,
            BuiltinProblem::Ex3d,
            BuiltinProblem::Oscillating { alpha: 0.01, frequency: 10.0 },
        ] {
            b.spec().validate().unwrap();
        }
        let p = BuiltinProblem::Ex2d.spec();
        let exact = p.exact.clone().unwrap();
        for x in [[0.3, 0.2], [1.0, 0.6], [0.7, 0.4]] {
            assert_eq!(exact(0.0, &x), (p.initial)(&x));
        }
    }

    #[test]
    fn oscillating_parameters() {
        assert!((BuiltinProblem::hat_height(0.01) - 10.0).abs() < 1e-12);
        assert_eq!(BuiltinProblem::hat_centre(1.0, 0.0), 0.5);
        let p = BuiltinProblem::Oscillating { alpha: 0.01, frequency: 1.0 }.spec();
        assert!((p.source.eval(0.0, &[0.5]) - 10.0).abs() < 1e-12);
        assert_eq!(p.source.eval(0.0, &[0.6]), 0.0);
        assert!(p.exact.is_none());
    }

    #[test]
    fn label_parsing() {
        assert_eq!(BuiltinProblem::from_label("ex3d", None, None).unwrap(), BuiltinProblem::Ex3d);
        assert!(matches!(
            BuiltinProblem::from_label("ex4d", None, None),
            Err(Error::UnknownProblem(_))
        ));
        assert!(BuiltinProblem::from_label("oscillating", Some(0.0), None).is_err());
        assert!(BuiltinProblem::from_label("oscillating", Some(-1.0), Some(1.0)).is_err());
    }

    #[test]
    fn separable_and_general_agree() {
        let p = BuiltinProblem::Ex3d.spec();
        let g = p.clone().with_general_source();
        let x = [0.1, 0.2, 0.15];
        assert_eq!(p.source.eval(0.3, &x), g.source.eval(0.3, &x));
        assert!(matches!(g.source, Source::General(_)));
    }

    #[test]
    fn manufactured_recovers_ex1d() {
        let p = manufactured(
            "mms",
            vec![(0.0, 1.0)],
            1.0,
            0.0,
            1.0,
            Manufactured {
                solution: Arc::new(|t, x| x[0] * (1.0 - x[0]) * t.exp()),
                time_derivative: Arc::new(|t, x| x[0] * (1.0 - x[0]) * t.exp()),
                laplacian: Arc::new(|t, _| -2.0 * t.exp()),
            },
        )
        .unwrap();
        let reference = BuiltinProblem::Ex1d.spec();
        for (t, x) in [(0.0, 0.3), (0.5, 0.9), (1.0, 0.01)] {
            let a = p.source.eval(t, &[x]);
            let b = reference.source.eval(t, &[x]);
            assert!((a - b).abs() < 1e-14);
        }
        p.validate().unwrap();
    }

    #[test]
    fn manufactured_zero_and_decaying_mode() {
        let zero = manufactured(
            "zero",
            vec![(0.0, 1.0)],
            1.0,
            0.0,
            1.0,
            Manufactured {
                solution: Arc::new(|_, _| 0.0),
                time_derivative: Arc::new(|_, _| 0.0),
                laplacian: Arc::new(|_, _| 0.0),
            },
        )
        .unwrap();
        assert_eq!(zero.source.eval(0.4, &[0.2]), 0.0);

        let p = manufactured(
            "decay",
            vec![(0.0, 1.0)],
            1.0,
            0.0,
            1.0,
            Manufactured {
                solution: Arc::new(|t, x| (-t).exp() * (PI * x[0]).sin()),
                time_derivative: Arc::new(|t, x| -(-t).exp() * (PI * x[0]).sin()),
                laplacian: Arc::new(|t, x| -PI * PI * (-t).exp() * (PI * x[0]).sin()),
            },
        )
        .unwrap();
        let (t, x) = (0.3f64, 0.4f64);
        let expect = (PI * PI - 1.0) * (-t).exp() * (PI * x).sin();
        assert!((p.source.eval(t, &[x]) - expect).abs() < 1e-13);
    }

    #[test]
    fn manufactured_rejects_inconsistent_derivatives() {
        let r = manufactured(
            "bad",
            vec![(0.0, 1.0)],
            1.0,
            0.0,
            1.0,
            Manufactured {
                solution: Arc::new(|t, x| x[0] * (1.0 - x[0]) * t.exp()),
                time_derivative: Arc::new(|t, x| x[0] * (1.0 - x[0]) * t.exp()),
                laplacian: Arc::new(|t, _| -1.0 * t.exp()),
            },
        );
        assert!(matches!(r, Err(Error::InvalidProblem(_))));
    }
}
