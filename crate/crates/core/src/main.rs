use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use peife::app::output::write_csv;
use peife::app::studies::{perf_records, PERF_HEADERS};
use peife::app::{
    emit_snapshots, run_convergence_study, run_parareal_trace, run_perf_growth, run_single, write_rows,
    ExperimentConfig, Method, Study,
};

#[derive(Parser)]
#[command(name = "peife", version, about = "Parareal exponential-integrator finite element experiments")]
struct Cli {
    /// JSON experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for the fine sweeps.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Reserved.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Overrides {
    /// ex1d, ex2d, ex3d or oscillating.
    #[arg(long, global = true)]
    problem: Option<String>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    #[arg(long, global = true)]
    frequency: Option<f64>,
    /// eife or peife.
    #[arg(long, global = true)]
    method: Option<String>,
    /// Cells per direction of one level, e.g. 64x32; repeat for more levels.
    #[arg(long = "grid", global = true)]
    grids: Vec<String>,
    /// Coarse intervals N, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    n: Vec<usize>,
    /// Fine substeps M, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    m: Vec<usize>,
    #[arg(long, global = true)]
    p: Option<usize>,
    #[arg(long, global = true)]
    q: Option<usize>,
    #[arg(long, global = true)]
    k_max: Option<usize>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// One run; prints its result row.
    Run,
    /// Spatial or temporal convergence table.
    Converge {
        /// spatial or temporal; defaults to the config's study.
        #[arg(long)]
        study: Option<String>,
    },
    /// Error against Parareal iteration.
    Trace,
    /// Time per iteration across grid refinements.
    Perf,
    /// Nodal solution files at the given times.
    Snapshots {
        #[arg(long, value_delimiter = ',')]
        times: Vec<f64>,
    },
}

fn parse_grid(s: &str) -> Result<Vec<usize>, String> {
    s.split('x')
        .map(|c| c.trim().parse::<usize>().map_err(|_| format!("bad grid {s:?}")))
        .collect()
}

fn build_config(cli: &Cli) -> Result<ExperimentConfig, String> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path).map_err(|e| e.to_string())?,
        None => ExperimentConfig::default(),
    };
    let o = &cli.overrides;
    if let Some(p) = &o.problem {
        cfg.problem = p.clone();
    }
    if o.alpha.is_some() {
        cfg.alpha = o.alpha;
    }
    if o.frequency.is_some() {
        cfg.frequency = o.frequency;
    }
    if let Some(m) = &o.method {
        cfg.method = match m.to_ascii_lowercase().as_str() {
            "eife" => Method::Eife,
            "peife" => Method::Peife,
            other => return Err(format!("unknown method {other:?}")),
        };
    }
    if !o.grids.is_empty() {
        cfg.grids = o.grids.iter().map(|g| parse_grid(g)).collect::<Result<_, _>>()?;
    }
    if !o.n.is_empty() {
        cfg.coarse_intervals = o.n.clone();
    }
    if !o.m.is_empty() {
        cfg.fine_substeps = o.m.clone();
    }
    cfg.p = o.p.unwrap_or(cfg.p);
    cfg.q = o.q.unwrap_or(cfg.q);
    if o.k_max.is_some() {
        cfg.k_max = o.k_max;
    }
    cfg.tol = o.tol.unwrap_or(cfg.tol);
    if o.output.is_some() {
        cfg.output_dir = o.output.clone();
    }
    cfg.seed = cli.seed.unwrap_or(cfg.seed);
    Ok(cfg)
}

/// Prints `records` and, with an output directory, also writes `name`.
fn emit(cfg: &ExperimentConfig, name: &str, write: impl Fn(&mut dyn Write) -> peife::Result<()>) -> peife::Result<()> {
    write(&mut std::io::stdout().lock())?;
    if let Some(dir) = &cfg.output_dir {
        std::fs::create_dir_all(dir)?;
        let mut f = std::fs::File::create(dir.join(name))?;
        write(&mut f)?;
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<(), String> {
    let mut cfg = build_config(cli)?;
    let workers = cfg.resolve_workers(cli.workers).map_err(|e| e.to_string())?;
    let result = match &cli.command {
        Command::Run => run_single(&cfg, workers)
            .and_then(|row| emit(&cfg, "run.csv", |w| write_rows(w, std::slice::from_ref(&row)))),
        Command::Converge { study } => {
            if let Some(s) = study {
                cfg.study = match s.as_str() {
                    "spatial" => Study::Spatial,
                    "temporal" => Study::Temporal,
                    other => return Err(format!("unknown study {other:?}")),
                };
            }
            run_convergence_study(&cfg, workers).and_then(|rows| emit(&cfg, "convergence.csv", |w| write_rows(w, &rows)))
        }
        Command::Trace => run_parareal_trace(&cfg, workers).and_then(|rep| {
            emit(&cfg, "trace.csv", |w| rep.write(w))?;
            match rep.plateau_iteration {
                Some(k) => eprintln!("plateau reached at k = {k}"),
                None => eprintln!("plateau not reached"),
            }
            Ok(())
        }),
        Command::Perf => {
            cfg.study = Study::Perf;
            run_perf_growth(&cfg, workers)
                .and_then(|rows| emit(&cfg, "perf.csv", |w| write_csv(w, &PERF_HEADERS, &perf_records(&rows))))
        }
        Command::Snapshots { times } => {
            let times = if times.is_empty() { cfg.times.clone() } else { times.clone() };
            emit_snapshots(&cfg, workers, &times).map(|paths| {
                for p in paths {
                    println!("{}", p.display());
                }
            })
        }
    };
    result.map_err(|e| {
        let mut msg = e.to_string();
        let mut src = std::error::Error::source(&e);
        while let Some(s) = src {
            msg.push_str(&format!(": {s}"));
            src = s.source();
        }
        msg
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
