//! Command-line front end: `params`, `mesh`, `solve`, `verify`, `limits`.
//!
//! Exit codes: 0 ok, 1 usage, 2 infeasible strip, 3 non-convergence or
//! numerical failure, 4 verification failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use kmr_core::graph::verify_graph;
use kmr_core::solver::limits::{limit_series, Regime, SCHERK2P_DEFAULT_ALPHA};
use kmr_core::solver::{phi_values, solve_strip_with, SolveOptions, SolveResult};
use kmr_core::surface::MeshOptions;
use kmr_core::weierstrass::SurfaceParams;
use kmr_core::KmrError;

use crate::format::{round_json, sig, to_json};
use crate::obj::obj_string;
use crate::parallel::{build_graph_piece_par, parameter_domain_par, thread_pool, threads_from_env};
use crate::report::{LimitsReport, ParamsReport, SolveReport, VerifyReport};

const HALF_PI: f64 = std::f64::consts::FRAC_PI_2;
pub const DEFAULT_RESOLUTION: usize = 128;
pub const MAX_RESOLUTION: usize = 4096;
pub const DEFAULT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    Usage = 1,
    Infeasible = 2,
    NoConvergence = 3,
    Verification = 4,
}

impl Exit {
    pub fn of_error(e: &KmrError) -> Exit {
        match e {
            KmrError::Domain { .. } | KmrError::Configuration(_) | KmrError::Range { .. } => Exit::Usage,
            KmrError::Infeasible { .. } => Exit::Infeasible,
            _ => Exit::NoConvergence,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "kmr", version, about = "KMR minimal graphs on marked strips")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Periods, flux and strip of M(theta, alpha)
    Params {
        #[command(flatten)]
        surface: SurfaceArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Export the graph piece (or its conjugate) as OBJ
    Mesh {
        #[command(flatten)]
        surface: SurfaceArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// Take the conjugate surface
        #[arg(long)]
        conjugate: bool,
        /// Add the R3 neighbour window, covering one x1-period of the strip
        #[arg(long)]
        cell: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Find (theta, alpha) whose graph solves the problem on S(h, a)
    Solve {
        #[arg(long, allow_hyphen_values = true)]
        h: f64,
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the graph checks on the sampled piece
    Verify {
        #[command(flatten)]
        surface: SurfaceArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Distance series to a limit surface along its default ray
    Limits {
        #[arg(long, value_enum)]
        regime: RegimeArg,
        /// Limit angle of the doubly periodic regime
        #[arg(long, allow_hyphen_values = true)]
        alpha_inf: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Clone, Copy, Args)]
pub struct SurfaceArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub theta: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct GridArgs {
    /// Samples per chart direction
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    pub res: usize,
    /// End truncation radius in the chart
    #[arg(long, allow_hyphen_values = true)]
    pub eps_end: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Write to this file instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
    Obj,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegimeArg {
    Scherk1p,
    Scherk2p,
    Helicoid,
}

/// A validated invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub task: Task,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Task {
    Params { theta: f64, alpha: f64 },
    Mesh { theta: f64, alpha: f64, res: usize, eps_end: Option<f64>, conjugate: bool, cell: bool },
    Solve { h: f64, a: f64, tol: f64 },
    Verify { theta: f64, alpha: f64, res: usize, eps_end: Option<f64> },
    Limits { regime: Regime },
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn check_surface(s: &SurfaceArgs) -> Result<(), String> {
    check(s.theta > 0.0 && s.theta < HALF_PI, || format!("--theta {} must lie in (0, pi/2)", s.theta))?;
    check(s.alpha >= -HALF_PI && s.alpha <= HALF_PI, || {
        format!("--alpha {} must lie in [-pi/2, pi/2]", s.alpha)
    })
}

fn check_grid(g: &GridArgs) -> Result<(), String> {
    check((16..=MAX_RESOLUTION).contains(&g.res), || {
        format!("--res {} must lie in [16, {MAX_RESOLUTION}]", g.res)
    })?;
    if let Some(e) = g.eps_end {
        check(e > 0.0 && e.is_finite(), || format!("--eps-end {e} must be positive"))?;
    }
    Ok(())
}

fn report_format(f: Option<Format>) -> Result<Format, String> {
    match f.unwrap_or(Format::Json) {
        Format::Obj => Err("--format obj applies to `mesh` only".into()),
        f => Ok(f),
    }
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<RunConfig, String> {
        let threads = threads_from_env()?;
        let (task, output, format) = match cli.command {
            Command::Params { surface, output } => {
                check_surface(&surface)?;
                let f = report_format(output.format)?;
                (Task::Params { theta: surface.theta, alpha: surface.alpha }, output, f)
            }
            Command::Mesh { surface, grid, conjugate, cell, output } => {
                check_surface(&surface)?;
                check_grid(&grid)?;
                check(matches!(output.format, None | Some(Format::Obj)), || "`mesh` writes OBJ only".into())?;
                let task = Task::Mesh {
                    theta: surface.theta,
                    alpha: surface.alpha,
                    res: grid.res,
                    eps_end: grid.eps_end,
                    conjugate,
                    cell,
                };
                (task, output, Format::Obj)
            }
            Command::Solve { h, a, tol, output } => {
                check(h > 0.0 && h.is_finite(), || format!("--h {h} must be positive"))?;
                check(a.is_finite(), || format!("--a {a} must be finite"))?;
                check(tol > 0.0 && tol < 1.0, || format!("--tol {tol} must lie in (0, 1)"))?;
                let f = report_format(output.format)?;
                (Task::Solve { h, a, tol }, output, f)
            }
            Command::Verify { surface, grid, output } => {
                check_surface(&surface)?;
                check_grid(&grid)?;
                let f = report_format(output.format)?;
                let task = Task::Verify {
                    theta: surface.theta,
                    alpha: surface.alpha,
                    res: grid.res,
                    eps_end: grid.eps_end,
                };
                (task, output, f)
            }
            Command::Limits { regime, alpha_inf, output } => {
                let regime = match (regime, alpha_inf) {
                    (RegimeArg::Scherk1p, None) => Regime::Scherk1p,
                    (RegimeArg::Helicoid, None) => Regime::Helicoid,
                    (RegimeArg::Scherk2p, a) => {
                        let a = a.unwrap_or(SCHERK2P_DEFAULT_ALPHA);
                        check(a > -HALF_PI && a <= HALF_PI && a != 0.0, || {
                            format!("--alpha-inf {a} must be a nonzero angle in (-pi/2, pi/2]")
                        })?;
                        Regime::Scherk2p { alpha_inf: a }
                    }
                    (_, Some(_)) => return Err("--alpha-inf applies to --regime scherk2p only".into()),
                };
                let f = report_format(output.format)?;
                (Task::Limits { regime }, output, f)
            }
        };
        Ok(RunConfig {
            task,
            out: output.out,
            format,
            threads,
        })
    }
}

/// Result of a run: the exit status, the document to emit (if any) and a
/// diagnostic for stderr.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub exit: Exit,
    pub output: Option<String>,
    pub message: Option<String>,
}

impl Outcome {
    fn error(e: &KmrError) -> Outcome {
        Outcome {
            exit: Exit::of_error(e),
            output: None,
            message: Some(e.to_string()),
        }
    }
}

fn render<T: serde::Serialize>(value: &T, format: Format) -> String {
    match format {
        Format::Text => {
            let mut v = serde_json::to_value(value).expect("reports serialize");
            round_json(&mut v);
            text_lines(&v)
        }
        _ => to_json(value).expect("reports serialize"),
    }
}

fn text_lines(v: &Value) -> String {
    fn flat(v: &Value) -> String {
        match v {
            Value::Number(n) => n.as_f64().map_or_else(|| n.to_string(), |x| {
                if n.is_f64() {
                    sig(x)
                } else {
                    n.to_string()
                }
            }),
            Value::Array(a) => a.iter().map(flat).collect::<Vec<_>>().join(" "),
            Value::String(s) => s.clone(),
            Value::Object(o) => o.iter().map(|(k, v)| format!("{k}={}", flat(v))).collect::<Vec<_>>().join(" "),
            other => other.to_string(),
        }
    }
    let mut s = String::new();
    if let Value::Object(o) = v {
        for (k, x) in o {
            match x {
                Value::Array(a) if a.iter().any(Value::is_object) => {
                    for (i, item) in a.iter().enumerate() {
                        s.push_str(&format!("{k}[{i}]: {}\n", flat(item)));
                    }
                }
                Value::Object(inner) => {
                    for (ik, iv) in inner {
                        s.push_str(&format!("{k}.{ik}: {}\n", flat(iv)));
                    }
                }
                _ => s.push_str(&format!("{k}: {}\n", flat(x))),
            }
        }
    }
    s
}

fn mesh_options(res: usize, eps_end: Option<f64>) -> MeshOptions {
    let o = MeshOptions::new(res, res);
    match eps_end {
        Some(e) => o.eps_end(e),
        None => o,
    }
}

/// Executes a validated configuration. Does no IO.
pub fn execute(cfg: &RunConfig) -> Outcome {
    let done = |exit, output| Outcome { exit, output: Some(output), message: None };
    match cfg.task {
        Task::Params { theta, alpha } => {
            let r = match SurfaceParams::new(theta, alpha).and_then(|p| ParamsReport::compute(&p)) {
                Ok(r) => r,
                Err(e) => return Outcome::error(&e),
            };
            let exit = if r.invariants.ok { Exit::Ok } else { Exit::Verification };
            done(exit, render(&r, cfg.format))
        }
        Task::Mesh { theta, alpha, res, eps_end, conjugate, cell } => {
            let shifts: &[i32] = if cell { &[0, 1] } else { &[0] };
            let meshes = SurfaceParams::new(theta, alpha).and_then(|p| {
                shifts
                    .iter()
                    .map(|&k| build_graph_piece_par(&p, mesh_options(res, eps_end).conjugate(conjugate).shift(k)))
                    .collect::<kmr_core::Result<Vec<_>>>()
            });
            match meshes {
                Ok(m) => done(Exit::Ok, obj_string(&m.iter().collect::<Vec<_>>())),
                Err(e) => Outcome::error(&e),
            }
        }
        Task::Solve { h, a, tol } => {
            let opts = SolveOptions { tol, ..SolveOptions::default() };
            let solved = parameter_domain_par().and_then(|d| solve_strip_with(&d, h, a, opts));
            match solved {
                Ok(r) => done(Exit::Ok, render(&SolveReport::new(h, a, tol, &r), cfg.format)),
                Err(KmrError::NoConvergence { theta, alpha, residual, iterations }) => {
                    let (ph, pa) = phi_values(theta, alpha).unwrap_or((f64::NAN, f64::NAN));
                    let best = SolveResult { theta, alpha, residual, iterations, converged: false, h: ph, a: pa };
                    Outcome {
                        exit: Exit::NoConvergence,
                        output: Some(render(&SolveReport::new(h, a, tol, &best), cfg.format)),
                        message: Some(format!("no convergence: best residual {residual:e}")),
                    }
                }
                Err(e) => Outcome::error(&e),
            }
        }
        Task::Verify { theta, alpha, res, eps_end } => {
            let run = SurfaceParams::new(theta, alpha).and_then(|p| {
                let m = build_graph_piece_par(&p, mesh_options(res, eps_end))?;
                let g = verify_graph(&m, &p)?;
                Ok(VerifyReport::new(&p, [res, res], &g))
            });
            match run {
                Ok(r) => {
                    let exit = if r.all_ok { Exit::Ok } else { Exit::Verification };
                    done(exit, render(&r, cfg.format))
                }
                Err(e) => Outcome::error(&e),
            }
        }
        Task::Limits { regime } => match limit_series(regime, &regime.default_ray()) {
            Ok(r) => {
                let exit = if r.decreasing { Exit::Ok } else { Exit::Verification };
                done(exit, render(&LimitsReport::from(&r), cfg.format))
            }
            Err(e) => Outcome::error(&e),
        },
    }
}

/// Parses, validates, runs and writes. Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { Exit::Usage } else { Exit::Ok };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code as i32;
        }
    };
    let cfg = match RunConfig::from_cli(cli) {
        Ok(c) => c,
        Err(msg) => {
            let _ = writeln!(stderr, "error: {msg}");
            return Exit::Usage as i32;
        }
    };
    let pool = match thread_pool(cfg.threads) {
        Ok(p) => p,
        Err(msg) => {
            let _ = writeln!(stderr, "error: {msg}");
            return Exit::Usage as i32;
        }
    };
    let outcome = pool.install(|| execute(&cfg));
    if let Some(msg) = &outcome.message {
        let _ = writeln!(stderr, "error: {msg}");
    }
    if let Some(doc) = &outcome.output {
        let written = match &cfg.out {
            Some(path) => std::fs::write(path, doc).map_err(|e| format!("{}: {e}", path.display())),
            None => stdout.write_all(doc.as_bytes()).map_err(|e| e.to_string()),
        };
        if let Err(msg) = written {
            let _ = writeln!(stderr, "error: {msg}");
            return Exit::Usage as i32;
        }
    }
    outcome.exit as i32
}
