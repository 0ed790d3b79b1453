//! Batch commands: solve, truncation-order sweep and verification suites.
//!
//! Exit codes: 0 on success, 2 on configuration or usage errors, 3 when the
//! solver fails or does not converge.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::assembly;
use crate::boundary;
use crate::config::{self, RunConfig, SCHEMA};
use crate::error::{Error, Result};
use crate::solver;
use crate::verify::{self, Problem};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "helmholtz-dtn", version, about = "Nonlinear Helmholtz transmission solver with a truncated DtN boundary")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the problem described by a configuration file.
    Solve { config: PathBuf },
    /// Sweep the truncation order N against a reference at twice the largest N.
    ConvergeN {
        config: PathBuf,
        /// Comma separated orders and inclusive ranges, e.g. `2,4,6..10`.
        #[arg(long = "n-list")]
        n_list: String,
    },
    /// Run a verification suite: specfun, garding, oracle or all.
    Verify {
        suite: String,
        /// Directory for verify.csv.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

/// Exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Singular { .. } | Error::NonFinite { .. } | Error::Diverged { .. } | Error::Sweep { .. } => EXIT_SOLVER,
        _ => EXIT_CONFIG,
    }
}

/// Runs a parsed command line and returns the process exit status.
pub fn run(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Solve { config } => cmd_solve(&config).map(|o| o.exit_code()),
        Command::ConvergeN { config, n_list } => cmd_converge_n(&config, &n_list).map(|_| EXIT_OK),
        Command::Verify { suite, out } => cmd_verify(&suite, &out).map(|rows| {
            if rows.iter().all(|r| r.passed) {
                EXIT_OK
            } else {
                EXIT_SOLVER
            }
        }),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Header lines shared by every artifact.
pub fn provenance(cfg: &RunConfig) -> Vec<String> {
    vec![
        format!("schema={SCHEMA}"),
        format!("config_sha256={}", cfg.hash),
        format!("version={} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
        format!(
            "kappa={:e} R={:e} N={} nonlinearity={}",
            cfg.ctx.kappa,
            cfg.ctx.radius,
            cfg.ctx.order,
            cfg.nonlinearity.tag()
        ),
    ]
}

fn write_header(out: &mut impl Write, header: &[String]) -> std::io::Result<()> {
    for h in header {
        writeln!(out, "# {h}")?;
    }
    Ok(())
}

fn create(dir: &Path, name: &str) -> Result<std::io::BufWriter<fs::File>> {
    fs::create_dir_all(dir)?;
    Ok(std::io::BufWriter::new(fs::File::create(dir.join(name))?))
}

/// Result of `solve`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub converged: bool,
    pub iterations: usize,
    pub final_residual: f64,
    pub scattered_flux: f64,
    pub artifacts: Vec<PathBuf>,
}

impl SolveOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.converged {
            EXIT_OK
        } else {
            EXIT_SOLVER
        }
    }
}

/// Parses the configuration, solves and writes solution.csv, history.csv,
/// trace.csv and summary.txt into the output directory.
pub fn cmd_solve(path: &Path) -> Result<SolveOutcome> {
    let cfg = config::load_config(path)?;
    let mesh = cfg.build_mesh()?;
    let inc = cfg.build_incident()?;
    let nl = cfg.nonlinearity.build()?;
    let header = provenance(&cfg);
    let dir = cfg.outputs.dir.clone();

    let solved = assembly::assemble(&mesh, &cfg.ctx, &nl, cfg.linear_part)
        .and_then(|sys| solver::solve_fixed_point(&sys, &mesh, &nl, &inc, &cfg.solver).map(|s| (sys, s)));
    let (sys, sol) = match solved {
        Ok(x) => x,
        Err(e) => {
            let mut out = create(&dir, "summary.txt")?;
            write_header(&mut out, &header)?;
            writeln!(out, "status = failed")?;
            writeln!(out, "error = {e}")?;
            out.flush()?;
            return Err(e);
        }
    };

    let mut artifacts = Vec::new();
    let status = if sol.converged { "converged" } else { "not-converged" };
    let mut header = header;
    header.push(format!("status={status}"));

    if cfg.outputs.solution {
        let mut out = create(&dir, "solution.csv")?;
        write_header(&mut out, &header)?;
        writeln!(out, "node,x,y,re,im")?;
        for (i, (p, u)) in mesh.nodes.iter().zip(&sol.u).enumerate() {
            writeln!(out, "{i},{:.17e},{:.17e},{:.17e},{:.17e}", p[0], p[1], u.re, u.im)?;
        }
        out.flush()?;
        artifacts.push(dir.join("solution.csv"));
    }
    if cfg.outputs.history {
        let mut out = create(&dir, "history.csv")?;
        write_header(&mut out, &header)?;
        writeln!(out, "iteration,relative_residual")?;
        for (k, r) in sol.residual_history.iter().enumerate() {
            writeln!(out, "{},{:.17e}", k + 1, r)?;
        }
        out.flush()?;
        artifacts.push(dir.join("history.csv"));
    }
    if cfg.outputs.trace {
        let mut out = create(&dir, "trace.csv")?;
        boundary::write_trace_csv(&sys.trace(&sol.u), cfg.ctx.kappa, &header, &mut out)?;
        out.flush()?;
        artifacts.push(dir.join("trace.csv"));
    }

    let flux = solver::boundary_flux(&sol.u, &sys, Some(&inc))?;
    let final_residual = sol.residual_history.last().copied().unwrap_or(f64::NAN);
    let mut out = create(&dir, "summary.txt")?;
    write_header(&mut out, &header)?;
    writeln!(out, "status = {status}")?;
    writeln!(out, "iterations = {}", sol.iterations)?;
    writeln!(out, "final_residual = {final_residual:.17e}")?;
    match sol.max_contraction() {
        Some(c) => writeln!(out, "max_contraction = {c:.17e}")?,
        None => writeln!(out, "max_contraction = none")?,
    }
    writeln!(out, "damping = {}", sol.damping)?;
    writeln!(out, "dofs = {}", sys.ndofs)?;
    writeln!(out, "condition_estimate = {:.6e}", sys.condition_estimate())?;
    writeln!(out, "scattered_flux = {flux:.17e}")?;
    out.flush()?;
    artifacts.push(dir.join("summary.txt"));

    Ok(SolveOutcome {
        converged: sol.converged,
        iterations: sol.iterations,
        final_residual,
        scattered_flux: flux,
        artifacts,
    })
}

/// Truncation-order sweep; writes converge_n.csv into the output directory.
pub fn cmd_converge_n(path: &Path, n_list: &str) -> Result<(usize, Vec<verify::NRow>)> {
    let orders = config::parse_n_list(n_list)?;
    let cfg = config::load_config(path)?;
    let problem = Problem {
        mesh: cfg.build_mesh()?,
        kappa: cfg.ctx.kappa,
        nl: cfg.nonlinearity.build()?,
        inc: cfg.build_incident()?,
        solver: cfg.solver,
        linear_part: cfg.linear_part,
    };
    let (n_ref, rows) = verify::convergence_in_n(&problem, &orders)?;
    let mut out = create(&cfg.outputs.dir, "converge_n.csv")?;
    write_header(&mut out, &provenance(&cfg))?;
    writeln!(out, "# n_ref={n_ref}")?;
    writeln!(out, "N,error,relative")?;
    for r in &rows {
        writeln!(out, "{},{:.17e},{:.17e}", r.order, r.error, r.relative)?;
    }
    out.flush()?;
    Ok((n_ref, rows))
}

/// Runs a verification suite and writes verify.csv into `out`.
pub fn cmd_verify(suite: &str, out: &Path) -> Result<Vec<verify::CheckRow>> {
    let mut rows = Vec::new();
    let all = suite == "all";
    if !all && !matches!(suite, "specfun" | "garding" | "oracle") {
        return Err(Error::Config {
            key: "suite".into(),
            message: format!("unknown suite `{suite}` (specfun, garding, oracle, all)"),
        });
    }
    if all || suite == "specfun" {
        rows.extend(verify::symbol_band_suite()?);
    }
    if all || suite == "garding" {
        rows.extend(verify::garding_suite(1, 12)?);
    }
    if all || suite == "oracle" {
        rows.extend(verify::oracle_suite()?);
    }
    let header = vec![
        format!("schema={SCHEMA}"),
        format!("version={} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
        format!("suite={suite}"),
    ];
    let mut f = create(out, "verify.csv")?;
    verify::write_check_csv(&rows, &header, &mut f)?;
    f.flush()?;
    Ok(rows)
}
