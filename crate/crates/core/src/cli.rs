//! Command-line interface: `topology`, `audit`, `solve`, `sweep`, `fekete`.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::asymptotics::{configuration_json, fekete_optimize, tilt_samples, tilt_sweep, DEFAULT_SQUARE_HEIGHT};
use crate::audit::audit;
use crate::fem::{EpsilonPolicy, NewtonOptions, PinPolicy};
use crate::mesh::{load_mesh, topology_report, LoadedMesh, MeshFormat};
use crate::report::{load_triangles, run_solve, RunError, Timings};
use crate::vtk::write_field_vtk;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_AUDIT_INCONSISTENT: i32 = 3;
pub const EXIT_NOT_CONVERGED: i32 = 4;
pub const EXIT_TOPOLOGY_CHECK: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "crossfield", version, about = "Ginzburg-Landau direction fields on triangulated surfaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the topology report of a mesh as JSON.
    Topology(MeshArgs),
    /// Print the irregular-vertex index audit of a mesh as JSON.
    Audit(MeshArgs),
    /// Solve for a direction field and write the field, singularities and report.
    Solve(SolveArgs),
    /// Energy of two squares on the sphere against their relative tilt, as CSV.
    Sweep(SweepArgs),
    /// Minimum logarithmic energy configuration of points on the sphere, as JSON.
    Fekete(FeketeArgs),
}

#[derive(Debug, Args)]
pub struct MeshArgs {
    /// OFF, OBJ or MSH (2.2 ASCII) file.
    pub mesh: PathBuf,
    /// Override the format guessed from the extension.
    #[arg(long)]
    pub format: Option<MeshFormat>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonArg(pub EpsilonPolicy);

impl FromStr for EpsilonArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(EpsilonArg(EpsilonPolicy::Auto));
        }
        let v: f64 = s.parse().map_err(|_| format!("expected a number or `auto`, got `{s}`"))?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(format!("epsilon must be positive, got {v}"));
        }
        Ok(EpsilonArg(EpsilonPolicy::Value(v)))
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub mesh: PathBuf,
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..))]
    pub symmetry: u32,
    /// Coherence length, or `auto` for twice the mean edge length.
    #[arg(long, default_value = "auto")]
    pub epsilon: EpsilonArg,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_iter: u64,
    /// Seed for the pinned edge on closed surfaces.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Pin this edge (value (1, 0)) instead of a seeded one.
    #[arg(long)]
    pub pin_edge: Option<usize>,
    /// Legacy VTK field export.
    #[arg(long)]
    pub out_field: Option<PathBuf>,
    /// Run report JSON; printed to stdout when omitted.
    #[arg(long)]
    pub out_report: Option<PathBuf>,
    /// Singularity list JSON.
    #[arg(long)]
    pub out_singularities: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 91, value_parser = clap::value_parser!(u64).range(2..))]
    pub samples: u64,
    /// Height `h` of the squares' planes `z = ±h`.
    #[arg(long, default_value_t = DEFAULT_SQUARE_HEIGHT)]
    pub height: f64,
    /// CSV output; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FeketeArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    pub count: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// JSON output; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Error carrying the process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn input(e: impl std::fmt::Display) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: e.to_string(),
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::input(format!("{}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(Failure::input)
        }
    }
}

fn pretty(v: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// Runs a parsed command; returns the exit code.
pub fn run(cli: Cli) -> i32 {
    match dispatch(cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32, Failure> {
    match cli.command {
        Command::Topology(a) => {
            let mesh = load_mesh(&a.mesh, a.format).map_err(Failure::input)?;
            let report = match &mesh {
                LoadedMesh::Triangles(m) => topology_report(m),
                LoadedMesh::Quads(m) => topology_report(m),
            }
            .map_err(Failure::input)?;
            emit(None, &pretty(&report))?;
            Ok(EXIT_OK)
        }
        Command::Audit(a) => {
            let mesh = load_mesh(&a.mesh, a.format).map_err(Failure::input)?;
            let report = match &mesh {
                LoadedMesh::Triangles(m) => audit(m),
                LoadedMesh::Quads(m) => audit(m),
            }
            .map_err(Failure::input)?;
            emit(None, &pretty(&report))?;
            Ok(if report.consistent { EXIT_OK } else { EXIT_AUDIT_INCONSISTENT })
        }
        Command::Solve(a) => solve(a),
        Command::Sweep(a) => {
            let sweep = tilt_sweep(a.height, &tilt_samples(a.samples as usize)).map_err(Failure::input)?;
            let mut csv = String::from("angle,energy\n");
            for (angle, energy) in sweep {
                csv.push_str(&format!("{angle:.17e},{energy:.17e}\n"));
            }
            emit(a.out.as_deref(), &csv)?;
            Ok(EXIT_OK)
        }
        Command::Fekete(a) => {
            let result = fekete_optimize(a.count as usize, a.seed).map_err(Failure::input)?;
            let json = configuration_json(&result.configuration, Some(result.energy), Some(&result.converged));
            emit(a.out.as_deref(), &pretty(&json))?;
            Ok(EXIT_OK)
        }
    }
}

fn solve(a: SolveArgs) -> Result<i32, Failure> {
    if !(a.tol > 0.0) {
        return Err(Failure::input(format!("tol must be positive, got {}", a.tol)));
    }
    let t = Instant::now();
    let mesh = load_triangles(&a.mesh).map_err(Failure::input)?;
    let timings = Timings {
        load_s: t.elapsed().as_secs_f64(),
        ..Timings::default()
    };
    let options = NewtonOptions {
        tol: a.tol,
        max_iter: a.max_iter as usize,
        epsilon: a.epsilon.0,
        pin: match a.pin_edge {
            Some(edge) => PinPolicy::Edge { edge, value: [1.0, 0.0] },
            None => PinPolicy::Seeded,
        },
        rng_seed: a.seed,
    };
    let run = run_solve(&mesh, Some(&a.mesh), a.symmetry, &options, timings).map_err(|e| match e {
        RunError::Solve(crate::fem::SolveError::LinearSolver(_)) => Failure {
            code: EXIT_NOT_CONVERGED,
            message: e.to_string(),
        },
        other => Failure::input(other),
    })?;
    if let Some(p) = &a.out_field {
        write_field_vtk(p, &run.problem, &run.field, &run.windings)
            .map_err(|e| Failure::input(format!("{}: {e}", p.display())))?;
    }
    if let Some(p) = &a.out_singularities {
        emit(Some(p), &pretty(&run.report.singularities))?;
    }
    emit(a.out_report.as_deref(), &pretty(&run.report))?;
    let r = &run.report;
    if !r.convergence.converged {
        eprintln!(
            "error: Newton did not converge in {} iterations (residual {:.3e})",
            r.convergence.iterations, r.convergence.final_residual
        );
        return Ok(EXIT_NOT_CONVERGED);
    }
    if !r.poincare_hopf.pass {
        eprintln!(
            "error: index sum {} + corners {} differs from chi = {}",
            r.poincare_hopf.interior_index_sum, r.poincare_hopf.boundary_corner_sum, r.poincare_hopf.chi
        );
        return Ok(EXIT_TOPOLOGY_CHECK);
    }
    Ok(EXIT_OK)
}
