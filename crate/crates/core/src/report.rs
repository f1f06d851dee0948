//! Whole solve runs: load, solve, analyse, and the JSON report describing
//! them.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::analysis::{cell_windings, extract_singularities, poincare_hopf_check, CellWindings, PoincareHopfReport, Singularity};
use crate::fem::{gl_energy, gl_weak_residual, residual_norm, ConvergenceLog, Energy, EpsilonPolicy, FieldSolution, GlProblem, NewtonOptions, SolveError};
use crate::mesh::{load_mesh, topology_report, MeshError, SurfaceMesh, TopologyReport};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverSettings {
    pub symmetry: u32,
    pub epsilon_policy: EpsilonPolicy,
    pub epsilon: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// Constrained edge on closed surfaces.
    pub pinned_edge: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceSummary {
    pub converged: bool,
    pub iterations: usize,
    pub initial_residual: f64,
    pub final_residual: f64,
    pub residuals: Vec<f64>,
    /// Weak residual recomputed directly from the energy, over
    /// unconstrained unknowns.
    pub weak_residual: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Timings {
    pub load_s: f64,
    pub setup_s: f64,
    pub solve_s: f64,
    pub analysis_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub input: Option<PathBuf>,
    pub topology: TopologyReport,
    pub solver: SolverSettings,
    pub convergence: ConvergenceSummary,
    pub singularities: Vec<Singularity>,
    pub poincare_hopf: PoincareHopfReport,
    pub energy: Energy,
    pub timings: Timings,
}

impl RunReport {
    /// JSON without the `timings` member, for reproducibility comparisons.
    pub fn to_json_without_timings(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        v.as_object_mut().expect("report is an object").remove("timings");
        v
    }
}

/// Everything a solve run produces.
pub struct Run<'m> {
    pub problem: GlProblem<'m>,
    pub report: RunReport,
    pub field: FieldSolution,
    pub windings: CellWindings,
    pub log: ConvergenceLog,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("the solver needs a triangle mesh")]
    NotTriangles,
    #[error(transparent)]
    Solve(#[from] SolveError),
}

pub fn load_triangles(path: &Path) -> Result<SurfaceMesh, RunError> {
    load_mesh(path, None)?.into_triangles().ok_or(RunError::NotTriangles)
}

/// Solves on `mesh` and analyses the result.
pub fn run_solve<'m>(
    mesh: &'m SurfaceMesh,
    input: Option<&Path>,
    symmetry: u32,
    options: &NewtonOptions,
    mut timings: Timings,
) -> Result<Run<'m>, RunError> {
    let t = Instant::now();
    let topology = topology_report(mesh)?;
    let problem = GlProblem::new(mesh, symmetry)?;
    timings.setup_s = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let (field, log, constraints) = problem.newton_solve(options)?;
    timings.solve_s = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let windings = cell_windings(&problem, &field);
    let singularities = extract_singularities(&problem, &field);
    let poincare_hopf = poincare_hopf_check(&problem, &singularities)?;
    let energy = gl_energy(&problem, &field.values, field.epsilon);
    let weak = gl_weak_residual(&problem, &field.values, field.epsilon);
    let weak_residual = residual_norm(&weak, &constraints.flags());
    timings.analysis_s = t.elapsed().as_secs_f64();

    let report = RunReport {
        input: input.map(Path::to_path_buf),
        topology,
        solver: SolverSettings {
            symmetry,
            epsilon_policy: options.epsilon,
            epsilon: field.epsilon,
            tol: options.tol,
            max_iter: options.max_iter,
            seed: options.rng_seed,
            pinned_edge: constraints.pinned_edge(),
        },
        convergence: ConvergenceSummary {
            converged: log.converged,
            iterations: log.iterations,
            initial_residual: log.initial_residual,
            final_residual: log.final_residual(),
            residuals: log.residuals.clone(),
            weak_residual,
        },
        singularities,
        poincare_hopf,
        energy,
        timings,
    };
    Ok(Run {
        problem,
        report,
        field,
        windings,
        log,
    })
}
