use nalgebra::Vector6;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::element::{element_laplacian, element_newton, ElementNewton};
use super::linsolve::{solve, TripletMatrix};
use super::{GlProblem, SolveError};
use crate::mesh::{mean_edge_length, FacetMesh};

/// Norm below which a Laplacian value is not renormalized but reset to `(1, 0)`.
const RENORMALIZE_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsilonPolicy {
    /// Twice the mean edge length.
    Auto,
    Value(f64),
}

impl EpsilonPolicy {
    pub fn resolve(&self, problem: &GlProblem) -> Result<f64, SolveError> {
        let eps = match *self {
            EpsilonPolicy::Auto => 2.0 * mean_edge_length(problem.mesh())?,
            EpsilonPolicy::Value(v) => v,
        };
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(SolveError::InvalidOption(format!("epsilon must be positive, got {eps}")));
        }
        Ok(eps)
    }
}

/// How a closed surface gets the single constrained edge that removes the
/// global rotation null space. Ignored on surfaces with boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PinPolicy {
    /// Edge drawn from the run seed, value `(1, 0)`.
    Seeded,
    Edge { edge: usize, value: [f64; 2] },
    Disabled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub epsilon: EpsilonPolicy,
    pub pin: PinPolicy,
    pub rng_seed: u64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tol: 1e-12,
            max_iter: 100,
            epsilon: EpsilonPolicy::Auto,
            pin: PinPolicy::Seeded,
            rng_seed: 0,
        }
    }
}

impl NewtonOptions {
    fn validate(&self) -> Result<(), SolveError> {
        if !(self.tol > 0.0) {
            return Err(SolveError::InvalidOption(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(SolveError::InvalidOption("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// Dirichlet values per edge: `(1, 0)` on boundary edges (crosses aligned
/// with the boundary), or one pinned edge on closed surfaces.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraints {
    values: Vec<Option<[f64; 2]>>,
    pinned: Option<usize>,
}

impl Constraints {
    pub fn new(problem: &GlProblem, pin: PinPolicy, seed: u64) -> Result<Self, SolveError> {
        let mesh = problem.mesh();
        let mut values: Vec<Option<[f64; 2]>> = mesh
            .edges()
            .iter()
            .map(|e| e.is_boundary().then_some([1.0, 0.0]))
            .collect();
        let mut pinned = None;
        if !mesh.has_boundary() {
            let (edge, value) = match pin {
                PinPolicy::Disabled => return Err(SolveError::Unconstrained),
                PinPolicy::Edge { edge, value } => (edge, value),
                PinPolicy::Seeded => (seeded_edge(problem, seed), [1.0, 0.0]),
            };
            if edge >= values.len() {
                return Err(SolveError::InvalidPin(edge));
            }
            values[edge] = Some(value);
            pinned = Some(edge);
        }
        Ok(Constraints { values, pinned })
    }

    pub fn value(&self, edge: usize) -> Option<[f64; 2]> {
        self.values[edge]
    }

    pub fn is_constrained(&self, edge: usize) -> bool {
        self.values[edge].is_some()
    }

    pub fn flags(&self) -> Vec<bool> {
        self.values.iter().map(Option::is_some).collect()
    }

    pub fn pinned_edge(&self) -> Option<usize> {
        self.pinned
    }

    fn dof_map(&self) -> (Vec<Option<usize>>, usize) {
        let mut map = vec![None; 2 * self.values.len()];
        let mut n = 0;
        for (e, v) in self.values.iter().enumerate() {
            if v.is_none() {
                map[2 * e] = Some(n);
                map[2 * e + 1] = Some(n + 1);
                n += 2;
            }
        }
        (map, n)
    }
}

/// Seeded edge choice that depends on the edge's vertex pair, not on the
/// order edges were discovered in.
fn seeded_edge(problem: &GlProblem, seed: u64) -> usize {
    let mesh = problem.mesh();
    let mut order: Vec<usize> = (0..mesh.edges().len()).collect();
    order.sort_by_key(|&e| mesh.edges()[e].vertices);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order[rng.gen_range(0..order.len())]
}

/// Representation vectors `(f1, f2)` per edge, in edge frames.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldSolution {
    pub symmetry: u32,
    pub epsilon: f64,
    pub values: Vec<[f64; 2]>,
}

impl FieldSolution {
    pub fn norms(&self) -> Vec<f64> {
        self.values.iter().map(|v| v[0].hypot(v[1])).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceLog {
    /// Residual at the starting point, before any update.
    pub initial_residual: f64,
    /// Residual 2-norm after each Newton update.
    pub residuals: Vec<f64>,
    /// Energy after each Newton update.
    pub energies: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl ConvergenceLog {
    pub fn final_residual(&self) -> f64 {
        self.residuals.last().copied().unwrap_or(self.initial_residual)
    }
}

struct Assembled {
    matrix: TripletMatrix,
    /// Residual restricted to free unknowns, in dof order.
    residual: Vec<f64>,
    energy: f64,
}

impl<'m> GlProblem<'m> {
    fn gather(&self, t: usize, field: &[[f64; 2]]) -> Vector6<f64> {
        let e = self.mesh().triangle_edges()[t];
        Vector6::new(
            field[e[0]][0],
            field[e[1]][0],
            field[e[2]][0],
            field[e[0]][1],
            field[e[1]][1],
            field[e[2]][1],
        )
    }

    fn local_dof(&self, t: usize, local: usize) -> usize {
        let e = self.mesh().triangle_edges()[t];
        2 * e[local % 3] + local / 3
    }

    /// Element system of triangle `t` about `field`, in edge frames.
    pub fn element_system(&self, t: usize, field: &[[f64; 2]], epsilon: f64) -> ElementNewton {
        element_newton(&self.elements()[t], &self.triangle_frames()[t], &self.gather(t, field), epsilon)
    }

    fn assemble_newton(&self, field: &[[f64; 2]], epsilon: f64, constraints: &Constraints) -> Assembled {
        let (map, n) = constraints.dof_map();
        let locals: Vec<ElementNewton> = (0..self.mesh().facet_count())
            .into_par_iter()
            .map(|t| self.element_system(t, field, epsilon))
            .collect();
        let mut matrix = TripletMatrix::with_capacity(n, 36 * locals.len());
        let mut residual = vec![0.0; n];
        let mut energy = 0.0;
        for (t, el) in locals.iter().enumerate() {
            energy += el.smoothing_energy + el.penalty_energy;
            for i in 0..6 {
                let Some(row) = map[self.local_dof(t, i)] else { continue };
                residual[row] += el.residual[i];
                for j in 0..6 {
                    if let Some(col) = map[self.local_dof(t, j)] {
                        matrix.push(row, col, el.matrix[(i, j)]);
                    }
                }
            }
        }
        Assembled {
            matrix,
            residual,
            energy,
        }
    }

    /// Assembled Newton residual per edge (no constraints applied).
    pub fn newton_residual(&self, field: &[[f64; 2]], epsilon: f64) -> Vec<[f64; 2]> {
        let mut out = vec![[0.0; 2]; self.edge_count()];
        for t in 0..self.mesh().facet_count() {
            let el = self.element_system(t, field, epsilon);
            let e = self.mesh().triangle_edges()[t];
            for i in 0..6 {
                out[e[i % 3]][i / 3] += el.residual[i];
            }
        }
        out
    }

    /// Full (unconstrained) Newton matrix about `field`, for inspection.
    pub fn assembled_matrix(&self, field: &[[f64; 2]], epsilon: f64) -> TripletMatrix {
        let none = Constraints {
            values: vec![None; self.edge_count()],
            pinned: None,
        };
        self.assemble_newton(field, epsilon, &none).matrix
    }

    /// Minimizer of the smoothing term alone under `constraints`.
    pub fn laplacian_init(&self, constraints: &Constraints) -> Result<Vec<[f64; 2]>, SolveError> {
        if constraints.values.iter().all(Option::is_none) {
            return Err(SolveError::Unconstrained);
        }
        let (map, n) = constraints.dof_map();
        let mut matrix = TripletMatrix::with_capacity(n, 36 * self.mesh().facet_count());
        let mut rhs = vec![0.0; n];
        for t in 0..self.mesh().facet_count() {
            let k = element_laplacian(&self.elements()[t], &self.triangle_frames()[t]);
            let e = self.mesh().triangle_edges()[t];
            for i in 0..6 {
                let Some(row) = map[self.local_dof(t, i)] else { continue };
                for j in 0..6 {
                    let dof = self.local_dof(t, j);
                    match map[dof] {
                        Some(col) => matrix.push(row, col, k[(i, j)]),
                        None => {
                            let fixed = constraints.values[e[j % 3]].expect("constrained edge");
                            rhs[row] -= k[(i, j)] * fixed[j / 3];
                        }
                    }
                }
            }
        }
        let sol = solve(&matrix, &rhs)?;
        Ok(self.scatter(&sol.x, constraints))
    }

    fn scatter(&self, free: &[f64], constraints: &Constraints) -> Vec<[f64; 2]> {
        let (map, _) = constraints.dof_map();
        (0..self.edge_count())
            .map(|e| match constraints.values[e] {
                Some(v) => v,
                None => [free[map[2 * e].unwrap()], free[map[2 * e + 1].unwrap()]],
            })
            .collect()
    }

    /// Laplacian initialization followed by Newton iterations on the
    /// Ginzburg-Landau equations.
    pub fn newton_solve(
        &self,
        options: &NewtonOptions,
    ) -> Result<(FieldSolution, ConvergenceLog, Constraints), SolveError> {
        options.validate()?;
        let epsilon = options.epsilon.resolve(self)?;
        let constraints = Constraints::new(self, options.pin, options.rng_seed)?;
        let mut init = self.laplacian_init(&constraints)?;
        for (e, v) in init.iter_mut().enumerate() {
            if constraints.is_constrained(e) {
                continue;
            }
            let norm = v[0].hypot(v[1]);
            *v = if norm > RENORMALIZE_FLOOR { [v[0] / norm, v[1] / norm] } else { [1.0, 0.0] };
        }
        let (field, log) = self.newton_from(init, epsilon, &constraints, options.tol, options.max_iter)?;
        Ok((field, log, constraints))
    }

    /// Plain Newton iterations from `start`; constrained values are kept.
    pub fn newton_from(
        &self,
        start: Vec<[f64; 2]>,
        epsilon: f64,
        constraints: &Constraints,
        tol: f64,
        max_iter: usize,
    ) -> Result<(FieldSolution, ConvergenceLog), SolveError> {
        let (map, _) = constraints.dof_map();
        let mut field = start;
        for (e, v) in field.iter_mut().enumerate() {
            if let Some(fixed) = constraints.value(e) {
                *v = fixed;
            }
        }
        let mut system = self.assemble_newton(&field, epsilon, constraints);
        let mut log = ConvergenceLog {
            initial_residual: norm2(&system.residual),
            residuals: Vec::new(),
            energies: Vec::new(),
            iterations: 0,
            converged: false,
        };
        let mut residual = log.initial_residual;
        let mut energy = system.energy;
        while residual > tol && log.iterations < max_iter {
            let rhs: Vec<f64> = system.residual.iter().map(|r| -r).collect();
            let step = solve(&system.matrix, &rhs)?;
            for e in 0..field.len() {
                if let (Some(i), Some(j)) = (map[2 * e], map[2 * e + 1]) {
                    field[e][0] += step.x[i];
                    field[e][1] += step.x[j];
                }
            }
            system = self.assemble_newton(&field, epsilon, constraints);
            residual = norm2(&system.residual);
            log.iterations += 1;
            log.residuals.push(residual);
            log.energies.push(system.energy);
            if system.energy - energy > 1e-12 * energy.abs() && residual < 1e-3 {
                log::warn!(
                    "energy increased from {energy:.12e} to {:.12e} at Newton iteration {}",
                    system.energy,
                    log.iterations
                );
            }
            energy = system.energy;
            log::debug!("newton {:3}: residual {residual:.3e} energy {energy:.10e}", log.iterations);
        }
        log.converged = residual <= tol;
        Ok((
            FieldSolution {
                symmetry: self.symmetry(),
                epsilon,
                values: field,
            },
            log,
        ))
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
