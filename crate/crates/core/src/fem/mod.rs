//! Crouzeix-Raviart discretization of the Ginzburg-Landau equations for
//! `N`-fold direction fields, with a Laplacian initializer and a Newton
//! driver.

mod element;
mod energy;
pub mod linsolve;
mod shapes;
mod solver;

pub use element::{element_laplacian, element_newton, ElementGeometry, ElementNewton};
pub use energy::{gl_energy, gl_weak_residual, residual_norm, Energy};
pub use shapes::{cr_shapes, shapes_at_quadrature, QuadraturePoint, CR_GRADIENTS, QUADRATURE};
pub use solver::{
    ConvergenceLog, Constraints, EpsilonPolicy, FieldSolution, NewtonOptions, PinPolicy,
};

use thiserror::Error;

use crate::frames::{build_edge_frames, triangle_frames, EdgeFrame, FrameError, TriangleFrame};
use crate::mesh::{topology_report, FacetMesh, MeshError, SurfaceMesh};
use linsolve::LinearSolveError;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Geometry(#[from] FrameError),
    #[error("the solver needs a single connected component, found {0}")]
    Disconnected(usize),
    #[error("no boundary and no pinned edge: the smoothing system is singular")]
    Unconstrained,
    #[error("pinned edge {0} does not exist")]
    InvalidPin(usize),
    #[error("invalid solver option: {0}")]
    InvalidOption(String),
    #[error(transparent)]
    LinearSolver(#[from] LinearSolveError),
}

/// Mesh, frames and element geometry for one symmetry order.
#[derive(Debug, Clone)]
pub struct GlProblem<'m> {
    mesh: &'m SurfaceMesh,
    symmetry: u32,
    edge_frames: Vec<EdgeFrame>,
    triangle_frames: Vec<TriangleFrame>,
    elements: Vec<ElementGeometry>,
}

impl<'m> GlProblem<'m> {
    pub fn new(mesh: &'m SurfaceMesh, symmetry: u32) -> Result<Self, SolveError> {
        if symmetry == 0 {
            return Err(SolveError::InvalidOption("symmetry order must be at least 1".into()));
        }
        let topo = topology_report(mesh)?;
        if !topo.is_connected() {
            return Err(SolveError::Disconnected(topo.components.len()));
        }
        let edge_frames = build_edge_frames(mesh)?;
        let triangle_frames = triangle_frames(mesh, &edge_frames, symmetry)?;
        let elements = (0..mesh.triangles().len())
            .map(|t| ElementGeometry::new(mesh, t))
            .collect();
        Ok(GlProblem {
            mesh,
            symmetry,
            edge_frames,
            triangle_frames,
            elements,
        })
    }

    pub fn mesh(&self) -> &'m SurfaceMesh {
        self.mesh
    }

    pub fn symmetry(&self) -> u32 {
        self.symmetry
    }

    pub fn edge_frames(&self) -> &[EdgeFrame] {
        &self.edge_frames
    }

    pub fn triangle_frames(&self) -> &[TriangleFrame] {
        &self.triangle_frames
    }

    pub fn elements(&self) -> &[ElementGeometry] {
        &self.elements
    }

    pub fn edge_count(&self) -> usize {
        self.mesh.edges().len()
    }
}
