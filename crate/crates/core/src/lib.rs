//! Smooth `N`-fold direction fields (cross fields for `N = 4`, asterisk fields
//! for `N = 6`) on triangulated surfaces, computed from the Ginzburg-Landau
//! equations with Crouzeix-Raviart elements, with singularity extraction and
//! topological certification.

pub mod analysis;
pub mod asymptotics;
pub mod audit;
pub mod cli;
pub mod fem;
pub mod frames;
pub mod generate;
pub mod mesh;
pub mod rational;
pub mod report;
pub mod vtk;
