//! Per-edge tangent frames and the per-triangle rotations relating them.
//!
//! Field unknowns live on edges, expressed in each edge's frame
//! `{ê, t̂ = n̂ × ê}`. Inside a triangle, the three edge frames are related to
//! the frame of the triangle's first edge by in-plane rotations; for an
//! `N`-fold field the representation vector `(cos Nθ, sin Nθ)` rotates by
//! `N` times that angle.

use std::f64::consts::PI;

use nalgebra::Matrix6;
use thiserror::Error;

use crate::mesh::{FacetMesh, SurfaceMesh, Vec3};

const FOLD_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Error, PartialEq)]
pub enum FrameError {
    #[error("edge {0} has opposite adjacent normals (fold-over)")]
    FoldOver(usize),
    #[error("edge {edge} projects to zero length in the plane of triangle {triangle}")]
    DegenerateProjection { triangle: usize, edge: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeFrame {
    pub e_hat: Vec3,
    pub n_hat: Vec3,
    pub t_hat: Vec3,
}

impl EdgeFrame {
    /// Ambient direction at angle `theta` from `ê` towards `t̂`.
    pub fn direction(&self, theta: f64) -> Vec3 {
        self.e_hat * theta.cos() + self.t_hat * theta.sin()
    }
}

pub fn build_edge_frames(mesh: &SurfaceMesh) -> Result<Vec<EdgeFrame>, FrameError> {
    mesh.edges()
        .iter()
        .enumerate()
        .map(|(i, edge)| {
            let [a, b] = edge.vertices;
            let e_hat = (mesh.vertices()[b] - mesh.vertices()[a]).normalize();
            let sum: Vec3 = edge.facets().map(|t| mesh.triangle_normal(t)).sum();
            let norm = sum.norm();
            if norm < FOLD_TOLERANCE {
                return Err(FrameError::FoldOver(i));
            }
            let n_avg = sum / norm;
            // ê lies in both adjacent planes, hence n_avg ⟂ ê up to rounding.
            let n_hat = (n_avg - e_hat * e_hat.dot(&n_avg)).normalize();
            let t_hat = n_hat.cross(&e_hat);
            Ok(EdgeFrame { e_hat, n_hat, t_hat })
        })
        .collect()
}

/// In-plane relation between a triangle's three edge frames.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleFrame {
    /// `alpha[i]` is the signed angle, about the triangle normal, turning the
    /// frame direction of local edge `i` onto that of local edge 0.
    /// A direction at angle `θ` in edge `i`'s frame sits at `θ - alpha[i]` in
    /// the triangle frame. `alpha[0] = 0`.
    pub alpha: [f64; 3],
    /// Maps edge-frame unknowns `(f1¹, f1², f1³, f2¹, f2², f2³)` to the
    /// triangle-frame values `(F1¹, F1², F1³, F2¹, F2², F2³)`.
    pub rotation: Matrix6<f64>,
}

impl TriangleFrame {
    pub fn new(alpha: [f64; 3], symmetry: u32) -> Self {
        TriangleFrame {
            alpha,
            rotation: rotation_matrix(alpha, symmetry),
        }
    }

    /// Representation vector of local edge `i`, given in its own frame,
    /// expressed in the triangle frame.
    pub fn to_triangle(&self, i: usize, f: [f64; 2]) -> [f64; 2] {
        let (c, s) = (self.rotation[(i, i)], self.rotation[(i, i + 3)]);
        [c * f[0] + s * f[1], -s * f[0] + c * f[1]]
    }
}

/// Block rotation acting on `(f1 of edges 1..3, f2 of edges 1..3)`: the
/// identity on edge 1, and `[[cos Nα, sin Nα], [-sin Nα, cos Nα]]` on the
/// `(f1, f2)` pair of edges 2 and 3.
pub fn rotation_matrix(alpha: [f64; 3], symmetry: u32) -> Matrix6<f64> {
    let n = symmetry as f64;
    let mut r = Matrix6::zeros();
    for (i, &a) in alpha.iter().enumerate() {
        let (s, c) = (n * a).sin_cos();
        r[(i, i)] = c;
        r[(i, i + 3)] = s;
        r[(i + 3, i)] = -s;
        r[(i + 3, i + 3)] = c;
    }
    r
}

pub fn triangle_frames(
    mesh: &SurfaceMesh,
    frames: &[EdgeFrame],
    symmetry: u32,
) -> Result<Vec<TriangleFrame>, FrameError> {
    (0..mesh.facet_count())
        .map(|t| {
            let normal = mesh.triangle_normal(t);
            let edges = mesh.triangle_edges()[t];
            let mut projected = [Vec3::zeros(); 3];
            for (i, &e) in edges.iter().enumerate() {
                let d = frames[e].e_hat;
                let p = d - normal * d.dot(&normal);
                let len = p.norm();
                if len < FOLD_TOLERANCE {
                    return Err(FrameError::DegenerateProjection { triangle: t, edge: e });
                }
                projected[i] = p / len;
            }
            let x = projected[0];
            let y = normal.cross(&x);
            let mut alpha = [0.0; 3];
            for i in 1..3 {
                let gamma = projected[i].dot(&y).atan2(projected[i].dot(&x));
                let a = -gamma;
                alpha[i] = if a <= -PI { a + 2.0 * PI } else { a };
            }
            Ok(TriangleFrame::new(alpha, symmetry))
        })
        .collect()
}
