//! Elementary Ginzburg-Landau contributions of one Crouzeix-Raviart triangle.

use nalgebra::{Matrix3, Matrix6, Vector6};

use super::shapes::{shapes_at_quadrature, CR_GRADIENTS, QUADRATURE};
use crate::frames::TriangleFrame;
use crate::mesh::SurfaceMesh;

/// Planar chart data of one triangle: its area and the shape-function
/// gradients in an isometric 2D frame of its own plane.
#[derive(Debug, Clone)]
pub struct ElementGeometry {
    pub area: f64,
    pub gradients: [[f64; 2]; 3],
    /// `∫ ∇ω_m · ∇ω_n`.
    pub stiffness: Matrix3<f64>,
}

impl ElementGeometry {
    pub fn new(mesh: &SurfaceMesh, t: usize) -> Self {
        let [a, b, c] = mesh.corners(t);
        let normal = mesh.triangle_normal(t);
        let x_axis = (b - a).normalize();
        let y_axis = normal.cross(&x_axis);
        let (bx, by) = ((b - a).dot(&x_axis), (b - a).dot(&y_axis));
        let (cx, cy) = ((c - a).dot(&x_axis), (c - a).dot(&y_axis));
        // x(ξ, η) = ξ (b - a) + η (c - a); gradients map through J^{-T}.
        let det = bx * cy - cx * by;
        let inv_t = [[cy / det, -by / det], [-cx / det, bx / det]];
        let gradients = CR_GRADIENTS.map(|g| {
            [
                inv_t[0][0] * g[0] + inv_t[0][1] * g[1],
                inv_t[1][0] * g[0] + inv_t[1][1] * g[1],
            ]
        });
        let area = 0.5 * det.abs();
        let stiffness = Matrix3::from_fn(|m, n| {
            area * (gradients[m][0] * gradients[n][0] + gradients[m][1] * gradients[n][1])
        });
        ElementGeometry {
            area,
            gradients,
            stiffness,
        }
    }
}

/// Linearized element system in the triangle frame (`K`, `B`) and in the
/// edge frames (`k = Rᵀ K R`, `b = Rᵀ B`), so that `k f_next = b`.
#[derive(Debug, Clone)]
pub struct ElementNewton {
    pub triangle_matrix: Matrix6<f64>,
    pub triangle_rhs: Vector6<f64>,
    pub matrix: Matrix6<f64>,
    pub rhs: Vector6<f64>,
    /// Weak Ginzburg-Landau residual at `prev`, in edge frames.
    pub residual: Vector6<f64>,
    pub smoothing_energy: f64,
    pub penalty_energy: f64,
}

/// Newton contribution of one element about the previous iterate `prev`
/// (edge-frame unknowns ordered `(f1¹, f1², f1³, f2¹, f2², f2³)`).
///
/// The matrix is the exact second variation of the Ginzburg-Landau energy:
/// diagonal blocks `∫ ∇ω_m·∇ω_n + ε⁻² (F1² + F2² - 1 + 2 F_i²) ω_m ω_n`,
/// off-diagonal blocks `∫ 2 ε⁻² F1 F2 ω_m ω_n`.
pub fn element_newton(
    geometry: &ElementGeometry,
    frame: &TriangleFrame,
    prev: &Vector6<f64>,
    epsilon: f64,
) -> ElementNewton {
    let rot = &frame.rotation;
    let f = rot * prev;
    let inv_eps2 = 1.0 / (epsilon * epsilon);
    let shapes = shapes_at_quadrature();
    let s = &geometry.stiffness;

    let mut k = Matrix6::zeros();
    let mut residual = Vector6::zeros();
    let mut penalty = 0.0;
    for (q, w) in QUADRATURE.iter().zip(shapes.iter()) {
        let weight = q.weight * geometry.area;
        let f1: f64 = (0..3).map(|m| w[m] * f[m]).sum();
        let f2: f64 = (0..3).map(|m| w[m] * f[m + 3]).sum();
        let rho = f1 * f1 + f2 * f2 - 1.0;
        penalty += weight * rho * rho;
        let c11 = weight * inv_eps2 * (rho + 2.0 * f1 * f1);
        let c22 = weight * inv_eps2 * (rho + 2.0 * f2 * f2);
        let c12 = weight * inv_eps2 * 2.0 * f1 * f2;
        for m in 0..3 {
            residual[m] += weight * inv_eps2 * rho * f1 * w[m];
            residual[m + 3] += weight * inv_eps2 * rho * f2 * w[m];
            for n in 0..3 {
                let ww = w[m] * w[n];
                k[(m, n)] += c11 * ww;
                k[(m + 3, n + 3)] += c22 * ww;
                k[(m, n + 3)] += c12 * ww;
                k[(m + 3, n)] += c12 * ww;
            }
        }
    }
    let mut smoothing = 0.0;
    for m in 0..3 {
        for n in 0..3 {
            k[(m, n)] += s[(m, n)];
            k[(m + 3, n + 3)] += s[(m, n)];
            residual[m] += s[(m, n)] * f[n];
            residual[m + 3] += s[(m, n)] * f[n + 3];
            smoothing += 0.5 * s[(m, n)] * (f[m] * f[n] + f[m + 3] * f[n + 3]);
        }
    }
    let triangle_rhs = k * f - residual;
    ElementNewton {
        matrix: rot.transpose() * k * rot,
        rhs: rot.transpose() * triangle_rhs,
        residual: rot.transpose() * residual,
        triangle_matrix: k,
        triangle_rhs,
        smoothing_energy: smoothing,
        penalty_energy: 0.25 * inv_eps2 * penalty,
    }
}

/// Smoothing-only element matrix `Rᵀ diag(S, S) R` in edge frames.
pub fn element_laplacian(geometry: &ElementGeometry, frame: &TriangleFrame) -> Matrix6<f64> {
    let mut k = Matrix6::zeros();
    for m in 0..3 {
        for n in 0..3 {
            k[(m, n)] = geometry.stiffness[(m, n)];
            k[(m + 3, n + 3)] = geometry.stiffness[(m, n)];
        }
    }
    frame.rotation.transpose() * k * frame.rotation
}
