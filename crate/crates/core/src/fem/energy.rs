//! Direct evaluation of the Ginzburg-Landau energy and of its weak
//! Euler-Lagrange residual from edge values.
//!
//! These routines work straight from the angles `alpha` and the shape
//! functions, without the element matrices used by the Newton driver, so they
//! serve as an independent check of converged fields.

use serde::Serialize;

use super::shapes::{shapes_at_quadrature, QUADRATURE};
use super::GlProblem;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Energy {
    pub smoothing: f64,
    pub penalty: f64,
    pub total: f64,
}

/// Triangle-frame values `(F1, F2)` of the three edges of triangle `t`.
fn triangle_values(problem: &GlProblem, t: usize, field: &[[f64; 2]]) -> [[f64; 2]; 3] {
    let n = problem.symmetry() as f64;
    let edges = problem.mesh().triangle_edges()[t];
    let alpha = problem.triangle_frames()[t].alpha;
    let mut out = [[0.0; 2]; 3];
    for i in 0..3 {
        let [f1, f2] = field[edges[i]];
        let (s, c) = (n * alpha[i]).sin_cos();
        out[i] = [c * f1 + s * f2, -s * f1 + c * f2];
    }
    out
}

pub fn gl_energy(problem: &GlProblem, field: &[[f64; 2]], epsilon: f64) -> Energy {
    let shapes = shapes_at_quadrature();
    let mut smoothing = 0.0;
    let mut penalty = 0.0;
    for t in 0..problem.mesh().triangles().len() {
        let geo = &problem.elements()[t];
        let v = triangle_values(problem, t, field);
        for comp in 0..2 {
            let gx: f64 = (0..3).map(|i| v[i][comp] * geo.gradients[i][0]).sum();
            let gy: f64 = (0..3).map(|i| v[i][comp] * geo.gradients[i][1]).sum();
            smoothing += 0.5 * geo.area * (gx * gx + gy * gy);
        }
        for (q, w) in QUADRATURE.iter().zip(shapes.iter()) {
            let f1: f64 = (0..3).map(|i| w[i] * v[i][0]).sum();
            let f2: f64 = (0..3).map(|i| w[i] * v[i][1]).sum();
            let rho = f1 * f1 + f2 * f2 - 1.0;
            penalty += q.weight * geo.area * rho * rho;
        }
    }
    let penalty = penalty / (4.0 * epsilon * epsilon);
    Energy {
        smoothing,
        penalty,
        total: smoothing + penalty,
    }
}

/// Gradient of [`gl_energy`] with respect to every edge unknown: the weak
/// form of `-∇²f + ε⁻² (|f|² - 1) f = 0` tested against each shape function.
pub fn gl_weak_residual(problem: &GlProblem, field: &[[f64; 2]], epsilon: f64) -> Vec<[f64; 2]> {
    let n = problem.symmetry() as f64;
    let shapes = shapes_at_quadrature();
    let inv_eps2 = 1.0 / (epsilon * epsilon);
    let mut out = vec![[0.0; 2]; field.len()];
    for t in 0..problem.mesh().triangles().len() {
        let geo = &problem.elements()[t];
        let v = triangle_values(problem, t, field);
        let mut local = [[0.0; 2]; 3];
        for comp in 0..2 {
            let gx: f64 = (0..3).map(|i| v[i][comp] * geo.gradients[i][0]).sum();
            let gy: f64 = (0..3).map(|i| v[i][comp] * geo.gradients[i][1]).sum();
            for m in 0..3 {
                local[m][comp] += geo.area * (gx * geo.gradients[m][0] + gy * geo.gradients[m][1]);
            }
        }
        for (q, w) in QUADRATURE.iter().zip(shapes.iter()) {
            let f1: f64 = (0..3).map(|i| w[i] * v[i][0]).sum();
            let f2: f64 = (0..3).map(|i| w[i] * v[i][1]).sum();
            let rho = f1 * f1 + f2 * f2 - 1.0;
            for m in 0..3 {
                let c = q.weight * geo.area * inv_eps2 * rho * w[m];
                local[m][0] += c * f1;
                local[m][1] += c * f2;
            }
        }
        let edges = problem.mesh().triangle_edges()[t];
        let alpha = problem.triangle_frames()[t].alpha;
        for m in 0..3 {
            // Chain rule through F = [[c, s], [-s, c]] f.
            let (s, c) = (n * alpha[m]).sin_cos();
            let [r1, r2] = local[m];
            out[edges[m]][0] += c * r1 - s * r2;
            out[edges[m]][1] += s * r1 + c * r2;
        }
    }
    out
}

/// Euclidean norm of the residual over unconstrained unknowns.
pub fn residual_norm(residual: &[[f64; 2]], constrained: &[bool]) -> f64 {
    residual
        .iter()
        .zip(constrained)
        .filter(|(_, &c)| !c)
        .map(|(r, _)| r[0] * r[0] + r[1] * r[1])
        .sum::<f64>()
        .sqrt()
}
