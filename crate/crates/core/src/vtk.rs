//! Legacy ASCII VTK export of a direction field: one point per edge midpoint,
//! one triangle cell per mesh triangle (joining its three edge midpoints).

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use crate::analysis::CellWindings;
use crate::fem::{FieldSolution, GlProblem};
use crate::mesh::FacetMesh;

/// Renders the field with point data `direction_branch` (the branch
/// `θ = atan2(f2, f1) / N` as an ambient unit vector), `norm` and `theta`,
/// and cell data `winding` (0 where the winding is undefined).
pub fn field_to_vtk(problem: &GlProblem, field: &FieldSolution, windings: &CellWindings) -> String {
    let mesh = problem.mesh();
    let frames = problem.edge_frames();
    let n = field.symmetry as f64;
    let ne = mesh.edges().len();
    let nt = mesh.facet_count();
    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\n");
    let _ = writeln!(out, "direction field N={} epsilon={}", field.symmetry, field.epsilon);
    out.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(out, "POINTS {ne} double");
    for e in 0..ne {
        let p = mesh.edge_midpoint(e);
        let _ = writeln!(out, "{:.17e} {:.17e} {:.17e}", p.x, p.y, p.z);
    }
    let _ = writeln!(out, "CELLS {nt} {}", 4 * nt);
    for edges in mesh.triangle_edges() {
        let _ = writeln!(out, "3 {} {} {}", edges[0], edges[1], edges[2]);
    }
    let _ = writeln!(out, "CELL_TYPES {nt}");
    for _ in 0..nt {
        out.push_str("5\n");
    }
    let thetas: Vec<f64> = field.values.iter().map(|v| v[1].atan2(v[0]) / n).collect();
    let _ = writeln!(out, "POINT_DATA {ne}");
    out.push_str("VECTORS direction_branch double\n");
    for (frame, &theta) in frames.iter().zip(&thetas) {
        let d = frame.direction(theta);
        let _ = writeln!(out, "{:.17e} {:.17e} {:.17e}", d.x, d.y, d.z);
    }
    out.push_str("SCALARS norm double 1\nLOOKUP_TABLE default\n");
    for v in &field.values {
        let _ = writeln!(out, "{:.17e}", v[0].hypot(v[1]));
    }
    out.push_str("SCALARS theta double 1\nLOOKUP_TABLE default\n");
    for theta in &thetas {
        let _ = writeln!(out, "{theta:.17e}");
    }
    let _ = writeln!(out, "CELL_DATA {nt}");
    out.push_str("SCALARS winding int 1\nLOOKUP_TABLE default\n");
    for w in &windings.triangles {
        let value = if w.degenerate { 0 } else { w.winding };
        let _ = writeln!(out, "{value}");
    }
    out
}

pub fn write_field_vtk(
    path: impl AsRef<Path>,
    problem: &GlProblem,
    field: &FieldSolution,
    windings: &CellWindings,
) -> io::Result<()> {
    std::fs::write(path, field_to_vtk(problem, field, windings))
}
