//! Direction angles, cell windings, singularities and the Poincaré-Hopf
//! certificate of a computed field.
//!
//! Edge unknowns sit at edge midpoints. The loops joining midpoints inside
//! each triangle (triangle cells), together with the loops through the
//! midpoints around each interior vertex (vertex cells), tile the surface, so
//! every singularity of the field is enclosed by exactly one cell. Windings
//! are computed on both kinds of cell; vertex cells also pick up the angle
//! defect of their vertex, which makes the windings of all cells of a closed
//! surface sum to exactly `N χ`.

use std::f64::consts::{PI, TAU};

use num_rational::Ratio;
use serde::Serialize;

use crate::fem::{FieldSolution, GlProblem};
use crate::mesh::{topology_report, FacetMesh, MeshError, Vec3};
use crate::rational::RationalJson;

/// Both components below this magnitude leave the angle undefined.
pub const UNDEFINED_NORM: f64 = 1e-12;

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Cross (or asterisk) angle `θ_f = atan2(f2, f1) / N` per edge, in
/// `(-π/N, π/N]`; `None` where the representation vector vanishes.
pub fn edge_angles(field: &FieldSolution) -> Vec<Option<f64>> {
    let n = field.symmetry as f64;
    field
        .values
        .iter()
        .map(|&[f1, f2]| {
            if f1.abs() < UNDEFINED_NORM && f2.abs() < UNDEFINED_NORM {
                None
            } else {
                Some(f2.atan2(f1) / n)
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Winding {
    pub winding: i64,
    /// Some edge of the cell has an undefined angle.
    pub degenerate: bool,
}

fn representation_angle(problem: &GlProblem, t: usize, local: usize, field: &[[f64; 2]]) -> f64 {
    let e = problem.mesh().triangle_edges()[t][local];
    let g = problem.triangle_frames()[t].to_triangle(local, field[e]);
    g[1].atan2(g[0])
}

fn is_undefined(v: [f64; 2]) -> bool {
    v[0].abs() < UNDEFINED_NORM && v[1].abs() < UNDEFINED_NORM
}

fn round_winding(total: f64) -> i64 {
    let w = total / TAU;
    let r = w.round();
    debug_assert!((w - r).abs() < 1e-6, "winding {w} is not an integer");
    r as i64
}

/// Winding of the representation vector around the midpoint loop of
/// triangle `t`, with all three values rotated into the triangle frame.
pub fn triangle_winding(problem: &GlProblem, t: usize, field: &FieldSolution) -> Winding {
    let phi: Vec<f64> = (0..3).map(|i| representation_angle(problem, t, i, &field.values)).collect();
    let total: f64 = (0..3).map(|i| wrap_angle(phi[(i + 1) % 3] - phi[i])).sum();
    let edges = problem.mesh().triangle_edges()[t];
    Winding {
        winding: round_winding(total),
        degenerate: edges.iter().any(|&e| is_undefined(field.values[e])),
    }
}

/// Per-cell windings of a field.
#[derive(Debug, Clone, PartialEq)]
pub struct CellWindings {
    pub triangles: Vec<Winding>,
    /// `None` for boundary (and pinched) vertices, whose midpoint fan is open.
    pub vertices: Vec<Option<Winding>>,
    /// Open-fan sums `Σ wrap(Δφ)` around boundary vertices, used for corner
    /// terms.
    pub boundary_fans: Vec<Option<f64>>,
}

impl CellWindings {
    pub fn total(&self) -> i64 {
        self.triangles.iter().map(|w| w.winding).sum::<i64>()
            + self.vertices.iter().flatten().map(|w| w.winding).sum::<i64>()
    }
}

pub fn cell_windings(problem: &GlProblem, field: &FieldSolution) -> CellWindings {
    let mesh = problem.mesh();
    let n = field.symmetry as f64;
    let triangles = (0..mesh.facet_count())
        .map(|t| triangle_winding(problem, t, field))
        .collect();
    let angle_sums = mesh.vertex_angle_sums();
    let fans = mesh.vertex_fans();
    let mut vertices = vec![None; mesh.vertex_count()];
    let mut boundary_fans = vec![None; mesh.vertex_count()];
    for (v, (fan, closed)) in fans.iter().enumerate() {
        if fan.is_empty() {
            continue;
        }
        let mut total = 0.0;
        let mut degenerate = false;
        for &t in fan {
            let c = mesh.triangles()[t].iter().position(|&x| x == v).unwrap();
            let entering = c;
            let leaving = (c + 2) % 3;
            let a = representation_angle(problem, t, entering, &field.values);
            let b = representation_angle(problem, t, leaving, &field.values);
            total += wrap_angle(b - a);
            let te = mesh.triangle_edges()[t];
            degenerate |= is_undefined(field.values[te[entering]]) || is_undefined(field.values[te[leaving]]);
        }
        if *closed {
            let defect = TAU - angle_sums[v];
            vertices[v] = Some(Winding {
                winding: round_winding(total + n * defect),
                degenerate,
            });
        } else {
            boundary_fans[v] = Some(total);
        }
    }
    CellWindings {
        triangles,
        vertices,
        boundary_fans,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Cell {
    Triangle(usize),
    Vertex(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Singularity {
    /// Enclosing cell, or the first cell of a merged cluster.
    pub cell: Cell,
    /// Cells merged into this singularity (length 1 unless a vanishing edge
    /// value joined several cells).
    pub cells: Vec<Cell>,
    /// Triangle centroid or vertex position (cluster mean when merged).
    pub position: Vec3,
    pub winding: i64,
    pub index: Ratio<i64>,
    /// Smallest `‖(f1, f2)‖` over the edges of the cell(s).
    pub local_min_norm: f64,
}

impl Singularity {
    pub fn triangle(&self) -> Option<usize> {
        match self.cell {
            Cell::Triangle(t) => Some(t),
            Cell::Vertex(_) => None,
        }
    }
}

#[derive(Serialize)]
struct SingularityJson {
    #[serde(skip_serializing_if = "Option::is_none")]
    triangle: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    vertex: Option<usize>,
    position: [f64; 3],
    index: RationalJson,
    min_norm: f64,
}

impl Serialize for Singularity {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let (triangle, vertex) = match self.cell {
            Cell::Triangle(t) => (Some(t), None),
            Cell::Vertex(v) => (None, Some(v)),
        };
        SingularityJson {
            triangle,
            vertex,
            position: [self.position.x, self.position.y, self.position.z],
            index: self.index.into(),
            min_norm: self.local_min_norm,
        }
        .serialize(s)
    }
}

struct Clusters {
    parent: Vec<usize>,
}

impl Clusters {
    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Every cell (or cluster of cells joined through vanishing edge values)
/// with nonzero winding, with index `winding / N`; sorted by index, then
/// triangles before vertices, then id.
pub fn extract_singularities(problem: &GlProblem, field: &FieldSolution) -> Vec<Singularity> {
    let mesh = problem.mesh();
    let windings = cell_windings(problem, field);
    let nf = mesh.facet_count();
    let nv = mesh.vertex_count();
    let norms = field.norms();
    let cell_of = |id: usize| if id < nf { Cell::Triangle(id) } else { Cell::Vertex(id - nf) };
    let mut clusters = Clusters {
        parent: (0..nf + nv).collect(),
    };
    for (e, edge) in mesh.edges().iter().enumerate() {
        if !is_undefined(field.values[e]) {
            continue;
        }
        let mut ids: Vec<usize> = edge.facets().collect();
        ids.extend(edge.vertices.iter().filter(|&&v| windings.vertices[v].is_some()).map(|&v| nf + v));
        for w in ids.windows(2) {
            clusters.union(w[0], w[1]);
        }
    }
    let mut members: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for id in 0..nf + nv {
        let live = id < nf || windings.vertices[id - nf].is_some();
        if live {
            let root = clusters.find(id);
            members.entry(root).or_default().push(id);
        }
    }
    let mut vertex_edges: Vec<Vec<usize>> = vec![Vec::new(); nv];
    for (e, edge) in mesh.edges().iter().enumerate() {
        vertex_edges[edge.vertices[0]].push(e);
        vertex_edges[edge.vertices[1]].push(e);
    }
    let n = field.symmetry as i64;
    let mut out = Vec::new();
    for ids in members.values() {
        let winding: i64 = ids
            .iter()
            .map(|&id| {
                if id < nf {
                    windings.triangles[id].winding
                } else {
                    windings.vertices[id - nf].unwrap().winding
                }
            })
            .sum();
        if winding == 0 {
            continue;
        }
        let mut position = Vec3::zeros();
        let mut min_norm = f64::INFINITY;
        for &id in ids {
            let (p, edges): (Vec3, Vec<usize>) = if id < nf {
                (mesh.centroid(id), mesh.triangle_edges()[id].to_vec())
            } else {
                (mesh.vertices()[id - nf], vertex_edges[id - nf].clone())
            };
            position += p;
            for e in edges {
                min_norm = min_norm.min(norms[e]);
            }
        }
        out.push(Singularity {
            cell: cell_of(ids[0]),
            cells: ids.iter().map(|&id| cell_of(id)).collect(),
            position: position / ids.len() as f64,
            winding,
            index: Ratio::new(winding, n),
            local_min_norm: min_norm,
        });
    }
    out.sort_by(|a, b| a.index.cmp(&b.index).then(a.cell.cmp(&b.cell)));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoincareHopfReport {
    pub interior_index_sum: RationalJson,
    pub boundary_corner_sum: RationalJson,
    pub chi: i64,
    pub discrepancy: RationalJson,
    pub pass: bool,
}

/// Nearest multiple of `1/N` to the corner turning `(π - β) / 2π` of a
/// boundary vertex with interior angle `beta`.
pub fn corner_index(beta: f64, symmetry: u32) -> Ratio<i64> {
    let n = symmetry as f64;
    Ratio::new((n * (PI - beta) / TAU).round() as i64, symmetry as i64)
}

/// Checks `Σ interior indices + Σ boundary corner indices = χ`.
pub fn poincare_hopf_check(
    problem: &GlProblem,
    singularities: &[Singularity],
) -> Result<PoincareHopfReport, MeshError> {
    let mesh = problem.mesh();
    let chi = topology_report(mesh)?.chi;
    let interior: Ratio<i64> = singularities.iter().map(|s| s.index).sum();
    let angle_sums = mesh.vertex_angle_sums();
    let corners: Ratio<i64> = mesh
        .boundary_vertex_flags()
        .iter()
        .zip(&angle_sums)
        .filter(|(&b, _)| b)
        .map(|(_, &beta)| corner_index(beta, problem.symmetry()))
        .sum();
    let discrepancy = interior + corners - Ratio::from_integer(chi);
    Ok(PoincareHopfReport {
        interior_index_sum: interior.into(),
        boundary_corner_sum: corners.into(),
        chi,
        discrepancy: discrepancy.into(),
        pass: discrepancy == Ratio::from_integer(0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate;

    fn field(symmetry: u32, values: Vec<[f64; 2]>) -> FieldSolution {
        FieldSolution {
            symmetry,
            epsilon: 1.0,
            values,
        }
    }

    #[test]
    fn angles() {
        let f = field(4, vec![[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]);
        let a = edge_angles(&f);
        assert_eq!(a[0], Some(0.0));
        assert!((a[1].unwrap() - PI / 8.0).abs() < 1e-15);
        assert_eq!(a[2], None);
        let g = field(6, vec![[-1.0, 0.0]]);
        assert!((edge_angles(&g)[0].unwrap() - PI / 6.0).abs() < 1e-15);
    }

    #[test]
    fn wrapping() {
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
    }

    fn single_triangle() -> crate::mesh::SurfaceMesh {
        crate::mesh::SurfaceMesh::new(vec![Vec3::zeros(), Vec3::x(), Vec3::y()], vec![[0, 1, 2]]).unwrap()
    }

    #[test]
    fn full_turn_in_triangle_frame() {
        let mesh = single_triangle();
        let problem = GlProblem::new(&mesh, 4).unwrap();
        let frame = &problem.triangle_frames()[0];
        // Choose edge values whose triangle-frame angles are 0, 2π/3, 4π/3.
        let values: Vec<[f64; 2]> = (0..3)
            .map(|i| {
                let target = TAU * i as f64 / 3.0;
                // to_triangle rotates by -N alpha; undo it.
                let a = target + 4.0 * frame.alpha[i];
                [a.cos(), a.sin()]
            })
            .collect();
        let mut ordered = vec![[0.0; 2]; 3];
        for (i, &e) in mesh.triangle_edges()[0].iter().enumerate() {
            ordered[e] = values[i];
        }
        let w = triangle_winding(&problem, 0, &field(4, ordered));
        assert_eq!(w.winding, 1);
        assert!(!w.degenerate);
    }

    #[test]
    fn constant_planar_field_has_no_windings() {
        let mesh = generate::random_square(6, 0.3, 11);
        let problem = GlProblem::new(&mesh, 4).unwrap();
        let values = problem
            .edge_frames()
            .iter()
            .map(|f| {
                let local = 0.2 - f.e_hat.y.atan2(f.e_hat.x);
                [(4.0 * local).cos(), (4.0 * local).sin()]
            })
            .collect();
        let f = field(4, values);
        let w = cell_windings(&problem, &f);
        assert!(w.triangles.iter().all(|w| w.winding == 0));
        assert!(w.vertices.iter().flatten().all(|w| w.winding == 0));
        assert!(extract_singularities(&problem, &f).is_empty());
    }

    #[test]
    fn corner_indices() {
        assert_eq!(corner_index(PI / 2.0, 4), Ratio::new(1, 4));
        assert_eq!(corner_index(3.0 * PI / 2.0, 4), Ratio::new(-1, 4));
        assert_eq!(corner_index(PI - 0.05, 4), Ratio::from_integer(0));
        assert_eq!(corner_index(PI / 3.0, 6), Ratio::new(2, 6));
    }
}
