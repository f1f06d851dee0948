//! Indexed surface meshes (triangles or quadrangles), their connectivity and
//! global topological invariants.

mod io;
mod topology;

use std::collections::HashMap;
use std::path::Path;

use nalgebra::Vector3;
use thiserror::Error;

pub use io::{parse_msh, parse_obj, parse_off, write_msh, write_obj, write_off, MeshFormat, PolygonSoup};
pub use topology::{mean_edge_length, topology_report, ComponentTopology, TopologyReport};

pub type Vec3 = Vector3<f64>;

/// Relative area threshold, scaled by the squared longest edge, below which a
/// triangle is treated as degenerate.
const DEGENERATE_AREA_RATIO: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot detect mesh format of {0} (use a .off, .obj or .msh extension or a format hint)")]
    UnknownFormat(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("mesh has no facets")]
    Empty,
    #[error("meshes mixing triangles and quadrangles are not supported")]
    MixedElements,
    #[error("facet {facet} has {size} vertices; only triangles and quadrangles are supported")]
    UnsupportedFacet { facet: usize, size: usize },
    #[error("facet {facet} references vertex {vertex} but only {count} vertices exist")]
    VertexOutOfRange {
        facet: usize,
        vertex: usize,
        count: usize,
    },
    #[error("facet {0} repeats a vertex")]
    RepeatedVertex(usize),
    #[error("edge ({0}, {1}) is shared by more than two facets")]
    NonManifoldEdge(usize, usize),
    #[error("edge ({0}, {1}) is traversed in the same direction by both adjacent facets")]
    InconsistentOrientation(usize, usize),
    #[error("degenerate (zero-area) triangles: {0:?}")]
    DegenerateTriangles(Vec<usize>),
    #[error("boundary chain through vertex {0} does not close")]
    OpenBoundary(usize),
}

/// A unique unordered edge. `vertices` is sorted ascending, which also fixes
/// the edge's frame orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub vertices: [usize; 2],
    /// Adjacent facets; the second slot is `None` on boundary edges.
    pub facets: [Option<usize>; 2],
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.facets[1].is_none()
    }

    pub fn facets(&self) -> impl Iterator<Item = usize> + '_ {
        self.facets.iter().flatten().copied()
    }

    pub fn other_facet(&self, facet: usize) -> Option<usize> {
        match self.facets {
            [Some(a), Some(b)] if a == facet => Some(b),
            [Some(a), Some(b)] if b == facet => Some(a),
            _ => None,
        }
    }
}

/// Common read access for triangle and quadrangle meshes.
pub trait FacetMesh {
    /// Vertices per facet (3 or 4).
    const FACET_SIZE: usize;

    fn vertices(&self) -> &[Vec3];
    fn facet(&self, index: usize) -> &[usize];
    fn facet_count(&self) -> usize;
    fn edges(&self) -> &[Edge];
    fn facet_edges(&self, index: usize) -> &[usize];

    fn vertex_count(&self) -> usize {
        self.vertices().len()
    }

    fn boundary_edge_count(&self) -> usize {
        self.edges().iter().filter(|e| e.is_boundary()).count()
    }

    /// Per-vertex flag, true for vertices touching a boundary edge.
    fn boundary_vertex_flags(&self) -> Vec<bool> {
        let mut flags = vec![false; self.vertex_count()];
        for e in self.edges().iter().filter(|e| e.is_boundary()) {
            flags[e.vertices[0]] = true;
            flags[e.vertices[1]] = true;
        }
        flags
    }

    /// Number of facets incident to each vertex.
    fn valences(&self) -> Vec<usize> {
        let mut valence = vec![0; self.vertex_count()];
        for f in 0..self.facet_count() {
            for &v in self.facet(f) {
                valence[v] += 1;
            }
        }
        valence
    }
}

/// Indexed triangle mesh with a derived unique-edge table.
///
/// Local edge `i` of triangle `[a, b, c]` joins corners `i` and `i + 1`
/// (mod 3): edge 0 is `(a, b)`, edge 1 is `(b, c)`, edge 2 is `(c, a)`.
#[derive(Debug, Clone)]
pub struct SurfaceMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<Edge>,
    triangle_edges: Vec<[usize; 3]>,
}

impl SurfaceMesh {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        let faces: Vec<&[usize]> = triangles.iter().map(|t| t.as_slice()).collect();
        let (edges, facet_edges) = build_edges(vertices.len(), &faces)?;
        let triangle_edges = facet_edges
            .into_iter()
            .map(|fe| [fe[0], fe[1], fe[2]])
            .collect();
        let mesh = SurfaceMesh {
            vertices,
            triangles,
            edges,
            triangle_edges,
        };
        let degenerate: Vec<usize> = (0..mesh.triangles.len())
            .filter(|&t| {
                let [a, b, c] = mesh.corners(t);
                let longest = (b - a).norm_squared().max((c - b).norm_squared()).max((a - c).norm_squared());
                mesh.area(t) <= DEGENERATE_AREA_RATIO * longest
            })
            .collect();
        if !degenerate.is_empty() {
            return Err(MeshError::DegenerateTriangles(degenerate));
        }
        Ok(mesh)
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn triangle_edges(&self) -> &[[usize; 3]] {
        &self.triangle_edges
    }

    pub fn boundary_edge_flags(&self) -> Vec<bool> {
        self.edges.iter().map(Edge::is_boundary).collect()
    }

    pub fn has_boundary(&self) -> bool {
        self.edges.iter().any(Edge::is_boundary)
    }

    pub fn corners(&self, t: usize) -> [Vec3; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Unit normal following the counterclockwise corner order.
    pub fn triangle_normal(&self, t: usize) -> Vec3 {
        let [a, b, c] = self.corners(t);
        (b - a).cross(&(c - a)).normalize()
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.corners(t);
        0.5 * (b - a).cross(&(c - a)).norm()
    }

    pub fn centroid(&self, t: usize) -> Vec3 {
        let [a, b, c] = self.corners(t);
        (a + b + c) / 3.0
    }

    pub fn edge_midpoint(&self, e: usize) -> Vec3 {
        let [a, b] = self.edges[e].vertices;
        0.5 * (self.vertices[a] + self.vertices[b])
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edges[e].vertices;
        (self.vertices[b] - self.vertices[a]).norm()
    }

    /// Local slot (0..3) of `edge` inside triangle `t`.
    pub fn local_edge_index(&self, t: usize, edge: usize) -> Option<usize> {
        self.triangle_edges[t].iter().position(|&e| e == edge)
    }

    /// Interior angle of triangle `t` at local corner `corner`.
    pub fn corner_angle(&self, t: usize, corner: usize) -> f64 {
        let p = self.corners(t);
        let a = p[corner];
        let u = p[(corner + 1) % 3] - a;
        let v = p[(corner + 2) % 3] - a;
        u.cross(&v).norm().atan2(u.dot(&v))
    }

    /// Sum of the triangle corner angles at every vertex.
    pub fn vertex_angle_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.vertices.len()];
        for (t, tri) in self.triangles.iter().enumerate() {
            for (corner, &v) in tri.iter().enumerate() {
                sums[v] += self.corner_angle(t, corner);
            }
        }
        sums
    }

    /// Triangles incident to each vertex, ordered counterclockwise around it.
    /// For boundary vertices the fan starts at the triangle holding the
    /// incoming boundary edge and the second element of the pair is `false`;
    /// interior fans are closed and flagged `true`. Vertices whose star is not
    /// a single disk or half-disk (pinched vertices) get an empty fan.
    pub fn vertex_fans(&self) -> Vec<(Vec<usize>, bool)> {
        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); self.vertices.len()];
        for (t, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                incident[v].push(t);
            }
        }
        (0..self.vertices.len())
            .map(|v| self.fan_around(v, &incident[v]))
            .collect()
    }

    fn fan_around(&self, v: usize, incident: &[usize]) -> (Vec<usize>, bool) {
        if incident.is_empty() {
            return (Vec::new(), false);
        }
        // Counterclockwise around v, triangle t is left through the local edge
        // that ends at v (edge (prev, v)) and entered through (v, next).
        let leaving_edge = |t: usize| {
            let c = self.triangles[t].iter().position(|&x| x == v).unwrap();
            self.triangle_edges[t][(c + 2) % 3]
        };
        let entering_edge = |t: usize| {
            let c = self.triangles[t].iter().position(|&x| x == v).unwrap();
            self.triangle_edges[t][c]
        };
        let start = incident
            .iter()
            .copied()
            .find(|&t| self.edges[entering_edge(t)].is_boundary());
        let closed = start.is_none();
        let first = start.unwrap_or(incident[0]);
        let mut fan = vec![first];
        let mut current = first;
        loop {
            let e = leaving_edge(current);
            match self.edges[e].other_facet(current) {
                Some(next) if next == first => break,
                Some(next) => {
                    if fan.len() > incident.len() {
                        return (Vec::new(), closed);
                    }
                    fan.push(next);
                    current = next;
                }
                None => break,
            }
        }
        if fan.len() != incident.len() {
            return (Vec::new(), closed);
        }
        (fan, closed)
    }
}

impl FacetMesh for SurfaceMesh {
    const FACET_SIZE: usize = 3;

    fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }
    fn facet(&self, index: usize) -> &[usize] {
        &self.triangles[index]
    }
    fn facet_count(&self) -> usize {
        self.triangles.len()
    }
    fn edges(&self) -> &[Edge] {
        &self.edges
    }
    fn facet_edges(&self, index: usize) -> &[usize] {
        &self.triangle_edges[index]
    }
}

/// Indexed quadrangle mesh.
#[derive(Debug, Clone)]
pub struct QuadMesh {
    vertices: Vec<Vec3>,
    quads: Vec<[usize; 4]>,
    edges: Vec<Edge>,
    quad_edges: Vec<[usize; 4]>,
    boundary_vertex_flags: Vec<bool>,
}

impl QuadMesh {
    pub fn new(vertices: Vec<Vec3>, quads: Vec<[usize; 4]>) -> Result<Self, MeshError> {
        let faces: Vec<&[usize]> = quads.iter().map(|q| q.as_slice()).collect();
        let (edges, facet_edges) = build_edges(vertices.len(), &faces)?;
        let quad_edges = facet_edges
            .into_iter()
            .map(|fe| [fe[0], fe[1], fe[2], fe[3]])
            .collect();
        let mut mesh = QuadMesh {
            vertices,
            quads,
            edges,
            quad_edges,
            boundary_vertex_flags: Vec::new(),
        };
        mesh.boundary_vertex_flags = FacetMesh::boundary_vertex_flags(&mesh);
        Ok(mesh)
    }

    pub fn quads(&self) -> &[[usize; 4]] {
        &self.quads
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertex_flags[v]
    }
}

impl FacetMesh for QuadMesh {
    const FACET_SIZE: usize = 4;

    fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }
    fn facet(&self, index: usize) -> &[usize] {
        &self.quads[index]
    }
    fn facet_count(&self) -> usize {
        self.quads.len()
    }
    fn edges(&self) -> &[Edge] {
        &self.edges
    }
    fn facet_edges(&self, index: usize) -> &[usize] {
        &self.quad_edges[index]
    }
    fn boundary_vertex_flags(&self) -> Vec<bool> {
        if self.boundary_vertex_flags.len() == self.vertices.len() {
            return self.boundary_vertex_flags.clone();
        }
        let mut flags = vec![false; self.vertices.len()];
        for e in self.edges.iter().filter(|e| e.is_boundary()) {
            flags[e.vertices[0]] = true;
            flags[e.vertices[1]] = true;
        }
        flags
    }
}

/// Either kind of mesh a file can hold.
#[derive(Debug, Clone)]
pub enum LoadedMesh {
    Triangles(SurfaceMesh),
    Quads(QuadMesh),
}

impl LoadedMesh {
    /// Validates a parsed polygon soup: all facets must share one size (3 or
    /// 4); unreferenced vertices are dropped with a warning.
    pub fn from_soup(soup: PolygonSoup) -> Result<Self, MeshError> {
        let PolygonSoup { vertices, faces } = soup;
        if faces.is_empty() {
            return Err(MeshError::Empty);
        }
        let size = faces[0].len();
        for (i, f) in faces.iter().enumerate() {
            if f.len() != 3 && f.len() != 4 {
                return Err(MeshError::UnsupportedFacet { facet: i, size: f.len() });
            }
        }
        if faces.iter().any(|f| f.len() != size) {
            return Err(MeshError::MixedElements);
        }
        for (i, f) in faces.iter().enumerate() {
            if let Some(&v) = f.iter().find(|&&v| v >= vertices.len()) {
                return Err(MeshError::VertexOutOfRange {
                    facet: i,
                    vertex: v,
                    count: vertices.len(),
                });
            }
        }
        let (vertices, faces) = prune_unreferenced(vertices, faces);
        if size == 3 {
            let tris = faces.iter().map(|f| [f[0], f[1], f[2]]).collect();
            Ok(LoadedMesh::Triangles(SurfaceMesh::new(vertices, tris)?))
        } else {
            let quads = faces.iter().map(|f| [f[0], f[1], f[2], f[3]]).collect();
            Ok(LoadedMesh::Quads(QuadMesh::new(vertices, quads)?))
        }
    }

    pub fn into_triangles(self) -> Option<SurfaceMesh> {
        match self {
            LoadedMesh::Triangles(m) => Some(m),
            LoadedMesh::Quads(_) => None,
        }
    }

    pub fn into_quads(self) -> Option<QuadMesh> {
        match self {
            LoadedMesh::Quads(m) => Some(m),
            LoadedMesh::Triangles(_) => None,
        }
    }
}

/// Reads a mesh file. The format comes from `hint` or else the extension.
pub fn load_mesh(path: impl AsRef<Path>, hint: Option<MeshFormat>) -> Result<LoadedMesh, MeshError> {
    let path = path.as_ref();
    let format = match hint {
        Some(f) => f,
        None => MeshFormat::from_path(path).ok_or_else(|| MeshError::UnknownFormat(path.display().to_string()))?,
    };
    let text = std::fs::read_to_string(path).map_err(|source| MeshError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let soup = format.parse(&text)?;
    LoadedMesh::from_soup(soup)
}

fn prune_unreferenced(vertices: Vec<Vec3>, faces: Vec<Vec<usize>>) -> (Vec<Vec3>, Vec<Vec<usize>>) {
    let mut remap = vec![usize::MAX; vertices.len()];
    let mut kept = Vec::with_capacity(vertices.len());
    for f in &faces {
        for &v in f {
            if remap[v] == usize::MAX {
                remap[v] = 0;
            }
        }
    }
    for (v, slot) in remap.iter_mut().enumerate() {
        if *slot != usize::MAX {
            *slot = kept.len();
            kept.push(vertices[v]);
        }
    }
    if kept.len() < vertices.len() {
        log::warn!("pruned {} unreferenced vertices", vertices.len() - kept.len());
    }
    let faces = faces
        .into_iter()
        .map(|f| f.into_iter().map(|v| remap[v]).collect())
        .collect();
    (kept, faces)
}

/// Builds the unique-edge table and per-facet edge ids, enforcing the
/// manifold and consistent-orientation invariants.
fn build_edges(vertex_count: usize, faces: &[&[usize]]) -> Result<(Vec<Edge>, Vec<Vec<usize>>), MeshError> {
    let mut lookup: HashMap<(usize, usize), usize> = HashMap::with_capacity(faces.len() * 2);
    let mut edges: Vec<Edge> = Vec::with_capacity(faces.len() * 2);
    // Whether the first adjacent facet traverses the edge in ascending order.
    let mut first_forward: Vec<bool> = Vec::with_capacity(faces.len() * 2);
    let mut facet_edges = Vec::with_capacity(faces.len());
    for (fi, face) in faces.iter().enumerate() {
        let k = face.len();
        for (i, &v) in face.iter().enumerate() {
            if v >= vertex_count {
                return Err(MeshError::VertexOutOfRange {
                    facet: fi,
                    vertex: v,
                    count: vertex_count,
                });
            }
            if face[i + 1..].contains(&v) {
                return Err(MeshError::RepeatedVertex(fi));
            }
        }
        let mut ids = Vec::with_capacity(k);
        for i in 0..k {
            let (a, b) = (face[i], face[(i + 1) % k]);
            let key = (a.min(b), a.max(b));
            let forward = a < b;
            match lookup.get(&key) {
                None => {
                    lookup.insert(key, edges.len());
                    ids.push(edges.len());
                    edges.push(Edge {
                        vertices: [key.0, key.1],
                        facets: [Some(fi), None],
                    });
                    first_forward.push(forward);
                }
                Some(&id) => {
                    let e = &mut edges[id];
                    if e.facets[1].is_some() {
                        return Err(MeshError::NonManifoldEdge(key.0, key.1));
                    }
                    if first_forward[id] == forward {
                        return Err(MeshError::InconsistentOrientation(key.0, key.1));
                    }
                    e.facets[1] = Some(fi);
                    ids.push(id);
                }
            }
        }
        facet_edges.push(ids);
    }
    Ok((edges, facet_edges))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn octahedron() -> SurfaceMesh {
        crate::generate::octahedron()
    }

    #[test]
    fn octahedron_connectivity() {
        let m = octahedron();
        assert_eq!(m.vertex_count(), 6);
        assert_eq!(m.facet_count(), 8);
        assert_eq!(m.edges().len(), 12);
        assert_eq!(m.boundary_edge_count(), 0);
        for (t, te) in m.triangle_edges().iter().enumerate() {
            let tri = m.triangles()[t];
            for i in 0..3 {
                let e = &m.edges()[te[i]];
                let (a, b) = (tri[i], tri[(i + 1) % 3]);
                assert_eq!(e.vertices, [a.min(b), a.max(b)]);
            }
        }
    }

    #[test]
    fn single_triangle_has_three_boundary_edges() {
        let m = SurfaceMesh::new(
            vec![Vec3::zeros(), Vec3::x(), Vec3::y()],
            vec![[0, 1, 2]],
        )
        .unwrap();
        assert_eq!(m.edges().len(), 3);
        assert!(m.boundary_edge_flags().iter().all(|&b| b));
    }

    #[test]
    fn degenerate_triangle_is_rejected_with_id() {
        let err = SurfaceMesh::new(
            vec![Vec3::zeros(), Vec3::x(), Vec3::y(), 2.0 * Vec3::x()],
            vec![[0, 1, 2], [0, 3, 1]],
        )
        .unwrap_err();
        assert!(matches!(err, MeshError::DegenerateTriangles(ref ids) if ids == &[1]));
    }

    #[test]
    fn non_manifold_edge_is_rejected() {
        let v = vec![Vec3::zeros(), Vec3::x(), Vec3::y(), -Vec3::y(), Vec3::z()];
        let err = SurfaceMesh::new(v, vec![[0, 1, 2], [1, 0, 3], [0, 1, 4]]).unwrap_err();
        assert!(matches!(err, MeshError::NonManifoldEdge(0, 1) | MeshError::InconsistentOrientation(0, 1)));
    }

    #[test]
    fn flipped_neighbour_is_rejected() {
        let v = vec![Vec3::zeros(), Vec3::x(), Vec3::y(), -Vec3::y()];
        let err = SurfaceMesh::new(v, vec![[0, 1, 2], [0, 1, 3]]).unwrap_err();
        assert!(matches!(err, MeshError::InconsistentOrientation(0, 1)));
    }

    #[test]
    fn mixed_soup_is_rejected() {
        let soup = PolygonSoup {
            vertices: vec![Vec3::zeros(), Vec3::x(), Vec3::new(1.0, 1.0, 0.0), Vec3::y(), Vec3::new(2.0, 0.0, 0.0)],
            faces: vec![vec![0, 1, 2, 3], vec![1, 4, 2]],
        };
        assert!(matches!(LoadedMesh::from_soup(soup), Err(MeshError::MixedElements)));
    }

    #[test]
    fn unreferenced_vertices_are_pruned() {
        let soup = PolygonSoup {
            vertices: vec![Vec3::new(5.0, 5.0, 5.0), Vec3::zeros(), Vec3::x(), Vec3::y()],
            faces: vec![vec![1, 2, 3]],
        };
        let m = LoadedMesh::from_soup(soup).unwrap().into_triangles().unwrap();
        assert_eq!(m.vertex_count(), 3);
        assert_eq!(m.triangles()[0], [0, 1, 2]);
    }

    #[test]
    fn fans_are_counterclockwise_and_complete() {
        let m = crate::generate::square_grid(3, 3, 1.0);
        let fans = m.vertex_fans();
        for (v, (fan, closed)) in fans.iter().enumerate() {
            let count = m.triangles().iter().filter(|t| t.contains(&v)).count();
            assert_eq!(fan.len(), count);
            assert_eq!(*closed, !m.boundary_vertex_flags()[v]);
        }
    }
}
