use serde::Serialize;

use super::{FacetMesh, MeshError, SurfaceMesh};

/// Counts and invariants of one connected component.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComponentTopology {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub boundary_edges: usize,
    pub boundary_vertices: usize,
    pub boundary_loops: usize,
    pub chi: i64,
    pub genus: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TopologyReport {
    pub chi: i64,
    /// `None` when the mesh is not connected; see `components`.
    pub genus: Option<i64>,
    pub boundary_loops: usize,
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub boundary_edges: usize,
    pub boundary_vertices: usize,
    pub components: Vec<ComponentTopology>,
}

impl TopologyReport {
    pub fn is_connected(&self) -> bool {
        self.components.len() == 1
    }

    pub fn is_closed(&self) -> bool {
        self.boundary_edges == 0
    }
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet { parent: (0..n).collect() }
    }

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

/// Euler characteristic, boundary loops and genus, per connected component
/// and in total.
pub fn topology_report<M: FacetMesh>(mesh: &M) -> Result<TopologyReport, MeshError> {
    let nf = mesh.facet_count();
    let mut sets = DisjointSet::new(nf);
    for e in mesh.edges() {
        if let [Some(a), Some(b)] = e.facets {
            sets.union(a, b);
        }
    }
    let mut label = vec![usize::MAX; nf];
    let mut roots = Vec::new();
    for f in 0..nf {
        let r = sets.find(f);
        let id = match roots.iter().position(|&x| x == r) {
            Some(i) => i,
            None => {
                roots.push(r);
                roots.len() - 1
            }
        };
        label[f] = id;
    }
    let nc = roots.len();
    let mut comps = vec![
        ComponentTopology {
            vertices: 0,
            edges: 0,
            faces: 0,
            boundary_edges: 0,
            boundary_vertices: 0,
            boundary_loops: 0,
            chi: 0,
            genus: 0,
        };
        nc
    ];
    let mut vertex_comp = vec![usize::MAX; mesh.vertex_count()];
    for f in 0..nf {
        comps[label[f]].faces += 1;
        for &v in mesh.facet(f) {
            vertex_comp[v] = label[f];
        }
    }
    for &c in vertex_comp.iter().filter(|&&c| c != usize::MAX) {
        comps[c].vertices += 1;
    }
    let boundary_flags = mesh.boundary_vertex_flags();
    for (v, &c) in vertex_comp.iter().enumerate() {
        if c != usize::MAX && boundary_flags[v] {
            comps[c].boundary_vertices += 1;
        }
    }
    for e in mesh.edges() {
        let c = label[e.facets[0].expect("every edge has a facet")];
        comps[c].edges += 1;
        if e.is_boundary() {
            comps[c].boundary_edges += 1;
        }
    }
    for (loop_vertex, _) in boundary_loops(mesh)? {
        comps[vertex_comp[loop_vertex]].boundary_loops += 1;
    }
    for c in comps.iter_mut() {
        c.chi = c.vertices as i64 - c.edges as i64 + c.faces as i64;
        c.genus = (2 - c.chi - c.boundary_loops as i64) / 2;
    }
    let sum = |f: fn(&ComponentTopology) -> usize| comps.iter().map(f).sum::<usize>();
    let (vertices, edges, faces) = (sum(|c| c.vertices), sum(|c| c.edges), sum(|c| c.faces));
    Ok(TopologyReport {
        chi: vertices as i64 - edges as i64 + faces as i64,
        genus: (nc == 1).then(|| comps[0].genus),
        boundary_loops: sum(|c| c.boundary_loops),
        vertices,
        edges,
        faces,
        boundary_edges: sum(|c| c.boundary_edges),
        boundary_vertices: sum(|c| c.boundary_vertices),
        components: comps,
    })
}

/// Traces directed boundary edges into closed loops. Returns, per loop, its
/// starting vertex and its length in edges.
pub fn boundary_loops<M: FacetMesh>(mesh: &M) -> Result<Vec<(usize, usize)>, MeshError> {
    // Directed boundary half-edges, oriented as their single facet traverses them.
    let mut outgoing: Vec<Vec<usize>> = vec![Vec::new(); mesh.vertex_count()];
    let mut heads = Vec::new();
    for e in mesh.edges().iter().filter(|e| e.is_boundary()) {
        let f = mesh.facet(e.facets[0].unwrap());
        let k = f.len();
        let i = f.iter().position(|&v| v == e.vertices[0]).unwrap();
        let (from, to) = if f[(i + 1) % k] == e.vertices[1] {
            (e.vertices[0], e.vertices[1])
        } else {
            (e.vertices[1], e.vertices[0])
        };
        outgoing[from].push(heads.len());
        heads.push((from, to));
    }
    let mut used = vec![false; heads.len()];
    let mut loops = Vec::new();
    for start in 0..heads.len() {
        if used[start] {
            continue;
        }
        let origin = heads[start].0;
        let mut current = start;
        let mut length = 0;
        loop {
            used[current] = true;
            length += 1;
            let to = heads[current].1;
            if to == origin {
                break;
            }
            match outgoing[to].iter().copied().find(|&h| !used[h]) {
                Some(next) => current = next,
                None => return Err(MeshError::OpenBoundary(to)),
            }
        }
        loops.push((origin, length));
    }
    Ok(loops)
}

pub fn mean_edge_length(mesh: &SurfaceMesh) -> Result<f64, MeshError> {
    let n = mesh.edges().len();
    if n == 0 {
        return Err(MeshError::Empty);
    }
    Ok((0..n).map(|e| mesh.edge_length(e)).sum::<f64>() / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate;
    use crate::mesh::Vec3;

    #[test]
    fn octahedron_is_a_sphere() {
        let r = topology_report(&generate::octahedron()).unwrap();
        assert_eq!((r.chi, r.genus, r.boundary_loops), (2, Some(0), 0));
    }

    #[test]
    fn disk_and_torus() {
        let disk = topology_report(&generate::disk(6, 24, 1.0)).unwrap();
        assert_eq!((disk.chi, disk.boundary_loops, disk.genus), (1, 1, Some(0)));
        let torus = topology_report(&generate::torus(12, 8, 1.0, 0.4)).unwrap();
        assert_eq!((torus.chi, torus.genus, torus.boundary_loops), (0, Some(1), 0));
    }

    #[test]
    fn disconnected_meshes_are_reported_per_component() {
        let v = vec![
            Vec3::zeros(),
            Vec3::x(),
            Vec3::y(),
            Vec3::new(5.0, 0.0, 0.0),
            Vec3::new(6.0, 0.0, 0.0),
            Vec3::new(5.0, 1.0, 0.0),
        ];
        let m = SurfaceMesh::new(v, vec![[0, 1, 2], [3, 4, 5]]).unwrap();
        let r = topology_report(&m).unwrap();
        assert_eq!(r.components.len(), 2);
        assert_eq!(r.genus, None);
        assert_eq!(r.chi, 2);
        assert!(r.components.iter().all(|c| c.chi == 1 && c.boundary_loops == 1));
    }

    #[test]
    fn mean_edge_lengths() {
        let tri = SurfaceMesh::new(vec![Vec3::zeros(), Vec3::x(), Vec3::y()], vec![[0, 1, 2]]).unwrap();
        let expect = (2.0 + 2f64.sqrt()) / 3.0;
        assert!((mean_edge_length(&tri).unwrap() - expect).abs() < 1e-15);
        let octa = mean_edge_length(&generate::octahedron()).unwrap();
        assert!((octa - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn boundary_loops_partition_boundary_edges() {
        let annulus = generate::annulus(5, 20, 0.5, 1.0);
        let loops = boundary_loops(&annulus).unwrap();
        assert_eq!(loops.len(), 2);
        assert_eq!(loops.iter().map(|l| l.1).sum::<usize>(), annulus.boundary_edge_count());
    }
}
