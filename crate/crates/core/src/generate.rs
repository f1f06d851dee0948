//! Procedural meshes used by the tests, the acceptance suite and the CLI
//! examples: planar grids, disks, tori, geodesic spheres and quadrangulations.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mesh::{FacetMesh, QuadMesh, SurfaceMesh, Vec3};

fn surface(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> SurfaceMesh {
    SurfaceMesh::new(vertices, triangles).expect("generated triangle mesh is valid")
}

fn quadrangulation(vertices: Vec<Vec3>, quads: Vec<[usize; 4]>) -> QuadMesh {
    QuadMesh::new(vertices, quads).expect("generated quad mesh is valid")
}

/// Regular octahedron inscribed in the unit sphere.
pub fn octahedron() -> SurfaceMesh {
    let v = vec![Vec3::x(), -Vec3::x(), Vec3::y(), -Vec3::y(), Vec3::z(), -Vec3::z()];
    let t = vec![
        [0, 2, 4],
        [2, 1, 4],
        [1, 3, 4],
        [3, 0, 4],
        [2, 0, 5],
        [1, 2, 5],
        [3, 1, 5],
        [0, 3, 5],
    ];
    surface(v, t)
}

/// Grid of `nx` by `ny` cells over `[0, size]²`, in the z = 0 plane.
pub fn square_grid(nx: usize, ny: usize, size: f64) -> SurfaceMesh {
    let cells: Vec<(usize, usize)> = (0..ny).flat_map(|j| (0..nx).map(move |i| (i, j))).collect();
    grid_cells(nx, ny, size / nx as f64, &cells, |i, j| (i + j) % 2 == 0)
}

/// L-shaped domain `[0, 2]² \ (1, 2]²` with `n` cells per unit length.
pub fn l_shape(n: usize) -> SurfaceMesh {
    let cells: Vec<(usize, usize)> = (0..2 * n)
        .flat_map(|j| (0..2 * n).map(move |i| (i, j)))
        .filter(|&(i, j)| i < n || j < n)
        .collect();
    grid_cells(2 * n, 2 * n, 1.0 / n as f64, &cells, |i, j| (i + j) % 2 == 0)
}

/// Square grid with a random diagonal per cell and jittered interior vertices.
pub fn random_square(n: usize, jitter: f64, seed: u64) -> SurfaceMesh {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let flips: Vec<bool> = (0..n * n).map(|_| rng.gen()).collect();
    let cells: Vec<(usize, usize)> = (0..n).flat_map(|j| (0..n).map(move |i| (i, j))).collect();
    let mut mesh_vertices = Vec::new();
    let h = 1.0 / n as f64;
    for j in 0..=n {
        for i in 0..=n {
            let mut p = Vec3::new(i as f64 * h, j as f64 * h, 0.0);
            if i > 0 && i < n && j > 0 && j < n {
                p.x += jitter * h * rng.gen_range(-1.0..1.0);
                p.y += jitter * h * rng.gen_range(-1.0..1.0);
            }
            mesh_vertices.push(p);
        }
    }
    let m = grid_cells(n, n, h, &cells, |i, j| flips[j * n + i]);
    let tris = m.triangles().to_vec();
    surface(mesh_vertices, tris)
}

fn grid_cells(
    nx: usize,
    ny: usize,
    h: f64,
    cells: &[(usize, usize)],
    diagonal: impl Fn(usize, usize) -> bool,
) -> SurfaceMesh {
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut used = vec![false; (nx + 1) * (ny + 1)];
    let mut tris = Vec::with_capacity(2 * cells.len());
    for &(i, j) in cells {
        let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
        if diagonal(i, j) {
            tris.push([a, b, c]);
            tris.push([a, c, d]);
        } else {
            tris.push([a, b, d]);
            tris.push([b, c, d]);
        }
        for v in [a, b, c, d] {
            used[v] = true;
        }
    }
    let mut remap = vec![usize::MAX; used.len()];
    let mut vertices = Vec::new();
    for j in 0..=ny {
        for i in 0..=nx {
            if used[id(i, j)] {
                remap[id(i, j)] = vertices.len();
                vertices.push(Vec3::new(i as f64 * h, j as f64 * h, 0.0));
            }
        }
    }
    let tris = tris
        .into_iter()
        .map(|t| [remap[t[0]], remap[t[1]], remap[t[2]]])
        .collect();
    surface(vertices, tris)
}

/// Flat disk of the given radius: a centre vertex and `rings` concentric
/// rings, ring `k` holding `base * k` vertices.
pub fn disk(rings: usize, base: usize, radius: f64) -> SurfaceMesh {
    let mut vertices = vec![Vec3::zeros()];
    let mut ring_ids: Vec<Vec<usize>> = vec![vec![0]];
    let mut ring_angles: Vec<Vec<f64>> = vec![vec![0.0]];
    for k in 1..=rings {
        let m = base * k;
        let r = radius * k as f64 / rings as f64;
        let offset = if k % 2 == 0 { 0.5 } else { 0.0 };
        let mut ids = Vec::with_capacity(m);
        let mut angles = Vec::with_capacity(m);
        for s in 0..m {
            let a = std::f64::consts::TAU * (s as f64 + offset) / m as f64;
            ids.push(vertices.len());
            angles.push(a);
            vertices.push(Vec3::new(r * a.cos(), r * a.sin(), 0.0));
        }
        ring_ids.push(ids);
        ring_angles.push(angles);
    }
    let mut tris = Vec::new();
    for s in 0..base {
        tris.push([0, ring_ids[1][s], ring_ids[1][(s + 1) % base]]);
    }
    for k in 2..=rings {
        stitch_rings(&ring_ids[k - 1], &ring_angles[k - 1], &ring_ids[k], &ring_angles[k], &mut tris);
    }
    surface(vertices, tris)
}

/// Triangulates the strip between two concentric closed rings, the outer one
/// counterclockwise around the inner one.
fn stitch_rings(inner: &[usize], ia: &[f64], outer: &[usize], oa: &[f64], tris: &mut Vec<[usize; 3]>) {
    let (n, m) = (inner.len(), outer.len());
    let unwrap = |angles: &[f64], i: usize| {
        let turns = (i / angles.len()) as f64;
        angles[i % angles.len()] + turns * std::f64::consts::TAU
    };
    let (mut i, mut j) = (0, 0);
    while i < n || j < m {
        let next_inner = unwrap(ia, i + 1);
        let next_outer = unwrap(oa, j + 1);
        if j >= m || (i < n && next_inner <= next_outer) {
            tris.push([inner[i % n], outer[j % m], inner[(i + 1) % n]]);
            i += 1;
        } else {
            tris.push([inner[i % n], outer[j % m], outer[(j + 1) % m]]);
            j += 1;
        }
    }
}

/// Planar annulus between radii `r0 < r1`.
pub fn annulus(rings: usize, segments: usize, r0: f64, r1: f64) -> SurfaceMesh {
    let mut vertices = Vec::new();
    for k in 0..=rings {
        let r = r0 + (r1 - r0) * k as f64 / rings as f64;
        for s in 0..segments {
            let a = std::f64::consts::TAU * (s as f64 + 0.5 * (k % 2) as f64) / segments as f64;
            vertices.push(Vec3::new(r * a.cos(), r * a.sin(), 0.0));
        }
    }
    let id = |k: usize, s: usize| k * segments + s % segments;
    let mut tris = Vec::new();
    for k in 0..rings {
        for s in 0..segments {
            if k % 2 == 0 {
                tris.push([id(k, s), id(k + 1, s), id(k, s + 1)]);
                tris.push([id(k, s + 1), id(k + 1, s), id(k + 1, s + 1)]);
            } else {
                tris.push([id(k, s), id(k + 1, s + 1), id(k, s + 1)]);
                tris.push([id(k, s), id(k + 1, s), id(k + 1, s + 1)]);
            }
        }
    }
    surface(vertices, tris)
}

/// Torus with major radius `major` and tube radius `minor`. Every vertex has
/// valence 6.
pub fn torus(nu: usize, nv: usize, major: f64, minor: f64) -> SurfaceMesh {
    let mut vertices = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        let u = std::f64::consts::TAU * i as f64 / nu as f64;
        for j in 0..nv {
            let v = std::f64::consts::TAU * j as f64 / nv as f64;
            let r = major + minor * v.cos();
            vertices.push(Vec3::new(r * u.cos(), r * u.sin(), minor * v.sin()));
        }
    }
    let id = |i: usize, j: usize| (i % nu) * nv + j % nv;
    let mut tris = Vec::with_capacity(2 * nu * nv);
    for i in 0..nu {
        for j in 0..nv {
            tris.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            tris.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    surface(vertices, tris)
}

/// Geodesic unit sphere: each icosahedron face split into `frequency²`
/// triangles, vertices projected radially. `20 · frequency²` triangles.
pub fn icosphere(frequency: usize) -> SurfaceMesh {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let base: Vec<Vec3> = [
        (-1.0, phi, 0.0),
        (1.0, phi, 0.0),
        (-1.0, -phi, 0.0),
        (1.0, -phi, 0.0),
        (0.0, -1.0, phi),
        (0.0, 1.0, phi),
        (0.0, -1.0, -phi),
        (0.0, 1.0, -phi),
        (phi, 0.0, -1.0),
        (phi, 0.0, 1.0),
        (-phi, 0.0, -1.0),
        (-phi, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
    .collect();
    let faces = [
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    let n = frequency.max(1);
    let mut welder = Welder::default();
    let mut tris = Vec::with_capacity(20 * n * n);
    for f in faces {
        let (a, b, c) = (base[f[0]], base[f[1]], base[f[2]]);
        let point = |i: usize, j: usize| {
            let (u, v) = (i as f64 / n as f64, j as f64 / n as f64);
            a + (b - a) * u + (c - a) * v
        };
        let mut ids = vec![vec![0usize; n + 1]; n + 1];
        for i in 0..=n {
            for j in 0..=n - i {
                ids[i][j] = welder.insert(point(i, j));
            }
        }
        for i in 0..n {
            for j in 0..n - i {
                tris.push([ids[i][j], ids[i + 1][j], ids[i][j + 1]]);
                if i + j + 1 < n {
                    tris.push([ids[i + 1][j], ids[i + 1][j + 1], ids[i][j + 1]]);
                }
            }
        }
    }
    let vertices = welder.points.into_iter().map(|p| p.normalize()).collect();
    surface(vertices, tris)
}

/// Unit sphere from the convex hull of jittered Fibonacci points; a
/// triangulation without the icosahedral symmetry of [`icosphere`].
pub fn fibonacci_sphere(count: usize, jitter: f64, seed: u64) -> SurfaceMesh {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let spacing = (4.0 * std::f64::consts::PI / count as f64).sqrt();
    let points: Vec<Vec3> = (0..count)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
            let r = (1.0 - z * z).sqrt();
            let a = golden * i as f64;
            let p = Vec3::new(r * a.cos(), r * a.sin(), z);
            let noise = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            (p + noise * jitter * spacing).normalize()
        })
        .collect();
    let tris = convex_hull(&points);
    surface(points, tris)
}

/// Incremental convex hull of points in general position on a sphere.
fn convex_hull(points: &[Vec3]) -> Vec<[usize; 3]> {
    let n = points.len();
    assert!(n >= 4);
    let orient = |t: &[usize; 3], p: &Vec3| {
        let (a, b, c) = (points[t[0]], points[t[1]], points[t[2]]);
        (b - a).cross(&(c - a)).dot(&(p - a))
    };
    // Initial tetrahedron from four non-coplanar points.
    let (i0, i1) = (0, n - 1);
    let i2 = (1..n - 1)
        .max_by(|&a, &b| {
            let da = (points[a] - points[i0]).cross(&(points[i1] - points[i0])).norm();
            let db = (points[b] - points[i0]).cross(&(points[i1] - points[i0])).norm();
            da.partial_cmp(&db).unwrap()
        })
        .unwrap();
    let i3 = (1..n - 1)
        .filter(|&i| i != i2)
        .max_by(|&a, &b| {
            let t = [i0, i1, i2];
            orient(&t, &points[a]).abs().partial_cmp(&orient(&t, &points[b]).abs()).unwrap()
        })
        .unwrap();
    let mut faces: Vec<[usize; 3]> = vec![[i0, i1, i2], [i0, i2, i3], [i0, i3, i1], [i1, i3, i2]];
    if orient(&faces[0], &points[i3]) > 0.0 {
        for f in faces.iter_mut() {
            f.swap(1, 2);
        }
    }
    for p in 0..n {
        if [i0, i1, i2, i3].contains(&p) {
            continue;
        }
        let visible: Vec<bool> = faces.iter().map(|f| orient(f, &points[p]) > 1e-14).collect();
        if !visible.iter().any(|&v| v) {
            continue;
        }
        let mut directed: HashMap<(usize, usize), bool> = HashMap::new();
        for (f, &vis) in faces.iter().zip(&visible) {
            for k in 0..3 {
                directed.insert((f[k], f[(k + 1) % 3]), vis);
            }
        }
        let mut next = Vec::with_capacity(faces.len() + 2);
        for (f, &vis) in faces.iter().zip(&visible) {
            if !vis {
                next.push(*f);
                continue;
            }
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                if directed.get(&(b, a)) == Some(&false) {
                    next.push([a, b, p]);
                }
            }
        }
        faces = next;
    }
    faces
}

#[derive(Default)]
struct Welder {
    points: Vec<Vec3>,
    lookup: HashMap<[i64; 3], usize>,
}

impl Welder {
    fn insert(&mut self, p: Vec3) -> usize {
        let key = [
            (p.x * 1e9).round() as i64,
            (p.y * 1e9).round() as i64,
            (p.z * 1e9).round() as i64,
        ];
        *self.lookup.entry(key).or_insert_with(|| {
            self.points.push(p);
            self.points.len() - 1
        })
    }
}

/// Structured `nx` by `ny` quadrangulation of `[0, nx] x [0, ny]`.
pub fn quad_grid(nx: usize, ny: usize) -> QuadMesh {
    let cells: Vec<(usize, usize)> = (0..ny).flat_map(|j| (0..nx).map(move |i| (i, j))).collect();
    quad_cells(nx, ny, &cells)
}

/// L-shaped quadrangulation with `n` cells per unit length.
pub fn quad_l_shape(n: usize) -> QuadMesh {
    let cells: Vec<(usize, usize)> = (0..2 * n)
        .flat_map(|j| (0..2 * n).map(move |i| (i, j)))
        .filter(|&(i, j)| i < n || j < n)
        .collect();
    quad_cells(2 * n, 2 * n, &cells)
}

fn quad_cells(nx: usize, ny: usize, cells: &[(usize, usize)]) -> QuadMesh {
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut remap = vec![usize::MAX; (nx + 1) * (ny + 1)];
    let mut vertices = Vec::new();
    let mut quads = Vec::with_capacity(cells.len());
    for &(i, j) in cells {
        let q = [id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)];
        for &v in &q {
            if remap[v] == usize::MAX {
                remap[v] = vertices.len();
                vertices.push(Vec3::new((v % (nx + 1)) as f64, (v / (nx + 1)) as f64, 0.0));
            }
        }
        quads.push(q.map(|v| remap[v]));
    }
    quadrangulation(vertices, quads)
}

/// Open cylinder quadrangulation (χ = 0, two boundary loops).
pub fn quad_cylinder(around: usize, height: usize) -> QuadMesh {
    let mut vertices = Vec::new();
    for k in 0..=height {
        for s in 0..around {
            let a = std::f64::consts::TAU * s as f64 / around as f64;
            vertices.push(Vec3::new(a.cos(), a.sin(), k as f64 / around as f64));
        }
    }
    let id = |k: usize, s: usize| k * around + s % around;
    let mut quads = Vec::new();
    for k in 0..height {
        for s in 0..around {
            quads.push([id(k, s), id(k, s + 1), id(k + 1, s + 1), id(k + 1, s)]);
        }
    }
    quadrangulation(vertices, quads)
}

/// Structured grid mapped onto the unit disk; the four grid corners become
/// the only irregular vertices.
pub fn quad_disk(n: usize) -> QuadMesh {
    let grid = quad_grid(n, n);
    let vertices = grid
        .vertices()
        .iter()
        .map(|p| {
            let (x, y) = (2.0 * p.x / n as f64 - 1.0, 2.0 * p.y / n as f64 - 1.0);
            // Elliptical square-to-disk map.
            Vec3::new(x * (1.0 - 0.5 * y * y).sqrt(), y * (1.0 - 0.5 * x * x).sqrt(), 0.0)
        })
        .collect();
    quadrangulation(vertices, grid.quads().to_vec())
}

/// Splits every quad into 2 x 2 quads.
pub fn subdivide_quads(mesh: &QuadMesh) -> QuadMesh {
    let mut vertices = mesh.vertices().to_vec();
    let edge_base = vertices.len();
    vertices.extend((0..mesh.edges().len()).map(|e| {
        let [a, b] = mesh.edges()[e].vertices;
        0.5 * (mesh.vertices()[a] + mesh.vertices()[b])
    }));
    let face_base = vertices.len();
    let mut quads = Vec::with_capacity(4 * mesh.quads().len());
    for (f, q) in mesh.quads().iter().enumerate() {
        vertices.push(q.iter().map(|&v| mesh.vertices()[v]).sum::<Vec3>() / 4.0);
        let e = mesh.facet_edges(f);
        let c = face_base + f;
        for k in 0..4 {
            quads.push([q[k], edge_base + e[k], c, edge_base + e[(k + 3) % 4]]);
        }
    }
    quadrangulation(vertices, quads)
}

/// Splits every triangle into three quads through its edge midpoints and
/// centroid.
pub fn triangles_to_quads(mesh: &SurfaceMesh) -> QuadMesh {
    let mut vertices = mesh.vertices().to_vec();
    let edge_base = vertices.len();
    vertices.extend((0..mesh.edges().len()).map(|e| mesh.edge_midpoint(e)));
    let face_base = vertices.len();
    let mut quads = Vec::with_capacity(3 * mesh.triangles().len());
    for (t, tri) in mesh.triangles().iter().enumerate() {
        vertices.push(mesh.centroid(t));
        let e = mesh.triangle_edges()[t];
        let c = face_base + t;
        for k in 0..3 {
            quads.push([tri[k], edge_base + e[k], c, edge_base + e[(k + 2) % 3]]);
        }
    }
    quadrangulation(vertices, quads)
}

/// Moves every interior vertex of a planar mesh by a random in-plane offset of
/// at most `jitter` times its shortest incident edge.
pub fn jitter_planar_interior(mesh: &SurfaceMesh, jitter: f64, seed: u64) -> SurfaceMesh {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let boundary = mesh.boundary_vertex_flags();
    let mut shortest = vec![f64::INFINITY; mesh.vertex_count()];
    for (e, edge) in mesh.edges().iter().enumerate() {
        let l = mesh.edge_length(e);
        for &v in &edge.vertices {
            shortest[v] = shortest[v].min(l);
        }
    }
    let vertices = mesh
        .vertices()
        .iter()
        .enumerate()
        .map(|(v, p)| {
            if boundary[v] {
                return *p;
            }
            let r = jitter * shortest[v] * rng.gen::<f64>().sqrt();
            let a = rng.gen::<f64>() * std::f64::consts::TAU;
            p + Vec3::new(r * a.cos(), r * a.sin(), 0.0)
        })
        .collect();
    surface(vertices, mesh.triangles().to_vec())
}

/// Randomly reorders vertices and facets (and rotates each facet's corner
/// list), preserving geometry and orientation.
pub fn shuffle_triangles(mesh: &SurfaceMesh, seed: u64) -> SurfaceMesh {
    use rand::seq::SliceRandom;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tris = mesh.triangles().to_vec();
    tris.shuffle(&mut rng);
    for t in tris.iter_mut() {
        t.rotate_left(rng.gen_range(0..3));
    }
    surface(mesh.vertices().to_vec(), tris)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::topology_report;

    #[test]
    fn generated_topologies() {
        let cases: Vec<(SurfaceMesh, i64)> = vec![
            (square_grid(4, 4, 1.0), 1),
            (l_shape(3), 1),
            (disk(4, 6, 1.0), 1),
            (annulus(3, 16, 0.5, 1.0), 0),
            (torus(10, 6, 1.0, 0.3), 0),
            (icosphere(3), 2),
            (fibonacci_sphere(300, 0.2, 1), 2),
            (random_square(6, 0.25, 3), 1),
        ];
        for (m, chi) in cases {
            assert_eq!(topology_report(&m).unwrap().chi, chi);
        }
        assert_eq!(icosphere(12).triangles().len(), 2880);
    }

    #[test]
    fn quad_topologies() {
        assert_eq!(topology_report(&quad_grid(3, 2)).unwrap().chi, 1);
        assert_eq!(topology_report(&quad_cylinder(8, 3)).unwrap().chi, 0);
        assert_eq!(topology_report(&quad_l_shape(2)).unwrap().chi, 1);
        let sub = subdivide_quads(&quad_disk(3));
        assert_eq!(sub.quads().len(), 36);
        assert_eq!(topology_report(&sub).unwrap().chi, 1);
        let tq = triangles_to_quads(&disk(2, 5, 1.0));
        assert_eq!(topology_report(&tq).unwrap().chi, 1);
    }
}
