//! Valence-mismatch accounting for quadrangulations and triangulations.
//!
//! A vertex whose valence differs from the regular value carries an index
//! `k / n_evf` with `k` the mismatch; over any mesh these indices sum to the
//! Euler characteristic.

use num_rational::Ratio;
use serde::Serialize;

use crate::mesh::{topology_report, FacetMesh, MeshError};
use crate::rational::RationalJson;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IrregularVertex {
    pub vertex: usize,
    pub valence: usize,
    pub boundary: bool,
    #[serde(skip)]
    pub mismatch: i64,
    pub index: RationalJson,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IndexAudit {
    pub chi: i64,
    pub index_sum: RationalJson,
    #[serde(rename = "irregular")]
    pub per_vertex: Vec<IrregularVertex>,
    pub consistent: bool,
}

impl IndexAudit {
    pub fn index_sum(&self) -> Ratio<i64> {
        self.index_sum.into()
    }
}

/// Regular interior valence for facets with `size` vertices (4 for quads,
/// 6 for triangles); boundary vertices are regular at half that value.
fn regular_valence(size: usize) -> i64 {
    match size {
        4 => 4,
        3 => 6,
        _ => unreachable!("only triangle and quad meshes exist"),
    }
}

pub fn audit<M: FacetMesh>(mesh: &M) -> Result<IndexAudit, MeshError> {
    let topo = topology_report(mesh)?;
    let regular = regular_valence(M::FACET_SIZE);
    let valences = mesh.valences();
    let boundary = mesh.boundary_vertex_flags();
    let mut per_vertex = Vec::new();
    let mut sum = Ratio::from_integer(0);
    for (v, (&valence, &on_boundary)) in valences.iter().zip(&boundary).enumerate() {
        if valence == 0 {
            continue;
        }
        let target = if on_boundary { regular / 2 } else { regular };
        let k = target - valence as i64;
        if k == 0 {
            continue;
        }
        let index = Ratio::new(k, regular);
        sum += index;
        per_vertex.push(IrregularVertex {
            vertex: v,
            valence,
            boundary: on_boundary,
            mismatch: k,
            index: index.into(),
        });
    }
    Ok(IndexAudit {
        chi: topo.chi,
        index_sum: sum.into(),
        per_vertex,
        consistent: sum == Ratio::from_integer(topo.chi),
    })
}

pub fn regular_mesh_feasible(chi: i64) -> bool {
    chi == 0
}

/// Facet/edge counting identities that hold on every loaded mesh:
/// `n_evf n_f = 2 (n_e - n_b) + n_b` (boundary edges) and
/// `2 n - n_b + (2 - n_evf) n_f = 2 χ` (boundary vertices).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CountingIdentities {
    pub facet_edge_count: bool,
    pub vertex_facet_count: bool,
}

pub fn counting_identities<M: FacetMesh>(mesh: &M) -> Result<CountingIdentities, MeshError> {
    let topo = topology_report(mesh)?;
    let nevf = M::FACET_SIZE as i64;
    let (n, ne, nf) = (topo.vertices as i64, topo.edges as i64, topo.faces as i64);
    let nb_edges = topo.boundary_edges as i64;
    let nb_vertices = topo.boundary_vertices as i64;
    Ok(CountingIdentities {
        facet_edge_count: nevf * nf == 2 * (ne - nb_edges) + nb_edges,
        vertex_facet_count: 2 * n - nb_vertices + (2 - nevf) * nf == 2 * topo.chi,
    })
}
