use std::collections::BTreeMap;

use super::{CellId, MeshError, PentMesh, SimplicialMesh, TetMesh, VertexId};

/// Map from sorted facet key to the cells containing that facet.
///
/// Keys iterate in lexicographic order and cell lists are sorted, so every
/// traversal is deterministic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FacetAdjacency<const K: usize> {
    map: BTreeMap<[VertexId; K], Vec<CellId>>,
}

impl<const K: usize> FacetAdjacency<K> {
    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn get(&self, key: &[VertexId; K]) -> Option<&[CellId]> {
        self.map.get(key).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[VertexId; K], &[CellId])> {
        self.map.iter().map(|(k, v)| (k, v.as_slice()))
    }

    pub fn boundary_count(&self) -> usize {
        self.map.values().filter(|c| c.len() == 1).count()
    }

    /// Facets shared by two cells, with the pair (lower id first).
    pub fn interior(&self) -> impl Iterator<Item = (&[VertexId; K], CellId, CellId)> {
        self.map
            .iter()
            .filter(|(_, c)| c.len() == 2)
            .map(|(k, c)| (k, c[0], c[1]))
    }

    /// Cells sharing a facet with `cell`.
    pub fn neighbors(&self, cell: CellId, cell_vertices: &[VertexId]) -> Vec<CellId> {
        let mut out = Vec::new();
        for key in facets_of::<K>(cell_vertices) {
            if let Some(cells) = self.map.get(&key) {
                out.extend(cells.iter().copied().filter(|&c| c != cell));
            }
        }
        out.sort_unstable();
        out
    }
}

/// All sorted K-subsets of a cell that omit exactly one vertex.
pub(crate) fn facets_of<const K: usize>(cell: &[VertexId]) -> impl Iterator<Item = [VertexId; K]> + '_ {
    debug_assert_eq!(cell.len(), K + 1);
    (0..cell.len()).map(move |skip| {
        let mut key = [VertexId(0); K];
        let mut j = 0;
        for (i, &v) in cell.iter().enumerate() {
            if i != skip {
                key[j] = v;
                j += 1;
            }
        }
        key.sort_unstable();
        key
    })
}

/// Raw facet incidence with no manifold check.
pub(crate) fn facet_incidence<M: SimplicialMesh, const K: usize>(
    mesh: &M,
) -> BTreeMap<[VertexId; K], Vec<CellId>> {
    let mut map: BTreeMap<[VertexId; K], Vec<CellId>> = BTreeMap::new();
    for c in 0..mesh.cell_count() {
        let id = CellId(c);
        for key in facets_of::<K>(mesh.cell_vertices(id)) {
            map.entry(key).or_default().push(id);
        }
    }
    map
}

fn build<M: SimplicialMesh, const K: usize>(mesh: &M) -> Result<FacetAdjacency<K>, MeshError> {
    let map = facet_incidence::<M, K>(mesh);
    if let Some((key, cells)) = map.iter().find(|(_, c)| c.len() > 2) {
        return Err(MeshError::NonManifold {
            facet: key.to_vec(),
            count: cells.len(),
        });
    }
    Ok(FacetAdjacency { map })
}

/// Triangular-face adjacency of a tetrahedral mesh.
pub fn build_face_adjacency(mesh: &TetMesh) -> Result<FacetAdjacency<3>, MeshError> {
    build(mesh)
}

/// Hyperface (tetrahedral facet) adjacency of a pentatope mesh.
pub fn build_hyperface_adjacency(mesh: &PentMesh) -> Result<FacetAdjacency<4>, MeshError> {
    build(mesh)
}
