//! Index-based tetrahedral and pentatope meshes.
//!
//! Cells store vertex ids, never coordinates, and two cells share a vertex
//! exactly when they store the same id. Every topological query in this
//! crate (adjacency, conformity, tagging consistency) is integer logic over
//! those ids.

mod adjacency;
mod conformity;

use std::fmt;

use nalgebra::{Matrix3, Matrix4};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bisection::{MidpointTable, TaggedPentatope};
use crate::coloring::ColorLabel;
use crate::extrusion::TimeSlices;

pub use adjacency::{build_face_adjacency, build_hyperface_adjacency, FacetAdjacency};
pub(crate) use adjacency::facet_incidence;
pub use conformity::{check_conforming, ConformityReport, ConformityViolation, ViolationKind};

/// Cells whose measure falls below this absolute value are rejected.
pub const MEASURE_TOLERANCE: f64 = 1e-14;

pub type Point3 = [f64; 3];
/// Spatial coordinates followed by time.
pub type Point4 = [f64; 4];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CellId(pub usize);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl CellId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("vertex {vertex} has a non-finite coordinate")]
    NonFiniteCoordinate { vertex: VertexId },
    #[error("cell {cell} references {vertex}, but the mesh has {count} vertices")]
    DanglingVertex {
        cell: CellId,
        vertex: VertexId,
        count: usize,
    },
    #[error("cell {cell} repeats {vertex}")]
    RepeatedVertex { cell: CellId, vertex: VertexId },
    #[error("cell {cell} is degenerate (measure {measure:e})")]
    Degenerate { cell: CellId, measure: f64 },
    #[error("cell {cell} does not exist (mesh has {count} cells)")]
    NoSuchCell { cell: CellId, count: usize },
    #[error("facet {facet:?} is shared by {count} cells")]
    NonManifold { facet: Vec<VertexId>, count: usize },
    #[error("{cells} cells but {provenance} provenance records")]
    ProvenanceLength { cells: usize, provenance: usize },
    #[error("invalid extrusion record: {0}")]
    Extrusion(String),
}

/// Shared view over both mesh kinds, used by adjacency and conformity code.
pub trait SimplicialMesh {
    /// Vertices per cell.
    const CELL_SIZE: usize;
    fn vertex_count(&self) -> usize;
    fn cell_count(&self) -> usize;
    fn cell_vertices(&self, cell: CellId) -> &[VertexId];
    /// Edge midpoints created by refinement, if any.
    fn midpoint_table(&self) -> Option<&MidpointTable> {
        None
    }
}

/// Absolute volume of a tetrahedron.
pub fn simplex_volume3(p: &[Point3; 4]) -> f64 {
    let m = Matrix3::from_fn(|r, c| p[c + 1][r] - p[0][r]);
    m.determinant().abs() / 6.0
}

/// Absolute 4-measure of a pentatope.
pub fn simplex_measure4(p: &[Point4; 5]) -> f64 {
    let m = Matrix4::from_fn(|r, c| p[c + 1][r] - p[0][r]);
    m.determinant().abs() / 24.0
}

fn check_finite<const D: usize>(vertices: &[[f64; D]]) -> Result<(), MeshError> {
    match vertices.iter().position(|p| p.iter().any(|x| !x.is_finite())) {
        Some(i) => Err(MeshError::NonFiniteCoordinate {
            vertex: VertexId(i),
        }),
        None => Ok(()),
    }
}

fn check_cell_ids(cell: CellId, ids: &[VertexId], count: usize) -> Result<(), MeshError> {
    for (i, &v) in ids.iter().enumerate() {
        if v.0 >= count {
            return Err(MeshError::DanglingVertex {
                cell,
                vertex: v,
                count,
            });
        }
        if ids[..i].contains(&v) {
            return Err(MeshError::RepeatedVertex { cell, vertex: v });
        }
    }
    Ok(())
}

/// A tetrahedral mesh. Construction rejects dangling ids, repeated ids,
/// non-finite coordinates and cells with volume below [`MEASURE_TOLERANCE`].
#[derive(Clone, Debug, PartialEq, Default)]
pub struct TetMesh {
    vertices: Vec<Point3>,
    cells: Vec<[VertexId; 4]>,
}

impl TetMesh {
    pub fn new(vertices: Vec<Point3>, cells: Vec<[VertexId; 4]>) -> Result<Self, MeshError> {
        check_finite(&vertices)?;
        for (i, cell) in cells.iter().enumerate() {
            let id = CellId(i);
            check_cell_ids(id, cell, vertices.len())?;
            let volume = simplex_volume3(&cell.map(|v| vertices[v.0]));
            if volume < MEASURE_TOLERANCE {
                return Err(MeshError::Degenerate {
                    cell: id,
                    measure: volume,
                });
            }
        }
        Ok(Self { vertices, cells })
    }

    /// Skips the volume check; ids must still be valid and distinct.
    pub(crate) fn new_allow_thin(vertices: Vec<Point3>, cells: Vec<[VertexId; 4]>) -> Self {
        debug_assert!(cells
            .iter()
            .enumerate()
            .all(|(i, c)| check_cell_ids(CellId(i), c, vertices.len()).is_ok()));
        Self { vertices, cells }
    }

    /// Convenience constructor from raw indices.
    pub fn from_indices(vertices: Vec<Point3>, cells: &[[usize; 4]]) -> Result<Self, MeshError> {
        Self::new(vertices, cells.iter().map(|c| c.map(VertexId)).collect())
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn cells(&self) -> &[[VertexId; 4]] {
        &self.cells
    }

    pub fn point(&self, v: VertexId) -> Point3 {
        self.vertices[v.0]
    }

    pub fn cell(&self, c: CellId) -> Result<&[VertexId; 4], MeshError> {
        self.cells.get(c.0).ok_or(MeshError::NoSuchCell {
            cell: c,
            count: self.cells.len(),
        })
    }

    pub fn cell_points(&self, c: CellId) -> [Point3; 4] {
        self.cells[c.0].map(|v| self.vertices[v.0])
    }

    pub fn total_volume(&self) -> f64 {
        (0..self.cells.len())
            .map(|c| simplex_volume3(&self.cell_points(CellId(c))))
            .sum()
    }

    /// Faces incident to exactly one cell.
    pub fn boundary_faces(&self) -> Result<Vec<[VertexId; 3]>, MeshError> {
        Ok(build_face_adjacency(self)?
            .iter()
            .filter(|(_, cells)| cells.len() == 1)
            .map(|(k, _)| *k)
            .collect())
    }
}

impl SimplicialMesh for TetMesh {
    const CELL_SIZE: usize = 4;
    fn vertex_count(&self) -> usize {
        self.vertices.len()
    }
    fn cell_count(&self) -> usize {
        self.cells.len()
    }
    fn cell_vertices(&self, cell: CellId) -> &[VertexId] {
        &self.cells[cell.0]
    }
}

/// Where a pentatope came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    /// Generation-0 cell: subdivision piece `tau` (1..=4) of the prism over
    /// source tetrahedron `tet` in slab `slab`.
    Extruded { tet: CellId, slab: usize, tau: u8 },
    /// Bisection child. `parent` is the id of the ancestor in the mesh that
    /// was handed to the refine call which created this cell; `child` is 0 or
    /// 1 for the first or second child of the last bisection.
    Bisected {
        parent: CellId,
        child: u8,
        generation: u32,
    },
    /// Built by hand or loaded without lineage.
    Imported,
}

impl Provenance {
    pub fn generation(&self) -> u32 {
        match self {
            Provenance::Bisected { generation, .. } => *generation,
            _ => 0,
        }
    }
}

/// Data needed to recompute the initial tagging of an extruded mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtrusionRecord {
    /// Vertex count of the source tetrahedral mesh. Space-time vertex
    /// `slice * spatial_vertex_count + v` is spatial vertex `v` at slice
    /// `slice`.
    pub spatial_vertex_count: usize,
    pub colors: Vec<ColorLabel>,
    pub slices: TimeSlices,
}

/// A pentatope mesh with per-cell tags and provenance.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct PentMesh {
    vertices: Vec<Point4>,
    cells: Vec<TaggedPentatope>,
    provenance: Vec<Provenance>,
    midpoints: MidpointTable,
    extrusion: Option<ExtrusionRecord>,
}

impl PentMesh {
    pub fn new(
        vertices: Vec<Point4>,
        cells: Vec<TaggedPentatope>,
        provenance: Vec<Provenance>,
    ) -> Result<Self, MeshError> {
        check_finite(&vertices)?;
        if cells.len() != provenance.len() {
            return Err(MeshError::ProvenanceLength {
                cells: cells.len(),
                provenance: provenance.len(),
            });
        }
        for (i, cell) in cells.iter().enumerate() {
            let id = CellId(i);
            check_cell_ids(id, cell.vertices(), vertices.len())?;
            let measure = simplex_measure4(&cell.vertices().map(|v| vertices[v.0]));
            if measure < MEASURE_TOLERANCE {
                return Err(MeshError::Degenerate { cell: id, measure });
            }
        }
        Ok(Self {
            vertices,
            cells,
            provenance,
            midpoints: MidpointTable::default(),
            extrusion: None,
        })
    }

    /// Cells without lineage.
    pub fn from_cells(vertices: Vec<Point4>, cells: Vec<TaggedPentatope>) -> Result<Self, MeshError> {
        let provenance = vec![Provenance::Imported; cells.len()];
        Self::new(vertices, cells, provenance)
    }

    pub fn with_extrusion(mut self, record: ExtrusionRecord) -> Result<Self, MeshError> {
        if record.colors.len() != record.spatial_vertex_count {
            return Err(MeshError::Extrusion(format!(
                "{} colors for {} spatial vertices",
                record.colors.len(),
                record.spatial_vertex_count
            )));
        }
        let layered = record.spatial_vertex_count * record.slices.len();
        if layered > self.vertices.len() {
            return Err(MeshError::Extrusion(format!(
                "{layered} layered vertices expected, mesh has {}",
                self.vertices.len()
            )));
        }
        self.extrusion = Some(record);
        Ok(self)
    }

    pub fn with_midpoints(mut self, midpoints: MidpointTable) -> Result<Self, MeshError> {
        let n = self.vertices.len();
        if let Some(((a, b), m)) = midpoints
            .iter()
            .find(|((a, b), m)| a.0 >= n || b.0 >= n || m.0 >= n)
        {
            return Err(MeshError::Extrusion(format!(
                "midpoint {m} of edge ({a}, {b}) is out of range"
            )));
        }
        self.midpoints = midpoints;
        Ok(self)
    }

    /// Assembles a mesh without re-validating cell measures. Callers must
    /// uphold the invariants of [`PentMesh::new`].
    pub(crate) fn from_parts_unchecked(
        vertices: Vec<Point4>,
        cells: Vec<TaggedPentatope>,
        provenance: Vec<Provenance>,
        midpoints: MidpointTable,
        extrusion: Option<ExtrusionRecord>,
    ) -> Self {
        debug_assert_eq!(cells.len(), provenance.len());
        Self {
            vertices,
            cells,
            provenance,
            midpoints,
            extrusion,
        }
    }

    pub fn vertices(&self) -> &[Point4] {
        &self.vertices
    }

    pub fn cells(&self) -> &[TaggedPentatope] {
        &self.cells
    }

    pub fn cell(&self, c: CellId) -> Result<&TaggedPentatope, MeshError> {
        self.cells.get(c.0).ok_or(MeshError::NoSuchCell {
            cell: c,
            count: self.cells.len(),
        })
    }

    pub fn provenance(&self) -> &[Provenance] {
        &self.provenance
    }

    pub fn midpoints(&self) -> &MidpointTable {
        &self.midpoints
    }

    pub fn extrusion(&self) -> Option<&ExtrusionRecord> {
        self.extrusion.as_ref()
    }

    pub fn point(&self, v: VertexId) -> Point4 {
        self.vertices[v.0]
    }

    pub fn cell_points(&self, c: CellId) -> [Point4; 5] {
        self.cells[c.0].vertices().map(|v| self.vertices[v.0])
    }

    pub fn total_measure(&self) -> f64 {
        (0..self.cells.len())
            .map(|c| simplex_measure4(&self.cell_points(CellId(c))))
            .sum()
    }

    /// Replaces the tag of one cell. The new tag must order the same vertex
    /// set; used by tests and tools that perturb taggings.
    pub fn set_tag(&mut self, c: CellId, tag: TaggedPentatope) -> Result<(), MeshError> {
        let old = self.cell(c)?;
        if old.sorted_vertices() != tag.sorted_vertices() {
            return Err(MeshError::Extrusion(format!(
                "replacement tag for {c} orders a different vertex set"
            )));
        }
        self.cells[c.0] = tag;
        Ok(())
    }

    /// Mutable tags alongside the (immutable) provenance.
    pub(crate) fn cells_mut(&mut self) -> (&mut [TaggedPentatope], &[Provenance]) {
        (&mut self.cells, &self.provenance)
    }

    pub(crate) fn into_parts(
        self,
    ) -> (
        Vec<Point4>,
        Vec<TaggedPentatope>,
        Vec<Provenance>,
        MidpointTable,
        Option<ExtrusionRecord>,
    ) {
        (
            self.vertices,
            self.cells,
            self.provenance,
            self.midpoints,
            self.extrusion,
        )
    }
}

impl SimplicialMesh for PentMesh {
    const CELL_SIZE: usize = 5;
    fn vertex_count(&self) -> usize {
        self.vertices.len()
    }
    fn cell_count(&self) -> usize {
        self.cells.len()
    }
    fn cell_vertices(&self, cell: CellId) -> &[VertexId] {
        self.cells[cell.0].vertices()
    }
    fn midpoint_table(&self) -> Option<&MidpointTable> {
        Some(&self.midpoints)
    }
}

/// Volume of tetrahedron `cell`.
pub fn tet_volume(mesh: &TetMesh, cell: CellId) -> Result<f64, MeshError> {
    mesh.cell(cell)?;
    let volume = simplex_volume3(&mesh.cell_points(cell));
    if volume < MEASURE_TOLERANCE {
        return Err(MeshError::Degenerate {
            cell,
            measure: volume,
        });
    }
    Ok(volume)
}

/// 4-measure of pentatope `cell`.
pub fn pent_measure(mesh: &PentMesh, cell: CellId) -> Result<f64, MeshError> {
    mesh.cell(cell)?;
    let measure = simplex_measure4(&mesh.cell_points(cell));
    if measure < MEASURE_TOLERANCE {
        return Err(MeshError::Degenerate { cell, measure });
    }
    Ok(measure)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_tet() -> Vec<Point3> {
        vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ]
    }

    fn reference_pentatope() -> Vec<Point4> {
        let mut v = vec![[0.0; 4]];
        for axis in 0..4 {
            let mut p = [0.0; 4];
            p[axis] = 1.0;
            v.push(p);
        }
        v
    }

    #[test]
    fn reference_tet_volume() {
        let mesh = TetMesh::from_indices(reference_tet(), &[[0, 1, 2, 3]]).unwrap();
        assert!((tet_volume(&mesh, CellId(0)).unwrap() - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn tet_volume_ignores_vertex_order() {
        let perms = [[0, 1, 2, 3], [1, 0, 2, 3], [3, 2, 1, 0], [2, 3, 0, 1], [1, 2, 3, 0]];
        for p in perms {
            let mesh = TetMesh::from_indices(reference_tet(), &[p]).unwrap();
            assert!((tet_volume(&mesh, CellId(0)).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        }
    }

    #[test]
    fn tet_volume_scales_cubically() {
        let scaled = reference_tet().into_iter().map(|p| p.map(|x| 2.0 * x)).collect();
        let mesh = TetMesh::from_indices(scaled, &[[0, 1, 2, 3]]).unwrap();
        assert!((tet_volume(&mesh, CellId(0)).unwrap() - 8.0 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn tet_constructor_rejects_bad_cells() {
        let flat = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]];
        assert!(matches!(
            TetMesh::from_indices(flat, &[[0, 1, 2, 3]]),
            Err(MeshError::Degenerate { .. })
        ));
        assert!(matches!(
            TetMesh::from_indices(reference_tet(), &[[0, 1, 2, 9]]),
            Err(MeshError::DanglingVertex { .. })
        ));
        assert!(matches!(
            TetMesh::from_indices(reference_tet(), &[[0, 1, 2, 2]]),
            Err(MeshError::RepeatedVertex { .. })
        ));
        let mut nan = reference_tet();
        nan[2][1] = f64::NAN;
        assert!(matches!(
            TetMesh::from_indices(nan, &[[0, 1, 2, 3]]),
            Err(MeshError::NonFiniteCoordinate { .. })
        ));
    }

    #[test]
    fn reference_pentatope_measure() {
        let cell = TaggedPentatope::from_indices([0, 1, 2, 3, 4], 0).unwrap();
        let mesh = PentMesh::from_cells(reference_pentatope(), vec![cell]).unwrap();
        let m = pent_measure(&mesh, CellId(0)).unwrap();
        assert!((m - 1.0 / 24.0).abs() < 1e-16);
        assert!(pent_measure(&mesh, CellId(1)).is_err());
    }

    #[test]
    fn degenerate_pentatope_is_rejected() {
        let mut v = reference_pentatope();
        // Fifth point in the hyperplane of the first four.
        v[4] = [0.3, 0.3, 0.3, 0.0];
        let cell = TaggedPentatope::from_indices([0, 1, 2, 3, 4], 0).unwrap();
        assert!(matches!(
            PentMesh::from_cells(v, vec![cell]),
            Err(MeshError::Degenerate { .. })
        ));
    }
}
