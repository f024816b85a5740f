//! Four-dimensional simplicial space-time meshes built from 4-colored
//! tetrahedral meshes.
//!
//! The pipeline is: take a conforming [`TetMesh`], find (or manufacture) a
//! proper 4-coloring of its vertices, extrude every tetrahedron across a set
//! of time slices, cut each resulting prism into four pentatopes using the
//! vertex colors, and tag every pentatope so that newest-vertex style
//! bisection can refine the space-time mesh locally while staying
//! conforming.
//!
//! Module map:
//!
//! - [`mesh`]: index-based tetrahedral and pentatope meshes, adjacency,
//!   measures, conformity checking.
//! - [`coloring`]: 4-coloring search, verification, edge-parity diagnostic
//!   and barycentric subdivision with its canonical coloring.
//! - [`extrusion`]: time embedding, prism subdivision, initial tagging.
//! - [`bisection`]: tagged pentatopes, reflection, consistency predicates
//!   and conforming local refinement.
//! - [`io`], [`fixtures`], [`slice`], [`pipeline`]: file formats, fixture
//!   generators, cross-section export and the end-to-end driver.

pub mod bisection;
pub mod coloring;
pub mod extrusion;
pub mod fixtures;
pub mod io;
pub mod mesh;
pub mod pipeline;
pub mod slice;
pub mod stats;

pub use bisection::{
    bisect, check_consistent_tagging, check_pair_consistent, reflect, reflected_neighbors, refine,
    refine_with_stats, ConsistencyReport, MidpointTable, RefineError, RefineStats, TaggedPentatope,
};
pub use coloring::{
    barycentric_subdivide, edge_parity_check, find_four_coloring, verify_coloring, vertex_graph,
    ColorAssignment, ColorLabel, ColoringOutcome,
};
pub use extrusion::{embed_at_time, extrude_subdivide, tag_mesh, TimeSlices};
pub use mesh::{
    build_face_adjacency, build_hyperface_adjacency, check_conforming, pent_measure, tet_volume,
    CellId, MeshError, PentMesh, Point3, Point4, Provenance, TetMesh, VertexId,
};
