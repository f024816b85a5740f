//! Extrusion of a colored tetrahedral mesh into a tagged pentatope mesh.
//!
//! Each tetrahedron `T` with vertices labeled A, B, C, D is extruded across
//! every slab `[s_i, s_{i+1}]` into a prism. Writing `X` for the copy of
//! vertex X at `s_i` and `X'` for its copy at `s_{i+1}`, the prism is cut
//! into
//!
//! ```text
//! tau_1 = {A, B, C, D, D'}     tagged (D, C, B, A, D')_0
//! tau_2 = {A, B, C, C', D'}    tagged (C, B, A, D', C')_0
//! tau_3 = {A, B, B', C', D'}   tagged (B, A, D', C', B')_0
//! tau_4 = {A, A', B', C', D'}  tagged (A, D', C', B', A')_0
//! ```
//!
//! Because the labels are global, neighboring prisms cut their shared walls
//! the same way and the tags fit together into a consistent tagging.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bisection::TaggedPentatope;
use crate::coloring::{verify_coloring, ColorAssignment, ColorLabel, ColoringError};
use crate::mesh::{
    build_hyperface_adjacency, check_conforming, CellId, ExtrusionRecord, MeshError, PentMesh, Point3, Point4, Provenance, TetMesh, VertexId,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExtrusionError {
    #[error("time slices must be finite, strictly increasing and at least two: {0}")]
    BadSlices(String),
    #[error(transparent)]
    Coloring(#[from] ColoringError),
    #[error("coloring is not proper: {count} monochromatic edges, first {first:?}")]
    ImproperColoring {
        count: usize,
        first: (VertexId, VertexId),
    },
    #[error("input mesh is not conforming ({0} violations)")]
    NonConforming(usize),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("mesh carries no extrusion record")]
    NotExtruded,
    #[error("cell {0} is a bisection child; only generation-0 cells can be retagged")]
    RefinedCell(CellId),
    #[error("cell {0} does not match its extrusion provenance")]
    ProvenanceMismatch(CellId),
}

/// Strictly increasing time values `s_0 < s_1 < ... < s_M`, `M >= 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct TimeSlices(Vec<f64>);

impl TimeSlices {
    pub fn new(values: Vec<f64>) -> Result<Self, ExtrusionError> {
        if values.len() < 2 {
            return Err(ExtrusionError::BadSlices(format!("{} value(s)", values.len())));
        }
        if let Some(x) = values.iter().find(|x| !x.is_finite()) {
            return Err(ExtrusionError::BadSlices(format!("{x} is not finite")));
        }
        if let Some(w) = values.windows(2).find(|w| w[0] >= w[1]) {
            return Err(ExtrusionError::BadSlices(format!("{} is not below {}", w[0], w[1])));
        }
        Ok(Self(values))
    }

    /// `slabs + 1` equispaced values from `t0` to `t1`.
    pub fn uniform(t0: f64, t1: f64, slabs: usize) -> Result<Self, ExtrusionError> {
        if slabs == 0 {
            return Err(ExtrusionError::BadSlices("zero slabs".into()));
        }
        let h = (t1 - t0) / slabs as f64;
        let mut values: Vec<f64> = (0..slabs).map(|j| t0 + h * j as f64).collect();
        values.push(t1);
        Self::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    /// Number of slice values, `M + 1`.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of slabs, `M`.
    pub fn slabs(&self) -> usize {
        self.0.len() - 1
    }

    pub fn first(&self) -> f64 {
        self.0[0]
    }

    pub fn last(&self) -> f64 {
        self.0[self.0.len() - 1]
    }
}

impl TryFrom<Vec<f64>> for TimeSlices {
    type Error = ExtrusionError;
    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<TimeSlices> for Vec<f64> {
    fn from(s: TimeSlices) -> Vec<f64> {
        s.0
    }
}

/// Copies `p` into the hyperplane `time = r`.
pub fn embed_at_time(p: Point3, r: f64) -> Point4 {
    [p[0], p[1], p[2], r]
}

/// Tag of each subdivision piece as (label, upper slice?) per position.
const TAGS: [[(ColorLabel, bool); 5]; 4] = {
    use ColorLabel::{A, B, C, D};
    [
        [(D, false), (C, false), (B, false), (A, false), (D, true)],
        [(C, false), (B, false), (A, false), (D, true), (C, true)],
        [(B, false), (A, false), (D, true), (C, true), (B, true)],
        [(A, false), (D, true), (C, true), (B, true), (A, true)],
    ]
};

/// Space-time id of spatial vertex `v` at slice `slice`.
#[inline]
pub fn layered_id(spatial_count: usize, slice: usize, v: VertexId) -> VertexId {
    VertexId(slice * spatial_count + v.0)
}

fn piece_tag(tau: usize, lower: &[VertexId; 4], upper: &[VertexId; 4]) -> TaggedPentatope {
    let order = TAGS[tau].map(|(label, up)| if up { upper[label.index()] } else { lower[label.index()] });
    TaggedPentatope::new(order, 0).expect("prism pieces have distinct vertices")
}

/// Extrudes every cell across every slab and cuts the prisms into tagged
/// pentatopes.
///
/// Output vertex `j * n + v` (with `n` spatial vertices) is spatial vertex
/// `v` at slice `s_j`. Cells are ordered by slab, then source cell, then
/// piece index.
pub fn extrude_subdivide(
    mesh: &TetMesh,
    colors: &ColorAssignment,
    slices: &TimeSlices,
) -> Result<PentMesh, ExtrusionError> {
    let coloring = verify_coloring(mesh, colors)?;
    if let Some(&first) = coloring.violations.first() {
        return Err(ExtrusionError::ImproperColoring {
            count: coloring.violations.len(),
            first,
        });
    }
    let conformity = check_conforming(mesh);
    if !conformity.passed() {
        return Err(ExtrusionError::NonConforming(conformity.violations.len()));
    }

    let n = mesh.vertices().len();
    let mut vertices = Vec::with_capacity(n * slices.len());
    for &s in slices.values() {
        vertices.extend(mesh.vertices().iter().map(|&p| embed_at_time(p, s)));
    }

    let per_slab = 4 * mesh.cells().len();
    let mut cells = Vec::with_capacity(per_slab * slices.slabs());
    let mut provenance = Vec::with_capacity(per_slab * slices.slabs());
    for slab in 0..slices.slabs() {
        for (t, cell) in mesh.cells().iter().enumerate() {
            let mut lower = [VertexId(0); 4];
            let mut upper = [VertexId(0); 4];
            for &v in cell {
                let label = colors.get(v).index();
                lower[label] = layered_id(n, slab, v);
                upper[label] = layered_id(n, slab + 1, v);
            }
            for tau in 0..4 {
                cells.push(piece_tag(tau, &lower, &upper));
                provenance.push(Provenance::Extruded {
                    tet: CellId(t),
                    slab,
                    tau: tau as u8 + 1,
                });
            }
        }
    }
    let record = ExtrusionRecord {
        spatial_vertex_count: n,
        colors: colors.labels().to_vec(),
        slices: slices.clone(),
    };
    Ok(PentMesh::new(vertices, cells, provenance)?.with_extrusion(record)?)
}

/// Recomputes the initial tag of every cell from its vertex set, its
/// provenance and the vertex colors, in place. Constant work per cell.
pub fn retag(mesh: &mut PentMesh) -> Result<(), ExtrusionError> {
    let record = mesh.extrusion().ok_or(ExtrusionError::NotExtruded)?;
    let n = record.spatial_vertex_count;
    let colors = record.colors.clone();
    let (cells, provenance) = mesh.cells_mut();
    for (c, (cell, prov)) in cells.iter_mut().zip(provenance).enumerate() {
        let id = CellId(c);
        let (slab, tau) = match *prov {
            Provenance::Extruded { slab, tau, .. } => (slab, tau as usize),
            Provenance::Bisected { .. } => return Err(ExtrusionError::RefinedCell(id)),
            Provenance::Imported => return Err(ExtrusionError::ProvenanceMismatch(id)),
        };
        if !(1..=4).contains(&tau) {
            return Err(ExtrusionError::ProvenanceMismatch(id));
        }
        let mut slots: [[Option<VertexId>; 4]; 2] = [[None; 4]; 2];
        for &v in cell.vertices() {
            let (layer, spatial) = (v.0 / n, v.0 % n);
            let side = match layer.checked_sub(slab) {
                Some(0) => 0,
                Some(1) => 1,
                _ => return Err(ExtrusionError::ProvenanceMismatch(id)),
            };
            slots[side][colors[spatial].index()] = Some(v);
        }
        let mut order = [VertexId(0); 5];
        for (k, (label, up)) in TAGS[tau - 1].into_iter().enumerate() {
            order[k] = slots[up as usize][label.index()].ok_or(ExtrusionError::ProvenanceMismatch(id))?;
        }
        *cell = TaggedPentatope::new(order, 0).map_err(|_| ExtrusionError::ProvenanceMismatch(id))?;
    }
    Ok(())
}

/// Copy of `pents` with every tag recomputed; see [`retag`].
pub fn tag_mesh(pents: &PentMesh) -> Result<PentMesh, ExtrusionError> {
    let mut out = pents.clone();
    retag(&mut out)?;
    Ok(out)
}

/// The three ways two generation-0 neighbors can sit relative to their
/// prisms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NeighborCase {
    /// Both pieces come from the same prism.
    SamePrism,
    /// Same source tetrahedron, consecutive slabs.
    CrossSlab,
    /// Same slab, different source tetrahedra.
    CrossPrism,
}

/// Case of a neighbor pair from extrusion provenance; `None` unless both
/// cells are extruded and the pair fits one of the cases.
pub fn classify_neighbors(a: &Provenance, b: &Provenance) -> Option<NeighborCase> {
    match (*a, *b) {
        (
            Provenance::Extruded { tet: ta, slab: sa, .. },
            Provenance::Extruded { tet: tb, slab: sb, .. },
        ) => match (ta == tb, sa == sb) {
            (true, true) => Some(NeighborCase::SamePrism),
            (true, false) if sa.abs_diff(sb) == 1 => Some(NeighborCase::CrossSlab),
            (false, true) => Some(NeighborCase::CrossPrism),
            _ => None,
        },
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassifiedPair {
    pub cells: (CellId, CellId),
    pub facet: [VertexId; 4],
    pub case: Option<NeighborCase>,
}

/// Every interior hyperface of `mesh` with its neighbor case.
pub fn classify_neighbor_pairs(mesh: &PentMesh) -> Result<Vec<ClassifiedPair>, MeshError> {
    let adjacency = build_hyperface_adjacency(mesh)?;
    Ok(adjacency
        .interior()
        .map(|(facet, a, b)| ClassifiedPair {
            cells: (a, b),
            facet: *facet,
            case: classify_neighbors(&mesh.provenance()[a.0], &mesh.provenance()[b.0]),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bisection::check_consistent_tagging;
    use crate::fixtures;
    use crate::mesh::pent_measure;

    fn abcd() -> ColorAssignment {
        ColorAssignment::from_indices(&[0, 1, 2, 3]).unwrap()
    }

    #[test]
    fn slices_validate() {
        assert!(TimeSlices::new(vec![0.0]).is_err());
        assert!(TimeSlices::new(vec![0.0, 0.0]).is_err());
        assert!(TimeSlices::new(vec![0.0, 2.0, 1.0]).is_err());
        assert!(TimeSlices::new(vec![0.0, f64::INFINITY]).is_err());
        let u = TimeSlices::uniform(0.0, 1.0, 4).unwrap();
        assert_eq!(u.values(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(u.slabs(), 4);
    }

    #[test]
    fn embedding() {
        assert_eq!(embed_at_time([0.0, 0.0, 0.0], 0.0), [0.0; 4]);
        assert_eq!(embed_at_time([1.0, 2.0, 3.0], 5.0), [1.0, 2.0, 3.0, 5.0]);
    }

    /// With A..D on vertices 0..3 the lower copies are ids 0..3 and the upper
    /// copies 4..7, so the pieces can be written down literally.
    #[test]
    fn reference_prism_pieces_and_tags() {
        let mesh = extrude_subdivide(&fixtures::single_tet(), &abcd(), &TimeSlices::new(vec![0.0, 1.0]).unwrap())
            .unwrap();
        let (a, b, c, d) = (0, 1, 2, 3);
        let (a1, b1, c1, d1) = (4, 5, 6, 7);
        let expected = [
            [d, c, b, a, d1],
            [c, b, a, d1, c1],
            [b, a, d1, c1, b1],
            [a, d1, c1, b1, a1],
        ];
        let sets = [
            [a, b, c, d, d1],
            [a, b, c, c1, d1],
            [a, b, b1, c1, d1],
            [a, a1, b1, c1, d1],
        ];
        assert_eq!(mesh.cells().len(), 4);
        for k in 0..4 {
            let cell = mesh.cells()[k];
            assert_eq!(cell, TaggedPentatope::from_indices(expected[k], 0).unwrap());
            let mut s = sets[k];
            s.sort();
            assert_eq!(cell.sorted_vertices().map(|v| v.0), s);
            assert!((pent_measure(&mesh, CellId(k)).unwrap() - 1.0 / 24.0).abs() < 1e-15);
        }
        assert!(((mesh.total_measure() - 1.0 / 6.0) * 6.0).abs() < 1e-12);
    }

    #[test]
    fn two_slab_vertex_ids_are_global() {
        let mesh = extrude_subdivide(&fixtures::single_tet(), &abcd(), &TimeSlices::new(vec![0.0, 1.0, 3.0]).unwrap())
            .unwrap();
        assert_eq!(mesh.vertices().len(), 12);
        assert_eq!(mesh.vertices()[9], [1.0, 0.0, 0.0, 3.0]);
        // Slab-1 tau_1 starts from the middle slice copies.
        assert_eq!(mesh.cells()[4], TaggedPentatope::from_indices([7, 6, 5, 4, 11], 0).unwrap());
    }

    #[test]
    fn improper_coloring_is_rejected() {
        let bad = ColorAssignment::from_indices(&[0, 0, 2, 3]).unwrap();
        let err = extrude_subdivide(&fixtures::single_tet(), &bad, &TimeSlices::new(vec![0.0, 1.0]).unwrap());
        assert!(matches!(err, Err(ExtrusionError::ImproperColoring { count: 1, .. })));
    }

    #[test]
    fn non_conforming_input_is_rejected() {
        let mut v = fixtures::single_tet().vertices().to_vec();
        v.push([1.0, 1.0, 1.0]);
        let dup = TetMesh::from_indices(v, &[[0, 1, 2, 3], [3, 2, 1, 0]]).unwrap();
        let colors = ColorAssignment::from_indices(&[0, 1, 2, 3, 0]).unwrap();
        let err = extrude_subdivide(&dup, &colors, &TimeSlices::new(vec![0.0, 1.0]).unwrap());
        assert_eq!(err, Err(ExtrusionError::NonConforming(1)));
    }

    #[test]
    fn tag_mesh_is_a_fixed_point() {
        let mesh = extrude_subdivide(
            &fixtures::kuhn_grid(2),
            &fixtures::kuhn_grid_coloring(2),
            &TimeSlices::new(vec![0.0, 1.0, 2.0]).unwrap(),
        )
        .unwrap();
        assert_eq!(tag_mesh(&mesh).unwrap(), mesh);
    }

    #[test]
    fn tag_mesh_restores_scrambled_tags() {
        let original = extrude_subdivide(
            &fixtures::kuhn_cube(),
            &fixtures::kuhn_grid_coloring(1),
            &TimeSlices::new(vec![0.0, 1.0]).unwrap(),
        )
        .unwrap();
        let mut scrambled = original.clone();
        for c in 0..scrambled.cells().len() {
            let t = scrambled.cells()[c];
            let mut v = *t.vertices();
            v.rotate_left(c % 5 + 1);
            scrambled.set_tag(CellId(c), TaggedPentatope::new(v, (c % 4) as u8).unwrap()).unwrap();
        }
        assert_ne!(scrambled, original);
        assert!(!check_consistent_tagging(&scrambled).passed());
        assert_eq!(tag_mesh(&scrambled).unwrap(), original);
    }

    #[test]
    fn tag_mesh_rejects_refined_cells() {
        let mesh = extrude_subdivide(&fixtures::single_tet(), &abcd(), &TimeSlices::new(vec![0.0, 1.0]).unwrap())
            .unwrap();
        let refined = crate::bisection::refine(&mesh, &[CellId(0)]).unwrap();
        assert!(matches!(tag_mesh(&refined), Err(ExtrusionError::RefinedCell(_))));
    }
}
