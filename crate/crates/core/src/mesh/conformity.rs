use std::collections::BTreeMap;

use serde::Serialize;

use super::adjacency::facet_incidence;
use super::{CellId, SimplicialMesh, VertexId};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ViolationKind {
    /// A facet is contained in more than two cells.
    OverloadedFacet { facet: Vec<VertexId> },
    /// Both cells have the same vertex set.
    DuplicateCell,
    /// The first cell still has `edge` as an edge although the edge was
    /// bisected at `midpoint`, which the second cell uses.
    HangingVertex {
        edge: (VertexId, VertexId),
        midpoint: VertexId,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConformityViolation {
    pub cells: (CellId, CellId),
    #[serde(flatten)]
    pub kind: ViolationKind,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ConformityReport {
    pub cells: usize,
    pub violations: Vec<ConformityViolation>,
}

impl ConformityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Combinatorial conformity check over vertex ids.
///
/// A simplicial mesh whose shared vertices carry shared ids is conforming
/// when no facet is claimed by more than two cells, no two cells coincide,
/// and no cell keeps an edge that refinement has already split elsewhere.
/// Works for both tetrahedral (`K = 3`) and pentatope (`K = 4`) meshes.
pub fn check_conforming<M: SimplicialMesh>(mesh: &M) -> ConformityReport {
    let mut violations = Vec::new();
    match M::CELL_SIZE {
        4 => overloaded::<M, 3>(mesh, &mut violations),
        5 => overloaded::<M, 4>(mesh, &mut violations),
        n => unreachable!("unsupported cell size {n}"),
    }
    duplicates(mesh, &mut violations);
    hanging(mesh, &mut violations);
    ConformityReport {
        cells: mesh.cell_count(),
        violations,
    }
}

fn overloaded<M: SimplicialMesh, const K: usize>(mesh: &M, out: &mut Vec<ConformityViolation>) {
    for (key, cells) in facet_incidence::<M, K>(mesh) {
        if cells.len() <= 2 {
            continue;
        }
        for (i, &a) in cells.iter().enumerate() {
            for &b in &cells[i + 1..] {
                out.push(ConformityViolation {
                    cells: (a, b),
                    kind: ViolationKind::OverloadedFacet { facet: key.to_vec() },
                });
            }
        }
    }
}

fn duplicates<M: SimplicialMesh>(mesh: &M, out: &mut Vec<ConformityViolation>) {
    let mut seen: BTreeMap<Vec<VertexId>, CellId> = BTreeMap::new();
    for c in 0..mesh.cell_count() {
        let mut key = mesh.cell_vertices(CellId(c)).to_vec();
        key.sort_unstable();
        if let Some(&first) = seen.get(&key) {
            out.push(ConformityViolation {
                cells: (first, CellId(c)),
                kind: ViolationKind::DuplicateCell,
            });
        } else {
            seen.insert(key, CellId(c));
        }
    }
}

fn hanging<M: SimplicialMesh>(mesh: &M, out: &mut Vec<ConformityViolation>) {
    let Some(table) = mesh.midpoint_table() else {
        return;
    };
    if table.is_empty() {
        return;
    }
    let mut incident: Vec<Vec<CellId>> = vec![Vec::new(); mesh.vertex_count()];
    for c in 0..mesh.cell_count() {
        for v in mesh.cell_vertices(CellId(c)) {
            incident[v.0].push(CellId(c));
        }
    }
    let contains = |c: CellId, v: VertexId| mesh.cell_vertices(c).contains(&v);
    for (&(a, b), &m) in table.iter() {
        let Some(&user) = incident[m.0]
            .iter()
            .find(|&&c| contains(c, a) || contains(c, b))
        else {
            continue;
        };
        for &c in incident[a.0].iter().filter(|&&c| contains(c, b)) {
            out.push(ConformityViolation {
                cells: (c, user),
                kind: ViolationKind::HangingVertex {
                    edge: (a, b),
                    midpoint: m,
                },
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bisection::{MidpointTable, TaggedPentatope};
    use crate::coloring::ColorAssignment;
    use crate::extrusion::{extrude_subdivide, TimeSlices};
    use crate::fixtures;
    use crate::mesh::{PentMesh, Point4, TetMesh};

    #[test]
    fn empty_meshes_conform() {
        assert!(check_conforming(&TetMesh::default()).passed());
        assert!(check_conforming(&PentMesh::default()).passed());
    }

    #[test]
    fn fixtures_conform() {
        for mesh in [
            fixtures::single_tet(),
            fixtures::two_tets(),
            fixtures::kuhn_cube(),
            fixtures::kuhn_grid(3),
            fixtures::odd_fan(),
        ] {
            assert!(check_conforming(&mesh).passed());
        }
    }

    #[test]
    fn extruded_mesh_conforms() {
        let tet = fixtures::kuhn_grid(2);
        let colors = fixtures::kuhn_grid_coloring(2);
        let slices = TimeSlices::new(vec![0.0, 0.5, 2.0]).unwrap();
        let pents = extrude_subdivide(&tet, &colors, &slices).unwrap();
        assert!(check_conforming(&pents).passed());
    }

    #[test]
    fn duplicate_tet_is_reported() {
        let mut v = fixtures::single_tet().vertices().to_vec();
        v.push([1.0, 1.0, 1.0]);
        let mesh = TetMesh::from_indices(v, &[[0, 1, 2, 3], [3, 2, 1, 0]]).unwrap();
        let report = check_conforming(&mesh);
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].kind, ViolationKind::DuplicateCell);
    }

    #[test]
    fn overloaded_face_lists_every_pair() {
        let mesh = TetMesh::from_indices(
            vec![
                [0.0, 0.0, 0.0],
                [1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [0.0, 0.0, 1.0],
                [0.0, 0.0, -1.0],
                [1.0, 1.0, 1.0],
            ],
            &[[0, 1, 2, 3], [0, 1, 2, 4], [0, 1, 2, 5]],
        )
        .unwrap();
        let pairs: Vec<_> = check_conforming(&mesh)
            .violations
            .iter()
            .map(|v| (v.cells.0 .0, v.cells.1 .0))
            .collect();
        assert_eq!(pairs, vec![(0, 1), (0, 2), (1, 2)]);
    }

    /// Two pentatopes on one side of the facet {0,1,2,3} of a third, with the
    /// facet's edge (0,1) split at a midpoint: the facet of the big cell is
    /// covered by two smaller facets instead of one matching facet.
    #[test]
    fn split_facet_is_reported_with_its_pair() {
        let mut v: Vec<Point4> = vec![[0.0; 4]];
        for axis in 0..4 {
            let mut p = [0.0; 4];
            p[axis] = 1.0;
            v.push(p);
        }
        v.push([0.0, 0.0, 0.0, -1.0]); // 5: apex on the other side of {0,1,2,3}
        v.push([0.5, 0.0, 0.0, 0.0]); // 6: midpoint of (0,1)
        let cells = vec![
            TaggedPentatope::from_indices([0, 1, 2, 3, 4], 0).unwrap(),
            TaggedPentatope::from_indices([0, 6, 2, 3, 5], 0).unwrap(),
            TaggedPentatope::from_indices([6, 1, 2, 3, 5], 0).unwrap(),
        ];
        let mut table = MidpointTable::default();
        table.insert(crate::VertexId(0), crate::VertexId(1), crate::VertexId(6));
        let mesh = PentMesh::from_cells(v, cells).unwrap().with_midpoints(table).unwrap();
        let report = check_conforming(&mesh);
        assert!(!report.passed());
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].cells, (CellId(0), CellId(1)));
        assert!(matches!(
            report.violations[0].kind,
            ViolationKind::HangingVertex { midpoint: VertexId(6), .. }
        ));
    }

    #[test]
    fn extruded_colored_single_prism_conforms() {
        let pents = extrude_subdivide(
            &fixtures::single_tet(),
            &ColorAssignment::from_indices(&[2, 0, 3, 1]).unwrap(),
            &TimeSlices::new(vec![0.0, 1.0]).unwrap(),
        )
        .unwrap();
        assert!(check_conforming(&pents).passed());
    }
}
