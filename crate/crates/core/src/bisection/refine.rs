use serde::Serialize;
use thiserror::Error;

use super::{MidpointTable, TaggedPentatope};
use crate::mesh::{simplex_measure4, CellId, PentMesh, Point4, Provenance, MEASURE_TOLERANCE};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RefineError {
    #[error("marked cell {cell} does not exist (mesh has {count} cells)")]
    NoSuchCell { cell: CellId, count: usize },
    #[error(
        "closure recursion reached depth {depth} (limit {limit}) while refining around cell {cell}; \
         the input tagging is not consistent"
    )]
    PreconditionViolated { cell: CellId, depth: usize, limit: usize },
    #[error("bisection produced a degenerate child (measure {measure:e})")]
    Degenerate { measure: f64 },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RefineStats {
    pub marked: usize,
    pub bisections: usize,
    /// Bisections of cells that were not in the marked set.
    pub closure_bisections: usize,
    pub max_depth: usize,
}

struct Lineage {
    /// Id in the input mesh of the ancestor (or of the cell itself).
    ancestor: CellId,
    child: u8,
    generation: u32,
    original: Option<Provenance>,
    marked: bool,
}

struct Workspace {
    vertices: Vec<Point4>,
    cells: Vec<TaggedPentatope>,
    alive: Vec<bool>,
    lineage: Vec<Lineage>,
    incident: Vec<Vec<usize>>,
    midpoints: MidpointTable,
    depth_limit: usize,
    stats: RefineStats,
}

impl Workspace {
    /// Live cells containing both `a` and `b`, lowest id first.
    fn patch(&self, a: crate::VertexId, b: crate::VertexId) -> Vec<usize> {
        let (short, other) = if self.incident[a.0].len() <= self.incident[b.0].len() {
            (a, b)
        } else {
            (b, a)
        };
        let mut out: Vec<usize> = self.incident[short.0]
            .iter()
            .copied()
            .filter(|&c| self.cells[c].contains(other))
            .collect();
        out.sort_unstable();
        out
    }

    /// Bisects every cell around the refinement edge of `cell`, first
    /// refining any cell in that patch whose own refinement edge differs.
    fn refine_around(&mut self, cell: usize, depth: usize) -> Result<(), RefineError> {
        if depth > self.depth_limit {
            return Err(RefineError::PreconditionViolated {
                cell: CellId(cell),
                depth,
                limit: self.depth_limit,
            });
        }
        self.stats.max_depth = self.stats.max_depth.max(depth);
        let edge = self.cells[cell].refinement_edge();
        loop {
            let patch = self.patch(edge.0, edge.1);
            if patch.is_empty() {
                return Ok(());
            }
            if let Some(&blocker) = patch.iter().find(|&&c| self.cells[c].refinement_edge() != edge) {
                self.refine_around(blocker, depth + 1)?;
                continue;
            }
            let m = self.midpoints.get_or_insert(edge.0, edge.1, &mut self.vertices);
            for c in patch {
                self.bisect_cell(c, m)?;
            }
            return Ok(());
        }
    }

    fn bisect_cell(&mut self, c: usize, midpoint: crate::VertexId) -> Result<(), RefineError> {
        let parent = self.cells[c];
        let children = parent.children(midpoint);
        for child in &children {
            let measure = simplex_measure4(&child.vertices().map(|v| self.vertices[v.0]));
            if measure < MEASURE_TOLERANCE {
                return Err(RefineError::Degenerate { measure });
            }
        }
        self.stats.bisections += 1;
        if !self.lineage[c].marked {
            self.stats.closure_bisections += 1;
        }
        self.alive[c] = false;
        for v in parent.vertices() {
            self.incident[v.0].retain(|&x| x != c);
        }
        if self.incident.len() < self.vertices.len() {
            self.incident.resize(self.vertices.len(), Vec::new());
        }
        let (ancestor, generation) = (self.lineage[c].ancestor, self.lineage[c].generation + 1);
        for (ordinal, child) in children.into_iter().enumerate() {
            let id = self.cells.len();
            for v in child.vertices() {
                self.incident[v.0].push(id);
            }
            self.cells.push(child);
            self.alive.push(true);
            self.lineage.push(Lineage {
                ancestor,
                child: ordinal as u8,
                generation,
                original: None,
                marked: false,
            });
        }
        Ok(())
    }
}

/// Bisects every marked cell, adding the closure bisections needed to keep
/// the mesh conforming.
///
/// Before a cell is bisected, every live cell sharing its refinement edge is
/// refined until that edge is its refinement edge too; then the whole patch
/// around the edge is bisected with one shared midpoint. Marked cells are
/// processed lowest id first, and marked cells already split by an earlier
/// closure are skipped.
///
/// The input should be consistently tagged (as every mesh produced by
/// [`crate::extrusion::extrude_subdivide`] is, together with its
/// refinements). Closure recursion deeper than `4 * (generation span + 2)`
/// is reported as [`RefineError::PreconditionViolated`].
pub fn refine(mesh: &PentMesh, marked: &[CellId]) -> Result<PentMesh, RefineError> {
    refine_with_stats(mesh, marked).map(|(m, _)| m)
}

pub fn refine_with_stats(mesh: &PentMesh, marked: &[CellId]) -> Result<(PentMesh, RefineStats), RefineError> {
    let count = mesh.cells().len();
    let mut marks: Vec<usize> = marked.iter().map(|c| c.0).collect();
    marks.sort_unstable();
    marks.dedup();
    if let Some(&bad) = marks.iter().find(|&&c| c >= count) {
        return Err(RefineError::NoSuchCell { cell: CellId(bad), count });
    }
    if marks.is_empty() {
        return Ok((mesh.clone(), RefineStats::default()));
    }

    let generations = mesh.provenance().iter().map(Provenance::generation);
    let span = match (generations.clone().min(), generations.max()) {
        (Some(lo), Some(hi)) => (hi - lo) as usize,
        _ => 0,
    };

    let (vertices, cells, provenance, midpoints, extrusion) = mesh.clone().into_parts();
    let mut incident = vec![Vec::new(); vertices.len()];
    for (c, cell) in cells.iter().enumerate() {
        for v in cell.vertices() {
            incident[v.0].push(c);
        }
    }
    let mut is_marked = vec![false; count];
    for &c in &marks {
        is_marked[c] = true;
    }
    let lineage = provenance
        .iter()
        .enumerate()
        .map(|(c, p)| Lineage {
            ancestor: CellId(c),
            child: 0,
            generation: p.generation(),
            original: Some(*p),
            marked: is_marked[c],
        })
        .collect();
    let mut ws = Workspace {
        vertices,
        alive: vec![true; count],
        cells,
        lineage,
        incident,
        midpoints,
        depth_limit: 4 * (span + 2),
        stats: RefineStats {
            marked: marks.len(),
            ..RefineStats::default()
        },
    };

    for c in marks {
        if ws.alive[c] {
            ws.refine_around(c, 0)?;
        }
    }

    let mut out_cells = Vec::new();
    let mut out_provenance = Vec::new();
    for (c, cell) in ws.cells.iter().enumerate() {
        if !ws.alive[c] {
            continue;
        }
        let l = &ws.lineage[c];
        out_cells.push(*cell);
        out_provenance.push(l.original.unwrap_or(Provenance::Bisected {
            parent: l.ancestor,
            child: l.child,
            generation: l.generation,
        }));
    }
    let refined = PentMesh::from_parts_unchecked(ws.vertices, out_cells, out_provenance, ws.midpoints, extrusion);
    Ok((refined, ws.stats))
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::coloring::ColorAssignment;
    use crate::extrusion::{extrude_subdivide, TimeSlices};
    use crate::fixtures;
    use crate::mesh::check_conforming;

    fn single_prism() -> PentMesh {
        extrude_subdivide(
            &fixtures::single_tet(),
            &ColorAssignment::from_indices(&[0, 1, 2, 3]).unwrap(),
            &TimeSlices::new(vec![0.0, 1.0]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn empty_marking_is_identity() {
        let mesh = single_prism();
        assert_eq!(refine(&mesh, &[]).unwrap(), mesh);
    }

    #[test]
    fn unknown_mark_is_rejected() {
        assert!(matches!(
            refine(&single_prism(), &[CellId(4)]),
            Err(RefineError::NoSuchCell { .. })
        ));
    }

    #[test]
    fn uniform_marking_doubles() {
        let mesh = extrude_subdivide(
            &fixtures::kuhn_cube(),
            &fixtures::kuhn_grid_coloring(1),
            &TimeSlices::new(vec![0.0, 1.0, 2.0]).unwrap(),
        )
        .unwrap();
        let all: Vec<_> = (0..mesh.cells().len()).map(CellId).collect();
        let (refined, stats) = refine_with_stats(&mesh, &all).unwrap();
        assert_eq!(refined.cells().len(), 2 * mesh.cells().len());
        assert_eq!(stats.closure_bisections, 0);
        assert!(check_conforming(&refined).passed());
    }

    /// Closure oracle: the cells bisected are exactly those containing the
    /// marked cell's refinement edge, when each of them already has it as
    /// refinement edge.
    #[test]
    fn single_mark_refines_the_edge_patch() {
        let mesh = single_prism();
        for marked in 0..4 {
            let edge = mesh.cells()[marked].refinement_edge();
            let expected: BTreeSet<usize> = (0..4)
                .filter(|&c| {
                    let t = mesh.cells()[c];
                    t.contains(edge.0) && t.contains(edge.1)
                })
                .collect();
            let (refined, stats) = refine_with_stats(&mesh, &[CellId(marked)]).unwrap();
            assert_eq!(stats.bisections, expected.len());
            assert_eq!(refined.cells().len(), 4 + expected.len());
            let survivors: BTreeSet<usize> = refined
                .provenance()
                .iter()
                .filter_map(|p| match p {
                    Provenance::Extruded { tau, .. } => Some(*tau as usize - 1),
                    _ => None,
                })
                .collect();
            assert!(survivors.is_disjoint(&expected));
            assert!(check_conforming(&refined).passed());
        }
    }

    #[test]
    fn cyclic_refinement_edges_hit_the_guard() {
        // tau_1 and tau_2 share {A, B, C, D'}; give tau_1 refinement edge AB
        // and tau_2 refinement edge AC so each blocks the other forever.
        let mut mesh = single_prism();
        let (a, b, c, d, c1, d1) = (0, 1, 2, 3, 6, 7);
        mesh.set_tag(CellId(0), TaggedPentatope::from_indices([a, c, d, d1, b], 0).unwrap())
            .unwrap();
        mesh.set_tag(CellId(1), TaggedPentatope::from_indices([a, b, c1, d1, c], 0).unwrap())
            .unwrap();
        assert!(matches!(
            refine(&mesh, &[CellId(0)]),
            Err(RefineError::PreconditionViolated { limit: 8, .. })
        ));
    }
}
