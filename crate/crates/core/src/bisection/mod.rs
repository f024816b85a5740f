//! Tagged pentatopes and their bisection.
//!
//! A tag is a vertex ordering `(x0, x1, x2, x3, x4)` plus a type in `0..4`.
//! The refinement edge is always `(x0, x4)`; bisecting it at its midpoint
//! yields two children whose orderings depend on the type, and the type
//! advances by one modulo 4.

mod refine;

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::mesh::facet_incidence;
use crate::mesh::{simplex_measure4, CellId, PentMesh, Point4, VertexId, MEASURE_TOLERANCE};

pub use refine::{refine, refine_with_stats, RefineError, RefineStats};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TagError {
    #[error("tag repeats vertex {0}")]
    RepeatedVertex(VertexId),
    #[error("tag type {0} is not in 0..4")]
    BadType(u8),
    #[error("degenerate bisection child (measure {0:e})")]
    DegenerateChild(f64),
    #[error("no child pair shares facet {0:?}; the two cells are not a valid adjacent pair")]
    Structural(Vec<VertexId>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TaggedPentatope {
    vertices: [VertexId; 5],
    kind: u8,
}

impl TaggedPentatope {
    pub fn new(vertices: [VertexId; 5], kind: u8) -> Result<Self, TagError> {
        if kind > 3 {
            return Err(TagError::BadType(kind));
        }
        for i in 0..5 {
            if vertices[..i].contains(&vertices[i]) {
                return Err(TagError::RepeatedVertex(vertices[i]));
            }
        }
        Ok(Self { vertices, kind })
    }

    pub fn from_indices(vertices: [usize; 5], kind: u8) -> Result<Self, TagError> {
        Self::new(vertices.map(VertexId), kind)
    }

    #[inline]
    pub fn vertices(&self) -> &[VertexId; 5] {
        &self.vertices
    }

    /// The type, in `0..4`.
    #[inline]
    pub fn kind(&self) -> u8 {
        self.kind
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.vertices.contains(&v)
    }

    pub fn sorted_vertices(&self) -> [VertexId; 5] {
        let mut s = self.vertices;
        s.sort_unstable();
        s
    }

    /// `(x0, x4)` with the smaller id first.
    pub fn refinement_edge(&self) -> (VertexId, VertexId) {
        let (a, b) = (self.vertices[0], self.vertices[4]);
        (a.min(b), a.max(b))
    }

    /// The other tag of the same simplex that bisects into the same children.
    pub fn reflect(&self) -> Self {
        let [x0, x1, x2, x3, x4] = self.vertices;
        let vertices = match self.kind {
            0 => [x4, x3, x2, x1, x0],
            1 => [x4, x1, x3, x2, x0],
            _ => [x4, x1, x2, x3, x0],
        };
        Self {
            vertices,
            kind: self.kind,
        }
    }

    /// Children for a refinement-edge midpoint with id `midpoint`.
    pub fn children(&self, midpoint: VertexId) -> [Self; 2] {
        debug_assert!(!self.contains(midpoint));
        let [x0, x1, x2, x3, x4] = self.vertices;
        let kind = (self.kind + 1) % 4;
        let second = match self.kind {
            0 => [x4, midpoint, x3, x2, x1],
            1 => [x4, midpoint, x1, x3, x2],
            _ => [x4, midpoint, x1, x2, x3],
        };
        [
            Self {
                vertices: [x0, midpoint, x1, x2, x3],
                kind,
            },
            Self {
                vertices: second,
                kind,
            },
        ]
    }

    fn shared_count(&self, other: &Self) -> usize {
        self.vertices.iter().filter(|v| other.contains(**v)).count()
    }
}

/// Reflection of a tag.
pub fn reflect(t: &TaggedPentatope) -> TaggedPentatope {
    t.reflect()
}

/// Edge-midpoint registry: at most one midpoint vertex per edge.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MidpointTable {
    map: BTreeMap<(VertexId, VertexId), VertexId>,
}

impl MidpointTable {
    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn get(&self, a: VertexId, b: VertexId) -> Option<VertexId> {
        self.map.get(&(a.min(b), a.max(b))).copied()
    }

    /// Records an existing vertex as the midpoint of `(a, b)`.
    pub fn insert(&mut self, a: VertexId, b: VertexId, midpoint: VertexId) {
        self.map.insert((a.min(b), a.max(b)), midpoint);
    }

    /// Midpoint of `(a, b)`, appending its coordinates to `vertices` on
    /// first use.
    pub fn get_or_insert(&mut self, a: VertexId, b: VertexId, vertices: &mut Vec<Point4>) -> VertexId {
        *self.map.entry((a.min(b), a.max(b))).or_insert_with(|| {
            let (p, q) = (vertices[a.0], vertices[b.0]);
            vertices.push([0, 1, 2, 3].map(|k| 0.5 * (p[k] + q[k])));
            VertexId(vertices.len() - 1)
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(VertexId, VertexId), &VertexId)> {
        self.map.iter()
    }
}

/// Bisects `t`, creating or reusing the refinement-edge midpoint.
pub fn bisect(
    t: &TaggedPentatope,
    midpoints: &mut MidpointTable,
    vertices: &mut Vec<Point4>,
) -> Result<[TaggedPentatope; 2], TagError> {
    let (a, b) = t.refinement_edge();
    let m = midpoints.get_or_insert(a, b, vertices);
    let children = t.children(m);
    for child in &children {
        let measure = simplex_measure4(&child.vertices.map(|v| vertices[v.0]));
        if measure < MEASURE_TOLERANCE {
            return Err(TagError::DegenerateChild(measure));
        }
    }
    Ok(children)
}

/// Same type, a common hyperface, and an ordering that agrees with `t` or
/// with its reflection in all but at most one position.
pub fn reflected_neighbors(t: &TaggedPentatope, u: &TaggedPentatope) -> bool {
    if t.kind != u.kind || t.shared_count(u) != 4 {
        return false;
    }
    let mismatches = |a: &[VertexId; 5]| a.iter().zip(&u.vertices).filter(|(x, y)| x != y).count();
    mismatches(&t.vertices) <= 1 || mismatches(&t.reflect().vertices) <= 1
}

/// Which branch of the consistency definition applied to a pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConsistencyClause {
    /// A refinement edge lies in the shared facet; the tags themselves must
    /// be reflected neighbors.
    SharedRefinementEdge,
    /// Neither refinement edge lies in the shared facet; the children that
    /// keep the facet must be reflected neighbors.
    AdjacentChildren,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairVerdict {
    pub clause: ConsistencyClause,
    pub consistent: bool,
}

/// Consistency verdict for two tags sharing `shared`, with the clause used.
pub fn pair_consistency(
    t: &TaggedPentatope,
    u: &TaggedPentatope,
    shared: &[VertexId; 4],
) -> Result<PairVerdict, TagError> {
    let in_shared = |(a, b): (VertexId, VertexId)| shared.contains(&a) && shared.contains(&b);
    if !shared.iter().all(|&v| t.contains(v) && u.contains(v)) {
        return Err(TagError::Structural(shared.to_vec()));
    }
    if in_shared(t.refinement_edge()) || in_shared(u.refinement_edge()) {
        return Ok(PairVerdict {
            clause: ConsistencyClause::SharedRefinementEdge,
            consistent: reflected_neighbors(t, u),
        });
    }
    // Scratch midpoint ids never collide with real vertices.
    let keeper = |tag: &TaggedPentatope, m: usize| -> Result<TaggedPentatope, TagError> {
        let mut keeping = tag
            .children(VertexId(m))
            .into_iter()
            .filter(|c| shared.iter().all(|&v| c.contains(v)));
        match (keeping.next(), keeping.next()) {
            (Some(c), None) => Ok(c),
            _ => Err(TagError::Structural(shared.to_vec())),
        }
    };
    let ct = keeper(t, usize::MAX)?;
    let cu = keeper(u, usize::MAX - 1)?;
    Ok(PairVerdict {
        clause: ConsistencyClause::AdjacentChildren,
        consistent: reflected_neighbors(&ct, &cu),
    })
}

/// Whether two tags sharing the hyperface `shared` are consistently tagged.
pub fn check_pair_consistent(
    t: &TaggedPentatope,
    u: &TaggedPentatope,
    shared: &[VertexId; 4],
) -> Result<bool, TagError> {
    pair_consistency(t, u, shared).map(|v| v.consistent)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairViolation {
    pub cells: (CellId, CellId),
    pub facet: [VertexId; 4],
    /// `None` for an inconsistent pair, otherwise the structural problem.
    pub structural: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ConsistencyReport {
    pub pairs_checked: usize,
    pub shared_refinement_edge: usize,
    pub adjacent_children: usize,
    /// Neighbor pairs from different bisection generations. The consistency
    /// condition compares tags of equal type, so these are not checked.
    pub mixed_generation: usize,
    pub violations: Vec<PairViolation>,
}

impl ConsistencyReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every pair of cells of the same generation sharing a hyperface.
///
/// On an unrefined mesh every neighbor pair is checked. After local
/// refinement, a pair of same-generation neighbors is also a neighbor pair
/// of the uniform refinement of that generation, so it must still pass;
/// pairs across generations are only counted.
pub fn check_consistent_tagging(mesh: &PentMesh) -> ConsistencyReport {
    let mut report = ConsistencyReport::default();
    let generation = |c: CellId| mesh.provenance()[c.0].generation();
    for (facet, cells) in facet_incidence::<PentMesh, 4>(mesh) {
        for (i, &a) in cells.iter().enumerate() {
            for &b in &cells[i + 1..] {
                if generation(a) != generation(b) && cells.len() == 2 {
                    report.mixed_generation += 1;
                    continue;
                }
                report.pairs_checked += 1;
                let structural = if cells.len() > 2 {
                    Some(format!("facet shared by {} cells", cells.len()))
                } else {
                    match pair_consistency(&mesh.cells()[a.0], &mesh.cells()[b.0], &facet) {
                        Ok(verdict) => {
                            match verdict.clause {
                                ConsistencyClause::SharedRefinementEdge => report.shared_refinement_edge += 1,
                                ConsistencyClause::AdjacentChildren => report.adjacent_children += 1,
                            }
                            if verdict.consistent {
                                continue;
                            }
                            None
                        }
                        Err(e) => Some(e.to_string()),
                    }
                };
                report.violations.push(PairViolation {
                    cells: (a, b),
                    facet,
                    structural,
                });
            }
        }
    }
    report
}
