//! Vertex 4-colorings of tetrahedral meshes.
//!
//! A proper coloring gives every tetrahedron one vertex of each label, which
//! is what the prism subdivision in [`crate::extrusion`] keys on. Three
//! routes to a coloring are provided: an exact DSATUR backtracking search,
//! the edge-parity diagnostic that explains many search failures, and
//! barycentric subdivision, which always admits a canonical coloring.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mesh::{MeshError, Point3, TetMesh, VertexId};

/// Vertex counts below this are always searched exhaustively.
pub const EXHAUSTIVE_BELOW: usize = 64;

/// Default node-expansion budget for [`find_four_coloring`].
pub const DEFAULT_BUDGET: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum ColorLabel {
    A,
    B,
    C,
    D,
}

impl ColorLabel {
    pub const ALL: [ColorLabel; 4] = [ColorLabel::A, ColorLabel::B, ColorLabel::C, ColorLabel::D];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }
}

impl From<ColorLabel> for u8 {
    fn from(c: ColorLabel) -> u8 {
        c as u8
    }
}

impl TryFrom<u8> for ColorLabel {
    type Error = String;
    fn try_from(v: u8) -> Result<Self, String> {
        ColorLabel::from_index(v as usize).ok_or_else(|| format!("color {v} is not in 0..4"))
    }
}

impl fmt::Display for ColorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = ["A", "B", "C", "D"][self.index()];
        f.write_str(s)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ColoringError {
    #[error("coloring covers {got} vertices, mesh has {expected}")]
    Incomplete { expected: usize, got: usize },
    #[error("color index {0} is not in 0..4")]
    BadLabel(usize),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// One label per vertex, indexed by vertex id.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ColorAssignment(Vec<ColorLabel>);

impl ColorAssignment {
    pub fn new(labels: Vec<ColorLabel>) -> Self {
        Self(labels)
    }

    pub fn from_indices(indices: &[usize]) -> Result<Self, ColoringError> {
        indices
            .iter()
            .map(|&i| ColorLabel::from_index(i).ok_or(ColoringError::BadLabel(i)))
            .collect::<Result<Vec<_>, _>>()
            .map(Self)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, v: VertexId) -> ColorLabel {
        self.0[v.0]
    }

    pub fn labels(&self) -> &[ColorLabel] {
        &self.0
    }

    pub fn into_labels(self) -> Vec<ColorLabel> {
        self.0
    }

    /// Applies a relabeling `A -> perm[0]`, `B -> perm[1]`, ...
    pub fn permuted(&self, perm: [ColorLabel; 4]) -> Self {
        Self(self.0.iter().map(|c| perm[c.index()]).collect())
    }
}

/// Vertex adjacency of a tetrahedral mesh: two vertices are adjacent when
/// some cell contains both.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexGraph {
    adjacency: Vec<Vec<VertexId>>,
}

impl VertexGraph {
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adjacency[v.0]
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges as sorted pairs, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(a, ns)| {
            ns.iter()
                .filter(move |b| b.0 > a)
                .map(move |&b| (VertexId(a), b))
        })
    }
}

pub fn vertex_graph(mesh: &TetMesh) -> VertexGraph {
    let mut adjacency: Vec<Vec<VertexId>> = vec![Vec::new(); mesh.vertices().len()];
    for cell in mesh.cells() {
        for (i, &a) in cell.iter().enumerate() {
            for &b in &cell[i + 1..] {
                adjacency[a.0].push(b);
                adjacency[b.0].push(a);
            }
        }
    }
    for ns in &mut adjacency {
        ns.sort_unstable();
        ns.dedup();
    }
    VertexGraph { adjacency }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ColoringReport {
    /// Edges whose endpoints share a label.
    pub violations: Vec<(VertexId, VertexId)>,
}

impl ColoringReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn verify_coloring(mesh: &TetMesh, colors: &ColorAssignment) -> Result<ColoringReport, ColoringError> {
    if colors.len() != mesh.vertices().len() {
        return Err(ColoringError::Incomplete {
            expected: mesh.vertices().len(),
            got: colors.len(),
        });
    }
    let violations = vertex_graph(mesh)
        .edges()
        .filter(|&(a, b)| colors.get(a) == colors.get(b))
        .collect();
    Ok(ColoringReport { violations })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ColoringOutcome {
    Colored(ColorAssignment),
    /// The expansion budget ran out before the search finished.
    NotFound { expansions: u64 },
    /// The search tree was exhausted: no proper 4-coloring exists.
    ProvenUncolorable { expansions: u64 },
}

impl ColoringOutcome {
    pub fn coloring(&self) -> Option<&ColorAssignment> {
        match self {
            ColoringOutcome::Colored(c) => Some(c),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchLimits {
    /// Maximum number of label assignments tried.
    pub budget: u64,
    /// Meshes with fewer vertices ignore the budget.
    pub exhaustive_below: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        Self {
            budget: DEFAULT_BUDGET,
            exhaustive_below: EXHAUSTIVE_BELOW,
        }
    }
}

/// Budgeted exact 4-coloring search with the default exhaustive threshold.
pub fn find_four_coloring(mesh: &TetMesh, budget: u64) -> ColoringOutcome {
    find_four_coloring_with(
        mesh,
        SearchLimits {
            budget,
            ..SearchLimits::default()
        },
    )
}

struct Frame {
    vertex: usize,
    next_label: u8,
    /// Highest label in use before this vertex was colored, or -1.
    max_before: i8,
}

/// DSATUR backtracking. The next vertex is the uncolored one with the most
/// distinct neighbor labels, ties broken by degree and then lowest id; labels
/// are tried lowest first. A vertex may open at most one new label beyond
/// those already in use, which removes label-permutation symmetry without
/// losing completeness.
pub fn find_four_coloring_with(mesh: &TetMesh, limits: SearchLimits) -> ColoringOutcome {
    let graph = vertex_graph(mesh);
    let n = graph.vertex_count();
    let exhaustive = n < limits.exhaustive_below;

    let mut label: Vec<Option<u8>> = vec![None; n];
    let mut seen: Vec<[u32; 4]> = vec![[0; 4]; n];
    let mut colored = 0usize;
    let mut max_used: i8 = -1;
    let mut expansions = 0u64;
    let mut stack: Vec<Frame> = Vec::with_capacity(n);

    let assign = |v: usize, c: u8, label: &mut Vec<Option<u8>>, seen: &mut Vec<[u32; 4]>| {
        label[v] = Some(c);
        for w in graph.neighbors(VertexId(v)) {
            seen[w.0][c as usize] += 1;
        }
    };
    let unassign = |v: usize, c: u8, label: &mut Vec<Option<u8>>, seen: &mut Vec<[u32; 4]>| {
        label[v] = None;
        for w in graph.neighbors(VertexId(v)) {
            seen[w.0][c as usize] -= 1;
        }
    };

    'select: loop {
        if colored == n {
            let labels = label
                .iter()
                .map(|c| ColorLabel::from_index(c.expect("all colored") as usize).unwrap())
                .collect();
            return ColoringOutcome::Colored(ColorAssignment(labels));
        }
        let mut best: Option<(usize, usize, usize)> = None;
        for v in 0..n {
            if label[v].is_some() {
                continue;
            }
            let sat = seen[v].iter().filter(|&&k| k > 0).count();
            let deg = graph.neighbors(VertexId(v)).len();
            if best.is_none_or(|(_, s, d)| (sat, deg) > (s, d)) {
                best = Some((v, sat, deg));
            }
        }
        let (v, _, _) = best.expect("an uncolored vertex exists");
        stack.push(Frame {
            vertex: v,
            next_label: 0,
            max_before: max_used,
        });

        while let Some(frame) = stack.last_mut() {
            let v = frame.vertex;
            if let Some(c) = label[v] {
                unassign(v, c, &mut label, &mut seen);
                colored -= 1;
            }
            max_used = frame.max_before;
            let limit = (max_used + 1).min(3) as u8;
            let choice = (frame.next_label..=limit).find(|&c| seen[v][c as usize] == 0);
            match choice {
                Some(c) => {
                    expansions += 1;
                    if !exhaustive && expansions > limits.budget {
                        return ColoringOutcome::NotFound { expansions };
                    }
                    frame.next_label = c + 1;
                    assign(v, c, &mut label, &mut seen);
                    colored += 1;
                    max_used = max_used.max(c as i8);
                    continue 'select;
                }
                None => {
                    stack.pop();
                }
            }
        }
        return ColoringOutcome::ProvenUncolorable { expansions };
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EdgeIncidence {
    pub edge: (VertexId, VertexId),
    pub cells: usize,
}

impl EdgeIncidence {
    pub fn is_even(&self) -> bool {
        self.cells.is_multiple_of(2)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct EdgeParityReport {
    pub interior: Vec<EdgeIncidence>,
    /// Reported for information only; boundary edges are never flagged.
    pub boundary: Vec<EdgeIncidence>,
    /// Interior edges with an odd number of incident cells.
    pub odd_interior: Vec<(VertexId, VertexId)>,
}

impl EdgeParityReport {
    pub fn passed(&self) -> bool {
        self.odd_interior.is_empty()
    }
}

/// Incident-cell counts for every edge. An edge is a boundary edge when it
/// lies on a boundary face; only interior edges are subject to the parity
/// requirement.
pub fn edge_parity_check(mesh: &TetMesh) -> Result<EdgeParityReport, MeshError> {
    let mut counts: BTreeMap<(VertexId, VertexId), usize> = BTreeMap::new();
    for cell in mesh.cells() {
        for (i, &a) in cell.iter().enumerate() {
            for &b in &cell[i + 1..] {
                *counts.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
    }
    let mut on_boundary = std::collections::BTreeSet::new();
    for face in mesh.boundary_faces()? {
        on_boundary.insert((face[0], face[1]));
        on_boundary.insert((face[0], face[2]));
        on_boundary.insert((face[1], face[2]));
    }
    let mut report = EdgeParityReport::default();
    for (edge, cells) in counts {
        let entry = EdgeIncidence { edge, cells };
        if on_boundary.contains(&edge) {
            report.boundary.push(entry);
        } else {
            if !entry.is_even() {
                report.odd_interior.push(edge);
            }
            report.interior.push(entry);
        }
    }
    Ok(report)
}

fn mean<const N: usize>(points: [Point3; N]) -> Point3 {
    let mut out = [0.0; 3];
    for p in &points {
        for k in 0..3 {
            out[k] += p[k];
        }
    }
    out.map(|x| x / N as f64)
}

const PERMUTATIONS_4: [[usize; 4]; 24] = {
    let mut out = [[0; 4]; 24];
    let mut n = 0;
    let mut a = 0;
    while a < 4 {
        let mut b = 0;
        while b < 4 {
            let mut c = 0;
            while c < 4 {
                if a != b && a != c && b != c {
                    out[n] = [a, b, c, 6 - a - b - c];
                    n += 1;
                }
                c += 1;
            }
            b += 1;
        }
        a += 1;
    }
    out
};

/// Barycentric subdivision with its canonical coloring.
///
/// Every cell is split into 24 tetrahedra, one per chain
/// vertex ⊂ edge ⊂ face ⊂ cell. Edge, face and cell centers are shared
/// between neighboring cells through their sorted vertex keys. Original
/// vertices keep their ids and are labeled A; edge centers are B, face
/// centers C, cell centers D.
pub fn barycentric_subdivide(mesh: &TetMesh) -> Result<(TetMesh, ColorAssignment), MeshError> {
    let mut vertices: Vec<Point3> = mesh.vertices().to_vec();
    let mut colors = vec![ColorLabel::A; vertices.len()];
    let mut edge_center: BTreeMap<[VertexId; 2], VertexId> = BTreeMap::new();
    let mut face_center: BTreeMap<[VertexId; 3], VertexId> = BTreeMap::new();
    let mut cells = Vec::with_capacity(24 * mesh.cells().len());

    let mut push = |p: Point3, c: ColorLabel, vertices: &mut Vec<Point3>| {
        vertices.push(p);
        colors.push(c);
        VertexId(vertices.len() - 1)
    };

    for cell in mesh.cells() {
        let pts = cell.map(|v| mesh.point(v));
        let mut edge_ids = [[VertexId(0); 4]; 4];
        for i in 0..4 {
            for j in i + 1..4 {
                let mut key = [cell[i], cell[j]];
                key.sort_unstable();
                let id = match edge_center.get(&key) {
                    Some(&id) => id,
                    None => {
                        let id = push(mean([pts[i], pts[j]]), ColorLabel::B, &mut vertices);
                        edge_center.insert(key, id);
                        id
                    }
                };
                edge_ids[i][j] = id;
                edge_ids[j][i] = id;
            }
        }
        // Face opposite local vertex `skip`.
        let mut face_ids = [VertexId(0); 4];
        for (skip, slot) in face_ids.iter_mut().enumerate() {
            let local: Vec<usize> = (0..4).filter(|&k| k != skip).collect();
            let mut key = [cell[local[0]], cell[local[1]], cell[local[2]]];
            key.sort_unstable();
            *slot = match face_center.get(&key) {
                Some(&id) => id,
                None => {
                    let p = mean([pts[local[0]], pts[local[1]], pts[local[2]]]);
                    let id = push(p, ColorLabel::C, &mut vertices);
                    face_center.insert(key, id);
                    id
                }
            };
        }
        let center = push(mean(pts), ColorLabel::D, &mut vertices);
        for [a, b, _c, d] in PERMUTATIONS_4 {
            // Face containing a, b, c is the one opposite d.
            cells.push([cell[a], edge_ids[a][b], face_ids[d], center]);
        }
    }
    let out = TetMesh::new(vertices, cells)?;
    Ok((out, ColorAssignment(colors)))
}
