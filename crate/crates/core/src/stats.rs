//! Mesh summaries and shape signatures.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::mesh::{simplex_measure4, CellId, PentMesh, Point4, TetMesh};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeshStats {
    pub dimension: usize,
    pub vertices: usize,
    pub cells: usize,
    pub total_measure: f64,
    pub min_measure: f64,
    pub max_measure: f64,
    /// Cell counts per generation (pentatope meshes only).
    pub generations: BTreeMap<u32, usize>,
    /// Cell counts per tag type (pentatope meshes only).
    pub tag_types: BTreeMap<u8, usize>,
}

fn extremes(measures: impl Iterator<Item = f64>) -> (f64, f64, f64) {
    measures.fold((0.0, f64::INFINITY, 0.0), |(sum, lo, hi), m| (sum + m, lo.min(m), hi.max(m)))
}

pub fn tet_stats(mesh: &TetMesh) -> MeshStats {
    let (total, lo, hi) = extremes((0..mesh.cells().len()).map(|c| crate::mesh::simplex_volume3(&mesh.cell_points(CellId(c)))));
    MeshStats {
        dimension: 3,
        vertices: mesh.vertices().len(),
        cells: mesh.cells().len(),
        total_measure: total,
        min_measure: if mesh.cells().is_empty() { 0.0 } else { lo },
        max_measure: hi,
        generations: BTreeMap::new(),
        tag_types: BTreeMap::new(),
    }
}

pub fn pent_stats(mesh: &PentMesh) -> MeshStats {
    let (total, lo, hi) = extremes((0..mesh.cells().len()).map(|c| simplex_measure4(&mesh.cell_points(CellId(c)))));
    let mut generations = BTreeMap::new();
    for p in mesh.provenance() {
        *generations.entry(p.generation()).or_insert(0) += 1;
    }
    let mut tag_types = BTreeMap::new();
    for t in mesh.cells() {
        *tag_types.entry(t.kind()).or_insert(0) += 1;
    }
    MeshStats {
        dimension: 4,
        vertices: mesh.vertices().len(),
        cells: mesh.cells().len(),
        total_measure: total,
        min_measure: if mesh.cells().is_empty() { 0.0 } else { lo },
        max_measure: hi,
        generations,
        tag_types,
    }
}

/// Scale-invariant congruence signature of a pentatope: its ten squared
/// edge lengths divided by `sqrt(measure)`, sorted and quantized to 1e-6.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ShapeSignature([i64; 10]);

pub fn shape_signature(p: &[Point4; 5]) -> ShapeSignature {
    let scale = simplex_measure4(p).sqrt();
    let mut lengths = [0.0f64; 10];
    let mut k = 0;
    for i in 0..5 {
        for j in i + 1..5 {
            lengths[k] = (0..4).map(|a| (p[i][a] - p[j][a]).powi(2)).sum::<f64>() / scale;
            k += 1;
        }
    }
    lengths.sort_by(f64::total_cmp);
    ShapeSignature(lengths.map(|x| (x * 1e6).round() as i64))
}

pub fn shape_signatures(mesh: &PentMesh) -> BTreeSet<ShapeSignature> {
    (0..mesh.cells().len())
        .map(|c| shape_signature(&mesh.cell_points(CellId(c))))
        .collect()
}
