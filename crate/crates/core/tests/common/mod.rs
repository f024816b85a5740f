#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stmesh_core::coloring::ColorAssignment;
use stmesh_core::extrusion::{extrude_subdivide, TimeSlices};
use stmesh_core::fixtures;
use stmesh_core::mesh::{PentMesh, TetMesh, VertexId};

/// kuhn_grid(n) with every vertex moved by up to `amount` grid spacings in
/// each coordinate. Amounts below 0.1 keep all cells positively oriented.
pub fn jittered_kuhn_grid(n: usize, amount: f64, seed: u64) -> TetMesh {
    let grid = fixtures::kuhn_grid(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = 1.0 / n as f64;
    let vertices = grid
        .vertices()
        .iter()
        .map(|p| p.map(|x| x + rng.gen_range(-amount..=amount) * h))
        .collect();
    TetMesh::new(vertices, grid.cells().to_vec()).expect("small jitter keeps cells valid")
}

/// The subset of cells whose index passes `keep`, with unused vertices
/// dropped and ids compacted.
pub fn cell_subset(mesh: &TetMesh, keep: impl Fn(usize) -> bool) -> TetMesh {
    let cells: Vec<[VertexId; 4]> = mesh
        .cells()
        .iter()
        .enumerate()
        .filter(|(c, _)| keep(*c))
        .map(|(_, c)| *c)
        .collect();
    let mut map = vec![usize::MAX; mesh.vertices().len()];
    let mut vertices = Vec::new();
    for c in &cells {
        for v in c {
            if map[v.0] == usize::MAX {
                map[v.0] = vertices.len();
                vertices.push(mesh.vertices()[v.0]);
            }
        }
    }
    let cells = cells.iter().map(|c| c.map(|v| VertexId(map[v.0]))).collect();
    TetMesh::new(vertices, cells).expect("subset of a valid mesh")
}

pub fn sorted_cells(mesh: &TetMesh) -> Vec<[usize; 4]> {
    let mut cells: Vec<[usize; 4]> = mesh
        .cells()
        .iter()
        .map(|c| {
            let mut c = c.map(|v| v.0);
            c.sort_unstable();
            c
        })
        .collect();
    cells.sort_unstable();
    cells
}

/// Random strictly increasing slices: `slabs` gaps drawn from [0.1, 2).
pub fn random_slices(slabs: usize, rng: &mut impl Rng) -> TimeSlices {
    let mut t = rng.gen_range(-1.0..1.0);
    let mut values = vec![t];
    for _ in 0..slabs {
        t += rng.gen_range(0.1..2.0);
        values.push(t);
    }
    TimeSlices::new(values).unwrap()
}

pub fn extruded_kuhn_grid(n: usize, slices: &[f64]) -> PentMesh {
    extrude_subdivide(
        &fixtures::kuhn_grid(n),
        &fixtures::kuhn_grid_coloring(n),
        &TimeSlices::new(slices.to_vec()).unwrap(),
    )
    .unwrap()
}

pub fn corner_coloring() -> ColorAssignment {
    ColorAssignment::from_indices(&[0, 1, 2, 3]).unwrap()
}

/// A random non-degenerate pentatope on 5 random ids among 0..12, with
/// vertex positions in [-1, 1]^4 stored in a 12-vertex table.
pub fn random_tagged(kind: u8, rng: &mut impl Rng) -> (Vec<stmesh_core::mesh::Point4>, stmesh_core::TaggedPentatope) {
    use rand::seq::index::sample;
    loop {
        let vertices: Vec<stmesh_core::mesh::Point4> =
            (0..12).map(|_| [0; 4].map(|_| rng.gen_range(-1.0..1.0))).collect();
        let ids = sample(rng, 12, 5).into_vec();
        let t = stmesh_core::TaggedPentatope::from_indices([ids[0], ids[1], ids[2], ids[3], ids[4]], kind).unwrap();
        let p = t.vertices().map(|v| vertices[v.0]);
        if stmesh_core::mesh::simplex_measure4(&p) > 1e-3 {
            return (vertices, t);
        }
    }
}

/// Children and reflection written out from the bisection rule, as raw ids.
pub fn rule_children(x: [usize; 5], kind: u8, m: usize) -> [([usize; 5], u8); 2] {
    let [x0, x1, x2, x3, x4] = x;
    let second = match kind {
        0 => [x4, m, x3, x2, x1],
        1 => [x4, m, x1, x3, x2],
        _ => [x4, m, x1, x2, x3],
    };
    let k = (kind + 1) % 4;
    [([x0, m, x1, x2, x3], k), (second, k)]
}

pub fn rule_reflection(x: [usize; 5], kind: u8) -> [usize; 5] {
    let [x0, x1, x2, x3, x4] = x;
    match kind {
        0 => [x4, x3, x2, x1, x0],
        1 => [x4, x1, x3, x2, x0],
        _ => [x4, x1, x2, x3, x0],
    }
}
