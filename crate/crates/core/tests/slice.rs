mod common;

use std::collections::BTreeMap;

use nalgebra::{Matrix4, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stmesh_core::bisection::refine;
use stmesh_core::extrusion::{extrude_subdivide, TimeSlices};
use stmesh_core::fixtures;
use stmesh_core::mesh::{check_conforming, simplex_volume3, CellId, PentMesh};
use stmesh_core::slice::{export_time_slice, write_time_slice, SliceError};

/// Point-in-pentatope test by barycentric coordinates.
/// Cell id, first vertex, bounding box corners, inverse edge matrix.
type Located = (usize, [f64; 4], [f64; 4], [f64; 4], Matrix4<f64>);

struct Locator {
    cells: Vec<Located>,
}

impl Locator {
    /// Cells whose time range contains `t`, with spatial bounding boxes.
    fn new(mesh: &PentMesh, t: f64) -> Self {
        let mut cells = Vec::new();
        for c in 0..mesh.cells().len() {
            let p = mesh.cell_points(CellId(c));
            let lo = [0, 1, 2, 3].map(|i| p.iter().map(|q| q[i]).fold(f64::INFINITY, f64::min));
            let hi = [0, 1, 2, 3].map(|i| p.iter().map(|q| q[i]).fold(f64::NEG_INFINITY, f64::max));
            if lo[3] > t || hi[3] < t {
                continue;
            }
            let m = Matrix4::from_fn(|r, k| p[k + 1][r] - p[0][r]);
            cells.push((c, p[0], lo, hi, m.try_inverse().expect("non-degenerate")));
        }
        Self { cells }
    }

    fn locate(&self, x: [f64; 4]) -> Option<usize> {
        for (c, origin, lo, hi, inverse) in &self.cells {
            if (0..3).any(|i| x[i] < lo[i] || x[i] > hi[i]) {
                continue;
            }
            let b = inverse * Vector4::from_fn(|r, _| x[r] - origin[r]);
            if b.iter().all(|&l| l >= 0.0) && b.sum() <= 1.0 {
                return Some(*c);
            }
        }
        None
    }
}

/// Monte Carlo estimate of the section volume at `t` inside the unit cube,
/// total and per pentatope.
fn monte_carlo(mesh: &PentMesh, t: f64, samples: usize, seed: u64) -> (f64, BTreeMap<usize, f64>) {
    let locator = Locator::new(mesh, t);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits: BTreeMap<usize, usize> = BTreeMap::new();
    for _ in 0..samples {
        let x = [rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>(), t];
        if let Some(c) = locator.locate(x) {
            *hits.entry(c).or_insert(0) += 1;
        }
    }
    let scale = 1.0 / samples as f64;
    let total = hits.values().sum::<usize>() as f64 * scale;
    (total, hits.into_iter().map(|(c, n)| (c, n as f64 * scale)).collect())
}

fn section_volumes(mesh: &PentMesh, t: f64) -> (f64, BTreeMap<usize, f64>) {
    let slice = export_time_slice(mesh, t).unwrap();
    let mut per = BTreeMap::new();
    for (c, source) in slice.source.iter().enumerate() {
        *per.entry(source.0).or_insert(0.0) += simplex_volume3(&slice.mesh.cell_points(CellId(c)));
    }
    (slice.mesh.total_volume(), per)
}

fn single_prism() -> PentMesh {
    extrude_subdivide(
        &fixtures::single_tet(),
        &common::corner_coloring(),
        &TimeSlices::new(vec![0.0, 1.0]).unwrap(),
    )
    .unwrap()
}

#[test]
fn slab_midpoint_matches_monte_carlo() {
    let mesh = single_prism();
    let (volume, per) = section_volumes(&mesh, 0.5);
    let (estimate, per_mc) = monte_carlo(&mesh, 0.5, 1_000_000, 1);
    assert!((estimate - volume).abs() <= 0.01 * volume, "{estimate} vs {volume}");
    assert!((volume - 1.0 / 6.0).abs() < 1e-14);
    for (c, v) in &per {
        let mc = per_mc.get(c).copied().unwrap_or(0.0);
        assert!((mc - v).abs() <= 0.01 * volume, "cell {c}: {mc} vs {v}");
    }
    // Sections through tau_1 .. tau_4 at mid-slab.
    assert_eq!(per.len(), 4);
}

#[test]
fn refined_mesh_matches_monte_carlo() {
    let mut mesh = single_prism();
    for round in 0..4 {
        let marks: Vec<CellId> = (0..mesh.cells().len()).filter(|c| (c + round) % 3 == 0).map(CellId).collect();
        mesh = refine(&mesh, &marks).unwrap();
    }
    // 0.5 is the time of every vertical-edge midpoint, so on-plane vertices
    // appear; 0.3 cuts through generic positions.
    for (t, seed) in [(0.5, 2), (0.3, 3)] {
        let (volume, per) = section_volumes(&mesh, t);
        assert!((volume - 1.0 / 6.0).abs() < 1e-12, "t = {t}: {volume}");
        let (estimate, per_mc) = monte_carlo(&mesh, t, 1_000_000, seed);
        assert!((estimate - volume).abs() <= 0.01 * volume, "t = {t}: {estimate} vs {volume}");
        for (c, v) in &per {
            let mc = per_mc.get(c).copied().unwrap_or(0.0);
            assert!((mc - v).abs() <= 0.01 * volume, "t = {t}, cell {c}: {mc} vs {v}");
        }
        assert!(check_conforming(&export_time_slice(&mesh, t).unwrap().mesh).passed());
    }
}

#[test]
fn end_slices_are_the_spatial_mesh() {
    let tet = fixtures::single_tet();
    let mesh = single_prism();
    for t in [0.0, 1.0] {
        let slice = export_time_slice(&mesh, t).unwrap();
        assert_eq!(slice.mesh.vertices(), tet.vertices());
        assert_eq!(common::sorted_cells(&slice.mesh), common::sorted_cells(&tet));
    }
}

#[test]
fn sections_of_refined_grids_conform() {
    let mut mesh = common::extruded_kuhn_grid(2, &[0.0, 0.4, 1.0]);
    for round in 0..3 {
        let marks: Vec<CellId> = (0..mesh.cells().len()).filter(|c| (c * 31 + round) % 7 == 0).map(CellId).collect();
        mesh = refine(&mesh, &marks).unwrap();
    }
    for t in [0.0, 0.1, 0.2, 0.4, 0.55, 0.7, 1.0] {
        let slice = export_time_slice(&mesh, t).unwrap();
        assert!((slice.mesh.total_volume() - 8.0).abs() < 1e-11, "t = {t}");
        assert!(check_conforming(&slice.mesh).passed(), "t = {t}");
    }
}

#[test]
fn vtk_export() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("slice.vtk");
    let slice = write_time_slice(&single_prism(), 0.25, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let n = slice.mesh.cells().len();
    assert!(text.contains(&format!("CELLS {n} {}", 5 * n)));
    assert!(text.contains(&format!("CELL_DATA {n}")));
    assert!(matches!(
        write_time_slice(&single_prism(), -0.1, &path),
        Err(SliceError::OutOfRange { .. })
    ));
}
