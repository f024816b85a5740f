//! Constant-time cross-sections of pentatope meshes.

use std::collections::BTreeMap;
use std::path::Path;

use thiserror::Error;

use crate::io::vtk::{self, Field};
use crate::io::IoError;
use crate::mesh::{CellId, PentMesh, Point3, TetMesh, VertexId};

#[derive(Debug, Error)]
pub enum SliceError {
    #[error("time {t} is outside the mesh time range [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },
    #[error("mesh has no cells")]
    Empty,
    #[error(transparent)]
    Io(#[from] IoError),
}

/// A tetrahedral cross-section. `source[c]` is the pentatope that cell `c`
/// was cut from.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSlice {
    pub time: f64,
    pub mesh: TetMesh,
    pub source: Vec<CellId>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Key {
    Vertex(VertexId),
    Crossing(VertexId, VertexId),
}

/// Time range `[s_0, s_M]` of the mesh.
pub fn time_range(mesh: &PentMesh) -> Option<(f64, f64)> {
    if let Some(record) = mesh.extrusion() {
        return Some((record.slices.first(), record.slices.last()));
    }
    let times = mesh.vertices().iter().map(|p| p[3]);
    let lo = times.clone().reduce(f64::min)?;
    let hi = times.reduce(f64::max)?;
    Some((lo, hi))
}

/// Intersects every cell with the hyperplane `time = t`.
///
/// A cell with vertices strictly below and strictly above `t` contributes
/// the join of its on-plane vertices with the staircase triangulation of
/// the product of its below and above vertex sets, each ordered by
/// global id. A cell facet lying in the plane is emitted once, from the
/// cell above it (from the cell below at the final time). Cross-section
/// vertices are numbered with on-plane mesh vertices first, by id, then
/// edge crossings by edge.
pub fn export_time_slice(mesh: &PentMesh, t: f64) -> Result<TimeSlice, SliceError> {
    let (lo, hi) = time_range(mesh).ok_or(SliceError::Empty)?;
    if !(lo <= t && t <= hi) {
        return Err(SliceError::OutOfRange { t, lo, hi });
    }
    let at_top = t == hi;

    let mut cells: Vec<[Key; 4]> = Vec::new();
    let mut source = Vec::new();
    for (c, cell) in mesh.cells().iter().enumerate() {
        let (mut below, mut on, mut above) = (Vec::new(), Vec::new(), Vec::new());
        for v in cell.sorted_vertices() {
            let time = mesh.point(v)[3];
            if time < t {
                below.push(v);
            } else if time > t {
                above.push(v);
            } else {
                on.push(v);
            }
        }
        if below.is_empty() || above.is_empty() {
            let emit = on.len() == 4 && if at_top { above.is_empty() } else { below.is_empty() };
            if emit {
                cells.push([on[0], on[1], on[2], on[3]].map(Key::Vertex));
                source.push(CellId(c));
            }
            continue;
        }
        for path in staircase(below.len(), above.len()) {
            let mut keys: Vec<Key> = on.iter().map(|&v| Key::Vertex(v)).collect();
            keys.extend(path.iter().map(|&(i, j)| crossing(below[i], above[j])));
            cells.push(keys.try_into().expect("section simplices have 4 vertices"));
            source.push(CellId(c));
        }
    }

    let mut index: BTreeMap<Key, usize> = cells.iter().flatten().map(|&k| (k, 0)).collect();
    let mut points: Vec<Point3> = Vec::with_capacity(index.len());
    for (k, slot) in index.iter_mut() {
        *slot = points.len();
        points.push(match *k {
            Key::Vertex(v) => spatial(mesh.point(v)),
            Key::Crossing(a, b) => {
                let (p, q) = (mesh.point(a), mesh.point(b));
                let s = (t - p[3]) / (q[3] - p[3]);
                [0, 1, 2].map(|i| p[i] + s * (q[i] - p[i]))
            }
        });
    }
    let cells = cells.iter().map(|c| c.map(|k| VertexId(index[&k]))).collect();
    Ok(TimeSlice {
        time: t,
        mesh: TetMesh::new_allow_thin(points, cells),
        source,
    })
}

/// Writes the cross-section at `t` as a legacy VTK file with the source
/// pentatope of every cell as cell data.
pub fn write_time_slice(mesh: &PentMesh, t: f64, path: &Path) -> Result<TimeSlice, SliceError> {
    let slice = export_time_slice(mesh, t)?;
    let source: Vec<i64> = slice.source.iter().map(|c| c.0 as i64).collect();
    vtk::write(
        path,
        &slice.mesh,
        &format!("time slice t = {t}"),
        &[],
        &[Field {
            name: "source_cell",
            values: &source,
        }],
    )?;
    Ok(slice)
}

fn spatial(p: [f64; 4]) -> Point3 {
    [p[0], p[1], p[2]]
}

fn crossing(a: VertexId, b: VertexId) -> Key {
    Key::Crossing(a.min(b), a.max(b))
}

/// Monotone lattice paths from `(0, 0)` to `(rows - 1, cols - 1)`, taking
/// row steps before column steps in lexicographic order.
fn staircase(rows: usize, cols: usize) -> Vec<Vec<(usize, usize)>> {
    fn walk(i: usize, j: usize, rows: usize, cols: usize, path: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        path.push((i, j));
        if i + 1 == rows && j + 1 == cols {
            out.push(path.clone());
        }
        if i + 1 < rows {
            walk(i + 1, j, rows, cols, path, out);
        }
        if j + 1 < cols {
            walk(i, j + 1, rows, cols, path, out);
        }
        path.pop();
    }
    let mut out = Vec::new();
    walk(0, 0, rows, cols, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coloring::ColorAssignment;
    use crate::extrusion::{extrude_subdivide, TimeSlices};
    use crate::fixtures;
    use crate::mesh::check_conforming;

    fn binomial(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn staircase_counts() {
        for rows in 1..5 {
            for cols in 1..5 {
                let paths = staircase(rows, cols);
                assert_eq!(paths.len(), binomial(rows + cols - 2, rows - 1));
                assert!(paths.iter().all(|p| p.len() == rows + cols - 1));
            }
        }
    }

    fn kuhn_stack() -> PentMesh {
        extrude_subdivide(
            &fixtures::kuhn_cube(),
            &fixtures::kuhn_grid_coloring(1),
            &TimeSlices::new(vec![0.0, 1.0, 3.0]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn slice_at_slice_values_is_the_spatial_mesh() {
        let mesh = kuhn_stack();
        let cube = fixtures::kuhn_cube();
        let sorted = |m: &TetMesh| {
            let mut cells: Vec<_> = m
                .cells()
                .iter()
                .map(|c| {
                    let mut c = *c;
                    c.sort();
                    c
                })
                .collect();
            cells.sort();
            cells
        };
        for t in [0.0, 1.0, 3.0] {
            let slice = export_time_slice(&mesh, t).unwrap();
            assert_eq!(slice.mesh.vertices(), cube.vertices(), "t = {t}");
            assert_eq!(sorted(&slice.mesh), sorted(&cube), "t = {t}");
        }
    }

    #[test]
    fn interior_slice_conforms_and_keeps_volume() {
        let mesh = kuhn_stack();
        for t in [0.25, 0.5, 1.7] {
            let slice = export_time_slice(&mesh, t).unwrap();
            assert!((slice.mesh.total_volume() - 1.0).abs() < 1e-12);
            assert!(check_conforming(&slice.mesh).passed());
        }
    }

    #[test]
    fn out_of_range() {
        let mesh = extrude_subdivide(
            &fixtures::single_tet(),
            &ColorAssignment::from_indices(&[0, 1, 2, 3]).unwrap(),
            &TimeSlices::new(vec![0.0, 1.0]).unwrap(),
        )
        .unwrap();
        assert!(matches!(export_time_slice(&mesh, 1.5), Err(SliceError::OutOfRange { .. })));
        assert!(matches!(export_time_slice(&mesh, f64::NAN), Err(SliceError::OutOfRange { .. })));
    }
}
