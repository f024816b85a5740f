//! Legacy ASCII VTK unstructured-grid export.

use std::fmt::Write as _;
use std::path::Path;

use super::{write_file, IoError};
use crate::mesh::TetMesh;

const VTK_TETRA: u8 = 10;

/// Integer-valued data attached to points or cells.
pub struct Field<'a> {
    pub name: &'a str,
    pub values: &'a [i64],
}

pub fn to_string(mesh: &TetMesh, title: &str, point_data: &[Field], cell_data: &[Field]) -> String {
    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\n");
    // The title line must be a single line.
    writeln!(out, "{}", title.lines().next().unwrap_or("")).unwrap();
    out.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");
    writeln!(out, "POINTS {} double", mesh.vertices().len()).unwrap();
    for p in mesh.vertices() {
        writeln!(out, "{:?} {:?} {:?}", p[0], p[1], p[2]).unwrap();
    }
    let n = mesh.cells().len();
    writeln!(out, "CELLS {n} {}", 5 * n).unwrap();
    for cell in mesh.cells() {
        writeln!(out, "4 {} {} {} {}", cell[0].0, cell[1].0, cell[2].0, cell[3].0).unwrap();
    }
    writeln!(out, "CELL_TYPES {n}").unwrap();
    for _ in 0..n {
        writeln!(out, "{VTK_TETRA}").unwrap();
    }
    write_fields(&mut out, "POINT_DATA", mesh.vertices().len(), point_data);
    write_fields(&mut out, "CELL_DATA", n, cell_data);
    out
}

fn write_fields(out: &mut String, section: &str, count: usize, fields: &[Field]) {
    if fields.is_empty() {
        return;
    }
    writeln!(out, "{section} {count}").unwrap();
    for field in fields {
        assert_eq!(field.values.len(), count, "field `{}` has the wrong length", field.name);
        writeln!(out, "SCALARS {} int 1\nLOOKUP_TABLE default", field.name).unwrap();
        for v in field.values {
            writeln!(out, "{v}").unwrap();
        }
    }
}

pub fn write(path: &Path, mesh: &TetMesh, title: &str, point_data: &[Field], cell_data: &[Field]) -> Result<(), IoError> {
    write_file(path, &to_string(mesh, title, point_data, cell_data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn single_tet_layout() {
        let text = to_string(
            &fixtures::single_tet(),
            "one",
            &[],
            &[Field {
                name: "source",
                values: &[7],
            }],
        );
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# vtk DataFile Version 3.0");
        assert_eq!(lines[4], "POINTS 4 double");
        assert_eq!(lines[9], "CELLS 1 5");
        assert_eq!(lines[10], "4 0 1 2 3");
        assert_eq!(lines[11..13], ["CELL_TYPES 1", "10"]);
        assert_eq!(lines[13..], ["CELL_DATA 1", "SCALARS source int 1", "LOOKUP_TABLE default", "7"]);
    }
}
