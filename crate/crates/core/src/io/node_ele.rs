//! Two-file node/element import.
//!
//! `.node`: a header `<points> 3 <attributes> <markers>`, then one line per
//! point `<id> x y z [attributes...] [marker]`.
//! `.ele`: a header `<tets> <nodes per tet> <attributes>`, then one line per
//! tetrahedron `<id> n0 n1 n2 n3 [extra nodes...] [attributes...]`.
//!
//! Ids are 0- or 1-based, decided by the first point id in the node file;
//! element references use the same base. Only the four corner nodes of
//! each element are read.

use std::path::{Path, PathBuf};

use super::{parse_num, read_file, IoError, Tokens};
use crate::mesh::TetMesh;

pub fn parse(node: &str, ele: &str) -> Result<TetMesh, IoError> {
    let mut tokens = Tokens::new(node);
    let (line, header) = tokens.expect_line("node header")?;
    if header.len() < 2 {
        return Err(IoError::parse(line, "node header needs a point count and a dimension"));
    }
    let count: usize = parse_num(line, header[0], "point count")?;
    let dim: usize = parse_num(line, header[1], "dimension")?;
    if dim != 3 {
        return Err(IoError::parse(line, format!("only 3-dimensional nodes are supported, found {dim}")));
    }
    let mut base = 0;
    let mut points = Vec::with_capacity(count);
    for i in 0..count {
        let (line, fields) = tokens.expect_line("point")?;
        if fields.len() < 4 {
            return Err(IoError::parse(line, "point needs an id and 3 coordinates"));
        }
        let id: usize = parse_num(line, fields[0], "point id")?;
        if i == 0 {
            if id > 1 {
                return Err(IoError::parse(line, format!("first point id must be 0 or 1, found {id}")));
            }
            base = id;
        }
        if id != i + base {
            return Err(IoError::parse(line, format!("point ids must be consecutive: expected {}, found {id}", i + base)));
        }
        let mut p = [0.0f64; 3];
        for (slot, f) in p.iter_mut().zip(&fields[1..4]) {
            *slot = parse_num(line, f, "coordinate")?;
            if !slot.is_finite() {
                return Err(IoError::parse(line, format!("non-finite coordinate `{f}`")));
            }
        }
        points.push(p);
    }
    if let Some((line, _)) = tokens.next_line() {
        return Err(IoError::parse(line, format!("node file declares {count} points but has more lines")));
    }

    let mut tokens = Tokens::new(ele);
    let (line, header) = tokens.expect_line("element header")?;
    if header.len() < 2 {
        return Err(IoError::parse(line, "element header needs a count and nodes per element"));
    }
    let count: usize = parse_num(line, header[0], "element count")?;
    let per: usize = parse_num(line, header[1], "nodes per element")?;
    if per != 4 && per != 10 {
        return Err(IoError::parse(line, format!("nodes per element must be 4 or 10, found {per}")));
    }
    let mut cells = Vec::with_capacity(count);
    for c in 0..count {
        let (line, fields) = tokens.expect_line("element")?;
        if fields.len() < per + 1 {
            return Err(IoError::parse(line, format!("element needs an id and {per} nodes")));
        }
        let mut cell = [0usize; 4];
        for (slot, f) in cell.iter_mut().zip(&fields[1..5]) {
            let raw: usize = parse_num(line, f, "node id")?;
            match raw.checked_sub(base).filter(|&v| v < points.len()) {
                Some(v) => *slot = v,
                None => {
                    return Err(IoError::Reference {
                        line,
                        cell: c,
                        vertex: raw,
                        count: points.len(),
                    })
                }
            }
        }
        cells.push(cell);
    }
    if let Some((line, _)) = tokens.next_line() {
        return Err(IoError::parse(line, format!("element file declares {count} elements but has more lines")));
    }
    Ok(TetMesh::from_indices(points, &cells)?)
}

/// Reads `stem.node` and `stem.ele`. `path` may name either file or the
/// shared stem.
pub fn read(path: &Path) -> Result<TetMesh, IoError> {
    let stem: PathBuf = match path.extension().and_then(|e| e.to_str()) {
        Some("node") | Some("ele") => path.with_extension(""),
        _ => path.to_path_buf(),
    };
    let node = read_file(&stem.with_extension("node"))?;
    let ele = read_file(&stem.with_extension("ele"))?;
    parse(&node, &ele)
}
