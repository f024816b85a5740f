//! Mesh file formats.
//!
//! - [`native`]: the versioned `stmesh` text format for tetrahedral and
//!   pentatope meshes, including colors, tags, provenance and midpoints.
//! - [`node_ele`]: import of the two-file node/element convention used by
//!   common tetrahedral mesh generators.
//! - [`vtk`]: legacy ASCII unstructured-grid export for viewers.

pub mod native;
pub mod node_ele;
pub mod vtk;

use std::path::PathBuf;

use thiserror::Error;

use crate::coloring::ColorAssignment;
use crate::mesh::{MeshError, PentMesh, TetMesh};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: cell {cell} references vertex {vertex}, but only {count} vertices are defined")]
    Reference {
        line: usize,
        cell: usize,
        vertex: usize,
        count: usize,
    },
    #[error("expected a {expected}-dimensional mesh, found dimension {found}")]
    Dimension { expected: usize, found: usize },
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// Loads a tetrahedral mesh and any stored vertex colors. Paths ending in
/// `.node` or `.ele` are read as a node/element pair, anything else as a
/// native file.
pub fn read_tet_mesh(path: &std::path::Path) -> Result<(TetMesh, Option<ColorAssignment>), IoError> {
    if matches!(path.extension().and_then(|e| e.to_str()), Some("node") | Some("ele")) {
        return Ok((node_ele::read(path)?, None));
    }
    match native::read(path)? {
        native::MeshFile::Tet { mesh, colors } => Ok((mesh, colors)),
        other => Err(IoError::Dimension {
            expected: 3,
            found: other.dimension(),
        }),
    }
}

pub fn read_pent_mesh(path: &std::path::Path) -> Result<PentMesh, IoError> {
    match native::read(path)? {
        native::MeshFile::Pent(mesh) => Ok(mesh),
        other => Err(IoError::Dimension {
            expected: 4,
            found: other.dimension(),
        }),
    }
}

impl IoError {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        IoError::Parse {
            line,
            message: message.into(),
        }
    }
}

pub(crate) fn read_file(path: &std::path::Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_file(path: &std::path::Path, contents: &str) -> Result<(), IoError> {
    std::fs::write(path, contents).map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })
}

/// Non-blank, non-comment lines with 1-based line numbers, split into
/// whitespace-separated tokens. `#` starts a comment.
pub(crate) struct Tokens<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
    last_line: usize,
}

impl<'a> Tokens<'a> {
    pub(crate) fn new(text: &'a str) -> Self {
        Self {
            lines: text.lines().enumerate(),
            last_line: 0,
        }
    }

    pub(crate) fn next_line(&mut self) -> Option<(usize, Vec<&'a str>)> {
        for (i, raw) in self.lines.by_ref() {
            let content = raw.split('#').next().unwrap_or("");
            let tokens: Vec<&str> = content.split_whitespace().collect();
            if !tokens.is_empty() {
                self.last_line = i + 1;
                return Some((i + 1, tokens));
            }
        }
        None
    }

    pub(crate) fn expect_line(&mut self, what: &str) -> Result<(usize, Vec<&'a str>), IoError> {
        let last = self.last_line;
        self.next_line()
            .ok_or_else(|| IoError::parse(last + 1, format!("unexpected end of file, expected {what}")))
    }
}

pub(crate) fn parse_num<T: std::str::FromStr>(line: usize, token: &str, what: &str) -> Result<T, IoError> {
    token
        .parse()
        .map_err(|_| IoError::parse(line, format!("invalid {what} `{token}`")))
}
