//! The native `stmesh` text format.
//!
//! ```text
//! stmesh 1
//! dimension 4
//! vertices 8
//! 0 0 0 0 0          # id, then 3 or 4 coordinates
//! ...
//! cells 4
//! 0 3 2 1 0 7 0      # id, 4 or 5 vertex ids, then the type for pentatopes
//! ...
//! colors             # optional, tetrahedral files only: one label per vertex
//! 0 A
//! ...
//! provenance         # optional, pentatope files only: one line per cell
//! 0 extruded 0 0 1   # tet slab tau
//! 1 bisected 0 1 3   # parent child generation
//! 2 imported
//! midpoints 1        # optional, pentatope files only
//! 0 4 9              # endpoint endpoint midpoint
//! extrusion 4        # optional, pentatope files only: spatial vertex count
//! slices 0 0.5 1
//! 0 A                # one color per spatial vertex
//! ...
//! end
//! ```
//!
//! Blank lines and `#` comments are ignored. Ids must be dense and start at
//! 0. Coordinates are written in shortest round-trip form, so
//! `parse(write(m)) == m`.

use std::fmt::Write as _;
use std::path::Path;

use super::{parse_num, read_file, write_file, IoError, Tokens};
use crate::bisection::{MidpointTable, TaggedPentatope};
use crate::coloring::{ColorAssignment, ColorLabel};
use crate::extrusion::TimeSlices;
use crate::mesh::{CellId, ExtrusionRecord, PentMesh, Provenance, TetMesh, VertexId};

pub const VERSION: u32 = 1;

/// Contents of a native mesh file.
#[derive(Clone, Debug, PartialEq)]
pub enum MeshFile {
    Tet {
        mesh: TetMesh,
        colors: Option<ColorAssignment>,
    },
    Pent(PentMesh),
}

impl MeshFile {
    pub fn dimension(&self) -> usize {
        match self {
            MeshFile::Tet { .. } => 3,
            MeshFile::Pent(_) => 4,
        }
    }
}

pub fn write_tet(mesh: &TetMesh, colors: Option<&ColorAssignment>) -> String {
    let mut out = header(3);
    write_vertices(&mut out, mesh.vertices().iter().map(|p| &p[..]));
    writeln!(out, "cells {}", mesh.cells().len()).unwrap();
    for (c, cell) in mesh.cells().iter().enumerate() {
        write!(out, "{c}").unwrap();
        for v in cell {
            write!(out, " {}", v.0).unwrap();
        }
        out.push('\n');
    }
    if let Some(colors) = colors {
        out.push_str("colors\n");
        write_labels(&mut out, colors.labels());
    }
    out.push_str("end\n");
    out
}

pub fn write_pent(mesh: &PentMesh) -> String {
    let mut out = header(4);
    write_vertices(&mut out, mesh.vertices().iter().map(|p| &p[..]));
    writeln!(out, "cells {}", mesh.cells().len()).unwrap();
    for (c, cell) in mesh.cells().iter().enumerate() {
        write!(out, "{c}").unwrap();
        for v in cell.vertices() {
            write!(out, " {}", v.0).unwrap();
        }
        writeln!(out, " {}", cell.kind()).unwrap();
    }
    if mesh.provenance().iter().any(|p| *p != Provenance::Imported) {
        out.push_str("provenance\n");
        for (c, p) in mesh.provenance().iter().enumerate() {
            match p {
                Provenance::Extruded { tet, slab, tau } => writeln!(out, "{c} extruded {} {slab} {tau}", tet.0),
                Provenance::Bisected {
                    parent,
                    child,
                    generation,
                } => writeln!(out, "{c} bisected {} {child} {generation}", parent.0),
                Provenance::Imported => writeln!(out, "{c} imported"),
            }
            .unwrap();
        }
    }
    if !mesh.midpoints().is_empty() {
        writeln!(out, "midpoints {}", mesh.midpoints().len()).unwrap();
        for ((a, b), m) in mesh.midpoints().iter() {
            writeln!(out, "{} {} {}", a.0, b.0, m.0).unwrap();
        }
    }
    if let Some(record) = mesh.extrusion() {
        writeln!(out, "extrusion {}", record.spatial_vertex_count).unwrap();
        out.push_str("slices");
        for s in record.slices.values() {
            write!(out, " {s:?}").unwrap();
        }
        out.push('\n');
        write_labels(&mut out, &record.colors);
    }
    out.push_str("end\n");
    out
}

fn header(dimension: usize) -> String {
    format!("stmesh {VERSION}\ndimension {dimension}\n")
}

fn write_vertices<'a>(out: &mut String, points: impl ExactSizeIterator<Item = &'a [f64]>) {
    writeln!(out, "vertices {}", points.len()).unwrap();
    for (v, p) in points.enumerate() {
        write!(out, "{v}").unwrap();
        for x in p {
            write!(out, " {x:?}").unwrap();
        }
        out.push('\n');
    }
}

fn write_labels(out: &mut String, labels: &[ColorLabel]) {
    for (v, label) in labels.iter().enumerate() {
        writeln!(out, "{v} {label}").unwrap();
    }
}

pub fn parse(text: &str) -> Result<MeshFile, IoError> {
    Parser {
        tokens: Tokens::new(text),
        pending: None,
    }
    .file()
}

pub fn read(path: &Path) -> Result<MeshFile, IoError> {
    parse(&read_file(path)?)
}

pub fn write(path: &Path, file: &MeshFile) -> Result<(), IoError> {
    let text = match file {
        MeshFile::Tet { mesh, colors } => write_tet(mesh, colors.as_ref()),
        MeshFile::Pent(mesh) => write_pent(mesh),
    };
    write_file(path, &text)
}

struct Parser<'a> {
    tokens: Tokens<'a>,
    pending: Option<(usize, Vec<&'a str>)>,
}

type Line<'a> = (usize, Vec<&'a str>);

impl<'a> Parser<'a> {
    fn line(&mut self, what: &str) -> Result<Line<'a>, IoError> {
        match self.pending.take() {
            Some(l) => Ok(l),
            None => self.tokens.expect_line(what),
        }
    }

    fn keyword(&mut self, word: &str, args: usize) -> Result<(usize, Vec<&'a str>), IoError> {
        let (line, tokens) = self.line(&format!("`{word}`"))?;
        if tokens[0] != word {
            return Err(IoError::parse(line, format!("expected `{word}`, found `{}`", tokens[0])));
        }
        if tokens.len() != args + 1 {
            return Err(IoError::parse(line, format!("`{word}` takes {args} value(s)")));
        }
        Ok((line, tokens[1..].to_vec()))
    }

    /// Consumes the next line if it starts with `word`.
    fn optional(&mut self, word: &str) -> Result<Option<Line<'a>>, IoError> {
        let next = self.line(&format!("`{word}` or `end`"))?;
        if next.1[0] == word {
            Ok(Some(next))
        } else {
            self.pending = Some(next);
            Ok(None)
        }
    }

    /// A record line `id field...` with exactly `fields` fields; the id must
    /// equal `expected`.
    fn record(&mut self, what: &str, expected: usize, fields: usize) -> Result<Line<'a>, IoError> {
        let (line, tokens) = self.line(what)?;
        if tokens.len() != fields + 1 {
            return Err(IoError::parse(
                line,
                format!("{what} record needs an id and {fields} value(s), found {} token(s)", tokens.len()),
            ));
        }
        let id: usize = parse_num(line, tokens[0], &format!("{what} id"))?;
        if id != expected {
            return Err(IoError::parse(line, format!("{what} ids must be dense: expected {expected}, found {id}")));
        }
        Ok((line, tokens[1..].to_vec()))
    }

    fn file(mut self) -> Result<MeshFile, IoError> {
        let (line, version) = self.keyword("stmesh", 1)?;
        let version: u32 = parse_num(line, version[0], "version")?;
        if version != VERSION {
            return Err(IoError::parse(line, format!("unsupported format version {version}")));
        }
        let (line, dim) = self.keyword("dimension", 1)?;
        let dimension: usize = parse_num(line, dim[0], "dimension")?;
        if dimension != 3 && dimension != 4 {
            return Err(IoError::parse(line, format!("dimension must be 3 or 4, found {dimension}")));
        }

        let (line, count) = self.keyword("vertices", 1)?;
        let nv: usize = parse_num(line, count[0], "vertex count")?;
        let mut coords = Vec::with_capacity(nv * dimension);
        for v in 0..nv {
            let (line, fields) = self.record("vertex", v, dimension)?;
            for f in fields {
                let x: f64 = parse_num(line, f, "coordinate")?;
                if !x.is_finite() {
                    return Err(IoError::parse(line, format!("non-finite coordinate `{f}`")));
                }
                coords.push(x);
            }
        }

        let (line, count) = self.keyword("cells", 1)?;
        let nc: usize = parse_num(line, count[0], "cell count")?;
        let per_cell = dimension + 1;
        let mut cells = Vec::with_capacity(nc);
        for c in 0..nc {
            let width = if dimension == 4 { per_cell + 1 } else { per_cell };
            let (line, fields) = self.record("cell", c, width)?;
            let mut ids = Vec::with_capacity(per_cell);
            for f in &fields[..per_cell] {
                let v: usize = parse_num(line, f, "vertex id")?;
                if v >= nv {
                    return Err(IoError::Reference {
                        line,
                        cell: c,
                        vertex: v,
                        count: nv,
                    });
                }
                ids.push(v);
            }
            let kind: u8 = if dimension == 4 {
                parse_num(line, fields[per_cell], "type")?
            } else {
                0
            };
            cells.push((line, ids, kind));
        }

        if dimension == 3 {
            let colors = match self.optional("colors")? {
                Some((line, tokens)) => {
                    if tokens.len() != 1 {
                        return Err(IoError::parse(line, "`colors` takes no values"));
                    }
                    Some(ColorAssignment::new(self.labels(nv)?))
                }
                None => None,
            };
            self.keyword("end", 0)?;
            self.finish()?;
            let points = coords.chunks(3).map(|c| [c[0], c[1], c[2]]).collect();
            let cells = cells.iter().map(|(_, ids, _)| [ids[0], ids[1], ids[2], ids[3]]).collect::<Vec<_>>();
            return Ok(MeshFile::Tet {
                mesh: TetMesh::from_indices(points, &cells)?,
                colors,
            });
        }

        let mut tagged = Vec::with_capacity(nc);
        for (line, ids, kind) in &cells {
            let t = TaggedPentatope::from_indices([ids[0], ids[1], ids[2], ids[3], ids[4]], *kind)
                .map_err(|e| IoError::parse(*line, e.to_string()))?;
            tagged.push(t);
        }

        let mut provenance = vec![Provenance::Imported; nc];
        if let Some((line, tokens)) = self.optional("provenance")? {
            if tokens.len() != 1 {
                return Err(IoError::parse(line, "`provenance` takes no values"));
            }
            for (c, slot) in provenance.iter_mut().enumerate() {
                *slot = self.provenance(c)?;
            }
        }

        let mut midpoints = MidpointTable::default();
        if let Some((line, tokens)) = self.optional("midpoints")? {
            if tokens.len() != 2 {
                return Err(IoError::parse(line, "`midpoints` takes 1 value(s)"));
            }
            let count: usize = parse_num(line, tokens[1], "midpoint count")?;
            for _ in 0..count {
                let (line, tokens) = self.line("midpoint record")?;
                if tokens.len() != 3 {
                    return Err(IoError::parse(line, "midpoint record needs 3 vertex ids"));
                }
                let mut ids = [VertexId(0); 3];
                for (slot, tok) in ids.iter_mut().zip(&tokens) {
                    let v: usize = parse_num(line, tok, "vertex id")?;
                    if v >= nv {
                        return Err(IoError::parse(line, format!("vertex {v} out of range ({nv} vertices)")));
                    }
                    *slot = VertexId(v);
                }
                midpoints.insert(ids[0], ids[1], ids[2]);
            }
        }

        let mut extrusion = None;
        if let Some((line, tokens)) = self.optional("extrusion")? {
            if tokens.len() != 2 {
                return Err(IoError::parse(line, "`extrusion` takes 1 value(s)"));
            }
            let n: usize = parse_num(line, tokens[1], "spatial vertex count")?;
            let (line, tokens) = self.line("`slices`")?;
            if tokens[0] != "slices" {
                return Err(IoError::parse(line, format!("expected `slices`, found `{}`", tokens[0])));
            }
            let values = tokens[1..]
                .iter()
                .map(|t| parse_num::<f64>(line, t, "slice value"))
                .collect::<Result<Vec<_>, _>>()?;
            let slices = TimeSlices::new(values).map_err(|e| IoError::parse(line, e.to_string()))?;
            let colors = self.labels(n)?;
            extrusion = Some(ExtrusionRecord {
                spatial_vertex_count: n,
                colors,
                slices,
            });
        }
        self.keyword("end", 0)?;
        self.finish()?;

        let points = coords.chunks(4).map(|c| [c[0], c[1], c[2], c[3]]).collect();
        let mut mesh = PentMesh::new(points, tagged, provenance)?.with_midpoints(midpoints)?;
        if let Some(record) = extrusion {
            mesh = mesh.with_extrusion(record)?;
        }
        Ok(MeshFile::Pent(mesh))
    }

    fn labels(&mut self, count: usize) -> Result<Vec<ColorLabel>, IoError> {
        (0..count)
            .map(|v| {
                let (line, fields) = self.record("color", v, 1)?;
                parse_label(line, fields[0])
            })
            .collect()
    }

    fn provenance(&mut self, c: usize) -> Result<Provenance, IoError> {
        let (line, tokens) = self.line("provenance record")?;
        let id: usize = parse_num(line, tokens[0], "provenance id")?;
        if id != c {
            return Err(IoError::parse(line, format!("provenance ids must be dense: expected {c}, found {id}")));
        }
        let args = &tokens[1..];
        let arity = |n: usize| {
            if args.len() == n + 1 {
                Ok(())
            } else {
                Err(IoError::parse(line, format!("`{}` provenance takes {n} value(s)", args[0])))
            }
        };
        match args.first().copied() {
            Some("extruded") => {
                arity(3)?;
                Ok(Provenance::Extruded {
                    tet: CellId(parse_num(line, args[1], "tet id")?),
                    slab: parse_num(line, args[2], "slab")?,
                    tau: parse_num(line, args[3], "piece index")?,
                })
            }
            Some("bisected") => {
                arity(3)?;
                Ok(Provenance::Bisected {
                    parent: CellId(parse_num(line, args[1], "parent id")?),
                    child: parse_num(line, args[2], "child ordinal")?,
                    generation: parse_num(line, args[3], "generation")?,
                })
            }
            Some("imported") => {
                arity(0)?;
                Ok(Provenance::Imported)
            }
            Some(other) => Err(IoError::parse(line, format!("unknown provenance kind `{other}`"))),
            None => Err(IoError::parse(line, "missing provenance kind")),
        }
    }

    fn finish(mut self) -> Result<(), IoError> {
        match self.pending.take().or_else(|| self.tokens.next_line()) {
            Some((line, tokens)) => Err(IoError::parse(line, format!("unexpected `{}` after `end`", tokens[0]))),
            None => Ok(()),
        }
    }
}

fn parse_label(line: usize, token: &str) -> Result<ColorLabel, IoError> {
    match token {
        "A" => Ok(ColorLabel::A),
        "B" => Ok(ColorLabel::B),
        "C" => Ok(ColorLabel::C),
        "D" => Ok(ColorLabel::D),
        _ => Err(IoError::parse(line, format!("invalid color `{token}`, expected A, B, C or D"))),
    }
}
