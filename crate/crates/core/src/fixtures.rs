//! Deterministic fixture meshes.

use std::str::FromStr;

use thiserror::Error;

use crate::coloring::{ColorAssignment, ColorLabel};
use crate::mesh::{Point3, TetMesh, VertexId};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fixture {
    SingleTet,
    TwoTets,
    KuhnCube,
    KuhnGrid(usize),
    OddFan,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown fixture `{0}` (expected single-tet, two-tets, kuhn-cube, kuhn-grid(N) or odd-fan)")]
pub struct UnknownFixture(pub String);

impl FromStr for Fixture {
    type Err = UnknownFixture;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unknown = || UnknownFixture(s.to_string());
        match s {
            "single-tet" => Ok(Fixture::SingleTet),
            "two-tets" => Ok(Fixture::TwoTets),
            "kuhn-cube" => Ok(Fixture::KuhnCube),
            "odd-fan" => Ok(Fixture::OddFan),
            _ => {
                let rest = s.strip_prefix("kuhn-grid").ok_or_else(unknown)?;
                let n = rest
                    .strip_prefix('(')
                    .and_then(|r| r.strip_suffix(')'))
                    .or_else(|| rest.strip_prefix(':'))
                    .ok_or_else(unknown)?;
                match n.trim().parse::<usize>() {
                    Ok(n) if n > 0 => Ok(Fixture::KuhnGrid(n)),
                    _ => Err(unknown()),
                }
            }
        }
    }
}

impl std::fmt::Display for Fixture {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Fixture::SingleTet => f.write_str("single-tet"),
            Fixture::TwoTets => f.write_str("two-tets"),
            Fixture::KuhnCube => f.write_str("kuhn-cube"),
            Fixture::KuhnGrid(n) => write!(f, "kuhn-grid({n})"),
            Fixture::OddFan => f.write_str("odd-fan"),
        }
    }
}

pub fn generate_fixture(fixture: Fixture) -> TetMesh {
    match fixture {
        Fixture::SingleTet => single_tet(),
        Fixture::TwoTets => two_tets(),
        Fixture::KuhnCube => kuhn_cube(),
        Fixture::KuhnGrid(n) => kuhn_grid(n),
        Fixture::OddFan => odd_fan(),
    }
}

/// The corner simplex (0,0,0), (1,0,0), (0,1,0), (0,0,1).
pub fn single_tet() -> TetMesh {
    TetMesh::from_indices(
        vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ],
        &[[0, 1, 2, 3]],
    )
    .expect("valid fixture")
}

/// Two tetrahedra glued along the face {1, 2, 3}.
pub fn two_tets() -> TetMesh {
    TetMesh::from_indices(
        vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [1.0, 1.0, 1.0],
        ],
        &[[0, 1, 2, 3], [4, 1, 2, 3]],
    )
    .expect("valid fixture")
}

/// Unit cube cut into 6 tetrahedra around the diagonal (0,0,0)-(1,1,1).
pub fn kuhn_cube() -> TetMesh {
    kuhn_grid(1)
}

fn grid_index(n: usize, i: usize, j: usize, k: usize) -> usize {
    i + (n + 1) * (j + (n + 1) * k)
}

/// `n³` unit cubes, each cut into the 6 Kuhn tetrahedra. Every tetrahedron
/// is a monotone lattice path from a cube's low corner to its high corner,
/// so all cubes share the same diagonal direction and the mesh conforms.
pub fn kuhn_grid(n: usize) -> TetMesh {
    assert!(n > 0, "kuhn grid needs at least one cube per axis");
    let m = n + 1;
    let mut vertices: Vec<Point3> = Vec::with_capacity(m * m * m);
    for k in 0..m {
        for j in 0..m {
            for i in 0..m {
                vertices.push([i as f64, j as f64, k as f64]);
            }
        }
    }
    const AXIS_ORDERS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut cells = Vec::with_capacity(6 * n * n * n);
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                for order in AXIS_ORDERS {
                    let mut at = [i, j, k];
                    let mut cell = [VertexId(grid_index(n, i, j, k)); 4];
                    for (step, axis) in order.into_iter().enumerate() {
                        at[axis] += 1;
                        cell[step + 1] = VertexId(grid_index(n, at[0], at[1], at[2]));
                    }
                    cells.push(cell);
                }
            }
        }
    }
    TetMesh::new(vertices, cells).expect("valid fixture")
}

/// Labels `(i + j + k) mod 4`; along every Kuhn path the coordinate sum
/// increases by one per step, so each cell sees four distinct labels.
pub fn kuhn_grid_coloring(n: usize) -> ColorAssignment {
    let m = n + 1;
    let mut labels = Vec::with_capacity(m * m * m);
    for k in 0..m {
        for j in 0..m {
            for i in 0..m {
                labels.push(ColorLabel::ALL[(i + j + k) % 4]);
            }
        }
    }
    ColorAssignment::new(labels)
}

/// Three tetrahedra around the interior edge (0, 1). The vertex graph is
/// K5, so no 4-coloring exists, and the edge has odd incidence.
pub fn odd_fan() -> TetMesh {
    let mut vertices = vec![[0.0, 0.0, 0.0], [0.0, 0.0, 1.0]];
    for k in 0..3 {
        let a = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
        vertices.push([a.cos(), a.sin(), 0.5]);
    }
    TetMesh::from_indices(vertices, &[[0, 1, 2, 3], [0, 1, 3, 4], [0, 1, 4, 2]])
        .expect("valid fixture")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coloring::verify_coloring;
    use crate::mesh::{tet_volume, CellId};

    #[test]
    fn kuhn_cube_has_six_equal_tets() {
        let mesh = kuhn_cube();
        assert_eq!(mesh.cells().len(), 6);
        for c in 0..6 {
            assert!((tet_volume(&mesh, CellId(c)).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        }
    }

    #[test]
    fn kuhn_grid_two() {
        let mesh = kuhn_grid(2);
        assert_eq!(mesh.cells().len(), 48);
        assert!((mesh.total_volume() - 8.0).abs() < 1e-12);
    }

    #[test]
    fn grid_coloring_is_proper() {
        for n in 1..5 {
            assert!(verify_coloring(&kuhn_grid(n), &kuhn_grid_coloring(n)).unwrap().passed());
        }
    }

    #[test]
    fn names_parse() {
        assert_eq!("kuhn-grid(3)".parse(), Ok(Fixture::KuhnGrid(3)));
        assert_eq!("kuhn-grid:2".parse(), Ok(Fixture::KuhnGrid(2)));
        assert_eq!("odd-fan".parse(), Ok(Fixture::OddFan));
        assert!("kuhn-grid(0)".parse::<Fixture>().is_err());
        assert!("sphere".parse::<Fixture>().is_err());
    }
}
