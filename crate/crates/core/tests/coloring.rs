mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stmesh_core::coloring::{
    barycentric_subdivide, edge_parity_check, find_four_coloring, find_four_coloring_with, verify_coloring,
    ColoringOutcome, SearchLimits,
};
use stmesh_core::fixtures;
use stmesh_core::mesh::{check_conforming, VertexId};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn barycentric_subdivision_of_irregular_meshes(seed in any::<u64>(), n in 1usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grid = common::jittered_kuhn_grid(n, 0.08, seed);
        let keep: Vec<bool> = (0..grid.cells().len()).map(|_| rng.gen_bool(0.5)).collect();
        prop_assume!(keep.iter().any(|&k| k));
        let mesh = common::cell_subset(&grid, |c| keep[c]);
        let (fine, colors) = barycentric_subdivide(&mesh).unwrap();
        prop_assert_eq!(fine.cells().len(), 24 * mesh.cells().len());
        let (v0, v1) = (mesh.total_volume(), fine.total_volume());
        prop_assert!((v0 - v1).abs() <= 1e-12 * v0);
        prop_assert!(verify_coloring(&fine, &colors).unwrap().passed());
        prop_assert!(check_conforming(&fine).passed());
        prop_assert!(edge_parity_check(&fine).unwrap().passed());
    }

    /// Around an interior edge the link alternates between the two labels
    /// not on the edge, so a 4-colorable mesh never has an odd interior edge.
    #[test]
    fn colorings_are_proper_and_imply_even_edges(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grid = fixtures::kuhn_grid(2);
        let keep: Vec<bool> = (0..grid.cells().len()).map(|_| rng.gen_bool(0.7)).collect();
        prop_assume!(keep.iter().any(|&k| k));
        let mesh = common::cell_subset(&grid, |c| keep[c]);
        let parity = edge_parity_check(&mesh).unwrap();
        match find_four_coloring(&mesh, 1_000_000) {
            ColoringOutcome::Colored(colors) => {
                prop_assert!(verify_coloring(&mesh, &colors).unwrap().passed());
                prop_assert!(parity.passed());
            }
            ColoringOutcome::ProvenUncolorable { .. } => {}
            ColoringOutcome::NotFound { .. } => prop_assert!(false, "small meshes are searched exhaustively"),
        }
    }
}

#[test]
fn odd_fan_is_uncolorable_and_flagged() {
    let fan = fixtures::odd_fan();
    assert!(matches!(
        find_four_coloring_with(
            &fan,
            SearchLimits {
                budget: 0,
                exhaustive_below: usize::MAX
            }
        ),
        ColoringOutcome::ProvenUncolorable { .. }
    ));
    let parity = edge_parity_check(&fan).unwrap();
    assert_eq!(parity.odd_interior, [(VertexId(0), VertexId(1))]);
}

#[test]
fn fixtures_color_deterministically() {
    for mesh in [fixtures::single_tet(), fixtures::two_tets(), fixtures::kuhn_cube(), fixtures::kuhn_grid(3)] {
        let a = find_four_coloring(&mesh, 1_000_000);
        let b = find_four_coloring(&mesh, 1_000_000);
        assert_eq!(a, b);
        let colors = a.coloring().expect("fixture is colorable");
        assert!(verify_coloring(&mesh, colors).unwrap().passed());
    }
}
