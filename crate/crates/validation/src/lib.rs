//! Acceptance criteria for the extrusion-subdivision and bisection pipeline.
//!
//! Each criterion is a plain function returning a one-line summary on
//! success and the reason on failure. The `acceptance` test target runs them
//! all and prints one line per criterion.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stmesh_core::bisection::{check_pair_consistent, pair_consistency, ConsistencyClause};
use stmesh_core::coloring::{find_four_coloring_with, SearchLimits};
use stmesh_core::extrusion::{classify_neighbor_pairs, layered_id, NeighborCase};
use stmesh_core::fixtures::{self, Fixture};
use stmesh_core::mesh::simplex_measure4;
use stmesh_core::pipeline::{self, ColoringMethod, MeshSource, RunConfig, SliceSpec};
use stmesh_core::stats::shape_signatures;
use stmesh_core::{
    barycentric_subdivide, bisect, check_conforming, check_consistent_tagging, edge_parity_check, extrude_subdivide,
    find_four_coloring, reflect, reflected_neighbors, refine, tag_mesh, verify_coloring, CellId, ColorAssignment,
    MidpointTable, PentMesh, Point4, Provenance, TaggedPentatope, TetMesh, TimeSlices, VertexId,
};

pub type Outcome = Result<String, String>;

pub struct Criterion {
    pub id: &'static str,
    pub name: &'static str,
    pub check: fn() -> Outcome,
}

pub const CRITERIA: [Criterion; 9] = [
    Criterion { id: "C1", name: "extruded meshes are consistently tagged", check: consistent_extrusion },
    Criterion { id: "C2", name: "neighbor case coverage", check: case_coverage },
    Criterion { id: "C3", name: "bisection rule fidelity", check: bisection_rule },
    Criterion { id: "C4", name: "reflected-neighbor examples", check: reflected_examples },
    Criterion { id: "C5", name: "conforming local refinement", check: conforming_refinement },
    Criterion { id: "C6", name: "shape signatures stop growing", check: shape_boundedness },
    Criterion { id: "C7", name: "linear-time tagging", check: linear_tagging },
    Criterion { id: "C8", name: "coloring constructions", check: coloring_constructions },
    Criterion { id: "C9", name: "counting identity", check: counting_identity },
];

fn ensure(cond: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(message())
    }
}

fn verified_coloring(mesh: &TetMesh, name: &str) -> Result<ColorAssignment, String> {
    let colors = find_four_coloring(mesh, 10_000_000)
        .coloring()
        .cloned()
        .ok_or_else(|| format!("{name}: no coloring found"))?;
    let report = verify_coloring(mesh, &colors).map_err(|e| e.to_string())?;
    ensure(report.passed(), || format!("{name}: coloring does not verify"))?;
    Ok(colors)
}

fn extrude(mesh: &TetMesh, colors: &ColorAssignment, slices: Vec<f64>) -> Result<PentMesh, String> {
    let slices = TimeSlices::new(slices).map_err(|e| e.to_string())?;
    extrude_subdivide(mesh, colors, &slices).map_err(|e| e.to_string())
}

fn named_fixtures() -> Vec<(String, TetMesh)> {
    [
        Fixture::SingleTet,
        Fixture::TwoTets,
        Fixture::KuhnCube,
        Fixture::KuhnGrid(2),
        Fixture::KuhnGrid(3),
        Fixture::OddFan,
    ]
    .into_iter()
    .map(|f| (f.to_string(), fixtures::generate_fixture(f)))
    .collect()
}

fn consistent_extrusion() -> Outcome {
    let start = Instant::now();
    let mut pairs = 0;
    let mut meshes = 0;
    for fixture in [Fixture::SingleTet, Fixture::KuhnCube, Fixture::KuhnGrid(2), Fixture::KuhnGrid(3)] {
        let mesh = fixtures::generate_fixture(fixture);
        let colors = verified_coloring(&mesh, &fixture.to_string())?;
        for slabs in [1, 3] {
            let slices = (0..=slabs).map(|j| j as f64 / slabs as f64).collect();
            let pents = extrude(&mesh, &colors, slices)?;
            let report = check_consistent_tagging(&pents);
            ensure(report.passed() && report.mixed_generation == 0, || {
                format!("{fixture} x {slabs}: {} violations", report.violations.len())
            })?;
            ensure(check_conforming(&pents).passed(), || format!("{fixture} x {slabs}: not conforming"))?;
            pairs += report.pairs_checked;
            meshes += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!("{meshes} meshes, {pairs} neighbor pairs, 0 violations, {elapsed:.2?}"))
}

fn case_coverage() -> Outcome {
    let n = 2;
    let mesh = fixtures::kuhn_grid(n);
    let colors = fixtures::kuhn_grid_coloring(n);
    ensure(verify_coloring(&mesh, &colors).map_err(|e| e.to_string())?.passed(), || "grid coloring".into())?;
    let pents = extrude(&mesh, &colors, vec![0.0, 1.0, 2.0, 3.0])?;
    let nv = mesh.vertices().len();
    // Vertex of tet `t` at slice `j` carrying each label, indexed by label.
    let labeled = |t: CellId, j: usize| {
        let mut out = [VertexId(0); 4];
        for &v in &mesh.cells()[t.0] {
            out[colors.get(v).index()] = layered_id(nv, j, v);
        }
        out
    };
    let tag = |v: [VertexId; 5], kind| TaggedPentatope::new(v, kind).expect("distinct vertices");
    let (z, z1) = (VertexId(usize::MAX), VertexId(usize::MAX - 1));
    let mut counts = [0usize; 3];
    for pair in classify_neighbor_pairs(&pents).map_err(|e| e.to_string())? {
        let (a, b) = pair.cells;
        let (ta, tb) = (pents.cells()[a.0], pents.cells()[b.0]);
        let consistent = check_pair_consistent(&ta, &tb, &pair.facet).map_err(|e| e.to_string())?;
        ensure(consistent, || format!("pair {a:?}/{b:?} ({:?}) is inconsistent", pair.case))?;
        match pair.case.ok_or_else(|| format!("pair {a:?}/{b:?} fits no case"))? {
            NeighborCase::SamePrism => counts[0] += 1,
            NeighborCase::CrossPrism => counts[2] += 1,
            NeighborCase::CrossSlab => {
                counts[1] += 1;
                let (lower, upper) = if a < b { (a, b) } else { (b, a) };
                let Provenance::Extruded { tet, slab, tau: 4 } = pents.provenance()[lower.0] else {
                    return Err(format!("cross-slab pair {a:?}/{b:?} does not start at the top piece"));
                };
                let [a0, _, _, _] = labeled(tet, slab);
                let [a1, b1, c1, d1] = labeled(tet, slab + 1);
                let [_, _, _, d2] = labeled(tet, slab + 2);
                let (tl, tu) = (pents.cells()[lower.0], pents.cells()[upper.0]);
                ensure(tl == tag([a0, d1, c1, b1, a1], 0), || format!("lower tag of {lower:?}"))?;
                ensure(tu == tag([d1, c1, b1, a1, d2], 0), || format!("upper tag of {upper:?}"))?;
                let lc = tl.children(z);
                let uc = tu.children(z1);
                ensure(lc == [tag([a0, z, d1, c1, b1], 1), tag([a1, z, b1, c1, d1], 1)], || {
                    format!("children of {lower:?}")
                })?;
                ensure(uc == [tag([d1, z1, c1, b1, a1], 1), tag([d2, z1, a1, b1, c1], 1)], || {
                    format!("children of {upper:?}")
                })?;
                ensure(reflected_neighbors(&lc[1], &uc[0]), || format!("children of {lower:?}/{upper:?}"))?;
                let verdict = pair_consistency(&tl, &tu, &pair.facet).map_err(|e| e.to_string())?;
                ensure(verdict.clause == ConsistencyClause::AdjacentChildren, || "cross-slab clause".into())?;
            }
        }
    }
    ensure(counts.iter().all(|&c| c > 0), || format!("missing case: {counts:?}"))?;
    Ok(format!(
        "same-prism {}, cross-slab {} (child tags exact), cross-prism {}",
        counts[0], counts[1], counts[2]
    ))
}

/// Children and reflection written out from the rule table, on raw ids.
fn rule_children(x: [usize; 5], kind: u8, m: usize) -> [([usize; 5], u8); 2] {
    let [x0, x1, x2, x3, x4] = x;
    let second = match kind {
        0 => [x4, m, x3, x2, x1],
        1 => [x4, m, x1, x3, x2],
        _ => [x4, m, x1, x2, x3],
    };
    let k = (kind + 1) % 4;
    [([x0, m, x1, x2, x3], k), (second, k)]
}

fn rule_reflection(x: [usize; 5], kind: u8) -> [usize; 5] {
    let [x0, x1, x2, x3, x4] = x;
    match kind {
        0 => [x4, x3, x2, x1, x0],
        1 => [x4, x1, x3, x2, x0],
        _ => [x4, x1, x2, x3, x0],
    }
}

fn raw(t: &TaggedPentatope) -> ([usize; 5], u8) {
    (t.vertices().map(|v| v.0), t.kind())
}

fn vertex_sets(children: &[TaggedPentatope; 2]) -> BTreeSet<([VertexId; 5], u8)> {
    children.iter().map(|c| (c.sorted_vertices(), c.kind())).collect()
}

fn bisection_rule() -> Outcome {
    const PER_TYPE: usize = 1000;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst = 0.0f64;
    for kind in 0..4u8 {
        let mut done = 0;
        while done < PER_TYPE {
            let mut vertices: Vec<Point4> = (0..12).map(|_| [0; 4].map(|_| rng.gen_range(-1.0..1.0))).collect();
            let ids = sample(&mut rng, 12, 5).into_vec();
            let x = [ids[0], ids[1], ids[2], ids[3], ids[4]];
            let points = x.map(|v| vertices[v]);
            let parent_measure = simplex_measure4(&points);
            if parent_measure < 1e-3 {
                continue;
            }
            done += 1;
            let t = TaggedPentatope::from_indices(x, kind).map_err(|e| e.to_string())?;
            let mut table = MidpointTable::default();
            let children = bisect(&t, &mut table, &mut vertices).map_err(|e| e.to_string())?;
            let m = vertices.len() - 1;
            let expected = rule_children(x, kind, m);
            ensure([raw(&children[0]), raw(&children[1])] == expected, || {
                format!("children of {x:?}_{kind}: {children:?}")
            })?;
            let (a, b) = t.refinement_edge();
            let mid = vertices[m];
            ensure(
                (0..4).all(|i| mid[i] == 0.5 * (vertices[a.0][i] + vertices[b.0][i])),
                || "midpoint position".into(),
            )?;
            for child in &children {
                let measure = simplex_measure4(&child.vertices().map(|v| vertices[v.0]));
                let error = (measure - parent_measure / 2.0).abs() / parent_measure;
                worst = worst.max(error);
                ensure(error <= 1e-12, || format!("child measure error {error:e}"))?;
            }
            let r = reflect(&t);
            ensure(raw(&r) == (rule_reflection(x, kind), kind), || format!("reflection of {x:?}_{kind}"))?;
            ensure(reflect(&r) == t, || format!("reflect twice of {x:?}_{kind}"))?;
            let mut again = MidpointTable::default();
            let mut scratch = vertices[..m].to_vec();
            let from_reflection = bisect(&r, &mut again, &mut scratch).map_err(|e| e.to_string())?;
            ensure(vertex_sets(&from_reflection) == vertex_sets(&children), || {
                format!("reflection of {x:?}_{kind} bisects differently")
            })?;
        }
    }
    Ok(format!("{} pentatopes, worst child measure error {worst:.1e}", 4 * PER_TYPE))
}

fn reflected_examples() -> Outcome {
    let [x0, x1, x2, x3, y, z] = [0, 1, 2, 3, 4, 5];
    let tag = |v: [usize; 5]| TaggedPentatope::from_indices(v, 1).expect("distinct vertices");
    let first = (tag([x0, x1, x2, x3, y]), tag([z, x0, x1, x2, x3]));
    let second = (tag([x0, z, x1, x2, x3]), tag([x3, y, x2, x1, x0]));
    ensure(!reflected_neighbors(&first.0, &first.1), || "first example reported as reflected".into())?;
    ensure(!reflected_neighbors(&first.1, &first.0), || "first example, swapped".into())?;
    ensure(reflected_neighbors(&second.0, &second.1), || "second example not reported as reflected".into())?;
    ensure(reflected_neighbors(&second.1, &second.0), || "second example, swapped".into())?;
    ensure(reflect(&second.0) == tag([x3, z, x2, x1, x0]), || "reflection in the second example".into())?;
    Ok("(x0,x1,x2,x3,y)_1 vs (z,x0,x1,x2,x3)_1 false; (x0,z,x1,x2,x3)_1 vs (x3,y,x2,x1,x0)_1 true".into())
}

fn conforming_refinement() -> Outcome {
    let start = Instant::now();
    let cube = fixtures::kuhn_cube();
    let colors = verified_coloring(&cube, "kuhn-cube")?;
    let initial = extrude(&cube, &colors, vec![0.0, 1.0, 2.0])?;
    ensure(initial.cells().len() == 48, || format!("{} initial cells", initial.cells().len()))?;
    let measure = initial.total_measure();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut mesh = initial.clone();
    let mut worst = 0.0f64;
    let mut sizes = vec![mesh.cells().len()];
    for round in 1..=6 {
        let n = mesh.cells().len();
        let count = ((0.2 * n as f64).ceil() as usize).clamp(1, n);
        let marks: Vec<CellId> = sample(&mut rng, n, count).into_iter().map(CellId).collect();
        mesh = refine(&mesh, &marks).map_err(|e| format!("round {round}: {e}"))?;
        ensure(check_conforming(&mesh).passed(), || format!("round {round}: not conforming"))?;
        let drift = (mesh.total_measure() - measure).abs() / measure;
        worst = worst.max(drift);
        ensure(drift <= 1e-10, || format!("round {round}: measure drift {drift:e}"))?;
        let tagging = check_consistent_tagging(&mesh);
        ensure(tagging.passed(), || format!("round {round}: {} tagging violations", tagging.violations.len()))?;
        sizes.push(mesh.cells().len());
    }
    let mut uniform = initial;
    for round in 1..=3 {
        let all: Vec<CellId> = (0..uniform.cells().len()).map(CellId).collect();
        let next = refine(&uniform, &all).map_err(|e| e.to_string())?;
        ensure(next.cells().len() == 2 * uniform.cells().len(), || {
            format!("uniform round {round}: {} -> {}", uniform.cells().len(), next.cells().len())
        })?;
        uniform = next;
    }
    ensure(check_conforming(&uniform).passed(), || "uniform rounds not conforming".into())?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "cells {sizes:?}, worst measure drift {worst:.1e}, uniform 48 -> {}, {elapsed:.2?}",
        uniform.cells().len()
    ))
}

fn shape_boundedness() -> Outcome {
    let tet = fixtures::single_tet();
    let colors = verified_coloring(&tet, "single-tet")?;
    let mut mesh = extrude(&tet, &colors, vec![0.0, 1.0])?;
    let mut seen = shape_signatures(&mesh);
    let mut cumulative = vec![seen.len()];
    let mut per_round = vec![seen.len()];
    for _ in 1..=8 {
        let all: Vec<CellId> = (0..mesh.cells().len()).map(CellId).collect();
        mesh = refine(&mesh, &all).map_err(|e| e.to_string())?;
        let current = shape_signatures(&mesh);
        per_round.push(current.len());
        seen.extend(current);
        cumulative.push(seen.len());
    }
    let detail = format!("distinct signatures by round 0..8: cumulative {cumulative:?}, per round {per_round:?}");
    ensure(cumulative[5..].iter().all(|&c| c == cumulative[4]), || {
        format!("new shapes after round 4; {detail}")
    })?;
    Ok(detail)
}

fn linear_tagging() -> Outcome {
    let n = 4;
    let mesh = fixtures::kuhn_grid(n);
    let colors = fixtures::kuhn_grid_coloring(n);
    let mut points = Vec::new();
    for (slabs, repeats) in [(3, 25), (26, 10), (260, 6)] {
        let slices = (0..=slabs).map(|j| j as f64).collect();
        let pents = extrude(&mesh, &colors, slices)?;
        let mut best = Duration::MAX;
        for _ in 0..repeats {
            let start = Instant::now();
            let tagged = tag_mesh(&pents).map_err(|e| e.to_string())?;
            best = best.min(start.elapsed());
            std::hint::black_box(tagged);
        }
        points.push((pents.cells().len(), best));
    }
    let xs: Vec<f64> = points.iter().map(|(c, _)| (*c as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, t)| t.as_secs_f64().ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / 3.0, ys.iter().sum::<f64>() / 3.0);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    let detail = points
        .iter()
        .map(|(c, t)| format!("{c} cells {t:.2?}"))
        .collect::<Vec<_>>()
        .join(", ");
    ensure((slope - 1.0).abs() <= 0.15, || format!("slope {slope:.3}; {detail}"))?;
    Ok(format!("slope {slope:.3}; {detail}"))
}

fn coloring_constructions() -> Outcome {
    for (name, mesh) in named_fixtures() {
        let (fine, colors) = barycentric_subdivide(&mesh).map_err(|e| format!("{name}: {e}"))?;
        ensure(fine.cells().len() == 24 * mesh.cells().len(), || format!("{name}: cell count"))?;
        let (v0, v1) = (mesh.total_volume(), fine.total_volume());
        ensure((v0 - v1).abs() <= 1e-12 * v0, || format!("{name}: volume {v0} -> {v1}"))?;
        let report = verify_coloring(&fine, &colors).map_err(|e| e.to_string())?;
        ensure(report.passed(), || format!("{name}: canonical coloring is improper"))?;
    }

    let fan = fixtures::odd_fan();
    let exhaustive = SearchLimits {
        budget: 0,
        exhaustive_below: usize::MAX,
    };
    let outcome = find_four_coloring_with(&fan, exhaustive);
    ensure(outcome.coloring().is_none(), || "odd-fan was colored".into())?;
    let parity = edge_parity_check(&fan).map_err(|e| e.to_string())?;
    ensure(!parity.passed(), || "odd-fan passes the parity check".into())?;

    let config = |auto_barycentric| {
        let mut c = RunConfig::new(MeshSource::Fixture(Fixture::OddFan), SliceSpec::Values(vec![0.0, 0.5, 1.0]));
        c.auto_barycentric = auto_barycentric;
        c.refine_rounds = 1;
        c
    };
    let refused = pipeline::run(&config(false)).map_err(|e| e.to_string())?;
    ensure(!refused.report.passed, || "pipeline without barycentric fallback passed".into())?;
    let run = pipeline::run(&config(true)).map_err(|e| e.to_string())?;
    ensure(run.report.passed, || format!("pipeline failed: {:?}", run.report.failures))?;
    ensure(run.report.coloring.method == Some(ColoringMethod::Barycentric), || "not barycentric".into())?;
    let extruded = run.report.extrusion.as_ref().ok_or("no extrusion stage")?;
    let tagging = run.report.tagging.as_ref().ok_or("no tagging stage")?;
    ensure(tagging.violations == 0, || "tagging violations".into())?;
    let mesh = run.mesh.ok_or("no mesh")?;
    ensure(check_consistent_tagging(&mesh).passed(), || "final mesh inconsistent".into())?;
    Ok(format!(
        "6 fixtures x24 with proper canonical colorings; odd-fan uncolorable with {} odd interior edge(s); \
         pipeline passes with {} extruded cells",
        parity.odd_interior.len(),
        extruded.cells
    ))
}

fn counting_identity() -> Outcome {
    let mut checked = 0;
    let mut meshes = named_fixtures();
    let bary: Vec<_> = meshes
        .iter()
        .map(|(name, mesh)| (format!("barycentric {name}"), barycentric_subdivide(mesh)))
        .collect();
    let mut colored = Vec::new();
    for (name, mesh) in meshes.drain(..) {
        if let Some(colors) = find_four_coloring(&mesh, 10_000_000).coloring().cloned() {
            colored.push((name, mesh, colors));
        }
    }
    for (name, result) in bary {
        let (mesh, colors) = result.map_err(|e| e.to_string())?;
        colored.push((name, mesh, colors));
    }
    for (name, mesh, colors) in &colored {
        for slabs in [1, 2, 3, 5] {
            let slices = (0..=slabs).map(|j| 0.25 * j as f64).collect();
            let pents = extrude(mesh, colors, slices)?;
            let expected = 4 * mesh.cells().len() * slabs;
            ensure(pents.cells().len() == expected, || {
                format!("{name} x {slabs}: {} cells, expected {expected}", pents.cells().len())
            })?;
            checked += 1;
        }
    }
    Ok(format!("{checked} (mesh, slab count) combinations over {} meshes", colored.len()))
}
