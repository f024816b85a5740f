//! End-to-end driver: color, extrude, tag-check, refine, verify.

use std::path::{Path, PathBuf};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::bisection::{check_consistent_tagging, refine_with_stats, PairViolation, RefineError};
use crate::coloring::{
    barycentric_subdivide, edge_parity_check, find_four_coloring, verify_coloring, ColorAssignment, ColoringOutcome,
};
use crate::extrusion::{extrude_subdivide, ExtrusionError, TimeSlices};
use crate::fixtures::{generate_fixture, Fixture};
use crate::io::{self, native, IoError};
use crate::mesh::{check_conforming, CellId, MeshError, PentMesh, TetMesh};

/// Relative drift in total measure tolerated across refinement.
pub const MEASURE_DRIFT: f64 = 1e-10;
/// Violations listed individually in a report; the rest are only counted.
pub const SAMPLE_LIMIT: usize = 20;

#[derive(Clone, Debug, PartialEq)]
pub enum MeshSource {
    Fixture(Fixture),
    File(PathBuf),
}

impl std::fmt::Display for MeshSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MeshSource::Fixture(x) => write!(f, "fixture {x}"),
            MeshSource::File(p) => write!(f, "file {}", p.display()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SliceSpec {
    Values(Vec<f64>),
    Uniform { t0: f64, t1: f64, slabs: usize },
}

impl SliceSpec {
    pub fn build(&self) -> Result<TimeSlices, ExtrusionError> {
        match self {
            SliceSpec::Values(v) => TimeSlices::new(v.clone()),
            SliceSpec::Uniform { t0, t1, slabs } => TimeSlices::uniform(*t0, *t1, *slabs),
        }
    }
}

/// Which cells to bisect in each refinement round.
#[derive(Clone, Debug, PartialEq)]
pub enum Marking {
    All,
    /// Cell ids of the mesh at the start of every round.
    Ids(Vec<usize>),
    /// `ceil(fraction * cells)` distinct cells per round, drawn from one
    /// ChaCha8 stream seeded once per run.
    Random { seed: u64, fraction: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub source: MeshSource,
    pub slices: SliceSpec,
    pub budget: u64,
    pub auto_barycentric: bool,
    pub refine_rounds: usize,
    pub marking: Marking,
    pub out_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(source: MeshSource, slices: SliceSpec) -> Self {
        Self {
            source,
            slices,
            budget: crate::coloring::DEFAULT_BUDGET,
            auto_barycentric: false,
            refine_rounds: 0,
            marking: Marking::All,
            out_dir: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Slices(ExtrusionError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MeshSummary {
    pub vertices: usize,
    pub cells: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ColoringMethod {
    /// Colors stored with the input were proper and used as given.
    Provided,
    Search,
    Barycentric,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SearchSummary {
    pub outcome: &'static str,
    pub expansions: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ColoringStage {
    pub method: Option<ColoringMethod>,
    pub search: Option<SearchSummary>,
    pub odd_interior_edges: usize,
    /// The mesh that was extruded (after barycentric subdivision, if used).
    pub colored_mesh: Option<MeshSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtrusionStage {
    pub slices: Vec<f64>,
    pub cells: usize,
    /// `4 * tets * slabs`.
    pub expected_cells: usize,
    pub conformity_violations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TaggingStage {
    pub pairs_checked: usize,
    pub shared_refinement_edge: usize,
    pub adjacent_children: usize,
    pub violations: usize,
    pub sample: Vec<PairViolation>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundStage {
    pub round: usize,
    pub marked: usize,
    pub bisections: usize,
    pub closure_bisections: usize,
    pub cells: usize,
    pub vertices: usize,
    pub measure_relative_error: f64,
    pub conformity_violations: usize,
    pub tagging_violations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PipelineReport {
    pub source: String,
    pub input: MeshSummary,
    pub coloring: ColoringStage,
    pub extrusion: Option<ExtrusionStage>,
    pub tagging: Option<TaggingStage>,
    pub rounds: Vec<RoundStage>,
    pub artifacts: Vec<String>,
    pub failures: Vec<String>,
    pub hint: Option<String>,
    pub passed: bool,
}

impl PipelineReport {
    fn fail(&mut self, message: String) {
        self.failures.push(message);
        self.passed = false;
    }
}

pub struct PipelineRun {
    pub report: PipelineReport,
    /// The last pentatope mesh produced, if extrusion was reached.
    pub mesh: Option<PentMesh>,
}

/// Process exit status for a pipeline outcome: 0 when every check passed,
/// 1 when a check failed, 2 for configuration or input errors.
pub fn exit_code(result: &Result<PipelineRun, PipelineError>) -> i32 {
    match result {
        Ok(run) if run.report.passed => 0,
        Ok(_) => 1,
        Err(_) => 2,
    }
}

/// Draws the marked cells of successive refinement rounds.
pub struct Marker {
    marking: Marking,
    rng: Option<ChaCha8Rng>,
}

impl Marker {
    pub fn new(marking: &Marking) -> Self {
        let rng = match marking {
            Marking::Random { seed, .. } => Some(ChaCha8Rng::seed_from_u64(*seed)),
            _ => None,
        };
        Self {
            marking: marking.clone(),
            rng,
        }
    }

    /// Marks for a mesh with `n` cells. `round` is only used in messages.
    pub fn next(&mut self, n: usize, round: usize) -> Result<Vec<CellId>, PipelineError> {
        match &self.marking {
            Marking::All => Ok((0..n).map(CellId).collect()),
            Marking::Ids(ids) => match ids.iter().find(|&&c| c >= n) {
                Some(bad) => Err(PipelineError::Config(format!(
                    "marked cell {bad} does not exist in round {round} ({n} cells)"
                ))),
                None => Ok(ids.iter().copied().map(CellId).collect()),
            },
            Marking::Random { fraction, .. } => {
                if n == 0 {
                    return Ok(Vec::new());
                }
                let k = ((fraction * n as f64).ceil() as usize).clamp(1, n);
                let rng = self.rng.as_mut().expect("seeded for random marking");
                let mut picked = sample(rng, n, k).into_vec();
                picked.sort_unstable();
                Ok(picked.into_iter().map(CellId).collect())
            }
        }
    }
}

pub const BARYCENTRIC_HINT: &str = "no 4-coloring found; rerun with --auto-barycentric to subdivide the mesh barycentrically, which always admits one";

pub fn load_source(source: &MeshSource) -> Result<(TetMesh, Option<ColorAssignment>), IoError> {
    match source {
        MeshSource::Fixture(f) => Ok((generate_fixture(*f), None)),
        MeshSource::File(path) => io::read_tet_mesh(path),
    }
}

fn validate(config: &RunConfig) -> Result<TimeSlices, PipelineError> {
    if let Marking::Random { fraction, .. } = config.marking {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(PipelineError::Config(format!("mark fraction {fraction} is not in (0, 1]")));
        }
    }
    config.slices.build().map_err(PipelineError::Slices)
}

pub fn run(config: &RunConfig) -> Result<PipelineRun, PipelineError> {
    let slices = validate(config)?;
    let (mesh, stored_colors) = load_source(&config.source)?;
    if let Some(dir) = &config.out_dir {
        std::fs::create_dir_all(dir).map_err(|source| IoError::File {
            path: dir.clone(),
            source,
        })?;
    }
    let mut report = PipelineReport {
        source: config.source.to_string(),
        input: MeshSummary {
            vertices: mesh.vertices().len(),
            cells: mesh.cells().len(),
        },
        coloring: ColoringStage {
            method: None,
            search: None,
            odd_interior_edges: edge_parity_check(&mesh)?.odd_interior.len(),
            colored_mesh: None,
        },
        extrusion: None,
        tagging: None,
        rounds: Vec::new(),
        artifacts: Vec::new(),
        failures: Vec::new(),
        hint: None,
        passed: true,
    };

    let Some((mesh, colors)) = color_stage(config, mesh, stored_colors, &mut report)? else {
        return Ok(PipelineRun { report, mesh: None });
    };
    report.coloring.colored_mesh = Some(MeshSummary {
        vertices: mesh.vertices().len(),
        cells: mesh.cells().len(),
    });
    write_artifact(config, &mut report, "input.stmesh", &native::write_tet(&mesh, Some(&colors)))?;

    let pents = match extrude_subdivide(&mesh, &colors, &slices) {
        Ok(p) => p,
        Err(e) => {
            report.fail(format!("extrusion failed: {e}"));
            return Ok(PipelineRun { report, mesh: None });
        }
    };
    let expected = 4 * mesh.cells().len() * slices.slabs();
    let conformity = check_conforming(&pents);
    report.extrusion = Some(ExtrusionStage {
        slices: slices.values().to_vec(),
        cells: pents.cells().len(),
        expected_cells: expected,
        conformity_violations: conformity.violations.len(),
    });
    if pents.cells().len() != expected {
        report.fail(format!("extruded mesh has {} cells, expected {expected}", pents.cells().len()));
    }
    if !conformity.passed() {
        report.fail(format!("extruded mesh is not conforming ({} violations)", conformity.violations.len()));
    }
    write_artifact(config, &mut report, "extruded.stmesh", &native::write_pent(&pents))?;

    let tagging = check_consistent_tagging(&pents);
    let tagging_passed = tagging.passed();
    report.tagging = Some(TaggingStage {
        pairs_checked: tagging.pairs_checked,
        shared_refinement_edge: tagging.shared_refinement_edge,
        adjacent_children: tagging.adjacent_children,
        violations: tagging.violations.len(),
        sample: tagging.violations.into_iter().take(SAMPLE_LIMIT).collect(),
    });
    if !tagging_passed {
        report.fail("extruded mesh is not consistently tagged".to_string());
    }
    if !report.passed {
        return Ok(PipelineRun {
            report,
            mesh: Some(pents),
        });
    }

    let mesh = refine_stage(config, pents, &mut report)?;
    Ok(PipelineRun {
        report,
        mesh: Some(mesh),
    })
}

fn color_stage(
    config: &RunConfig,
    mesh: TetMesh,
    stored: Option<ColorAssignment>,
    report: &mut PipelineReport,
) -> Result<Option<(TetMesh, ColorAssignment)>, PipelineError> {
    if let Some(colors) = stored {
        let proper = verify_coloring(&mesh, &colors).map(|r| r.passed()).unwrap_or(false);
        if proper {
            report.coloring.method = Some(ColoringMethod::Provided);
            return Ok(Some((mesh, colors)));
        }
    }
    let outcome = find_four_coloring(&mesh, config.budget);
    report.coloring.search = Some(match &outcome {
        ColoringOutcome::Colored(_) => SearchSummary {
            outcome: "colored",
            expansions: 0,
        },
        ColoringOutcome::NotFound { expansions } => SearchSummary {
            outcome: "not_found",
            expansions: *expansions,
        },
        ColoringOutcome::ProvenUncolorable { expansions } => SearchSummary {
            outcome: "proven_uncolorable",
            expansions: *expansions,
        },
    });
    if let ColoringOutcome::Colored(colors) = outcome {
        report.coloring.method = Some(ColoringMethod::Search);
        return Ok(Some((mesh, colors)));
    }
    if config.auto_barycentric {
        let (fine, colors) = barycentric_subdivide(&mesh)?;
        report.coloring.method = Some(ColoringMethod::Barycentric);
        return Ok(Some((fine, colors)));
    }
    report.fail("no 4-coloring of the input mesh was found".to_string());
    report.hint = Some(BARYCENTRIC_HINT.to_string());
    Ok(None)
}

fn refine_stage(config: &RunConfig, mut mesh: PentMesh, report: &mut PipelineReport) -> Result<PentMesh, PipelineError> {
    let initial_measure = mesh.total_measure();
    let mut marker = Marker::new(&config.marking);
    for round in 1..=config.refine_rounds {
        let marks = marker.next(mesh.cells().len(), round)?;
        let (refined, stats) = match refine_with_stats(&mesh, &marks) {
            Ok(r) => r,
            Err(e @ RefineError::NoSuchCell { .. }) => return Err(PipelineError::Config(e.to_string())),
            Err(e) => {
                report.fail(format!("round {round}: {e}"));
                return Ok(mesh);
            }
        };
        mesh = refined;
        let drift = (mesh.total_measure() - initial_measure).abs() / initial_measure;
        let conformity = check_conforming(&mesh).violations.len();
        let tagging = check_consistent_tagging(&mesh).violations.len();
        report.rounds.push(RoundStage {
            round,
            marked: stats.marked,
            bisections: stats.bisections,
            closure_bisections: stats.closure_bisections,
            cells: mesh.cells().len(),
            vertices: mesh.vertices().len(),
            measure_relative_error: drift,
            conformity_violations: conformity,
            tagging_violations: tagging,
        });
        write_artifact(config, report, &format!("round-{round:02}.stmesh"), &native::write_pent(&mesh))?;
        if drift > MEASURE_DRIFT {
            report.fail(format!("round {round}: total measure drifted by {drift:e}"));
        }
        if conformity > 0 {
            report.fail(format!("round {round}: {conformity} conformity violations"));
        }
        if tagging > 0 {
            report.fail(format!("round {round}: {tagging} tagging violations"));
        }
        if !report.passed {
            break;
        }
    }
    Ok(mesh)
}

fn write_artifact(config: &RunConfig, report: &mut PipelineReport, name: &str, text: &str) -> Result<(), PipelineError> {
    if let Some(dir) = &config.out_dir {
        io::write_file(&dir.join(name), text)?;
        report.artifacts.push(name.to_string());
    }
    Ok(())
}

/// Serializes a report as pretty-printed JSON with a trailing newline.
pub fn report_json<T: Serialize>(report: &T) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("reports serialize");
    text.push('\n');
    text
}

pub fn write_report<T: Serialize>(path: &Path, report: &T) -> Result<(), IoError> {
    io::write_file(path, &report_json(report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(fixture: Fixture, slices: &[f64]) -> RunConfig {
        RunConfig::new(MeshSource::Fixture(fixture), SliceSpec::Values(slices.to_vec()))
    }

    #[test]
    fn uniform_rounds_on_kuhn_cube() {
        let mut cfg = config(Fixture::KuhnCube, &[0.0, 1.0]);
        cfg.refine_rounds = 2;
        let run = run(&cfg).unwrap();
        assert!(run.report.passed, "{:?}", run.report.failures);
        assert_eq!(run.mesh.unwrap().cells().len(), 96);
        let cells: Vec<usize> = run.report.rounds.iter().map(|r| r.cells).collect();
        assert_eq!(cells, [48, 96]);
    }

    #[test]
    fn odd_fan_needs_barycentric() {
        let cfg = config(Fixture::OddFan, &[0.0, 1.0]);
        let result = run(&cfg);
        assert_eq!(exit_code(&result), 1);
        let report = result.unwrap().report;
        assert_eq!(report.coloring.search.as_ref().unwrap().outcome, "proven_uncolorable");
        assert!(report.hint.is_some());

        let mut cfg = cfg;
        cfg.auto_barycentric = true;
        let result = run(&cfg);
        assert_eq!(exit_code(&result), 0);
        let report = result.unwrap().report;
        assert_eq!(report.coloring.method, Some(ColoringMethod::Barycentric));
        assert_eq!(report.extrusion.unwrap().cells, 4 * 72);
    }

    #[test]
    fn bad_configuration_is_an_input_error() {
        let mut cfg = config(Fixture::SingleTet, &[0.0, 1.0]);
        cfg.marking = Marking::Random { seed: 1, fraction: 0.0 };
        assert_eq!(exit_code(&run(&cfg)), 2);
        let cfg = config(Fixture::SingleTet, &[1.0, 1.0]);
        assert_eq!(exit_code(&run(&cfg)), 2);
        let mut cfg = config(Fixture::SingleTet, &[0.0, 1.0]);
        cfg.refine_rounds = 1;
        cfg.marking = Marking::Ids(vec![4]);
        assert_eq!(exit_code(&run(&cfg)), 2);
    }

    #[test]
    fn random_marking_is_reproducible() {
        let mut cfg = config(Fixture::KuhnCube, &[0.0, 0.5, 1.0]);
        cfg.refine_rounds = 3;
        cfg.marking = Marking::Random { seed: 7, fraction: 0.2 };
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        assert!(a.report.passed, "{:?} {:?}", a.report.failures, a.report.rounds);
        assert_eq!(report_json(&a.report), report_json(&b.report));
        assert_eq!(a.mesh, b.mesh);
    }
}
