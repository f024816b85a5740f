use std::fmt;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use stmesh_core::bisection::{check_consistent_tagging, refine_with_stats, RefineError};
use stmesh_core::coloring::{
    barycentric_subdivide, edge_parity_check, find_four_coloring, verify_coloring, ColorAssignment, ColoringOutcome,
};
use stmesh_core::extrusion::extrude_subdivide;
use stmesh_core::io::native::{self, MeshFile};
use stmesh_core::io::{node_ele, write_file};
use stmesh_core::mesh::{check_conforming, PentMesh, TetMesh};
use stmesh_core::pipeline::{self, Marker, MeshSource, RunConfig, BARYCENTRIC_HINT};
use stmesh_core::slice::write_time_slice;
use stmesh_core::stats::{pent_stats, tet_stats};

use crate::args::{ColoringArgs, Command, ReportArgs, SliceArgs, SourceArgs};

/// A usage or input error; the process exits with status 2.
#[derive(Debug)]
pub struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl<E: std::error::Error> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

fn usage(message: impl Into<String>) -> UsageError {
    UsageError(message.into())
}

type Outcome = Result<u8, UsageError>;

enum Loaded {
    Tet(TetMesh, Option<ColorAssignment>),
    Pent(PentMesh),
}

fn load_path(path: &Path) -> Result<Loaded, UsageError> {
    if matches!(path.extension().and_then(|e| e.to_str()), Some("node") | Some("ele")) {
        return Ok(Loaded::Tet(node_ele::read(path)?, None));
    }
    Ok(match native::read(path)? {
        MeshFile::Tet { mesh, colors } => Loaded::Tet(mesh, colors),
        MeshFile::Pent(mesh) => Loaded::Pent(mesh),
    })
}

fn load_tet(source: &SourceArgs) -> Result<(TetMesh, Option<ColorAssignment>), UsageError> {
    Ok(pipeline::load_source(&source.source())?)
}

fn load_pent(path: &Path) -> Result<PentMesh, UsageError> {
    match load_path(path)? {
        Loaded::Pent(mesh) => Ok(mesh),
        Loaded::Tet(..) => Err(usage(format!("{}: expected a pentatope mesh", path.display()))),
    }
}

fn finish(report: &ReportArgs, value: &Value, passed: bool) -> Outcome {
    if let Some(path) = &report.report {
        pipeline::write_report(path, value)?;
    }
    Ok(if passed { 0 } else { 1 })
}

fn write_output(path: &Option<PathBuf>, text: impl FnOnce() -> String) -> Result<(), UsageError> {
    if let Some(path) = path {
        write_file(path, &text())?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

pub fn dispatch(command: Command) -> Outcome {
    match command {
        Command::Color {
            source,
            coloring,
            output,
            report,
        } => color(&source, &coloring, &output, &report),
        Command::Parity { source, report } => parity(&source, &report),
        Command::Barycentric { source, output, report } => barycentric(&source, &output, &report),
        Command::Extrude {
            source,
            slices,
            coloring,
            output,
            report,
        } => extrude(&source, &slices, &coloring, &output, &report),
        Command::TagCheck { input, report } => tag_check(&input.input, &report),
        Command::Bisect {
            input,
            marks,
            refine_rounds,
            output,
            report,
        } => bisect(&input.input, &marks.marking(), refine_rounds, &output, &report),
        Command::Verify { input, report } => verify(&input.input, &report),
        Command::Stats { source, report } => stats(&source, &report),
        Command::Slice {
            input,
            time,
            output,
            report,
        } => slice(&input.input, time, &output, &report),
        Command::Pipeline {
            source,
            slices,
            coloring,
            marks,
            refine_rounds,
            out_dir,
            report,
        } => {
            let spec = slices.spec().ok_or_else(|| usage("give --slices or --t0/--t1/--num-slabs"))?;
            let mut config = RunConfig::new(source.source(), spec);
            config.budget = coloring.budget;
            config.auto_barycentric = coloring.auto_barycentric;
            config.refine_rounds = refine_rounds;
            config.marking = marks.marking();
            config.out_dir = out_dir;
            run_pipeline(&config, &report)
        }
    }
}

fn outcome_json(outcome: &ColoringOutcome) -> Value {
    match outcome {
        ColoringOutcome::Colored(_) => json!({ "outcome": "colored" }),
        ColoringOutcome::NotFound { expansions } => json!({ "outcome": "not_found", "expansions": expansions }),
        ColoringOutcome::ProvenUncolorable { expansions } => {
            json!({ "outcome": "proven_uncolorable", "expansions": expansions })
        }
    }
}

/// Stored colors if proper, else search, else barycentric subdivision when
/// allowed. `Err` carries the search outcome when no coloring was produced.
fn obtain_coloring(
    mesh: TetMesh,
    stored: Option<ColorAssignment>,
    args: &ColoringArgs,
) -> Result<(TetMesh, ColorAssignment, &'static str, Option<ColoringOutcome>), ColoringOutcome> {
    if let Some(colors) = stored {
        if verify_coloring(&mesh, &colors).map(|r| r.passed()).unwrap_or(false) {
            return Ok((mesh, colors, "provided", None));
        }
    }
    let outcome = find_four_coloring(&mesh, args.budget);
    if let ColoringOutcome::Colored(colors) = &outcome {
        let colors = colors.clone();
        return Ok((mesh, colors, "search", Some(outcome)));
    }
    if args.auto_barycentric {
        let (fine, colors) = barycentric_subdivide(&mesh).expect("input mesh was validated on load");
        return Ok((fine, colors, "barycentric", Some(outcome)));
    }
    Err(outcome)
}

fn color(source: &SourceArgs, args: &ColoringArgs, output: &Option<PathBuf>, report: &ReportArgs) -> Outcome {
    let (mesh, stored) = load_tet(source)?;
    let (vertices, cells) = (mesh.vertices().len(), mesh.cells().len());
    match obtain_coloring(mesh, stored, args) {
        Ok((mesh, colors, method, outcome)) => {
            println!(
                "colored by {method}: {} vertices, {} cells",
                mesh.vertices().len(),
                mesh.cells().len()
            );
            write_output(output, || native::write_tet(&mesh, Some(&colors)))?;
            let value = json!({
                "command": "color",
                "source": source.source().to_string(),
                "input": { "vertices": vertices, "cells": cells },
                "method": method,
                "search": outcome.as_ref().map(outcome_json),
                "output": { "vertices": mesh.vertices().len(), "cells": mesh.cells().len() },
            });
            finish(report, &value, true)
        }
        Err(outcome) => {
            let what = match outcome {
                ColoringOutcome::ProvenUncolorable { .. } => "proven uncolorable",
                _ => "not found within the budget",
            };
            println!("4-coloring {what}");
            println!("hint: {BARYCENTRIC_HINT}");
            let value = json!({
                "command": "color",
                "source": source.source().to_string(),
                "input": { "vertices": vertices, "cells": cells },
                "search": outcome_json(&outcome),
                "hint": BARYCENTRIC_HINT,
            });
            finish(report, &value, false)
        }
    }
}

fn parity(source: &SourceArgs, report: &ReportArgs) -> Outcome {
    let (mesh, _) = load_tet(source)?;
    let parity = edge_parity_check(&mesh)?;
    println!(
        "{} interior edges, {} boundary edges, {} interior edges with odd incidence",
        parity.interior.len(),
        parity.boundary.len(),
        parity.odd_interior.len()
    );
    for (a, b) in &parity.odd_interior {
        println!("  odd edge ({a}, {b})");
    }
    let value = json!({
        "command": "parity",
        "source": source.source().to_string(),
        "interior_edges": parity.interior.len(),
        "boundary_edges": parity.boundary.len(),
        "odd_interior": parity.odd_interior,
    });
    finish(report, &value, parity.passed())
}

fn barycentric(source: &SourceArgs, output: &Option<PathBuf>, report: &ReportArgs) -> Outcome {
    let (mesh, _) = load_tet(source)?;
    let (fine, colors) = barycentric_subdivide(&mesh)?;
    let proper = verify_coloring(&fine, &colors)?.passed();
    println!(
        "{} cells -> {} cells, {} vertices; canonical coloring {}",
        mesh.cells().len(),
        fine.cells().len(),
        fine.vertices().len(),
        if proper { "verified" } else { "INVALID" }
    );
    write_output(output, || native::write_tet(&fine, Some(&colors)))?;
    let value = json!({
        "command": "barycentric",
        "source": source.source().to_string(),
        "input": { "vertices": mesh.vertices().len(), "cells": mesh.cells().len(), "volume": mesh.total_volume() },
        "output": { "vertices": fine.vertices().len(), "cells": fine.cells().len(), "volume": fine.total_volume() },
        "coloring_proper": proper,
    });
    finish(report, &value, proper)
}

fn extrude(
    source: &SourceArgs,
    slices: &SliceArgs,
    args: &ColoringArgs,
    output: &Option<PathBuf>,
    report: &ReportArgs,
) -> Outcome {
    let spec = slices.spec().ok_or_else(|| usage("give --slices or --t0/--t1/--num-slabs"))?;
    let slices = spec.build()?;
    let (mesh, stored) = load_tet(source)?;
    let (mesh, colors, method) = match obtain_coloring(mesh, stored, args) {
        Ok((mesh, colors, method, _)) => (mesh, colors, method),
        Err(outcome) => {
            println!("no 4-coloring available");
            println!("hint: {BARYCENTRIC_HINT}");
            let value = json!({
                "command": "extrude",
                "source": source.source().to_string(),
                "search": outcome_json(&outcome),
                "hint": BARYCENTRIC_HINT,
            });
            return finish(report, &value, false);
        }
    };
    let pents = extrude_subdivide(&mesh, &colors, &slices)?;
    let expected = 4 * mesh.cells().len() * slices.slabs();
    let conformity = check_conforming(&pents);
    println!(
        "{} pentatopes over {} slabs (coloring: {method}); conforming: {}",
        pents.cells().len(),
        slices.slabs(),
        conformity.passed()
    );
    write_output(output, || native::write_pent(&pents))?;
    let value = json!({
        "command": "extrude",
        "source": source.source().to_string(),
        "coloring": method,
        "slices": slices.values(),
        "cells": pents.cells().len(),
        "expected_cells": expected,
        "conformity_violations": conformity.violations.len(),
    });
    finish(report, &value, conformity.passed() && pents.cells().len() == expected)
}

fn tag_check(path: &Path, report: &ReportArgs) -> Outcome {
    let mesh = load_pent(path)?;
    let result = check_consistent_tagging(&mesh);
    println!(
        "{} neighbor pairs checked ({} shared refinement edge, {} adjacent children), {} across generations, {} violations",
        result.pairs_checked,
        result.shared_refinement_edge,
        result.adjacent_children,
        result.mixed_generation,
        result.violations.len()
    );
    for v in result.violations.iter().take(pipeline::SAMPLE_LIMIT) {
        let (a, b) = v.cells;
        println!("  cells {a} and {b} are not consistently tagged");
    }
    let value = json!({
        "command": "tag-check",
        "input": path.display().to_string(),
        "result": result,
    });
    finish(report, &value, result.passed())
}

fn bisect(
    path: &Path,
    marking: &pipeline::Marking,
    rounds: usize,
    output: &Option<PathBuf>,
    report: &ReportArgs,
) -> Outcome {
    if let pipeline::Marking::Random { fraction, .. } = marking {
        if !(*fraction > 0.0 && *fraction <= 1.0) {
            return Err(usage(format!("mark fraction {fraction} is not in (0, 1]")));
        }
    }
    let mut mesh = load_pent(path)?;
    let mut marker = Marker::new(marking);
    let mut log = Vec::new();
    let mut failure = None;
    for round in 1..=rounds {
        let marks = marker.next(mesh.cells().len(), round)?;
        match refine_with_stats(&mesh, &marks) {
            Ok((refined, stats)) => {
                mesh = refined;
                println!(
                    "round {round}: {} marked, {} bisections ({} closure), {} cells",
                    stats.marked,
                    stats.bisections,
                    stats.closure_bisections,
                    mesh.cells().len()
                );
                log.push(json!({ "round": round, "stats": stats, "cells": mesh.cells().len() }));
            }
            Err(e @ RefineError::NoSuchCell { .. }) => return Err(usage(e.to_string())),
            Err(e) => {
                println!("round {round}: {e}");
                failure = Some(e.to_string());
                break;
            }
        }
    }
    write_output(output, || native::write_pent(&mesh))?;
    let value = json!({
        "command": "bisect",
        "input": path.display().to_string(),
        "rounds": log,
        "cells": mesh.cells().len(),
        "vertices": mesh.vertices().len(),
        "failure": failure,
    });
    finish(report, &value, failure.is_none())
}

fn verify(path: &Path, report: &ReportArgs) -> Outcome {
    match load_path(path)? {
        Loaded::Tet(mesh, colors) => {
            let conformity = check_conforming(&mesh);
            let coloring = match &colors {
                Some(c) => Some(verify_coloring(&mesh, c)?.passed()),
                None => None,
            };
            let passed = conformity.passed() && coloring != Some(false);
            println!(
                "tetrahedral mesh: {} conformity violations{}",
                conformity.violations.len(),
                match coloring {
                    Some(true) => ", coloring proper",
                    Some(false) => ", coloring NOT proper",
                    None => "",
                }
            );
            let value = json!({
                "command": "verify",
                "input": path.display().to_string(),
                "dimension": 3,
                "conformity": conformity,
                "coloring_proper": coloring,
            });
            finish(report, &value, passed)
        }
        Loaded::Pent(mesh) => {
            let conformity = check_conforming(&mesh);
            let tagging = check_consistent_tagging(&mesh);
            println!(
                "pentatope mesh: {} conformity violations, {} tagging violations",
                conformity.violations.len(),
                tagging.violations.len()
            );
            let value = json!({
                "command": "verify",
                "input": path.display().to_string(),
                "dimension": 4,
                "conformity": conformity,
                "tagging": tagging,
            });
            finish(report, &value, conformity.passed() && tagging.passed())
        }
    }
}

fn stats(source: &SourceArgs, report: &ReportArgs) -> Outcome {
    let stats = match source.source() {
        MeshSource::File(path) => match load_path(&path)? {
            Loaded::Tet(mesh, _) => tet_stats(&mesh),
            Loaded::Pent(mesh) => pent_stats(&mesh),
        },
        MeshSource::Fixture(_) => tet_stats(&load_tet(source)?.0),
    };
    println!(
        "dimension {}: {} vertices, {} cells, total measure {}, cell measure in [{:e}, {:e}]",
        stats.dimension, stats.vertices, stats.cells, stats.total_measure, stats.min_measure, stats.max_measure
    );
    let value = json!({
        "command": "stats",
        "source": source.source().to_string(),
        "stats": stats,
    });
    finish(report, &value, true)
}

fn slice(path: &Path, time: f64, output: &Path, report: &ReportArgs) -> Outcome {
    let mesh = load_pent(path)?;
    let slice = write_time_slice(&mesh, time, output)?;
    println!(
        "t = {time}: {} tetrahedra, {} vertices, volume {}; wrote {}",
        slice.mesh.cells().len(),
        slice.mesh.vertices().len(),
        slice.mesh.total_volume(),
        output.display()
    );
    let value = json!({
        "command": "slice",
        "input": path.display().to_string(),
        "time": time,
        "cells": slice.mesh.cells().len(),
        "vertices": slice.mesh.vertices().len(),
        "volume": slice.mesh.total_volume(),
    });
    finish(report, &value, true)
}

fn run_pipeline(config: &RunConfig, report: &ReportArgs) -> Outcome {
    let result = pipeline::run(config);
    let code = pipeline::exit_code(&result) as u8;
    let run = result?;
    let r = &run.report;
    println!("source: {}", r.source);
    if let Some(method) = r.coloring.method {
        println!("coloring: {}", serde_json::to_value(method).unwrap_or_default().as_str().unwrap_or("?"));
    }
    if let Some(e) = &r.extrusion {
        println!("extruded: {} pentatopes (expected {})", e.cells, e.expected_cells);
    }
    if let Some(t) = &r.tagging {
        println!("tagging: {} pairs checked, {} violations", t.pairs_checked, t.violations);
    }
    for round in &r.rounds {
        println!(
            "round {}: {} cells, {} bisections ({} closure), conformity violations {}, tagging violations {}",
            round.round,
            round.cells,
            round.bisections,
            round.closure_bisections,
            round.conformity_violations,
            round.tagging_violations
        );
    }
    for f in &r.failures {
        println!("FAILED: {f}");
    }
    if let Some(h) = &r.hint {
        println!("hint: {h}");
    }
    println!("{}", if r.passed { "all checks passed" } else { "checks failed" });
    if let Some(path) = &report.report {
        pipeline::write_report(path, r)?;
    }
    Ok(code)
}
