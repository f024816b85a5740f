use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use stmesh_core::fixtures::Fixture;
use stmesh_core::pipeline::{Marking, MeshSource, SliceSpec};

#[derive(Debug, Parser)]
#[command(name = "stmesh", version, about = "Space-time pentatope meshes by extrusion-subdivision")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find a proper 4-coloring of a tetrahedral mesh.
    Color {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        coloring: ColoringArgs,
        /// Write the (possibly subdivided) mesh with its colors.
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Check that every interior edge has an even number of incident cells.
    Parity {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Barycentric subdivision with its canonical 4-coloring.
    Barycentric {
        #[command(flatten)]
        source: SourceArgs,
        /// Write the subdivided mesh with its colors.
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Extrude a colored tetrahedral mesh into tagged pentatopes.
    Extrude {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        slices: SliceArgs,
        #[command(flatten)]
        coloring: ColoringArgs,
        /// Write the tagged pentatope mesh.
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Check that a pentatope mesh is consistently tagged.
    TagCheck {
        #[command(flatten)]
        input: InputArg,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Refine marked pentatopes by conforming bisection.
    Bisect {
        #[command(flatten)]
        input: InputArg,
        #[command(flatten)]
        marks: MarkArgs,
        /// Number of marking and refinement rounds.
        #[arg(long, default_value_t = 1)]
        refine_rounds: usize,
        /// Write the refined mesh.
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Check conformity (and tagging, for pentatope meshes) of a mesh file.
    Verify {
        #[command(flatten)]
        input: InputArg,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Print mesh statistics.
    Stats {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Export the cross-section at one time as a VTK unstructured grid.
    Slice {
        #[command(flatten)]
        input: InputArg,
        /// Time of the cutting hyperplane, within the slice range.
        #[arg(long, allow_negative_numbers = true)]
        time: f64,
        /// VTK file to write.
        #[arg(long)]
        output: PathBuf,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Color, extrude, tag-check, refine and verify in one run.
    Pipeline {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        slices: SliceArgs,
        #[command(flatten)]
        coloring: ColoringArgs,
        #[command(flatten)]
        marks: MarkArgs,
        #[arg(long, default_value_t = 0)]
        refine_rounds: usize,
        /// Directory for the mesh written after every stage.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[command(flatten)]
        report: ReportArgs,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct SourceArgs {
    /// single-tet, two-tets, kuhn-cube, kuhn-grid(N) or odd-fan.
    #[arg(long)]
    pub fixture: Option<Fixture>,
    /// Native mesh file, or a `.node`/`.ele` pair.
    #[arg(long)]
    pub input: Option<PathBuf>,
}

impl SourceArgs {
    pub fn source(&self) -> MeshSource {
        match (&self.fixture, &self.input) {
            (Some(f), _) => MeshSource::Fixture(*f),
            (None, Some(p)) => MeshSource::File(p.clone()),
            (None, None) => unreachable!("clap requires one source"),
        }
    }
}

#[derive(Debug, Args)]
pub struct InputArg {
    /// Native mesh file.
    #[arg(long)]
    pub input: PathBuf,
}

#[derive(Debug, Args)]
pub struct ColoringArgs {
    /// Maximum label assignments tried by the coloring search.
    #[arg(long, default_value_t = stmesh_core::coloring::DEFAULT_BUDGET)]
    pub budget: u64,
    /// Fall back to barycentric subdivision when no coloring is found.
    #[arg(long)]
    pub auto_barycentric: bool,
}

#[derive(Debug, Args)]
pub struct SliceArgs {
    /// Comma-separated, strictly increasing time values.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, conflicts_with_all = ["t0", "t1", "num_slabs"])]
    pub slices: Option<Vec<f64>>,
    /// First slice of a uniform sequence.
    #[arg(long, allow_negative_numbers = true, requires_all = ["t1", "num_slabs"])]
    pub t0: Option<f64>,
    /// Last slice of a uniform sequence.
    #[arg(long, allow_negative_numbers = true, requires_all = ["t0", "num_slabs"])]
    pub t1: Option<f64>,
    /// Number of equal slabs between `--t0` and `--t1`.
    #[arg(long, requires_all = ["t0", "t1"])]
    pub num_slabs: Option<usize>,
}

impl SliceArgs {
    pub fn spec(&self) -> Option<SliceSpec> {
        match (&self.slices, self.t0, self.t1, self.num_slabs) {
            (Some(v), ..) => Some(SliceSpec::Values(v.clone())),
            (None, Some(t0), Some(t1), Some(slabs)) => Some(SliceSpec::Uniform { t0, t1, slabs }),
            _ => None,
        }
    }
}

#[derive(Debug, Args)]
pub struct MarkArgs {
    /// Mark every cell in every round (the default).
    #[arg(long, conflicts_with_all = ["mark_ids", "mark_frac"])]
    pub uniform: bool,
    /// Comma-separated cell ids to mark in every round.
    #[arg(long, value_delimiter = ',', conflicts_with = "mark_frac")]
    pub mark_ids: Option<Vec<usize>>,
    /// Fraction of cells, in (0, 1], to mark at random in every round.
    #[arg(long, requires = "seed")]
    pub mark_frac: Option<f64>,
    /// Seed for random marking.
    #[arg(long)]
    pub seed: Option<u64>,
}

impl MarkArgs {
    pub fn marking(&self) -> Marking {
        match (&self.mark_ids, self.mark_frac, self.seed) {
            (Some(ids), ..) => Marking::Ids(ids.clone()),
            (None, Some(fraction), Some(seed)) => Marking::Random { seed, fraction },
            _ => Marking::All,
        }
    }
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Write a machine-readable JSON report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
}
