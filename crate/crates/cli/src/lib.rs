//! Command-line driver: dataset generation, Jacobi set extraction,
//! connectivity construction, validation and export.

pub mod export;

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use jacobi_sets::connectivity::{
    nonreduced_connectivity, pl_graph, reduced_connectivity, reduction_stats, ConnectivityError,
    GraphMode, JacobiGraph, StageTimings,
};
use jacobi_sets::fields::{
    self, apply_noise_on_stream, gen_analytic, FieldError, GaussianMixtureSpec, GridFormat,
    NoiseSpec, ScalarGrid,
};
use jacobi_sets::jacobi::{check_even_degree, extract_critical_edges, JacobiError, KappaSource};
use jacobi_sets::mesh::Triangulation;
use jacobi_sets::simplicial::{betti01, nerve_of_critical_edges};

pub use export::ExportFormat;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("field error: {0}")]
    Field(#[from] FieldError),
    #[error(transparent)]
    Jacobi(#[from] JacobiError),
    #[error(transparent)]
    Connectivity(#[from] ConnectivityError),
    #[error("fields f ({f:?}) and g ({g:?}) are sampled on different lattices")]
    DimensionMismatch {
        f: (usize, usize),
        g: (usize, usize),
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("thread pool: {0}")]
    ThreadPool(String),
    #[error("validation failed: {0}")]
    Validation(String),
}

impl CliError {
    /// Process exit status: 3 for validation failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Connectivity(_) | CliError::Validation(_) => 3,
            _ => 1,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "jacobi",
    version,
    about = "Local bilinear Jacobi sets with reduced connectivity"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the two fields of a synthetic dataset as grid files.
    Generate(GenerateArgs),
    /// Extract the Jacobi set, build drawings, validate and export.
    Compute(ComputeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Gaussian mixtures on the unit square.
    Analytic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NoiseChoice {
    None,
    /// 0.5% salt-and-pepper plus Gaussian noise at 1% of the value range.
    Default,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GridFileFormat {
    Jgrid,
    Csv,
}

impl From<GridFileFormat> for GridFormat {
    fn from(f: GridFileFormat) -> Self {
        match f {
            GridFileFormat::Jgrid => GridFormat::TextGrid,
            GridFileFormat::Csv => GridFormat::CsvMatrix,
        }
    }
}

#[derive(Debug, Args)]
pub struct DatasetArgs {
    #[arg(long, value_enum, default_value = "analytic")]
    pub preset: Preset,
    /// Samples per axis.
    #[arg(long, default_value_t = 80, value_parser = clap::value_parser!(u32).range(2..))]
    pub res: u32,
    #[arg(long, value_enum, default_value = "none")]
    pub noise: NoiseChoice,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub dataset: DatasetArgs,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "jgrid")]
    pub format: GridFileFormat,
}

#[derive(Debug, Args)]
pub struct ComputeArgs {
    /// Grid file for f; requires --field-g. Without it the preset is used.
    #[arg(long, requires = "field_g")]
    pub field_f: Option<PathBuf>,
    #[arg(long, requires = "field_f")]
    pub field_g: Option<PathBuf>,
    /// Input encoding; guessed from the extension when omitted.
    #[arg(long, value_enum)]
    pub input_format: Option<GridFileFormat>,
    #[command(flatten)]
    pub dataset: DatasetArgs,
    /// Drawings to export: pl, nonreduced, reduced or all.
    #[arg(long, default_value = "all", value_delimiter = ',')]
    pub mode: Vec<String>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, default_value = "csv", value_delimiter = ',')]
    pub format: Vec<String>,
    /// Checks to run: all, none, or a list of even-degree, betti, accounting.
    #[arg(long, default_value = "all", value_delimiter = ',')]
    pub validate: Vec<String>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

/// Where the two fields come from.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldSource {
    Files {
        f: PathBuf,
        g: PathBuf,
        format: Option<GridFormat>,
    },
    Analytic {
        res: usize,
        mixture: GaussianMixtureSpec,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Validation {
    pub even_degree: bool,
    pub betti: bool,
    pub accounting: bool,
}

impl Validation {
    pub fn all() -> Self {
        Self {
            even_degree: true,
            betti: true,
            accounting: true,
        }
    }

    pub fn parse(items: &[String]) -> Result<Self, CliError> {
        let mut v = Validation::default();
        for item in items {
            match item.trim() {
                "all" => v = Validation::all(),
                "none" => {}
                "even-degree" => v.even_degree = true,
                "betti" => v.betti = true,
                "accounting" => v.accounting = true,
                other => return Err(CliError::Config(format!("unknown validation `{other}`"))),
            }
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub source: FieldSource,
    pub noise: Option<NoiseChoice>,
    pub seed: u64,
    pub modes: BTreeSet<GraphModeKey>,
    pub out: PathBuf,
    pub formats: BTreeSet<ExportFormat>,
    pub validation: Validation,
    pub threads: usize,
}

/// `GraphMode` with an ordering, for deterministic iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum GraphModeKey {
    Pl,
    Nonreduced,
    Reduced,
}

impl GraphModeKey {
    pub fn mode(self) -> GraphMode {
        match self {
            GraphModeKey::Pl => GraphMode::Pl,
            GraphModeKey::Nonreduced => GraphMode::Nonreduced,
            GraphModeKey::Reduced => GraphMode::Reduced,
        }
    }
}

pub fn parse_modes(items: &[String]) -> Result<BTreeSet<GraphModeKey>, CliError> {
    let mut modes = BTreeSet::new();
    for item in items {
        match item.trim() {
            "all" => modes.extend([
                GraphModeKey::Pl,
                GraphModeKey::Nonreduced,
                GraphModeKey::Reduced,
            ]),
            "pl" => {
                modes.insert(GraphModeKey::Pl);
            }
            "nonreduced" => {
                modes.insert(GraphModeKey::Nonreduced);
            }
            "reduced" => {
                modes.insert(GraphModeKey::Reduced);
            }
            other => return Err(CliError::Config(format!("unknown mode `{other}`"))),
        }
    }
    if modes.is_empty() {
        return Err(CliError::Config("at least one mode is required".into()));
    }
    Ok(modes)
}

pub fn parse_formats(items: &[String]) -> Result<BTreeSet<ExportFormat>, CliError> {
    items
        .iter()
        .map(|s| {
            ExportFormat::parse(s).ok_or_else(|| CliError::Config(format!("unknown format `{s}`")))
        })
        .collect()
}

impl RunConfig {
    pub fn from_args(args: &ComputeArgs) -> Result<Self, CliError> {
        let source = match (&args.field_f, &args.field_g) {
            (Some(f), Some(g)) => FieldSource::Files {
                f: f.clone(),
                g: g.clone(),
                format: args.input_format.map(Into::into),
            },
            _ => FieldSource::Analytic {
                res: args.dataset.res as usize,
                mixture: GaussianMixtureSpec::default(),
            },
        };
        Ok(Self {
            source,
            noise: Some(args.dataset.noise),
            seed: args.dataset.seed,
            modes: parse_modes(&args.mode)?,
            out: args.out.clone(),
            formats: parse_formats(&args.format)?,
            validation: Validation::parse(&args.validate)?,
            threads: args.threads,
        })
    }

    /// Analytic preset at resolution `res`, every mode, CSV, all checks.
    pub fn analytic(res: usize, noise: bool, seed: u64, out: impl Into<PathBuf>) -> Self {
        Self {
            source: FieldSource::Analytic {
                res,
                mixture: GaussianMixtureSpec::default(),
            },
            noise: Some(if noise {
                NoiseChoice::Default
            } else {
                NoiseChoice::None
            }),
            seed,
            modes: [
                GraphModeKey::Pl,
                GraphModeKey::Nonreduced,
                GraphModeKey::Reduced,
            ]
            .into(),
            out: out.into(),
            formats: [ExportFormat::Csv].into(),
            validation: Validation::all(),
            threads: 0,
        }
    }
}

/// Applies the chosen noise to both fields, `f` on stream 0 and `g` on
/// stream 1 of the seeded generator.
pub fn perturb(
    f: ScalarGrid,
    g: ScalarGrid,
    noise: Option<NoiseChoice>,
    seed: u64,
) -> Result<(ScalarGrid, ScalarGrid), CliError> {
    match noise {
        None | Some(NoiseChoice::None) => Ok((f, g)),
        Some(NoiseChoice::Default) => {
            let nf = apply_noise_on_stream(&f, &NoiseSpec::default_for(&f, seed), 0)?;
            let ng = apply_noise_on_stream(&g, &NoiseSpec::default_for(&g, seed), 1)?;
            Ok((nf, ng))
        }
    }
}

/// The analytic preset, optionally perturbed.
pub fn analytic_dataset(
    res: usize,
    noise: NoiseChoice,
    seed: u64,
) -> Result<(ScalarGrid, ScalarGrid), CliError> {
    let (f, g) = gen_analytic(res, &GaussianMixtureSpec::default())?;
    perturb(f, g, Some(noise), seed)
}

pub fn load_fields(config: &RunConfig) -> Result<(ScalarGrid, ScalarGrid), CliError> {
    let (f, g) = match &config.source {
        FieldSource::Files { f, g, format } => {
            let fmt_f = format.unwrap_or_else(|| GridFormat::from_path(f));
            let fmt_g = format.unwrap_or_else(|| GridFormat::from_path(g));
            (fields::load_grid(f, fmt_f)?, fields::load_grid(g, fmt_g)?)
        }
        FieldSource::Analytic { res, mixture } => gen_analytic(*res, mixture)?,
    };
    if !f.same_lattice(&g) {
        return Err(CliError::DimensionMismatch {
            f: (f.nx(), f.ny()),
            g: (g.nx(), g.ny()),
        });
    }
    perturb(f, g, config.noise, config.seed)
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<[PathBuf; 2], CliError> {
    let Preset::Analytic = args.dataset.preset;
    let (f, g) = analytic_dataset(
        args.dataset.res as usize,
        args.dataset.noise,
        args.dataset.seed,
    )?;
    fs::create_dir_all(&args.out).map_err(io_err(&args.out))?;
    let ext = match args.format {
        GridFileFormat::Jgrid => "jgrid",
        GridFileFormat::Csv => "csv",
    };
    let pf = args.out.join(format!("f.{ext}"));
    let pg = args.out.join(format!("g.{ext}"));
    fields::save_grid(&f, &pf, args.format.into())?;
    fields::save_grid(&g, &pg, args.format.into())?;
    Ok([pf, pg])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GridSize {
    pub nx: usize,
    pub ny: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct SourceCounts {
    pub bilinear: usize,
    pub linear_fallback: usize,
    pub degenerate: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ModeCounts<T> {
    pub pl: T,
    pub nonreduced: T,
    pub reduced: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BettiReport {
    pub pl: [usize; 2],
    pub nerve: [usize; 2],
    pub reduced: [usize; 2],
    pub nonreduced: [usize; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ValidationOutcome {
    pub even_degree: Option<bool>,
    pub betti: Option<bool>,
    pub accounting: Option<bool>,
}

impl ValidationOutcome {
    pub fn passed(&self) -> bool {
        [self.even_degree, self.betti, self.accounting]
            .iter()
            .all(|v| v.unwrap_or(true))
    }
}

/// Contents of `stats.json`. Everything except `timings_ms` is a
/// deterministic function of the inputs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunStats {
    pub grid: GridSize,
    pub critical_edges: usize,
    pub jacobi_point_sources: SourceCounts,
    pub segments: ModeCounts<usize>,
    pub higher_simplices: usize,
    pub predicted_removed: usize,
    pub measured_removed: usize,
    pub reduction_percent: f64,
    pub zero_length_reduced_segments: usize,
    /// `degree_histogram[d]` = mesh vertices with `d` critical edges.
    pub degree_histogram: Vec<usize>,
    pub odd_interior_vertices: Vec<u32>,
    pub betti: Option<BettiReport>,
    pub validation: ValidationOutcome,
    pub timings_ms: StageTimings,
}

/// Result of a full pipeline run, before anything touches the disk.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub stats: RunStats,
    pub pl: JacobiGraph,
    pub nonreduced: JacobiGraph,
    pub reduced: JacobiGraph,
}

impl PipelineOutput {
    pub fn graph(&self, mode: GraphModeKey) -> &JacobiGraph {
        match mode {
            GraphModeKey::Pl => &self.pl,
            GraphModeKey::Nonreduced => &self.nonreduced,
            GraphModeKey::Reduced => &self.reduced,
        }
    }
}

fn betti_pair(g: &JacobiGraph) -> [usize; 2] {
    let (b0, b1) = betti01(&g.to_complex());
    [b0, b1]
}

/// Runs extraction, all three drawings and the enabled checks.
pub fn run_pipeline(
    f: &ScalarGrid,
    g: &ScalarGrid,
    validation: Validation,
) -> Result<PipelineOutput, CliError> {
    if !f.same_lattice(g) {
        return Err(CliError::DimensionMismatch {
            f: (f.nx(), f.ny()),
            g: (g.nx(), g.ny()),
        });
    }
    let t = Triangulation::for_grid(f);

    let clock = Instant::now();
    let records = extract_critical_edges(f, g, &t)?;
    let points_time = clock.elapsed();

    let clock = Instant::now();
    let nonreduced = nonreduced_connectivity(&records);
    let nonreduced_time = clock.elapsed();

    let clock = Instant::now();
    let reduced = reduced_connectivity(&records)?;
    let reduced_time = clock.elapsed();

    let pl = pl_graph(&records, &t);
    let timings = StageTimings::from_durations(points_time, nonreduced_time, reduced_time);
    let degrees = check_even_degree(&records, &t);

    let mut outcome = ValidationOutcome::default();
    if validation.even_degree {
        outcome.even_degree = Some(degrees.holds());
    }
    let accounting = reduction_stats(&records, &nonreduced, &reduced, timings);
    if validation.accounting {
        outcome.accounting = Some(accounting.is_ok());
    }
    let stats = match accounting {
        Ok(s) => s,
        Err(e) if validation.accounting => {
            log::error!("{e}");
            return Err(e.into());
        }
        Err(e) => return Err(e.into()),
    };

    let betti = validation.betti.then(|| {
        let (n0, n1) = betti01(&nerve_of_critical_edges(&records));
        BettiReport {
            pl: betti_pair(&pl),
            nerve: [n0, n1],
            reduced: betti_pair(&reduced),
            nonreduced: betti_pair(&nonreduced),
        }
    });
    if let Some(b) = &betti {
        outcome.betti = Some(b.pl == b.nerve && b.pl == b.reduced);
    }

    let mut sources = SourceCounts::default();
    for r in &records {
        match r.source {
            KappaSource::Bilinear => sources.bilinear += 1,
            KappaSource::LinearFallback => sources.linear_fallback += 1,
            KappaSource::Degenerate => sources.degenerate += 1,
        }
    }

    let run_stats = RunStats {
        grid: GridSize {
            nx: f.nx(),
            ny: f.ny(),
        },
        critical_edges: records.len(),
        jacobi_point_sources: sources,
        segments: ModeCounts {
            pl: pl.segment_count(),
            nonreduced: nonreduced.segment_count(),
            reduced: reduced.segment_count(),
        },
        higher_simplices: stats.higher_simplices,
        predicted_removed: stats.predicted_removed,
        measured_removed: stats.measured_removed,
        reduction_percent: stats.reduction_percent,
        zero_length_reduced_segments: stats.zero_length_reduced_segments,
        degree_histogram: degrees.histogram(),
        odd_interior_vertices: degrees.odd_interior.clone(),
        betti,
        validation: outcome,
        timings_ms: timings,
    };
    Ok(PipelineOutput {
        stats: run_stats,
        pl,
        nonreduced,
        reduced,
    })
}

/// Files written by [`cmd_compute`].
#[derive(Debug, Clone)]
pub struct ComputeReport {
    pub stats: RunStats,
    pub stats_path: PathBuf,
    pub segment_files: Vec<PathBuf>,
}

/// Loads the fields, runs the pipeline on a pool of `config.threads` workers
/// and writes `segments_<mode>.<ext>` and `stats.json` into `config.out`.
pub fn cmd_compute(config: &RunConfig) -> Result<ComputeReport, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| CliError::ThreadPool(e.to_string()))?;
    let (f, g) = load_fields(config)?;
    let output = pool.install(|| run_pipeline(&f, &g, config.validation))?;

    fs::create_dir_all(&config.out).map_err(io_err(&config.out))?;
    let mut segment_files = Vec::new();
    for &mode in &config.modes {
        for &format in &config.formats {
            let path = config.out.join(format!(
                "segments_{}.{}",
                mode.mode().name(),
                format.extension()
            ));
            export::export_segments(output.graph(mode), format, &path).map_err(io_err(&path))?;
            segment_files.push(path);
        }
    }
    let stats_path = config.out.join("stats.json");
    let mut json = serde_json::to_string_pretty(&output.stats).expect("stats serialize");
    json.push('\n');
    fs::write(&stats_path, json).map_err(io_err(&stats_path))?;

    Ok(ComputeReport {
        stats: output.stats,
        stats_path,
        segment_files,
    })
}
