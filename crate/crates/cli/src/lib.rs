//! Command implementations for the `qcalat` binary.
//!
//! Each `cmd_*` validates its configuration before computing and writes its
//! result atomically: output goes to a temporary file beside the target that
//! is renamed into place only on success.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use qca_lattice::anisotropy::{anisotropy_map, sphere_stats, AnisotropyError, SphereStats};
use qca_lattice::bounds::{
    bundled_catalog, catalog_csv, load_experiments, max_spread_factor, run_catalog, BoundsError,
    BoundsOptions, Normalization, PhysicalConstants,
};
use qca_lattice::export::{fmt_num, map_csv, surface_csv, to_json, trajectory_csv};
use qca_lattice::lattice::{measure_group_velocity, InternalProfile, LatticeError, PacketDocument};
use qca_lattice::momentum::{dispersion_surface, KernelError};
use qca_lattice::verify::run_checks;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("{0}")]
    InvariantFailure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::InvariantFailure(_) => 1,
            CliError::Config(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

impl From<LatticeError> for CliError {
    fn from(e: LatticeError) -> Self {
        match e {
            LatticeError::Kernel(k) => k.into(),
            LatticeError::UndefinedCentroid { .. } => CliError::Numerical(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<KernelError> for CliError {
    fn from(e: KernelError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<BoundsError> for CliError {
    fn from(e: BoundsError) -> Self {
        match e {
            BoundsError::Io { path, message } => CliError::Io {
                path: path.into(),
                source: io::Error::other(message),
            },
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<AnisotropyError> for CliError {
    fn from(e: AnisotropyError) -> Self {
        CliError::Config(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum RmsChoice {
    #[default]
    PaperRms,
    UnitAverageRms,
}

#[derive(Debug, Parser)]
#[command(name = "qcalat", version, about = "Massless-boson quantum walk on a cubic lattice")]
pub struct Cli {
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Seed for any random sampling.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Output {
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Phase and group velocity on an m³ momentum grid.
    Surface {
        #[arg(long, default_value_t = 32)]
        grid: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Propagate a wave packet and fit its centroid velocity.
    Propagate {
        /// Packet description (JSON).
        #[arg(long)]
        packet: PathBuf,
        /// Override the packet's lattice size.
        #[arg(long)]
        n: Option<usize>,
        /// Override the packet's step count.
        #[arg(long)]
        steps: Option<u64>,
        /// Project the internal state onto each mode's own eigenvector.
        #[arg(long)]
        per_mode: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Sphere statistics and a direction map of the speed deviation.
    Anisotropy {
        /// Polar resolution; the azimuthal resolution is twice this.
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Convert an experiment catalog into lattice-spacing bounds.
    Bounds {
        /// Catalog file; the bundled catalog when absent.
        #[arg(long)]
        experiments: Option<PathBuf>,
        /// Resonator bounds multiply by the spread factor instead of dividing.
        #[arg(long, action = ArgAction::Set, default_value_t = true)]
        paper_compat: bool,
        #[arg(long, value_enum, default_value_t = RmsChoice::PaperRms)]
        normalization: RmsChoice,
        #[command(flatten)]
        output: Output,
    },
    /// Run the self-check suite.
    Verify {
        #[command(flatten)]
        output: Output,
    },
}

/// `--version` text: crate version plus the physical constants in use.
pub fn long_version() -> String {
    let c = PhysicalConstants::default();
    format!(
        "{}\nconstants:\n  hbar_c          {} GeV m\n  planck_length   {} m\n  speed_of_light  {} m/s",
        env!("CARGO_PKG_VERSION"),
        fmt_num(c.hbar_c),
        fmt_num(c.planck_length),
        fmt_num(c.speed_of_light)
    )
}

/// Run a parsed command line on a pool of `cli.threads` workers.
pub fn run(cli: Cli) -> Result<(), CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let seed = cli.seed;
    pool.install(|| match cli.command {
        Command::Surface { grid, output } => cmd_surface(grid, &output),
        Command::Propagate {
            packet,
            n,
            steps,
            per_mode,
            output,
        } => cmd_propagate(&packet, n, steps, per_mode, &output),
        Command::Anisotropy { grid, output } => cmd_anisotropy(grid, &output),
        Command::Bounds {
            experiments,
            paper_compat,
            normalization,
            output,
        } => cmd_bounds(experiments.as_deref(), paper_compat, normalization, &output),
        Command::Verify { output } => cmd_verify(seed, &output),
    })
}

/// Write `contents` to the output target, atomically for files.
fn emit(output: &Output, contents: &str) -> Result<(), CliError> {
    match &output.out {
        None => io::stdout()
            .lock()
            .write_all(contents.as_bytes())
            .map_err(|source| CliError::Io {
                path: PathBuf::from("<stdout>"),
                source,
            }),
        Some(path) => write_atomic(path, contents),
    }
}

fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp-{}", std::process::id()));
    let tmp = PathBuf::from(tmp);
    let result = fs::write(&tmp, contents).and_then(|_| fs::rename(&tmp, path));
    result.map_err(|source| {
        let _ = fs::remove_file(&tmp);
        CliError::Io {
            path: path.to_owned(),
            source,
        }
    })
}

pub fn cmd_surface(grid: usize, output: &Output) -> Result<(), CliError> {
    if !(2..=512).contains(&grid) {
        return Err(CliError::Config(format!("--grid {grid} outside [2, 512]")));
    }
    let samples = dispersion_surface(grid)?;
    let text = match output.format {
        Format::Csv => surface_csv(&samples),
        Format::Json => to_json(&samples),
    };
    emit(output, &text)
}

#[derive(Serialize)]
struct PropagateReport<'a> {
    packet: &'a PacketDocument,
    internal: InternalProfile,
    velocity: [f64; 3],
    analytic: [f64; 3],
    fit_residual: f64,
    trajectory: &'a [qca_lattice::lattice::CentroidSample],
}

pub fn cmd_propagate(
    packet: &Path,
    n: Option<usize>,
    steps: Option<u64>,
    per_mode: bool,
    output: &Output,
) -> Result<(), CliError> {
    let text = fs::read_to_string(packet).map_err(|source| CliError::Io {
        path: packet.to_owned(),
        source,
    })?;
    let mut doc: PacketDocument = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", packet.display())))?;
    if let Some(n) = n {
        doc.n = n;
    }
    if let Some(steps) = steps {
        doc.steps = steps;
    }
    let lattice = doc.lattice()?;
    let internal = if per_mode {
        InternalProfile::PerMode
    } else {
        InternalProfile::Frozen
    };
    let spec = doc.spec()?.with_internal(internal);
    spec.validate(&lattice)?;
    let m = measure_group_velocity(&lattice, &spec, doc.steps, doc.sample_every)?;
    let body = match output.format {
        Format::Csv => trajectory_csv(&m.trajectory.samples),
        Format::Json => to_json(&PropagateReport {
            packet: &doc,
            internal,
            velocity: m.velocity.as_array(),
            analytic: m.analytic.as_array(),
            fit_residual: m.fit_residual,
            trajectory: &m.trajectory.samples,
        }),
    };
    emit(output, &body)
}

#[derive(Serialize)]
struct AnisotropyReport<'a> {
    stats: &'a SphereStats,
    spread: f64,
    map: &'a [qca_lattice::anisotropy::MapSample],
}

pub fn cmd_anisotropy(grid: usize, output: &Output) -> Result<(), CliError> {
    if !(16..=1024).contains(&grid) {
        return Err(CliError::Config(format!("--grid {grid} outside [16, 1024]")));
    }
    let stats = sphere_stats(grid, 2 * grid)?;
    let map = anisotropy_map(grid + 1, 2 * grid);
    let body = match output.format {
        Format::Csv => map_csv(&map),
        Format::Json => to_json(&AnisotropyReport {
            stats: &stats,
            spread: stats.spread(),
            map: &map,
        }),
    };
    if output.out.is_some() {
        eprintln!(
            "mean {}  rms {}  rms(4π) {}  spread {}",
            fmt_num(stats.mean),
            fmt_num(stats.rms_unit_average),
            fmt_num(stats.rms_paper_normalization),
            fmt_num(stats.spread())
        );
    }
    emit(output, &body)
}

pub fn cmd_bounds(
    experiments: Option<&Path>,
    paper_compat: bool,
    normalization: RmsChoice,
    output: &Output,
) -> Result<(), CliError> {
    let records = match experiments {
        Some(path) => load_experiments(path)?,
        None => bundled_catalog(),
    };
    let options = BoundsOptions {
        rms_normalization: match normalization {
            RmsChoice::PaperRms => Normalization::PaperRms,
            RmsChoice::UnitAverageRms => Normalization::UnitAverageRms,
        },
        spread_factor: max_spread_factor(),
        paper_compat,
    };
    let entries = run_catalog(&records, &PhysicalConstants::default(), &options)?;
    let body = match output.format {
        Format::Csv => catalog_csv(&entries),
        Format::Json => to_json(&entries),
    };
    emit(output, &body)
}

pub fn cmd_verify(seed: u64, output: &Output) -> Result<(), CliError> {
    let report = run_checks(seed);
    let body = match output.format {
        Format::Csv => {
            let mut s = String::from("name,passed,value,tolerance\n");
            for c in &report.checks {
                s.push_str(&format!(
                    "{},{},{},{}\n",
                    c.name,
                    c.passed,
                    fmt_num(c.value),
                    fmt_num(c.tolerance)
                ));
            }
            s
        }
        Format::Json => to_json(&report),
    };
    emit(output, &body)?;
    let failed: Vec<&str> = report.failures().map(|c| c.name).collect();
    eprintln!(
        "{} of {} checks passed",
        report.checks.len() - failed.len(),
        report.checks.len()
    );
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::InvariantFailure(format!(
            "failed checks: {}",
            failed.join(", ")
        )))
    }
}
