use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{ArgAction, Parser, Subcommand, ValueEnum};

use fourier3::gpe::{simulate_with, Diagnostics};
use fourier3::nonuniform::{eval_nufft, NufftParams, PointSet};
use fourier3::snapshot::{sf2psihat, Snapshot};
use fourier3::tube::{tube_eval_with, Keep, TubeOptions};
use fourier3::vortex::{initial_condition, pade_coefficients};

use crate::error::{CliError, Result};
use crate::field::{write_grid_field, FieldOptions};
use crate::grid::GridSpec;
use crate::manifest::RunManifest;
use crate::table::{num, read_points, write_cloud, write_values};

/// Vortex simulations with the Gross-Pitaevskii equation and fast evaluation
/// of the saved Fourier series.
#[derive(Debug, Parser)]
#[command(name = "fourier3", version)]
pub struct Cli {
    /// Worker threads for the parallel parts (default: one per core).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Log more; repeat for debug output. `RUST_LOG` overrides.
    #[arg(short, long, action = ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate from straight vortex lines and save snapshots.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory, instead of the config's `output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a snapshot on a rectilinear grid and write the density.
    EvalGrid {
        #[arg(long)]
        snapshot: PathBuf,
        /// `equispaced M1 M2 M3 a1 b1 a2 b2 a3 b3`, `clustered ... [c]`,
        /// `computational`, `physical` or `file PATH`.
        #[arg(long)]
        grid: String,
        /// Output prefix; `.hdr` and `.raw` are appended.
        #[arg(long)]
        out: PathBuf,
        /// Also write a legacy VTK file.
        #[arg(long)]
        vtk: bool,
        /// Also write the complex values.
        #[arg(long)]
        complex: bool,
        /// Report how many grid points have density at or below this value.
        #[arg(long)]
        filter: Option<f64>,
    },
    /// Evaluate a snapshot at scattered points from a CSV file.
    EvalPoints {
        #[arg(long)]
        snapshot: PathBuf,
        /// CSV with columns x1,x2,x3; `-` reads standard input.
        #[arg(long)]
        points: PathBuf,
        /// Output CSV; standard output if absent or `-`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Target accuracy of the fast evaluation, relative to the sum of
        /// coefficient magnitudes.
        #[arg(long)]
        accuracy: Option<f64>,
    },
    /// Collect points near the vortex cores by local refinement.
    Tube {
        #[arg(long)]
        snapshot: PathBuf,
        /// Density thresholds, one per refinement level, e.g. `0.2,0.05`.
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true, allow_negative_numbers = true)]
        rhobar: Vec<f64>,
        /// Keep only points with density at or below this value.
        #[arg(long)]
        filter: Option<f64>,
        /// Output CSV; standard output if absent or `-`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = KeepArg::BelowThreshold)]
        keep: KeepArg,
        #[arg(long)]
        accuracy: Option<f64>,
    },
    /// Print time, mass and energy of snapshots as CSV.
    Diag {
        #[arg(long, num_args = 1.., required = true)]
        snapshot: Vec<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KeepArg {
    /// Points of every level below the last threshold.
    BelowThreshold,
    /// Every stencil point of the last level.
    FinalLevel,
}

impl From<KeepArg> for Keep {
    fn from(k: KeepArg) -> Self {
        match k {
            KeepArg::BelowThreshold => Keep::BelowThreshold,
            KeepArg::FinalLevel => Keep::FinalLevel,
        }
    }
}

pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Threads(e.to_string()))?;
    }
    match cli.command {
        Command::Simulate { config, out } => simulate(&config, out, stdout),
        Command::EvalGrid {
            snapshot,
            grid,
            out,
            vtk,
            complex,
            filter,
        } => {
            let options = FieldOptions {
                complex,
                vtk,
                count_below: filter,
            };
            eval_grid(&snapshot, &grid, &out, options, stdout)
        }
        Command::EvalPoints {
            snapshot,
            points,
            out,
            accuracy,
        } => eval_points(&snapshot, &points, out.as_deref(), params(accuracy)?, stdout),
        Command::Tube {
            snapshot,
            rhobar,
            filter,
            out,
            keep,
            accuracy,
        } => {
            let options = TubeOptions {
                params: params(accuracy)?,
                keep: keep.into(),
            };
            tube(&snapshot, &rhobar, filter, options, out.as_deref(), stdout)
        }
        Command::Diag { snapshot } => diag(&snapshot, stdout),
    }
}

fn params(accuracy: Option<f64>) -> Result<NufftParams> {
    match accuracy {
        None => Ok(NufftParams::default()),
        Some(eps) if eps > 0.0 && eps < 1.0 => Ok(NufftParams::for_accuracy(eps)),
        Some(eps) => Err(fourier3::Error::InvalidNufftParams(format!("accuracy {eps} must lie in (0, 1)")).into()),
    }
}

fn load(path: &Path) -> Result<Snapshot> {
    Snapshot::load(path).map_err(|e| match e {
        fourier3::Error::Io(source) => CliError::File {
            path: path.to_path_buf(),
            source,
        },
        other => other.into(),
    })
}

/// Standard output for `None` or `-`, else a new file.
fn sink<'a>(out: Option<&Path>, stdout: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>> {
    match out {
        Some(p) if p != Path::new("-") => Ok(Box::new(BufWriter::new(File::create(p).map_err(CliError::file(p))?))),
        _ => Ok(Box::new(stdout)),
    }
}

fn to_file(out: Option<&Path>) -> bool {
    out.is_some_and(|p| p != Path::new("-"))
}

fn io(e: std::io::Error) -> CliError {
    CliError::Core(e.into())
}

fn simulate(config: &Path, out: Option<PathBuf>, stdout: &mut dyn Write) -> Result<()> {
    let mut manifest = RunManifest::load(config)?;
    if let Some(dir) = out {
        manifest.output_dir = dir;
    }
    let dir = manifest.output_dir.clone();
    std::fs::create_dir_all(&dir).map_err(CliError::file(&dir))?;

    let profile = pade_coefficients(4)?;
    let cfg = manifest.config;
    let initial = initial_condition(&cfg.physical_domain, cfg.grid, &manifest.vortex_specs()?, &profile);
    log::info!(
        "{} vortices, computational grid {:?}, {} steps to t = {}",
        manifest.vortices.len(),
        cfg.computational_size().dims(),
        cfg.steps,
        cfg.final_time
    );

    let diag_path = dir.join("diagnostics.csv");
    let mut diag = BufWriter::new(File::create(&diag_path).map_err(CliError::file(&diag_path))?);
    writeln!(diag, "snapshot,t,mass,kinetic,quartic,energy").map_err(io)?;
    let mut index = 0;
    let report = simulate_with(&cfg, &initial, |snap| {
        let name = manifest.snapshot_name(index);
        snap.save(dir.join(&name))?;
        let d = Diagnostics::of(&snap.computational_field(), snap.t());
        writeln!(diag, "{name},{},{},{},{},{}", num(d.t), num(d.mass), num(d.kinetic), num(d.quartic), num(d.energy()))?;
        index += 1;
        Ok(())
    })?;
    diag.flush().map_err(CliError::file(&diag_path))?;

    // The copy of the manifest lives next to the snapshots it names.
    let mut saved = manifest.clone();
    saved.output_dir = PathBuf::from(".");
    let manifest_path = dir.join("run.cfg");
    std::fs::write(&manifest_path, saved.to_string()).map_err(CliError::file(&manifest_path))?;

    let (a, b) = (report.initial, report.last);
    let drift = (b.mass - a.mass).abs() / a.mass;
    let lines = [
        format!("snapshots = {index} in {}", dir.display()),
        format!("initial_mass = {}", num(a.mass)),
        format!("initial_energy = {}", num(a.energy())),
        format!("final_mass = {}", num(b.mass)),
        format!("final_energy = {}", num(b.energy())),
        format!("relative_mass_drift = {drift:.3e}"),
    ];
    writeln!(stdout, "{}", lines.join("\n")).map_err(io)
}

fn eval_grid(snapshot: &Path, grid: &str, out: &Path, options: FieldOptions, stdout: &mut dyn Write) -> Result<()> {
    let spec = GridSpec::parse(grid)?;
    let snap = load(snapshot)?;
    let grid = spec.resolve(&snap);
    let stats = write_grid_field(&sf2psihat(&snap), &grid, snap.t(), out, options)?;
    writeln!(stdout, "points = {}", stats.points).map_err(io)?;
    if stats.points > 0 {
        writeln!(stdout, "rho_min = {}\nrho_max = {}", num(stats.min), num(stats.max)).map_err(io)?;
    }
    if let (Some(t), Some(n)) = (options.count_below, stats.below) {
        writeln!(stdout, "points_with_rho_at_most_{} = {n}", num(t)).map_err(io)?;
    }
    Ok(())
}

fn eval_points(snapshot: &Path, points: &Path, out: Option<&Path>, params: NufftParams, stdout: &mut dyn Write) -> Result<()> {
    let snap = load(snapshot)?;
    let pts = if points == Path::new("-") {
        read_points(std::io::stdin().lock(), "stdin")?
    } else {
        let file = File::open(points).map_err(CliError::file(points))?;
        read_points(BufReader::new(file), &points.display().to_string())?
    };
    let set = PointSet::new(pts);
    let result = eval_nufft(&sf2psihat(&snap), &set, params)?;
    if result.accuracy.is_degraded() {
        log::warn!("requested accuracy not reachable: {:?}", result.accuracy);
    }
    let file = to_file(out);
    write_values(sink(out, stdout)?, set.points(), &result.values)?;
    if file {
        writeln!(stdout, "points = {}", set.len()).map_err(io)?;
    }
    Ok(())
}

fn tube(
    snapshot: &Path,
    rhobar: &[f64],
    filter: Option<f64>,
    options: TubeOptions,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<()> {
    let snap = load(snapshot)?;
    let cloud = tube_eval_with(&snap, rhobar, filter, options)?;
    let file = to_file(out);
    write_cloud(sink(out, stdout)?, &cloud)?;
    let summary = format!("points = {}", cloud.len());
    if file {
        writeln!(stdout, "{summary}").map_err(io)?;
    } else {
        log::info!("{summary}");
    }
    Ok(())
}

fn diag(snapshots: &[PathBuf], stdout: &mut dyn Write) -> Result<()> {
    writeln!(stdout, "snapshot,t,mass,kinetic,quartic,energy").map_err(io)?;
    for path in snapshots {
        let snap = load(path)?;
        let d = Diagnostics::of(&snap.computational_field(), snap.t());
        writeln!(
            stdout,
            "{},{},{},{},{},{}",
            path.display(),
            num(d.t),
            num(d.mass),
            num(d.kinetic),
            num(d.quartic),
            num(d.energy())
        )
        .map_err(io)?;
    }
    Ok(())
}
