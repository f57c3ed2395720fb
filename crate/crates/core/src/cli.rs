//! Batch command-line front end.
//!
//! Exit codes: 0 success, 1 validation failure (including a failed
//! `verify`), 2 usage error, 3 I/O failure.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::dataset::{self, format_real, Dataset, Format, LabelColumn};
use crate::density::DensityModel;
use crate::diagnostics::DiagnosticsReport;
use crate::error::{Error, Result};
use crate::expansion::{expand, Mode, RunConfig, Shape, DEFAULT_MAX_SWEEPS};
use crate::io::{self as fileio, OracleColumn};
use crate::oracle::{fine_step_expand, OracleConfig};
use crate::projection::principal_2d;
use crate::regions::SafeRegion;

pub const THREADS_ENV: &str = "ADAPTIVE_EPS_THREADS";

#[derive(Debug, Default)]
pub struct CommandOutcome {
    pub exit_code: i32,
    /// Lines for the error stream.
    pub diagnostics: Vec<String>,
    /// Files written.
    pub artifacts: Vec<PathBuf>,
    /// Text for the output stream.
    pub stdout: String,
}

#[derive(Parser, Debug)]
#[command(
    name = "adaptive-eps",
    version,
    about = "Density-adaptive safe perturbation radii"
)]
struct Cli {
    /// Worker threads (results do not depend on it)
    #[arg(long, global = true, env = THREADS_ENV)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute a radius for every point
    Compute(ComputeArgs),
    /// Check computed radii for cross-class overlap
    Verify(VerifyArgs),
    /// Evaluate class densities at query points
    Density(DensityArgs),
    /// Draw points uniformly from one point's safe region
    Sample(SampleArgs),
    /// Emit the full diagnostics report as JSON
    Report(ReportArgs),
    /// Emit a 2-D principal projection with radii for plotting
    PlotData(PlotArgs),
}

#[derive(Args, Debug)]
struct InputArgs {
    /// Labeled dataset (.csv or .json)
    #[arg(long)]
    input: PathBuf,
    /// Label column name or 0-based index (default: last column)
    #[arg(long)]
    label: Option<LabelColumn>,
    /// Z-score features before use
    #[arg(long)]
    normalize: bool,
}

#[derive(Args, Debug)]
struct ComputeArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Kernel shape, a positive number or `auto`
    #[arg(long, default_value = "auto")]
    shape: String,
    /// Smallest step before a point stops growing
    #[arg(long, default_value = "1e-20")]
    min_step: f64,
    /// `paper` or `strict` (no cross-class overlap)
    #[arg(long, default_value = "paper")]
    mode: String,
    /// Safety cap on the number of sweeps
    #[arg(long, default_value_t = DEFAULT_MAX_SWEEPS)]
    max_sweeps: usize,
    /// In-place row-order sweeps (order dependent)
    #[arg(long)]
    sequential: bool,
    /// Allow a dataset with one class
    #[arg(long)]
    single_class: bool,
    /// Add fine-step reference radii as extra columns
    #[arg(long)]
    oracle: bool,
    #[arg(long, default_value_t = 1e-4)]
    oracle_step: f64,
    /// Radii CSV; run metadata goes to `<output>.json`
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    radii: PathBuf,
    /// Largest tolerated overlap
    #[arg(long, default_value_t = 1e-12)]
    tolerance: f64,
}

#[derive(Args, Debug)]
struct DensityArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value = "auto")]
    shape: String,
    /// Query points, one numeric row each
    #[arg(long)]
    query: PathBuf,
    /// Only this class
    #[arg(long)]
    class: Option<String>,
    /// Defaults to stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    radii: PathBuf,
    /// 0-based row index of the region center
    #[arg(long)]
    point: usize,
    #[arg(long)]
    count: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct ReportArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    radii: PathBuf,
    /// Used only when the radii file has no density column
    #[arg(long, default_value = "auto")]
    shape: String,
    #[arg(long, default_value_t = 1e-12)]
    tolerance: f64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PlotArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    radii: PathBuf,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    config: &'a RunConfig,
    points: usize,
    classes: usize,
    dim: usize,
    sweeps: usize,
    capped_points: usize,
    elapsed_seconds: f64,
}

/// Parse `argv` (program name first) and run the command.
pub fn run_cli<I, T>(argv: I) -> CommandOutcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                CommandOutcome {
                    exit_code: 2,
                    diagnostics: vec![text.trim_end().to_owned()],
                    ..Default::default()
                }
            } else {
                CommandOutcome {
                    stdout: text,
                    ..Default::default()
                }
            };
        }
    };

    let mut out = CommandOutcome::default();
    let result = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(cli.command, &mut out)),
            Err(e) => Err(Error::InvalidParameter(format!("thread pool: {e}"))),
        },
        None => dispatch(cli.command, &mut out),
    };
    if let Err(e) = result {
        out.exit_code = match e {
            Error::Io { .. } => 3,
            _ => 1,
        };
        out.diagnostics.push(format!("error: {e}"));
    }
    out
}

fn dispatch(cmd: Command, out: &mut CommandOutcome) -> Result<()> {
    match cmd {
        Command::Compute(a) => compute(a, out),
        Command::Verify(a) => verify(a, out),
        Command::Density(a) => density(a, out),
        Command::Sample(a) => sample(a, out),
        Command::Report(a) => report(a, out),
        Command::PlotData(a) => plot_data(a, out),
    }
}

fn read_dataset(path: &Path, label: &LabelColumn) -> Result<Dataset> {
    let file = fileio::open(path)?;
    dataset::load(
        std::io::BufReader::new(file),
        Format::from_path(path),
        label,
    )
}

struct Loaded {
    ds: Dataset,
    normalizer: Option<dataset::Normalizer>,
}

fn load_input(args: &InputArgs, out: &mut CommandOutcome) -> Result<Loaded> {
    let ds = read_dataset(
        &args.input,
        args.label.as_ref().unwrap_or(&LabelColumn::Last),
    )?;
    if ds.is_single_class() {
        out.diagnostics.push(format!(
            "warning: {} has a single class",
            args.input.display()
        ));
    }
    if args.normalize {
        let (z, n) = ds.normalized();
        Ok(Loaded {
            ds: z,
            normalizer: Some(n),
        })
    } else {
        Ok(Loaded {
            ds,
            normalizer: None,
        })
    }
}

fn load_radii(path: &Path, ds: &Dataset) -> Result<fileio::RadiiTable> {
    let table = fileio::read_radii(std::io::BufReader::new(fileio::open(path)?))?;
    table.check_against(ds)?;
    Ok(table)
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |e| Error::io(path, e)
}

fn sink(path: &Option<PathBuf>, out: &mut CommandOutcome, body: Vec<u8>) -> Result<()> {
    match path {
        Some(p) => {
            fileio::write_atomic(p, |w| w.write_all(&body).map_err(io_err(p)))?;
            out.artifacts.push(p.clone());
        }
        None => out.stdout.push_str(&String::from_utf8_lossy(&body)),
    }
    Ok(())
}

fn compute(a: ComputeArgs, out: &mut CommandOutcome) -> Result<()> {
    // normalization happens inside expand so the sidecar records it
    let ds = read_dataset(
        &a.input.input,
        a.input.label.as_ref().unwrap_or(&LabelColumn::Last),
    )?;
    let cfg = RunConfig {
        min_step: a.min_step,
        shape: a.shape.parse()?,
        mode: a.mode.parse()?,
        max_sweeps: a.max_sweeps,
        normalize: a.input.normalize,
        sequential: a.sequential,
        single_class: a.single_class,
    };
    if ds.is_single_class() {
        out.diagnostics.push(format!(
            "warning: {} has a single class",
            a.input.input.display()
        ));
    }
    let started = Instant::now();
    let result = expand(&ds, &cfg)?;
    let elapsed = started.elapsed().as_secs_f64();

    let capped = result.capped();
    if !capped.is_empty() {
        out.diagnostics.push(format!(
            "warning: {} points hit the sweep cap of {}",
            capped.len(),
            cfg.max_sweeps
        ));
    }

    let oracle = if a.oracle {
        if cfg.mode != Mode::Strict {
            out.diagnostics
                .push("warning: the oracle follows strict-mode semantics".into());
        }
        let work = if cfg.normalize {
            ds.normalized().0
        } else {
            ds.clone()
        };
        let shape = match result.config.shape {
            Shape::Fixed(v) => v,
            Shape::Auto => unreachable!("expand resolves the shape"),
        };
        Some(fine_step_expand(
            &work,
            &OracleConfig {
                fine_step: a.oracle_step,
                min_step: cfg.min_step,
                shape,
            },
        )?)
    } else {
        None
    };

    fileio::write_atomic(&a.output, |w| {
        fileio::write_radii(w, &ds, &result, oracle.as_deref().map(OracleColumn))
    })?;
    out.artifacts.push(a.output.clone());

    let mut sidecar_path = a.output.clone().into_os_string();
    sidecar_path.push(".json");
    let sidecar_path = PathBuf::from(sidecar_path);
    let sidecar = Sidecar {
        config: &result.config,
        points: ds.len(),
        classes: ds.classes().len(),
        dim: ds.dim(),
        sweeps: result.sweeps,
        capped_points: capped.len(),
        elapsed_seconds: elapsed,
    };
    fileio::write_atomic(&sidecar_path, |w| {
        serde_json::to_writer_pretty(&mut *w, &sidecar)
            .map_err(|e| Error::Format(e.to_string()))?;
        w.write_all(b"\n").map_err(io_err(&sidecar_path))
    })?;
    out.artifacts.push(sidecar_path);
    Ok(())
}

fn verify(a: VerifyArgs, out: &mut CommandOutcome) -> Result<()> {
    let Loaded { ds, .. } = load_input(&a.input, out)?;
    let table = load_radii(&a.radii, &ds)?;
    let eps = &table.epsilons;
    let mut violations = 0usize;
    let mut worst: Option<(usize, usize, f64)> = None;
    for (i, j) in dataset::cross_class_pairs(&ds) {
        let slack = crate::dataset::euclidean(ds.coords(i), ds.coords(j)) - (eps[i] + eps[j]);
        if slack < -a.tolerance {
            violations += 1;
        }
        if worst.is_none_or(|(_, _, w)| slack < w) {
            worst = Some((i, j, slack));
        }
    }
    if let Some((i, j, s)) = worst {
        out.diagnostics.push(format!(
            "smallest cross-class slack {} between points {i} and {j}",
            format_real(s)
        ));
    }
    if violations > 0 {
        out.diagnostics.push(format!(
            "FAIL: {violations} cross-class pairs overlap by more than {}",
            a.tolerance
        ));
        out.exit_code = 1;
    } else {
        out.diagnostics.push("OK: no cross-class overlap".into());
    }
    Ok(())
}

fn density(a: DensityArgs, out: &mut CommandOutcome) -> Result<()> {
    let Loaded { ds, normalizer } = load_input(&a.input, out)?;
    let shape = a.shape.parse::<Shape>()?.resolve(&ds)?;
    let model = DensityModel::new(&ds, shape)?;
    let mut queries = dataset::load_unlabeled(std::io::BufReader::new(fileio::open(&a.query)?))?;
    if let Some(n) = &normalizer {
        queries = queries.iter().map(|q| n.forward(q)).collect();
    }
    let classes: Vec<_> = match &a.class {
        Some(c) => {
            let id = dataset::ClassId(c.clone());
            if ds.class_index(&id).is_none() {
                return Err(Error::UnknownClass(c.clone()));
            }
            vec![id]
        }
        None => ds.classes().to_vec(),
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    let fmt = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(["query_index", "class_id", "density"])
        .map_err(fmt)?;
    for (q, x) in queries.iter().enumerate() {
        for c in &classes {
            let rho = model.class_density(x, c)?;
            w.write_record([q.to_string(), c.to_string(), format_real(rho)])
                .map_err(fmt)?;
        }
    }
    let body = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    sink(&a.output, out, body)
}

fn sample(a: SampleArgs, out: &mut CommandOutcome) -> Result<()> {
    let Loaded { ds, normalizer } = load_input(&a.input, out)?;
    let table = load_radii(&a.radii, &ds)?;
    let region = SafeRegion::of_point(&ds, &table.epsilons, a.point)?;
    let points = region.sample(a.count, a.seed)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let fmt = |e: csv::Error| Error::Format(e.to_string());
    w.write_record((0..ds.dim()).map(|k| format!("x{k}")))
        .map_err(fmt)?;
    for p in &points {
        // back to raw feature units when the region lives in z-scores
        let p = match &normalizer {
            Some(n) => n.inverse(p),
            None => p.clone(),
        };
        w.write_record(p.iter().map(|&v| format_real(v)))
            .map_err(fmt)?;
    }
    let body = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    sink(&Some(a.output), out, body)
}

fn report(a: ReportArgs, out: &mut CommandOutcome) -> Result<()> {
    let Loaded { ds, .. } = load_input(&a.input, out)?;
    let table = load_radii(&a.radii, &ds)?;
    let densities = match table.densities {
        Some(d) => d,
        None => {
            let shape = a.shape.parse::<Shape>()?.resolve(&ds)?;
            DensityModel::new(&ds, shape)?.self_densities()
        }
    };
    let report = DiagnosticsReport::build(&ds, &table.epsilons, &densities, a.tolerance)?;
    let mut body = serde_json::to_vec_pretty(&report).map_err(|e| Error::Format(e.to_string()))?;
    body.push(b'\n');
    sink(&a.output, out, body)
}

fn plot_data(a: PlotArgs, out: &mut CommandOutcome) -> Result<()> {
    let Loaded { ds, .. } = load_input(&a.input, out)?;
    let table = load_radii(&a.radii, &ds)?;
    let proj = principal_2d(&ds);
    let mut w = csv::Writer::from_writer(Vec::new());
    let fmt = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(["pc1", "pc2", "class_id", "epsilon"])
        .map_err(fmt)?;
    for (i, xy) in proj.iter().enumerate() {
        w.write_record([
            format_real(xy[0]),
            format_real(xy[1]),
            ds.class_id(i).to_string(),
            format_real(table.epsilons[i]),
        ])
        .map_err(fmt)?;
    }
    let body = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    sink(&Some(a.output), out, body)
}
