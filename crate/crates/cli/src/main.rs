mod analyze;
mod predict;
mod train;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use lmtree::data::{generate_synthetic, load_csv, write_csv, ColumnRef, CsvSchema};
use lmtree::{Dataset, SynthSpec};

#[derive(Parser)]
#[command(
    name = "lmtree",
    version,
    about = "Pairwise linear-test ensembles and linear machines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a linear machine or a pairwise ensemble and write a model file.
    Train(Box<train::TrainArgs>),
    /// Classify the rows of a CSV with a saved model.
    Predict(predict::PredictArgs),
    /// Feature significance and per-class 3-sigma intervals.
    Analyze(analyze::AnalyzeArgs),
    /// Write a synthetic overlapping-class dataset as CSV.
    Synth(SynthCmd),
}

#[derive(Args, Clone)]
pub struct Common {
    /// Master seed; every random stream is derived from it.
    #[arg(long, env = "LMTREE_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Args, Clone)]
pub struct CsvArgs {
    /// Label column, by name or 0-based index.
    #[arg(long, default_value = "label")]
    pub label_col: ColumnRef,
    /// Recording-id column, by name or 0-based index (default: `recording`
    /// when the header has it).
    #[arg(long)]
    pub recording_col: Option<ColumnRef>,
}

impl CsvArgs {
    pub fn schema(&self, path: &Path) -> Result<CsvSchema> {
        let recording = match &self.recording_col {
            Some(c) => Some(c.clone()),
            None => {
                let mut rdr = csv::Reader::from_path(path)
                    .with_context(|| format!("opening {}", path.display()))?;
                let has = rdr.headers()?.iter().any(|h| h.trim() == "recording");
                has.then(|| ColumnRef::Name("recording".into()))
            }
        };
        Ok(CsvSchema {
            label: self.label_col.clone(),
            recording,
        })
    }
}

#[derive(Args, Clone, Default)]
pub struct SynthArgs {
    #[arg(long)]
    pub classes: Option<usize>,
    #[arg(long, default_value_t = 20)]
    pub features: usize,
    #[arg(long, default_value_t = 200)]
    pub per_class: usize,
    #[arg(long, default_value_t = 1.0)]
    pub overlap: f64,
    #[arg(long, default_value_t = 0)]
    pub noise_features: usize,
    /// Group consecutive segments of a class into recordings of this size.
    #[arg(long)]
    pub segments_per_recording: Option<usize>,
}

impl SynthArgs {
    pub fn spec(&self, classes: usize, seed: u64) -> SynthSpec {
        SynthSpec {
            classes,
            features: self.features,
            per_class: self.per_class,
            overlap: self.overlap,
            noise_features: self.noise_features,
            seed,
            segments_per_recording: self.segments_per_recording,
        }
    }
}

#[derive(Args)]
struct SynthCmd {
    #[command(flatten)]
    synth: SynthArgs,
    #[command(flatten)]
    common: Common,
    /// Output CSV (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Dataset from `--data` or from the synthetic generator flags.
pub fn load_dataset(
    data: Option<&Path>,
    csv: &CsvArgs,
    synth: &SynthArgs,
    seed: u64,
) -> Result<Dataset> {
    match (data, synth.classes) {
        (Some(_), Some(_)) => bail!("--data conflicts with --classes; pass one data source"),
        (Some(path), None) => load_csv(path, &csv.schema(path)?)
            .with_context(|| format!("loading {}", path.display())),
        (None, Some(classes)) => Ok(generate_synthetic(&synth.spec(classes, seed))?),
        (None, None) => bail!("no data: pass --data FILE or --classes N for synthetic data"),
    }
}

/// Buffered writer to a file, or stdout when `path` is `None`.
pub fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        None => Ok(f()),
        Some(0) => bail!("--jobs must be at least 1"),
        Some(n) => Ok(rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()?
            .install(f)),
    }
}

fn synth(cmd: SynthCmd) -> Result<()> {
    let Some(classes) = cmd.synth.classes else {
        bail!("--classes is required");
    };
    let ds = generate_synthetic(&cmd.synth.spec(classes, cmd.common.seed))?;
    let mut out = output(cmd.out.as_deref())?;
    write_csv(&ds, &mut out)?;
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let result = match Cli::parse().command {
        Command::Train(args) => train::run(*args),
        Command::Predict(args) => predict::run(args),
        Command::Analyze(args) => analyze::run(args),
        Command::Synth(cmd) => synth(cmd),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
