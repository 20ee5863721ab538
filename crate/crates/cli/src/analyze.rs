use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use lmtree::analysis::{significance, write_sigma_csv, DEFAULT_ALPHA};
use lmtree::data::load_csv;

use crate::{output, CsvArgs};

#[derive(Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    csv: CsvArgs,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    /// Significance CSV (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-class 3-sigma table.
    #[arg(long)]
    sigma_out: Option<PathBuf>,
    /// 0-based features for the 3-sigma table (default: all).
    #[arg(long, value_delimiter = ',')]
    sigma_features: Vec<usize>,
}

pub fn run(args: AnalyzeArgs) -> Result<()> {
    let ds = load_csv(&args.data, &args.csv.schema(&args.data)?)
        .with_context(|| format!("loading {}", args.data.display()))?;
    let report = significance(&ds, args.alpha)?;
    if let Some(path) = &args.sigma_out {
        let features = if args.sigma_features.is_empty() {
            (0..ds.n_features()).collect()
        } else {
            args.sigma_features.clone()
        };
        write_sigma_csv(&ds, &features, output(Some(path))?)?;
    }
    report.write_csv(output(args.out.as_deref())?)?;
    Ok(())
}
