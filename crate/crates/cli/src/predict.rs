use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use lmtree::data::read_table;
use lmtree::decision::RecordingDecision;
use lmtree::{Classifier, ModelFile};

use crate::{output, CsvArgs};

#[derive(Args)]
pub struct PredictArgs {
    /// Model file written by `train`.
    #[arg(long)]
    model: PathBuf,
    /// Rows to classify; a label column, if present, is ignored.
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    csv: CsvArgs,
    /// Per-row predictions (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-recording vote table.
    #[arg(long)]
    recordings_out: Option<PathBuf>,
}

pub fn run(args: PredictArgs) -> Result<()> {
    let file = ModelFile::load(&args.model)
        .with_context(|| format!("loading {}", args.model.display()))?;
    let predictor = file.predictor()?;
    let reader = BufReader::new(
        File::open(&args.data).with_context(|| format!("opening {}", args.data.display()))?,
    );
    let table = read_table(reader, &args.csv.schema(&args.data)?, false)?;
    if args.recordings_out.is_some() && table.recording_ids.is_none() {
        bail!("--recordings-out needs a recording column");
    }
    if table.feature_names.len() != predictor.n_features() {
        bail!(
            "{} has {} feature columns, the model expects {}",
            args.data.display(),
            table.feature_names.len(),
            predictor.n_features()
        );
    }

    let classes = table
        .rows
        .iter()
        .map(|row| predictor.classify(row))
        .collect::<lmtree::Result<Vec<usize>>>()?;

    let mut w = csv::Writer::from_writer(output(args.out.as_deref())?);
    let ids = table.recording_ids.as_deref();
    if ids.is_some() {
        w.write_record(["row", "recording", "class", "label"])?;
    } else {
        w.write_record(["row", "class", "label"])?;
    }
    for (i, &q) in classes.iter().enumerate() {
        let mut rec = vec![i.to_string()];
        if let Some(ids) = ids {
            rec.push(ids[i].clone());
        }
        rec.push(q.to_string());
        rec.push(predictor.class_label(q).to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;

    if let (Some(path), Some(ids)) = (&args.recordings_out, ids) {
        let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (id, &q) in ids.iter().zip(&classes) {
            groups.entry(id).or_default().push(q);
        }
        let mut w = csv::Writer::from_writer(output(Some(path))?);
        w.write_record([
            "recording",
            "segments",
            "class",
            "label",
            "confidence",
            "histogram",
        ])?;
        for (id, preds) in groups {
            let d = RecordingDecision::from_predictions(predictor.n_classes(), &preds)?;
            let hist: Vec<String> = d.class_histogram.iter().map(ToString::to_string).collect();
            w.write_record([
                id.to_string(),
                d.segments().to_string(),
                d.assigned_class.to_string(),
                predictor.class_label(d.assigned_class).to_string(),
                d.confidence.to_string(),
                hist.join(" "),
            ])?;
        }
        w.flush()?;
    }
    Ok(())
}
