use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use lmtree::data::{normalize, split};
use lmtree::{
    evaluate, lm_pocket_train, train_pairwise, Classifier, Dataset, Evaluation, ModelFile,
    PairwiseConfig, PocketConfig, ResetMode, SfsConfig, SplitSpec, ThermalConfig, TrainedModel,
    TrainerConfig, TrainingEcho,
};

use crate::{load_dataset, output, with_jobs, Common, CsvArgs, SynthArgs};

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Lm,
    Pairwise,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TrainerKind {
    Pocket,
    Thermal,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ResetArg {
    Standard,
    PaperLiteral,
}

#[derive(Args)]
pub struct TrainArgs {
    /// Training CSV; omit to train on synthetic data (--classes ...).
    #[arg(long)]
    data: Option<PathBuf>,
    #[command(flatten)]
    csv: CsvArgs,
    #[command(flatten)]
    synth: SynthArgs,
    #[command(flatten)]
    common: Common,
    /// Model file to write.
    #[arg(long)]
    out: PathBuf,
    /// Run report (metrics CSV).
    #[arg(long)]
    report: Option<PathBuf>,
    /// Per-test error and feature-count table (pairwise only).
    #[arg(long)]
    test_report: Option<PathBuf>,

    #[arg(long, value_enum, default_value = "pairwise")]
    model: ModelKind,
    #[arg(long, value_enum, default_value = "pocket")]
    trainer: TrainerKind,
    /// Training iterations per trained unit (default: its example count).
    #[arg(long)]
    epochs: Option<usize>,
    /// Pocket correction amount.
    #[arg(long)]
    c: Option<f64>,
    #[arg(long, value_enum)]
    reset_mode: Option<ResetArg>,
    #[arg(long)]
    beta0: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,

    /// Maximum features per pairwise test (default: ceil(5m/6)).
    #[arg(long)]
    nf: Option<usize>,
    /// Selection attempts per pairwise test.
    #[arg(long, default_value_t = 5)]
    nt: usize,
    #[arg(long, default_value_t = 0.10)]
    drop_threshold: f64,
    /// Share of each pair's data used to fit weights during selection.
    #[arg(long, default_value_t = 2.0 / 3.0)]
    fit_fraction: f64,

    /// Share of examples used for training; the rest is held out.
    #[arg(long, default_value_t = 2.0 / 3.0)]
    train_fraction: f64,
    /// Keep every recording on one side of the split.
    #[arg(long)]
    by_recording: bool,
}

impl TrainArgs {
    fn thermal_flags(&self) -> bool {
        self.beta0.is_some() || self.epsilon.is_some() || self.a.is_some() || self.b.is_some()
    }

    fn pocket(&self) -> PocketConfig {
        let d = PocketConfig::default();
        PocketConfig {
            epochs: self.epochs,
            c: self.c.unwrap_or(d.c),
            reset_mode: match self.reset_mode {
                Some(ResetArg::PaperLiteral) => ResetMode::PaperLiteral,
                _ => ResetMode::Standard,
            },
        }
    }

    fn trainer(&self) -> Result<TrainerConfig> {
        Ok(match self.trainer {
            TrainerKind::Pocket => {
                if self.thermal_flags() {
                    bail!("--beta0/--epsilon/--a/--b need --trainer thermal");
                }
                TrainerConfig::Pocket(self.pocket())
            }
            TrainerKind::Thermal => {
                if self.c.is_some() || self.reset_mode.is_some() {
                    bail!("--c and --reset-mode apply to the pocket trainer only");
                }
                let d = ThermalConfig::default();
                let cfg = ThermalConfig {
                    epochs: self.epochs,
                    beta0: self.beta0.unwrap_or(d.beta0),
                    epsilon: self.epsilon.unwrap_or(d.epsilon),
                    a: self.a.unwrap_or(d.a),
                    b: self.b.unwrap_or(d.b),
                };
                cfg.validate()?;
                TrainerConfig::Thermal(cfg)
            }
        })
    }

    fn check_conflicts(&self) -> Result<()> {
        if self.model == ModelKind::Lm {
            if self.trainer == TrainerKind::Thermal || self.thermal_flags() {
                bail!("the linear machine is trained by the pocket algorithm only");
            }
            if self.nf.is_some() || self.test_report.is_some() {
                bail!("--nf and --test-report apply to --model pairwise only");
            }
        }
        Ok(())
    }
}

fn write_report(
    path: &std::path::Path,
    train: &Evaluation,
    test: &Evaluation,
    seconds: f64,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(output(Some(path))?);
    w.write_record(["metric", "value"])?;
    let opt = |v: Option<f64>| v.map_or(String::new(), |v| v.to_string());
    let rows = [
        ("train_segments", train.segments.to_string()),
        ("test_segments", test.segments.to_string()),
        ("train_segment_accuracy", train.segment_accuracy.to_string()),
        ("test_segment_accuracy", test.segment_accuracy.to_string()),
        ("train_recordings", train.recordings.to_string()),
        ("test_recordings", test.recordings.to_string()),
        ("train_recording_accuracy", opt(train.recording_accuracy)),
        ("test_recording_accuracy", opt(test.recording_accuracy)),
        ("wall_seconds", format!("{seconds:.3}")),
    ];
    for (k, v) in rows {
        w.write_record([k, v.as_str()])?;
    }
    w.flush()?;
    Ok(())
}

fn write_test_report(
    path: &std::path::Path,
    model: &lmtree::PairwiseEnsemble,
    ds: &Dataset,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(output(Some(path))?);
    w.write_record([
        "positive",
        "negative",
        "positive_label",
        "negative_label",
        "training_error",
        "feature_count",
        "features",
    ])?;
    for t in model.tests() {
        let features: Vec<String> = t.tlu.features().iter().map(ToString::to_string).collect();
        w.write_record([
            t.positive.to_string(),
            t.negative.to_string(),
            ds.class_labels()[t.positive - 1].to_string(),
            ds.class_labels()[t.negative - 1].to_string(),
            t.training_error.to_string(),
            t.feature_count().to_string(),
            features.join(" "),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn run(args: TrainArgs) -> Result<()> {
    args.check_conflicts()?;
    let trainer = args.trainer()?;
    let seed = args.common.seed;
    let started = Instant::now();

    let raw = load_dataset(args.data.as_deref(), &args.csv, &args.synth, seed)?;
    let (ds, params) = normalize(&raw)?;
    let split_spec = SplitSpec {
        by_recording: args.by_recording,
        ..SplitSpec::new(args.train_fraction, seed)
    };
    let (train, test) = split(&ds, &split_spec)?;

    let mut echo = TrainingEcho {
        seed,
        train_fraction: Some(args.train_fraction),
        by_recording: args.by_recording,
        ..TrainingEcho::default()
    };
    let model = match args.model {
        ModelKind::Lm => {
            let cfg = args.pocket();
            let (lm, _) = lm_pocket_train(&train, &cfg, seed)?;
            echo.linear_machine = Some(cfg);
            TrainedModel::LinearMachine(lm)
        }
        ModelKind::Pairwise => {
            let cfg = PairwiseConfig {
                trainer,
                selector: SfsConfig {
                    max_features: args.nf,
                    attempts: args.nt,
                    drop_threshold: args.drop_threshold,
                    fit_fraction: args.fit_fraction,
                    seed,
                    ..SfsConfig::default()
                },
            };
            let pe = with_jobs(args.common.jobs, || train_pairwise(&train, &cfg, seed))??;
            if let Some(path) = &args.test_report {
                write_test_report(path, &pe, &ds)?;
            }
            echo.pairwise = Some(cfg);
            TrainedModel::Pairwise(pe)
        }
    };

    let train_eval = evaluate(&model, &train)?;
    let test_eval = evaluate(&model, &test)?;
    let file = ModelFile::new(
        &model,
        ds.feature_names_or_default(),
        ds.class_labels().to_vec(),
        Some(params),
        echo,
    )?;
    file.save(&args.out)?;
    let seconds = started.elapsed().as_secs_f64();
    if let Some(path) = &args.report {
        write_report(path, &train_eval, &test_eval, seconds)?;
    }

    let mut err = std::io::stderr().lock();
    writeln!(
        err,
        "{}: {} classes, {} features, {} train / {} test segments",
        model.kind(),
        model.n_classes(),
        model.n_features(),
        train.len(),
        test.len()
    )?;
    writeln!(
        err,
        "segment accuracy: train {:.4}, test {:.4}",
        train_eval.segment_accuracy, test_eval.segment_accuracy
    )?;
    if let (Some(a), Some(b)) = (train_eval.recording_accuracy, test_eval.recording_accuracy) {
        writeln!(err, "recording accuracy: train {a:.4}, test {b:.4}")?;
    }
    writeln!(err, "wrote {} in {seconds:.1}s", args.out.display())?;
    Ok(())
}
