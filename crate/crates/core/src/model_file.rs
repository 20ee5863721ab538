//! Versioned JSON model files.
//!
//! Weights are written in shortest round-trip decimal form, so a loaded
//! model reproduces the saved one bit for bit. Files with an unknown
//! `format_version` are rejected before anything else is parsed.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::NormalizationParams;
use crate::decision::Classifier;
use crate::ensemble::{PairTest, PairwiseConfig, PairwiseEnsemble};
use crate::error::{Error, Result};
use crate::linear_machine::LinearMachine;
use crate::pocket::PocketConfig;

pub const FORMAT_VERSION: u64 = 1;

/// A trained classifier of either kind.
#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    LinearMachine(LinearMachine),
    Pairwise(PairwiseEnsemble),
}

impl TrainedModel {
    pub fn kind(&self) -> &'static str {
        match self {
            TrainedModel::LinearMachine(_) => "linear_machine",
            TrainedModel::Pairwise(_) => "pairwise_ensemble",
        }
    }
}

impl Classifier for TrainedModel {
    fn n_classes(&self) -> usize {
        match self {
            TrainedModel::LinearMachine(m) => m.n_classes(),
            TrainedModel::Pairwise(m) => m.n_classes(),
        }
    }

    fn n_features(&self) -> usize {
        match self {
            TrainedModel::LinearMachine(m) => m.n_features(),
            TrainedModel::Pairwise(m) => m.n_features(),
        }
    }

    fn classify(&self, x: &[f64]) -> Result<usize> {
        match self {
            TrainedModel::LinearMachine(m) => m.classify(x),
            TrainedModel::Pairwise(m) => m.classify(x),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StoredModel {
    LinearMachine {
        /// One row `(w_0, w_1, .., w_m)` per class.
        discriminants: Vec<Vec<f64>>,
    },
    PairwiseEnsemble {
        tests: Vec<PairTest>,
    },
}

/// Settings that produced the model.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainingEcho {
    pub seed: u64,
    pub train_fraction: Option<f64>,
    pub by_recording: bool,
    pub linear_machine: Option<PocketConfig>,
    pub pairwise: Option<PairwiseConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u64,
    pub n_classes: usize,
    pub n_features: usize,
    pub feature_names: Vec<String>,
    /// Original label of class `q` at position `q - 1`.
    pub class_labels: Vec<i64>,
    /// Applied to raw rows before classification.
    pub normalization: Option<NormalizationParams>,
    pub model: StoredModel,
    pub training: TrainingEcho,
}

impl ModelFile {
    pub fn new(
        model: &TrainedModel,
        feature_names: Vec<String>,
        class_labels: Vec<i64>,
        normalization: Option<NormalizationParams>,
        training: TrainingEcho,
    ) -> Result<Self> {
        let stored = match model {
            TrainedModel::LinearMachine(lm) => StoredModel::LinearMachine {
                discriminants: lm.weight_rows().map(<[f64]>::to_vec).collect(),
            },
            TrainedModel::Pairwise(pe) => StoredModel::PairwiseEnsemble {
                tests: pe.tests().to_vec(),
            },
        };
        let file = ModelFile {
            format_version: FORMAT_VERSION,
            n_classes: model.n_classes(),
            n_features: model.n_features(),
            feature_names,
            class_labels,
            normalization,
            model: stored,
            training,
        };
        file.predictor()?;
        Ok(file)
    }

    /// Rebuilds and validates the classifier.
    pub fn model(&self) -> Result<TrainedModel> {
        let model = match &self.model {
            StoredModel::LinearMachine { discriminants } => {
                TrainedModel::LinearMachine(LinearMachine::from_rows(discriminants.clone())?)
            }
            StoredModel::PairwiseEnsemble { tests } => TrainedModel::Pairwise(
                PairwiseEnsemble::new(self.n_classes, self.n_features, tests.clone())?,
            ),
        };
        if model.n_classes() != self.n_classes || model.n_features() != self.n_features {
            return Err(Error::InvalidModel(format!(
                "header says {} classes x {} features, weights say {} x {}",
                self.n_classes,
                self.n_features,
                model.n_classes(),
                model.n_features()
            )));
        }
        Ok(model)
    }

    pub fn predictor(&self) -> Result<Predictor> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::UnsupportedVersion(self.format_version));
        }
        if self.feature_names.len() != self.n_features {
            return Err(Error::InvalidModel(format!(
                "{} feature names for {} features",
                self.feature_names.len(),
                self.n_features
            )));
        }
        if self.class_labels.len() != self.n_classes {
            return Err(Error::InvalidModel(format!(
                "{} class labels for {} classes",
                self.class_labels.len(),
                self.n_classes
            )));
        }
        if let Some(p) = &self.normalization {
            if p.mean.len() != self.n_features || p.sd.len() != self.n_features {
                return Err(Error::InvalidModel(
                    "normalization width differs from the model".into(),
                ));
            }
            if p.mean.iter().chain(&p.sd).any(|v| !v.is_finite()) || p.sd.iter().any(|&s| s < 0.0) {
                return Err(Error::InvalidModel(
                    "invalid normalization parameters".into(),
                ));
            }
        }
        Ok(Predictor {
            model: self.model()?,
            normalization: self.normalization.clone(),
            class_labels: self.class_labels.clone(),
        })
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let version = value
            .get("format_version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| Error::InvalidModel("missing format_version".into()))?;
        if version != FORMAT_VERSION {
            return Err(Error::UnsupportedVersion(version));
        }
        let file: ModelFile = serde_json::from_value(value)?;
        file.predictor()?;
        Ok(file)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Loaded model that classifies raw (unnormalized) rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Predictor {
    model: TrainedModel,
    normalization: Option<NormalizationParams>,
    class_labels: Vec<i64>,
}

impl Predictor {
    pub fn model(&self) -> &TrainedModel {
        &self.model
    }

    pub fn class_label(&self, class: usize) -> i64 {
        self.class_labels[class - 1]
    }

    pub fn prepare(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut v = x.to_vec();
        match &self.normalization {
            Some(p) => p.apply(&mut v)?,
            None if v.len() != self.model.n_features() => {
                return Err(Error::DimensionMismatch {
                    expected: self.model.n_features(),
                    found: v.len(),
                })
            }
            None => {}
        }
        Ok(v)
    }
}

impl Classifier for Predictor {
    fn n_classes(&self) -> usize {
        self.model.n_classes()
    }

    fn n_features(&self) -> usize {
        self.model.n_features()
    }

    fn classify(&self, x: &[f64]) -> Result<usize> {
        self.model.classify(&self.prepare(x)?)
    }
}
