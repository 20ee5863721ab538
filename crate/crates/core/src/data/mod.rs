//! Labeled feature datasets and everything that produces or reshapes them.
//!
//! Class labels are 1-based (`1..=r`), matching the discriminant indexing
//! used throughout the crate. Feature indices are 0-based column offsets.
//! Feature vectors never include the bias component; consumers prepend
//! `x0 = 1` themselves.

mod csv_io;
mod normalize;
mod split;
mod synth;

pub use csv_io::{
    load_csv, read_csv, read_table, save_csv, write_csv, ColumnRef, CsvSchema, FeatureTable,
};
pub use normalize::{normalize, NormalizationParams};
pub use split::{split, SplitSpec};
pub use synth::{generate_synthetic, SynthSpec};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledExample {
    pub features: Vec<f64>,
    /// Class index in `1..=r`.
    pub label: usize,
    pub recording_id: Option<String>,
}

impl LabeledExample {
    pub fn new(features: Vec<f64>, label: usize) -> Self {
        LabeledExample {
            features,
            label,
            recording_id: None,
        }
    }

    pub fn with_recording(mut self, id: impl Into<String>) -> Self {
        self.recording_id = Some(id.into());
        self
    }
}

/// An immutable collection of examples sharing `m` features and `r` classes.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    examples: Vec<LabeledExample>,
    n_features: usize,
    n_classes: usize,
    feature_names: Option<Vec<String>>,
    /// Original label value of each class; `class_labels[q - 1]` maps back
    /// from class index `q`.
    class_labels: Vec<i64>,
}

impl Dataset {
    /// Builds a dataset, checking every example against `m` and `r`.
    ///
    /// Classes may be absent (evaluation partitions); use
    /// [`Dataset::require_all_classes`] before training.
    pub fn new(examples: Vec<LabeledExample>, n_features: usize, n_classes: usize) -> Result<Self> {
        if n_features == 0 {
            return Err(Error::param("feature count must be at least 1"));
        }
        if n_classes < 2 {
            return Err(Error::TooFewClasses(n_classes));
        }
        for ex in &examples {
            if ex.features.len() != n_features {
                return Err(Error::DimensionMismatch {
                    expected: n_features,
                    found: ex.features.len(),
                });
            }
            if ex.label == 0 || ex.label > n_classes {
                return Err(Error::LabelOutOfRange {
                    label: ex.label,
                    n_classes,
                });
            }
            if let Some(&v) = ex.features.iter().find(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    context: "feature value",
                    value: v,
                });
            }
        }
        Ok(Dataset {
            examples,
            n_features,
            n_classes,
            feature_names: None,
            class_labels: (1..=n_classes as i64).collect(),
        })
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                found: names.len(),
            });
        }
        self.feature_names = Some(names);
        Ok(self)
    }

    pub fn with_class_labels(mut self, labels: Vec<i64>) -> Result<Self> {
        if labels.len() != self.n_classes {
            return Err(Error::DimensionMismatch {
                expected: self.n_classes,
                found: labels.len(),
            });
        }
        self.class_labels = labels;
        Ok(self)
    }

    pub fn examples(&self) -> &[LabeledExample] {
        &self.examples
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    /// Feature names, falling back to `x1..xm`.
    pub fn feature_names_or_default(&self) -> Vec<String> {
        match &self.feature_names {
            Some(n) => n.clone(),
            None => (1..=self.n_features).map(|j| format!("x{j}")).collect(),
        }
    }

    pub fn class_labels(&self) -> &[i64] {
        &self.class_labels
    }

    pub fn has_recordings(&self) -> bool {
        self.examples.iter().any(|e| e.recording_id.is_some())
    }

    /// Example count per class, indexed by `q - 1`.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for ex in &self.examples {
            counts[ex.label - 1] += 1;
        }
        counts
    }

    pub fn require_all_classes(&self) -> Result<()> {
        match self.class_counts().iter().position(|&c| c == 0) {
            Some(q) => Err(Error::EmptyClass { class: q + 1 }),
            None => Ok(()),
        }
    }

    /// A dataset of the selected examples, keeping `m`, `r`, names and label map.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            examples: indices.iter().map(|&i| self.examples[i].clone()).collect(),
            n_features: self.n_features,
            n_classes: self.n_classes,
            feature_names: self.feature_names.clone(),
            class_labels: self.class_labels.clone(),
        }
    }

    pub(crate) fn map_features(&self, mut f: impl FnMut(&mut [f64])) -> Dataset {
        let mut out = self.clone();
        for ex in &mut out.examples {
            f(&mut ex.features);
        }
        out
    }

    /// Row-major `n x m` copy of the feature matrix.
    pub fn feature_matrix(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(self.len() * self.n_features);
        for ex in &self.examples {
            flat.extend_from_slice(&ex.features);
        }
        flat
    }
}
