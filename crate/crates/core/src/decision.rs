//! Winner-take-all decisions, recording-level vote aggregation and
//! segment/recording evaluation shared by every classifier in the crate.

use std::collections::BTreeMap;

use crate::data::Dataset;
use crate::error::{Error, Result};

/// A trained r-class model deciding one class index in `1..=r` per input.
pub trait Classifier {
    fn n_classes(&self) -> usize;
    fn n_features(&self) -> usize;
    fn classify(&self, x: &[f64]) -> Result<usize>;
}

/// Winner-take-all over discriminant values: the 1-based index of the
/// largest score, ties going to the lowest index.
///
/// Panics on an empty slice.
pub fn winner<T: PartialOrd + Copy>(scores: &[T]) -> usize {
    assert!(!scores.is_empty(), "winner of an empty score vector");
    let mut best = 0;
    for (i, s) in scores.iter().enumerate().skip(1) {
        if *s > scores[best] {
            best = i;
        }
    }
    best + 1
}

/// Segment-vote summary of one recording.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordingDecision {
    /// `class_histogram[q - 1]` counts segments assigned to class `q`.
    pub class_histogram: Vec<usize>,
    pub assigned_class: usize,
    /// `100 * max count / segment count`.
    pub confidence: f64,
}

impl RecordingDecision {
    pub fn from_predictions(n_classes: usize, predictions: &[usize]) -> Result<Self> {
        if predictions.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut class_histogram = vec![0usize; n_classes];
        for &p in predictions {
            if p == 0 || p > n_classes {
                return Err(Error::LabelOutOfRange {
                    label: p,
                    n_classes,
                });
            }
            class_histogram[p - 1] += 1;
        }
        let assigned_class = winner(&class_histogram);
        let confidence =
            100.0 * class_histogram[assigned_class - 1] as f64 / predictions.len() as f64;
        Ok(RecordingDecision {
            class_histogram,
            assigned_class,
            confidence,
        })
    }

    pub fn segments(&self) -> usize {
        self.class_histogram.iter().sum()
    }
}

/// Classifies every segment of one recording and aggregates the votes.
pub fn aggregate_recording<C, S>(model: &C, segments: &[S]) -> Result<RecordingDecision>
where
    C: Classifier + ?Sized,
    S: AsRef<[f64]>,
{
    if segments.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let predictions = segments
        .iter()
        .map(|s| model.classify(s.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    RecordingDecision::from_predictions(model.n_classes(), &predictions)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub segment_accuracy: f64,
    pub segments: usize,
    /// Fraction of recordings whose aggregated class matches the recording's
    /// majority true label; `None` when the dataset carries no recording ids.
    pub recording_accuracy: Option<f64>,
    pub recordings: usize,
}

pub fn evaluate<C: Classifier + ?Sized>(model: &C, data: &Dataset) -> Result<Evaluation> {
    if data.n_features() != model.n_features() {
        return Err(Error::DimensionMismatch {
            expected: model.n_features(),
            found: data.n_features(),
        });
    }
    let r = model.n_classes();
    let mut correct = 0usize;
    // recording id -> (predicted histogram, true histogram)
    let mut per_recording: BTreeMap<&str, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for ex in data.examples() {
        let predicted = model.classify(&ex.features)?;
        if predicted == ex.label {
            correct += 1;
        }
        if let Some(id) = ex.recording_id.as_deref() {
            let entry = per_recording
                .entry(id)
                .or_insert_with(|| (vec![0; r], vec![0; data.n_classes().max(r)]));
            entry.0[predicted - 1] += 1;
            entry.1[ex.label - 1] += 1;
        }
    }
    let segments = data.len();
    let segment_accuracy = if segments == 0 {
        0.0
    } else {
        correct as f64 / segments as f64
    };
    let recordings = per_recording.len();
    let recording_accuracy = (recordings > 0).then(|| {
        let hits = per_recording
            .values()
            .filter(|(pred, truth)| winner(pred) == winner(truth))
            .count();
        hits as f64 / recordings as f64
    });
    Ok(Evaluation {
        segment_accuracy,
        segments,
        recording_accuracy,
        recordings,
    })
}
