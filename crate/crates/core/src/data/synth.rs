use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{Dataset, LabeledExample};
use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// Adjacent class means on the most relevant feature are this many unit
/// standard deviations apart at `overlap = 0`.
pub const BASE_SPACING: f64 = 12.0;

/// Parameters of the overlapping-Gaussian generator.
///
/// Each informative feature `d` (the first `features - noise_features`
/// columns) places the class means on an evenly spaced grid, in a random
/// class order drawn per feature, with spacing
/// `BASE_SPACING * relevance(d) / (1 + overlap)` where
/// `relevance(d) = 1 / (1 + d / 10)`. Samples add unit-variance Gaussian
/// noise. The trailing `noise_features` columns are pure `N(0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub classes: usize,
    pub features: usize,
    pub per_class: usize,
    pub overlap: f64,
    pub noise_features: usize,
    pub seed: u64,
    /// Group consecutive segments of a class into recordings of this size.
    pub segments_per_recording: Option<usize>,
}

impl SynthSpec {
    fn validate(&self) -> Result<()> {
        if self.classes < 2 {
            return Err(Error::TooFewClasses(self.classes));
        }
        if self.features == 0 {
            return Err(Error::param("feature count must be at least 1"));
        }
        if self.noise_features > self.features {
            return Err(Error::param(format!(
                "{} noise features exceed {} features",
                self.noise_features, self.features
            )));
        }
        if self.per_class == 0 {
            return Err(Error::param("per-class count must be at least 1"));
        }
        if !(self.overlap.is_finite() && self.overlap >= 0.0) {
            return Err(Error::param(format!(
                "overlap {} must be finite and >= 0",
                self.overlap
            )));
        }
        if self.segments_per_recording == Some(0) {
            return Err(Error::param("segments per recording must be at least 1"));
        }
        Ok(())
    }

    pub fn informative_features(&self) -> usize {
        self.features - self.noise_features
    }

    fn relevance(d: usize) -> f64 {
        1.0 / (1.0 + d as f64 / 10.0)
    }

    /// Class-mean matrix, `means[q - 1][j]`.
    pub fn class_means(&self) -> Result<Vec<Vec<f64>>> {
        self.validate()?;
        let mut rng = stream_rng(self.seed, "synth-layout", 0);
        let r = self.classes;
        let spacing = BASE_SPACING / (1.0 + self.overlap);
        let centre = (r as f64 - 1.0) / 2.0;
        let mut means = vec![vec![0.0; self.features]; r];
        let mut order: Vec<usize> = (0..r).collect();
        for d in 0..self.informative_features() {
            order.shuffle(&mut rng);
            let step = spacing * Self::relevance(d);
            for (q, &slot) in order.iter().enumerate() {
                means[q][d] = step * (slot as f64 - centre);
            }
        }
        Ok(means)
    }
}

/// Draws `per_class` examples of every class. Deterministic per seed; two
/// specs differing only in `overlap` share every random draw.
pub fn generate_synthetic(spec: &SynthSpec) -> Result<Dataset> {
    let means = spec.class_means()?;
    let mut rng = stream_rng(spec.seed, "synth-samples", 0);
    let mut examples = Vec::with_capacity(spec.classes * spec.per_class);
    for (q, mean) in means.iter().enumerate() {
        for i in 0..spec.per_class {
            let features = mean
                .iter()
                .map(|mu| mu + rng.sample::<f64, _>(StandardNormal))
                .collect();
            let mut ex = LabeledExample::new(features, q + 1);
            if let Some(s) = spec.segments_per_recording {
                ex = ex.with_recording(format!("c{}-r{}", q + 1, i / s));
            }
            examples.push(ex);
        }
    }
    let names = (1..=spec.features).map(|j| format!("x{j}")).collect();
    Dataset::new(examples, spec.features, spec.classes)?.with_feature_names(names)
}
