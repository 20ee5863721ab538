//! Shared fixtures for the training benchmarks.

use lmtree::data::{generate_synthetic, normalize};
use lmtree::tlu::BinaryProblem;
use lmtree::{Dataset, SynthSpec};

/// Normalized synthetic dataset.
pub fn dataset(classes: usize, features: usize, per_class: usize, overlap: f64) -> Dataset {
    let spec = SynthSpec {
        classes,
        features,
        per_class,
        overlap,
        noise_features: features / 6,
        seed: 42,
        segments_per_recording: Some(20),
    };
    let ds = generate_synthetic(&spec).expect("valid synthetic spec");
    normalize(&ds).expect("non-empty dataset").0
}

/// Classes 1 and 2 of `ds` over every feature.
pub fn pair_problem(ds: &Dataset) -> BinaryProblem {
    let all: Vec<usize> = (0..ds.n_features()).collect();
    BinaryProblem::from_dataset(ds, 1, 2, &all).expect("both classes present")
}
