//! Pairwise threshold-logic ensemble.
//!
//! One TLU `f_ij` per unordered class pair `i < j`, trained only on the
//! examples of classes `i` (target `+1`) and `j` (target `-1`). The hidden
//! signs are wired into class discriminants with fixed weights
//!
//! ```text
//! g_i(x) = sum_{k > i} f_ik(x) - sum_{k < i} f_ki(x)
//! ```
//!
//! and the class is chosen by winner-take-all. With r = 3 and hidden signs
//! `(f12, f13, f23) = (-1, +1, +1)` this gives `(g1, g2, g3) = (0, 2, -2)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::decision::{
    aggregate_recording, evaluate, winner, Classifier, Evaluation, RecordingDecision,
};
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::select::{multi_attempt_select, BinaryData, SfsConfig};
use crate::tlu::{Tlu, TluTrainer, TrainerConfig};

/// `r (r - 1) / 2`.
pub fn pair_count(n_classes: usize) -> usize {
    n_classes * n_classes.saturating_sub(1) / 2
}

/// Position of the pair `(i, j)`, `1 <= i < j <= r`, in lexicographic order.
pub fn pair_index(n_classes: usize, i: usize, j: usize) -> usize {
    debug_assert!(1 <= i && i < j && j <= n_classes);
    let before: usize = (1..i).map(|a| n_classes - a).sum();
    before + (j - i - 1)
}

/// Pairs `(i, j)` in the order used for hidden units.
pub fn pairs(n_classes: usize) -> impl Iterator<Item = (usize, usize)> {
    (1..=n_classes).flat_map(move |i| (i + 1..=n_classes).map(move |j| (i, j)))
}

/// The explicit `r x r(r-1)/2` output wiring: `+1` where class `i` is the
/// first class of the pair, `-1` where it is the second, else 0.
pub fn wiring_matrix(n_classes: usize) -> Vec<Vec<i8>> {
    let mut s = vec![vec![0i8; pair_count(n_classes)]; n_classes];
    for (p, (i, j)) in pairs(n_classes).enumerate() {
        s[i - 1][p] = 1;
        s[j - 1][p] = -1;
    }
    s
}

/// Class discriminants from hidden signs given in pair order.
pub fn discriminants_from_signs(n_classes: usize, signs: &[i8]) -> Result<Vec<i32>> {
    if signs.len() != pair_count(n_classes) {
        return Err(Error::DimensionMismatch {
            expected: pair_count(n_classes),
            found: signs.len(),
        });
    }
    let mut g = vec![0i32; n_classes];
    for ((i, j), &s) in pairs(n_classes).zip(signs) {
        g[i - 1] += i32::from(s);
        g[j - 1] -= i32::from(s);
    }
    Ok(g)
}

/// One hidden unit with its training record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairTest {
    /// Class answered by `+1`.
    pub positive: usize,
    /// Class answered by `-1`.
    pub negative: usize,
    pub tlu: Tlu,
    /// `1 - accuracy` over all examples of the two classes.
    pub training_error: f64,
}

impl PairTest {
    pub fn feature_count(&self) -> usize {
        self.tlu.n_selected()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseEnsemble {
    n_classes: usize,
    n_features: usize,
    /// Ordered as [`pairs`].
    tests: Vec<PairTest>,
}

impl PairwiseEnsemble {
    pub fn new(n_classes: usize, n_features: usize, tests: Vec<PairTest>) -> Result<Self> {
        if n_classes < 2 {
            return Err(Error::TooFewClasses(n_classes));
        }
        if tests.len() != pair_count(n_classes) {
            return Err(Error::InvalidModel(format!(
                "{} classes need {} pairwise tests, got {}",
                n_classes,
                pair_count(n_classes),
                tests.len()
            )));
        }
        for ((i, j), t) in pairs(n_classes).zip(&tests) {
            if (t.positive, t.negative) != (i, j) {
                return Err(Error::InvalidModel(format!(
                    "test for pair ({}, {}) found where ({i}, {j}) expected",
                    t.positive, t.negative
                )));
            }
            // re-validate: tests may come from a deserialized file
            Tlu::new(t.tlu.weights().to_vec(), t.tlu.features().to_vec())?;
            t.tlu.check_width(n_features)?;
        }
        Ok(PairwiseEnsemble {
            n_classes,
            n_features,
            tests,
        })
    }

    pub fn tests(&self) -> &[PairTest] {
        &self.tests
    }

    pub fn test(&self, i: usize, j: usize) -> &PairTest {
        &self.tests[pair_index(self.n_classes, i, j)]
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                found: x.len(),
            });
        }
        Ok(())
    }

    pub fn hidden_signs(&self, x: &[f64]) -> Result<Vec<i8>> {
        self.check(x)?;
        Ok(self
            .tests
            .iter()
            .map(|t| crate::tlu::sign(t.tlu.activation_unchecked(x)))
            .collect())
    }

    /// Integer discriminants `g_1..g_r`; each lies in `[-(r-1), r-1]` and
    /// they sum to zero.
    pub fn discriminants(&self, x: &[f64]) -> Result<Vec<i32>> {
        discriminants_from_signs(self.n_classes, &self.hidden_signs(x)?)
    }

    pub fn aggregate_recording<S: AsRef<[f64]>>(
        &self,
        segments: &[S],
    ) -> Result<RecordingDecision> {
        aggregate_recording(self, segments)
    }

    pub fn evaluate(&self, data: &Dataset) -> Result<Evaluation> {
        evaluate(self, data)
    }
}

impl Classifier for PairwiseEnsemble {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn n_features(&self) -> usize {
        self.n_features
    }

    fn classify(&self, x: &[f64]) -> Result<usize> {
        Ok(winner(&self.discriminants(x)?))
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PairwiseConfig {
    pub trainer: TrainerConfig,
    /// `selector.seed` is replaced by a per-pair seed derived from the
    /// master seed.
    pub selector: SfsConfig,
}

/// Trains every pairwise test independently (in parallel on the current
/// rayon pool) and wires them into an ensemble. Results do not depend on
/// the number of worker threads.
pub fn train_pairwise(
    data: &Dataset,
    config: &PairwiseConfig,
    seed: u64,
) -> Result<PairwiseEnsemble> {
    train_pairwise_with(data, &config.selector, &config.trainer, seed)
}

/// [`train_pairwise`] with any binary trainer.
pub fn train_pairwise_with<T: TluTrainer>(
    data: &Dataset,
    selector: &SfsConfig,
    trainer: &T,
    seed: u64,
) -> Result<PairwiseEnsemble> {
    data.require_all_classes()?;
    let r = data.n_classes();
    let all: Vec<(usize, usize)> = pairs(r).collect();
    let tests = all
        .par_iter()
        .enumerate()
        .map(|(p, &(i, j))| {
            let pair_data = BinaryData::from_pair(data, i, j)?;
            let cfg = SfsConfig {
                seed: derive_seed(seed, "pair", p as u64),
                ..selector.clone()
            };
            let best = multi_attempt_select(&pair_data, &cfg, trainer)?;
            Ok(PairTest {
                positive: i,
                negative: j,
                training_error: 1.0 - best.accuracy,
                tlu: best.tlu,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    PairwiseEnsemble::new(r, data.n_features(), tests)
}
