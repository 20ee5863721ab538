//! Pocket training with the ratchet: error-correction on randomly drawn
//! examples, keeping the weights that classified the most training
//! examples correctly.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SeedRng;

/// What a misclassification resets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResetMode {
    /// Reset the current run length `L`.
    #[default]
    Standard,
    /// Reset the pocket run `L_P` (and the current run), as in the
    /// printed listing. Every correct example after a correction then
    /// triggers a full training-set evaluation.
    PaperLiteral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PocketConfig {
    /// Iterations (one randomly drawn example each). `None` uses the number
    /// of training examples.
    pub epochs: Option<usize>,
    /// Amount of correction `c`.
    pub c: f64,
    pub reset_mode: ResetMode,
}

impl Default for PocketConfig {
    fn default() -> Self {
        PocketConfig {
            epochs: None,
            c: 1.0,
            reset_mode: ResetMode::Standard,
        }
    }
}

impl PocketConfig {
    pub(crate) fn resolve_epochs(&self, n: usize) -> Result<usize> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::param(format!(
                "correction c = {} must be > 0",
                self.c
            )));
        }
        resolve_epochs(self.epochs, n)
    }
}

pub(crate) fn resolve_epochs(epochs: Option<usize>, n: usize) -> Result<usize> {
    match epochs.unwrap_or(n) {
        0 => Err(Error::param("epoch count must be at least 1")),
        e => Ok(e),
    }
}

/// Pocket bookkeeping after training.
#[derive(Debug, Clone, PartialEq)]
pub struct PocketState {
    /// `W_P`: the pocketed weights (flattened for multi-class machines).
    pub weights: Vec<f64>,
    /// `L`: current run of consecutive correct classifications.
    pub run_length: usize,
    /// `L_P`: run length at the last pocket replacement.
    pub pocket_run: usize,
    /// `A_P`: training-set accuracy of `weights`.
    pub pocket_accuracy: f64,
    /// `A_P` after initialisation and after every replacement.
    pub accuracy_trace: Vec<f64>,
    /// Times the listing asks for the training-set accuracy (`L > L_P` on
    /// a correct example).
    pub accuracy_checks: usize,
    /// Full training-set passes actually performed; checks on weights that
    /// have not changed since the last pass reuse its result.
    pub evaluations: usize,
    pub iterations: usize,
    pub corrections: usize,
}

/// A model trainable by the pocket loop.
pub(crate) trait Learner {
    fn n_examples(&self) -> usize;
    fn weights(&self) -> &[f64];
    fn is_correct(&mut self, idx: usize) -> bool;
    /// Applies the error correction for example `idx`; returning `false`
    /// ends training.
    fn correct(&mut self, idx: usize) -> bool;
    fn accuracy(&self) -> f64;
}

pub(crate) fn run_pocket<L: Learner>(
    learner: &mut L,
    epochs: usize,
    reset_mode: ResetMode,
    rng: &mut SeedRng,
) -> PocketState {
    let n = learner.n_examples();
    let initial = learner.accuracy();
    let mut state = PocketState {
        weights: learner.weights().to_vec(),
        run_length: 0,
        pocket_run: 0,
        pocket_accuracy: initial,
        accuracy_trace: vec![initial],
        accuracy_checks: 0,
        evaluations: 1,
        iterations: 0,
        corrections: 0,
    };
    // accuracy of the current weights, valid until the next correction
    let mut current: Option<f64> = Some(initial);
    for _ in 0..epochs {
        state.iterations += 1;
        let idx = rng.random_range(0..n);
        if !learner.is_correct(idx) {
            match reset_mode {
                ResetMode::Standard => state.run_length = 0,
                ResetMode::PaperLiteral => {
                    state.pocket_run = 0;
                    state.run_length = 0;
                }
            }
            state.corrections += 1;
            current = None;
            if !learner.correct(idx) {
                break;
            }
        } else {
            state.run_length += 1;
            if state.run_length > state.pocket_run {
                state.accuracy_checks += 1;
                let accuracy = *current.get_or_insert_with(|| {
                    state.evaluations += 1;
                    learner.accuracy()
                });
                if accuracy > state.pocket_accuracy {
                    state.weights.copy_from_slice(learner.weights());
                    state.pocket_run = state.run_length;
                    state.pocket_accuracy = accuracy;
                    state.accuracy_trace.push(accuracy);
                }
            }
        }
    }
    state
}
