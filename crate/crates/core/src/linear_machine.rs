//! Monolithic r-class linear machine trained jointly by the pocket
//! algorithm. It is the baseline that breaks down on heavily overlapped
//! classes.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::decision::{winner, Classifier};
use crate::error::{Error, Result};
use crate::pocket::{run_pocket, Learner, PocketConfig, PocketState};
use crate::rng::{stream_rng, SeedRng};
use crate::tlu::{dot, random_weights};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearMachine {
    n_classes: usize,
    n_features: usize,
    /// Row-major `r x (m + 1)`; row `q - 1` is the discriminant of class `q`.
    weights: Vec<f64>,
}

impl LinearMachine {
    pub fn new(n_classes: usize, n_features: usize, weights: Vec<f64>) -> Result<Self> {
        if n_classes < 2 {
            return Err(Error::TooFewClasses(n_classes));
        }
        if weights.len() != n_classes * (n_features + 1) {
            return Err(Error::DimensionMismatch {
                expected: n_classes * (n_features + 1),
                found: weights.len(),
            });
        }
        if let Some(&w) = weights.iter().find(|w| !w.is_finite()) {
            return Err(Error::NonFinite {
                context: "linear machine weight",
                value: w,
            });
        }
        Ok(LinearMachine {
            n_classes,
            n_features,
            weights,
        })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_features = rows.first().map_or(0, |r| r.len().saturating_sub(1));
        let r = rows.len();
        if rows.iter().any(|row| row.len() != n_features + 1) {
            return Err(Error::param("discriminant rows differ in length"));
        }
        Self::new(r, n_features, rows.concat())
    }

    pub fn weight_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.weights.chunks_exact(self.n_features + 1)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `g_q(x) = w_q . (1, x)` for every class.
    pub fn discriminants(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        Ok(self.weight_rows().map(|w| w[0] + dot(&w[1..], x)).collect())
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
}

impl Classifier for LinearMachine {
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

struct JointLearner<'a> {
    dim: usize,
    rows: &'a [f64],
    labels: &'a [usize],
    w: Vec<f64>,
    c: f64,
    /// Winner found by the last `is_correct` call.
    last_winner: usize,
    scratch: Vec<f64>,
}

impl JointLearner<'_> {
    fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.dim..(i + 1) * self.dim]
    }

    fn predict(&self, x: &[f64], scratch: &mut Vec<f64>) -> usize {
        scratch.clear();
        scratch.extend(self.w.chunks_exact(self.dim).map(|w| dot(w, x)));
        winner(scratch)
    }
}

impl Learner for JointLearner<'_> {
    fn n_examples(&self) -> usize {
        self.labels.len()
    }

    fn weights(&self) -> &[f64] {
        &self.w
    }

    fn is_correct(&mut self, idx: usize) -> bool {
        let mut scratch = std::mem::take(&mut self.scratch);
        self.last_winner = self.predict(self.row(idx), &mut scratch);
        self.scratch = scratch;
        self.last_winner == self.labels[idx]
    }

    fn correct(&mut self, idx: usize) -> bool {
        let (truth, wrong, dim) = (self.labels[idx] - 1, self.last_winner - 1, self.dim);
        for k in 0..dim {
            let step = self.c * self.rows[idx * dim + k];
            self.w[truth * dim + k] += step;
            self.w[wrong * dim + k] -= step;
        }
        true
    }

    fn accuracy(&self) -> f64 {
        let mut scratch = Vec::with_capacity(self.w.len() / self.dim);
        let hits = (0..self.labels.len())
            .filter(|&i| self.predict(self.row(i), &mut scratch) == self.labels[i])
            .count();
        hits as f64 / self.labels.len() as f64
    }
}

/// Joint pocket training from an explicit starting machine. A
/// misclassified `(x, q)` adds `c x` to `w_q` and subtracts it from the WTA
/// winner's discriminant.
pub fn lm_pocket_train_from(
    data: &Dataset,
    config: &PocketConfig,
    initial: LinearMachine,
    rng: &mut SeedRng,
) -> Result<(LinearMachine, PocketState)> {
    data.require_all_classes()?;
    if initial.n_classes != data.n_classes() || initial.n_features != data.n_features() {
        return Err(Error::DimensionMismatch {
            expected: data.n_classes() * (data.n_features() + 1),
            found: initial.weights.len(),
        });
    }
    let epochs = config.resolve_epochs(data.len())?;
    let dim = data.n_features() + 1;
    let mut rows = Vec::with_capacity(data.len() * dim);
    for ex in data.examples() {
        rows.push(1.0);
        rows.extend_from_slice(&ex.features);
    }
    let labels: Vec<usize> = data.examples().iter().map(|e| e.label).collect();
    let mut learner = JointLearner {
        dim,
        rows: &rows,
        labels: &labels,
        w: initial.weights,
        c: config.c,
        last_winner: 0,
        scratch: Vec::with_capacity(data.n_classes()),
    };
    let state = run_pocket(&mut learner, epochs, config.reset_mode, rng);
    let model = LinearMachine::new(data.n_classes(), data.n_features(), state.weights.clone())?;
    Ok((model, state))
}

/// Joint pocket training from uniform `[-0.5, 0.5]` weights.
pub fn lm_pocket_train(
    data: &Dataset,
    config: &PocketConfig,
    seed: u64,
) -> Result<(LinearMachine, PocketState)> {
    let mut rng = stream_rng(seed, "lm", 0);
    let init = random_weights(data.n_classes() * (data.n_features() + 1), &mut rng);
    let initial = LinearMachine::new(data.n_classes(), data.n_features(), init)?;
    lm_pocket_train_from(data, config, initial, &mut rng)
}
