//! Two-class threshold logic units.
//!
//! A [`Tlu`] computes `g(x) = w0 + sum_k w_k * x[f_k]` over its selected
//! features `f_k` and answers `+1` when `g(x) > 0`, `-1` otherwise (a zero
//! activation is `-1`).
//!
//! Training treats the unit as a two-discriminant linear machine collapsed
//! to the difference vector `w = w+ - w-`: a correction on example `x` with
//! target `t` applies the error-correction rule to both discriminants, so
//! `w` moves by `2 c t x`. The thermal rule uses the same pairing.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::pocket::{resolve_epochs, run_pocket, Learner, PocketConfig, PocketState, ResetMode};
use crate::rng::{stream_rng, SeedRng};

/// `+1` for a strictly positive activation, `-1` otherwise.
#[inline]
pub fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else {
        -1
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A trained linear test over a subset of the dataset's features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tlu {
    /// Bias weight first, then one weight per entry of `features`.
    weights: Vec<f64>,
    /// 0-based feature indices into the parent dataset.
    features: Vec<usize>,
}

impl Tlu {
    pub fn new(weights: Vec<f64>, features: Vec<usize>) -> Result<Self> {
        if weights.len() != features.len() + 1 {
            return Err(Error::DimensionMismatch {
                expected: features.len() + 1,
                found: weights.len(),
            });
        }
        if let Some(&w) = weights.iter().find(|w| !w.is_finite()) {
            return Err(Error::NonFinite {
                context: "TLU weight",
                value: w,
            });
        }
        let mut sorted = features.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|p| p[0] == p[1]) {
            return Err(Error::param("TLU feature indices must be distinct"));
        }
        Ok(Tlu { weights, features })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn features(&self) -> &[usize] {
        &self.features
    }

    pub fn n_selected(&self) -> usize {
        self.features.len()
    }

    /// Checks the feature indices against a dataset width.
    pub fn check_width(&self, n_features: usize) -> Result<()> {
        match self.features.iter().find(|&&f| f >= n_features) {
            Some(&index) => Err(Error::FeatureOutOfRange { index, n_features }),
            None => Ok(()),
        }
    }

    /// Activation and sign on a full (unbiased) feature vector.
    pub fn output(&self, x: &[f64]) -> Result<(f64, i8)> {
        self.check_width(x.len())?;
        let v = self.activation_unchecked(x);
        Ok((v, sign(v)))
    }

    #[inline]
    pub(crate) fn activation_unchecked(&self, x: &[f64]) -> f64 {
        self.weights[0]
            + self.weights[1..]
                .iter()
                .zip(&self.features)
                .map(|(w, &f)| w * x[f])
                .sum::<f64>()
    }

    /// The same test with every weight multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Tlu> {
        Tlu::new(
            self.weights.iter().map(|w| w * factor).collect(),
            self.features.clone(),
        )
    }
}

/// Error-correction on a pair of discriminants: `w_j += c x`, `w_k -= c x`.
/// The margin `(w_j - w_k) . x` grows by exactly `2 c x.x`.
pub fn error_correct(w_j: &mut [f64], w_k: &mut [f64], x: &[f64], c: f64) -> Result<()> {
    if w_j.len() != x.len() || w_k.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: if w_j.len() != x.len() {
                w_j.len()
            } else {
                w_k.len()
            },
        });
    }
    for ((a, b), xi) in w_j.iter_mut().zip(w_k.iter_mut()).zip(x) {
        *a += c * xi;
        *b -= c * xi;
    }
    Ok(())
}

/// Thermal amount of correction `c = beta / (beta + k^2)` with
/// `k = (w_j - w_i) . x / (2 x.x) + epsilon`, where `x` includes the bias.
pub fn thermal_correction(
    w_j: &[f64],
    w_i: &[f64],
    x: &[f64],
    beta: f64,
    epsilon: f64,
) -> Result<f64> {
    if w_j.len() != x.len() || w_i.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: w_j.len().min(w_i.len()),
        });
    }
    if beta.is_nan() || beta <= 0.0 {
        return Err(Error::param(format!("beta = {beta} must be > 0")));
    }
    let xx = dot(x, x);
    if xx <= 0.0 {
        return Err(Error::ZeroNormExample);
    }
    let margin: f64 = w_j
        .iter()
        .zip(w_i)
        .zip(x)
        .map(|((a, b), xi)| (a - b) * xi)
        .sum();
    Ok(thermal_amount(margin, xx, beta, epsilon))
}

#[inline]
fn thermal_amount(margin: f64, xx: f64, beta: f64, epsilon: f64) -> f64 {
    let k = margin / (2.0 * xx) + epsilon;
    beta / (beta + k * k)
}

/// Two-class training data restricted to a feature subset, stored as
/// biased rows `(1, x_f1, ..., x_fs)` with targets `+1` / `-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryProblem {
    features: Vec<usize>,
    dim: usize,
    rows: Vec<f64>,
    targets: Vec<i8>,
}

impl BinaryProblem {
    /// `rows[i]` holds the values of `features` (no bias) for example `i`.
    pub fn new(features: Vec<usize>, rows: &[Vec<f64>], targets: Vec<i8>) -> Result<Self> {
        if rows.len() != targets.len() {
            return Err(Error::DimensionMismatch {
                expected: rows.len(),
                found: targets.len(),
            });
        }
        let dim = features.len() + 1;
        let mut flat = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            if row.len() + 1 != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim - 1,
                    found: row.len(),
                });
            }
            flat.push(1.0);
            flat.extend_from_slice(row);
        }
        Self::from_parts(features, dim, flat, targets)
    }

    /// Examples of `positive` (target `+1`) and `negative` (target `-1`)
    /// classes of `ds`, restricted to `features`.
    pub fn from_dataset(
        ds: &Dataset,
        positive: usize,
        negative: usize,
        features: &[usize],
    ) -> Result<Self> {
        if let Some(&index) = features.iter().find(|&&f| f >= ds.n_features()) {
            return Err(Error::FeatureOutOfRange {
                index,
                n_features: ds.n_features(),
            });
        }
        let dim = features.len() + 1;
        let mut rows = Vec::new();
        let mut targets = Vec::new();
        for ex in ds.examples() {
            let t = if ex.label == positive {
                1
            } else if ex.label == negative {
                -1
            } else {
                continue;
            };
            rows.push(1.0);
            rows.extend(features.iter().map(|&f| ex.features[f]));
            targets.push(t);
        }
        Self::from_parts(features.to_vec(), dim, rows, targets)
    }

    pub(crate) fn from_parts(
        features: Vec<usize>,
        dim: usize,
        rows: Vec<f64>,
        targets: Vec<i8>,
    ) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let has_pos = targets.iter().any(|&t| t > 0);
        let has_neg = targets.iter().any(|&t| t < 0);
        if !(has_pos && has_neg) {
            return Err(Error::TooFewClasses(1));
        }
        debug_assert_eq!(rows.len(), targets.len() * dim);
        Ok(BinaryProblem {
            features,
            dim,
            rows,
            targets,
        })
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// Weight-vector length, `s + 1`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn features(&self) -> &[usize] {
        &self.features
    }

    /// Biased row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn target(&self, i: usize) -> i8 {
        self.targets[i]
    }

    /// Fraction of examples with `sign(w . x) == target`.
    pub fn accuracy(&self, w: &[f64]) -> f64 {
        let hits = self
            .rows
            .chunks_exact(self.dim)
            .zip(&self.targets)
            .filter(|(x, &t)| sign(dot(w, x)) == t)
            .count();
        hits as f64 / self.len() as f64
    }

    fn to_tlu(&self, weights: Vec<f64>) -> Result<Tlu> {
        Tlu::new(weights, self.features.clone())
    }
}

/// Uniform `[-0.5, 0.5]` initial weights.
pub fn random_weights(dim: usize, rng: &mut SeedRng) -> Vec<f64> {
    (0..dim).map(|_| rng.random_range(-0.5..=0.5)).collect()
}

struct PocketTlu<'a> {
    problem: &'a BinaryProblem,
    w: Vec<f64>,
    c: f64,
}

impl Learner for PocketTlu<'_> {
    fn n_examples(&self) -> usize {
        self.problem.len()
    }

    fn weights(&self) -> &[f64] {
        &self.w
    }

    fn is_correct(&mut self, idx: usize) -> bool {
        sign(dot(&self.w, self.problem.row(idx))) == self.problem.target(idx)
    }

    fn correct(&mut self, idx: usize) -> bool {
        let step = 2.0 * self.c * f64::from(self.problem.target(idx));
        for (w, x) in self.w.iter_mut().zip(self.problem.row(idx)) {
            *w += step * x;
        }
        true
    }

    fn accuracy(&self) -> f64 {
        self.problem.accuracy(&self.w)
    }
}

/// Pocket training from explicit initial weights, drawing examples from `rng`.
pub fn pocket_train_from(
    problem: &BinaryProblem,
    config: &PocketConfig,
    initial: Vec<f64>,
    rng: &mut SeedRng,
) -> Result<(Tlu, PocketState)> {
    let epochs = config.resolve_epochs(problem.len())?;
    if initial.len() != problem.dim() {
        return Err(Error::DimensionMismatch {
            expected: problem.dim(),
            found: initial.len(),
        });
    }
    let mut learner = PocketTlu {
        problem,
        w: initial,
        c: config.c,
    };
    let state = run_pocket(&mut learner, epochs, config.reset_mode, rng);
    Ok((problem.to_tlu(state.weights.clone())?, state))
}

/// Pocket training with the ratchet on a two-class problem.
pub fn pocket_train_binary(
    problem: &BinaryProblem,
    config: &PocketConfig,
    seed: u64,
) -> Result<(Tlu, PocketState)> {
    let mut rng = stream_rng(seed, "tlu", 0);
    let init = random_weights(problem.dim(), &mut rng);
    pocket_train_from(problem, config, init, &mut rng)
}

/// Thermal procedure constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalConfig {
    /// Iterations; `None` uses the number of training examples.
    pub epochs: Option<usize>,
    pub beta0: f64,
    /// Must exceed 0.1.
    pub epsilon: f64,
    pub a: f64,
    pub b: f64,
}

impl Default for ThermalConfig {
    fn default() -> Self {
        ThermalConfig {
            epochs: None,
            beta0: 2.0,
            epsilon: 0.5,
            a: 0.99,
            b: 1e-4,
        }
    }
}

impl ThermalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epsilon.is_nan() || self.epsilon <= 0.1 {
            return Err(Error::param(format!(
                "epsilon = {} must exceed 0.1",
                self.epsilon
            )));
        }
        if self.beta0.is_nan() || self.beta0 <= 0.0 {
            return Err(Error::param(format!("beta0 = {} must be > 0", self.beta0)));
        }
        if !(self.a.is_finite() && self.b.is_finite()) {
            return Err(Error::param("thermal constants a, b must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThermalOutcome {
    pub tlu: Tlu,
    pub state: PocketState,
    /// `beta0`, then `beta` after every reduction.
    pub beta_trace: Vec<f64>,
}

struct ThermalTlu<'a> {
    problem: &'a BinaryProblem,
    w: Vec<f64>,
    config: &'a ThermalConfig,
    beta: f64,
    norm: f64,
    grew_last: bool,
    beta_trace: Vec<f64>,
}

impl Learner for ThermalTlu<'_> {
    fn n_examples(&self) -> usize {
        self.problem.len()
    }

    fn weights(&self) -> &[f64] {
        &self.w
    }

    fn is_correct(&mut self, idx: usize) -> bool {
        sign(dot(&self.w, self.problem.row(idx))) == self.problem.target(idx)
    }

    fn correct(&mut self, idx: usize) -> bool {
        let x = self.problem.row(idx);
        let t = f64::from(self.problem.target(idx));
        let c = thermal_amount(
            t * dot(&self.w, x),
            dot(x, x),
            self.beta,
            self.config.epsilon,
        );
        for (w, xi) in self.w.iter_mut().zip(x) {
            *w += 2.0 * c * t * xi;
        }
        let norm = dot(&self.w, &self.w).sqrt();
        let shrank = norm < self.norm;
        if shrank && self.grew_last {
            self.beta = self.config.a * self.beta - self.config.b;
            self.beta_trace.push(self.beta);
        }
        self.grew_last = norm > self.norm;
        self.norm = norm;
        self.beta > 0.0
    }

    fn accuracy(&self) -> f64 {
        self.problem.accuracy(&self.w)
    }
}

/// Thermal training: error correction with `c` from [`thermal_correction`],
/// annealing `beta := a beta - b` whenever the weight norm shrinks right
/// after growing. Stops when `beta <= 0` or the epochs run out and returns
/// the pocketed (best training accuracy) weights.
pub fn thermal_train_binary(
    problem: &BinaryProblem,
    config: &ThermalConfig,
    seed: u64,
) -> Result<ThermalOutcome> {
    config.validate()?;
    let epochs = resolve_epochs(config.epochs, problem.len())?;
    let mut rng = stream_rng(seed, "tlu", 0);
    let w = random_weights(problem.dim(), &mut rng);
    let norm = dot(&w, &w).sqrt();
    let mut learner = ThermalTlu {
        problem,
        w,
        config,
        beta: config.beta0,
        norm,
        grew_last: false,
        beta_trace: vec![config.beta0],
    };
    let state = run_pocket(&mut learner, epochs, ResetMode::Standard, &mut rng);
    Ok(ThermalOutcome {
        tlu: problem.to_tlu(state.weights.clone())?,
        beta_trace: learner.beta_trace,
        state,
    })
}

/// Trainer selection for binary tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrainerConfig {
    Pocket(PocketConfig),
    Thermal(ThermalConfig),
}

impl Default for TrainerConfig {
    fn default() -> Self {
        TrainerConfig::Pocket(PocketConfig::default())
    }
}

/// Anything that fits a [`Tlu`] to a binary problem. Implementations must
/// be deterministic in `seed`.
pub trait TluTrainer: Sync {
    fn train(&self, problem: &BinaryProblem, seed: u64) -> Result<Tlu>;
}

impl TluTrainer for TrainerConfig {
    fn train(&self, problem: &BinaryProblem, seed: u64) -> Result<Tlu> {
        match self {
            TrainerConfig::Pocket(c) => pocket_train_binary(problem, c, seed).map(|(t, _)| t),
            TrainerConfig::Thermal(c) => thermal_train_binary(problem, c, seed).map(|o| o.tlu),
        }
    }
}
