//! Greedy bottom-up feature selection wrapped around binary TLU training.
//!
//! One attempt walks the features in a seeded random order:
//!
//! 1. Train a single-feature test for every feature; the best becomes both
//!    the current test `T` and the best test `T_b`.
//! 2. Each round trains every one-feature extension of `T` (or, with
//!    [`SearchStrategy::FirstImprovement`], stops at the first extension
//!    that beats `T`). The round's best candidate `T_1` replaces `T` when
//!    `A_1 > A`. When no extension improves, the search may still move to
//!    `T_1` to look past the plateau, but only while `A_1` stays within
//!    `drop_threshold` of `A_b`; a larger drop ends the attempt.
//! 3. `T_b` is replaced whenever `T` strictly beats it, so among equally
//!    accurate tests the one with fewer features is kept.
//! 4. The attempt also ends when `T` holds `max_features` features or
//!    every feature is in use.
//!
//! Weights are fit on a `fit_fraction` stratified sample of the pair data;
//! every accuracy is measured on all of it.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, stream_rng};
use crate::tlu::{sign, BinaryProblem, Tlu, TluTrainer};

/// Two-class data over all `m` features, targets `+1` / `-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryData {
    n_features: usize,
    values: Vec<f64>,
    targets: Vec<i8>,
}

impl BinaryData {
    pub fn new(rows: &[Vec<f64>], targets: Vec<i8>) -> Result<Self> {
        let n_features = rows.first().map_or(0, Vec::len);
        if rows.len() != targets.len() {
            return Err(Error::DimensionMismatch {
                expected: rows.len(),
                found: targets.len(),
            });
        }
        if let Some(row) = rows.iter().find(|r| r.len() != n_features) {
            return Err(Error::DimensionMismatch {
                expected: n_features,
                found: row.len(),
            });
        }
        Self::from_parts(n_features, rows.concat(), targets)
    }

    /// Examples of class `positive` (+1) and `negative` (-1).
    pub fn from_pair(ds: &Dataset, positive: usize, negative: usize) -> Result<Self> {
        let mut values = Vec::new();
        let mut targets = Vec::new();
        for ex in ds.examples() {
            let t = match ex.label {
                l if l == positive => 1,
                l if l == negative => -1,
                _ => continue,
            };
            values.extend_from_slice(&ex.features);
            targets.push(t);
        }
        Self::from_parts(ds.n_features(), values, targets)
    }

    fn from_parts(n_features: usize, values: Vec<f64>, targets: Vec<i8>) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if n_features == 0 {
            return Err(Error::param("binary data needs at least one feature"));
        }
        if !(targets.iter().any(|&t| t > 0) && targets.iter().any(|&t| t < 0)) {
            return Err(Error::TooFewClasses(1));
        }
        Ok(BinaryData {
            n_features,
            values,
            targets,
        })
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn targets(&self) -> &[i8] {
        &self.targets
    }

    /// Training problem over the given rows and features.
    pub fn problem(&self, rows: &[usize], features: &[usize]) -> Result<BinaryProblem> {
        let dim = features.len() + 1;
        let mut flat = Vec::with_capacity(rows.len() * dim);
        let mut targets = Vec::with_capacity(rows.len());
        for &i in rows {
            let row = self.row(i);
            flat.push(1.0);
            flat.extend(features.iter().map(|&f| row[f]));
            targets.push(self.targets[i]);
        }
        BinaryProblem::from_parts(features.to_vec(), dim, flat, targets)
    }

    /// Fraction of all examples the test classifies correctly.
    pub fn accuracy(&self, tlu: &Tlu) -> f64 {
        let hits = (0..self.len())
            .filter(|&i| sign(tlu.activation_unchecked(self.row(i))) == self.targets[i])
            .count();
        hits as f64 / self.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchStrategy {
    /// Train every extension each round and take the best.
    #[default]
    BestImprovement,
    /// Take the first extension, in attempt order, that beats the current test.
    FirstImprovement,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SfsConfig {
    /// `N_f`; `None` means `ceil(5m / 6)`.
    pub max_features: Option<usize>,
    /// `N_t`: attempts with different feature orders.
    pub attempts: usize,
    pub drop_threshold: f64,
    pub fit_fraction: f64,
    pub strategy: SearchStrategy,
    pub seed: u64,
}

impl Default for SfsConfig {
    fn default() -> Self {
        SfsConfig {
            max_features: None,
            attempts: 5,
            drop_threshold: 0.10,
            fit_fraction: 2.0 / 3.0,
            strategy: SearchStrategy::BestImprovement,
            seed: 0,
        }
    }
}

impl SfsConfig {
    pub fn feature_limit(&self, n_features: usize) -> Result<usize> {
        let limit = self
            .max_features
            .unwrap_or_else(|| (5 * n_features).div_ceil(6));
        if limit == 0 || limit > n_features {
            return Err(Error::param(format!(
                "feature limit {limit} must be in 1..={n_features}"
            )));
        }
        Ok(limit)
    }

    fn validate(&self) -> Result<()> {
        if self.attempts == 0 {
            return Err(Error::param("at least one attempt is required"));
        }
        if !(self.drop_threshold > 0.0 && self.drop_threshold < 1.0) {
            return Err(Error::param(format!(
                "drop threshold {} outside (0, 1)",
                self.drop_threshold
            )));
        }
        if !(self.fit_fraction > 0.0 && self.fit_fraction <= 1.0) {
            return Err(Error::param(format!(
                "fit fraction {} outside (0, 1]",
                self.fit_fraction
            )));
        }
        Ok(())
    }

    /// Upper bound on trainer calls: `N_t * sum_{i < N_f} (m - i)`.
    pub fn max_trainings(&self, n_features: usize) -> Result<usize> {
        let limit = self.feature_limit(n_features)?;
        Ok(self.attempts * (0..limit).map(|i| n_features - i).sum::<usize>())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestCandidate {
    pub tlu: Tlu,
    /// Accuracy over all of the pair data.
    pub accuracy: f64,
    /// Attempt that produced the test.
    pub attempt: usize,
}

impl TestCandidate {
    pub fn feature_count(&self) -> usize {
        self.tlu.n_selected()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    /// Best single-feature test.
    Initial,
    /// Extension with `A_1 > A`.
    Accepted,
    /// Non-improving move within the drop threshold.
    Explored,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchStep {
    pub kind: StepKind,
    pub features: Vec<usize>,
    pub accuracy: f64,
    /// `A_b` after the step.
    pub best_accuracy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    FeatureLimit,
    FeaturesExhausted,
    AccuracyDrop,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub best: TestCandidate,
    pub steps: Vec<SearchStep>,
    pub stop: StopReason,
    pub trainings: usize,
}

/// Stratified fit sample: `max(1, round(fraction * n_t))` per target.
fn fit_rows(data: &BinaryData, fraction: f64, seed: u64) -> Vec<usize> {
    let mut rng = stream_rng(seed, "fit", 0);
    let mut rows = Vec::new();
    for target in [1i8, -1] {
        let mut idx: Vec<usize> = (0..data.len())
            .filter(|&i| data.targets[i] == target)
            .collect();
        idx.shuffle(&mut rng);
        let k = ((fraction * idx.len() as f64).round() as usize).clamp(1, idx.len());
        rows.extend_from_slice(&idx[..k]);
    }
    rows.sort_unstable();
    rows
}

struct Scored {
    tlu: Tlu,
    accuracy: f64,
}

/// One selection attempt seeded by `config.seed`.
pub fn sfs_select<T: TluTrainer + ?Sized>(
    data: &BinaryData,
    config: &SfsConfig,
    trainer: &T,
) -> Result<SearchOutcome> {
    config.validate()?;
    let m = data.n_features();
    let limit = config.feature_limit(m)?;
    let seed = config.seed;
    let fit = fit_rows(data, config.fit_fraction, seed);
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(&mut stream_rng(seed, "order", 0));

    let mut trainings = 0usize;
    let mut fit_candidate = |features: &[usize], round: usize, feature: usize| -> Result<Scored> {
        trainings += 1;
        let problem = data.problem(&fit, features)?;
        let tlu = trainer.train(
            &problem,
            derive_seed(seed, "candidate", ((round as u64) << 32) | feature as u64),
        )?;
        let accuracy = data.accuracy(&tlu);
        Ok(Scored { tlu, accuracy })
    };

    // round 0: single-feature tests
    let mut current: Option<Scored> = None;
    for &f in &order {
        let cand = fit_candidate(&[f], 0, f)?;
        if current
            .as_ref()
            .map_or(true, |c| cand.accuracy > c.accuracy)
        {
            current = Some(cand);
        }
    }
    let mut current = current.expect("at least one feature");
    let mut best = TestCandidate {
        tlu: current.tlu.clone(),
        accuracy: current.accuracy,
        attempt: 0,
    };
    let mut steps = vec![SearchStep {
        kind: StepKind::Initial,
        features: current.tlu.features().to_vec(),
        accuracy: current.accuracy,
        best_accuracy: best.accuracy,
    }];

    let mut round = 0;
    let stop = loop {
        let used = current.tlu.features().to_vec();
        if used.len() >= limit {
            break StopReason::FeatureLimit;
        }
        let unused: Vec<usize> = order
            .iter()
            .copied()
            .filter(|f| !used.contains(f))
            .collect();
        if unused.is_empty() {
            break StopReason::FeaturesExhausted;
        }
        round += 1;
        let mut round_best: Option<Scored> = None;
        for f in unused {
            let mut features = used.clone();
            features.push(f);
            let cand = fit_candidate(&features, round, f)?;
            let improves = cand.accuracy > current.accuracy;
            if round_best
                .as_ref()
                .map_or(true, |b| cand.accuracy > b.accuracy)
            {
                round_best = Some(cand);
            }
            if improves && config.strategy == SearchStrategy::FirstImprovement {
                break;
            }
        }
        let cand = round_best.expect("unused features were non-empty");
        let kind = if cand.accuracy > current.accuracy {
            StepKind::Accepted
        } else if cand.accuracy < best.accuracy - config.drop_threshold {
            break StopReason::AccuracyDrop;
        } else {
            StepKind::Explored
        };
        current = cand;
        if current.accuracy > best.accuracy {
            best = TestCandidate {
                tlu: current.tlu.clone(),
                accuracy: current.accuracy,
                attempt: 0,
            };
        }
        steps.push(SearchStep {
            kind,
            features: current.tlu.features().to_vec(),
            accuracy: current.accuracy,
            best_accuracy: best.accuracy,
        });
    };

    Ok(SearchOutcome {
        best,
        steps,
        stop,
        trainings,
    })
}

/// Runs `N_t` attempts, attempt `a` seeded by `derive_seed(seed, "attempt", a)`.
pub fn multi_attempt_search<T: TluTrainer + ?Sized>(
    data: &BinaryData,
    config: &SfsConfig,
    trainer: &T,
) -> Result<Vec<SearchOutcome>> {
    config.validate()?;
    (0..config.attempts)
        .map(|a| {
            let cfg = SfsConfig {
                seed: derive_seed(config.seed, "attempt", a as u64),
                ..config.clone()
            };
            let mut outcome = sfs_select(data, &cfg, trainer)?;
            outcome.best.attempt = a;
            Ok(outcome)
        })
        .collect()
}

/// Best test over all attempts: highest accuracy, then fewer features,
/// then earlier attempt.
pub fn multi_attempt_select<T: TluTrainer + ?Sized>(
    data: &BinaryData,
    config: &SfsConfig,
    trainer: &T,
) -> Result<TestCandidate> {
    let mut best: Option<TestCandidate> = None;
    for outcome in multi_attempt_search(data, config, trainer)? {
        let cand = outcome.best;
        let better = match &best {
            None => true,
            Some(b) => {
                cand.accuracy > b.accuracy
                    || (cand.accuracy == b.accuracy && cand.feature_count() < b.feature_count())
            }
        };
        if better {
            best = Some(cand);
        }
    }
    Ok(best.expect("attempts >= 1"))
}
