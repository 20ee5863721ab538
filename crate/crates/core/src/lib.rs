//! Multi-class linear classification with pairwise threshold-logic
//! ensembles.
//!
//! An r-class problem is split into `r (r - 1) / 2` two-class problems.
//! Each is solved by a small threshold logic unit over a greedily selected
//! feature subset, and the units are superposed with fixed `±1` weights
//! into per-class discriminants decided by winner-take-all. A jointly
//! trained linear machine is included as the monolithic baseline.

pub mod analysis;
pub mod data;
pub mod decision;
pub mod ensemble;
pub mod error;
pub mod linear_machine;
pub mod model_file;
mod pocket;
pub mod rng;
pub mod select;
pub mod tlu;

pub use analysis::{significance, three_sigma_table, SignificanceReport};
pub use data::{Dataset, LabeledExample, NormalizationParams, SplitSpec, SynthSpec};
pub use decision::{evaluate, Classifier, Evaluation, RecordingDecision};
pub use ensemble::{train_pairwise, PairTest, PairwiseConfig, PairwiseEnsemble};
pub use error::{Error, Result};
pub use linear_machine::{lm_pocket_train, LinearMachine};
pub use model_file::{ModelFile, Predictor, TrainedModel, TrainingEcho};
pub use pocket::{PocketConfig, PocketState, ResetMode};
pub use select::{multi_attempt_select, sfs_select, BinaryData, SearchStrategy, SfsConfig};
pub use tlu::{BinaryProblem, ThermalConfig, Tlu, TluTrainer, TrainerConfig};
