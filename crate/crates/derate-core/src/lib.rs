//! Soft-error de-rating analysis for gate-level netlists.
//!
//! The crate covers the full flow from a structural netlist to a predicted
//! functional de-rating figure per flip-flop:
//!
//! * [`netlist`]: parse and query the structural netlist format.
//! * [`sim`]: cycle-accurate two-valued simulation with optional bit-flip
//!   injection, producing output traces and per-flip-flop activity counts.
//! * [`campaign`]: statistical fault-injection campaigns and run
//!   classification against a golden trace.
//! * [`features`]: static and dynamic per-flip-flop features for model
//!   training.
//! * [`ml`]: the regression model families (least squares, k-NN, decision
//!   tree, kernel ridge, support vector regression).
//! * [`eval`]: metrics, Monte-Carlo cross-validation, hyperparameter search
//!   and learning curves.
//! * [`demo`]: a deterministic generator for a self-contained example
//!   design plus matching stimulus.
//!
//! All randomness flows through [`rng`] so that a given seed reproduces a
//! campaign or a model selection bit for bit.

pub mod campaign;
pub mod demo;
pub mod eval;
pub mod features;
pub mod ml;
pub mod netlist;
pub mod rng;
pub mod sim;

pub use campaign::{CampaignPlan, CheckerConfig, Classification, FdrRecord, FdrTable};
pub use eval::{CvPlan, ModelId, Scores, SearchPlan, TuneOutcome};
pub use features::{FeatureSet, FeatureVector, FEATURE_NAMES};
pub use ml::{Dataset, ModelSpec, TrainedModel};
pub use netlist::{CellId, CellKind, FfId, NetId, Netlist};
pub use sim::{Fault, SimRun, Stimulus, Trace};
