//! Word-level evaluation of ASR-based reading tutors.
//!
//! A reading is aligned against its prompt to get one accept/reject label
//! per prompt word. Labels from a human transcript and from a system are
//! compared in a two-by-two confusion matrix, and agreement is summarised
//! with Cohen's kappa and the Matthews correlation coefficient.

pub mod align;
pub mod analysis;
pub mod classify;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod metrics;
pub mod protocol;
pub mod report;
pub mod synth;

pub use align::{align, align_tokens, AlignmentOp, AlignmentResult, BinaryScoreVector, EditCosts, OpKind};
pub use analysis::{
    evaluate, evaluate_strata, sweep_threshold, Dimension, Evaluation, Objective, StratifiedReport, SystemSpec,
    ThresholdSweepResult,
};
pub use classify::{confusion, merge, ConfusionMatrix};
pub use corpus::{load_corpus, Corpus, Prompt, Recording, RecordingStatus, TaskType, WordToken};
pub use error::{Error, Result};
pub use metrics::{cohens_kappa, mcc, precision_recall_f, Class, MetricsReport, Rates};
