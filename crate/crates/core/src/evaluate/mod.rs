//! Measurement: confusion counts, precision/recall/F1 at class, micro and
//! macro level, label co-occurrence, and the controversial-label review.

mod adjudication;
mod confusion;
mod controversial;
mod cooccur;
mod metrics;

pub use adjudication::{
    adjudication_summary, read_ledger, AdjudicationLedger, AdjudicationRecord, AdjudicationSummary, Verdict,
};
pub use confusion::{binary_confusion, BinaryConfusion};
pub use controversial::{align_by_id, controversial_split, ControversialSplit, Disagreement};
pub use cooccur::{cooccurrence, cooccurrence_labels, CooccurrenceMatrix};
pub use metrics::{
    evaluate_predictions, macro_mean, micro_macro_metrics, per_class_metrics, CategoryReport, ClassMetrics,
    MetricsReport, Overall, Undefined,
};
