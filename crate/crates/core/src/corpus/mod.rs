//! Documents, the label schema and everything that reads, splits, measures
//! or fabricates corpora.

mod category;
mod document;
pub mod io;
mod split;
mod stats;
mod synth;

pub use category::{aggregate_labels, Category, LabelVector, RawCategory, RawLabelVector9};
pub use document::{Document, DocumentSet, Source};
pub use io::{load_documents, write_documents, Format};
pub use split::{split_dataset, DatasetSplit, Split, SplitManifest, SplitSpec};
pub use stats::{corpus_stats, corpus_stats_binned, label_distribution, CorpusStats, HistogramBin};
pub use synth::{generate_synthetic, TEMPLATES};
