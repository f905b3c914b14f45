//! Text cleaning and the tokenization contract feeding the classifier.

mod clean;
mod vocab;

pub use clean::{clean_text, expand_contractions, fold_accents, CleaningConfig, ContractionMap};
pub use vocab::{build_vocab, tokenize, TokenizedInput, VocabKind, Vocabulary};
