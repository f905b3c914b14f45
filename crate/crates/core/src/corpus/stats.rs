use serde::{Deserialize, Serialize};

use super::{Category, DocumentSet};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    /// Inclusive lower bound in words.
    pub lo: usize,
    /// Exclusive upper bound in words.
    pub hi: usize,
    pub count: usize,
}

/// Word-count profile of a corpus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub word_counts: Vec<usize>,
    pub total_words: usize,
    pub mean_words: f64,
    pub max_words: usize,
    pub histogram: Vec<HistogramBin>,
}

pub const DEFAULT_BIN_WIDTH: usize = 5;

/// Whitespace word counts of the raw text.
pub fn corpus_stats(docs: &DocumentSet) -> CorpusStats {
    corpus_stats_binned(docs, DEFAULT_BIN_WIDTH)
}

pub fn corpus_stats_binned(docs: &DocumentSet, bin_width: usize) -> CorpusStats {
    let bin_width = bin_width.max(1);
    let word_counts: Vec<usize> = docs.iter().map(|d| d.text.split_whitespace().count()).collect();
    let total_words = word_counts.iter().sum();
    let max_words = word_counts.iter().copied().max().unwrap_or(0);
    let mean_words = if word_counts.is_empty() { 0.0 } else { total_words as f64 / word_counts.len() as f64 };
    let histogram = if word_counts.is_empty() {
        Vec::new()
    } else {
        let mut bins: Vec<HistogramBin> = (0..=max_words / bin_width)
            .map(|b| HistogramBin { lo: b * bin_width, hi: (b + 1) * bin_width, count: 0 })
            .collect();
        for &c in &word_counts {
            bins[c / bin_width].count += 1;
        }
        bins
    };
    CorpusStats { word_counts, total_words, mean_words, max_words, histogram }
}

/// Number of labeled documents carrying each category.
pub fn label_distribution(docs: &DocumentSet) -> [usize; 7] {
    let mut out = [0; 7];
    for l in docs.iter().filter_map(|d| d.labels) {
        for c in Category::ALL {
            out[c.index()] += usize::from(l[c]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Document, Source};

    fn set(texts: &[&str]) -> DocumentSet {
        DocumentSet::new(
            texts.iter().enumerate().map(|(i, t)| Document::new(i.to_string(), *t, Source::Tweet)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn hand_counts() {
        let s = corpus_stats(&set(&["a b c", "d e"]));
        assert_eq!(s.word_counts, vec![3, 2]);
        assert_eq!(s.total_words, 5);
        assert_eq!(s.mean_words, 2.5);
        assert_eq!(s.max_words, 3);
        assert_eq!(s.histogram, vec![HistogramBin { lo: 0, hi: 5, count: 2 }]);
    }

    #[test]
    fn empty_and_single() {
        let s = corpus_stats(&DocumentSet::empty());
        assert_eq!((s.total_words, s.mean_words, s.max_words), (0, 0.0, 0));
        let s = corpus_stats(&set(&["drought"]));
        assert_eq!((s.word_counts.clone(), s.max_words), (vec![1], 1));
    }

    #[test]
    fn histogram_covers_every_document() {
        let s = corpus_stats_binned(&set(&["a", "a b c d e f", "a  b\tc\nd", "x y z w v u t s r q p"]), 3);
        assert_eq!(s.histogram.iter().map(|b| b.count).sum::<usize>(), 4);
        assert_eq!(s.total_words, s.word_counts.iter().sum::<usize>());
        assert!(s.max_words as f64 >= s.mean_words);
    }
}
