//! Weak labels from a per-category unigram keyword table.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use crate::corpus::{Category, DocumentSet, LabelVector};
use crate::error::{Error, Result};

const DEFAULT_TABLE: &str = include_str!("../data/keywords.json");

/// Category → set of lowercase unigram keywords.
///
/// A keyword may belong to several categories and then sets all of them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeywordTable {
    entries: BTreeMap<Category, BTreeSet<String>>,
}

impl KeywordTable {
    /// Parses the JSON form: `{ "<category>": ["kw", ...], ... }`.
    pub fn from_json(json: &str) -> Result<Self> {
        let raw: BTreeMap<String, Vec<String>> = serde_json::from_str(json)?;
        let mut entries = BTreeMap::new();
        for (name, words) in raw {
            let cat: Category = name.parse()?;
            if words.is_empty() {
                return Err(Error::EmptyCategory(name));
            }
            let mut set = BTreeSet::new();
            for w in words {
                let valid = !w.is_empty() && !w.chars().any(char::is_whitespace) && w.to_lowercase() == w;
                if !valid {
                    return Err(Error::MultiWordKeyword(w));
                }
                set.insert(w);
            }
            entries.insert(cat, set);
        }
        Ok(KeywordTable { entries })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        KeywordTable::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        let m: BTreeMap<&str, &BTreeSet<String>> = self.entries.iter().map(|(c, s)| (c.name(), s)).collect();
        serde_json::to_string_pretty(&m).expect("string map serializes")
    }

    pub fn is_empty(&self) -> bool {
        self.entries.values().all(BTreeSet::is_empty)
    }

    pub fn keywords(&self, c: Category) -> impl Iterator<Item = &str> {
        self.entries.get(&c).into_iter().flatten().map(String::as_str)
    }

    pub fn contains(&self, c: Category, word: &str) -> bool {
        self.entries.get(&c).is_some_and(|s| s.contains(word))
    }

    /// Every category listing `word`.
    pub fn categories_of(&self, word: &str) -> LabelVector {
        LabelVector::from_categories(Category::ALL.into_iter().filter(|c| self.contains(*c, word)))
    }

    pub fn label_document(&self, text: &str) -> LabelVector {
        label_document(text, self)
    }
}

impl Default for KeywordTable {
    /// The shipped table of drought-impact keywords.
    fn default() -> Self {
        KeywordTable::from_json(DEFAULT_TABLE).expect("shipped keyword table is valid")
    }
}

pub fn load_keyword_table(path: impl AsRef<Path>) -> Result<KeywordTable> {
    KeywordTable::load(path)
}

/// Lowercased tokens with `#`/`@` sigils and surrounding punctuation removed.
pub fn match_tokens(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split_whitespace().filter_map(|tok| {
        // upper-then-lower folds ligatures and other case-asymmetric forms
        let folded = tok.to_uppercase().to_lowercase();
        let t = folded.trim_start_matches(['#', '@']).trim_matches(|c: char| !c.is_alphanumeric());
        (!t.is_empty()).then(|| t.to_string())
    })
}

/// A category is positive iff some token equals one of its keywords exactly.
pub fn label_document(text: &str, table: &KeywordTable) -> LabelVector {
    match_tokens(text).fold(LabelVector::EMPTY, |acc, t| acc.union(&table.categories_of(&t)))
}

/// Labels every document and keeps those with at least one positive category.
pub fn label_corpus(docs: &DocumentSet, table: &KeywordTable) -> DocumentSet {
    let kept = docs
        .iter()
        .filter_map(|d| {
            let labels = label_document(&d.text, table);
            (!labels.is_empty()).then(|| {
                let mut d = d.clone();
                d.labels = Some(labels);
                d.raw_labels = None;
                d
            })
        })
        .collect();
    DocumentSet::new(kept).expect("subset of a valid set")
}
