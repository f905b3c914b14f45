use std::collections::{HashMap, HashSet};
use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

const DEFAULT_CONTRACTIONS: &str = include_str!("../../data/contractions.tsv");
const STOPWORDS: &str = include_str!("../../data/stopwords.txt");

static HTML_TAG: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"<[^<>]*>").unwrap());
static HTML_ENTITY: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"&(#[0-9]+|#[xX][0-9a-fA-F]+|[A-Za-z][A-Za-z0-9]*);").unwrap());
static URL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)\b(?:https?://|www\.)\S*").unwrap());
static WORD: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"[\p{L}\p{N}']+").unwrap());

/// Lowercase contraction → expansion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContractionMap(HashMap<String, String>);

impl ContractionMap {
    /// Parses two-column TSV (`contraction<TAB>expansion`); blank lines and
    /// `#` comments are skipped.
    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut map = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('\t').ok_or_else(|| Error::MalformedRow {
                row: i + 1,
                message: "expected two tab-separated columns".into(),
            })?;
            map.insert(k.trim().to_lowercase(), v.trim().to_string());
        }
        Ok(ContractionMap(map))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        ContractionMap::from_tsv(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Default for ContractionMap {
    fn default() -> Self {
        ContractionMap::from_tsv(DEFAULT_CONTRACTIONS).expect("shipped contraction map parses")
    }
}

#[derive(Clone, Debug)]
pub struct CleaningConfig {
    pub contractions: ContractionMap,
    pub keep_stopwords: bool,
    pub keep_numbers: bool,
}

impl Default for CleaningConfig {
    fn default() -> Self {
        CleaningConfig { contractions: ContractionMap::default(), keep_stopwords: true, keep_numbers: true }
    }
}

/// Canonical decomposition with combining marks dropped.
pub fn fold_accents(text: &str) -> String {
    text.nfd().filter(|c| !is_combining_mark(*c)).collect()
}

/// Replaces every maximal letter/digit/apostrophe run that matches a map key,
/// case-insensitively. Curly apostrophes are treated as straight ones.
pub fn expand_contractions(text: &str, map: &ContractionMap) -> String {
    let text = text.replace(['\u{2019}', '\u{2018}'], "'");
    WORD.replace_all(&text, |caps: &regex::Captures<'_>| {
        let tok = &caps[0];
        let lower = tok.to_lowercase();
        if let Some(exp) = map.get(&lower) {
            return exp.to_string();
        }
        // quoted words such as 'it's'
        let inner = lower.trim_matches('\'');
        match map.get(inner) {
            Some(exp) if inner.len() < lower.len() => {
                let lead = lower.len() - lower.trim_start_matches('\'').len();
                let trail = lower.len() - lower.trim_end_matches('\'').len();
                format!("{}{exp}{}", "'".repeat(lead), "'".repeat(trail))
            }
            _ => tok.to_string(),
        }
    })
    .into_owned()
}

fn stopwords() -> &'static HashSet<&'static str> {
    static SET: LazyLock<HashSet<&'static str>> =
        LazyLock::new(|| STOPWORDS.lines().map(str::trim).filter(|l| !l.is_empty()).collect());
    &SET
}

/// Cleans raw text in three fixed steps:
/// 1. strip HTML tags and entities, URLs, and accents;
/// 2. expand contractions;
/// 3. lowercase, drop apostrophes, replace every other character outside
///    `[a-z0-9]` with a space and collapse whitespace.
///
/// Stop-words and numbers are kept unless the config says otherwise.
pub fn clean_text(raw: &str, cfg: &CleaningConfig) -> String {
    let s = HTML_TAG.replace_all(raw, " ");
    let s = HTML_ENTITY.replace_all(&s, " ");
    let s = URL.replace_all(&s, " ");
    let s = fold_accents(&s);

    let s = expand_contractions(&s, &cfg.contractions);

    let mut out = String::with_capacity(s.len());
    for ch in s.chars().flat_map(char::to_lowercase) {
        match ch {
            'a'..='z' | '0'..='9' => out.push(ch),
            '\'' => {}
            _ => out.push(' '),
        }
    }
    out.split_whitespace()
        .filter(|w| cfg.keep_stopwords || !stopwords().contains(w))
        .map(|w| if cfg.keep_numbers { w.to_string() } else { w.chars().filter(|c| !c.is_ascii_digit()).collect() })
        .filter(|w| !w.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}
