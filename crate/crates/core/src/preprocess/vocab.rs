use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{clean_text, CleaningConfig};
use crate::corpus::DocumentSet;
use crate::error::{Error, Result};

pub const PAD: &str = "[PAD]";
pub const CLS: &str = "[CLS]";
pub const SEP: &str = "[SEP]";
pub const UNK: &str = "[UNK]";
const RESERVED: [&str; 4] = [PAD, CLS, SEP, UNK];
const MAX_WORDPIECE_CHARS: usize = 100;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VocabKind {
    /// One id per cleaned word; ids 0-3 reserved for pad/start/end/unknown.
    WholeWord,
    /// Subword vocabulary shipped with a pretrained encoder.
    WordPiece,
}

/// Token ↔ id mapping with the four marker ids.
#[derive(Clone, Debug, PartialEq)]
pub struct Vocabulary {
    kind: VocabKind,
    tokens: Vec<String>,
    index: HashMap<String, u32>,
    pad: u32,
    cls: u32,
    sep: u32,
    unk: u32,
}

/// Fixed-length model input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TokenizedInput {
    pub token_ids: Vec<u32>,
    pub attention_mask: Vec<u8>,
}

impl TokenizedInput {
    /// Number of non-padding positions (markers included).
    pub fn active_len(&self) -> usize {
        self.attention_mask.iter().map(|&m| usize::from(m)).sum()
    }

    pub fn active_ids(&self) -> &[u32] {
        &self.token_ids[..self.active_len()]
    }
}

impl Vocabulary {
    /// Whole-word vocabulary; reserved markers precede `words`.
    pub fn whole_word<I, S>(words: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let tokens: Vec<String> =
            RESERVED.iter().map(|s| s.to_string()).chain(words.into_iter().map(Into::into)).collect();
        Vocabulary::from_tokens(VocabKind::WholeWord, tokens)
    }

    /// Subword vocabulary in file order; must define the four markers.
    pub fn word_piece<I, S>(tokens: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Vocabulary::from_tokens(VocabKind::WordPiece, tokens.into_iter().map(Into::into).collect())
    }

    fn from_tokens(kind: VocabKind, tokens: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if t.is_empty() || t.chars().any(char::is_whitespace) {
                return Err(Error::InvalidConfig(format!("vocabulary entry {i} is not a single token: {t:?}")));
            }
            if index.insert(t.clone(), i as u32).is_some() {
                return Err(Error::InvalidConfig(format!("vocabulary entry {t:?} appears twice")));
            }
        }
        let id = |name: &str| {
            index.get(name).copied().ok_or_else(|| Error::InvalidConfig(format!("vocabulary lacks {name}")))
        };
        let (pad, cls, sep, unk) = (id(PAD)?, id(CLS)?, id(SEP)?, id(UNK)?);
        Ok(Vocabulary { kind, tokens, index, pad, cls, sep, unk })
    }

    /// Reads a vocabulary file: one token per line. Whole-word files list
    /// only the learned words (ids start after the reserved four).
    pub fn load(path: impl AsRef<Path>, kind: VocabKind) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let lines = text.lines().map(|l| l.trim_end_matches('\r'));
        match kind {
            VocabKind::WholeWord => Vocabulary::whole_word(lines),
            VocabKind::WordPiece => Vocabulary::word_piece(lines),
        }
    }

    pub fn to_file_string(&self) -> String {
        let skip = match self.kind {
            VocabKind::WholeWord => RESERVED.len(),
            VocabKind::WordPiece => 0,
        };
        let mut out = String::new();
        for t in &self.tokens[skip..] {
            let _ = writeln!(out, "{t}");
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_file_string()).map_err(|e| Error::io(path, e))
    }

    pub fn kind(&self) -> VocabKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn pad_id(&self) -> u32 {
        self.pad
    }

    pub fn cls_id(&self) -> u32 {
        self.cls
    }

    pub fn sep_id(&self) -> u32 {
        self.sep
    }

    pub fn unk_id(&self) -> u32 {
        self.unk
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    fn encode_word(&self, word: &str, out: &mut Vec<u32>) {
        match self.kind {
            VocabKind::WholeWord => out.push(self.id(word).unwrap_or(self.unk)),
            VocabKind::WordPiece => {
                let chars: Vec<char> = word.chars().collect();
                if chars.len() > MAX_WORDPIECE_CHARS {
                    out.push(self.unk);
                    return;
                }
                // greedy longest match first
                let mut pieces = Vec::new();
                let mut start = 0;
                while start < chars.len() {
                    let mut end = chars.len();
                    let mut found = None;
                    while start < end {
                        let mut sub: String = chars[start..end].iter().collect();
                        if start > 0 {
                            sub.insert_str(0, "##");
                        }
                        if let Some(id) = self.id(&sub) {
                            found = Some(id);
                            break;
                        }
                        end -= 1;
                    }
                    match found {
                        Some(id) => pieces.push(id),
                        None => {
                            out.push(self.unk);
                            return;
                        }
                    }
                    start = end;
                }
                out.extend(pieces);
            }
        }
    }

    /// Ids for whitespace-separated (already cleaned) text, without markers.
    pub fn encode(&self, text: &str) -> Vec<u32> {
        let mut out = Vec::new();
        for w in text.split_whitespace() {
            self.encode_word(w, &mut out);
        }
        out
    }

    /// Words for ids, skipping markers and padding; subword continuations
    /// are merged.
    pub fn decode(&self, ids: &[u32]) -> Vec<String> {
        let mut words: Vec<String> = Vec::new();
        for &id in ids {
            if id == self.pad || id == self.cls || id == self.sep {
                continue;
            }
            let tok = self.token(id).unwrap_or(UNK);
            match (self.kind, tok.strip_prefix("##"), words.last_mut()) {
                (VocabKind::WordPiece, Some(rest), Some(last)) => last.push_str(rest),
                _ => words.push(tok.to_string()),
            }
        }
        words
    }
}

/// Adds start/end markers and pads to `max_len`. Never truncates: inputs
/// longer than `max_len - 2` tokens are an error.
pub fn tokenize(text: &str, vocab: &Vocabulary, max_len: usize) -> Result<TokenizedInput> {
    if max_len < 3 {
        return Err(Error::InvalidConfig(format!("max_len must be at least 3, got {max_len}")));
    }
    let body = vocab.encode(text);
    let limit = max_len - 2;
    if body.len() > limit {
        return Err(Error::OverLength { count: body.len(), limit });
    }
    let mut token_ids = Vec::with_capacity(max_len);
    token_ids.push(vocab.cls_id());
    token_ids.extend(body);
    token_ids.push(vocab.sep_id());
    let active = token_ids.len();
    token_ids.resize(max_len, vocab.pad_id());
    let mut attention_mask = vec![1u8; active];
    attention_mask.resize(max_len, 0);
    Ok(TokenizedInput { token_ids, attention_mask })
}

/// Whole-word vocabulary over the cleaned text of `docs`; words seen fewer
/// than `min_count` times map to the unknown id. Ordered by descending
/// frequency, ties alphabetical.
pub fn build_vocab(docs: &DocumentSet, min_count: usize) -> Result<Vocabulary> {
    if docs.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let cfg = CleaningConfig::default();
    let mut counts: HashMap<String, usize> = HashMap::new();
    for d in docs {
        let text = match &d.clean_text {
            Some(c) => c.clone(),
            None => clean_text(&d.text, &cfg),
        };
        for w in text.split_whitespace() {
            *counts.entry(w.to_string()).or_default() += 1;
        }
    }
    let mut words: Vec<(String, usize)> =
        counts.into_iter().filter(|(w, c)| *c >= min_count.max(1) && !RESERVED.contains(&w.as_str())).collect();
    words.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Vocabulary::whole_word(words.into_iter().map(|(w, _)| w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Document, Source};
    use proptest::prelude::*;

    fn docs(texts: &[&str]) -> DocumentSet {
        DocumentSet::new(texts.iter().enumerate().map(|(i, t)| Document::new(i.to_string(), *t, Source::Dir)).collect())
            .unwrap()
    }

    #[test]
    fn min_count_filters() {
        let v = build_vocab(&docs(&["a a b"]), 2).unwrap();
        assert!(v.id("a").is_some());
        assert!(v.id("b").is_none());
        assert_eq!(v.id("a"), Some(4));
        let v = build_vocab(&docs(&["a a b", "c"]), 1).unwrap();
        assert_eq!(v.len(), 7);
        assert!(matches!(build_vocab(&DocumentSet::empty(), 1), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn tokenize_contract() {
        let v = Vocabulary::whole_word(["dry", "wells"]).unwrap();
        let t = tokenize("", &v, 48).unwrap();
        assert_eq!(t.token_ids.len(), 48);
        assert_eq!(t.active_len(), 2);
        assert_eq!(&t.token_ids[..2], &[v.cls_id(), v.sep_id()]);
        let t = tokenize("dry wells everywhere", &v, 48).unwrap();
        assert_eq!(t.active_len(), 5);
        assert_eq!(t.token_ids[3], v.unk_id());
        let long = vec!["dry"; 60].join(" ");
        assert!(matches!(tokenize(&long, &v, 48), Err(Error::OverLength { count: 60, limit: 46 })));
        assert!(tokenize("dry", &v, 2).is_err());
        // exactly at the limit is fine
        assert!(tokenize(&vec!["dry"; 46].join(" "), &v, 48).is_ok());
    }

    #[test]
    fn file_round_trip() {
        let v = Vocabulary::whole_word(["dry", "wells"]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("vocab.txt");
        v.save(&p).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "dry\nwells\n");
        assert_eq!(Vocabulary::load(&p, VocabKind::WholeWord).unwrap(), v);
    }

    #[test]
    fn word_piece_greedy() {
        let v =
            Vocabulary::word_piece(["[PAD]", "[UNK]", "[CLS]", "[SEP]", "drought", "irrig", "##ation", "##s", "un"])
                .unwrap();
        assert_eq!(v.encode("irrigation droughts"), vec![5, 6, 4, 7]);
        assert_eq!(v.encode("xyz"), vec![v.unk_id()]);
        assert_eq!(v.decode(&v.encode("irrigation droughts")), vec!["irrigation", "droughts"]);
        assert!(Vocabulary::word_piece(["a", "b"]).is_err());
    }

    proptest! {
        #[test]
        fn decode_inverts_tokenize(words in prop::collection::vec("[a-d]{1,2}", 0..20)) {
            let v = Vocabulary::whole_word(["a", "b", "c", "aa", "ab"]).unwrap();
            let text = words.join(" ");
            let t = tokenize(&text, &v, 48).unwrap();
            let expected: Vec<String> = words.iter().map(|w| if v.id(w).is_some() { w.clone() } else { UNK.to_string() }).collect();
            prop_assert_eq!(v.decode(&t.token_ids), expected);
        }
    }
}
