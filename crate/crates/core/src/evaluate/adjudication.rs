use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::Category;
use crate::error::{Error, Result};

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    ModelCorrect,
    KeywordCorrect,
    BothDefensible,
    Neither,
}

impl Verdict {
    pub const ALL: [Verdict; 4] =
        [Verdict::ModelCorrect, Verdict::KeywordCorrect, Verdict::BothDefensible, Verdict::Neither];
}

/// A reviewer's decision on one controversial (document, category) pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdjudicationRecord {
    pub doc_id: String,
    pub category: Category,
    pub keyword_label: bool,
    pub model_label: bool,
    pub verdict: Verdict,
    #[serde(default)]
    pub note: String,
    #[serde(default)]
    pub reviewer: String,
    #[serde(default)]
    pub timestamp: String,
}

impl AdjudicationRecord {
    /// Fails unless the two labels disagree.
    pub fn new(
        doc_id: impl Into<String>,
        category: Category,
        keyword_label: bool,
        model_label: bool,
        verdict: Verdict,
    ) -> Result<Self> {
        let doc_id = doc_id.into();
        if keyword_label == model_label {
            return Err(Error::InvalidArgument(format!("document {doc_id:?} is not controversial for {category}")));
        }
        Ok(AdjudicationRecord {
            doc_id,
            category,
            keyword_label,
            model_label,
            verdict,
            note: String::new(),
            reviewer: String::new(),
            timestamp: String::new(),
        })
    }
}

/// Append-only JSON-lines ledger.
#[derive(Clone, Debug)]
pub struct AdjudicationLedger {
    path: PathBuf,
}

impl AdjudicationLedger {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        AdjudicationLedger { path: path.into() }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&self, record: &AdjudicationRecord) -> Result<()> {
        if record.keyword_label == record.model_label {
            return Err(Error::InvalidArgument(format!("record for {:?} is not controversial", record.doc_id)));
        }
        let mut f =
            OpenOptions::new().create(true).append(true).open(&self.path).map_err(|e| Error::io(&self.path, e))?;
        let line = serde_json::to_string(record)?;
        writeln!(f, "{line}").map_err(|e| Error::io(&self.path, e))
    }

    /// All records; a missing file is an empty ledger.
    pub fn records(&self) -> Result<Vec<AdjudicationRecord>> {
        if !self.path.exists() {
            return Ok(Vec::new());
        }
        read_ledger(&self.path)
    }
}

pub fn read_ledger(path: impl AsRef<Path>) -> Result<Vec<AdjudicationRecord>> {
    let path = path.as_ref();
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec =
            serde_json::from_str(&line).map_err(|e| Error::MalformedRow { row: i + 1, message: e.to_string() })?;
        out.push(rec);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdjudicationSummary {
    pub category: Category,
    pub n: usize,
    /// Share of records with verdict `model_correct`; other verdicts count
    /// against it.
    pub model_correct_fraction: f64,
    pub by_verdict: BTreeMap<Verdict, usize>,
}

pub fn adjudication_summary(records: &[AdjudicationRecord], category: Category) -> Result<AdjudicationSummary> {
    if records.is_empty() {
        return Err(Error::InvalidArgument(format!("no adjudication records for {category}")));
    }
    if let Some(r) = records.iter().find(|r| r.category != category) {
        return Err(Error::InvalidArgument(format!("record {:?} belongs to {}, not {category}", r.doc_id, r.category)));
    }
    let mut by_verdict: BTreeMap<Verdict, usize> = Verdict::ALL.iter().map(|v| (*v, 0)).collect();
    for r in records {
        *by_verdict.entry(r.verdict).or_default() += 1;
    }
    let n = records.len();
    let model_correct_fraction = by_verdict[&Verdict::ModelCorrect] as f64 / n as f64;
    Ok(AdjudicationSummary { category, n, model_correct_fraction, by_verdict })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ledger(category: Category, model_correct: usize, keyword_correct: usize) -> Vec<AdjudicationRecord> {
        (0..model_correct + keyword_correct)
            .map(|i| {
                let v = if i < model_correct { Verdict::ModelCorrect } else { Verdict::KeywordCorrect };
                AdjudicationRecord::new(format!("t{i}"), category, i % 2 == 0, i % 2 == 1, v).unwrap()
            })
            .collect()
    }

    #[test]
    fn fractions() {
        let s = adjudication_summary(&ledger(Category::Agriculture, 89, 11), Category::Agriculture).unwrap();
        assert_eq!((s.n, s.model_correct_fraction), (100, 0.89));
        let s = adjudication_summary(&ledger(Category::SocietyPublicHealth, 78, 22), Category::SocietyPublicHealth)
            .unwrap();
        assert_eq!(s.model_correct_fraction, 0.78);
        let s = adjudication_summary(&ledger(Category::Fire, 0, 5), Category::Fire).unwrap();
        assert_eq!(s.model_correct_fraction, 0.0);
        assert_eq!(s.by_verdict[&Verdict::KeywordCorrect], 5);
    }

    #[test]
    fn errors() {
        assert!(adjudication_summary(&[], Category::Fire).is_err());
        assert!(adjudication_summary(&ledger(Category::Fire, 1, 0), Category::Economy).is_err());
        assert!(AdjudicationRecord::new("x", Category::Fire, true, true, Verdict::Neither).is_err());
    }

    #[test]
    fn ledger_appends() {
        let dir = tempfile::tempdir().unwrap();
        let l = AdjudicationLedger::new(dir.path().join("ledger.jsonl"));
        assert!(l.records().unwrap().is_empty());
        let mut r = AdjudicationRecord::new("t1", Category::Fire, false, true, Verdict::BothDefensible).unwrap();
        r.note = "smoke mention".into();
        l.append(&r).unwrap();
        l.append(&r).unwrap();
        let back = l.records().unwrap();
        assert_eq!(back, vec![r.clone(), r]);
        let text = std::fs::read_to_string(l.path()).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.contains("\"verdict\":\"both_defensible\""));
    }
}
