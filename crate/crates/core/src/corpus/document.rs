use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{LabelVector, RawLabelVector9};
use crate::error::{Error, Result};

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Dir,
    #[default]
    Tweet,
    Synthetic,
}

impl Source {
    pub fn name(self) -> &'static str {
        match self {
            Source::Dir => "dir",
            Source::Tweet => "tweet",
            Source::Synthetic => "synthetic",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Source {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dir" => Ok(Source::Dir),
            "tweet" => Ok(Source::Tweet),
            "synthetic" => Ok(Source::Synthetic),
            other => Err(Error::InvalidArgument(format!("unknown source {other:?}"))),
        }
    }
}

/// One report title or post.
#[derive(Clone, Debug, PartialEq)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub source: Source,
    pub location: Option<String>,
    pub timestamp: Option<String>,
    /// Seven-category labels; derived from `raw_labels` when those were given.
    pub labels: Option<LabelVector>,
    pub raw_labels: Option<RawLabelVector9>,
    /// Output of the cleaning pipeline, once applied.
    pub clean_text: Option<String>,
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>, source: Source) -> Self {
        Document {
            id: id.into(),
            text: text.into(),
            source,
            location: None,
            timestamp: None,
            labels: None,
            raw_labels: None,
            clean_text: None,
        }
    }

    pub fn with_labels(mut self, labels: LabelVector) -> Self {
        self.labels = Some(labels);
        self
    }

    /// Text fed to the model: the cleaned text if present.
    pub fn model_text(&self) -> &str {
        self.clean_text.as_deref().unwrap_or(&self.text)
    }
}

/// An immutable, id-unique collection of documents in input order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DocumentSet {
    docs: Vec<Document>,
    index: HashMap<String, usize>,
}

impl DocumentSet {
    /// Validates id uniqueness and non-empty text.
    pub fn new(docs: Vec<Document>) -> Result<Self> {
        let mut index = HashMap::with_capacity(docs.len());
        for (i, d) in docs.iter().enumerate() {
            if d.text.trim().is_empty() {
                return Err(Error::MalformedRow { row: i + 1, message: format!("document {:?} has empty text", d.id) });
            }
            if index.insert(d.id.clone(), i).is_some() {
                return Err(Error::DuplicateId(d.id.clone()));
            }
        }
        Ok(DocumentSet { docs, index })
    }

    pub fn empty() -> Self {
        DocumentSet::default()
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Document> {
        self.docs.iter()
    }

    pub fn as_slice(&self) -> &[Document] {
        &self.docs
    }

    pub fn get(&self, id: &str) -> Option<&Document> {
        self.index.get(id).map(|&i| &self.docs[i])
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.docs.iter().map(|d| d.id.as_str())
    }

    /// Labels of every document, failing on the first unlabeled one.
    pub fn label_matrix(&self) -> Result<Vec<LabelVector>> {
        self.docs.iter().map(|d| d.labels.ok_or_else(|| Error::Unlabeled(d.id.clone()))).collect()
    }

    /// Builds a new set from a transformation of each document.
    pub fn map(&self, f: impl FnMut(&Document) -> Document) -> Result<Self> {
        DocumentSet::new(self.docs.iter().map(f).collect())
    }

    pub fn into_vec(self) -> Vec<Document> {
        self.docs
    }
}

impl<'a> IntoIterator for &'a DocumentSet {
    type Item = &'a Document;
    type IntoIter = std::slice::Iter<'a, Document>;

    fn into_iter(self) -> Self::IntoIter {
        self.docs.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_blank_text() {
        let a = Document::new("t1", "dry", Source::Tweet);
        let err = DocumentSet::new(vec![a.clone(), a.clone()]).unwrap_err();
        assert!(matches!(err, Error::DuplicateId(ref id) if id == "t1"));
        let blank = Document::new("t2", "  \t", Source::Tweet);
        assert!(DocumentSet::new(vec![blank]).is_err());
        let set = DocumentSet::new(vec![a]).unwrap();
        assert_eq!(set.get("t1").unwrap().text, "dry");
    }
}
