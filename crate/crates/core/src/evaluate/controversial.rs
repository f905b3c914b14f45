use std::collections::HashMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::corpus::{Category, LabelVector};
use crate::error::{Error, Result};
use crate::seed;

/// How the model disagrees with the keyword label for one category.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Disagreement {
    /// Model positive, keyword negative.
    Fp,
    /// Model negative, keyword positive.
    Fn,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControversialSplit {
    pub category: Category,
    pub false_positive: Vec<String>,
    pub false_negative: Vec<String>,
}

impl ControversialSplit {
    pub fn len(&self) -> usize {
        self.false_positive.len() + self.false_negative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Seeded uniform sample of up to `n` disagreeing documents.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<(String, Disagreement)> {
        let mut all: Vec<(String, Disagreement)> = self
            .false_positive
            .iter()
            .map(|id| (id.clone(), Disagreement::Fp))
            .chain(self.false_negative.iter().map(|id| (id.clone(), Disagreement::Fn)))
            .collect();
        let mut rng = seed::rng(seed);
        all.shuffle(&mut rng);
        all.truncate(n);
        all
    }
}

/// Pairs keyword and model labels by document id. Both sides must cover
/// exactly the same ids; the output follows the order of `reference`.
pub fn align_by_id(
    reference: &[(String, LabelVector)],
    other: &[(String, LabelVector)],
) -> Result<Vec<(String, LabelVector, LabelVector)>> {
    if reference.len() != other.len() {
        return Err(Error::IdMismatch(format!("{} ids vs {} ids", reference.len(), other.len())));
    }
    let lookup: HashMap<&str, LabelVector> = other.iter().map(|(id, l)| (id.as_str(), *l)).collect();
    if lookup.len() != other.len() {
        return Err(Error::IdMismatch("duplicate ids".into()));
    }
    reference
        .iter()
        .map(|(id, l)| match lookup.get(id.as_str()) {
            Some(o) => Ok((id.clone(), *l, *o)),
            None => Err(Error::IdMismatch(format!("{id:?} has no counterpart"))),
        })
        .collect()
}

/// Documents where the model and keyword labels disagree on `category`.
pub fn controversial_split(
    keyword_labels: &[(String, LabelVector)],
    model_labels: &[(String, LabelVector)],
    category: Category,
) -> Result<ControversialSplit> {
    let mut split = ControversialSplit { category, false_positive: Vec::new(), false_negative: Vec::new() };
    for (id, kw, model) in align_by_id(keyword_labels, model_labels)? {
        match (kw[category], model[category]) {
            (false, true) => split.false_positive.push(id),
            (true, false) => split.false_negative.push(id),
            _ => {}
        }
    }
    Ok(split)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn lv(c: &[Category]) -> LabelVector {
        LabelVector::from_categories(c.iter().copied())
    }

    #[test]
    fn definitions() {
        let kw = vec![("a".to_string(), lv(&[])), ("b".to_string(), lv(&[Category::Agriculture]))];
        let model = vec![("b".to_string(), lv(&[])), ("a".to_string(), lv(&[Category::Agriculture]))];
        let s = controversial_split(&kw, &model, Category::Agriculture).unwrap();
        assert_eq!(s.false_positive, ["a"]);
        assert_eq!(s.false_negative, ["b"]);
        let same = controversial_split(&kw, &kw, Category::Agriculture).unwrap();
        assert!(same.is_empty());
    }

    #[test]
    fn id_mismatch() {
        let kw = vec![("a".to_string(), lv(&[]))];
        let model = vec![("z".to_string(), lv(&[]))];
        assert!(matches!(controversial_split(&kw, &model, Category::Fire), Err(Error::IdMismatch(_))));
    }

    #[test]
    fn hundred_sample_split() {
        let split = ControversialSplit {
            category: Category::Agriculture,
            false_positive: (0..39).map(|i| format!("fp{i}")).collect(),
            false_negative: (0..61).map(|i| format!("fn{i}")).collect(),
        };
        let s = split.sample(100, 1);
        assert_eq!(s.len(), 100);
        assert_eq!(s.iter().filter(|(_, d)| *d == Disagreement::Fp).count(), 39);
        assert_eq!(split.sample(10, 4), split.sample(10, 4));
    }

    proptest! {
        #[test]
        fn partitions_disagreements(pairs in prop::collection::vec((any::<[bool; 7]>(), any::<[bool; 7]>()), 0..40), k in 0usize..7) {
            let kw: Vec<_> = pairs.iter().enumerate().map(|(i, (a, _))| (i.to_string(), LabelVector(*a))).collect();
            let model: Vec<_> = pairs.iter().enumerate().map(|(i, (_, b))| (i.to_string(), LabelVector(*b))).collect();
            let c = Category::ALL[k];
            let s = controversial_split(&kw, &model, c).unwrap();
            let fp: HashSet<_> = s.false_positive.iter().collect();
            let fn_: HashSet<_> = s.false_negative.iter().collect();
            prop_assert!(fp.is_disjoint(&fn_));
            let disagreeing = pairs.iter().filter(|(a, b)| a[k] != b[k]).count();
            prop_assert_eq!(fp.len() + fn_.len(), disagreeing);
        }
    }
}
