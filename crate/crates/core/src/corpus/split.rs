use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{DocumentSet, LabelVector};
use crate::error::{Error, Result};
use crate::seed;

/// Train/validation/test fractions and the shuffling seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub ratios: [f64; 3],
    pub seed: u64,
    /// Split each distinct label vector separately.
    #[serde(default)]
    pub stratified: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec { ratios: [0.8, 0.1, 0.1], seed: 0, stratified: false }
    }
}

impl SplitSpec {
    pub fn new(ratios: [f64; 3], seed: u64) -> Result<Self> {
        let spec = SplitSpec { ratios, seed, stratified: false };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let sum: f64 = self.ratios.iter().sum();
        if self.ratios.iter().any(|r| !r.is_finite() || *r < 0.0) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidSplit(self.ratios));
        }
        Ok(())
    }

    /// Train and validation get `floor(n * ratio)`; the remainder goes to test.
    pub fn sizes(&self, n: usize) -> [usize; 3] {
        // the epsilon keeps products like 0.1 * 30 from flooring to 2
        let floor = |r: f64| ((n as f64) * r + 1e-9).floor() as usize;
        let train = floor(self.ratios[0]).min(n);
        let val = floor(self.ratios[1]).min(n - train);
        [train, val, n - train - val]
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetSplit {
    pub train: DocumentSet,
    pub validation: DocumentSet,
    pub test: DocumentSet,
}

/// Id → split assignment, written next to the split files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub seed: u64,
    pub ratios: [f64; 3],
    pub stratified: bool,
    pub assignments: BTreeMap<String, Split>,
}

impl DatasetSplit {
    pub fn manifest(&self, spec: &SplitSpec) -> SplitManifest {
        let mut assignments = BTreeMap::new();
        for (set, tag) in [(&self.train, Split::Train), (&self.validation, Split::Val), (&self.test, Split::Test)] {
            for id in set.ids() {
                assignments.insert(id.to_string(), tag);
            }
        }
        SplitManifest { seed: spec.seed, ratios: spec.ratios, stratified: spec.stratified, assignments }
    }
}

fn assign(indices: &mut [usize], spec: &SplitSpec, rng: &mut impl rand::Rng, out: &mut [Vec<usize>; 3]) {
    indices.shuffle(rng);
    let [a, b, _] = spec.sizes(indices.len());
    out[0].extend_from_slice(&indices[..a]);
    out[1].extend_from_slice(&indices[a..a + b]);
    out[2].extend_from_slice(&indices[a + b..]);
}

/// Seeded random partition into train, validation and test sets.
///
/// Each output keeps the corpus order of its members.
pub fn split_dataset(docs: &DocumentSet, spec: &SplitSpec) -> Result<DatasetSplit> {
    spec.validate()?;
    if docs.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut rng = seed::rng(spec.seed);
    let mut parts: [Vec<usize>; 3] = Default::default();
    if spec.stratified {
        let mut groups: HashMap<Option<LabelVector>, Vec<usize>> = HashMap::new();
        for (i, d) in docs.iter().enumerate() {
            groups.entry(d.labels).or_default().push(i);
        }
        let mut keys: Vec<_> = groups.keys().copied().collect();
        keys.sort();
        for k in keys {
            let idx = groups.get_mut(&k).expect("key present");
            assign(idx, spec, &mut rng, &mut parts);
        }
    } else {
        let mut idx: Vec<usize> = (0..docs.len()).collect();
        assign(&mut idx, spec, &mut rng, &mut parts);
    }
    let all = docs.as_slice();
    let take = |mut v: Vec<usize>| {
        v.sort_unstable();
        DocumentSet::new(v.into_iter().map(|i| all[i].clone()).collect())
    };
    let [train, validation, test] = parts;
    Ok(DatasetSplit { train: take(train)?, validation: take(validation)?, test: take(test)? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Document, Source};
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn corpus(n: usize) -> DocumentSet {
        DocumentSet::new((0..n).map(|i| Document::new(format!("d{i}"), "text", Source::Dir)).collect()).unwrap()
    }

    #[test]
    fn ten_docs() {
        let s = split_dataset(&corpus(10), &SplitSpec::default()).unwrap();
        assert_eq!((s.train.len(), s.validation.len(), s.test.len()), (8, 1, 1));
    }

    #[test]
    fn floor_rule_on_full_corpus_size() {
        // 14178 * 0.8 = 11342.4, 14178 * 0.1 = 1417.8, remainder 1419
        assert_eq!(SplitSpec::default().sizes(14_178), [11_342, 1_417, 1_419]);
    }

    #[test]
    fn deterministic() {
        let docs = corpus(50);
        let spec = SplitSpec { seed: 11, ..Default::default() };
        let a = split_dataset(&docs, &spec).unwrap();
        let b = split_dataset(&docs, &spec).unwrap();
        assert_eq!(a.manifest(&spec), b.manifest(&spec));
        let other = split_dataset(&docs, &SplitSpec { seed: 12, ..Default::default() }).unwrap();
        assert_ne!(a.manifest(&spec).assignments, other.manifest(&spec).assignments);
    }

    #[test]
    fn errors() {
        assert!(matches!(split_dataset(&DocumentSet::empty(), &SplitSpec::default()), Err(Error::EmptyCorpus)));
        assert!(SplitSpec::new([0.5, 0.5, 0.1], 0).is_err());
        assert!(SplitSpec::new([1.2, -0.1, -0.1], 0).is_err());
    }

    #[test]
    fn stratified_keeps_each_label_group_split() {
        let docs = DocumentSet::new(
            (0..40)
                .map(|i| {
                    let c = if i % 2 == 0 { crate::Category::Fire } else { crate::Category::Economy };
                    Document::new(format!("d{i}"), "t", Source::Dir).with_labels(LabelVector::from_categories([c]))
                })
                .collect(),
        )
        .unwrap();
        let spec = SplitSpec { stratified: true, ..Default::default() };
        let s = split_dataset(&docs, &spec).unwrap();
        assert_eq!((s.train.len(), s.validation.len(), s.test.len()), (32, 4, 4));
        let fire_val = s.validation.iter().filter(|d| d.labels.unwrap()[crate::Category::Fire]).count();
        assert_eq!(fire_val, 2);
    }

    proptest! {
        #[test]
        fn partition(n in 1usize..200, seed in any::<u64>(), a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let b = b * (1.0 - a);
            let spec = SplitSpec { ratios: [a, b, 1.0 - a - b], seed, stratified: false };
            let s = split_dataset(&corpus(n), &spec).unwrap();
            prop_assert_eq!(s.train.len() + s.validation.len() + s.test.len(), n);
            let ids: HashSet<_> = s.train.ids().chain(s.validation.ids()).chain(s.test.ids()).collect();
            prop_assert_eq!(ids.len(), n);
        }
    }
}
