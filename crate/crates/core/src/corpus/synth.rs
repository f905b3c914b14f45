//! Seeded synthetic corpora built from keyword-bearing sentence templates.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{Category, Document, DocumentSet, LabelVector, Source};
use crate::error::{Error, Result};
use crate::keywords::{label_document, KeywordTable};
use crate::seed;

/// Sentence frames; `{}` receives the keyword phrase. None of the filler
/// words is a keyword of the shipped table.
pub const TEMPLATES: [&str; 8] = [
    "{} hit hard as the drought drags on",
    "reports say {} remain a concern this week",
    "dry spell brings {} into focus across the county",
    "officials discuss {} during the long drought",
    "another hot summer and {} are on everyone's mind",
    "{} worries grow after months without rain",
    "local news covers {} as reservoirs shrink",
    "residents describe {} amid record heat",
];

const CATEGORY_RATE: f64 = 0.3;

fn pick_keyword<'a>(
    table: &'a KeywordTable,
    c: Category,
    allowed: &LabelVector,
    rng: &mut impl Rng,
) -> Option<&'a str> {
    let words: Vec<&str> = table.keywords(c).collect();
    let inside: Vec<&str> =
        words.iter().copied().filter(|w| table.categories_of(w).positives().all(|k| allowed[k])).collect();
    if inside.is_empty() {
        words.choose(rng).copied()
    } else {
        inside.choose(rng).copied()
    }
}

/// `n` labeled documents; `noise` is the fraction that receive one distractor
/// keyword from a category outside their labels.
///
/// Labels are the sampled categories plus every category of each inserted
/// keyword, so with `noise == 0` the keyword labeler reproduces them exactly.
pub fn generate_synthetic(n: usize, seed: u64, table: &KeywordTable, noise: f64) -> Result<DocumentSet> {
    if n == 0 {
        return Err(Error::InvalidArgument("synthetic corpus size must be positive".into()));
    }
    if !(0.0..=1.0).contains(&noise) {
        return Err(Error::InvalidArgument(format!("noise must lie in [0, 1], got {noise}")));
    }
    if table.is_empty() {
        return Err(Error::EmptyCategory("(all)".into()));
    }
    let populated: Vec<Category> = Category::ALL.into_iter().filter(|c| table.keywords(*c).next().is_some()).collect();
    let mut rng = seed::rng(seed);

    let n_noisy = (noise * n as f64).round() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut noisy = vec![false; n];
    for &i in &order[..n_noisy] {
        noisy[i] = true;
    }

    let mut docs = Vec::with_capacity(n);
    for (i, &is_noisy) in noisy.iter().enumerate() {
        let mut sampled: Vec<Category> = populated.iter().copied().filter(|_| rng.gen_bool(CATEGORY_RATE)).collect();
        if sampled.is_empty() {
            sampled.push(*populated.choose(&mut rng).expect("non-empty table"));
        }
        let mut labels = LabelVector::from_categories(sampled.iter().copied());
        let mut words = Vec::new();
        for &c in &sampled {
            if let Some(w) = pick_keyword(table, c, &labels, &mut rng) {
                labels = labels.union(&table.categories_of(w));
                words.push(w);
            }
        }
        words.shuffle(&mut rng);
        let template = TEMPLATES.choose(&mut rng).expect("templates");
        let mut text = template.replacen("{}", &join_phrase(&words), 1);
        // fillers of a custom table could collide with its keywords
        labels = labels.union(&label_document(&text, table));
        if is_noisy {
            let distractors: Vec<&str> = Category::ALL
                .into_iter()
                .flat_map(|c| table.keywords(c))
                .filter(|w| table.categories_of(w).positives().all(|k| !labels[k]))
                .collect();
            if let Some(d) = distractors.choose(&mut rng) {
                text.push_str(" with talk of ");
                text.push_str(d);
            }
        }
        let doc = Document::new(format!("syn-{seed}-{i:05}"), text, Source::Synthetic).with_labels(labels);
        docs.push(doc);
    }
    DocumentSet::new(docs)
}

fn join_phrase(words: &[&str]) -> String {
    match words {
        [] => "conditions".to_string(),
        [one] => one.to_string(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
    }
}
