//! Terminal session for adjudicating documents where the model and the
//! keyword labels disagree on one category.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use anyhow::{Context, Result};
use drought_impact::evaluate::{
    adjudication_summary, controversial_split, AdjudicationLedger, AdjudicationRecord, Disagreement, Verdict,
};
use drought_impact::{seed, Category, DocumentSet};
use log::info;
use serde_json::json;

use crate::commands::{labeled_pairs, load_docs};
use crate::manifest::Manifest;
use crate::predictions;
use crate::ReviewArgs;

/// One document awaiting a verdict.
pub struct Item {
    pub doc_id: String,
    pub text: String,
    pub kind: Disagreement,
}

pub enum Key {
    Verdict(Verdict, String),
    Skip,
    Quit,
}

/// `m`, `k`, `b` or `n` (optionally followed by a note), `s` or `q`.
pub fn parse_key(line: &str) -> Option<Key> {
    let line = line.trim();
    let mut chars = line.chars();
    let key = chars.next()?.to_ascii_lowercase();
    let note = chars.as_str().trim().to_string();
    let verdict = match key {
        'm' => Verdict::ModelCorrect,
        'k' => Verdict::KeywordCorrect,
        'b' => Verdict::BothDefensible,
        'n' => Verdict::Neither,
        's' if note.is_empty() => return Some(Key::Skip),
        'q' if note.is_empty() => return Some(Key::Quit),
        _ => return None,
    };
    Some(Key::Verdict(verdict, note))
}

#[derive(Debug, Default, PartialEq, Eq)]
pub struct SessionStats {
    pub recorded: usize,
    pub skipped: usize,
    pub already_done: usize,
}

/// Walks `items`, skipping those already in the ledger, and appends one
/// record per verdict. Stops at `q` or end of input.
pub fn session<R: BufRead, W: Write>(
    items: &[Item],
    category: Category,
    ledger: &AdjudicationLedger,
    reviewer: &str,
    input: &mut R,
    out: &mut W,
    now: impl Fn() -> String,
) -> Result<SessionStats> {
    let done: HashSet<String> =
        ledger.records()?.into_iter().filter(|r| r.category == category).map(|r| r.doc_id).collect();
    let mut stats = SessionStats::default();
    let total = items.len();
    'items: for (i, item) in items.iter().enumerate() {
        if done.contains(&item.doc_id) {
            stats.already_done += 1;
            continue;
        }
        let (keyword, model) = match item.kind {
            Disagreement::Fp => (false, true),
            Disagreement::Fn => (true, false),
        };
        writeln!(out, "\n[{}/{total}] {} ({})", i + 1, item.doc_id, category.title())?;
        writeln!(out, "  {}", item.text)?;
        writeln!(out, "  keyword label: {}   model label: {}", u8::from(keyword), u8::from(model))?;
        loop {
            write!(out, "verdict [m]odel [k]eyword [b]oth [n]either, [s]kip, [q]uit (a note may follow the key): ")?;
            out.flush()?;
            let mut line = String::new();
            if input.read_line(&mut line)? == 0 {
                writeln!(out)?;
                break 'items;
            }
            match parse_key(&line) {
                Some(Key::Verdict(verdict, note)) => {
                    let mut rec = AdjudicationRecord::new(&item.doc_id, category, keyword, model, verdict)?;
                    rec.note = note;
                    rec.reviewer = reviewer.to_string();
                    rec.timestamp = now();
                    ledger.append(&rec)?;
                    stats.recorded += 1;
                    break;
                }
                Some(Key::Skip) => {
                    stats.skipped += 1;
                    break;
                }
                Some(Key::Quit) => break 'items,
                None => writeln!(out, "unrecognized input {:?}", line.trim())?,
            }
        }
    }
    Ok(stats)
}

fn items(docs: &DocumentSet, sample: Vec<(String, Disagreement)>) -> Vec<Item> {
    sample
        .into_iter()
        .map(|(doc_id, kind)| {
            let text = docs.get(&doc_id).map(|d| d.text.clone()).unwrap_or_default();
            Item { doc_id, text, kind }
        })
        .collect()
}

pub fn run(a: ReviewArgs) -> Result<()> {
    let docs = load_docs(&a.keywords)?;
    let keyword_labels = labeled_pairs(&docs)?;
    let model_labels = predictions::labeled(&predictions::read(&a.predictions)?);
    let split = controversial_split(&keyword_labels, &model_labels, a.category)?;
    let sample_seed = seed::stage_seed(a.seed, "review-sample");
    let sample = split.sample(a.sample, sample_seed);
    info!(
        "{} controversial documents for {} ({} false positive, {} false negative); reviewing {}",
        split.len(),
        a.category,
        split.false_positive.len(),
        split.false_negative.len(),
        sample.len()
    );
    let ledger = AdjudicationLedger::new(&a.ledger);
    if let Some(parent) = a.ledger.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    let stdin = std::io::stdin();
    let stats = session(
        &items(&docs, sample),
        a.category,
        &ledger,
        &a.reviewer,
        &mut stdin.lock(),
        &mut std::io::stdout(),
        || chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
    )
    .context("review session")?;
    let records: Vec<_> = ledger.records()?.into_iter().filter(|r| r.category == a.category).collect();
    let summary = if records.is_empty() { None } else { Some(adjudication_summary(&records, a.category)?) };
    if let Some(s) = &summary {
        println!(
            "{}: {} of {} verdicts favour the model ({:.2})",
            a.category,
            s.by_verdict[&Verdict::ModelCorrect],
            s.n,
            s.model_correct_fraction
        );
    }
    let mut m =
        Manifest::new("review", json!({"category": a.category.name(), "sample": a.sample, "reviewer": a.reviewer}))?;
    m.seed("master", a.seed)
        .seed("review-sample", sample_seed)
        .input(&a.keywords)
        .input(&a.predictions)
        .output(&a.ledger);
    m.summary(json!({
        "recorded": stats.recorded,
        "skipped": stats.skipped,
        "already_done": stats.already_done,
        "summary": summary,
    }))?;
    m.write_beside(&a.ledger)?;
    Ok(())
}
