//! Single Markdown document summarizing a run: corpus figures, metrics,
//! co-occurrence of predicted labels and the review verdicts.

use std::fmt::Write as _;

use anyhow::{Context, Result};
use drought_impact::corpus::{corpus_stats, label_distribution};
use drought_impact::evaluate::{
    adjudication_summary, cooccurrence_labels, evaluate_predictions, read_ledger, AdjudicationSummary, Verdict,
};
use drought_impact::{Category, MetricsReport};
use serde_json::json;

use crate::commands::{aligned, load_docs};
use crate::manifest::Manifest;
use crate::svg::bar_chart;
use crate::ReportArgs;

fn summaries(path: &std::path::Path) -> Result<Vec<AdjudicationSummary>> {
    let records = read_ledger(path)?;
    Category::ALL
        .into_iter()
        .filter_map(|c| {
            let own: Vec<_> = records.iter().filter(|r| r.category == c).cloned().collect();
            (!own.is_empty()).then(|| adjudication_summary(&own, c).map_err(Into::into))
        })
        .collect()
}

pub fn run(a: ReportArgs) -> Result<()> {
    std::fs::create_dir_all(&a.output)?;
    let corpus_path = a.corpus.as_ref().unwrap_or(&a.truth);
    let corpus = load_docs(corpus_path)?;
    let stats = corpus_stats(&corpus);
    let dist = label_distribution(&corpus);
    let (truth, pred) = aligned(&a.truth, &a.predictions)?;
    let metrics: MetricsReport = evaluate_predictions(&truth, &pred)?;
    let co = cooccurrence_labels(&pred)?;

    let label_bars: Vec<(String, usize)> =
        Category::ALL.iter().map(|c| (c.title().to_string(), dist[c.index()])).collect();
    let word_bars: Vec<(String, usize)> =
        stats.histogram.iter().map(|b| (format!("{}-{} words", b.lo, b.hi), b.count)).collect();
    let label_svg = a.output.join("label_distribution.svg");
    let words_svg = a.output.join("word_counts.svg");
    std::fs::write(&label_svg, bar_chart("Documents per impact category", &label_bars))?;
    std::fs::write(&words_svg, bar_chart("Words per document", &word_bars))?;

    let mut md = String::from("# Drought impact report\n\n## Corpus\n\n");
    let _ = writeln!(md, "{} documents from `{}`.", corpus.len(), corpus_path.display());
    let _ = writeln!(md, "Mean length {:.1} words, longest {} words.\n", stats.mean_words, stats.max_words);
    md.push_str("| Category | Documents |\n|---|---:|\n");
    for (label, n) in &label_bars {
        let _ = writeln!(md, "| {label} | {n} |");
    }
    md.push_str("\n![Label distribution](label_distribution.svg)\n\n![Word counts](word_counts.svg)\n\n");

    let _ = writeln!(
        md,
        "## Classification metrics\n\n{} documents, reference labels from `{}`.\n",
        metrics.documents,
        a.truth.display()
    );
    let _ = writeln!(md, "```\n{}```\n", metrics.render_table());

    md.push_str("## Co-occurrence of predicted labels\n\nEntry (row, column) is the share of documents with the row label that also carry the column label.\n\n");
    let _ = writeln!(md, "```\n{}```\n", co.render_table());
    for c in Category::ALL {
        if let Some((j, r)) = co.most_associated(c.index()) {
            let pct = 100.0 * *r.numer() as f64 / *r.denom() as f64;
            let _ = writeln!(md, "- {}: most often with {} ({pct:.0}%)", c.title(), Category::ALL[j].title());
        }
    }
    md.push('\n');

    let adjudication = match &a.ledger {
        Some(path) => summaries(path).with_context(|| format!("reading {}", path.display()))?,
        None => Vec::new(),
    };
    if !adjudication.is_empty() {
        md.push_str("## Spot-check adjudication\n\n");
        md.push_str(
            "| Category | Reviewed | Model correct | Keyword correct | Both defensible | Neither | Model share |\n",
        );
        md.push_str("|---|---:|---:|---:|---:|---:|---:|\n");
        for s in &adjudication {
            let v = |k: Verdict| s.by_verdict.get(&k).copied().unwrap_or(0);
            let _ = writeln!(
                md,
                "| {} | {} | {} | {} | {} | {} | {:.2} |",
                s.category.title(),
                s.n,
                v(Verdict::ModelCorrect),
                v(Verdict::KeywordCorrect),
                v(Verdict::BothDefensible),
                v(Verdict::Neither),
                s.model_correct_fraction
            );
        }
        md.push('\n');
    }

    let report_path = a.output.join("report.md");
    std::fs::write(&report_path, md)?;
    std::fs::write(a.output.join("metrics.json"), serde_json::to_string_pretty(&metrics)? + "\n")?;
    let mut m = Manifest::new("report", json!({}))?;
    m.input(&a.truth).input(&a.predictions).input(corpus_path);
    if let Some(l) = &a.ledger {
        m.input(l);
    }
    m.output(&report_path).output(&label_svg).output(&words_svg).output(&a.output.join("metrics.json"));
    m.summary(json!({"documents": metrics.documents, "adjudicated_categories": adjudication.len()}))?;
    m.write_beside(&a.output)?;
    Ok(())
}
