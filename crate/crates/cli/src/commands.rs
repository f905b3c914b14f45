use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use drought_impact::classifier::{self, EncoderSpec, ModelConfig};
use drought_impact::corpus::{
    corpus_stats, generate_synthetic, label_distribution, load_documents, split_dataset, write_documents, Format,
    SplitSpec,
};
use drought_impact::evaluate::{align_by_id, cooccurrence_labels, evaluate_predictions};
use drought_impact::keywords::label_corpus;
use drought_impact::preprocess::{build_vocab, clean_text, CleaningConfig, ContractionMap};
use drought_impact::{seed, Category, Document, DocumentSet, KeywordTable, LabelVector, MetricsReport, Source};
use log::info;
use serde_json::json;

use crate::manifest::Manifest;
use crate::predictions;
use crate::{
    CleanArgs, CooccurArgs, EncoderArg, EvaluateArgs, FormatArg, IngestArgs, KeywordLabelArgs, PredictArgs, SplitArgs,
    SynthArgs, TrainArgs,
};

/// CSV and JSON lines by extension; `.txt` files hold one document per
/// non-empty line, with ids `line-<n>`.
pub fn load_docs(path: &Path) -> Result<DocumentSet> {
    let is_text = path.extension().and_then(|e| e.to_str()).is_some_and(|e| e.eq_ignore_ascii_case("txt"));
    let docs = if is_text {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let docs = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| Document::new(format!("line-{}", i + 1), l.trim(), Source::Tweet))
            .collect();
        DocumentSet::new(docs)?
    } else {
        load_documents(path, Format::from_path(path))?
    };
    info!("read {} documents from {}", docs.len(), path.display());
    Ok(docs)
}

pub fn write_docs(docs: &DocumentSet, path: &Path, format: Option<FormatArg>) -> Result<()> {
    let format = format.map(Format::from).unwrap_or_else(|| Format::from_path(path));
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = BufWriter::new(file);
    write_documents(docs, &mut out, format)?;
    out.flush()?;
    info!("wrote {} documents to {}", docs.len(), path.display());
    Ok(())
}

pub fn keyword_table(path: Option<&Path>) -> Result<KeywordTable> {
    Ok(match path {
        Some(p) => KeywordTable::load(p)?,
        None => KeywordTable::default(),
    })
}

pub fn labeled_pairs(docs: &DocumentSet) -> Result<Vec<(String, LabelVector)>> {
    Ok(docs.ids().map(str::to_string).zip(docs.label_matrix()?).collect())
}

fn distribution_json(counts: [usize; 7]) -> serde_json::Value {
    Category::ALL.iter().map(|c| (c.name().to_string(), json!(counts[c.index()]))).collect()
}

pub fn ingest(a: IngestArgs) -> Result<()> {
    let docs = load_docs(&a.input)?;
    write_docs(&docs, &a.output, a.format)?;
    let stats = corpus_stats(&docs);
    let labeled = docs.iter().filter(|d| d.labels.is_some()).count();
    let mut m = Manifest::new("ingest", json!({"format": a.format.map(|f| format!("{f:?}").to_lowercase())}))?;
    m.input(&a.input).output(&a.output).summary(json!({
        "documents": docs.len(),
        "labeled": labeled,
        "mean_words": stats.mean_words,
        "max_words": stats.max_words,
        "label_distribution": distribution_json(label_distribution(&docs)),
    }))?;
    m.write_beside(&a.output)?;
    Ok(())
}

pub fn clean(a: CleanArgs) -> Result<()> {
    let docs = load_docs(&a.input)?;
    let contractions = match &a.contractions {
        Some(p) => ContractionMap::load(p)?,
        None => ContractionMap::default(),
    };
    let cfg = CleaningConfig { contractions, keep_stopwords: !a.drop_stopwords, keep_numbers: !a.drop_numbers };
    let cleaned = docs.map(|d| {
        let mut d = d.clone();
        d.clean_text = Some(clean_text(&d.text, &cfg));
        d
    })?;
    write_docs(&cleaned, &a.output, a.format)?;
    let mut m = Manifest::new(
        "clean",
        json!({"drop_stopwords": a.drop_stopwords, "drop_numbers": a.drop_numbers, "contractions": a.contractions}),
    )?;
    m.input(&a.input).output(&a.output);
    m.write_beside(&a.output)?;
    Ok(())
}

pub fn split(a: SplitArgs) -> Result<()> {
    let docs = load_docs(&a.input)?;
    let ratios: [f64; 3] = a.ratios.as_slice().try_into().context("--ratios takes three values")?;
    let spec = SplitSpec { ratios, seed: seed::stage_seed(a.seed, "split"), stratified: a.stratified };
    let parts = split_dataset(&docs, &spec)?;
    std::fs::create_dir_all(&a.output)?;
    let ext = match a.format {
        FormatArg::Csv => "csv",
        FormatArg::Jsonl => "jsonl",
    };
    let mut m = Manifest::new("split", &spec)?;
    m.seed("master", a.seed).seed("split", spec.seed).input(&a.input);
    for (name, set) in [("train", &parts.train), ("validation", &parts.validation), ("test", &parts.test)] {
        let path = a.output.join(format!("{name}.{ext}"));
        write_docs(set, &path, Some(a.format))?;
        m.output(&path);
    }
    let assignments = a.output.join("split.json");
    std::fs::write(&assignments, serde_json::to_string_pretty(&parts.manifest(&spec))? + "\n")?;
    m.output(&assignments).summary(json!({
        "train": parts.train.len(),
        "validation": parts.validation.len(),
        "test": parts.test.len(),
    }))?;
    m.write_beside(&a.output)?;
    Ok(())
}

pub fn synth(a: SynthArgs) -> Result<()> {
    let table = keyword_table(a.keyword_table.as_deref())?;
    let stage = seed::stage_seed(a.seed, "synth");
    let docs = generate_synthetic(a.n, stage, &table, a.noise)?;
    write_docs(&docs, &a.output, a.format)?;
    let mut m = Manifest::new("synth", json!({"n": a.n, "noise": a.noise, "keyword_table": a.keyword_table}))?;
    m.seed("master", a.seed).seed("synth", stage).output(&a.output);
    m.summary(json!({"documents": docs.len(), "label_distribution": distribution_json(label_distribution(&docs))}))?;
    m.write_beside(&a.output)?;
    Ok(())
}

pub fn keyword_label(a: KeywordLabelArgs) -> Result<()> {
    let table = keyword_table(a.keyword_table.as_deref())?;
    let docs = load_docs(&a.input)?;
    let labeled = if a.keep_all {
        docs.map(|d| d.clone().with_labels(table.label_document(&d.text)))?
    } else {
        label_corpus(&docs, &table)
    };
    info!(
        "{} of {} documents contain a keyword",
        labeled.iter().filter(|d| d.labels.is_some_and(|l| !l.is_empty())).count(),
        docs.len()
    );
    write_docs(&labeled, &a.output, a.format)?;
    let mut m = Manifest::new("keyword-label", json!({"keyword_table": a.keyword_table, "keep_all": a.keep_all}))?;
    m.input(&a.input).output(&a.output);
    m.summary(json!({
        "documents_in": docs.len(),
        "documents_out": labeled.len(),
        "label_distribution": distribution_json(label_distribution(&labeled)),
    }))?;
    m.write_beside(&a.output)?;
    Ok(())
}

/// Config file (or the preset for the chosen encoder), then flag overrides.
fn resolve_config(a: &TrainArgs) -> Result<ModelConfig> {
    let mut cfg = match &a.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => match a.encoder {
            Some(EncoderArg::Pretrained) => ModelConfig::pretrained(),
            _ => ModelConfig::tiny(),
        },
    };
    match (a.encoder, &cfg.encoder) {
        (Some(EncoderArg::Pretrained), EncoderSpec::Tiny { .. }) => cfg.encoder = EncoderSpec::PretrainedBaseUncased,
        (Some(EncoderArg::Tiny), EncoderSpec::PretrainedBaseUncased) => cfg.encoder = EncoderSpec::tiny(),
        _ => {}
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(e) = a.epochs {
        cfg.epochs = e;
    }
    if let Some(b) = a.batch_size {
        cfg.batch_size = b;
    }
    if let Some(lr) = a.learning_rate {
        cfg.learning_rate = lr;
    }
    if let Some(t) = a.threshold {
        cfg.threshold = t;
    }
    cfg.freeze_encoder |= a.freeze_encoder;
    cfg.validate()?;
    Ok(cfg)
}

pub fn train(a: TrainArgs) -> Result<()> {
    let cfg = resolve_config(&a)?;
    let train_set = load_docs(&a.input)?;
    let val_set = load_docs(&a.val)?;
    let vocab = match cfg.encoder {
        EncoderSpec::Tiny { .. } => Some(build_vocab(&train_set, a.min_count)?),
        EncoderSpec::PretrainedBaseUncased => None,
    };
    let model = classifier::build_model::<f32>(cfg.clone(), vocab)?;
    info!("model has {} parameters", model.num_params());
    let ckpt = classifier::train_with_observer(model, &train_set, &val_set, |r| {
        info!(
            "epoch {:>3}: train loss {:.4}, validation micro-F1 {:.3}, macro-F1 {:.3}, macro recall {:.3}",
            r.epoch, r.train_loss, r.micro_f1, r.macro_f1, r.macro_recall
        );
    })?;
    classifier::save_checkpoint(&ckpt, &a.output)?;
    info!("kept epoch {}; checkpoint in {}", ckpt.metadata.selected_epoch, a.output.display());
    let mut m = Manifest::new("train", json!({"model": cfg, "min_count": a.min_count}))?;
    m.seed("master", cfg.seed)
        .seed("encoder-init", seed::stage_seed(cfg.seed, "encoder-init"))
        .seed("head-init", seed::stage_seed(cfg.seed, "head-init"))
        .seed("shuffle", seed::stage_seed(cfg.seed, "shuffle"))
        .input(&a.input)
        .input(&a.val)
        .output(&a.output)
        .summary(&ckpt.metadata)?;
    m.write_beside(&a.output)?;
    Ok(())
}

pub fn predict(a: PredictArgs) -> Result<()> {
    let ckpt = classifier::load_checkpoint::<f32>(&a.model)?;
    let threshold = a.threshold.unwrap_or(ckpt.model.config.threshold);
    let docs = load_docs(&a.input)?;
    let batch = classifier::predict(&ckpt.model, &docs, threshold)?;
    predictions::write(&batch, &a.output)?;
    let mut m = Manifest::new("predict", json!({"threshold": threshold}))?;
    m.input(&a.model).input(&a.input).output(&a.output);
    m.summary(
        json!({"documents": batch.len(), "predicted_distribution": distribution_json(count_labels(&batch.labels))}),
    )?;
    m.write_beside(&a.output)?;
    Ok(())
}

pub fn count_labels(labels: &[LabelVector]) -> [usize; 7] {
    let mut counts = [0; 7];
    for l in labels {
        for c in l.positives() {
            counts[c.index()] += 1;
        }
    }
    counts
}

/// Reference and predicted labels paired by id, in reference order.
pub fn aligned(truth: &Path, preds: &Path) -> Result<(Vec<LabelVector>, Vec<LabelVector>)> {
    let truth_docs = load_docs(truth)?;
    let reference = labeled_pairs(&truth_docs)?;
    let predicted = predictions::labeled(&predictions::read(preds)?);
    let pairs = align_by_id(&reference, &predicted)?;
    Ok(pairs.into_iter().map(|(_, t, p)| (t, p)).unzip())
}

pub fn evaluate(a: EvaluateArgs) -> Result<()> {
    let (truth, pred) = aligned(&a.truth, &a.predictions)?;
    let report: MetricsReport = evaluate_predictions(&truth, &pred)?;
    print!("{}", report.render_table());
    let mut value = serde_json::to_value(&report)?;
    if !a.exclude.is_empty() {
        value["macro_excluding"] = json!({
            "excluded": a.exclude.iter().map(|c| c.name()).collect::<Vec<_>>(),
            "metrics": report.macro_excluding(&a.exclude),
        });
    }
    std::fs::write(&a.output, serde_json::to_string_pretty(&value)? + "\n")
        .with_context(|| format!("writing {}", a.output.display()))?;
    let mut m = Manifest::new("evaluate", json!({"exclude": a.exclude.iter().map(|c| c.name()).collect::<Vec<_>>()}))?;
    m.input(&a.truth).input(&a.predictions).output(&a.output);
    if let Some(csv) = &a.confusion_csv {
        std::fs::write(csv, report.confusion_csv()).with_context(|| format!("writing {}", csv.display()))?;
        m.output(csv);
    }
    m.summary(json!({"micro_f1": report.micro().f1, "macro_f1": report.macro_avg().f1}))?;
    m.write_beside(&a.output)?;
    Ok(())
}

pub fn cooccur(a: CooccurArgs) -> Result<()> {
    let (labels, input) = match (&a.source.input, &a.source.predictions) {
        (Some(p), None) => (load_docs(p)?.label_matrix()?, p),
        (None, Some(p)) => (predictions::read(p)?.iter().map(|r| r.label_vector()).collect(), p),
        _ => bail!("pass exactly one of --input or --predictions"),
    };
    let matrix = cooccurrence_labels(&labels)?;
    print!("{}", matrix.render_table());
    std::fs::write(&a.output, serde_json::to_string_pretty(&matrix.to_json())? + "\n")
        .with_context(|| format!("writing {}", a.output.display()))?;
    let mut m = Manifest::new("cooccur", json!({}))?;
    m.input(input).output(&a.output).summary(json!({"documents": labels.len()}))?;
    m.write_beside(&a.output)?;
    Ok(())
}
