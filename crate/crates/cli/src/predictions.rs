//! Prediction files: one JSON object per line with the document id, the
//! seven probabilities and the thresholded 0/1 labels, canonical order.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use drought_impact::{Category, LabelVector, PredictionBatch};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub id: String,
    pub probabilities: Vec<f32>,
    pub labels: Vec<u8>,
}

impl PredictionRow {
    pub fn label_vector(&self) -> LabelVector {
        LabelVector(std::array::from_fn(|k| self.labels[k] == 1))
    }
}

pub fn write(batch: &PredictionBatch, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = BufWriter::new(file);
    for (i, id) in batch.ids.iter().enumerate() {
        let row = PredictionRow {
            id: id.clone(),
            probabilities: batch.probabilities.row(i).to_vec(),
            labels: batch.labels[i].bits().to_vec(),
        };
        serde_json::to_writer(&mut out, &row)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read(path: &Path) -> Result<Vec<PredictionRow>> {
    let file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut rows = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: PredictionRow =
            serde_json::from_str(&line).with_context(|| format!("{} line {}", path.display(), n + 1))?;
        if row.probabilities.len() != Category::COUNT || row.labels.len() != Category::COUNT {
            bail!("{} line {}: expected {} probabilities and labels", path.display(), n + 1, Category::COUNT);
        }
        if row.labels.iter().any(|&l| l > 1) {
            bail!("{} line {}: labels must be 0 or 1", path.display(), n + 1);
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn labeled(rows: &[PredictionRow]) -> Vec<(String, LabelVector)> {
    rows.iter().map(|r| (r.id.clone(), r.label_vector())).collect()
}
