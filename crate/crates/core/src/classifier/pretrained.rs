//! Reading encoder weights in the common BERT safetensors layout, shared by
//! pretrained downloads and our own checkpoints.

use std::path::{Path, PathBuf};

use ndarray::ArrayViewMutD;
use safetensors::{Dtype, SafeTensors};
use serde::Deserialize;

use super::config::EncoderDims;
use super::encoder::Encoder;
use super::layers::Tensors;
use crate::error::{Error, Result};
use crate::preprocess::Vocabulary;
use crate::scalar::Scalar;

/// Directory holding `config.json`, `vocab.txt` and `model.safetensors` of
/// a pretrained uncased base encoder.
pub const ENCODER_DIR_ENV: &str = "DROUGHT_IMPACT_ENCODER_DIR";

const WEIGHTS_FILE: &str = "model.safetensors";

pub fn pretrained_dir() -> Result<PathBuf> {
    let dir = std::env::var_os(ENCODER_DIR_ENV)
        .map(PathBuf::from)
        .ok_or_else(|| Error::MissingPretrained(format!("set {ENCODER_DIR_ENV} to the encoder directory")))?;
    if !dir.join(WEIGHTS_FILE).is_file() {
        return Err(Error::MissingPretrained(format!("{} has no {WEIGHTS_FILE}", dir.display())));
    }
    Ok(dir)
}

#[derive(Deserialize)]
struct HubConfig {
    vocab_size: usize,
    hidden_size: usize,
    num_hidden_layers: usize,
    num_attention_heads: usize,
    intermediate_size: usize,
    max_position_embeddings: usize,
    #[serde(default = "default_type_vocab")]
    type_vocab_size: usize,
    #[serde(default = "default_eps")]
    layer_norm_eps: f64,
    #[serde(default = "default_act")]
    hidden_act: String,
}

fn default_type_vocab() -> usize {
    2
}

fn default_eps() -> f64 {
    1e-12
}

fn default_act() -> String {
    "gelu".into()
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

/// Loads encoder and subword vocabulary from a pretrained directory.
pub(crate) fn load_encoder<T: Scalar>(dir: &Path) -> Result<(Encoder<T>, Vocabulary)> {
    let missing = |what: &str| Error::MissingPretrained(format!("{} lacks {what}", dir.display()));
    let cfg_path = dir.join("config.json");
    if !cfg_path.is_file() {
        return Err(missing("config.json"));
    }
    let cfg: HubConfig = serde_json::from_slice(&read_file(&cfg_path)?)?;
    if cfg.hidden_act != "gelu" {
        return Err(Error::InvalidConfig(format!("unsupported activation {:?}", cfg.hidden_act)));
    }
    let dims = EncoderDims {
        vocab_size: cfg.vocab_size,
        hidden: cfg.hidden_size,
        layers: cfg.num_hidden_layers,
        heads: cfg.num_attention_heads,
        intermediate: cfg.intermediate_size,
        max_positions: cfg.max_position_embeddings,
        type_vocab_size: cfg.type_vocab_size,
        layer_norm_eps: cfg.layer_norm_eps,
    };
    let vocab_path = dir.join("vocab.txt");
    if !vocab_path.is_file() {
        return Err(missing("vocab.txt"));
    }
    let vocab = Vocabulary::load(&vocab_path, crate::preprocess::VocabKind::WordPiece)?;
    if vocab.len() != dims.vocab_size {
        return Err(Error::DimensionMismatch { expected: dims.vocab_size, found: vocab.len() });
    }
    let weights_path = dir.join(WEIGHTS_FILE);
    if !weights_path.is_file() {
        return Err(missing(WEIGHTS_FILE));
    }
    let bytes = read_file(&weights_path)?;
    let st = SafeTensors::deserialize(&bytes).map_err(|e| Error::Checkpoint(e.to_string()))?;
    let mut encoder = Encoder::zeros(dims);
    let mut views = Vec::new();
    encoder.tensors_mut("", &mut views);
    fill_tensors(&st, views)?;
    Ok((encoder, vocab))
}

type Decoder<T> = Box<dyn Fn(&[u8]) -> T>;

/// Names under which a tensor may be stored.
fn candidates(name: &str) -> Vec<String> {
    let mut out = vec![name.to_string(), format!("bert.{name}")];
    let legacy = name
        .strip_suffix("LayerNorm.weight")
        .map(|p| format!("{p}LayerNorm.gamma"))
        .or_else(|| name.strip_suffix("LayerNorm.bias").map(|p| format!("{p}LayerNorm.beta")));
    if let Some(l) = legacy {
        out.push(format!("bert.{l}"));
        out.push(l);
    }
    out
}

/// Copies every named view's values out of `st`, converting the stored
/// float width when it differs from `T`.
pub(crate) fn fill_tensors<T: Scalar>(st: &SafeTensors<'_>, views: Vec<(String, ArrayViewMutD<'_, T>)>) -> Result<()> {
    for (name, mut view) in views {
        let tensor = candidates(&name)
            .iter()
            .find_map(|n| st.tensor(n).ok())
            .ok_or_else(|| Error::Checkpoint(format!("tensor {name} not found")))?;
        if tensor.shape() != view.shape() {
            return Err(Error::Checkpoint(format!(
                "tensor {name} has shape {:?}, expected {:?}",
                tensor.shape(),
                view.shape()
            )));
        }
        let data = tensor.data();
        let decode: Decoder<T> = match tensor.dtype() {
            d if d == T::DTYPE => Box::new(T::from_le_slice),
            Dtype::F32 => Box::new(|b: &[u8]| T::lit(f64::from(f32::from_le_bytes(b.try_into().expect("4 bytes"))))),
            Dtype::F64 => Box::new(|b: &[u8]| T::lit(f64::from_le_bytes(b.try_into().expect("8 bytes")))),
            other => return Err(Error::Checkpoint(format!("tensor {name} has unsupported dtype {other:?}"))),
        };
        let width = tensor.dtype().bitsize() / 8;
        for (dst, chunk) in view.iter_mut().zip(data.chunks_exact(width)) {
            *dst = decode(chunk);
        }
    }
    Ok(())
}

/// Serializes named tensors in `T`'s native little-endian encoding.
pub(crate) fn tensors_to_bytes<T: Scalar>(tensors: &[(String, ndarray::ArrayViewD<'_, T>)]) -> Result<Vec<u8>> {
    let buffers: Vec<(String, Vec<usize>, Vec<u8>)> = tensors
        .iter()
        .map(|(name, t)| {
            let mut buf = Vec::with_capacity(t.len() * T::BYTES);
            for &v in t.iter() {
                v.extend_le_bytes(&mut buf);
            }
            (name.clone(), t.shape().to_vec(), buf)
        })
        .collect();
    let views = buffers
        .iter()
        .map(|(n, shape, buf)| {
            safetensors::tensor::TensorView::new(T::DTYPE, shape.clone(), buf)
                .map(|v| (n.clone(), v))
                .map_err(|e| Error::Checkpoint(e.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    safetensors::serialize(views, None).map_err(|e| Error::Checkpoint(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::Model;
    use crate::classifier::ModelConfig;
    use crate::seed;

    /// Writes a miniature encoder under the hub naming scheme, `bert.` prefix
    /// and legacy gamma/beta names included.
    fn write_hub_dir(dir: &Path) -> Encoder<f32> {
        let tokens = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "dry", "well", "##s", "fire"];
        std::fs::write(dir.join("vocab.txt"), tokens.join("\n")).unwrap();
        std::fs::write(
            dir.join("config.json"),
            r#"{"vocab_size": 8, "hidden_size": 8, "num_hidden_layers": 1, "num_attention_heads": 2,
                "intermediate_size": 16, "max_position_embeddings": 64, "type_vocab_size": 2,
                "layer_norm_eps": 1e-12, "hidden_act": "gelu", "model_type": "bert"}"#,
        )
        .unwrap();
        let dims = EncoderDims {
            vocab_size: 8,
            hidden: 8,
            layers: 1,
            heads: 2,
            intermediate: 16,
            max_positions: 64,
            type_vocab_size: 2,
            layer_norm_eps: 1e-12,
        };
        let enc = Encoder::<f32>::random(dims, &mut seed::rng(5));
        let mut named = Vec::new();
        enc.tensors("", &mut named);
        let renamed: Vec<(String, ndarray::ArrayViewD<'_, f32>)> = named
            .into_iter()
            .map(|(n, v)| {
                let n = n.replace("LayerNorm.weight", "LayerNorm.gamma").replace("LayerNorm.bias", "LayerNorm.beta");
                (format!("bert.{n}"), v)
            })
            .collect();
        std::fs::write(dir.join(WEIGHTS_FILE), tensors_to_bytes(&renamed).unwrap()).unwrap();
        enc
    }

    #[test]
    fn loads_hub_layout() {
        let dir = tempfile::tempdir().unwrap();
        let expected = write_hub_dir(dir.path());
        let (enc, vocab) = load_encoder::<f32>(dir.path()).unwrap();
        assert_eq!(enc, expected);
        assert_eq!(vocab.encode("dry wells"), vec![4, 5, 6]);
        let m = Model::<f32>::from_pretrained_dir(ModelConfig::pretrained(), dir.path()).unwrap();
        assert_eq!(m.head.dense.inputs(), 8);
        // widening to f64 is exact
        let (wide, _) = load_encoder::<f64>(dir.path()).unwrap();
        assert_eq!(wide.word_embeddings[[3, 2]], f64::from(expected.word_embeddings[[3, 2]]));
    }

    #[test]
    fn missing_pieces() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(load_encoder::<f32>(dir.path()), Err(Error::MissingPretrained(_))));
        write_hub_dir(dir.path());
        std::fs::remove_file(dir.path().join(WEIGHTS_FILE)).unwrap();
        assert!(matches!(load_encoder::<f32>(dir.path()), Err(Error::MissingPretrained(_))));
    }
}
