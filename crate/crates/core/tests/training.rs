use drought_impact::classifier::{gradient_check_model, predict, train, EncoderSpec, Model, ModelConfig};
use drought_impact::corpus::generate_synthetic;
use drought_impact::evaluate::evaluate_predictions;
use drought_impact::preprocess::build_vocab;
use drought_impact::KeywordTable;
use ndarray::Array2;

#[test]
fn trained_tiny_model_fits_noise_free_corpus() {
    let table = KeywordTable::default();
    let train_set = generate_synthetic(64, 101, &table, 0.0).unwrap();
    let val_set = generate_synthetic(32, 202, &table, 0.0).unwrap();
    let vocab = build_vocab(&train_set, 1).unwrap();
    let cfg = ModelConfig { seed: 7, batch_size: 16, ..ModelConfig::tiny() };
    let model = Model::<f32>::tiny(cfg, vocab).unwrap();
    let ckpt = train(model, &train_set, &val_set).unwrap();

    let meta = &ckpt.metadata;
    assert_eq!(meta.history.len(), 31);
    let best = meta.history.iter().map(|r| r.macro_f1).fold(f64::MIN, f64::max);
    assert_eq!(meta.validation.as_ref().unwrap().macro_f1, best);
    assert!(meta.selected_epoch > 0);

    let truth = train_set.label_matrix().unwrap();
    let preds = predict(&ckpt.model, &train_set, 0.5).unwrap();
    let agree =
        truth.iter().zip(&preds.labels).map(|(t, p)| (0..7).filter(|&k| t.0[k] == p.0[k]).count()).sum::<usize>();
    assert!(agree as f64 >= 0.95 * (7 * truth.len()) as f64, "{agree} of {} decisions", 7 * truth.len());
    let report = evaluate_predictions::<f64>(&truth, &preds.labels).unwrap();
    assert!(report.micro().f1 >= 0.9, "micro F1 {}", report.micro().f1);
}

#[test]
fn encoder_backward_matches_finite_differences() {
    let docs = generate_synthetic(3, 5, &KeywordTable::default(), 0.0).unwrap();
    let vocab = build_vocab(&docs, 1).unwrap();
    let cfg = ModelConfig {
        encoder: EncoderSpec::Tiny { layers: 2, hidden: 16, heads: 2, intermediate: 24 },
        seed: 3,
        ..ModelConfig::tiny()
    };
    let model = Model::<f64>::tiny(cfg, vocab).unwrap();
    let inputs = model.encode_documents(&docs).unwrap();
    let truth = docs.label_matrix().unwrap();
    let targets = Array2::from_shape_fn((3, 7), |(i, k)| f64::from(u8::from(truth[i].0[k])));
    let report = gradient_check_model(&model, &inputs, &targets, 12);
    assert!(report.max_relative_error < 1e-3, "{report:?}");
    assert!(report.checked > model.head.num_params());
}
