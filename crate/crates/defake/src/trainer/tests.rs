use std::collections::BTreeMap;

use ndarray::{ArrayD, IxDyn};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::tempdir;

use crate::dataset::{Feature, KeyedBatch};
use crate::metrics::MetricReport;
use crate::models::{AbstractModel, LossNodes, ToyText};
use crate::tensor::{NodeId, ParamStore, Tape};

use super::*;

fn token_batch(n: usize, len: usize, vocab: usize, seed: u64) -> KeyedBatch {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ids = ArrayD::from_shape_fn(IxDyn(&[n, len]), |_| rng.gen_range(2..vocab as i64));
    let mut m = BTreeMap::new();
    m.insert("token_ids".to_string(), Feature::Int(ids));
    m.insert(
        "mask".to_string(),
        Feature::Int(ArrayD::from_elem(IxDyn(&[n, len]), 1)),
    );
    m.insert(
        "label".to_string(),
        Feature::Int(ArrayD::from_shape_fn(IxDyn(&[n]), |i| (i[0] % 2) as i64)),
    );
    KeyedBatch::from_features(m).unwrap()
}

fn grad_set(shapes: &[&[usize]], seed: u64) -> BTreeMap<crate::tensor::ParamId, ArrayD<f64>> {
    let mut store = ParamStore::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut grads = BTreeMap::new();
    for (i, shape) in shapes.iter().enumerate() {
        let id = store
            .register(&format!("p{i}"), ArrayD::zeros(IxDyn(shape)))
            .unwrap();
        grads.insert(
            id,
            ArrayD::from_shape_fn(IxDyn(shape), |_| rng.gen_range(-2.0..2.0)),
        );
    }
    grads
}

fn global_norm(grads: &BTreeMap<crate::tensor::ParamId, ArrayD<f64>>) -> f64 {
    grads
        .values()
        .flat_map(|g| g.iter())
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt()
}

// ---------------------------------------------------------------- clipping

#[test]
fn clipping_scales_to_the_requested_norm() {
    // Single gradient [6, 8] has norm 10.
    let mut grads = grad_set(&[&[2]], 0);
    let id = *grads.keys().next().unwrap();
    grads.insert(id, ArrayD::from_shape_vec(IxDyn(&[2]), vec![6.0, 8.0]).unwrap());
    let factor = clip_gradient_norm(&mut grads, 5.0).unwrap();
    assert!((factor - 0.5).abs() < 1e-12);
    assert!((global_norm(&grads) - 5.0).abs() < 1e-9);
}

#[test]
fn clipping_is_a_noop_below_the_limit() {
    let mut grads = grad_set(&[&[2]], 0);
    let id = *grads.keys().next().unwrap();
    grads.insert(id, ArrayD::from_shape_vec(IxDyn(&[2]), vec![3.0, 0.0]).unwrap());
    let before = grads.clone();
    let factor = clip_gradient_norm(&mut grads, 5.0).unwrap();
    assert_eq!(factor, 1.0);
    assert_eq!(grads, before);
}

#[test]
fn clipping_rejects_non_finite_gradients_and_bad_norms() {
    let mut grads = grad_set(&[&[2]], 0);
    let id = *grads.keys().next().unwrap();
    grads.insert(
        id,
        ArrayD::from_shape_vec(IxDyn(&[2]), vec![f64::NAN, 0.0]).unwrap(),
    );
    assert!(matches!(
        clip_gradient_norm(&mut grads, 1.0),
        Err(TrainerError::NonFiniteGradient)
    ));
    let mut ok = grad_set(&[&[2]], 1);
    assert!(clip_gradient_norm(&mut ok, 0.0).is_err());
}

proptest! {
    #[test]
    fn clipping_matches_the_flatten_and_scale_oracle(seed in 0u64..500, max_norm in 0.1f64..8.0) {
        let mut grads = grad_set(&[&[3], &[2, 2], &[1, 4]], seed);
        // Oracle: concatenate, compute the norm, rescale each element.
        let flat: Vec<f64> = grads.values().flat_map(|g| g.iter().copied()).collect();
        let norm = flat.iter().map(|v| v * v).sum::<f64>().sqrt();
        let expected_factor = if norm > max_norm { max_norm / norm } else { 1.0 };
        let expected: Vec<f64> = flat.iter().map(|v| v * expected_factor).collect();

        let factor = clip_gradient_norm(&mut grads, max_norm).unwrap();
        prop_assert!((factor - expected_factor).abs() < 1e-12);
        let got: Vec<f64> = grads.values().flat_map(|g| g.iter().copied()).collect();
        for (g, e) in got.iter().zip(expected.iter()) {
            prop_assert!((g - e).abs() < 1e-12);
        }
        prop_assert!(global_norm(&grads) <= max_norm + 1e-9);
    }
}

// ---------------------------------------------------------------- early stopping

#[test]
fn early_stopper_follows_the_worked_sequence() {
    let mut stopper = EarlyStopper::new(2);
    let values = [0.5, 0.7, 0.65, 0.66, 0.64];
    let mut stopped_at = None;
    for (i, &v) in values.iter().enumerate() {
        let epoch = i + 1;
        if stopper.step(v, epoch) == Decision::Stop {
            stopped_at = Some(epoch);
            break;
        }
    }
    assert_eq!(stopped_at, Some(4));
    assert_eq!(stopper.best_epoch(), 2);
    assert!((stopper.best_value() - 0.7).abs() < 1e-12);
}

#[test]
fn early_stopper_never_stops_on_strict_improvement() {
    let mut stopper = EarlyStopper::new(1);
    for epoch in 1..=100 {
        assert_eq!(stopper.step(epoch as f64, epoch), Decision::Continue);
        assert_eq!(stopper.non_improving(), 0);
    }
}

#[test]
fn early_stopper_counts_ties_as_non_improving() {
    let mut stopper = EarlyStopper::new(2);
    assert_eq!(stopper.step(0.8, 1), Decision::Continue);
    assert_eq!(stopper.step(0.8, 2), Decision::Continue);
    assert_eq!(stopper.step(0.8, 3), Decision::Stop);
    assert_eq!(stopper.best_epoch(), 1);
}

proptest! {
    #[test]
    fn early_stopper_bookkeeping_is_monotone(values in proptest::collection::vec(0.0f64..1.0, 1..40), patience in 1usize..5) {
        let mut stopper = EarlyStopper::new(patience);
        let mut last_best = f64::NEG_INFINITY;
        for (i, &v) in values.iter().enumerate() {
            let decision = stopper.step(v, i + 1);
            prop_assert!(stopper.best_value() >= last_best);
            prop_assert!(stopper.non_improving() <= patience);
            last_best = stopper.best_value();
            if decision == Decision::Stop {
                break;
            }
        }
    }
}

// ---------------------------------------------------------------- checkpoints

#[test]
fn checkpoint_round_trip_is_bit_exact() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("model.ckpt");
    let model = ToyText::new(20, 4, 8, 11).unwrap();
    save_checkpoint(&model, &path, 11, 3).unwrap();

    let data = read_checkpoint(&path).unwrap();
    assert_eq!(data.model, "toytext");
    assert_eq!(data.seed, 11);
    assert_eq!(data.epoch, 3);
    for (name, value) in model.store().iter() {
        let restored = &data.arrays[name];
        assert_eq!(restored.shape(), value.shape());
        for (a, b) in restored.iter().zip(value.iter()) {
            assert_eq!(a.to_bits(), b.to_bits(), "{name}");
        }
    }

    let loaded = load_checkpoint(&path, &crate::models::builtin_registry()).unwrap();
    assert_eq!(loaded.store().checksum(), model.store().checksum());

    let batch = token_batch(5, 6, 20, 1);
    assert_eq!(model.predict(&batch).unwrap(), loaded.predict(&batch).unwrap());
}

#[test]
fn checkpoint_load_rejects_mismatched_architectures() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("model.ckpt");
    let model = ToyText::new(20, 4, 8, 11).unwrap();
    save_checkpoint(&model, &path, 11, 1).unwrap();

    let mut other_shape = ToyText::new(20, 6, 8, 11).unwrap();
    assert!(restore_into(&mut other_shape, &path).is_err());
    let mut other_model = crate::models::TextCnn::new(20, 4, vec![2], 3, 0.0, 8, 0).unwrap();
    assert!(restore_into(&mut other_model, &path).is_err());
}

#[test]
fn checkpoint_reader_rejects_garbage() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("bad.ckpt");
    std::fs::write(&path, b"not a checkpoint").unwrap();
    assert!(read_checkpoint(&path).is_err());
    assert!(read_checkpoint(&dir.path().join("missing.ckpt")).is_err());
}

// ---------------------------------------------------------------- scripted pieces

/// Model whose per-batch loss is the mean of the "loss_value" feature;
/// parameters never receive gradients, so epoch means are exactly
/// predictable.
struct ScriptedLossModel {
    store: ParamStore,
}

impl ScriptedLossModel {
    fn new() -> Self {
        let mut store = ParamStore::new();
        store
            .register("dummy", ArrayD::zeros(IxDyn(&[1])))
            .unwrap();
        Self { store }
    }
}

impl AbstractModel for ScriptedLossModel {
    fn name(&self) -> &'static str {
        "scripted"
    }

    fn construction_params(&self) -> serde_json::Map<String, serde_json::Value> {
        serde_json::Map::new()
    }

    fn store(&self) -> &ParamStore {
        &self.store
    }

    fn store_mut(&mut self) -> &mut ParamStore {
        &mut self.store
    }

    fn feature_keys(&self) -> &'static [&'static str] {
        &["loss_value"]
    }

    fn forward(&self, tape: &mut Tape<'_>, batch: &KeyedBatch, _train: bool) -> crate::models::Result<NodeId> {
        Ok(tape.constant(ArrayD::zeros(IxDyn(&[batch.batch_size(), 2]))))
    }

    fn loss_nodes(
        &self,
        tape: &mut Tape<'_>,
        batch: &KeyedBatch,
        _train: bool,
    ) -> crate::models::Result<LossNodes> {
        let values = batch.float("loss_value").unwrap();
        let mean = values.mean().unwrap();
        Ok(LossNodes::single(
            "loss",
            tape.constant(ArrayD::from_elem(IxDyn(&[]), mean)),
        ))
    }
}

fn loss_batch(size: usize, loss: f64) -> KeyedBatch {
    let mut m = BTreeMap::new();
    m.insert(
        "loss_value".to_string(),
        Feature::Float(ArrayD::from_elem(IxDyn(&[size]), loss)),
    );
    m.insert(
        "label".to_string(),
        Feature::Int(ArrayD::zeros(IxDyn(&[size]))),
    );
    KeyedBatch::from_features(m).unwrap()
}

/// Evaluator returning a scripted accuracy sequence, ignoring the model.
struct ScriptedEvaluator {
    values: Vec<f64>,
    next: usize,
}

impl Evaluator for ScriptedEvaluator {
    fn evaluate(
        &mut self,
        _model: &dyn AbstractModel,
        _batches: &[KeyedBatch],
    ) -> Result<MetricReport> {
        let value = self.values[self.next.min(self.values.len() - 1)];
        self.next += 1;
        let mut report = MetricReport::default();
        report.values.insert("accuracy".to_string(), value);
        Ok(report)
    }
}

fn quiet_config(dir: &std::path::Path, epochs: usize) -> TrainerConfig {
    let mut config = TrainerConfig::new(epochs, OptimizerSpec::new("sgd", 0.1), dir);
    config.quiet = true;
    config
}

// ---------------------------------------------------------------- train_epoch

#[test]
fn train_epoch_weights_means_by_batch_size() {
    let dir = tempdir().unwrap();
    let trainer = Trainer::with_metrics(quiet_config(dir.path(), 1), &["accuracy"]).unwrap();
    let mut model = ScriptedLossModel::new();
    let mut optimizer = Sgd;

    // Single batch: the mean is that batch's loss.
    let single = [loss_batch(5, 0.75)];
    let means = trainer
        .train_epoch(&mut model, &single, &mut optimizer, 0.1, 1)
        .unwrap();
    assert_eq!(means["loss"], 0.75);

    // Sizes 64 and 2 weighted 64:2.
    let pair = [loss_batch(64, 1.0), loss_batch(2, 0.0)];
    let means = trainer
        .train_epoch(&mut model, &pair, &mut optimizer, 0.1, 1)
        .unwrap();
    let expected = 64.0 / 66.0;
    assert!((means["loss"] - expected).abs() < 1e-12);
}

#[test]
fn train_epoch_reports_non_finite_loss_coordinates() {
    let dir = tempdir().unwrap();
    let mut config = quiet_config(dir.path(), 1);
    config.optimizer = OptimizerSpec::new("adam", 0.001);
    let mut trainer = Trainer::with_metrics(config, &["accuracy"]).unwrap();
    let mut model = ToyText::new(10, 4, 8, 1).unwrap();
    let id = model.store().id_of("embedding").unwrap();
    model.store_mut().value_mut(id).fill(f64::NAN);
    let batches = [token_batch(4, 6, 10, 2), token_batch(4, 6, 10, 3)];
    match trainer.fit(&mut model, &batches, None) {
        Err(TrainerError::NonFiniteLoss { epoch: 1, batch: 0 }) => {}
        other => panic!("expected NonFiniteLoss, got {other:?}", other = other.map(|_| ())),
    }
}

#[test]
fn fit_rejects_empty_training_data() {
    let dir = tempdir().unwrap();
    let mut trainer = Trainer::with_metrics(quiet_config(dir.path(), 1), &["accuracy"]).unwrap();
    let mut model = ToyText::new(10, 4, 8, 1).unwrap();
    assert!(matches!(
        trainer.fit(&mut model, &[], None),
        Err(TrainerError::EmptyTrainingData)
    ));
}

// ---------------------------------------------------------------- fit

#[test]
fn fit_without_validation_runs_all_epochs_with_empty_metrics() {
    let dir = tempdir().unwrap();
    let mut trainer = Trainer::with_metrics(quiet_config(dir.path(), 4), &["accuracy"]).unwrap();
    let mut model = ToyText::new(20, 4, 8, 7).unwrap();
    let batches = [token_batch(8, 6, 20, 4)];
    let history = trainer.fit(&mut model, &batches, None).unwrap();
    assert_eq!(history.records.len(), 4);
    assert!(!history.stopped_early);
    assert!(history.records.iter().all(|r| r.val_metrics.is_empty()));
    assert_eq!(
        history.checkpoint_path.unwrap(),
        dir.path().join("checkpoints/epoch_4.ckpt")
    );
    for (i, record) in history.records.iter().enumerate() {
        assert_eq!(record.epoch, i + 1);
        assert!(!record.train_losses.is_empty());
    }
}

#[test]
fn fit_stops_early_and_restores_the_best_checkpoint() {
    let dir = tempdir().unwrap();
    let mut config = quiet_config(dir.path(), 10);
    config.early_stopping = Some(EarlyStoppingConfig {
        patience: 2,
        metric: "accuracy".to_string(),
    });
    let evaluator = ScriptedEvaluator {
        values: vec![0.5, 0.7, 0.65, 0.66, 0.64],
        next: 0,
    };
    let mut trainer = Trainer::new(config, Box::new(evaluator)).unwrap();
    let mut model = ToyText::new(20, 4, 8, 7).unwrap();
    let train = [token_batch(8, 6, 20, 4)];
    let val = [token_batch(4, 6, 20, 5)];
    let history = trainer.fit(&mut model, &train, Some(&val)).unwrap();

    assert!(history.stopped_early);
    assert_eq!(history.records.len(), 4);
    assert_eq!(history.best_epoch, 2);
    assert_eq!(
        history.checkpoint_path.as_deref().unwrap(),
        dir.path().join("checkpoints/best.ckpt")
    );

    // The model now carries the epoch-2 parameters, bit-exactly.
    let epoch2 = read_checkpoint(&dir.path().join("checkpoints/epoch_2.ckpt")).unwrap();
    for (name, value) in model.store().iter() {
        for (a, b) in epoch2.arrays[name].iter().zip(value.iter()) {
            assert_eq!(a.to_bits(), b.to_bits(), "{name}");
        }
    }
}

#[test]
fn fit_applies_the_scheduler_between_epochs() {
    let dir = tempdir().unwrap();
    let mut config = quiet_config(dir.path(), 3);
    config.scheduler = Some(Box::new(|_, lr| lr * 0.5));
    let mut trainer = Trainer::with_metrics(config, &["accuracy"]).unwrap();
    let mut model = ToyText::new(20, 4, 8, 7).unwrap();
    let history = trainer
        .fit(&mut model, &[token_batch(8, 6, 20, 4)], None)
        .unwrap();
    let rates: Vec<f64> = history.records.iter().map(|r| r.learning_rate).collect();
    assert_eq!(rates, vec![0.1, 0.05, 0.025]);
}

#[test]
fn fit_writes_log_lines_and_round_trippable_curves() {
    let dir = tempdir().unwrap();
    let mut config = quiet_config(dir.path(), 3);
    config.early_stopping = Some(EarlyStoppingConfig::default());
    let mut trainer = Trainer::with_metrics(config, &["accuracy", "f1"]).unwrap();
    let mut model = ToyText::new(20, 4, 8, 7).unwrap();
    let train = [token_batch(8, 6, 20, 4)];
    let val = [token_batch(4, 6, 20, 5)];
    let history = trainer.fit(&mut model, &train, Some(&val)).unwrap();

    let log = std::fs::read_to_string(dir.path().join("train.log")).unwrap();
    let lines: Vec<&str> = log.lines().collect();
    assert_eq!(lines.len(), history.records.len());
    assert!(lines[0].starts_with("epoch=1 lr=0.1 loss="));
    assert!(lines[0].contains("[accuracy="));

    // curves.csv groups by series and parses back into the record scalars.
    let curves = std::fs::read_to_string(dir.path().join("curves.csv")).unwrap();
    let mut rows = curves.lines();
    assert_eq!(rows.next(), Some("series,epoch,value"));
    let mut by_series: BTreeMap<String, Vec<(usize, f64)>> = BTreeMap::new();
    for row in rows {
        let mut parts = row.split(',');
        let series = parts.next().unwrap().to_string();
        let epoch: usize = parts.next().unwrap().parse().unwrap();
        let value: f64 = parts.next().unwrap().parse().unwrap();
        by_series.entry(series).or_default().push((epoch, value));
    }
    let n = history.records.len();
    for series in ["train/loss", "val/accuracy", "val/f1", "lr"] {
        assert_eq!(by_series[series].len(), n, "{series}");
    }
    for record in &history.records {
        let (_, loss) = by_series["train/loss"][record.epoch - 1];
        assert_eq!(loss, record.train_losses["loss"]);
        let (_, acc) = by_series["val/accuracy"][record.epoch - 1];
        assert_eq!(acc, record.val_metrics.get("accuracy").unwrap());
    }
}

#[test]
fn fit_is_deterministic_for_a_fixed_seed() {
    let run = |dir: &std::path::Path| {
        let mut config = quiet_config(dir, 5);
        config.optimizer = OptimizerSpec::new("adam", 0.01);
        config.early_stopping = Some(EarlyStoppingConfig::default());
        let mut trainer = Trainer::with_metrics(config, &["accuracy"]).unwrap();
        let mut model = ToyText::new(20, 4, 8, 7).unwrap();
        let train = [token_batch(16, 6, 20, 4), token_batch(16, 6, 20, 9)];
        let val = [token_batch(8, 6, 20, 5)];
        trainer.fit(&mut model, &train, Some(&val)).unwrap();
        std::fs::read(dir.join("curves.csv")).unwrap()
    };
    let a = tempdir().unwrap();
    let b = tempdir().unwrap();
    assert_eq!(run(a.path()), run(b.path()));
}

// ---------------------------------------------------------------- validation

#[test]
fn validation_is_pure_and_deterministic() {
    let dir = tempdir().unwrap();
    let mut trainer = Trainer::with_metrics(
        quiet_config(dir.path(), 1),
        &["accuracy", "precision", "recall", "f1"],
    )
    .unwrap();
    let model = ToyText::new(20, 4, 8, 7).unwrap();
    let val = [token_batch(8, 6, 20, 5), token_batch(3, 6, 20, 6)];
    let before = model.store().checksum();
    let first = trainer.validate_epoch(&model, &val).unwrap();
    let second = trainer.validate_epoch(&model, &val).unwrap();
    assert_eq!(first, second);
    assert_eq!(model.store().checksum(), before);
    assert_eq!(
        first.values.keys().cloned().collect::<Vec<_>>(),
        vec!["accuracy", "f1", "precision", "recall"]
    );
    assert!(matches!(
        trainer.validate_epoch(&model, &[]),
        Err(TrainerError::EmptyValidationData)
    ));
    // evaluate is the same computation.
    assert_eq!(trainer.evaluate(&model, &val).unwrap(), first);
}

#[test]
fn metrics_over_batches_equal_metrics_over_their_concatenation() {
    let dir = tempdir().unwrap();
    let mut trainer = Trainer::with_metrics(quiet_config(dir.path(), 1), &["accuracy", "f1"]).unwrap();
    let model = ToyText::new(20, 4, 8, 7).unwrap();

    let combined = token_batch(12, 6, 20, 8);
    // Split the combined batch into two by rebuilding from slices.
    let ids = combined
        .int("token_ids")
        .unwrap()
        .clone()
        .into_dimensionality::<ndarray::Ix2>()
        .unwrap();
    let labels = combined.int("label").unwrap();
    let split_at = 5;
    let mut parts = Vec::new();
    for range in [0..split_at, split_at..12] {
        let mut m = BTreeMap::new();
        m.insert(
            "token_ids".to_string(),
            Feature::Int(ids.slice(ndarray::s![range.clone(), ..]).to_owned().into_dyn()),
        );
        m.insert(
            "mask".to_string(),
            Feature::Int(ArrayD::from_elem(IxDyn(&[range.len(), 6]), 1)),
        );
        m.insert(
            "label".to_string(),
            Feature::Int(
                ArrayD::from_shape_vec(
                    IxDyn(&[range.len()]),
                    range.clone().map(|i| labels[[i]]).collect(),
                )
                .unwrap(),
            ),
        );
        parts.push(KeyedBatch::from_features(m).unwrap());
    }
    let split_report = trainer.validate_epoch(&model, &parts).unwrap();
    let whole_report = trainer.validate_epoch(&model, &[combined]).unwrap();
    assert_eq!(split_report, whole_report);
}

// ---------------------------------------------------------------- config validation

#[test]
fn trainer_config_is_validated() {
    let dir = tempdir().unwrap();
    let bad_epochs = TrainerConfig::new(0, OptimizerSpec::new("sgd", 0.1), dir.path());
    assert!(Trainer::with_metrics(bad_epochs, &["accuracy"]).is_err());

    let bad_optimizer = TrainerConfig::new(1, OptimizerSpec::new("rmsprop", 0.1), dir.path());
    assert!(Trainer::with_metrics(bad_optimizer, &["accuracy"]).is_err());

    let bad_lr = TrainerConfig::new(1, OptimizerSpec::new("sgd", 0.0), dir.path());
    assert!(Trainer::with_metrics(bad_lr, &["accuracy"]).is_err());

    let mut bad_patience = TrainerConfig::new(1, OptimizerSpec::new("sgd", 0.1), dir.path());
    bad_patience.early_stopping = Some(EarlyStoppingConfig {
        patience: 0,
        metric: "accuracy".to_string(),
    });
    assert!(Trainer::with_metrics(bad_patience, &["accuracy"]).is_err());

    // The published configuration is accepted.
    let mut published = TrainerConfig::new(50, OptimizerSpec::new("adam", 0.00005), dir.path());
    published.quiet = true;
    assert!(Trainer::with_metrics(published, &["accuracy"]).is_ok());
}

#[test]
fn adam_and_sgd_reduce_the_loss_on_a_small_task() {
    for optimizer in ["sgd", "adam"] {
        let dir = tempdir().unwrap();
        let mut config = quiet_config(dir.path(), 15);
        config.optimizer = OptimizerSpec::new(optimizer, 0.05);
        let mut trainer = Trainer::with_metrics(config, &["accuracy"]).unwrap();
        let mut model = ToyText::new(20, 8, 8, 7).unwrap();
        let train = [token_batch(32, 6, 20, 14)];
        let history = trainer.fit(&mut model, &train, None).unwrap();
        let first = history.records.first().unwrap().train_losses["loss"];
        let last = history.records.last().unwrap().train_losses["loss"];
        assert!(last < first, "{optimizer}: {first} -> {last}");
    }
}
