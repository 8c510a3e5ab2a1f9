//! The training pipeline assembled by hand, without the `execution`
//! front end: tokenize, batch, resolve a model from the registry, and drive
//! the trainer with early stopping, gradient clipping and a learning-rate
//! schedule.
//!
//! ```sh
//! cargo run --example train_from_scratch
//! ```

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use defake::dataset::{
    make_batches, reference_tokenize, split_data, FieldValue, SampleRecord, TextDataset,
    Vocabulary,
};
use defake::models::builtin_registry;
use defake::trainer::{EarlyStoppingConfig, OptimizerSpec, Trainer, TrainerConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Synthetic corpus: the word "fabricated" marks label 1.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let fillers = ["press", "match", "storm", "budget", "film", "poll"];
    let records: Vec<SampleRecord> = (0..800)
        .map(|_| {
            let mut words: Vec<&str> =
                (0..7).map(|_| fillers[rng.gen_range(0..fillers.len())]).collect();
            let label = rng.gen_range(0..2i64);
            if label == 1 {
                let pos = rng.gen_range(0..words.len());
                words[pos] = "fabricated";
            }
            let mut fields = BTreeMap::new();
            fields.insert("text".to_string(), FieldValue::Str(words.join(" ")));
            fields.insert("label".to_string(), FieldValue::Int(label));
            SampleRecord { fields }
        })
        .collect();

    let (train, val, test) = split_data(records, (0.8, 0.1, 0.1), 7)?;

    // The vocabulary comes from the training split only.
    let vocab = Vocabulary::build(train.iter().filter_map(|r| match r.fields.get("text") {
        Some(FieldValue::Str(s)) => Some(s.as_str()),
        _ => None,
    }));
    let max_len = 8;
    println!("vocabulary: {} tokens", vocab.len());

    let dataset = |records: &[SampleRecord]| -> Result<TextDataset, Box<dyn std::error::Error>> {
        let vocab = vocab.clone();
        Ok(TextDataset::new(
            records,
            Some((
                "text",
                Box::new(move |text: &str| reference_tokenize(text, &vocab, max_len).unwrap()),
            )),
        )?)
    };
    let train_batches = make_batches(&dataset(&train)?, 32, true, 42)?;
    let val_batches = make_batches(&dataset(&val)?, 32, false, 42)?;
    let test_batches = make_batches(&dataset(&test)?, 32, false, 42)?;

    // Any registered model works here; swap the name to compare them.
    let mut params = serde_json::Map::new();
    params.insert("vocab_size".into(), json!(vocab.len()));
    params.insert("max_len".into(), json!(max_len));
    params.insert("channels".into(), json!(16));
    let mut model = builtin_registry().resolve("textcnn", &params, 42)?;

    let dir = tempfile::tempdir()?;
    let mut config = TrainerConfig::new(15, OptimizerSpec::new("adam", 0.002), dir.path());
    config.clip_max_norm = Some(5.0);
    config.early_stopping = Some(EarlyStoppingConfig {
        patience: 3,
        metric: "accuracy".to_string(),
    });
    // Halve the learning rate every 5 epochs.
    config.scheduler = Some(Box::new(|epoch, lr| {
        if epoch % 5 == 0 {
            lr / 2.0
        } else {
            lr
        }
    }));
    let mut trainer = Trainer::with_metrics(config, &["accuracy", "f1"])?;

    let history = trainer.fit(model.as_mut(), &train_batches, Some(&val_batches))?;
    println!(
        "stopped early: {}, best epoch: {}",
        history.stopped_early, history.best_epoch
    );

    // `fit` restored the best checkpoint, so this evaluates the best model.
    let metrics = trainer.evaluate(model.as_ref(), &test_batches)?;
    println!("test metrics: {metrics}");
    Ok(())
}
