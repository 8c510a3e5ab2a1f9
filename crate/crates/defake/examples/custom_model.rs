//! Extending the zoo: a custom model that satisfies [`AbstractModel`] plugs
//! into the registry, the trainer and checkpointing with no other changes.
//!
//! The model is a mean-of-embeddings linear classifier — deliberately
//! minimal so the contract itself is the focus.
//!
//! ```sh
//! cargo run --example custom_model
//! ```

use std::collections::BTreeMap;

use ndarray::{ArrayD, IxDyn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use defake::dataset::{Feature, KeyedBatch};
use defake::models::{AbstractModel, ModelError, ModelRegistry};
use defake::tensor::{NodeId, ParamInit, ParamStore, Tape};
use defake::trainer::{MetricEvaluator, OptimizerSpec, Trainer, TrainerConfig};

struct BagOfEmbeddings {
    store: ParamStore,
    embedding: defake::tensor::ParamId,
    head_w: defake::tensor::ParamId,
    head_b: defake::tensor::ParamId,
    vocab_size: usize,
    embed_dim: usize,
}

impl BagOfEmbeddings {
    fn new(vocab_size: usize, embed_dim: usize, seed: u64) -> Result<Self, ModelError> {
        let mut store = ParamStore::new();
        let mut init = ParamInit::new(seed);
        let embedding = store.register("embedding", init.embedding(vocab_size, embed_dim))?;
        let head_w = store.register("head.w", init.affine_weight(embed_dim, 2))?;
        let head_b = store.register("head.b", init.zeros(&[2]))?;
        Ok(Self {
            store,
            embedding,
            head_w,
            head_b,
            vocab_size,
            embed_dim,
        })
    }
}

impl AbstractModel for BagOfEmbeddings {
    fn name(&self) -> &'static str {
        "bagofembeddings"
    }

    fn construction_params(&self) -> serde_json::Map<String, serde_json::Value> {
        let mut p = serde_json::Map::new();
        p.insert("vocab_size".into(), json!(self.vocab_size));
        p.insert("embed_dim".into(), json!(self.embed_dim));
        p
    }

    fn store(&self) -> &ParamStore {
        &self.store
    }

    fn store_mut(&mut self) -> &mut ParamStore {
        &mut self.store
    }

    fn feature_keys(&self) -> &'static [&'static str] {
        &["token_ids", "mask"]
    }

    fn forward(
        &self,
        tape: &mut Tape<'_>,
        batch: &KeyedBatch,
        _train: bool,
    ) -> Result<NodeId, ModelError> {
        let ids = batch
            .int("token_ids")
            .ok_or_else(|| ModelError::MissingFeature("token_ids".into()))?;
        let mask = batch
            .int("mask")
            .ok_or_else(|| ModelError::MissingFeature("mask".into()))?
            .mapv(|v| v as f64)
            .into_dimensionality::<ndarray::Ix2>()
            .map_err(|_| ModelError::BadFeature {
                key: "mask".into(),
                detail: "expected rank 2".into(),
            })?;

        let table = tape.param(self.embedding);
        let embedded = tape.embedding(table, ids)?; // [B, L, D]
        let pooled = tape.mean_pool_masked(embedded, &mask)?; // [B, D]
        let w = tape.param(self.head_w);
        let b = tape.param(self.head_b);
        let logits = tape.matmul(pooled, w)?;
        Ok(tape.add_bias(logits, b)?)
    }
}

fn trigger_batches(count: usize, vocab: usize, seed: u64) -> Vec<KeyedBatch> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = 6;
    (0..count.div_ceil(32))
        .map(|_| {
            let b = 32.min(count);
            let mut ids = ArrayD::zeros(IxDyn(&[b, len]));
            let mut labels = Vec::new();
            for i in 0..b {
                let label = rng.gen_range(0..2i64);
                for t in 0..len {
                    ids[[i, t]] = rng.gen_range(3..vocab as i64);
                }
                if label == 1 {
                    ids[[i, rng.gen_range(0..len)]] = 2; // the trigger token
                }
                labels.push(label);
            }
            let mut m = BTreeMap::new();
            m.insert("token_ids".to_string(), Feature::Int(ids));
            m.insert(
                "mask".to_string(),
                Feature::Int(ArrayD::from_elem(IxDyn(&[b, len]), 1)),
            );
            m.insert(
                "label".to_string(),
                Feature::Int(ArrayD::from_shape_vec(IxDyn(&[b]), labels).unwrap()),
            );
            KeyedBatch::from_features(m).unwrap()
        })
        .collect()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Register the custom model alongside the built-ins; configs can now
    // refer to it by name.
    let mut registry = ModelRegistry::new();
    registry.register(
        "bagofembeddings",
        Box::new(|params, seed| {
            let vocab_size = params["vocab_size"].as_u64().unwrap() as usize;
            let embed_dim = params.get("embed_dim").and_then(|v| v.as_u64()).unwrap_or(16) as usize;
            Ok(Box::new(BagOfEmbeddings::new(vocab_size, embed_dim, seed)?))
        }),
    )?;

    let mut params = serde_json::Map::new();
    params.insert("vocab_size".into(), json!(20));
    let mut model = registry.resolve("bagofembeddings", &params, 42)?;

    let train = trigger_batches(320, 20, 5);
    let val = trigger_batches(64, 20, 6);

    let dir = tempfile::tempdir()?;
    let config = TrainerConfig::new(10, OptimizerSpec::new("adam", 0.05), dir.path());
    let mut trainer = Trainer::new(config, Box::new(MetricEvaluator::new(&["accuracy"])))?;
    let history = trainer.fit(model.as_mut(), &train, Some(&val))?;

    let last = history.records.last().unwrap();
    println!(
        "final validation metrics: {} (epoch {})",
        last.val_metrics, last.epoch
    );
    Ok(())
}
