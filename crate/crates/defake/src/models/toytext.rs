use serde_json::{json, Map, Value};

use crate::dataset::KeyedBatch;
use crate::tensor::{NodeId, ParamId, ParamInit, ParamStore, Tape};

use super::components::Affine;
use super::registry::ParamReader;
use super::{int_feature, mask_matrix, AbstractModel, Result};

/// Minimal text model: word embedding, mean pool over tokens, fully
/// connected layer to 2 logits, cross-entropy loss. Doubles as the
/// reference for extending the framework with a new model.
pub struct ToyText {
    store: ParamStore,
    embedding: ParamId,
    head: Affine,
    vocab_size: usize,
    embed_dim: usize,
    max_len: usize,
}

impl ToyText {
    pub fn new(vocab_size: usize, embed_dim: usize, max_len: usize, seed: u64) -> Result<Self> {
        let mut store = ParamStore::new();
        let mut init = ParamInit::new(seed);
        let embedding = store.register("embedding", init.embedding(vocab_size, embed_dim))?;
        let head = Affine::new(&mut store, &mut init, "head", embed_dim, 2)?;
        Ok(Self {
            store,
            embedding,
            head,
            vocab_size,
            embed_dim,
            max_len,
        })
    }
}

impl AbstractModel for ToyText {
    fn name(&self) -> &'static str {
        "toytext"
    }

    fn construction_params(&self) -> Map<String, Value> {
        let mut m = Map::new();
        m.insert("vocab_size".into(), json!(self.vocab_size));
        m.insert("embed_dim".into(), json!(self.embed_dim));
        m.insert("max_len".into(), json!(self.max_len));
        m
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

    fn forward(&self, tape: &mut Tape<'_>, batch: &KeyedBatch, _train: bool) -> Result<NodeId> {
        let ids = int_feature(batch, "token_ids")?;
        let mask = mask_matrix(batch)?;
        let emb = tape.param(self.embedding);
        let embedded = tape.embedding(emb, ids)?;
        let pooled = tape.mean_pool_masked(embedded, &mask)?;
        self.head.forward(tape, pooled)
    }
}

pub fn build_toy_text_model(
    params: &Map<String, Value>,
    seed: u64,
) -> Result<Box<dyn AbstractModel>> {
    let reader = ParamReader::new("toytext", params);
    let vocab_size = reader.required_positive("vocab_size")?;
    let embed_dim = reader.positive("embed_dim", 32)?;
    let max_len = reader.positive("max_len", 64)?;
    reader.finish()?;
    Ok(Box::new(ToyText::new(vocab_size, embed_dim, max_len, seed)?))
}
