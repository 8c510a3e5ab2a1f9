use std::cell::RefCell;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::dataset::KeyedBatch;
use crate::tensor::{NodeId, ParamId, ParamInit, ParamStore, Tape};

use super::components::{Affine, TextCnnLayer};
use super::registry::ParamReader;
use super::{int_feature, AbstractModel, Result};

/// Convolutional text classifier: embedding, TextCNN feature layer,
/// dropout, affine head to 2 logits.
pub struct TextCnn {
    store: ParamStore,
    embedding: ParamId,
    layer: TextCnnLayer,
    head: Affine,
    dropout: f64,
    rng: RefCell<ChaCha8Rng>,
    vocab_size: usize,
    embed_dim: usize,
    filter_sizes: Vec<usize>,
    channels: usize,
    max_len: usize,
}

impl TextCnn {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        vocab_size: usize,
        embed_dim: usize,
        filter_sizes: Vec<usize>,
        channels: usize,
        dropout: f64,
        max_len: usize,
        seed: u64,
    ) -> Result<Self> {
        let mut store = ParamStore::new();
        let mut init = ParamInit::new(seed);
        let embedding = store.register("embedding", init.embedding(vocab_size, embed_dim))?;
        let layer = TextCnnLayer::new(
            &mut store,
            &mut init,
            "textcnn",
            embed_dim,
            &filter_sizes,
            channels,
        )?;
        let head = Affine::new(&mut store, &mut init, "head", layer.output_dim(), 2)?;
        Ok(Self {
            store,
            embedding,
            layer,
            head,
            dropout,
            rng: RefCell::new(ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9)),
            vocab_size,
            embed_dim,
            filter_sizes,
            channels,
            max_len,
        })
    }
}

impl AbstractModel for TextCnn {
    fn name(&self) -> &'static str {
        "textcnn"
    }

    fn construction_params(&self) -> Map<String, Value> {
        let mut m = Map::new();
        m.insert("vocab_size".into(), json!(self.vocab_size));
        m.insert("embed_dim".into(), json!(self.embed_dim));
        m.insert("filter_sizes".into(), json!(self.filter_sizes));
        m.insert("channels".into(), json!(self.channels));
        m.insert("dropout".into(), json!(self.dropout));
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
        &["token_ids"]
    }

    fn forward(&self, tape: &mut Tape<'_>, batch: &KeyedBatch, train: bool) -> Result<NodeId> {
        let ids = int_feature(batch, "token_ids")?;
        let emb = tape.param(self.embedding);
        let embedded = tape.embedding(emb, ids)?;
        let features = self.layer.forward(tape, embedded)?;
        let features = if train {
            tape.dropout(features, self.dropout, &mut *self.rng.borrow_mut())?
        } else {
            features
        };
        self.head.forward(tape, features)
    }
}

pub fn build_textcnn(params: &Map<String, Value>, seed: u64) -> Result<Box<dyn AbstractModel>> {
    let reader = ParamReader::new("textcnn", params);
    let vocab_size = reader.required_positive("vocab_size")?;
    let embed_dim = reader.positive("embed_dim", 32)?;
    let filter_sizes = reader.usize_list("filter_sizes", &[3, 4, 5])?;
    let channels = reader.positive("channels", 50)?;
    let dropout = reader.f64("dropout", 0.2)?;
    let max_len = reader.positive("max_len", 32)?;
    reader.finish()?;
    Ok(Box::new(TextCnn::new(
        vocab_size,
        embed_dim,
        filter_sizes,
        channels,
        dropout,
        max_len,
        seed,
    )?))
}
