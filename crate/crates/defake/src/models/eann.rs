use std::cell::RefCell;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::dataset::KeyedBatch;
use crate::tensor::{NodeId, ParamId, ParamInit, ParamStore, Tape};

use super::components::{Affine, TextCnnLayer};
use super::registry::ParamReader;
use super::{
    batch_labels, float_feature, int_feature, AbstractModel, LossNodes, ModelError, Result,
};

/// Event-adversarial multimodal detector. A TextCNN text branch and an
/// affine projection of precomputed image features are concatenated into a
/// shared representation that feeds two heads: the fake-news classifier and
/// an event discriminator behind a gradient-reversal layer. Training
/// minimizes classification loss while pushing the shared features toward
/// event invariance.
pub struct Eann {
    store: ParamStore,
    embedding: ParamId,
    layer: TextCnnLayer,
    image_proj: Affine,
    head: Affine,
    event_head: Affine,
    lambda: f64,
    dropout: f64,
    rng: RefCell<ChaCha8Rng>,
    vocab_size: usize,
    embed_dim: usize,
    image_feature_dim: usize,
    filter_sizes: Vec<usize>,
    channels: usize,
    num_events: usize,
    max_len: usize,
}

impl Eann {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        vocab_size: usize,
        embed_dim: usize,
        image_feature_dim: usize,
        filter_sizes: Vec<usize>,
        channels: usize,
        num_events: usize,
        lambda: f64,
        dropout: f64,
        max_len: usize,
        seed: u64,
    ) -> Result<Self> {
        if lambda < 0.0 {
            return Err(ModelError::InvalidParam {
                model: "eann".into(),
                key: "lambda".into(),
                detail: format!("must be >= 0, got {lambda}"),
            });
        }
        if num_events < 2 {
            return Err(ModelError::InvalidParam {
                model: "eann".into(),
                key: "num_events".into(),
                detail: format!("must be >= 2, got {num_events}"),
            });
        }
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
        let image_proj = Affine::new(
            &mut store,
            &mut init,
            "image_proj",
            image_feature_dim,
            embed_dim,
        )?;
        let shared_dim = layer.output_dim() + embed_dim;
        let head = Affine::new(&mut store, &mut init, "head", shared_dim, 2)?;
        let event_head = Affine::new(&mut store, &mut init, "event_head", shared_dim, num_events)?;
        Ok(Self {
            store,
            embedding,
            layer,
            image_proj,
            head,
            event_head,
            lambda,
            dropout,
            rng: RefCell::new(ChaCha8Rng::seed_from_u64(seed ^ 0xc2b2_ae35)),
            vocab_size,
            embed_dim,
            image_feature_dim,
            filter_sizes,
            channels,
            num_events,
            max_len,
        })
    }

    /// Shared trunk: concat(textcnn features, projected image features).
    fn features(&self, tape: &mut Tape<'_>, batch: &KeyedBatch, train: bool) -> Result<NodeId> {
        let ids = int_feature(batch, "token_ids")?;
        let emb = tape.param(self.embedding);
        let embedded = tape.embedding(emb, ids)?;
        let text = self.layer.forward(tape, embedded)?;
        let image = float_feature(batch, "image_feature")?;
        if image.ndim() != 2 || image.shape()[1] != self.image_feature_dim {
            return Err(ModelError::BadFeature {
                key: "image_feature".into(),
                detail: format!(
                    "expected [B, {}], got {:?}",
                    self.image_feature_dim,
                    image.shape()
                ),
            });
        }
        let image = tape.constant(image.to_owned());
        let image = self.image_proj.forward(tape, image)?;
        let shared = tape.concat_last(&[text, image])?;
        if train {
            Ok(tape.dropout(shared, self.dropout, &mut *self.rng.borrow_mut())?)
        } else {
            Ok(shared)
        }
    }

    /// Event-class probabilities `[B, num_events]` from the discriminator
    /// head, for inspecting how much event information the shared features
    /// retain.
    pub fn event_probabilities(&self, batch: &KeyedBatch) -> Result<ndarray::Array2<f64>> {
        let mut tape = Tape::new(&self.store);
        let features = self.features(&mut tape, batch, false)?;
        let logits = self.event_head.forward(&mut tape, features)?;
        let probs = tape.softmax_last(logits);
        Ok(tape
            .value(probs)
            .to_owned()
            .into_dimensionality::<ndarray::Ix2>()
            .expect("event logits are rank 2"))
    }
}

impl AbstractModel for Eann {
    fn name(&self) -> &'static str {
        "eann"
    }

    fn construction_params(&self) -> Map<String, Value> {
        let mut m = Map::new();
        m.insert("vocab_size".into(), json!(self.vocab_size));
        m.insert("embed_dim".into(), json!(self.embed_dim));
        m.insert("image_feature_dim".into(), json!(self.image_feature_dim));
        m.insert("filter_sizes".into(), json!(self.filter_sizes));
        m.insert("channels".into(), json!(self.channels));
        m.insert("num_events".into(), json!(self.num_events));
        m.insert("lambda".into(), json!(self.lambda));
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
        &["token_ids", "image_feature", "event"]
    }

    fn forward(&self, tape: &mut Tape<'_>, batch: &KeyedBatch, train: bool) -> Result<NodeId> {
        let features = self.features(tape, batch, train)?;
        self.head.forward(tape, features)
    }

    /// Three entries: "classification", "event_adversarial" and their sum as
    /// "total". The event branch goes through gradient reversal, so the
    /// total's gradient pushes the shared trunk away from event
    /// separability.
    fn loss_nodes(&self, tape: &mut Tape<'_>, batch: &KeyedBatch, train: bool) -> Result<LossNodes> {
        let features = self.features(tape, batch, train)?;
        let logits = self.head.forward(tape, features)?;
        let labels = batch_labels(batch)?;
        let class_loss = tape.cross_entropy_mean(logits, &labels)?;

        let events = int_feature(batch, "event")
            .map_err(|_| ModelError::MissingFeature("event".into()))?;
        let events: Vec<usize> = events
            .iter()
            .map(|&e| {
                usize::try_from(e).map_err(|_| ModelError::BadFeature {
                    key: "event".into(),
                    detail: format!("negative event id {e}"),
                })
            })
            .collect::<Result<_>>()?;
        let reversed = tape.grad_reverse(features, self.lambda)?;
        let event_logits = self.event_head.forward(tape, reversed)?;
        let event_loss = tape.cross_entropy_mean(event_logits, &events)?;

        let total = tape.add(class_loss, event_loss)?;
        Ok(LossNodes {
            entries: vec![
                ("classification".into(), class_loss),
                ("event_adversarial".into(), event_loss),
                ("total".into(), total),
            ],
            total,
        })
    }
}

pub fn build_eann(params: &Map<String, Value>, seed: u64) -> Result<Box<dyn AbstractModel>> {
    let reader = ParamReader::new("eann", params);
    let vocab_size = reader.required_positive("vocab_size")?;
    let embed_dim = reader.positive("embed_dim", 32)?;
    let image_feature_dim = reader.positive("image_feature_dim", 16)?;
    let filter_sizes = reader.usize_list("filter_sizes", &[3, 4, 5])?;
    let channels = reader.positive("channels", 32)?;
    let num_events = reader.positive("num_events", 10)?;
    let lambda = reader.f64("lambda", 1.0)?;
    let dropout = reader.f64("dropout", 0.2)?;
    let max_len = reader.positive("max_len", 32)?;
    reader.finish()?;
    Ok(Box::new(Eann::new(
        vocab_size,
        embed_dim,
        image_feature_dim,
        filter_sizes,
        channels,
        num_events,
        lambda,
        dropout,
        max_len,
        seed,
    )?))
}
