use std::cell::RefCell;

use ndarray::{Array2, Ix2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::dataset::KeyedBatch;
use crate::tensor::{NodeId, ParamId, ParamInit, ParamStore, Tape};

use super::components::{Affine, TextCnnLayer};
use super::registry::ParamReader;
use super::{int_feature, mask_matrix, AbstractModel, ModelError, Result};

/// Multi-domain detector: a mixture of TextCNN experts aggregated by a
/// domain gate.
///
/// The gate input is the concatenation of the sample's domain embedding and
/// its mean-pooled text embedding; gate weights are a softmax over experts.
pub struct Mdfend {
    store: ParamStore,
    embedding: ParamId,
    domain_embedding: ParamId,
    experts: Vec<TextCnnLayer>,
    gate: Affine,
    head: Affine,
    dropout: f64,
    rng: RefCell<ChaCha8Rng>,
    vocab_size: usize,
    embed_dim: usize,
    num_experts: usize,
    num_domains: usize,
    expert_channels: usize,
    filter_sizes: Vec<usize>,
    max_len: usize,
}

impl Mdfend {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        vocab_size: usize,
        embed_dim: usize,
        num_experts: usize,
        num_domains: usize,
        expert_channels: usize,
        filter_sizes: Vec<usize>,
        dropout: f64,
        max_len: usize,
        seed: u64,
    ) -> Result<Self> {
        let mut store = ParamStore::new();
        let mut init = ParamInit::new(seed);
        let embedding = store.register("embedding", init.embedding(vocab_size, embed_dim))?;
        let domain_embedding =
            store.register("domain_embedding", init.embedding(num_domains, embed_dim))?;
        let mut experts = Vec::with_capacity(num_experts);
        for e in 0..num_experts {
            experts.push(TextCnnLayer::new(
                &mut store,
                &mut init,
                &format!("expert{e}"),
                embed_dim,
                &filter_sizes,
                expert_channels,
            )?);
        }
        let gate = Affine::new(&mut store, &mut init, "gate", 2 * embed_dim, num_experts)?;
        let head = Affine::new(&mut store, &mut init, "head", experts[0].output_dim(), 2)?;
        Ok(Self {
            store,
            embedding,
            domain_embedding,
            experts,
            gate,
            head,
            dropout,
            rng: RefCell::new(ChaCha8Rng::seed_from_u64(seed ^ 0x5bd1_e995)),
            vocab_size,
            embed_dim,
            num_experts,
            num_domains,
            expert_channels,
            filter_sizes,
            max_len,
        })
    }

    fn gate_node(&self, tape: &mut Tape<'_>, batch: &KeyedBatch) -> Result<NodeId> {
        let domains = int_feature(batch, "domain")
            .map_err(|_| ModelError::MissingFeature("domain".into()))?;
        let ids = int_feature(batch, "token_ids")?;
        let mask = mask_matrix(batch)?;
        let demb = tape.param(self.domain_embedding);
        let domain_vec = tape.embedding(demb, domains)?;
        let emb = tape.param(self.embedding);
        let embedded = tape.embedding(emb, ids)?;
        let pooled = tape.mean_pool_masked(embedded, &mask)?;
        let gate_in = tape.concat_last(&[domain_vec, pooled])?;
        let scores = self.gate.forward(tape, gate_in)?;
        Ok(tape.softmax_last(scores))
    }

    /// Per-sample gate weights `[B, num_experts]`; each row sums to 1.
    pub fn gate_weights(&self, batch: &KeyedBatch) -> Result<Array2<f64>> {
        let mut tape = Tape::new(&self.store);
        let gate = self.gate_node(&mut tape, batch)?;
        Ok(tape
            .value(gate)
            .to_owned()
            .into_dimensionality::<Ix2>()
            .expect("gate is rank 2"))
    }
}

impl AbstractModel for Mdfend {
    fn name(&self) -> &'static str {
        "mdfend"
    }

    fn construction_params(&self) -> Map<String, Value> {
        let mut m = Map::new();
        m.insert("vocab_size".into(), json!(self.vocab_size));
        m.insert("embed_dim".into(), json!(self.embed_dim));
        m.insert("num_experts".into(), json!(self.num_experts));
        m.insert("num_domains".into(), json!(self.num_domains));
        m.insert("expert_channels".into(), json!(self.expert_channels));
        m.insert("filter_sizes".into(), json!(self.filter_sizes));
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
        &["token_ids", "mask", "domain"]
    }

    fn forward(&self, tape: &mut Tape<'_>, batch: &KeyedBatch, train: bool) -> Result<NodeId> {
        let gate = self.gate_node(tape, batch)?;
        let ids = int_feature(batch, "token_ids")?;
        let emb = tape.param(self.embedding);
        let embedded = tape.embedding(emb, ids)?;
        let expert_features = self
            .experts
            .iter()
            .map(|expert| expert.forward(tape, embedded))
            .collect::<Result<Vec<_>>>()?;
        let mixed = tape.weighted_expert_sum(gate, &expert_features)?;
        let mixed = if train {
            tape.dropout(mixed, self.dropout, &mut *self.rng.borrow_mut())?
        } else {
            mixed
        };
        self.head.forward(tape, mixed)
    }
}

pub fn build_mdfend(params: &Map<String, Value>, seed: u64) -> Result<Box<dyn AbstractModel>> {
    let reader = ParamReader::new("mdfend", params);
    let vocab_size = reader.required_positive("vocab_size")?;
    let embed_dim = reader.positive("embed_dim", 32)?;
    let num_experts = reader.positive("num_experts", 5)?;
    let num_domains = reader.positive("num_domains", 9)?;
    let expert_channels = reader.positive("expert_channels", 32)?;
    let filter_sizes = reader.usize_list("filter_sizes", &[3, 4, 5])?;
    let dropout = reader.f64("dropout", 0.2)?;
    let max_len = reader.positive("max_len", 170)?;
    reader.finish()?;
    Ok(Box::new(Mdfend::new(
        vocab_size,
        embed_dim,
        num_experts,
        num_domains,
        expert_channels,
        filter_sizes,
        dropout,
        max_len,
        seed,
    )?))
}
