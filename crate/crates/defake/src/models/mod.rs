//! The uniform model contract, reusable neural components and the built-in
//! model zoo.
//!
//! Every model satisfies [`AbstractModel`]: `forward` produces final-layer
//! logits from a [`KeyedBatch`], while `calculate_loss` and `predict` route
//! through it. Models are constructed by lowercase name through
//! [`ModelRegistry`].

pub mod components;

mod bigcn;
mod eann;
mod mdfend;
mod registry;
mod textcnn;
mod toytext;


pub use bigcn::{build_bigcn_lite, BiGcnLite};
pub use eann::{build_eann, Eann};
pub use mdfend::{build_mdfend, Mdfend};
pub use registry::{builtin_registry, ModelFactory, ModelRegistry};
pub use textcnn::{build_textcnn, TextCnn};
pub use toytext::{build_toy_text_model, ToyText};

use std::collections::BTreeMap;

use ndarray::{Array2, ArrayD, Ix2};
use thiserror::Error;

use crate::dataset::KeyedBatch;
use crate::tensor::{NodeId, ParamId, ParamStore, Tape, TensorError};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("batch is missing feature key {0:?}")]
    MissingFeature(String),
    #[error("feature {key:?} has the wrong type or shape: {detail}")]
    BadFeature { key: String, detail: String },
    #[error("loss is not finite")]
    NonFiniteLoss,
    #[error("unknown model {name:?}; registered models: {known:?}")]
    UnknownModel { name: String, known: Vec<String> },
    #[error("model {0:?} is already registered")]
    DuplicateModel(String),
    #[error("invalid parameter {key:?} for model {model:?}: {detail}")]
    InvalidParam {
        model: String,
        key: String,
        detail: String,
    },
    #[error("unknown parameter keys for model {model:?}: {keys:?}")]
    UnknownParams { model: String, keys: Vec<String> },
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

pub type Result<T> = std::result::Result<T, ModelError>;

/// Either a single scalar loss or a named collection with a defined total.
#[derive(Debug, Clone, PartialEq)]
pub struct LossReport {
    pub losses: BTreeMap<String, f64>,
}

impl LossReport {
    pub fn single(name: &str, value: f64) -> Self {
        let mut losses = BTreeMap::new();
        losses.insert(name.to_string(), value);
        Self { losses }
    }

    /// The scalar used for back-propagation: a lone entry is its own total,
    /// an explicit "total" entry wins, otherwise entries are summed.
    pub fn total(&self) -> f64 {
        if self.losses.len() == 1 {
            return *self.losses.values().next().unwrap();
        }
        if let Some(&t) = self.losses.get("total") {
            return t;
        }
        self.losses.values().sum()
    }
}

/// Loss graph handles returned by `loss_nodes`: named entries plus the node
/// to back-propagate from.
pub struct LossNodes {
    pub entries: Vec<(String, NodeId)>,
    pub total: NodeId,
}

impl LossNodes {
    pub fn single(name: &str, node: NodeId) -> Self {
        Self {
            entries: vec![(name.to_string(), node)],
            total: node,
        }
    }
}

/// Contract satisfied by every model in the zoo.
///
/// `forward` maps a batch to final-layer logits `[B, 2]`; the provided
/// `calculate_loss` and `predict` route through it. `train` toggles
/// stochastic layers (dropout) and must be `false` for evaluation.
pub trait AbstractModel {
    fn name(&self) -> &'static str;

    /// Construction parameters, echoed into checkpoints.
    fn construction_params(&self) -> serde_json::Map<String, serde_json::Value>;

    fn store(&self) -> &ParamStore;

    fn store_mut(&mut self) -> &mut ParamStore;

    /// Feature keys the model reads from a batch (besides "label").
    fn feature_keys(&self) -> &'static [&'static str];

    fn forward(&self, tape: &mut Tape<'_>, batch: &KeyedBatch, train: bool) -> Result<NodeId>;

    /// Build the loss graph. The default is cross-entropy of the forward
    /// logits against "label"; multi-loss models override this.
    fn loss_nodes(&self, tape: &mut Tape<'_>, batch: &KeyedBatch, train: bool) -> Result<LossNodes> {
        let logits = self.forward(tape, batch, train)?;
        let labels = batch_labels(batch)?;
        let loss = tape.cross_entropy_mean(logits, &labels)?;
        Ok(LossNodes::single("loss", loss))
    }

    /// Loss values for one batch (training mode).
    fn calculate_loss(&self, batch: &KeyedBatch) -> Result<LossReport> {
        self.loss_with_mode(batch, true)
    }

    fn loss_with_mode(&self, batch: &KeyedBatch, train: bool) -> Result<LossReport> {
        let store = self.store();
        let mut tape = Tape::new(store);
        let nodes = self.loss_nodes(&mut tape, batch, train)?;
        report_from_nodes(&tape, &nodes)
    }

    /// Loss values plus gradients of the total with respect to every
    /// parameter.
    fn loss_and_grads(
        &self,
        batch: &KeyedBatch,
        train: bool,
    ) -> Result<(LossReport, BTreeMap<ParamId, ArrayD<f64>>)> {
        let store = self.store();
        let mut tape = Tape::new(store);
        let nodes = self.loss_nodes(&mut tape, batch, train)?;
        let report = report_from_nodes(&tape, &nodes)?;
        let grads = tape.backward(nodes.total);
        Ok((report, grads))
    }

    /// Class probabilities `[B, 2]`: softmax over the forward logits.
    fn predict(&self, batch: &KeyedBatch) -> Result<Array2<f64>> {
        let store = self.store();
        let mut tape = Tape::new(store);
        let logits = self.forward(&mut tape, batch, false)?;
        let probs = tape.softmax_last(logits);
        Ok(tape
            .value(probs)
            .to_owned()
            .into_dimensionality::<Ix2>()
            .expect("logits are rank 2"))
    }
}

fn report_from_nodes(tape: &Tape<'_>, nodes: &LossNodes) -> Result<LossReport> {
    let mut losses = BTreeMap::new();
    for (name, node) in &nodes.entries {
        let v = tape.scalar(*node);
        if !v.is_finite() {
            return Err(ModelError::NonFiniteLoss);
        }
        losses.insert(name.clone(), v);
    }
    Ok(LossReport { losses })
}

/// "label" as class indices, validated non-negative.
pub(crate) fn batch_labels(batch: &KeyedBatch) -> Result<Vec<usize>> {
    let labels = batch
        .int("label")
        .ok_or_else(|| ModelError::MissingFeature("label".into()))?;
    labels
        .iter()
        .map(|&l| {
            usize::try_from(l).map_err(|_| ModelError::BadFeature {
                key: "label".into(),
                detail: format!("negative label {l}"),
            })
        })
        .collect()
}

pub(crate) fn int_feature<'b>(batch: &'b KeyedBatch, key: &str) -> Result<&'b ArrayD<i64>> {
    match batch.get(key) {
        None => Err(ModelError::MissingFeature(key.into())),
        Some(crate::dataset::Feature::Int(a)) => Ok(a),
        Some(other) => Err(ModelError::BadFeature {
            key: key.into(),
            detail: format!("expected integer array, got shape {:?} float", other.shape()),
        }),
    }
}

pub(crate) fn float_feature<'b>(batch: &'b KeyedBatch, key: &str) -> Result<&'b ArrayD<f64>> {
    match batch.get(key) {
        None => Err(ModelError::MissingFeature(key.into())),
        Some(crate::dataset::Feature::Float(a)) => Ok(a),
        Some(other) => Err(ModelError::BadFeature {
            key: key.into(),
            detail: format!("expected float array, got shape {:?} int", other.shape()),
        }),
    }
}

/// Token mask as `[B, L]` of 0/1 floats.
pub(crate) fn mask_matrix(batch: &KeyedBatch) -> Result<Array2<f64>> {
    let mask = int_feature(batch, "mask")?;
    mask.mapv(|v| v as f64)
        .into_dimensionality::<Ix2>()
        .map_err(|_| ModelError::BadFeature {
            key: "mask".into(),
            detail: "expected rank 2".into(),
        })
}
