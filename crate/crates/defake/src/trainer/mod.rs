//! Training orchestration for any [`AbstractModel`]: epoch loops,
//! validation, early stopping, gradient clipping, checkpointing, logging
//! and curve export.

mod checkpoint;
mod early_stop;
mod optim;
mod record;

#[cfg(test)]
mod tests;

pub use checkpoint::{load_checkpoint, read_checkpoint, restore_into, save_checkpoint, CheckpointData};
pub use early_stop::{Decision, EarlyStopper};
pub use optim::{clip_gradient_norm, Adam, Optimizer, OptimizerSpec, Sgd};
pub use record::{EpochRecord, EpochSinks, TrainingHistory};

use std::collections::BTreeMap;
use std::path::PathBuf;

use ndarray::Array2;
use thiserror::Error;

use crate::dataset::KeyedBatch;
use crate::metrics::{classification_metrics, MetricReport, MetricsError};
use crate::models::{AbstractModel, ModelError};

#[derive(Debug, Error)]
pub enum TrainerError {
    #[error("no training batches supplied")]
    EmptyTrainingData,
    #[error("no validation batches supplied")]
    EmptyValidationData,
    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },
    #[error("non-finite gradient")]
    NonFiniteGradient,
    #[error("invalid trainer configuration: {0}")]
    InvalidConfig(String),
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Tensor(#[from] crate::tensor::TensorError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

pub type Result<T> = std::result::Result<T, TrainerError>;

#[derive(Debug, Clone)]
pub struct EarlyStoppingConfig {
    pub patience: usize,
    /// Metric monitored in maximize mode.
    pub metric: String,
}

impl Default for EarlyStoppingConfig {
    fn default() -> Self {
        Self {
            patience: 5,
            metric: "accuracy".to_string(),
        }
    }
}

/// Per-epoch learning-rate schedule: (1-based epoch just finished, current
/// rate) -> rate for the next epoch.
pub type SchedulerHook = Box<dyn Fn(usize, f64) -> f64>;

pub struct TrainerConfig {
    pub epochs: usize,
    pub optimizer: OptimizerSpec,
    pub clip_max_norm: Option<f64>,
    pub scheduler: Option<SchedulerHook>,
    pub early_stopping: Option<EarlyStoppingConfig>,
    /// Placement tag; "cpu" is the only substrate here, other tags are
    /// accepted and ignored.
    pub device: String,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Suppress console echo (the log file is always written).
    pub quiet: bool,
}

impl TrainerConfig {
    pub fn new(epochs: usize, optimizer: OptimizerSpec, output_dir: impl Into<PathBuf>) -> Self {
        Self {
            epochs,
            optimizer,
            clip_max_norm: None,
            scheduler: None,
            early_stopping: None,
            device: "cpu".to_string(),
            seed: 0,
            output_dir: output_dir.into(),
            quiet: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(TrainerError::InvalidConfig("epochs must be >= 1".into()));
        }
        if let Some(es) = &self.early_stopping {
            if es.patience == 0 {
                return Err(TrainerError::InvalidConfig("patience must be >= 1".into()));
            }
        }
        if let Some(norm) = self.clip_max_norm {
            if norm <= 0.0 || !norm.is_finite() {
                return Err(TrainerError::InvalidConfig(format!(
                    "clip_max_norm must be positive, got {norm}"
                )));
            }
        }
        // Validates the optimizer name and learning rate.
        self.optimizer.build().map(|_| ())
    }
}

/// Computes validation/test metrics for a model over a batch set. The
/// default implementation concatenates predictions; alternative
/// implementations let tests script the monitored values.
pub trait Evaluator {
    fn evaluate(
        &mut self,
        model: &dyn AbstractModel,
        batches: &[KeyedBatch],
    ) -> Result<MetricReport>;
}

/// Standard evaluator: concatenate `predict` outputs over all batches and
/// compute the configured metrics once over the whole set.
pub struct MetricEvaluator {
    pub metric_names: Vec<String>,
}

impl MetricEvaluator {
    pub fn new(metric_names: &[&str]) -> Self {
        Self {
            metric_names: metric_names.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl Evaluator for MetricEvaluator {
    fn evaluate(
        &mut self,
        model: &dyn AbstractModel,
        batches: &[KeyedBatch],
    ) -> Result<MetricReport> {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        let mut cols = 0;
        for batch in batches {
            let probs = model.predict(batch)?;
            cols = probs.ncols();
            rows.extend(probs.iter().copied());
            labels.extend(
                batch
                    .labels()
                    .ok_or_else(|| ModelError::MissingFeature("label".into()))?,
            );
        }
        let probs = Array2::from_shape_vec((labels.len(), cols), rows)
            .expect("predict output is rectangular");
        Ok(classification_metrics(
            probs.view(),
            &labels,
            &self.metric_names,
        )?)
    }
}

pub struct Trainer {
    pub config: TrainerConfig,
    evaluator: Box<dyn Evaluator>,
}

impl Trainer {
    pub fn new(config: TrainerConfig, evaluator: Box<dyn Evaluator>) -> Result<Self> {
        config.validate()?;
        Ok(Self { config, evaluator })
    }

    /// Trainer with the standard concatenating metric evaluator.
    pub fn with_metrics(config: TrainerConfig, metric_names: &[&str]) -> Result<Self> {
        Ok(Self::new(config, Box::new(MetricEvaluator::new(metric_names)))?)
    }

    /// Run the full training loop: per epoch one pass over the training
    /// batches, then validation when batches are given, checkpointing every
    /// epoch, early stopping on the monitored metric, and a learning-rate
    /// scheduler step. When validation is present the best checkpoint is
    /// restored into the model before returning.
    pub fn fit(
        &mut self,
        model: &mut dyn AbstractModel,
        train_batches: &[KeyedBatch],
        validation_batches: Option<&[KeyedBatch]>,
    ) -> Result<TrainingHistory> {
        self.config.validate()?;
        if train_batches.is_empty() {
            return Err(TrainerError::EmptyTrainingData);
        }
        let mut optimizer = self.config.optimizer.build()?;
        let mut sinks = EpochSinks::create(&self.config.output_dir, self.config.quiet)?;
        let ckpt_dir = self.config.output_dir.join("checkpoints");
        std::fs::create_dir_all(&ckpt_dir)?;
        let best_path = ckpt_dir.join("best.ckpt");

        let monitoring = validation_batches.is_some();
        let es = self.config.early_stopping.clone();
        let monitor_metric = es
            .as_ref()
            .map(|e| e.metric.clone())
            .unwrap_or_else(|| "accuracy".to_string());
        let mut stopper = EarlyStopper::new(es.as_ref().map(|e| e.patience).unwrap_or(usize::MAX));

        let mut history = TrainingHistory {
            records: Vec::new(),
            stopped_early: false,
            best_epoch: 0,
            checkpoint_path: None,
        };
        let mut lr = self.config.optimizer.learning_rate;
        let mut last_ckpt = None;

        for epoch in 1..=self.config.epochs {
            let train_losses = self.train_epoch(model, train_batches, optimizer.as_mut(), lr, epoch)?;
            let val_metrics = match validation_batches {
                Some(batches) => self.validate_epoch(model, batches)?,
                None => MetricReport::default(),
            };
            let record = EpochRecord {
                epoch,
                train_losses,
                val_metrics,
                learning_rate: lr,
            };
            sinks.record_epoch(&record)?;

            let epoch_path = ckpt_dir.join(format!("epoch_{epoch}.ckpt"));
            save_checkpoint(model, &epoch_path, self.config.seed, epoch)?;
            last_ckpt = Some(epoch_path.clone());

            let mut stop = false;
            if monitoring {
                let value = record.val_metrics.get(&monitor_metric).ok_or_else(|| {
                    TrainerError::InvalidConfig(format!(
                        "monitored metric {monitor_metric:?} is not produced by the evaluator"
                    ))
                })?;
                let decision = stopper.step(value, epoch);
                if stopper.improved(epoch) {
                    std::fs::copy(&epoch_path, &best_path)?;
                }
                stop = es.is_some() && decision == Decision::Stop;
            }
            history.records.push(record);
            if stop {
                history.stopped_early = true;
                break;
            }
            if let Some(hook) = &self.config.scheduler {
                lr = hook(epoch, lr);
            }
        }

        if monitoring && best_path.exists() {
            restore_into(model, &best_path)?;
            history.best_epoch = stopper.best_epoch();
            history.checkpoint_path = Some(best_path);
        } else {
            history.checkpoint_path = last_ckpt;
        }
        Ok(history)
    }

    /// One pass over the training batches: back-propagate each batch's
    /// total loss, optionally clip, and apply the optimizer. Returns the
    /// per-loss means weighted by batch size.
    pub fn train_epoch(
        &self,
        model: &mut dyn AbstractModel,
        batches: &[KeyedBatch],
        optimizer: &mut dyn Optimizer,
        learning_rate: f64,
        epoch: usize,
    ) -> Result<BTreeMap<String, f64>> {
        if batches.is_empty() {
            return Err(TrainerError::EmptyTrainingData);
        }
        let mut sums: BTreeMap<String, f64> = BTreeMap::new();
        let mut total = 0usize;
        for (index, batch) in batches.iter().enumerate() {
            let (report, mut grads) = model.loss_and_grads(batch, true).map_err(|e| match e {
                ModelError::NonFiniteLoss => TrainerError::NonFiniteLoss {
                    epoch,
                    batch: index,
                },
                other => other.into(),
            })?;
            if let Some(max_norm) = self.config.clip_max_norm {
                clip_gradient_norm(&mut grads, max_norm)?;
            }
            optimizer.step(model.store_mut(), &grads, learning_rate);
            let size = batch.batch_size();
            total += size;
            for (name, value) in &report.losses {
                *sums.entry(name.clone()).or_insert(0.0) += value * size as f64;
            }
        }
        Ok(sums
            .into_iter()
            .map(|(name, sum)| (name, sum / total as f64))
            .collect())
    }

    /// Metrics over the whole validation set; read-only for the model.
    pub fn validate_epoch(
        &mut self,
        model: &dyn AbstractModel,
        batches: &[KeyedBatch],
    ) -> Result<MetricReport> {
        if batches.is_empty() {
            return Err(TrainerError::EmptyValidationData);
        }
        self.evaluator.evaluate(model, batches)
    }

    /// Final test-set evaluation; identical computation to validation.
    pub fn evaluate(
        &mut self,
        model: &dyn AbstractModel,
        batches: &[KeyedBatch],
    ) -> Result<MetricReport> {
        self.validate_epoch(model, batches)
    }
}
