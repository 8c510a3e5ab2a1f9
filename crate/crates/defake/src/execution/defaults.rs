//! Per-model default hyperparameters. Every registered model has a
//! complete fragment, so a run can never fail for a missing default.

use serde_yaml::Mapping;

use crate::models::builtin_registry;

use super::{ExecError, Result};

struct ModelDefaults {
    epochs: usize,
    learning_rate: f64,
    patience: usize,
    model_params: &'static str,
}

fn defaults_of(model: &str) -> ModelDefaults {
    match model {
        // Published configuration for the multi-domain model.
        "mdfend" => ModelDefaults {
            epochs: 50,
            learning_rate: 0.00005,
            patience: 5,
            model_params: "{max_len: 170, num_domains: 9}",
        },
        "textcnn" => ModelDefaults {
            epochs: 20,
            learning_rate: 0.001,
            patience: 5,
            model_params: "{max_len: 32}",
        },
        "eann" => ModelDefaults {
            epochs: 20,
            learning_rate: 0.001,
            patience: 5,
            model_params: "{max_len: 32}",
        },
        "bigcn" => ModelDefaults {
            epochs: 20,
            learning_rate: 0.001,
            patience: 5,
            model_params: "{hidden_dim: 32}",
        },
        _ => ModelDefaults {
            epochs: 20,
            learning_rate: 0.001,
            patience: 5,
            model_params: "{max_len: 64}",
        },
    }
}

/// Complete default config fragment for a registered model. Each call
/// returns an independent copy.
pub fn default_params(model_name: &str) -> Result<Mapping> {
    let registry = builtin_registry();
    if !registry.contains(model_name) {
        return Err(ExecError::Config(format!(
            "unknown model {model_name:?}; registered models: {:?}",
            registry.names()
        )));
    }
    let model = model_name.to_lowercase();
    let d = defaults_of(&model);
    let yaml = format!(
        "\
model: {model}
data:
  split:
    ratios: [0.8, 0.1, 0.1]
    seed: 7
model_params: {params}
trainer:
  epochs: {epochs}
  learning_rate: {lr}
  optimizer: adam
  batch_size: 64
  early_stopping:
    patience: {patience}
    metric: accuracy
  device: cpu
  seed: 42
metrics: [accuracy, precision, recall, f1]
",
        params = d.model_params,
        epochs = d.epochs,
        lr = d.learning_rate,
        patience = d.patience,
    );
    Ok(serde_yaml::from_str(&yaml).expect("builtin defaults are valid YAML"))
}
