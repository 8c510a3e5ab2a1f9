//! One-call entry points: `run` / `run_from_yaml` over a per-model defaults
//! registry, plus the config schema they share.

mod defaults;
mod graph;
mod schema;

#[cfg(test)]
mod tests;

pub use defaults::default_params;
pub use graph::{graph_batches, parse_graph_records, GraphRecord};
pub use schema::{merge, validate_keys};

use std::path::{Path, PathBuf};

use serde_yaml::{Mapping, Value};
use thiserror::Error;

use crate::dataset::{
    load_json_dataset, make_batches, reference_tokenize, split_data, DatasetError, FieldValue,
    KeyedBatch, SampleRecord, TextDataset, Vocabulary,
};
use crate::metrics::MetricReport;
use crate::models::{builtin_registry, ModelError};
use crate::trainer::{
    EarlyStoppingConfig, MetricEvaluator, OptimizerSpec, Trainer, TrainerConfig, TrainerError,
    TrainingHistory,
};

/// Environment variable consulted for the output root when the config does
/// not set `trainer.output_dir`.
pub const OUTPUT_ROOT_ENV: &str = "DEFAKE_OUTPUT_ROOT";

#[derive(Debug, Error)]
pub enum ExecError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("unknown config key {key:?}{}", match .suggestion { Some(s) => format!("; did you mean {s:?}?"), None => String::new() })]
    UnknownKey {
        key: String,
        suggestion: Option<String>,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Data(#[from] DatasetError),
    #[error("data error: {0}")]
    BadData(String),
    #[error(transparent)]
    Trainer(#[from] TrainerError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl ExecError {
    /// CLI exit code: 2 config, 3 data, 4 training.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExecError::Config(_) | ExecError::UnknownKey { .. } | ExecError::Model(_) => 2,
            ExecError::Data(_) | ExecError::BadData(_) => 3,
            ExecError::Trainer(_) | ExecError::Io(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, ExecError>;

/// Everything a finished run hands back.
#[derive(Debug)]
pub struct RunOutcome {
    /// Test-set metrics; empty when no test data was available.
    pub metrics: MetricReport,
    pub history: TrainingHistory,
    pub output_dir: PathBuf,
}

// ------------------------------------------------------------ config access

fn config_err(msg: impl Into<String>) -> ExecError {
    ExecError::Config(msg.into())
}

fn sub<'m>(map: &'m Mapping, key: &str) -> Result<Option<&'m Mapping>> {
    match map.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::Mapping(m)) => Ok(Some(m)),
        Some(other) => Err(config_err(format!("{key:?} must be a mapping, got {other:?}"))),
    }
}

fn str_of(map: &Mapping, key: &str, path: &str) -> Result<Option<String>> {
    match map.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => Ok(Some(s.clone())),
        Some(other) => Err(config_err(format!(
            "{path}.{key} must be a string, got {other:?}"
        ))),
    }
}

fn u64_of(map: &Mapping, key: &str, path: &str) -> Result<Option<u64>> {
    match map.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::Number(n)) if n.as_u64().is_some() => Ok(n.as_u64()),
        Some(other) => Err(config_err(format!(
            "{path}.{key} must be a non-negative integer, got {other:?}"
        ))),
    }
}

fn f64_of(map: &Mapping, key: &str, path: &str) -> Result<Option<f64>> {
    match map.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::Number(n)) => Ok(n.as_f64()),
        Some(other) => Err(config_err(format!(
            "{path}.{key} must be a number, got {other:?}"
        ))),
    }
}

fn yaml_to_json(value: &Value) -> Result<serde_json::Value> {
    serde_json::to_value(value).map_err(|e| config_err(format!("unrepresentable value: {e}")))
}

fn json_to_yaml(value: &serde_json::Value) -> Value {
    serde_yaml::to_value(value).expect("JSON is always representable as YAML")
}

/// Typed view of the merged config.
struct RunConfig {
    model: String,
    train: Option<PathBuf>,
    validation: Option<PathBuf>,
    test: Option<PathBuf>,
    split_ratios: (f64, f64, f64),
    split_seed: u64,
    model_params: serde_json::Map<String, serde_json::Value>,
    epochs: usize,
    learning_rate: f64,
    optimizer: String,
    batch_size: usize,
    clip_max_norm: Option<f64>,
    early_stopping: Option<EarlyStoppingConfig>,
    device: String,
    seed: u64,
    output_dir: Option<PathBuf>,
    metrics: Vec<String>,
}

impl RunConfig {
    fn from_mapping(merged: &Mapping) -> Result<Self> {
        let model = str_of(merged, "model", "")?
            .ok_or_else(|| config_err("\"model\" is required"))?
            .to_lowercase();

        let data = sub(merged, "data")?;
        let (train, validation, test) = match data {
            Some(d) => (
                str_of(d, "train", "data")?.map(PathBuf::from),
                str_of(d, "validation", "data")?.map(PathBuf::from),
                str_of(d, "test", "data")?.map(PathBuf::from),
            ),
            None => (None, None, None),
        };
        let split = data.map(|d| sub(d, "split")).transpose()?.flatten();
        let (split_ratios, split_seed) = match split {
            Some(s) => {
                let ratios = match s.get("ratios") {
                    None | Some(Value::Null) => (0.8, 0.1, 0.1),
                    Some(Value::Sequence(seq)) if seq.len() == 3 => {
                        let mut r = [0.0; 3];
                        for (i, v) in seq.iter().enumerate() {
                            r[i] = v.as_f64().ok_or_else(|| {
                                config_err("data.split.ratios entries must be numbers")
                            })?;
                        }
                        (r[0], r[1], r[2])
                    }
                    Some(other) => {
                        return Err(config_err(format!(
                            "data.split.ratios must be a list of three numbers, got {other:?}"
                        )))
                    }
                };
                (ratios, u64_of(s, "seed", "data.split")?.unwrap_or(7))
            }
            None => ((0.8, 0.1, 0.1), 7),
        };

        let mut model_params = serde_json::Map::new();
        if let Some(mp) = sub(merged, "model_params")? {
            for (key, value) in mp {
                let key = key
                    .as_str()
                    .ok_or_else(|| config_err(format!("non-string model_params key {key:?}")))?;
                model_params.insert(key.to_string(), yaml_to_json(value)?);
            }
        }

        let trainer = sub(merged, "trainer")?.ok_or_else(|| config_err("\"trainer\" is required"))?;
        let epochs = u64_of(trainer, "epochs", "trainer")?
            .ok_or_else(|| config_err("trainer.epochs is required"))? as usize;
        let learning_rate = f64_of(trainer, "learning_rate", "trainer")?
            .ok_or_else(|| config_err("trainer.learning_rate is required"))?;
        let optimizer =
            str_of(trainer, "optimizer", "trainer")?.unwrap_or_else(|| "adam".to_string());
        let batch_size = u64_of(trainer, "batch_size", "trainer")?.unwrap_or(64) as usize;
        let clip_max_norm = f64_of(trainer, "clip_max_norm", "trainer")?;
        let early_stopping = match sub(trainer, "early_stopping")? {
            Some(es) => Some(EarlyStoppingConfig {
                patience: u64_of(es, "patience", "trainer.early_stopping")?.unwrap_or(5) as usize,
                metric: str_of(es, "metric", "trainer.early_stopping")?
                    .unwrap_or_else(|| "accuracy".to_string()),
            }),
            None => None,
        };
        let device = str_of(trainer, "device", "trainer")?.unwrap_or_else(|| "cpu".to_string());
        let seed = u64_of(trainer, "seed", "trainer")?.unwrap_or(42);
        let output_dir = str_of(trainer, "output_dir", "trainer")?.map(PathBuf::from);

        let metrics = match merged.get("metrics") {
            None | Some(Value::Null) => vec!["accuracy".to_string()],
            Some(Value::Sequence(seq)) => seq
                .iter()
                .map(|v| {
                    v.as_str()
                        .map(str::to_string)
                        .ok_or_else(|| config_err("metrics entries must be strings"))
                })
                .collect::<Result<_>>()?,
            Some(other) => {
                return Err(config_err(format!(
                    "metrics must be a list of names, got {other:?}"
                )))
            }
        };

        Ok(Self {
            model,
            train,
            validation,
            test,
            split_ratios,
            split_seed,
            model_params,
            epochs,
            learning_rate,
            optimizer,
            batch_size,
            clip_max_norm,
            early_stopping,
            device,
            seed,
            output_dir,
            metrics,
        })
    }
}

// ------------------------------------------------------------ entry points

/// Train (and test, when test data exists) a registered model with the
/// given overrides on top of its defaults.
pub fn run(model_name: &str, overrides: Mapping) -> Result<RunOutcome> {
    let mut overrides = overrides;
    match overrides.get("model").and_then(Value::as_str) {
        Some(existing) if !existing.eq_ignore_ascii_case(model_name) => {
            return Err(config_err(format!(
                "conflicting model names: run({model_name:?}) vs config model {existing:?}"
            )));
        }
        Some(_) => {}
        None => {
            overrides.insert(
                Value::String("model".to_string()),
                Value::String(model_name.to_string()),
            );
        }
    }
    run_with_overrides(overrides)
}

/// Same as [`run`], with the overrides read from a YAML file.
pub fn run_from_yaml(path: impl AsRef<Path>) -> Result<RunOutcome> {
    let path = path.as_ref();
    let raw = std::fs::read_to_string(path)?;
    let value: Value = serde_yaml::from_str(&raw)
        .map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    match value {
        Value::Mapping(overrides) => run_with_overrides(overrides),
        other => Err(config_err(format!(
            "{}: expected a mapping at the top level, got {other:?}",
            path.display()
        ))),
    }
}

/// The single shared execution path behind both entry points.
pub fn run_with_overrides(overrides: Mapping) -> Result<RunOutcome> {
    schema::validate_keys(&overrides)?;
    let model_name = overrides
        .get("model")
        .and_then(Value::as_str)
        .ok_or_else(|| config_err("\"model\" is required"))?
        .to_string();
    let defaults = default_params(&model_name)?;
    let merged = match schema::merge(Value::Mapping(defaults), Value::Mapping(overrides)) {
        Value::Mapping(m) => m,
        _ => unreachable!("merging two mappings yields a mapping"),
    };
    run_merged(merged)
}

/// Deliberately linear end-to-end flow: load data, split if needed, build
/// batches, resolve the model, train, test. Doubles as reference code for
/// assembling the pieces manually.
fn run_merged(mut merged: Mapping) -> Result<RunOutcome> {
    let cfg = RunConfig::from_mapping(&merged)?;
    let registry = builtin_registry();
    let train_path = cfg
        .train
        .as_ref()
        .ok_or_else(|| config_err("data.train is required"))?;

    let mut model_params = cfg.model_params.clone();
    let (train_batches, val_batches, test_batches) = if cfg.model == "bigcn" {
        prepare_graph_batches(&cfg, train_path, &mut model_params)?
    } else {
        prepare_text_batches(&cfg, train_path, &mut model_params)?
    };

    let mut model = registry.resolve(&cfg.model, &model_params, cfg.seed)?;

    let output_dir = resolve_output_dir(&cfg)?;
    std::fs::create_dir_all(&output_dir)?;

    // Echo the effective configuration, including derived values.
    let mut params_yaml = Mapping::new();
    for (key, value) in &model_params {
        params_yaml.insert(Value::String(key.clone()), json_to_yaml(value));
    }
    merged.insert(
        Value::String("model_params".to_string()),
        Value::Mapping(params_yaml),
    );
    if let Some(Value::Mapping(trainer)) = merged.get_mut("trainer") {
        trainer.insert(
            Value::String("output_dir".to_string()),
            Value::String(output_dir.display().to_string()),
        );
    }
    std::fs::write(
        output_dir.join("resolved_config.yaml"),
        serde_yaml::to_string(&Value::Mapping(merged)).expect("config serializes"),
    )?;

    let mut trainer_config = TrainerConfig::new(
        cfg.epochs,
        OptimizerSpec::new(&cfg.optimizer, cfg.learning_rate),
        &output_dir,
    );
    trainer_config.clip_max_norm = cfg.clip_max_norm;
    trainer_config.early_stopping = cfg.early_stopping.clone();
    trainer_config.device = cfg.device.clone();
    trainer_config.seed = cfg.seed;
    let metric_names: Vec<&str> = cfg.metrics.iter().map(String::as_str).collect();
    let mut trainer = Trainer::new(trainer_config, Box::new(MetricEvaluator::new(&metric_names)))?;

    let history = trainer.fit(model.as_mut(), &train_batches, val_batches.as_deref())?;
    let metrics = match &test_batches {
        Some(batches) => trainer.evaluate(model.as_ref(), batches)?,
        None => MetricReport::default(),
    };
    Ok(RunOutcome {
        metrics,
        history,
        output_dir,
    })
}

// ------------------------------------------------------------ data assembly

type BatchSets = (Vec<KeyedBatch>, Option<Vec<KeyedBatch>>, Option<Vec<KeyedBatch>>);

fn load_or_split(
    cfg: &RunConfig,
    train_path: &Path,
    required: &[&str],
) -> Result<(Vec<SampleRecord>, Option<Vec<SampleRecord>>, Option<Vec<SampleRecord>>)> {
    let train = load_json_dataset(train_path, required)?;
    let validation = cfg
        .validation
        .as_ref()
        .map(|p| load_json_dataset(p, required))
        .transpose()?;
    let test = cfg
        .test
        .as_ref()
        .map(|p| load_json_dataset(p, required))
        .transpose()?;
    if validation.is_none() && test.is_none() {
        // Only one data path given: carve validation and test out of it.
        let (train, val, test) = split_data(train, cfg.split_ratios, cfg.split_seed)?;
        Ok((
            train,
            (!val.is_empty()).then_some(val),
            (!test.is_empty()).then_some(test),
        ))
    } else {
        Ok((train, validation, test))
    }
}

fn prepare_text_batches(
    cfg: &RunConfig,
    train_path: &Path,
    model_params: &mut serde_json::Map<String, serde_json::Value>,
) -> Result<BatchSets> {
    let (train, validation, test) = load_or_split(cfg, train_path, &["text", "label"])?;

    let vocab = Vocabulary::build(train.iter().filter_map(|r| match r.fields.get("text") {
        Some(FieldValue::Str(text)) => Some(text.as_str()),
        _ => None,
    }));
    if vocab.is_empty() {
        return Err(ExecError::BadData(
            "training corpus contains no tokens".into(),
        ));
    }
    let max_len = match model_params.get("max_len").and_then(|v| v.as_u64()) {
        Some(0) | None => 64,
        Some(n) => n as usize,
    };
    // vocab_size 0 (or absent) means "derive from the training corpus".
    let explicit = model_params.get("vocab_size").and_then(|v| v.as_u64());
    if explicit.unwrap_or(0) == 0 {
        model_params.insert("vocab_size".into(), serde_json::json!(vocab.len()));
    }

    let dataset_of = |records: &[SampleRecord]| -> Result<TextDataset> {
        let vocab = vocab.clone();
        Ok(TextDataset::new(
            records,
            Some((
                "text",
                Box::new(move |text: &str| {
                    reference_tokenize(text, &vocab, max_len).expect("vocab and max_len validated")
                }),
            )),
        )?)
    };
    let train_ds = dataset_of(&train)?;
    let train_batches = make_batches(&train_ds, cfg.batch_size, true, cfg.seed)?;
    let val_batches = validation
        .as_deref()
        .map(|r| Ok::<_, ExecError>(make_batches(&dataset_of(r)?, cfg.batch_size, false, cfg.seed)?))
        .transpose()?;
    let test_batches = test
        .as_deref()
        .map(|r| Ok::<_, ExecError>(make_batches(&dataset_of(r)?, cfg.batch_size, false, cfg.seed)?))
        .transpose()?;
    Ok((train_batches, val_batches, test_batches))
}

fn prepare_graph_batches(
    cfg: &RunConfig,
    train_path: &Path,
    model_params: &mut serde_json::Map<String, serde_json::Value>,
) -> Result<BatchSets> {
    let required = ["node_features", "edges", "root", "label"];
    let (train, validation, test) = load_or_split(cfg, train_path, &required)?;
    let train = parse_graph_records(&train)?;
    let validation = validation.as_deref().map(parse_graph_records).transpose()?;
    let test = test.as_deref().map(parse_graph_records).transpose()?;

    let feature_dim = match model_params.get("feature_dim").and_then(|v| v.as_u64()) {
        Some(n) if n > 0 => n as usize,
        // Derive from the data when unset.
        _ => train[0].features.ncols(),
    };
    model_params.insert("feature_dim".into(), serde_json::json!(feature_dim));

    let train_batches = graph_batches(&train, feature_dim, cfg.batch_size, true, cfg.seed)?;
    let val_batches = validation
        .as_deref()
        .map(|r| graph_batches(r, feature_dim, cfg.batch_size, false, cfg.seed))
        .transpose()?;
    let test_batches = test
        .as_deref()
        .map(|r| graph_batches(r, feature_dim, cfg.batch_size, false, cfg.seed))
        .transpose()?;
    Ok((train_batches, val_batches, test_batches))
}

fn resolve_output_dir(cfg: &RunConfig) -> Result<PathBuf> {
    let dir = match &cfg.output_dir {
        Some(dir) => dir.clone(),
        None => match std::env::var_os(OUTPUT_ROOT_ENV) {
            Some(root) => PathBuf::from(root).join(&cfg.model),
            None => PathBuf::from("runs").join(&cfg.model),
        },
    };
    if dir.exists() && std::fs::read_dir(&dir)?.next().is_some() {
        return Err(config_err(format!(
            "output directory {} already contains files; pick a fresh trainer.output_dir",
            dir.display()
        )));
    }
    Ok(dir)
}
