//! Config schema: known keys per level, unknown-key detection with a
//! nearest-key suggestion, and the defaults/overrides merge.

use serde_yaml::{Mapping, Value};

use super::{ExecError, Result};

pub const TOP_KEYS: &[&str] = &["model", "data", "model_params", "trainer", "metrics"];
pub const DATA_KEYS: &[&str] = &["train", "validation", "test", "split"];
pub const SPLIT_KEYS: &[&str] = &["ratios", "seed"];
pub const TRAINER_KEYS: &[&str] = &[
    "epochs",
    "learning_rate",
    "optimizer",
    "batch_size",
    "clip_max_norm",
    "early_stopping",
    "device",
    "seed",
    "output_dir",
];
pub const EARLY_STOPPING_KEYS: &[&str] = &["patience", "metric"];

fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for i in 1..=a.len() {
        cur[0] = i;
        for j in 1..=b.len() {
            let cost = usize::from(a[i - 1] != b[j - 1]);
            cur[j] = (prev[j] + 1).min(cur[j - 1] + 1).min(prev[j - 1] + cost);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Closest known key, when it is close enough to be a plausible typo.
pub fn suggest(key: &str, known: &[&str]) -> Option<String> {
    known
        .iter()
        .map(|k| (levenshtein(key, k), *k))
        .min()
        .filter(|&(d, k)| d <= (k.len() / 2).max(2))
        .map(|(_, k)| k.to_string())
}

fn check_keys(map: &Mapping, known: &[&str], path: &str) -> Result<()> {
    for key in map.keys() {
        let Some(name) = key.as_str() else {
            return Err(ExecError::Config(format!(
                "non-string key {key:?} under {path:?}"
            )));
        };
        if !known.contains(&name) {
            let full = if path.is_empty() {
                name.to_string()
            } else {
                format!("{path}.{name}")
            };
            return Err(ExecError::UnknownKey {
                key: full,
                suggestion: suggest(name, known),
            });
        }
    }
    Ok(())
}

fn as_mapping<'v>(value: &'v Value, path: &str) -> Result<Option<&'v Mapping>> {
    match value {
        Value::Mapping(m) => Ok(Some(m)),
        Value::Null => Ok(None),
        other => Err(ExecError::Config(format!(
            "{path:?} must be a mapping, got {other:?}"
        ))),
    }
}

/// Reject unknown keys at every schema level. `model_params` keys are not
/// checked here; the model factory rejects unknown parameters itself.
pub fn validate_keys(config: &Mapping) -> Result<()> {
    check_keys(config, TOP_KEYS, "")?;
    if let Some(data) = config.get("data") {
        if let Some(data) = as_mapping(data, "data")? {
            check_keys(data, DATA_KEYS, "data")?;
            if let Some(split) = data.get("split") {
                if let Some(split) = as_mapping(split, "data.split")? {
                    check_keys(split, SPLIT_KEYS, "data.split")?;
                }
            }
        }
    }
    if let Some(trainer) = config.get("trainer") {
        if let Some(trainer) = as_mapping(trainer, "trainer")? {
            check_keys(trainer, TRAINER_KEYS, "trainer")?;
            if let Some(es) = trainer.get("early_stopping") {
                if let Some(es) = as_mapping(es, "trainer.early_stopping")? {
                    check_keys(es, EARLY_STOPPING_KEYS, "trainer.early_stopping")?;
                }
            }
        }
    }
    Ok(())
}

/// Deep merge: overrides win, mappings merge recursively, everything else
/// replaces.
pub fn merge(defaults: Value, overrides: Value) -> Value {
    match (defaults, overrides) {
        (Value::Mapping(mut base), Value::Mapping(over)) => {
            for (key, value) in over {
                let merged = match base.remove(&key) {
                    Some(existing) => merge(existing, value),
                    None => value,
                };
                base.insert(key, merged);
            }
            Value::Mapping(base)
        }
        (_, over) => over,
    }
}
