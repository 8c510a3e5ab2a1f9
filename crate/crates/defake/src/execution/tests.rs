use std::path::Path;

use serde_yaml::{Mapping, Value};
use tempfile::TempDir;

use super::schema::{merge, suggest};
use super::*;

fn yaml(text: &str) -> Mapping {
    serde_yaml::from_str(text).expect("test YAML parses")
}

fn lookup<'v>(root: &'v Value, path: &[&str]) -> &'v Value {
    let mut cur = root;
    for key in path {
        cur = cur
            .get(key)
            .unwrap_or_else(|| panic!("missing key {key:?} on path {path:?}"));
    }
    cur
}

/// Small two-class corpus where the word "alarm" marks label 1.
fn write_text_dataset(path: &Path, samples: usize) -> usize {
    let fillers = ["market", "rain", "city", "match", "quiet"];
    let mut rows = Vec::new();
    for i in 0..samples {
        let filler = fillers[i % fillers.len()];
        let (text, label) = if i % 2 == 0 {
            (format!("{filler} alarm report today"), 1)
        } else {
            (format!("{filler} calm report today"), 0)
        };
        rows.push(serde_json::json!({ "text": text, "label": label }));
    }
    std::fs::write(path, serde_json::to_string(&rows).unwrap()).unwrap();
    samples
}

fn write_graph_dataset(path: &Path, samples: usize) {
    let mut rows = Vec::new();
    for i in 0..samples {
        let label = (i % 2) as i64;
        // Three-node star; features encode the class.
        let value = if label == 1 { 1.0 } else { -1.0 };
        rows.push(serde_json::json!({
            "node_features": [[value, 0.5], [0.0, value], [value, value]],
            "edges": [[0, 1], [0, 2]],
            "root": 0,
            "label": label,
        }));
    }
    std::fs::write(path, serde_json::to_string(&rows).unwrap()).unwrap();
}

fn small_textcnn_overrides(train: &Path, out: &Path) -> Mapping {
    yaml(&format!(
        "
data:
  train: {train}
model_params: {{embed_dim: 8, channels: 4, filter_sizes: [2], max_len: 8, dropout: 0.0}}
trainer:
  epochs: 2
  batch_size: 8
  output_dir: {out}
",
        train = train.display(),
        out = out.display(),
    ))
}

// ------------------------------------------------------------ defaults

#[test]
fn mdfend_defaults_pin_published_values() {
    let d = Value::Mapping(default_params("mdfend").unwrap());
    assert_eq!(
        lookup(&d, &["trainer", "learning_rate"]).as_f64(),
        Some(0.00005)
    );
    assert_eq!(lookup(&d, &["trainer", "epochs"]).as_u64(), Some(50));
    assert_eq!(lookup(&d, &["trainer", "batch_size"]).as_u64(), Some(64));
    assert_eq!(lookup(&d, &["model_params", "max_len"]).as_u64(), Some(170));
    assert_eq!(
        lookup(&d, &["model_params", "num_domains"]).as_u64(),
        Some(9)
    );
    assert_eq!(
        lookup(&d, &["trainer", "early_stopping", "patience"]).as_u64(),
        Some(5)
    );
}

#[test]
fn every_registered_model_has_complete_defaults() {
    for name in crate::models::builtin_registry().names() {
        let d = Value::Mapping(default_params(&name).unwrap());
        for path in [
            vec!["trainer", "epochs"],
            vec!["trainer", "learning_rate"],
            vec!["trainer", "optimizer"],
            vec!["trainer", "batch_size"],
            vec!["trainer", "seed"],
            vec!["data", "split", "ratios"],
            vec!["metrics"],
        ] {
            assert!(
                !lookup(&d, &path).is_null(),
                "model {name}: missing default {path:?}"
            );
        }
        assert_eq!(d.get("model").and_then(Value::as_str), Some(name.as_str()));
    }
}

#[test]
fn defaults_are_independent_copies() {
    let mut first = default_params("textcnn").unwrap();
    first.insert(Value::from("mutated"), Value::from(true));
    let second = default_params("textcnn").unwrap();
    assert!(second.get("mutated").is_none());
}

#[test]
fn defaults_for_unknown_model_fail() {
    let err = default_params("resnet").unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("registered models"));
}

// ------------------------------------------------------------ schema

#[test]
fn unknown_key_gets_a_suggestion() {
    let config = yaml("{model: textcnn, trainer: {learing_rate: 0.1}}");
    match validate_keys(&config).unwrap_err() {
        ExecError::UnknownKey { key, suggestion } => {
            assert_eq!(key, "trainer.learing_rate");
            assert_eq!(suggestion.as_deref(), Some("learning_rate"));
        }
        other => panic!("expected UnknownKey, got {other:?}"),
    }
}

#[test]
fn suggestion_is_omitted_when_nothing_is_close() {
    assert_eq!(suggest("zzzzzzzzzzzz", &["epochs", "seed"]), None);
    assert_eq!(suggest("epochz", &["epochs", "seed"]).as_deref(), Some("epochs"));
}

#[test]
fn merge_is_recursive_and_overrides_win() {
    let base = yaml("{a: 1, nested: {x: 1, y: 2}, list: [1, 2]}");
    let over = yaml("{nested: {y: 9, z: 3}, list: [5]}");
    let merged = merge(Value::Mapping(base), Value::Mapping(over));
    assert_eq!(lookup(&merged, &["a"]).as_u64(), Some(1));
    assert_eq!(lookup(&merged, &["nested", "x"]).as_u64(), Some(1));
    assert_eq!(lookup(&merged, &["nested", "y"]).as_u64(), Some(9));
    assert_eq!(lookup(&merged, &["nested", "z"]).as_u64(), Some(3));
    // Sequences replace wholesale rather than merging element-wise.
    assert_eq!(lookup(&merged, &["list"]).as_sequence().unwrap().len(), 1);
}

// ------------------------------------------------------------ end to end

#[test]
fn run_trains_splits_and_echoes_resolved_config() {
    let dir = TempDir::new().unwrap();
    let train = dir.path().join("data.json");
    write_text_dataset(&train, 40);
    let out = dir.path().join("out");

    let outcome = run("textcnn", small_textcnn_overrides(&train, &out)).unwrap();
    assert_eq!(outcome.history.records.len(), 2);
    assert_eq!(outcome.output_dir, out);
    // The 0.8/0.1/0.1 split leaves a test set, so metrics are produced.
    assert!(outcome.metrics.get("accuracy").is_some());
    assert!(out.join("train.log").exists());
    assert!(out.join("curves.csv").exists());
    assert!(out.join("checkpoints/best.ckpt").exists());

    let echoed: Value =
        serde_yaml::from_str(&std::fs::read_to_string(out.join("resolved_config.yaml")).unwrap())
            .unwrap();
    // Derived vocabulary size is echoed back; override and default survive.
    let vocab_size = lookup(&echoed, &["model_params", "vocab_size"]).as_u64().unwrap();
    assert!(vocab_size > 2, "vocab_size {vocab_size} should count real tokens");
    assert_eq!(lookup(&echoed, &["model_params", "embed_dim"]).as_u64(), Some(8));
    assert_eq!(lookup(&echoed, &["trainer", "epochs"]).as_u64(), Some(2));
    assert_eq!(
        lookup(&echoed, &["trainer", "optimizer"]).as_str(),
        Some("adam")
    );
    assert_eq!(
        lookup(&echoed, &["trainer", "output_dir"]).as_str(),
        Some(out.display().to_string().as_str())
    );
}

#[test]
fn run_and_run_from_yaml_are_equivalent() {
    let dir = TempDir::new().unwrap();
    let train = dir.path().join("data.json");
    write_text_dataset(&train, 40);

    let out_a = dir.path().join("a");
    let a = run("textcnn", small_textcnn_overrides(&train, &out_a)).unwrap();

    let out_b = dir.path().join("b");
    let mut config = small_textcnn_overrides(&train, &out_b);
    config.insert(Value::from("model"), Value::from("textcnn"));
    let config_path = dir.path().join("config.yaml");
    std::fs::write(
        &config_path,
        serde_yaml::to_string(&Value::Mapping(config)).unwrap(),
    )
    .unwrap();
    let b = run_from_yaml(&config_path).unwrap();

    assert_eq!(a.history.records.len(), b.history.records.len());
    for (ra, rb) in a.history.records.iter().zip(&b.history.records) {
        assert_eq!(ra.train_losses, rb.train_losses, "epoch {}", ra.epoch);
        assert_eq!(ra.val_metrics, rb.val_metrics, "epoch {}", ra.epoch);
    }
    assert_eq!(a.metrics, b.metrics);
}

#[test]
fn explicit_validation_disables_split_and_missing_test_gives_empty_metrics() {
    let dir = TempDir::new().unwrap();
    let train = dir.path().join("train.json");
    let val = dir.path().join("val.json");
    write_text_dataset(&train, 24);
    write_text_dataset(&val, 8);
    let out = dir.path().join("out");

    let mut overrides = small_textcnn_overrides(&train, &out);
    let Some(Value::Mapping(data)) = overrides.get_mut("data") else {
        unreachable!()
    };
    data.insert(Value::from("validation"), Value::from(val.display().to_string()));

    let outcome = run("textcnn", overrides).unwrap();
    assert!(outcome.metrics.values.is_empty(), "no test data, no metrics");
    assert!(!outcome.history.records.is_empty());
}

#[test]
fn bigcn_runs_from_graph_records_and_derives_feature_dim() {
    let dir = TempDir::new().unwrap();
    let train = dir.path().join("graphs.json");
    write_graph_dataset(&train, 30);
    let out = dir.path().join("out");

    let overrides = yaml(&format!(
        "
data:
  train: {train}
model_params: {{hidden_dim: 4}}
trainer:
  epochs: 2
  batch_size: 8
  output_dir: {out}
",
        train = train.display(),
        out = out.display(),
    ));
    let outcome = run("bigcn", overrides).unwrap();
    assert!(outcome.metrics.get("accuracy").is_some());

    let echoed: Value =
        serde_yaml::from_str(&std::fs::read_to_string(out.join("resolved_config.yaml")).unwrap())
            .unwrap();
    assert_eq!(
        lookup(&echoed, &["model_params", "feature_dim"]).as_u64(),
        Some(2),
        "feature_dim should be derived from the data"
    );
}

// ------------------------------------------------------------ failure modes

#[test]
fn conflicting_model_names_are_rejected() {
    let overrides = yaml("{model: eann}");
    let err = run("textcnn", overrides).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("conflicting"));
}

#[test]
fn unknown_key_in_run_maps_to_config_exit_code() {
    let err = run("textcnn", yaml("{trane: {}}")).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn missing_data_file_maps_to_data_exit_code() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let overrides = small_textcnn_overrides(&dir.path().join("nope.json"), &out);
    let err = run("textcnn", overrides).unwrap_err();
    assert_eq!(err.exit_code(), 3);
}

#[test]
fn non_empty_output_dir_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let train = dir.path().join("data.json");
    write_text_dataset(&train, 24);
    let out = dir.path().join("out");
    std::fs::create_dir_all(&out).unwrap();
    std::fs::write(out.join("leftover.txt"), "x").unwrap();

    let err = run("textcnn", small_textcnn_overrides(&train, &out)).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("already contains"));
}

#[test]
fn yaml_parse_errors_name_the_file() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("broken.yaml");
    std::fs::write(&path, "model: [unclosed").unwrap();
    let err = run_from_yaml(&path).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("broken.yaml"));
}
