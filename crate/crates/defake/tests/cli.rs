//! End-to-end checks of the `defake` binary: exit codes and output files.

use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn defake(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_defake"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_dataset(path: &Path) {
    let rows: Vec<serde_json::Value> = (0..40)
        .map(|i| {
            let (text, label) = if i % 2 == 0 {
                (format!("sample {i} alarm report"), 1)
            } else {
                (format!("sample {i} calm report"), 0)
            };
            serde_json::json!({ "text": text, "label": label })
        })
        .collect();
    std::fs::write(path, serde_json::to_string(&rows).unwrap()).unwrap();
}

fn write_config(dir: &Path, out: &Path) -> std::path::PathBuf {
    let train = dir.join("data.json");
    write_dataset(&train);
    let config = dir.join("config.yaml");
    std::fs::write(
        &config,
        format!(
            "\
model: textcnn
data:
  train: {train}
model_params: {{embed_dim: 8, channels: 4, filter_sizes: [2], max_len: 8}}
trainer:
  epochs: 2
  batch_size: 8
  output_dir: {out}
",
            train = train.display(),
            out = out.display(),
        ),
    )
    .unwrap();
    config
}

#[test]
fn defaults_prints_model_yaml_and_exits_zero() {
    let output = defake(&["defaults", "mdfend"]);
    assert!(output.status.success());
    let stdout = String::from_utf8(output.stdout).unwrap();
    let parsed: serde_yaml::Value = serde_yaml::from_str(&stdout).unwrap();
    assert_eq!(
        parsed["trainer"]["learning_rate"].as_f64(),
        Some(0.00005)
    );
    assert_eq!(parsed["trainer"]["epochs"].as_u64(), Some(50));
    assert_eq!(parsed["model_params"]["max_len"].as_u64(), Some(170));
}

#[test]
fn defaults_for_unknown_model_exits_two() {
    let output = defake(&["defaults", "resnet"]);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("unknown model"));
}

#[test]
fn run_trains_and_exits_zero() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let config = write_config(dir.path(), &out);

    let output = defake(&["run", "--config", config.to_str().unwrap()]);
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    assert!(out.join("resolved_config.yaml").exists());
    assert!(out.join("curves.csv").exists());
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("accuracy="), "stdout: {stdout}");
}

#[test]
fn set_overrides_apply_by_dotted_path() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let config = write_config(dir.path(), &out);

    let output = defake(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--set",
        "trainer.epochs=1",
        "--set",
        "trainer.seed=7",
    ]);
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    let echoed: serde_yaml::Value = serde_yaml::from_str(
        &std::fs::read_to_string(out.join("resolved_config.yaml")).unwrap(),
    )
    .unwrap();
    assert_eq!(echoed["trainer"]["epochs"].as_u64(), Some(1));
    assert_eq!(echoed["trainer"]["seed"].as_u64(), Some(7));
}

#[test]
fn unknown_config_key_exits_two() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let config = write_config(dir.path(), &out);

    let output = defake(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--set",
        "trainer.learing_rate=0.1",
    ]);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("learning_rate"));
}

#[test]
fn missing_data_file_exits_three() {
    let dir = TempDir::new().unwrap();
    let config = dir.path().join("config.yaml");
    std::fs::write(
        &config,
        format!(
            "\
model: textcnn
data:
  train: {}
trainer:
  epochs: 1
  output_dir: {}
",
            dir.path().join("missing.json").display(),
            dir.path().join("out").display(),
        ),
    )
    .unwrap();
    let output = defake(&["run", "--config", config.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(3));
}
