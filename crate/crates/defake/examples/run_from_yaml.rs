//! Config-file driven training: write a YAML config, run it, and inspect
//! the echoed `resolved_config.yaml` (defaults merged with overrides plus
//! derived values like the vocabulary size).
//!
//! ```sh
//! cargo run --example run_from_yaml
//! ```

use serde_json::json;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;

    let rows: Vec<serde_json::Value> = (0..200)
        .map(|i| {
            let (text, label) = if i % 2 == 0 {
                (format!("post {i} with a hoax claim"), 1)
            } else {
                (format!("post {i} with a sober report"), 0)
            };
            json!({ "text": text, "label": label })
        })
        .collect();
    let data = dir.path().join("posts.json");
    std::fs::write(&data, serde_json::to_string(&rows)?)?;

    let out = dir.path().join("run");
    let config = dir.path().join("experiment.yaml");
    std::fs::write(
        &config,
        format!(
            "\
model: textcnn
data:
  train: {data}
  split:
    ratios: [0.7, 0.15, 0.15]
model_params:
  max_len: 8
  channels: 16
trainer:
  epochs: 3
  batch_size: 32
  output_dir: {out}
metrics: [accuracy, f1]
",
            data = data.display(),
            out = out.display(),
        ),
    )?;

    let outcome = defake::execution::run_from_yaml(&config)?;
    println!("held-out metrics: {}", outcome.metrics);

    println!("\n--- resolved_config.yaml ---");
    print!(
        "{}",
        std::fs::read_to_string(outcome.output_dir.join("resolved_config.yaml"))?
    );
    Ok(())
}
