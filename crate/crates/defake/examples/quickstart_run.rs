//! Smallest possible end-to-end run: generate a toy dataset, train the
//! TextCNN with `execution::run`, and print the held-out metrics.
//!
//! ```sh
//! cargo run --example quickstart_run
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;

    // 600 posts; label 1 whenever the word "breaking" appears.
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let words = ["rain", "game", "vote", "market", "storm", "quiet"];
    let rows: Vec<serde_json::Value> = (0..600)
        .map(|_| {
            let mut text: Vec<&str> = (0..6).map(|_| words[rng.gen_range(0..words.len())]).collect();
            let label = rng.gen_range(0..2);
            if label == 1 {
                let pos = rng.gen_range(0..text.len());
                text[pos] = "breaking";
            }
            json!({ "text": text.join(" "), "label": label })
        })
        .collect();
    let data = dir.path().join("posts.json");
    std::fs::write(&data, serde_json::to_string(&rows)?)?;

    // Everything not set here comes from the model's defaults; the
    // vocabulary size is derived from the training split automatically.
    let overrides = serde_yaml::from_str(&format!(
        "
data:
  train: {data}
model_params: {{max_len: 8}}
trainer:
  epochs: 5
  output_dir: {out}
",
        data = data.display(),
        out = dir.path().join("run").display(),
    ))?;
    let outcome = defake::execution::run("textcnn", overrides)?;

    println!("trained {} epochs", outcome.history.records.len());
    println!("held-out metrics: {}", outcome.metrics);
    println!("artifacts in {}", outcome.output_dir.display());
    Ok(())
}
