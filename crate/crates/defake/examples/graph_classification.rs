//! Propagation-graph classification with the graph model: each JSON record
//! is one graph (per-node features, an edge list and a root index), and the
//! execution layer pads them into rectangular batches automatically.
//!
//! ```sh
//! cargo run --example graph_classification
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);

    // Star-shaped cascades of random size; the class shifts the node
    // feature distribution.
    let rows: Vec<serde_json::Value> = (0..300)
        .map(|_| {
            let label = rng.gen_range(0..2);
            let shift = if label == 1 { 0.8 } else { -0.8 };
            let nodes = rng.gen_range(2..7usize);
            let features: Vec<Vec<f64>> = (0..nodes)
                .map(|_| (0..3).map(|_| rng.gen_range(-0.5..0.5) + shift).collect())
                .collect();
            let edges: Vec<[usize; 2]> = (1..nodes).map(|n| [0, n]).collect();
            json!({
                "node_features": features,
                "edges": edges,
                "root": 0,
                "label": label,
            })
        })
        .collect();
    let data = dir.path().join("cascades.json");
    std::fs::write(&data, serde_json::to_string(&rows)?)?;

    // feature_dim is derived from the data when not configured.
    let overrides = serde_yaml::from_str(&format!(
        "
data:
  train: {data}
model_params: {{hidden_dim: 8}}
trainer:
  epochs: 8
  batch_size: 32
  learning_rate: 0.01
  output_dir: {out}
",
        data = data.display(),
        out = dir.path().join("run").display(),
    ))?;
    let outcome = defake::execution::run("bigcn", overrides)?;

    println!("held-out metrics: {}", outcome.metrics);
    println!(
        "best epoch {} of {}",
        outcome.history.best_epoch,
        outcome.history.records.len()
    );
    Ok(())
}
