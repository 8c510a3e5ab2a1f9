//! The multi-domain model's expert gate: train on a corpus where each news
//! domain has its own telltale tokens, then inspect how the gate mixes the
//! experts per domain.
//!
//! ```sh
//! cargo run --example domain_gate
//! ```

use std::collections::BTreeMap;

use ndarray::{ArrayD, IxDyn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use defake::dataset::{Feature, KeyedBatch};
use defake::models::Mdfend;
use defake::trainer::{MetricEvaluator, OptimizerSpec, Trainer, TrainerConfig};

const DOMAINS: usize = 3;
const LEN: usize = 8;

/// Domain d marks label 1 with token 10+d and label 0 with token 20+d.
fn corpus(samples: usize, seed: u64) -> Vec<KeyedBatch> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut batches = Vec::new();
    let mut remaining = samples;
    while remaining > 0 {
        let b = remaining.min(64);
        remaining -= b;
        let mut ids = ArrayD::zeros(IxDyn(&[b, LEN]));
        let mut labels = Vec::new();
        let mut domains = Vec::new();
        for i in 0..b {
            let domain = rng.gen_range(0..DOMAINS as i64);
            let label = rng.gen_range(0..2i64);
            for t in 0..LEN {
                ids[[i, t]] = rng.gen_range(2..10);
            }
            let marker = if label == 1 { 10 + domain } else { 20 + domain };
            ids[[i, rng.gen_range(0..LEN)]] = marker;
            labels.push(label);
            domains.push(domain);
        }
        let mut m = BTreeMap::new();
        m.insert("token_ids".to_string(), Feature::Int(ids));
        m.insert(
            "mask".to_string(),
            Feature::Int(ArrayD::from_elem(IxDyn(&[b, LEN]), 1)),
        );
        m.insert(
            "label".to_string(),
            Feature::Int(ArrayD::from_shape_vec(IxDyn(&[b]), labels).unwrap()),
        );
        m.insert(
            "domain".to_string(),
            Feature::Int(ArrayD::from_shape_vec(IxDyn(&[b]), domains).unwrap()),
        );
        batches.push(KeyedBatch::from_features(m).unwrap());
    }
    batches
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let train = corpus(1500, 1);
    let test = corpus(300, 2);

    let mut model = Mdfend::new(30, 16, DOMAINS, DOMAINS, 8, vec![2, 3], 0.0, LEN, 42)?;

    let dir = tempfile::tempdir()?;
    let mut config = TrainerConfig::new(12, OptimizerSpec::new("adam", 0.01), dir.path());
    config.quiet = true;
    let mut trainer = Trainer::new(config, Box::new(MetricEvaluator::new(&["accuracy", "f1"])))?;
    trainer.fit(&mut model, &train, None)?;

    println!("test metrics: {}", trainer.evaluate(&model, &test)?);

    // Average gate weights per domain over the test set: rows are domains,
    // columns are experts, each row is a probability distribution.
    let mut sums = vec![vec![0.0f64; DOMAINS]; DOMAINS];
    let mut counts = vec![0usize; DOMAINS];
    for batch in &test {
        let gate = model.gate_weights(batch)?;
        let domains = batch.int("domain").unwrap();
        for (i, row) in gate.rows().into_iter().enumerate() {
            let d = domains[[i]] as usize;
            counts[d] += 1;
            for (e, &w) in row.iter().enumerate() {
                sums[d][e] += w;
            }
        }
    }
    println!("\nmean gate weight per (domain, expert):");
    for (d, row) in sums.iter().enumerate() {
        let means: Vec<String> = row
            .iter()
            .map(|s| format!("{:.3}", s / counts[d] as f64))
            .collect();
        println!("  domain {d}: [{}]", means.join(", "));
    }
    Ok(())
}
