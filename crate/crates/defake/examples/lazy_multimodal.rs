//! Lazy image loading: `MultiModalDataset` stores only image paths and runs
//! the decode hook when a sample is accessed, so memory stays flat no
//! matter how large the image collection is. The hook below counts its own
//! invocations to make the laziness visible.
//!
//! ```sh
//! cargo run --example lazy_multimodal
//! ```

use std::cell::Cell;
use std::rc::Rc;

use serde_json::json;

use defake::dataset::{
    load_json_dataset, make_batches, reference_tokenize, reference_transform, write_ppm,
    IndexedDataset, MultiModalDataset, Vocabulary,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;

    // A tiny corpus of posts, each with a 4x4 PPM image on disk.
    let mut rows = Vec::new();
    for i in 0..8 {
        let name = format!("img_{i}.ppm");
        let shade = (i * 32) as u8;
        write_ppm(&dir.path().join(&name), 4, 4, &[shade; 4 * 4 * 3])?;
        rows.push(json!({
            "text": format!("post number {i}"),
            "image": name,
            "label": i % 2,
        }));
    }
    let manifest = dir.path().join("posts.json");
    std::fs::write(&manifest, serde_json::to_string(&rows)?)?;

    // "image" path fields are resolved relative to the manifest.
    let records = load_json_dataset(&manifest, &["text", "image", "label"])?;

    let vocab = Vocabulary::build(rows.iter().filter_map(|r| r["text"].as_str()));
    let decodes = Rc::new(Cell::new(0usize));
    let counter = Rc::clone(&decodes);
    let dataset = MultiModalDataset::new(
        &records,
        Some((
            "text",
            Box::new(move |text: &str| reference_tokenize(text, &vocab, 6).unwrap()),
        )),
        "image",
        Box::new(move |path| {
            counter.set(counter.get() + 1);
            reference_transform(path)
        }),
    )?;
    println!("decodes after construction: {}", decodes.get());

    let sample = dataset.get(3)?;
    let keys: Vec<&str> = sample.keys().map(String::as_str).collect();
    println!("decodes after one access:   {}", decodes.get());
    println!("sample features: {keys:?}");

    // Batching walks every sample, decoding each image exactly once.
    let batches = make_batches(&dataset, 4, false, 0)?;
    println!(
        "decodes after batching {} samples into {} batches: {}",
        dataset.len(),
        batches.len(),
        decodes.get()
    );

    let image = &batches[0].get("image").unwrap();
    println!("image feature shape per batch: {:?}", image.shape());
    Ok(())
}
