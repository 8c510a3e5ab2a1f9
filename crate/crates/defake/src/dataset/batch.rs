use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{IndexedDataset, KeyedBatch, Result};

/// Group dataset samples into batches; the final batch may be smaller.
///
/// With `shuffle` off, samples appear in dataset order. With a fixed seed
/// the emitted batch order is fully deterministic.
pub fn make_batches(
    dataset: &dyn IndexedDataset,
    batch_size: usize,
    shuffle: bool,
    seed: u64,
) -> Result<Vec<KeyedBatch>> {
    if batch_size == 0 {
        return Err(super::DatasetError::BadBatchSize);
    }
    if dataset.is_empty() {
        return Err(super::DatasetError::Empty);
    }
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    if shuffle {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        order.shuffle(&mut rng);
    }
    let mut batches = Vec::with_capacity(dataset.len().div_ceil(batch_size));
    for chunk in order.chunks(batch_size) {
        let samples = chunk
            .iter()
            .map(|&i| dataset.get(i))
            .collect::<Result<Vec<_>>>()?;
        batches.push(KeyedBatch::from_samples(&samples)?);
    }
    Ok(batches)
}
