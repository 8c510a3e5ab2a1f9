use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{DatasetError, Result};

/// Shuffle by seed, then partition into train/validation/test.
///
/// Train takes `floor(n * r1)` records, validation `floor(n * r2)`, test
/// the remainder. Ratios must be positive and sum to 1.
pub fn split_data<T>(records: Vec<T>, ratios: (f64, f64, f64), seed: u64) -> Result<(Vec<T>, Vec<T>, Vec<T>)> {
    let (r1, r2, r3) = ratios;
    if r1 <= 0.0 || r2 <= 0.0 || r3 <= 0.0 {
        return Err(DatasetError::BadRatios(format!(
            "every ratio must be positive, got ({r1}, {r2}, {r3})"
        )));
    }
    if (r1 + r2 + r3 - 1.0).abs() > 1e-9 {
        return Err(DatasetError::BadRatios(format!(
            "ratios sum to {}, expected 1",
            r1 + r2 + r3
        )));
    }
    let n = records.len();
    let mut shuffled = records;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    shuffled.shuffle(&mut rng);

    let n_train = (n as f64 * r1).floor() as usize;
    let n_val = (n as f64 * r2).floor() as usize;
    let mut rest = shuffled.split_off(n_train);
    let test = rest.split_off(n_val.min(rest.len()));
    Ok((shuffled, rest, test))
}
