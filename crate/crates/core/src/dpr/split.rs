use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Test-set size for `n` items at reference fraction `ratio`:
/// `floor(n * (1 - ratio))`, computed as `n - ceil(n * ratio)` with a small
/// guard against representation error in `ratio` (so 10 items at 0.9 give
/// 1, and 756 give 75).
pub fn test_size(n: usize, ratio: f64) -> usize {
    let reference = ((n as f64) * ratio - 1e-9).ceil().max(0.0) as usize;
    n - reference.min(n)
}

/// Seeded shuffle (ChaCha8) followed by a prefix split into
/// (reference, test). Both parts must be nonempty.
pub fn split_reference_test<I: Clone>(items: &[I], ratio: f64, seed: u64) -> Result<(Vec<I>, Vec<I>)> {
    if items.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 items to split, got {}",
            items.len()
        )));
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidArgument(format!("split ratio must lie in (0, 1), got {ratio}")));
    }
    let n_test = test_size(items.len(), ratio);
    if n_test == 0 || n_test == items.len() {
        return Err(Error::InvalidArgument(format!(
            "ratio {ratio} leaves an empty side for {} items",
            items.len()
        )));
    }
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (reference, test) = order.split_at(items.len() - n_test);
    Ok((
        reference.iter().map(|&i| items[i].clone()).collect(),
        test.iter().map(|&i| items[i].clone()).collect(),
    ))
}
