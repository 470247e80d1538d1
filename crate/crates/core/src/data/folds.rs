use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};

/// Seeded shuffle of `0..entries` split into `k` folds whose sizes differ by
/// at most one (the first `entries % k` folds get the extra element).
pub fn kfold(entries: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::InvalidConfig(format!("need at least 2 folds, got {k}")));
    }
    if entries < k {
        return Err(Error::TooFewEntries { entries, folds: k });
    }
    let mut order: Vec<usize> = (0..entries).collect();
    order.shuffle(&mut Xoshiro256PlusPlus::seed_from_u64(seed));
    let base = entries / k;
    let extra = entries % k;
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for i in 0..k {
        let len = base + usize::from(i < extra);
        folds.push(order[start..start + len].to_vec());
        start += len;
    }
    Ok(folds)
}
