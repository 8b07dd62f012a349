use alloc::format;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use super::Dataset;
use crate::error::{Error, Result};
use crate::rng;

fn check_fraction(test_fraction: f64) -> Result<()> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::param(
            "test_fraction",
            format!("{test_fraction} is not in (0, 1)"),
        ));
    }
    Ok(())
}

/// Shuffles `members` in a way that only depends on their row ids, not on
/// where they sit in the dataset.
fn canonical_shuffle(ds: &Dataset, members: &mut [usize], seed: u64) {
    members.sort_unstable_by_key(|&i| ds.row_id(i));
    members.shuffle(&mut rng::stream(seed));
}

fn partition(ds: &Dataset, mut test: Vec<usize>) -> (Dataset, Dataset) {
    test.sort_unstable();
    let mut is_test = alloc::vec![false; ds.len()];
    for &i in &test {
        is_test[i] = true;
    }
    let train: Vec<usize> = (0..ds.len()).filter(|&i| !is_test[i]).collect();
    (ds.select(&train), ds.select(&test))
}

/// Splits each class separately so both sides keep the class balance.
///
/// A class with `c` rows contributes `round(c * test_fraction)` rows to the
/// test side, clamped to `1..=c-1` so every class appears on both sides.
/// Rows keep their relative order.
pub fn stratified_split(ds: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    check_fraction(test_fraction)?;
    let mut test = Vec::new();
    for class in 0..=1u8 {
        let mut members = ds.indices_of(class);
        if members.len() < 2 {
            return Err(Error::precondition(format!(
                "stratified split needs at least 2 rows of class {class}, found {}",
                members.len()
            )));
        }
        let k = libm::round(members.len() as f64 * test_fraction) as usize;
        let k = k.clamp(1, members.len() - 1);
        canonical_shuffle(
            ds,
            &mut members,
            rng::derive_seed_keyed(seed, "stratified", class as u64),
        );
        test.extend_from_slice(&members[..k]);
    }
    Ok(partition(ds, test))
}

/// Splits without regard to class; the test side gets `round(n * test_fraction)` rows.
pub fn random_split(ds: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    check_fraction(test_fraction)?;
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut all: Vec<usize> = (0..ds.len()).collect();
    let k = libm::round(ds.len() as f64 * test_fraction) as usize;
    canonical_shuffle(ds, &mut all, rng::derive_seed(seed, "random-split"));
    all.truncate(k);
    Ok(partition(ds, all))
}
