//! Exact brute-force nearest-neighbour search.
//!
//! Shared by the KNN classifier and SMOTE. Candidates are ranked by squared
//! Euclidean distance, ties broken by the smaller row id, so the result is a
//! total order that does not depend on storage order.

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::dataset::RowId;

#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// A neighbour: position in the candidate set plus its rank key.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub id: RowId,
    pub distance2: f64,
}

fn rank(a: &Neighbor, b: &Neighbor) -> Ordering {
    a.distance2.total_cmp(&b.distance2).then(a.id.cmp(&b.id))
}

/// The `k` nearest rows of a row-major `points` matrix to `query`, nearest
/// first. `skip` excludes one position (the query's own row).
pub fn k_nearest(
    query: &[f64],
    points: &[f64],
    dim: usize,
    ids: &[RowId],
    k: usize,
    skip: Option<usize>,
) -> Vec<Neighbor> {
    let mut best: Vec<Neighbor> = Vec::with_capacity(k + 1);
    if k == 0 {
        return best;
    }
    for (index, row) in points.chunks_exact(dim).enumerate() {
        if Some(index) == skip {
            continue;
        }
        let cand = Neighbor {
            index,
            id: ids[index],
            distance2: squared_distance(query, row),
        };
        if best.len() == k && rank(&cand, &best[k - 1]) != Ordering::Less {
            continue;
        }
        let pos = best.partition_point(|b| rank(b, &cand) == Ordering::Less);
        best.insert(pos, cand);
        best.truncate(k);
    }
    best
}
