//! Binary decision trees and the exact greedy grower shared by the random
//! forest (Gini) and gradient boosting (second-order gain).
//!
//! The grower works on per-feature presorted sample lists. A node owns one
//! sorted list per feature; splitting a node stably partitions every list,
//! so no node ever re-sorts.

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::ops::{AddAssign, Sub};

use serde::{Deserialize, Serialize};

/// `x[feature] <= threshold` goes left.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeNode {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { value } => return *value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x[*feature] <= *threshold {
                        left
                    } else {
                        right
                    }
                }
            }
        }
    }

    /// Number of splits on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => left.leaf_count() + right.leaf_count(),
        }
    }
}

/// Additive per-sample statistics and the split objective built on them.
pub(crate) trait Criterion {
    type Stats: Copy + Default + AddAssign + Sub<Output = Self::Stats>;

    fn stats(&self, sample: u32) -> Self::Stats;
    /// Whether a node with these statistics may be split at all.
    fn splittable(&self, node: &Self::Stats) -> bool;
    /// Whether both children satisfy the minimum-size rule.
    fn admissible(&self, left: &Self::Stats, right: &Self::Stats) -> bool;
    /// Node score; a split's gain is `score(l) + score(r) - score(parent)`.
    fn score(&self, s: &Self::Stats) -> f64;
    fn leaf_value(&self, s: &Self::Stats) -> f64;
    /// Splits must gain strictly more than this.
    fn min_gain(&self) -> f64 {
        0.0
    }
}

/// Row-major feature access for the grower.
pub(crate) struct Matrix<'a> {
    pub values: &'a [f64],
    pub dim: usize,
}

impl Matrix<'_> {
    #[inline]
    fn at(&self, sample: u32, feature: usize) -> f64 {
        self.values[sample as usize * self.dim + feature]
    }
}

/// One list per feature, each holding `samples` sorted by that feature
/// (ties by sample index).
pub(crate) fn presort(x: &Matrix<'_>, samples: &[u32]) -> Vec<Vec<u32>> {
    (0..x.dim)
        .map(|f| {
            let mut list = samples.to_vec();
            list.sort_unstable_by(|&a, &b| x.at(a, f).total_cmp(&x.at(b, f)).then(a.cmp(&b)));
            list
        })
        .collect()
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    gain: f64,
}

pub(crate) struct Grower<'a, C: Criterion> {
    pub x: Matrix<'a>,
    pub criterion: &'a C,
    pub max_depth: usize,
    /// Scratch flags indexed by sample: goes left at the current split.
    goes_left: Vec<bool>,
}

impl<'a, C: Criterion> Grower<'a, C> {
    pub fn new(x: Matrix<'a>, criterion: &'a C, max_depth: usize) -> Self {
        let n = x.values.len() / x.dim.max(1);
        Grower {
            x,
            criterion,
            max_depth,
            goes_left: alloc::vec![false; n],
        }
    }

    /// Grows a tree from presorted lists. `pick_features` is called once per
    /// candidate node, in depth-first left-to-right order, and returns the
    /// features to search.
    pub fn grow(
        &mut self,
        lists: Vec<Vec<u32>>,
        pick_features: &mut dyn FnMut() -> Vec<usize>,
    ) -> TreeNode {
        self.node(lists, 0, pick_features)
    }

    fn node(
        &mut self,
        lists: Vec<Vec<u32>>,
        depth: usize,
        pick: &mut dyn FnMut() -> Vec<usize>,
    ) -> TreeNode {
        let c = self.criterion;
        let mut total = C::Stats::default();
        for &s in &lists[0] {
            total += c.stats(s);
        }
        let leaf = TreeNode::Leaf {
            value: c.leaf_value(&total),
        };
        if depth >= self.max_depth || lists[0].len() < 2 || !c.splittable(&total) {
            return leaf;
        }
        let Some(best) = self.best_split(&lists, &total, &pick()) else {
            return leaf;
        };

        for &s in &lists[0] {
            self.goes_left[s as usize] = self.x.at(s, best.feature) <= best.threshold;
        }
        let mut left_lists = Vec::with_capacity(lists.len());
        let mut right_lists = Vec::with_capacity(lists.len());
        for list in lists {
            let (l, r): (Vec<u32>, Vec<u32>) =
                list.into_iter().partition(|&s| self.goes_left[s as usize]);
            left_lists.push(l);
            right_lists.push(r);
        }
        let left = self.node(left_lists, depth + 1, pick);
        let right = self.node(right_lists, depth + 1, pick);
        TreeNode::Split {
            feature: best.feature,
            threshold: best.threshold,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    fn best_split(
        &self,
        lists: &[Vec<u32>],
        total: &C::Stats,
        features: &[usize],
    ) -> Option<BestSplit> {
        let c = self.criterion;
        let parent = c.score(total);
        let mut best: Option<BestSplit> = None;
        for &f in features {
            let list = &lists[f];
            let mut left = C::Stats::default();
            for j in 0..list.len() - 1 {
                left += c.stats(list[j]);
                let a = self.x.at(list[j], f);
                let b = self.x.at(list[j + 1], f);
                if a == b {
                    continue;
                }
                let right = *total - left;
                if !c.admissible(&left, &right) {
                    continue;
                }
                let gain = c.score(&left) + c.score(&right) - parent;
                if gain > c.min_gain() && best.as_ref().is_none_or(|bs| gain > bs.gain) {
                    best = Some(BestSplit {
                        feature: f,
                        threshold: midpoint(a, b),
                        gain,
                    });
                }
            }
        }
        best
    }
}

/// A threshold `t` with `a <= t < b`.
fn midpoint(a: f64, b: f64) -> f64 {
    let t = a + (b - a) * 0.5;
    if t < b && t >= a {
        t
    } else {
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midpoint_stays_left_of_upper_value() {
        assert_eq!(midpoint(1.0, 2.0), 1.5);
        let a = 1.0_f64;
        let b = f64::from_bits(a.to_bits() + 1);
        assert_eq!(midpoint(a, b), a);
    }

    #[test]
    fn predict_walks_the_tree() {
        let t = TreeNode::Split {
            feature: 1,
            threshold: 0.0,
            left: Box::new(TreeNode::Leaf { value: 0.25 }),
            right: Box::new(TreeNode::Leaf { value: 0.75 }),
        };
        assert_eq!(t.predict(&[9.0, 0.0]), 0.25);
        assert_eq!(t.predict(&[9.0, 0.1]), 0.75);
        assert_eq!(t.depth(), 1);
        assert_eq!(t.leaf_count(), 2);
    }
}
