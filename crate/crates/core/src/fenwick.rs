//! Binary indexed tree over f64 weights.
//!
//! Supports prefix sums, point updates, and inverse-prefix lookup in
//! O(log n), which is all the replay buffer needs for weighted sampling.

#[derive(Debug, Clone)]
pub struct FenwickTree {
    // 1-based storage, storage[0] unused
    storage: Vec<f64>,
    len: usize,
}

impl FenwickTree {
    pub fn new(len: usize) -> Self {
        FenwickTree {
            storage: vec![0.0; len + 1],
            len,
        }
    }

    /// Builds the tree from explicit weights in O(n).
    pub fn from_weights(weights: &[f64]) -> Self {
        let len = weights.len();
        let mut tree = FenwickTree {
            storage: vec![0.0; len + 1],
            len,
        };
        for j in 1..=len {
            tree.storage[j] += weights[j - 1];
            let parent = j + (j & j.wrapping_neg());
            if parent <= len {
                let v = tree.storage[j];
                tree.storage[parent] += v;
            }
        }
        tree
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Sum of weights at indices 0..=idx (0-based, inclusive).
    pub fn prefix_sum(&self, idx: usize) -> f64 {
        let mut i = idx + 1;
        let mut sum = 0.0;
        while i > 0 {
            sum += self.storage[i];
            i -= i & i.wrapping_neg();
        }
        sum
    }

    pub fn total(&self) -> f64 {
        if self.len == 0 {
            0.0
        } else {
            self.prefix_sum(self.len - 1)
        }
    }

    /// Adds delta to the weight at idx (0-based).
    pub fn add(&mut self, idx: usize, delta: f64) {
        let mut i = idx + 1;
        while i <= self.len {
            self.storage[i] += delta;
            i += i & i.wrapping_neg();
        }
    }

    /// Smallest index whose prefix sum strictly exceeds `target`.
    ///
    /// With `target` drawn uniformly from [0, total), each index i is
    /// returned with probability w_i / total. Zero-weight entries can
    /// never be returned for targets strictly inside the interval.
    pub fn find_prefix(&self, target: f64) -> usize {
        let mut pos = 0usize; // 1-based position of the last accepted node
        let mut remaining = target;
        let mut mask = self.len.next_power_of_two();
        // next_power_of_two rounds up; for len already a power of two this
        // is len itself, which is the correct top-level stride
        while mask > 0 {
            let next = pos + mask;
            if next <= self.len && self.storage[next] <= remaining {
                remaining -= self.storage[next];
                pos = next;
            }
            mask >>= 1;
        }
        pos.min(self.len - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefix_sums_match_direct_accumulation() {
        let w = [0.5, 0.0, 2.0, 1.25, 0.25, 3.0];
        let tree = FenwickTree::from_weights(&w);
        let mut acc = 0.0;
        for (i, &wi) in w.iter().enumerate() {
            acc += wi;
            assert!((tree.prefix_sum(i) - acc).abs() <= 1e-12 * acc.max(1.0));
        }
        assert!((tree.total() - 7.0).abs() < 1e-12);
    }

    #[test]
    fn add_updates_all_affected_prefixes() {
        let mut tree = FenwickTree::new(10);
        for i in 0..10 {
            tree.add(i, (i + 1) as f64);
        }
        tree.add(3, 0.5);
        assert!((tree.prefix_sum(2) - 6.0).abs() < 1e-12);
        assert!((tree.prefix_sum(3) - 10.5).abs() < 1e-12);
        assert!((tree.total() - 55.5).abs() < 1e-12);
    }

    #[test]
    fn find_prefix_partitions_the_weight_interval() {
        let w = [1.0, 0.0, 2.0, 0.5];
        let tree = FenwickTree::from_weights(&w);
        assert_eq!(tree.find_prefix(0.0), 0);
        assert_eq!(tree.find_prefix(0.999_999), 0);
        // index 1 has zero weight and is skipped
        assert_eq!(tree.find_prefix(1.0), 2);
        assert_eq!(tree.find_prefix(2.999), 2);
        assert_eq!(tree.find_prefix(3.0), 3);
        assert_eq!(tree.find_prefix(3.49), 3);
    }

    #[test]
    fn find_prefix_handles_non_power_of_two_lengths() {
        for n in [1usize, 2, 3, 5, 7, 11, 13] {
            let w: Vec<f64> = (0..n).map(|i| 1.0 + (i % 3) as f64).collect();
            let tree = FenwickTree::from_weights(&w);
            let mut acc = 0.0;
            for (i, &wi) in w.iter().enumerate() {
                assert_eq!(tree.find_prefix(acc), i, "n={n} i={i}");
                assert_eq!(tree.find_prefix(acc + wi * 0.5), i, "n={n} i={i}");
                acc += wi;
            }
        }
    }
}
