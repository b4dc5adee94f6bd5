//! Greedy target-density sets.
//!
//! Start from {1}; for N ≥ 1 the integer N+1 joins the set exactly when
//! ν_N < s, compared strictly and exactly.

use std::sync::{Arc, RwLock};

use bitvec::vec::BitVec;

use crate::rational::{below, Rational};

use super::stream::BitStream;

#[derive(Debug, Default)]
struct Memo {
    bits: BitVec,
    count: u64,
}

/// Greedy set for a target density, with a shared membership memo.
///
/// Random-access membership extends the memo under a write lock; readers of
/// an already computed prefix only take the read lock.
#[derive(Debug, Clone)]
pub struct GreedySet {
    target: Rational,
    memo: Arc<RwLock<Memo>>,
}

impl PartialEq for GreedySet {
    fn eq(&self, other: &Self) -> bool {
        self.target == other.target
    }
}

impl GreedySet {
    pub(crate) fn new(target: Rational) -> Self {
        GreedySet { target, memo: Arc::default() }
    }

    pub fn target(&self) -> &Rational {
        &self.target
    }

    fn extend_to(&self, n: u64) {
        if self.memo.read().expect("greedy memo poisoned").bits.len() as u64 >= n {
            return;
        }
        let mut memo = self.memo.write().expect("greedy memo poisoned");
        while (memo.bits.len() as u64) < n {
            let next = memo.bits.len() as u64 + 1;
            let bit = next == 1 || below(memo.count, next - 1, &self.target);
            memo.bits.push(bit);
            memo.count += bit as u64;
        }
    }

    pub fn member(&self, n: u64) -> bool {
        self.extend_to(n);
        self.memo.read().expect("greedy memo poisoned").bits[(n - 1) as usize]
    }

    /// Members in [1, n].
    pub fn count_upto(&self, n: u64) -> u64 {
        if n == 0 {
            return 0;
        }
        self.extend_to(n);
        self.memo.read().expect("greedy memo poisoned").bits[..n as usize].count_ones() as u64
    }

    pub(crate) fn stream(&self) -> GreedyStream {
        GreedyStream { target: self.target, n: 0, count: 0 }
    }
}

/// Replays the recurrence directly, without touching the shared memo.
pub(crate) struct GreedyStream {
    target: Rational,
    n: u64,
    count: u64,
}

impl BitStream for GreedyStream {
    fn next_bit(&mut self) -> bool {
        let bit = self.n == 0 || below(self.count, self.n, &self.target);
        self.n += 1;
        self.count += bit as u64;
        bit
    }
}
