//! Midpoint sets: B together with the 1st, 3rd, 5th, … elements of C \ B.

use std::sync::{Arc, RwLock};

use bitvec::vec::BitVec;

use super::stream::BitStream;
use super::SetExpr;

#[derive(Debug, Default)]
struct Memo {
    bits: BitVec,
    /// Elements of C \ B seen so far.
    between: u64,
}

/// Lazily memoized midpoint set between `lower` and `upper`.
#[derive(Debug, Clone)]
pub struct MidpointSet {
    lower: Arc<SetExpr>,
    upper: Arc<SetExpr>,
    /// Set when lower ⊆ upper has been checked by the builder.
    nested: bool,
    memo: Arc<RwLock<Memo>>,
}

impl PartialEq for MidpointSet {
    fn eq(&self, other: &Self) -> bool {
        self.lower == other.lower && self.upper == other.upper
    }
}

impl MidpointSet {
    pub(crate) fn new(lower: SetExpr, upper: SetExpr, nested: bool) -> Self {
        MidpointSet { lower: Arc::new(lower), upper: Arc::new(upper), nested, memo: Arc::default() }
    }

    pub fn is_nested(&self) -> bool {
        self.nested
    }

    pub fn lower(&self) -> &SetExpr {
        &self.lower
    }

    pub fn upper(&self) -> &SetExpr {
        &self.upper
    }

    fn extend_to(&self, n: u64) {
        if self.memo.read().expect("midpoint memo poisoned").bits.len() as u64 >= n {
            return;
        }
        let mut memo = self.memo.write().expect("midpoint memo poisoned");
        let from = memo.bits.len() as u64 + 1;
        if from > n {
            return;
        }
        let mut lower = self.lower.stream_from(from);
        let mut upper = self.upper.stream_from(from);
        for _ in from..=n {
            let (b, c) = (lower.next_bit(), upper.next_bit());
            let bit = b || (c && {
                memo.between += 1;
                memo.between % 2 == 1
            });
            memo.bits.push(bit);
        }
    }

    pub fn member(&self, n: u64) -> bool {
        self.extend_to(n);
        self.memo.read().expect("midpoint memo poisoned").bits[(n - 1) as usize]
    }

    pub(crate) fn stream(&self) -> MidpointStream {
        MidpointStream { lower: self.lower.stream(), upper: self.upper.stream(), between: 0 }
    }
}

pub(crate) struct MidpointStream {
    lower: Box<dyn BitStream>,
    upper: Box<dyn BitStream>,
    between: u64,
}

impl BitStream for MidpointStream {
    fn next_bit(&mut self) -> bool {
        let b = self.lower.next_bit();
        let c = self.upper.next_bit();
        if b {
            return true;
        }
        if c {
            self.between += 1;
            return self.between % 2 == 1;
        }
        false
    }
}
