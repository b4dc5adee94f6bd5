//! Set expressions over the positive integers and their indicator sequences.
//!
//! A [`SetExpr`] is an immutable description of a subset of ℕ = {1, 2, …}.
//! Membership is total and deterministic for every variant. Sequential
//! access goes through [`stream`], which yields the indicator bits
//! I(n), I(n+1), … without random-access overhead; [`scan`] builds exact
//! partial averages and range counts on top of it.

mod blocks;
mod canon;
mod dsl;
mod greedy;
mod midpoint;
pub mod pattern;
mod predicate;
mod scan;
pub mod stream;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::rational::{is_unit_interval, Rational};

pub use blocks::{BlockSet, Tail, ZSpec};
pub use canon::canonicalize;
pub use dsl::{parse, parse_lines, parse_with, ParseError, ParseOptions};
pub use greedy::GreedySet;
pub use midpoint::MidpointSet;
pub use predicate::{is_prime, Predicate};
pub use scan::{
    count_upto, gap_functions, indicator_prefix, par_prefix_scan, partial_average, prefix_scan, Gap, GapPair, PrefixStat,
};

/// Default cap on the number of elements in an explicit set.
pub const DEFAULT_EXPLICIT_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SetError {
    #[error("explicit set elements must be strictly increasing and at least 1")]
    ExplicitNotIncreasing,
    #[error("explicit set has {len} elements, above the cap of {cap}")]
    ExplicitTooLarge { len: usize, cap: usize },
    #[error("modulus must be at least 1")]
    ZeroModulus,
    #[error("residue {residue} is out of range for modulus {modulus}")]
    ResidueOutOfRange { residue: u64, modulus: u64 },
    #[error("invalid block specification: {0}")]
    InvalidBlocks(&'static str),
    #[error("greedy target {0} is outside [0, 1]")]
    TargetOutOfRange(Rational),
    #[error("dilation factor must be at least 1")]
    ZeroDilation,
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
}

/// A closed expression denoting a subset of ℕ = {1, 2, …}.
///
/// Cloning is cheap: children are reference counted and every variant is
/// immutable once built. Lazily memoized state (greedy and midpoint
/// prefixes) lives behind locks inside the variant payloads.
#[derive(Clone, PartialEq)]
pub enum SetExpr {
    Empty,
    All,
    /// Finite set, strictly increasing, all elements ≥ 1.
    Explicit(Arc<[u64]>),
    /// `{n : n mod modulus ∈ residues}`; residues sorted and deduplicated.
    Residue { modulus: u64, residues: Arc<[u64]> },
    Blocks(BlockSet),
    Greedy(GreedySet),
    Predicate(Predicate),
    Union(Arc<SetExpr>, Arc<SetExpr>),
    Inter(Arc<SetExpr>, Arc<SetExpr>),
    Compl(Arc<SetExpr>),
    Diff(Arc<SetExpr>, Arc<SetExpr>),
    SymDiff(Arc<SetExpr>, Arc<SetExpr>),
    /// `{k·n : n ∈ e}`.
    Dilate(u64, Arc<SetExpr>),
    /// `{n − k : n ∈ e, n − k ≥ 1}`.
    Shift(u64, Arc<SetExpr>),
    /// B together with every second element of C \ B, starting with the first.
    Midpoint(MidpointSet),
}

impl SetExpr {
    pub fn explicit<I: IntoIterator<Item = u64>>(elements: I) -> Result<Self, SetError> {
        Self::explicit_capped(elements, DEFAULT_EXPLICIT_CAP)
    }

    pub fn explicit_capped<I: IntoIterator<Item = u64>>(elements: I, cap: usize) -> Result<Self, SetError> {
        let elements: Vec<u64> = elements.into_iter().collect();
        if elements.len() > cap {
            return Err(SetError::ExplicitTooLarge { len: elements.len(), cap });
        }
        if elements.first().is_some_and(|&first| first == 0) || elements.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SetError::ExplicitNotIncreasing);
        }
        Ok(SetExpr::Explicit(elements.into()))
    }

    /// Builds an explicit set from arbitrary (unsorted, repeated) elements.
    /// Zero is dropped. No size cap: used for internally produced finite sets.
    pub fn explicit_from_unsorted<I: IntoIterator<Item = u64>>(elements: I) -> Self {
        let mut elements: Vec<u64> = elements.into_iter().filter(|&n| n > 0).collect();
        elements.sort_unstable();
        elements.dedup();
        if elements.is_empty() {
            SetExpr::Empty
        } else {
            SetExpr::Explicit(elements.into())
        }
    }

    pub fn residue<I: IntoIterator<Item = u64>>(modulus: u64, residues: I) -> Result<Self, SetError> {
        if modulus == 0 {
            return Err(SetError::ZeroModulus);
        }
        let mut residues: Vec<u64> = residues.into_iter().collect();
        if let Some(&bad) = residues.iter().find(|&&r| r >= modulus) {
            return Err(SetError::ResidueOutOfRange { residue: bad, modulus });
        }
        residues.sort_unstable();
        residues.dedup();
        Ok(SetExpr::Residue { modulus, residues: residues.into() })
    }

    pub fn blocks(spec: ZSpec) -> Result<Self, SetError> {
        Ok(SetExpr::Blocks(BlockSet::new(spec)?))
    }

    pub fn greedy(target: Rational) -> Result<Self, SetError> {
        if !is_unit_interval(&target) {
            return Err(SetError::TargetOutOfRange(target));
        }
        Ok(SetExpr::Greedy(GreedySet::new(target)))
    }

    pub fn predicate(name: &str) -> Result<Self, SetError> {
        Ok(SetExpr::Predicate(name.parse()?))
    }

    pub fn union(a: SetExpr, b: SetExpr) -> Self {
        SetExpr::Union(Arc::new(a), Arc::new(b))
    }

    pub fn inter(a: SetExpr, b: SetExpr) -> Self {
        SetExpr::Inter(Arc::new(a), Arc::new(b))
    }

    pub fn compl(a: SetExpr) -> Self {
        SetExpr::Compl(Arc::new(a))
    }

    pub fn diff(a: SetExpr, b: SetExpr) -> Self {
        SetExpr::Diff(Arc::new(a), Arc::new(b))
    }

    pub fn sym_diff(a: SetExpr, b: SetExpr) -> Self {
        SetExpr::SymDiff(Arc::new(a), Arc::new(b))
    }

    pub fn dilate(k: u64, a: SetExpr) -> Result<Self, SetError> {
        if k == 0 {
            return Err(SetError::ZeroDilation);
        }
        Ok(SetExpr::Dilate(k, Arc::new(a)))
    }

    pub fn shift(k: u64, a: SetExpr) -> Self {
        SetExpr::Shift(k, Arc::new(a))
    }

    pub fn midpoint(lower: SetExpr, upper: SetExpr) -> Self {
        SetExpr::Midpoint(MidpointSet::new(lower, upper, false))
    }

    /// A midpoint whose caller has established `lower ⊆ upper`.
    pub(crate) fn nested_midpoint(lower: SetExpr, upper: SetExpr) -> Self {
        SetExpr::Midpoint(MidpointSet::new(lower, upper, true))
    }

    /// Union of a nonempty list, left-associated. Empty list gives `Empty`.
    pub fn union_all<I: IntoIterator<Item = SetExpr>>(parts: I) -> Self {
        parts.into_iter().reduce(SetExpr::union).unwrap_or(SetExpr::Empty)
    }

    /// `(base \ dropped) ∪ added` for finite `dropped` and `added`, skipping
    /// the combinators that would be no-ops.
    pub fn patch(base: SetExpr, dropped: Vec<u64>, added: Vec<u64>) -> Self {
        let mut out = base;
        if !dropped.is_empty() {
            out = SetExpr::diff(out, SetExpr::explicit_from_unsorted(dropped));
        }
        if !added.is_empty() {
            out = SetExpr::union(out, SetExpr::explicit_from_unsorted(added));
        }
        out
    }

    /// Indicator I_e(n). Returns false for n = 0, which lies outside ℕ.
    pub fn member(&self, n: u64) -> bool {
        if n == 0 {
            return false;
        }
        match self {
            SetExpr::Empty => false,
            SetExpr::All => true,
            SetExpr::Explicit(elements) => elements.binary_search(&n).is_ok(),
            SetExpr::Residue { modulus, residues } => residues.binary_search(&(n % modulus)).is_ok(),
            SetExpr::Blocks(blocks) => blocks.member(n),
            SetExpr::Greedy(greedy) => greedy.member(n),
            SetExpr::Predicate(p) => p.member(n),
            SetExpr::Union(a, b) => a.member(n) || b.member(n),
            SetExpr::Inter(a, b) => a.member(n) && b.member(n),
            SetExpr::Compl(a) => !a.member(n),
            SetExpr::Diff(a, b) => a.member(n) && !b.member(n),
            SetExpr::SymDiff(a, b) => a.member(n) != b.member(n),
            SetExpr::Dilate(k, a) => n % k == 0 && a.member(n / k),
            SetExpr::Shift(k, a) => n.checked_add(*k).is_some_and(|m| a.member(m)),
            SetExpr::Midpoint(m) => m.member(n),
        }
    }

    /// Indicator bits starting at `start` (clamped to 1).
    pub fn stream_from(&self, start: u64) -> Box<dyn stream::BitStream> {
        stream::build(self, start.max(1))
    }

    pub fn stream(&self) -> Box<dyn stream::BitStream> {
        self.stream_from(1)
    }

    /// Members in `[1, limit]`, ascending.
    pub fn members_upto(&self, limit: u64) -> Vec<u64> {
        let mut bits = self.stream();
        (1..=limit).filter(|_| bits.next_bit()).collect()
    }
}

impl fmt::Display for SetExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        dsl::render(self, f)
    }
}

impl fmt::Debug for SetExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SetExpr({self})")
    }
}

impl std::str::FromStr for SetExpr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}
