//! Range counts, partial averages and gap functions.

use bitvec::vec::BitVec;

use crate::rational::{ratio, Rational};

use super::SetExpr;

/// Member count over a contiguous range of positive integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize)]
pub struct PrefixStat {
    pub span: u64,
    pub count: u64,
}

impl PrefixStat {
    /// Stat of the concatenation of two adjacent ranges.
    pub fn combine(self, other: PrefixStat) -> PrefixStat {
        PrefixStat { span: self.span + other.span, count: self.count + other.count }
    }
}

/// Members of `e` in `[1, n]`, by closed form where one exists and by a
/// stream scan otherwise.
pub fn count_upto(e: &SetExpr, n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    match fast_count(e, n) {
        Some(c) => c,
        None => e.stream().count(n),
    }
}

fn residue_count(modulus: u64, residues: &[u64], n: u64) -> u64 {
    residues
        .iter()
        .map(|&r| match r {
            0 => n / modulus,
            r if r <= n => (n - r) / modulus + 1,
            _ => 0,
        })
        .sum()
}

fn fast_count(e: &SetExpr, n: u64) -> Option<u64> {
    if n == 0 {
        return Some(0);
    }
    match e {
        SetExpr::Empty => Some(0),
        SetExpr::All => Some(n),
        SetExpr::Explicit(elements) => Some(elements.partition_point(|&x| x <= n) as u64),
        SetExpr::Residue { modulus, residues } => Some(residue_count(*modulus, residues, n)),
        SetExpr::Blocks(b) => Some(b.count_upto(n)),
        SetExpr::Predicate(p) => p.count_upto(n),
        SetExpr::Compl(a) => fast_count(a, n).map(|c| n - c),
        SetExpr::Dilate(k, a) => fast_count(a, n / k),
        SetExpr::Shift(k, a) => {
            let end = n.checked_add(*k)?;
            Some(fast_count(a, end)? - fast_count(a, *k)?)
        }
        SetExpr::Union(a, b) | SetExpr::Inter(a, b) | SetExpr::Diff(a, b) | SetExpr::SymDiff(a, b) => {
            // Exact when one side is finite: correct the other side's count
            // element by element.
            let (finite, other, finite_left) = match (&**a, &**b) {
                (SetExpr::Explicit(x), _) => (x, b, true),
                (_, SetExpr::Explicit(y)) => (y, a, false),
                _ => return None,
            };
            let base = fast_count(other, n)?;
            let listed = &finite[..finite.partition_point(|&x| x <= n)];
            let shared = listed.iter().filter(|&&x| other.member(x)).count() as u64;
            let listed = listed.len() as u64;
            Some(match (e, finite_left) {
                (SetExpr::Union(..), _) => base + listed - shared,
                (SetExpr::Inter(..), _) => shared,
                (SetExpr::Diff(..), true) => listed - shared,
                (SetExpr::Diff(..), false) => base - shared,
                (SetExpr::SymDiff(..), _) => base + listed - 2 * shared,
                _ => unreachable!(),
            })
        }
        SetExpr::Greedy(g) => Some(g.count_upto(n)),
        SetExpr::Midpoint(_) => None,
    }
}

/// Count of members in `[from, to]`.
pub fn prefix_scan(e: &SetExpr, from: u64, to: u64) -> PrefixStat {
    let from = from.max(1);
    assert!(from <= to, "empty scan range {from}..={to}");
    let span = to - from + 1;
    let count = match (fast_count(e, to), fast_count(e, from - 1)) {
        (Some(hi), Some(lo)) => hi - lo,
        _ => e.stream_from(from).count(span),
    };
    PrefixStat { span, count }
}

/// [`prefix_scan`] split into `threads` adjacent chunks scanned concurrently.
pub fn par_prefix_scan(e: &SetExpr, from: u64, to: u64, threads: usize) -> PrefixStat {
    let from = from.max(1);
    assert!(from <= to, "empty scan range {from}..={to}");
    let threads = threads.max(1) as u64;
    let span = to - from + 1;
    let chunk = span.div_ceil(threads);
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..threads)
            .map(|i| from + i * chunk)
            .filter(|&lo| lo <= to)
            .map(|lo| {
                let hi = (lo + chunk - 1).min(to);
                scope.spawn(move || prefix_scan(e, lo, hi))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("scan worker panicked"))
            .fold(PrefixStat::default(), PrefixStat::combine)
    })
}

/// ν_N(e) as an exact rational.
pub fn partial_average(e: &SetExpr, n: u64) -> Rational {
    assert!(n >= 1, "partial averages start at N = 1");
    ratio(count_upto(e, n), n)
}

/// Indicator bits I(1), …, I(n).
pub fn indicator_prefix(e: &SetExpr, n: u64) -> BitVec {
    let mut s = e.stream();
    (0..n).map(|_| s.next_bit()).collect()
}

/// A gap length, or a note that none was found before the search horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gap {
    Finite(u64),
    Censored { horizon: u64 },
}

impl Gap {
    pub fn finite(self) -> Option<u64> {
        match self {
            Gap::Finite(k) => Some(k),
            Gap::Censored { .. } => None,
        }
    }
}

/// P (distance to the next member) and Q (distance to the next non-member).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GapPair {
    pub p: Gap,
    pub q: Gap,
}

/// Gap functions after `n`, searching up to `horizon` (exclusive of nothing:
/// positions `n+1 ..= horizon` are examined).
pub fn gap_functions(e: &SetExpr, n: u64, horizon: u64) -> GapPair {
    assert!(n >= 1 && horizon > n, "gap search needs 1 ≤ N < horizon");
    let mut s = e.stream_from(n + 1);
    let (mut p, mut q) = (None, None);
    for k in 1..=horizon - n {
        let bit = s.next_bit();
        if bit && p.is_none() {
            p = Some(k);
        }
        if !bit && q.is_none() {
            q = Some(k);
        }
        if p.is_some() && q.is_some() {
            break;
        }
    }
    let wrap = |g: Option<u64>| g.map_or(Gap::Censored { horizon }, Gap::Finite);
    GapPair { p: wrap(p), q: wrap(q) }
}
