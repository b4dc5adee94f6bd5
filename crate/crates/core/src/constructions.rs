//! Builders for the named set families.

use thiserror::Error;

use crate::limits::{exact_limits, LimitsError, Verdict};
use crate::rational::Rational;
use crate::sets::{canonicalize, Predicate, SetError, SetExpr, ZSpec};

/// Prefix length used by [`midpoint_set`] to check B ⊆ C.
pub const NESTING_CHECK: u64 = 100_000;

/// Largest `kmax` accepted by [`dyadic_partition`].
pub const MAX_DYADIC: u32 = 30;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructionError {
    #[error(transparent)]
    Set(#[from] SetError),
    #[error("lower set is not contained in the upper set: {witness} is a counterexample")]
    NotNested { witness: u64 },
    #[error("{0} has no limit")]
    NoLimit(&'static str),
    #[error("dyadic partition supports kmax ≤ {MAX_DYADIC}, got {0}")]
    DyadicTooDeep(u32),
}

/// Residue classes `residues` modulo `modulus`, simplified (so `residue_set(1, [0])` is `All`).
pub fn residue_set<I: IntoIterator<Item = u64>>(modulus: u64, residues: I) -> Result<SetExpr, ConstructionError> {
    Ok(canonicalize(&SetExpr::residue(modulus, residues)?))
}

/// The greedy set with ν = `target`.
pub fn greedy_target(target: Rational) -> Result<SetExpr, ConstructionError> {
    Ok(SetExpr::greedy(target)?)
}

pub fn block_set(spec: ZSpec) -> Result<SetExpr, ConstructionError> {
    Ok(SetExpr::blocks(spec)?)
}

/// B = evens and the set C whose intersection with B is 2A for
/// A = geometric blocks with ratio 2.
pub fn counterexample_pair() -> (SetExpr, SetExpr) {
    let b = SetExpr::residue(2, [0]).expect("valid residue");
    (b, SetExpr::Predicate(Predicate::Pairing))
}

/// The block set A behind [`counterexample_pair`].
pub fn counterexample_base() -> SetExpr {
    SetExpr::blocks(ZSpec::Geometric { ratio: 2 }).expect("valid blocks")
}

/// B together with every second element of C \ B, starting with the first.
///
/// Containment is checked on `[1, NESTING_CHECK]`. Inputs in the exact
/// fragment must have a limit; other inputs are taken on trust.
pub fn midpoint_set(lower: SetExpr, upper: SetExpr) -> Result<SetExpr, ConstructionError> {
    let (mut b, mut c) = (lower.stream(), upper.stream());
    for n in 1..=NESTING_CHECK {
        let (in_b, in_c) = (b.next_bit(), c.next_bit());
        if in_b && !in_c {
            return Err(ConstructionError::NotNested { witness: n });
        }
    }
    for (e, which) in [(&lower, "lower set"), (&upper, "upper set")] {
        match exact_limits(e) {
            Ok(r) if r.verdict != Verdict::InF => return Err(ConstructionError::NoLimit(which)),
            Ok(_) | Err(LimitsError::NotExactlySolvable(_)) => {}
            Err(_) => unreachable!("exact evaluation has no other failure"),
        }
    }
    Ok(canonicalize(&SetExpr::nested_midpoint(lower, upper)))
}

/// Odd numbers at least 3.
pub fn odds_from_three() -> SetExpr {
    SetExpr::diff(SetExpr::residue(2, [1]).expect("valid residue"), SetExpr::explicit([1]).expect("valid explicit"))
}

/// D_k = 2^k · {3, 5, 7, …} for k = 0..=kmax. Pairwise disjoint, ν(D_k) = 2^{−(k+1)}.
pub fn dyadic_partition(kmax: u32) -> Result<Vec<SetExpr>, ConstructionError> {
    if kmax > MAX_DYADIC {
        return Err(ConstructionError::DyadicTooDeep(kmax));
    }
    let odds = odds_from_three();
    Ok((0..=kmax)
        .map(|k| if k == 0 { odds.clone() } else { SetExpr::dilate(1 << k, odds.clone()).expect("nonzero factor") })
        .collect())
}
