//! Null modification: trimming a set by a null set so that every partial
//! average stays below the limit, for single sets, disjoint families and
//! finite chains.
//!
//! All results are materialized up to a horizon. Beyond it the modified
//! sets agree with their sources.

use std::io::{self, Write};

use bitvec::vec::BitVec;
use serde::Serialize;
use thiserror::Error;

use crate::limits::{exact_limits, limit_value, LimitValue, LimitsError};
use crate::rational::{above, is_unit_interval, Rational};
use crate::sets::{indicator_prefix, SetExpr};

/// Default materialization horizon.
pub const DEFAULT_HORIZON: u64 = 1_000_000;

/// Approximate charges closer than this count as tied.
pub const TIE_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NullModError {
    #[error("bound {0} is outside [0, 1]")]
    BoundOutOfRange(Rational),
    #[error("bound {got} does not match the exact upper limit {expected}")]
    BoundMismatch { expected: Rational, got: Rational },
    #[error("horizon must be at least 1")]
    EmptyHorizon,
    #[error("set {index} has no limit")]
    NoLimit { index: usize },
    #[error("sets {first} and {second} have the same density")]
    TiedDensities { first: usize, second: usize },
    #[error("set {lower} is not contained in set {upper}: {witness} is a counterexample")]
    NotAChain { lower: usize, upper: usize, witness: u64 },
    #[error("sets {first} and {second} both contain {witness}")]
    NotDisjoint { first: usize, second: usize, witness: u64 },
    #[error(transparent)]
    Limits(#[from] LimitsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AuditRecord {
    pub n: u64,
    pub kept: bool,
    /// |A′ ∩ [1, n]| after the decision at n.
    pub kept_count: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NullModResult {
    /// A′: the source minus `removed`. Unmodified past the horizon.
    pub kept: SetExpr,
    /// F, as an explicit set.
    pub removed: SetExpr,
    pub removed_elements: Vec<u64>,
    pub bound: Rational,
    pub horizon: u64,
    /// True when the bound came from a streamed estimate.
    pub approximate: bool,
    /// One record per member of the source up to the horizon.
    pub audit: Vec<AuditRecord>,
}

impl NullModResult {
    /// |F ∩ [1, horizon]| / horizon.
    pub fn removed_density(&self) -> f64 {
        self.removed_elements.len() as f64 / self.horizon as f64
    }

    /// Writes `N,member,kept_or_removed,running_nu` for every N up to the
    /// horizon; `running_nu` is ν_N(A′) as an unreduced `count/N`.
    pub fn write_audit_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "N,member,kept_or_removed,running_nu")?;
        let mut records = self.audit.iter().peekable();
        let mut kept_count = 0;
        for n in 1..=self.horizon {
            match records.next_if(|r| r.n == n) {
                Some(r) => {
                    kept_count = r.kept_count;
                    let decision = if r.kept { "kept" } else { "removed" };
                    writeln!(out, "{n},1,{decision},{kept_count}/{n}")?;
                }
                None => writeln!(out, "{n},0,,{kept_count}/{n}")?,
            }
        }
        Ok(())
    }
}

/// Algorithm 1 over the indicator bits of A: a member N joins A′ unless
/// that would push ν_N(A′) above `bound`. Returns the audit and F.
fn algorithm1(bits: impl Iterator<Item = bool>, bound: &Rational, mut audit: Option<&mut Vec<AuditRecord>>) -> Vec<u64> {
    let mut kept_count = 0u64;
    let mut removed = Vec::new();
    for (n, bit) in (1u64..).zip(bits) {
        if !bit {
            continue;
        }
        let kept = !above(kept_count + 1, n, bound);
        if kept {
            kept_count += 1;
        } else {
            removed.push(n);
        }
        if let Some(audit) = audit.as_deref_mut() {
            audit.push(AuditRecord { n, kept, kept_count });
        }
    }
    removed
}

/// Runs Algorithm 1 on `a` up to `horizon` with the given ν⁺ bound.
///
/// For inputs with a closed-form upper limit the bound must equal it.
/// Other inputs are accepted with any bound and marked approximate.
pub fn null_modify(a: &SetExpr, bound: Rational, horizon: u64) -> Result<NullModResult, NullModError> {
    if !is_unit_interval(&bound) {
        return Err(NullModError::BoundOutOfRange(bound));
    }
    if horizon == 0 {
        return Err(NullModError::EmptyHorizon);
    }
    let approximate = match exact_limits(a) {
        Ok(r) => {
            let expected = r.upper.exact().expect("closed form");
            if expected != bound {
                return Err(NullModError::BoundMismatch { expected, got: bound });
            }
            false
        }
        Err(LimitsError::NotExactlySolvable(_)) => true,
        Err(e) => return Err(e.into()),
    };
    let mut stream = a.stream();
    let mut audit = Vec::new();
    let removed = algorithm1((0..horizon).map(|_| stream.next_bit()), &bound, Some(&mut audit));
    Ok(NullModResult {
        kept: SetExpr::patch(a.clone(), removed.clone(), Vec::new()),
        removed: SetExpr::explicit(removed.iter().copied()).expect("removed elements ascend"),
        removed_elements: removed,
        bound,
        horizon,
        approximate,
        audit,
    })
}

/// [`null_modify`] with the bound taken from the exact upper limit, or
/// from a streamed estimate at `horizon` when there is none.
pub fn null_modify_auto(a: &SetExpr, horizon: u64) -> Result<NullModResult, NullModError> {
    let bound = charge(a, 0, horizon)?.upper;
    null_modify(a, bound, horizon)
}

fn charge(e: &SetExpr, index: usize, horizon: u64) -> Result<LimitValue, NullModError> {
    limit_value(e, horizon)?.ok_or(NullModError::NoLimit { index })
}

fn tied(a: &LimitValue, b: &LimitValue) -> bool {
    if a.exact && b.exact {
        a.value == b.value
    } else {
        (crate::rational::to_f64(&a.value) - crate::rational::to_f64(&b.value)).abs() <= TIE_TOLERANCE
    }
}

fn first_one(bits: &BitVec) -> Option<u64> {
    bits.first_one().map(|i| i as u64 + 1)
}

/// Materialized chain: prefixes, charges and the indices sorted by charge.
struct Materialized {
    prefixes: Vec<BitVec>,
    values: Vec<Rational>,
    approximate: bool,
}

fn materialize(chain: &[SetExpr], horizon: u64) -> Result<Materialized, NullModError> {
    if horizon == 0 {
        return Err(NullModError::EmptyHorizon);
    }
    let charges = chain.iter().enumerate().map(|(i, e)| charge(e, i, horizon)).collect::<Result<Vec<_>, _>>()?;
    let mut order: Vec<usize> = (0..chain.len()).collect();
    order.sort_by(|&i, &j| charges[i].value.cmp(&charges[j].value));
    for w in order.windows(2) {
        if tied(&charges[w[0]], &charges[w[1]]) {
            let (first, second) = (w[0].min(w[1]), w[0].max(w[1]));
            return Err(NullModError::TiedDensities { first, second });
        }
    }
    let prefixes: Vec<BitVec> = chain.iter().map(|e| indicator_prefix(e, horizon)).collect();
    for w in order.windows(2) {
        let (lower, upper) = (w[0], w[1]);
        let outside = prefixes[lower].clone() & !prefixes[upper].clone();
        if let Some(witness) = first_one(&outside) {
            return Err(NullModError::NotAChain { lower, upper, witness });
        }
    }
    Ok(Materialized {
        prefixes,
        values: charges.iter().map(|c| c.value).collect(),
        approximate: charges.iter().any(|c| !c.exact),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsiStep {
    /// Position of C_k in the input chain.
    pub index: usize,
    /// B_k: the largest earlier set strictly below C_k, if any.
    pub below: Option<usize>,
    /// ν(C_k) − ν(B_k), the bound used for the increment.
    pub bound: Rational,
    /// F_k.
    pub removed: Vec<u64>,
}

/// The ψ construction on materialized prefixes, in the given order.
fn psi_bits(prefixes: &[BitVec], values: &[Rational]) -> (Vec<BitVec>, Vec<PsiStep>) {
    let mut images = prefixes.to_vec();
    let mut steps = Vec::with_capacity(prefixes.len());
    for k in 0..prefixes.len() {
        let below = (0..k).filter(|&j| values[j] < values[k]).max_by(|&i, &j| values[i].cmp(&values[j]));
        let (increment, floor) = match below {
            Some(b) => (images[k].clone() & !images[b].clone(), Some(values[b])),
            None => (images[k].clone(), None),
        };
        let bound = values[k] - floor.unwrap_or_else(|| Rational::from_integer(0));
        let removed = algorithm1(increment.iter().by_vals(), &bound, None);
        for (c, image) in images.iter_mut().enumerate() {
            let inside = floor.is_none_or(|f| values[c] > f) && values[c] <= values[k];
            if inside {
                for &n in &removed {
                    image.set(n as usize - 1, false);
                }
            }
        }
        steps.push(PsiStep { index: k, below, bound, removed });
    }
    (images, steps)
}

/// A chain element and its modification.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainImage {
    pub source: SetExpr,
    pub image: SetExpr,
    /// ν of the source (and of the image).
    pub charge: Rational,
    /// Elements of the source missing from the image, up to the horizon.
    pub removed: Vec<u64>,
    /// Elements of the image missing from the source, up to the horizon.
    pub added: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainMap {
    /// Images in input order.
    pub images: Vec<ChainImage>,
    /// The ψ steps, in enumeration order (the input order).
    pub steps: Vec<PsiStep>,
    pub horizon: u64,
    pub approximate: bool,
}

fn positions(bits: &BitVec) -> Vec<u64> {
    bits.iter_ones().map(|i| i as u64 + 1).collect()
}

fn images_from(chain: &[SetExpr], m: &Materialized, images: &[BitVec]) -> Vec<ChainImage> {
    chain
        .iter()
        .zip(&m.prefixes)
        .zip(images)
        .zip(&m.values)
        .map(|(((source, prefix), image), &charge)| {
            let removed = positions(&(prefix.clone() & !image.clone()));
            let added = positions(&(image.clone() & !prefix.clone()));
            ChainImage {
                source: source.clone(),
                image: SetExpr::patch(source.clone(), removed.clone(), added.clone()),
                charge,
                removed,
                added,
            }
        })
        .collect()
}

/// One-sided modification ψ of a finite chain, enumerated in the given
/// order: ψ(C) ⊆ C differs by a null set, inclusions are preserved, and
/// ν_N(ψ(C)) ≤ ν(C) for every N up to the horizon.
pub fn chain_psi(chain: &[SetExpr], horizon: u64) -> Result<ChainMap, NullModError> {
    let m = materialize(chain, horizon)?;
    let (images, steps) = psi_bits(&m.prefixes, &m.values);
    Ok(ChainMap { images: images_from(chain, &m, &images), steps, horizon, approximate: m.approximate })
}

/// Two-sided modification φ: ψ applied to the complements, complemented,
/// then ψ again. φ(C) △ C is null and strict inclusions stay strict.
pub fn chain_phi(chain: &[SetExpr], horizon: u64) -> Result<ChainMap, NullModError> {
    let m = materialize(chain, horizon)?;
    let one = Rational::from_integer(1);
    let complements: Vec<BitVec> = m.prefixes.iter().map(|p| !p.clone()).collect();
    let co_values: Vec<Rational> = m.values.iter().map(|v| one - v).collect();
    let (co_images, _) = psi_bits(&complements, &co_values);
    let outer: Vec<BitVec> = co_images.into_iter().map(|b| !b).collect();
    let (images, steps) = psi_bits(&outer, &m.values);
    Ok(ChainMap { images: images_from(chain, &m, &images), steps, horizon, approximate: m.approximate })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisjointPart {
    pub kept: SetExpr,
    pub removed: Vec<u64>,
}

/// Modifies pairwise disjoint sets in 𝓕 so that every union of the kept
/// parts satisfies ν_N ≤ ν. Works through the chain of cumulative unions;
/// parts with ν = 0 are dropped entirely.
pub fn disjoint_modify(parts: &[SetExpr], horizon: u64) -> Result<Vec<DisjointPart>, NullModError> {
    if horizon == 0 {
        return Err(NullModError::EmptyHorizon);
    }
    let prefixes: Vec<BitVec> = parts.iter().map(|e| indicator_prefix(e, horizon)).collect();
    let mut seen = BitVec::repeat(false, horizon as usize);
    for (i, p) in prefixes.iter().enumerate() {
        let overlap = seen.clone() & p.clone();
        if let Some(witness) = first_one(&overlap) {
            let first = (0..i).find(|&j| prefixes[j][witness as usize - 1]).expect("owner exists");
            return Err(NullModError::NotDisjoint { first, second: i, witness });
        }
        seen |= p.clone();
    }
    let charges = parts.iter().enumerate().map(|(i, e)| charge(e, i, horizon)).collect::<Result<Vec<_>, _>>()?;
    let zero = Rational::from_integer(0);
    let null = |c: &LimitValue| if c.exact { c.value == zero } else { crate::rational::to_f64(&c.value) <= TIE_TOLERANCE };
    let live: Vec<usize> = (0..parts.len()).filter(|&i| !null(&charges[i])).collect();

    // Cumulative chain over the parts with positive charge.
    let mut cumulative = Vec::with_capacity(live.len());
    let mut values = Vec::with_capacity(live.len());
    let mut acc = BitVec::repeat(false, horizon as usize);
    let mut total = zero;
    for &i in &live {
        acc |= prefixes[i].clone();
        total += charges[i].value;
        cumulative.push(acc.clone());
        values.push(total);
    }
    let (images, _) = psi_bits(&cumulative, &values);

    let mut out: Vec<DisjointPart> =
        prefixes.iter().map(|p| DisjointPart { kept: SetExpr::Empty, removed: positions(p) }).collect();
    let mut previous = BitVec::repeat(false, horizon as usize);
    for (slot, &i) in live.iter().enumerate() {
        let kept = images[slot].clone() & !previous.clone();
        let removed = positions(&(prefixes[i].clone() & !kept));
        out[i] = DisjointPart { kept: SetExpr::patch(parts[i].clone(), removed.clone(), Vec::new()), removed };
        previous = images[slot].clone();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::dyadic_partition;
    use crate::sets::partial_average;

    fn odds() -> SetExpr {
        SetExpr::residue(2, [1]).unwrap()
    }

    fn evens() -> SetExpr {
        SetExpr::residue(2, [0]).unwrap()
    }

    fn half() -> Rational {
        Rational::new(1, 2)
    }

    #[test]
    fn odds_lose_only_one() {
        let r = null_modify(&odds(), half(), 100_000).unwrap();
        assert_eq!(r.removed_elements, vec![1]);
        assert!(!r.approximate);
        assert!(!r.kept.member(1) && r.kept.member(3) && r.kept.member(99_999));
        assert_eq!(r.audit[..2], [AuditRecord { n: 1, kept: false, kept_count: 0 }, AuditRecord { n: 3, kept: true, kept_count: 1 }]);
    }

    #[test]
    fn conforming_sets_are_untouched() {
        assert!(null_modify(&SetExpr::All, Rational::from_integer(1), 10_000).unwrap().removed_elements.is_empty());
        assert!(null_modify(&evens(), half(), 10_000).unwrap().removed_elements.is_empty());
    }

    #[test]
    fn bound_is_checked() {
        assert_eq!(
            null_modify(&odds(), Rational::new(1, 3), 100),
            Err(NullModError::BoundMismatch { expected: half(), got: Rational::new(1, 3) })
        );
        assert!(matches!(null_modify(&odds(), Rational::from_integer(2), 100), Err(NullModError::BoundOutOfRange(_))));
    }

    #[test]
    fn audit_csv_rows() {
        let r = null_modify(&odds(), half(), 4).unwrap();
        let mut out = Vec::new();
        r.write_audit_csv(&mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "N,member,kept_or_removed,running_nu\n1,1,removed,0/1\n2,0,,0/2\n3,1,kept,1/3\n4,0,,1/4\n"
        );
    }

    #[test]
    fn approximate_bound_for_primes() {
        let r = null_modify_auto(&SetExpr::predicate("primes").unwrap(), 100_000).unwrap();
        assert!(r.approximate);
        let mut kept = r.kept.stream();
        let mut count = 0;
        for n in 1..=100_000u64 {
            count += kept.next_bit() as u64;
            assert!(!above(count, n, &r.bound));
        }
    }

    #[test]
    fn psi_on_singleton_odds() {
        let m = chain_psi(&[odds()], 10_000).unwrap();
        assert_eq!(m.images[0].removed, vec![1]);
    }

    #[test]
    fn psi_is_identity_on_multiples() {
        let chain: Vec<SetExpr> = [2, 4, 8].map(|m| SetExpr::residue(m, [0]).unwrap()).to_vec();
        let m = chain_psi(&chain, 10_000).unwrap();
        assert!(m.images.iter().all(|i| i.removed.is_empty() && i.added.is_empty()));
    }

    #[test]
    fn psi_keeps_empty_empty_and_bounds_partial_averages() {
        let chain = [SetExpr::residue(6, [1, 2, 3, 5]).unwrap(), SetExpr::Empty, odds(), SetExpr::residue(6, [1]).unwrap()];
        let m = chain_psi(&chain, 5_000).unwrap();
        assert_eq!(m.images[1].image.members_upto(5_000), Vec::<u64>::new());
        for img in &m.images {
            for n in 1..=5_000 {
                assert!(partial_average(&img.image, n) <= img.charge, "{} at {n}", img.source);
            }
        }
        // ψ(residue 6 {1}) ⊆ ψ(odds).
        for n in 1..=5_000 {
            assert!(!m.images[3].image.member(n) || m.images[2].image.member(n));
        }
    }

    #[test]
    fn chains_are_validated() {
        let bad = [evens(), odds()];
        assert!(matches!(chain_psi(&bad, 100), Err(NullModError::TiedDensities { .. })));
        let crossing = [SetExpr::residue(4, [1]).unwrap(), evens()];
        assert!(matches!(chain_psi(&crossing, 100), Err(NullModError::NotAChain { lower: 0, upper: 1, witness: 1 })));
    }

    #[test]
    fn phi_preserves_strict_inclusion() {
        let chain = [SetExpr::residue(4, [0]).unwrap(), evens()];
        let m = chain_phi(&chain, 10_000).unwrap();
        let (small, big) = (&m.images[0].image, &m.images[1].image);
        assert!((1..=10_000).all(|n| !small.member(n) || big.member(n)));
        assert!((1..=10_000).any(|n| big.member(n) && !small.member(n)));
        let ends = chain_phi(&[SetExpr::Empty, SetExpr::All], 1000).unwrap();
        assert!(ends.images[0].image.members_upto(1000).is_empty());
        assert_eq!(ends.images[1].image.members_upto(1000).len(), 1000);
    }

    #[test]
    fn disjoint_dyadic_parts_unchanged() {
        let parts = dyadic_partition(3).unwrap();
        let out = disjoint_modify(&parts, 10_000).unwrap();
        assert!(out.iter().all(|p| p.removed.is_empty()));
    }

    #[test]
    fn disjoint_evens_odds() {
        let out = disjoint_modify(&[evens(), odds()], 10_000).unwrap();
        assert!(out[0].removed.is_empty());
        assert_eq!(out[1].removed, vec![1]);
        let squares = disjoint_modify(&[SetExpr::predicate("squares").unwrap()], 1000).unwrap();
        assert_eq!(squares[0].kept, SetExpr::Empty);
        assert_eq!(squares[0].removed.len(), 31);
        assert!(matches!(
            disjoint_modify(&[evens(), SetExpr::residue(4, [0]).unwrap()], 100),
            Err(NullModError::NotDisjoint { first: 0, second: 1, witness: 4 })
        ));
    }
}
