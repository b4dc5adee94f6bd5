//! Finite Boolean algebras, ideals and quotients, monotone closure, and
//! null-equivalence of sets.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::limits::estimate::window_scan;
use crate::limits::{exact_upper, EstimateOptions, LimitsError};
use crate::nullmod::{disjoint_modify, NullModError};
use crate::rational::{to_f64, Rational};
use crate::sets::SetExpr;

/// Largest universe for [`build_algebra`].
pub const MAX_UNIVERSE: u32 = 16;

/// Carriers up to this size get exhaustive axiom checks.
pub const EXHAUSTIVE_LIMIT: usize = 256;

/// Largest carrier [`build_quotient`] will tabulate.
pub const MAX_QUOTIENT_CARRIER: usize = 4096;

pub type Element = u32;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuotientError {
    #[error("universe size {0} exceeds {MAX_UNIVERSE}")]
    UniverseTooLarge(u32),
    #[error("carrier of {0} elements is too large to tabulate")]
    CarrierTooLarge(usize),
    #[error("element {0} is not in the carrier")]
    NotInCarrier(Element),
    #[error("ideal is empty")]
    EmptyIdeal,
    #[error("ideal is not closed under join: {0} ∨ {1}")]
    JoinNotClosed(Element, Element),
    #[error("ideal is not closed under meet: {0} ∧ {1}")]
    MeetNotClosed(Element, Element),
    #[error("seed is not a subalgebra: {0}")]
    NotSubalgebra(&'static str),
    #[error("axiom fails: {law} at {witness:?}")]
    Axiom { law: &'static str, witness: Vec<Element> },
    #[error("quotient operation is not well defined: {0}")]
    NotWellDefined(&'static str),
    #[error("sets {first} and {second} overlap in a set that is not null")]
    NotNullDisjoint { first: usize, second: usize },
    #[error(transparent)]
    NullMod(#[from] NullModError),
}

#[derive(Debug, Clone, PartialEq)]
enum Backend {
    /// Subsets of {1, …, n} as bitmasks (bit i − 1 for i).
    PowerSet { n: u32 },
    Table { size: usize, join: Vec<Element>, meet: Vec<Element>, compl: Vec<Element> },
}

/// A finite Boolean algebra whose elements are `0..size()`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteAlgebra {
    backend: Backend,
    zero: Element,
    one: Element,
}

impl FiniteAlgebra {
    pub fn size(&self) -> usize {
        match &self.backend {
            Backend::PowerSet { n } => 1 << n,
            Backend::Table { size, .. } => *size,
        }
    }

    pub fn zero(&self) -> Element {
        self.zero
    }

    pub fn one(&self) -> Element {
        self.one
    }

    pub fn elements(&self) -> impl Iterator<Item = Element> {
        0..self.size() as Element
    }

    /// Universe size for power-set algebras.
    pub fn universe(&self) -> Option<u32> {
        match self.backend {
            Backend::PowerSet { n } => Some(n),
            Backend::Table { .. } => None,
        }
    }

    pub fn join(&self, p: Element, q: Element) -> Element {
        match &self.backend {
            Backend::PowerSet { .. } => p | q,
            Backend::Table { size, join, .. } => join[p as usize * size + q as usize],
        }
    }

    pub fn meet(&self, p: Element, q: Element) -> Element {
        match &self.backend {
            Backend::PowerSet { .. } => p & q,
            Backend::Table { size, meet, .. } => meet[p as usize * size + q as usize],
        }
    }

    pub fn compl(&self, p: Element) -> Element {
        match &self.backend {
            Backend::PowerSet { .. } => !p & self.one,
            Backend::Table { compl, .. } => compl[p as usize],
        }
    }

    /// p − q = p ∧ q′.
    pub fn minus(&self, p: Element, q: Element) -> Element {
        self.meet(p, self.compl(q))
    }

    /// p + q = (p ∧ q′) ∨ (p′ ∧ q).
    pub fn plus(&self, p: Element, q: Element) -> Element {
        self.join(self.minus(p, q), self.minus(q, p))
    }

    pub fn leq(&self, p: Element, q: Element) -> bool {
        self.join(p, q) == q
    }

    fn contains(&self, p: Element) -> Result<(), QuotientError> {
        if (p as usize) < self.size() {
            Ok(())
        } else {
            Err(QuotientError::NotInCarrier(p))
        }
    }
}

/// Bitmask of a subset of {1, …, n}.
pub fn mask_of(subset: &[u32]) -> Element {
    subset.iter().fold(0, |m, &i| m | 1 << (i - 1))
}

/// The subset of {1, …, 32} encoded by a bitmask.
pub fn subset_of(mask: Element) -> Vec<u32> {
    (0..32).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect()
}

/// Outcome of [`check_axioms`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AxiomReport {
    /// Every tuple of the carrier was checked.
    pub exhaustive: bool,
    pub tuples_checked: u64,
}

/// Checks the identity, complement, commutative and distributive laws.
///
/// Exhaustive up to [`EXHAUSTIVE_LIMIT`] elements. Larger carriers are
/// checked with one argument ranging over the whole carrier and the
/// others over the atoms, 0 and 1.
pub fn check_axioms(alg: &FiniteAlgebra) -> Result<AxiomReport, QuotientError> {
    let all: Vec<Element> = alg.elements().collect();
    let exhaustive = all.len() <= EXHAUSTIVE_LIMIT;
    let others: Vec<Element> = if exhaustive { all.clone() } else { basis(alg) };
    let fail = |law, witness: &[Element]| Err(QuotientError::Axiom { law, witness: witness.to_vec() });
    let (zero, one) = (alg.zero(), alg.one());
    let mut tuples = 0u64;
    for &a in &all {
        if alg.join(a, zero) != a {
            return fail("a ∨ 0 = a", &[a]);
        }
        if alg.meet(a, one) != a {
            return fail("a ∧ 1 = a", &[a]);
        }
        if alg.join(a, alg.compl(a)) != one {
            return fail("a ∨ a′ = 1", &[a]);
        }
        if alg.meet(a, alg.compl(a)) != zero {
            return fail("a ∧ a′ = 0", &[a]);
        }
        for &b in &others {
            if alg.join(a, b) != alg.join(b, a) {
                return fail("a ∨ b = b ∨ a", &[a, b]);
            }
            if alg.meet(a, b) != alg.meet(b, a) {
                return fail("a ∧ b = b ∧ a", &[a, b]);
            }
            for &c in &others {
                tuples += 1;
                if alg.join(a, alg.meet(b, c)) != alg.meet(alg.join(a, b), alg.join(a, c)) {
                    return fail("a ∨ (b ∧ c) = (a ∨ b) ∧ (a ∨ c)", &[a, b, c]);
                }
                if alg.meet(a, alg.join(b, c)) != alg.join(alg.meet(a, b), alg.meet(a, c)) {
                    return fail("a ∧ (b ∨ c) = (a ∧ b) ∨ (a ∧ c)", &[a, b, c]);
                }
            }
        }
    }
    Ok(AxiomReport { exhaustive, tuples_checked: tuples })
}

/// Atoms together with 0 and 1.
fn basis(alg: &FiniteAlgebra) -> Vec<Element> {
    let mut out = vec![alg.zero(), alg.one()];
    out.extend(alg.elements().filter(|&p| p != alg.zero() && alg.elements().all(|q| q == alg.zero() || q == p || !alg.leq(q, p))));
    out
}

/// The power-set algebra on {1, …, n}.
pub fn build_algebra(n: u32) -> Result<FiniteAlgebra, QuotientError> {
    if n > MAX_UNIVERSE {
        return Err(QuotientError::UniverseTooLarge(n));
    }
    let alg = FiniteAlgebra { backend: Backend::PowerSet { n }, zero: 0, one: ((1u64 << n) - 1) as Element };
    if alg.size() <= EXHAUSTIVE_LIMIT {
        check_axioms(&alg)?;
    }
    Ok(alg)
}

/// A Boolean ideal: nonempty, closed under joins, and closed under meets
/// with anything.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ideal {
    members: BTreeSet<Element>,
}

impl Ideal {
    pub fn new(alg: &FiniteAlgebra, members: impl IntoIterator<Item = Element>) -> Result<Self, QuotientError> {
        let members: BTreeSet<Element> = members.into_iter().collect();
        if members.is_empty() {
            return Err(QuotientError::EmptyIdeal);
        }
        for &p in &members {
            alg.contains(p)?;
        }
        for &p in &members {
            for &q in &members {
                if !members.contains(&alg.join(p, q)) {
                    return Err(QuotientError::JoinNotClosed(p, q));
                }
            }
            for q in alg.elements() {
                if !members.contains(&alg.meet(p, q)) {
                    return Err(QuotientError::MeetNotClosed(p, q));
                }
            }
        }
        Ok(Ideal { members })
    }

    /// The ideal generated by one element: everything below it.
    pub fn principal(alg: &FiniteAlgebra, top: Element) -> Result<Self, QuotientError> {
        alg.contains(top)?;
        Ideal::new(alg, alg.elements().filter(|&p| alg.leq(p, top)))
    }

    pub fn contains(&self, p: Element) -> bool {
        self.members.contains(&p)
    }

    pub fn members(&self) -> impl Iterator<Item = Element> + '_ {
        self.members.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// 𝒜/𝓜 with the class of every element.
#[derive(Debug, Clone, PartialEq)]
pub struct Quotient {
    pub algebra: FiniteAlgebra,
    /// `class_of[p]` is the class of carrier element p.
    pub class_of: Vec<Element>,
    /// Members of each class, smallest first; the first is the representative.
    pub classes: Vec<Vec<Element>>,
    pub axioms: AxiomReport,
}

/// Quotient by p ∼ q ⟺ p + q ∈ 𝓜, with operations induced from
/// representatives and checked to be independent of them.
pub fn build_quotient(alg: &FiniteAlgebra, ideal: &Ideal) -> Result<Quotient, QuotientError> {
    let size = alg.size();
    if size > MAX_QUOTIENT_CARRIER {
        return Err(QuotientError::CarrierTooLarge(size));
    }
    let mut class_of = vec![Element::MAX; size];
    let mut classes: Vec<Vec<Element>> = Vec::new();
    for p in alg.elements() {
        if class_of[p as usize] != Element::MAX {
            continue;
        }
        let id = classes.len() as Element;
        // q ∼ p exactly when q = p + m for some m in the ideal.
        let mut members: Vec<Element> = ideal.members().map(|m| alg.plus(p, m)).collect();
        members.sort_unstable();
        members.dedup();
        for &q in &members {
            class_of[q as usize] = id;
        }
        classes.push(members);
    }
    let k = classes.len();
    let rep = |c: Element| classes[c as usize][0];
    let mut join = vec![0; k * k];
    let mut meet = vec![0; k * k];
    for a in 0..k as Element {
        for b in 0..k as Element {
            join[a as usize * k + b as usize] = class_of[alg.join(rep(a), rep(b)) as usize];
            meet[a as usize * k + b as usize] = class_of[alg.meet(rep(a), rep(b)) as usize];
        }
    }
    let compl: Vec<Element> = (0..k as Element).map(|a| class_of[alg.compl(rep(a)) as usize]).collect();
    for p in alg.elements() {
        let cp = class_of[p as usize];
        if class_of[alg.compl(p) as usize] != compl[cp as usize] {
            return Err(QuotientError::NotWellDefined("complement"));
        }
        for q in alg.elements() {
            let idx = cp as usize * k + class_of[q as usize] as usize;
            if class_of[alg.join(p, q) as usize] != join[idx] {
                return Err(QuotientError::NotWellDefined("join"));
            }
            if class_of[alg.meet(p, q) as usize] != meet[idx] {
                return Err(QuotientError::NotWellDefined("meet"));
            }
        }
    }
    let algebra = FiniteAlgebra {
        backend: Backend::Table { size: k, join, meet, compl },
        zero: class_of[alg.zero() as usize],
        one: class_of[alg.one() as usize],
    };
    let axioms = check_axioms(&algebra)?;
    Ok(Quotient { algebra, class_of, classes, axioms })
}

/// Closure of `gens` ∪ {0, 1} under join, meet and complement.
pub fn generated_subalgebra(alg: &FiniteAlgebra, gens: &[Element]) -> Result<Vec<Element>, QuotientError> {
    for &g in gens {
        alg.contains(g)?;
    }
    let mut set: BTreeSet<Element> = gens.iter().copied().chain([alg.zero(), alg.one()]).collect();
    let mut frontier: Vec<Element> = set.iter().copied().collect();
    while let Some(p) = frontier.pop() {
        let mut fresh = vec![alg.compl(p)];
        for &q in &set {
            fresh.push(alg.join(p, q));
            fresh.push(alg.meet(p, q));
        }
        for r in fresh {
            if set.insert(r) {
                frontier.push(r);
            }
        }
    }
    Ok(set.into_iter().collect())
}

pub fn is_subalgebra(alg: &FiniteAlgebra, family: &BTreeSet<Element>) -> Result<(), QuotientError> {
    if !family.contains(&alg.zero()) || !family.contains(&alg.one()) {
        return Err(QuotientError::NotSubalgebra("missing 0 or 1"));
    }
    for &p in family {
        if !family.contains(&alg.compl(p)) {
            return Err(QuotientError::NotSubalgebra("not closed under complement"));
        }
        for &q in family {
            if !family.contains(&alg.join(p, q)) {
                return Err(QuotientError::NotSubalgebra("not closed under join"));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MonotoneClosure {
    /// Least family containing the seed and closed under suprema of
    /// non-decreasing and infima of non-increasing sequences.
    pub closure: Vec<Element>,
    /// Brute-force subalgebra generated by the seed.
    pub generated: Vec<Element>,
}

impl MonotoneClosure {
    pub fn agrees(&self) -> bool {
        self.closure == self.generated
    }
}

/// Monotone class generated by a subalgebra, by fixpoint iteration,
/// alongside the subalgebra it generates.
///
/// In a finite algebra a monotone sequence is eventually constant, so
/// each round adds the sup and inf of every comparable pair.
pub fn monotone_closure(alg: &FiniteAlgebra, seed: &[Element]) -> Result<MonotoneClosure, QuotientError> {
    for &p in seed {
        alg.contains(p)?;
    }
    let mut family: BTreeSet<Element> = seed.iter().copied().collect();
    is_subalgebra(alg, &family)?;
    loop {
        let mut fresh = Vec::new();
        for &p in &family {
            for &q in &family {
                if alg.leq(p, q) {
                    fresh.extend([alg.join(p, q), alg.meet(p, q)].into_iter().filter(|r| !family.contains(r)));
                }
            }
        }
        if fresh.is_empty() {
            break;
        }
        family.extend(fresh);
    }
    let generated = generated_subalgebra(alg, seed)?;
    Ok(MonotoneClosure { closure: family.into_iter().collect(), generated })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Equivalence {
    Equivalent,
    Distinct,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum EquivalenceEvidence {
    /// Exact ν⁺ of the symmetric difference.
    Exact { upper: String },
    /// Streamed extremes of ν_N(A △ B) over the trailing window.
    Streamed { upper: f64, lower: f64, horizon: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceVerdict {
    pub value: Equivalence,
    pub evidence: EquivalenceEvidence,
}

/// A streamed minimum must keep this fraction of its value from two
/// doublings earlier to count as persistent.
pub const PERSISTENCE_RATIO: f64 = 0.95;

/// Whether A △ B is null. Only exact evidence yields `Equivalent`.
/// `Distinct` also follows from streamed evidence: ν_N(A △ B) stays above
/// tolerance over (H/2, H] and has not decayed since (H/8, H/4].
pub fn null_equivalent(a: &SetExpr, b: &SetExpr, options: &EstimateOptions) -> Result<EquivalenceVerdict, LimitsError> {
    let d = SetExpr::sym_diff(a.clone(), b.clone());
    match exact_upper(&d) {
        Ok(upper) => Ok(EquivalenceVerdict {
            value: if upper == Rational::from_integer(0) { Equivalence::Equivalent } else { Equivalence::Distinct },
            evidence: EquivalenceEvidence::Exact { upper: upper.to_string() },
        }),
        Err(LimitsError::NotExactlySolvable(_)) => {
            options.validate()?;
            let scan = window_scan(&d, options.horizon, options.window);
            let (upper, lower) = (to_f64(&scan.max), to_f64(&scan.min));
            let [recent, _, earlier] = scan.minima;
            let persistent = recent > options.tolerance && recent >= PERSISTENCE_RATIO * earlier;
            let value = if persistent { Equivalence::Distinct } else { Equivalence::Unknown };
            Ok(EquivalenceVerdict { value, evidence: EquivalenceEvidence::Streamed { upper, lower, horizon: options.horizon } })
        }
        Err(e) => Err(e),
    }
}

/// Pairwise disjoint representatives for classes with null pairwise
/// intersections: A_k minus the earlier sets, then null-modified so that
/// every finite union conforms.
pub fn disjoint_representatives(classes: &[SetExpr], horizon: u64) -> Result<Vec<SetExpr>, QuotientError> {
    let options = EstimateOptions { horizon: horizon.max(crate::limits::MIN_HORIZON), ..Default::default() };
    for i in 0..classes.len() {
        for j in i + 1..classes.len() {
            let overlap = SetExpr::inter(classes[i].clone(), classes[j].clone());
            let verdict = null_equivalent(&overlap, &SetExpr::Empty, &options).map_err(NullModError::from)?;
            if verdict.value == Equivalence::Distinct {
                return Err(QuotientError::NotNullDisjoint { first: i, second: j });
            }
        }
    }
    let disjoint: Vec<SetExpr> = classes
        .iter()
        .enumerate()
        .map(|(k, a)| match k {
            0 => a.clone(),
            _ => SetExpr::diff(a.clone(), SetExpr::union_all(classes[..k].iter().cloned())),
        })
        .collect();
    Ok(disjoint_modify(&disjoint, horizon)?.into_iter().map(|p| p.kept).collect())
}
