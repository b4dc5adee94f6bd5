//! Finite chains of sets under inclusion: verification, closures, the
//! pseudo-metric d_ν, uniform convergence, dense and maximal extensions.

use std::thread;

use bitvec::vec::BitVec;
use serde::Serialize;
use thiserror::Error;

use crate::constructions::{midpoint_set, ConstructionError};
use crate::limits::{estimate_limits, exact_upper, limit_value, Density, EstimateOptions, LimitsError};
use crate::rational::{to_f64, Rational};
use crate::sets::pattern::ResiduePattern;
use crate::sets::{canonicalize, indicator_prefix, SetExpr};

/// Largest universe accepted by [`maximal_extension`].
pub const MAX_UNIVERSE: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChainError {
    #[error("sets {first} and {second} are incomparable: {first_only} lies only in the first, {second_only} only in the second")]
    Incomparable { first: usize, second: usize, first_only: u64, second_only: u64 },
    #[error("sets {first} and {second} agree up to {horizon}")]
    Duplicate { first: usize, second: usize, horizon: u64 },
    #[error("set {index} has no limit")]
    NotInF { index: usize },
    #[error("set {index} is still {epsilon} away from its limit at N = {n}")]
    NotUniform { index: usize, n: u64, epsilon: f64 },
    #[error("epsilon must be positive")]
    InvalidEpsilon,
    #[error("universe {0} is outside 1..={MAX_UNIVERSE}")]
    UniverseTooLarge(u64),
    #[error("empty chain")]
    Empty,
    #[error("maximal extension check failed: {0}")]
    Construction(&'static str),
    #[error(transparent)]
    Midpoint(#[from] ConstructionError),
    #[error(transparent)]
    Limits(#[from] LimitsError),
}

/// Why one chain element lies inside the next.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Evidence {
    /// The lower set is empty.
    EmptyBelow,
    /// The upper set is everything.
    AllAbove,
    /// Both are residue patterns and the lower one refines the upper.
    ResidueRefinement,
    /// The lower set is a finite list of members of the upper set.
    ExplicitContainment,
    /// The upper set was built from the lower one (a midpoint or a
    /// finite extension).
    Construction,
    /// Containment checked on [1, horizon].
    Prefix { horizon: u64 },
}

/// Sets ordered by inclusion, smallest first, with evidence for each
/// adjacent pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    elements: Vec<SetExpr>,
    evidence: Vec<Evidence>,
}

impl Chain {
    pub fn elements(&self) -> &[SetExpr] {
        &self.elements
    }

    /// `evidence()[i]` supports `elements()[i] ⊆ elements()[i + 1]`.
    pub fn evidence(&self) -> &[Evidence] {
        &self.evidence
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Union of the elements at `indices`: the largest of them.
    pub fn union_of(&self, indices: &[usize]) -> Option<&SetExpr> {
        indices.iter().max().map(|&i| &self.elements[i])
    }

    /// Intersection of the elements at `indices`: the smallest of them.
    pub fn intersection_of(&self, indices: &[usize]) -> Option<&SetExpr> {
        indices.iter().min().map(|&i| &self.elements[i])
    }
}

fn pure_pattern(e: &SetExpr) -> Option<ResiduePattern> {
    match canonicalize(e) {
        SetExpr::Empty => Some(ResiduePattern::constant(false)),
        SetExpr::All => Some(ResiduePattern::constant(true)),
        SetExpr::Residue { modulus, residues } => ResiduePattern::new(modulus, &residues).ok(),
        _ => None,
    }
}

/// Structural reason for `a ⊆ b`, if one is visible.
fn structural_evidence(a: &SetExpr, b: &SetExpr) -> Option<Evidence> {
    if *a == SetExpr::Empty {
        return Some(Evidence::EmptyBelow);
    }
    if *b == SetExpr::All {
        return Some(Evidence::AllAbove);
    }
    if let SetExpr::Explicit(items) = a {
        return items.iter().all(|&n| b.member(n)).then_some(Evidence::ExplicitContainment);
    }
    let (p, q) = (pure_pattern(a)?, pure_pattern(b)?);
    p.diff(&q).ok()?.is_empty().then_some(Evidence::ResidueRefinement)
}

fn first_one(bits: &BitVec) -> Option<u64> {
    bits.first_one().map(|i| i as u64 + 1)
}

/// Orders `elements` by inclusion, checked on [1, horizon].
///
/// Sets are sorted by their count up to the horizon, then each adjacent
/// pair is checked for containment. Equal prefixes are rejected as
/// duplicates.
pub fn verify_chain(elements: &[SetExpr], horizon: u64) -> Result<Chain, ChainError> {
    if elements.is_empty() {
        return Err(ChainError::Empty);
    }
    let prefixes: Vec<BitVec> = elements.iter().map(|e| indicator_prefix(e, horizon)).collect();
    let mut order: Vec<usize> = (0..elements.len()).collect();
    order.sort_by_key(|&i| prefixes[i].count_ones());
    let mut evidence = Vec::with_capacity(order.len().saturating_sub(1));
    for w in order.windows(2) {
        let (i, j) = (w[0], w[1]);
        if prefixes[i] == prefixes[j] {
            return Err(ChainError::Duplicate { first: i.min(j), second: i.max(j), horizon });
        }
        let only_i = prefixes[i].clone() & !prefixes[j].clone();
        if let Some(first_only) = first_one(&only_i) {
            let second_only = first_one(&(prefixes[j].clone() & !prefixes[i].clone())).expect("equal counts differ somewhere");
            return Err(ChainError::Incomparable { first: i, second: j, first_only, second_only });
        }
        evidence.push(structural_evidence(&elements[i], &elements[j]).unwrap_or(Evidence::Prefix { horizon }));
    }
    Ok(Chain { elements: order.iter().map(|&i| elements[i].clone()).collect(), evidence })
}

/// The chains T∪, T∩ and T* generated by unions, intersections, and both.
#[derive(Debug, Clone, PartialEq)]
pub struct Closures {
    pub union: Chain,
    pub intersection: Chain,
    pub both: Chain,
}

/// Closures of a finite chain. Every union or intersection of a
/// subfamily is its largest or smallest member, so all three closures
/// coincide with the chain.
pub fn closures(chain: &Chain) -> Closures {
    let union = generated(chain, |c, i, j| c.union_of(&[i, j]).cloned());
    let intersection = generated(chain, |c, i, j| c.intersection_of(&[i, j]).cloned());
    Closures { union, intersection, both: chain.clone() }
}

/// Closes the chain under a binary operation; pairs suffice because the
/// results are again elements.
fn generated(chain: &Chain, op: impl Fn(&Chain, usize, usize) -> Option<SetExpr>) -> Chain {
    let n = chain.len();
    let mut seen = vec![false; n];
    for i in 0..n {
        for j in i..n {
            let e = op(chain, i, j).expect("nonempty family");
            let at = chain.elements.iter().position(|x| *x == e).expect("closure of a finite chain adds nothing");
            seen[at] = true;
        }
    }
    assert!(seen.iter().all(|&s| s));
    chain.clone()
}

/// d_ν(A, B) = ν⁺(A △ B): exact when the symmetric difference has a
/// closed form, otherwise a streamed estimate at `options.horizon`.
pub fn pseudo_metric(a: &SetExpr, b: &SetExpr, options: &EstimateOptions) -> Result<Density, LimitsError> {
    let d = SetExpr::sym_diff(a.clone(), b.clone());
    match exact_upper(&d) {
        Ok(v) => Ok(Density::Exact(v)),
        Err(LimitsError::NotExactlySolvable(_)) => Ok(estimate_limits(&d, options)?.upper),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniformityCertificate {
    pub epsilon: f64,
    /// |ν_N(A) − ν(A)| < ε for every element and N_ε < N ≤ horizon.
    #[serde(rename = "N_epsilon")]
    pub n_epsilon: u64,
    pub horizon: u64,
    /// Largest deviation past N_ε, per element.
    pub deviations: Vec<f64>,
    /// True when some limit was estimated rather than exact.
    pub approximate: bool,
}

/// Last N ≤ horizon with |ν_N − ν| ≥ ε (0 if none).
fn last_violation(e: &SetExpr, nu: f64, epsilon: f64, horizon: u64) -> u64 {
    let mut bits = e.stream();
    let mut count = 0u64;
    let mut last = 0;
    for n in 1..=horizon {
        count += bits.next_bit() as u64;
        if (count as f64 / n as f64 - nu).abs() >= epsilon {
            last = n;
        }
    }
    last
}

/// Least N_ε with every element within ε of its limit on (N_ε, horizon].
pub fn uniformity_check(chain: &Chain, epsilon: f64, horizon: u64) -> Result<UniformityCertificate, ChainError> {
    if !(epsilon > 0.0) {
        return Err(ChainError::InvalidEpsilon);
    }
    let mut limits = Vec::with_capacity(chain.len());
    for (index, e) in chain.elements().iter().enumerate() {
        limits.push(limit_value(e, horizon.max(crate::limits::MIN_HORIZON))?.ok_or(ChainError::NotInF { index })?);
    }
    let lasts: Vec<u64> = thread::scope(|s| {
        let handles: Vec<_> = chain
            .elements()
            .iter()
            .zip(&limits)
            .map(|(e, l)| s.spawn(move || last_violation(e, to_f64(&l.value), epsilon, horizon)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("scan thread")).collect()
    });
    let (worst, &last) = lasts.iter().enumerate().max_by_key(|&(_, last)| *last).expect("nonempty chain");
    if last == horizon {
        return Err(ChainError::NotUniform { index: worst, n: horizon, epsilon });
    }
    let n_epsilon = last.max(1);
    let deviations = thread::scope(|s| {
        let handles: Vec<_> = chain
            .elements()
            .iter()
            .zip(&limits)
            .map(|(e, l)| s.spawn(move || tail_deviation(e, to_f64(&l.value), n_epsilon, horizon)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("scan thread")).collect()
    });
    Ok(UniformityCertificate { epsilon, n_epsilon, horizon, deviations, approximate: limits.iter().any(|l| !l.exact) })
}

fn tail_deviation(e: &SetExpr, nu: f64, after: u64, horizon: u64) -> f64 {
    let mut bits = e.stream();
    let mut count = 0u64;
    let mut worst = 0.0f64;
    for n in 1..=horizon {
        count += bits.next_bit() as u64;
        if n > after {
            worst = worst.max((count as f64 / n as f64 - nu).abs());
        }
    }
    worst
}

fn exact_values(chain: &Chain, horizon: u64) -> Result<Vec<Rational>, ChainError> {
    chain
        .elements()
        .iter()
        .enumerate()
        .map(|(index, e)| Ok(limit_value(e, horizon)?.ok_or(ChainError::NotInF { index })?.value))
        .collect()
}

/// Horizon used when a chain operation needs a streamed limit.
const ESTIMATE_HORIZON: u64 = 1_000_000;

/// Adds ∅ and ℕ if absent, then for j = 1..=k inserts a midpoint set into
/// every ν-gap of width at least 2^{−j}, widest first and by lower end
/// on ties. Afterwards no gap is wider than 2^{−k}.
pub fn dense_extension(chain: &Chain, k: u32) -> Result<Chain, ChainError> {
    let mut elements = chain.elements.clone();
    let mut evidence = chain.evidence.clone();
    if elements.first().map(canonicalize) != Some(SetExpr::Empty) {
        elements.insert(0, SetExpr::Empty);
        evidence.insert(0, Evidence::EmptyBelow);
    }
    if elements.last().map(canonicalize) != Some(SetExpr::All) {
        elements.push(SetExpr::All);
        evidence.push(Evidence::AllAbove);
    }
    let mut extended = Chain { elements, evidence };
    let mut values = exact_values(&extended, ESTIMATE_HORIZON)?;
    for j in 1..=k {
        let threshold = Rational::new(1, 1i128 << j);
        let mut gaps: Vec<usize> = (0..values.len() - 1).filter(|&i| values[i + 1] - values[i] >= threshold).collect();
        gaps.sort_by(|&a, &b| (values[b + 1] - values[b]).cmp(&(values[a + 1] - values[a])).then(values[a].cmp(&values[b])));
        let mut inserts: Vec<(usize, SetExpr, Rational)> = Vec::with_capacity(gaps.len());
        for i in gaps {
            let (lower, upper) = (&extended.elements[i], &extended.elements[i + 1]);
            let mid = midpoint_set(lower.clone(), upper.clone())?;
            inserts.push((i, mid, (values[i] + values[i + 1]) / Rational::from_integer(2)));
        }
        // Insert from the right so earlier indices stay valid.
        inserts.sort_by_key(|(i, _, _)| std::cmp::Reverse(*i));
        for (i, mid, v) in inserts {
            extended.elements.insert(i + 1, mid);
            extended.evidence[i] = Evidence::Construction;
            extended.evidence.insert(i + 1, Evidence::Construction);
            values.insert(i + 1, v);
        }
    }
    Ok(extended)
}

/// Limits of the chain elements in order, exact where possible.
pub fn chain_values(chain: &Chain) -> Result<Vec<Rational>, ChainError> {
    exact_values(chain, ESTIMATE_HORIZON)
}

/// Smallest subchain that ε-sandwiches every element: each element lies
/// between two selected sets whose limits differ by less than ε.
///
/// Greedy sweep over the sorted limits: from each selected set, jump to
/// the farthest set still within ε, or to the next one if none is.
pub fn skeleton(chain: &Chain, epsilon: Rational) -> Result<Chain, ChainError> {
    if epsilon <= Rational::from_integer(0) {
        return Err(ChainError::InvalidEpsilon);
    }
    let values = chain_values(chain)?;
    let picks = skeleton_indices(&values, &epsilon);
    let evidence = picks.windows(2).map(|w| span_evidence(chain, w[0], w[1])).collect();
    Ok(Chain { elements: picks.iter().map(|&i| chain.elements[i].clone()).collect(), evidence })
}

/// Evidence for `elements[i] ⊆ elements[j]` from the pairs in between.
fn span_evidence(chain: &Chain, i: usize, j: usize) -> Evidence {
    let span = &chain.evidence[i..j];
    if let [single] = span {
        return *single;
    }
    if let Some(e) = structural_evidence(&chain.elements[i], &chain.elements[j]) {
        return e;
    }
    let prefix = span
        .iter()
        .filter_map(|e| match e {
            Evidence::Prefix { horizon } => Some(*horizon),
            _ => None,
        })
        .min();
    prefix.map_or(Evidence::Construction, |horizon| Evidence::Prefix { horizon })
}

pub fn skeleton_indices(values: &[Rational], epsilon: &Rational) -> Vec<usize> {
    let mut picks = vec![0];
    let mut at = 0;
    while at + 1 < values.len() {
        let reach = (at + 1..values.len()).take_while(|&j| values[j] - values[at] < *epsilon).last();
        at = reach.unwrap_or(at + 1);
        picks.push(at);
    }
    picks
}

/// A maximal chain in the power set of {1, …, universe}.
#[derive(Debug, Clone, PartialEq)]
pub struct MaximalChain {
    pub chain: Chain,
    /// The distinct blocks D_k = C_k \ B_k, which partition the universe.
    pub blocks: Vec<Vec<u64>>,
}

/// Extends the chain, restricted to {1, …, universe}, to a maximal chain
/// there: for each k, with B_k the largest element missing k and C_k the
/// smallest containing it, inserts B_k plus the first N elements of
/// C_k \ B_k for each N. The result has one set of every size.
pub fn maximal_extension(chain: &Chain, universe: u64) -> Result<MaximalChain, ChainError> {
    if universe == 0 || universe > MAX_UNIVERSE {
        return Err(ChainError::UniverseTooLarge(universe));
    }
    let u = universe as usize;
    let mut sets: Vec<BitVec> = chain.elements().iter().map(|e| indicator_prefix(e, universe)).collect();
    sets.insert(0, BitVec::repeat(false, u));
    sets.push(BitVec::repeat(true, u));
    sets.dedup();
    if sets.windows(2).any(|w| (w[0].clone() & !w[1].clone()).any()) {
        return Err(ChainError::Construction("restriction is not a chain"));
    }

    let mut blocks: Vec<Vec<u64>> = Vec::new();
    let mut inserted: Vec<BitVec> = Vec::new();
    let mut block_of = vec![usize::MAX; u];
    for k in 0..u {
        // Sets are sorted, so B_k and C_k are neighbours.
        let c = sets.iter().position(|s| s[k]).expect("the universe contains k");
        let b = c - 1;
        let d: Vec<usize> = (0..u).filter(|&i| sets[c][i] && !sets[b][i]).collect();
        if block_of[k] != usize::MAX {
            if blocks[block_of[k]] != d.iter().map(|&i| i as u64 + 1).collect::<Vec<_>>() {
                return Err(ChainError::Construction("blocks of k and k' in D_k differ"));
            }
            continue;
        }
        for &i in &d {
            block_of[i] = blocks.len();
        }
        blocks.push(d.iter().map(|&i| i as u64 + 1).collect());
        let mut grow = sets[b].clone();
        for &i in &d[..d.len() - 1] {
            grow.set(i, true);
            inserted.push(grow.clone());
        }
    }
    sets.extend(inserted);
    sets.sort_by_key(|s| s.count_ones());
    for w in sets.windows(2) {
        let new = w[1].clone() & !w[0].clone();
        if (w[0].clone() & !w[1].clone()).any() || new.count_ones() != 1 {
            return Err(ChainError::Construction("result is not saturated"));
        }
    }
    let elements: Vec<SetExpr> =
        sets.iter().map(|s| SetExpr::explicit(s.iter_ones().map(|i| i as u64 + 1)).expect("ascending")).collect();
    let evidence = vec![Evidence::ExplicitContainment; elements.len() - 1];
    Ok(MaximalChain { chain: Chain { elements, evidence }, blocks })
}
