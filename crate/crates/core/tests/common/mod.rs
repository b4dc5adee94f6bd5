//! Random exact-fragment sets with an independent membership and density
//! oracle. The oracle never calls into the library's reducer: densities come
//! from counting the eventually periodic part over one full period.

#![allow(dead_code)]

use std::collections::BTreeSet;

use cesaro::{Rational, SetExpr};
use cesaro::sets::ZSpec;
use num_integer::Integer;
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::TestRunner;

/// A set built from residue classes and null atoms.
#[derive(Debug, Clone)]
pub enum Tree {
    Empty,
    All,
    Residue(u64, Vec<u64>),
    Explicit(Vec<u64>),
    Squares,
    Pow2,
    Union(Box<Tree>, Box<Tree>),
    Inter(Box<Tree>, Box<Tree>),
    Diff(Box<Tree>, Box<Tree>),
    Compl(Box<Tree>),
    Dilate(u64, Box<Tree>),
    Shift(u64, Box<Tree>),
}

fn is_square(n: u64) -> bool {
    let r = (n as f64).sqrt() as u64;
    (r.saturating_sub(1)..=r + 1).any(|x| x * x == n)
}

impl Tree {
    pub fn expr(&self) -> SetExpr {
        match self {
            Tree::Empty => SetExpr::Empty,
            Tree::All => SetExpr::All,
            Tree::Residue(m, r) => SetExpr::residue(*m, r.iter().copied()).unwrap(),
            Tree::Explicit(v) => SetExpr::explicit_from_unsorted(v.iter().copied()),
            Tree::Squares => SetExpr::predicate("squares").unwrap(),
            Tree::Pow2 => SetExpr::predicate("pow2").unwrap(),
            Tree::Union(a, b) => SetExpr::union(a.expr(), b.expr()),
            Tree::Inter(a, b) => SetExpr::inter(a.expr(), b.expr()),
            Tree::Diff(a, b) => SetExpr::diff(a.expr(), b.expr()),
            Tree::Compl(a) => SetExpr::compl(a.expr()),
            Tree::Dilate(k, a) => SetExpr::dilate(*k, a.expr()).unwrap(),
            Tree::Shift(k, a) => SetExpr::shift(*k, a.expr()),
        }
    }

    /// Membership computed directly from the definitions.
    pub fn member(&self, n: u64) -> bool {
        self.eval(n, true)
    }

    /// Membership with every null atom replaced by ∅: periodic in n.
    fn skeleton(&self, n: u64) -> bool {
        self.eval(n, false)
    }

    fn eval(&self, n: u64, nulls: bool) -> bool {
        match self {
            Tree::Empty => false,
            Tree::All => true,
            Tree::Residue(m, r) => r.contains(&(n % m)),
            Tree::Explicit(v) => nulls && v.contains(&n),
            Tree::Squares => nulls && is_square(n),
            Tree::Pow2 => nulls && n >= 2 && n.is_power_of_two(),
            Tree::Union(a, b) => a.eval(n, nulls) || b.eval(n, nulls),
            Tree::Inter(a, b) => a.eval(n, nulls) && b.eval(n, nulls),
            Tree::Diff(a, b) => a.eval(n, nulls) && !b.eval(n, nulls),
            Tree::Compl(a) => !a.eval(n, nulls),
            Tree::Dilate(k, a) => n % k == 0 && a.eval(n / k, nulls),
            Tree::Shift(k, a) => a.eval(n + k, nulls),
        }
    }

    pub fn period(&self) -> u64 {
        match self {
            Tree::Residue(m, _) => *m,
            Tree::Union(a, b) | Tree::Inter(a, b) | Tree::Diff(a, b) => a.period().lcm(&b.period()),
            Tree::Compl(a) | Tree::Shift(_, a) => a.period(),
            Tree::Dilate(k, a) => k * a.period(),
            _ => 1,
        }
    }

    /// ν, by counting the periodic skeleton over one period.
    pub fn density(&self) -> Rational {
        let p = self.period();
        let count = (1..=p).filter(|&n| self.skeleton(n)).count();
        Rational::new(count as i128, p as i128)
    }

    /// Whether the tree has no periodic part at all (ν = 0 by construction).
    pub fn is_null(&self) -> bool {
        let p = self.period();
        (1..=p).all(|n| !self.skeleton(n))
    }
}

fn residue() -> impl Strategy<Value = Tree> {
    prop::sample::select(vec![2u64, 3, 4, 5, 6, 8, 9, 10, 12]).prop_flat_map(|m| {
        prop::collection::btree_set(0..m, 0..=m as usize).prop_map(move |r: BTreeSet<u64>| Tree::Residue(m, r.into_iter().collect()))
    })
}

/// Null sets only.
pub fn null_tree() -> impl Strategy<Value = Tree> {
    let leaf = prop_oneof![
        Just(Tree::Empty),
        Just(Tree::Squares),
        Just(Tree::Pow2),
        prop::collection::vec(1..200u64, 1..6).prop_map(Tree::Explicit),
    ];
    leaf.prop_recursive(2, 6, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Tree::Union(Box::new(a), Box::new(b))),
            (inner.clone(), residue()).prop_map(|(a, b)| Tree::Inter(Box::new(a), Box::new(b))),
            (2..4u64, inner.clone()).prop_map(|(k, a)| Tree::Dilate(k, Box::new(a))),
            (0..6u64, inner).prop_map(|(k, a)| Tree::Shift(k, Box::new(a))),
        ]
    })
}

/// Residue patterns with null perturbations, closed under the Boolean
/// operations, dilation and shift.
pub fn tree() -> impl Strategy<Value = Tree> {
    let leaf = prop_oneof![
        4 => residue(),
        1 => Just(Tree::Empty),
        1 => Just(Tree::All),
        1 => null_tree(),
    ];
    leaf.prop_recursive(3, 10, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Tree::Union(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Tree::Inter(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Tree::Diff(Box::new(a), Box::new(b))),
            inner.clone().prop_map(|a| Tree::Compl(Box::new(a))),
            (2..4u64, inner.clone()).prop_map(|(k, a)| Tree::Dilate(k, Box::new(a))),
            (0..6u64, inner).prop_map(|(k, a)| Tree::Shift(k, Box::new(a))),
        ]
    })
}

/// Geometric block sets moved around by complement, dilation, shift and
/// null perturbations, with closed-form ν⁺ and ν⁻.
#[derive(Debug, Clone)]
pub enum Oscillating {
    Geometric(u64),
    Compl(Box<Oscillating>),
    Dilate(u64, Box<Oscillating>),
    Shift(u64, Box<Oscillating>),
    WithNull(Box<Oscillating>, Tree),
    WithoutNull(Box<Oscillating>, Tree),
}

impl Oscillating {
    pub fn expr(&self) -> SetExpr {
        match self {
            Oscillating::Geometric(r) => SetExpr::blocks(ZSpec::Geometric { ratio: *r }).unwrap(),
            Oscillating::Compl(a) => SetExpr::compl(a.expr()),
            Oscillating::Dilate(k, a) => SetExpr::dilate(*k, a.expr()).unwrap(),
            Oscillating::Shift(k, a) => SetExpr::shift(*k, a.expr()),
            Oscillating::WithNull(a, n) => SetExpr::union(a.expr(), n.expr()),
            Oscillating::WithoutNull(a, n) => SetExpr::diff(a.expr(), n.expr()),
        }
    }

    /// (ν⁺, ν⁻). For z_n = r^(n−1) the ones sit in the even runs, so the
    /// running density peaks at r/(r+1) and bottoms out at 1/(r+1).
    pub fn limits(&self) -> (Rational, Rational) {
        let one = Rational::from_integer(1);
        match self {
            Oscillating::Geometric(r) => {
                let r = *r as i128;
                (Rational::new(r, r + 1), Rational::new(1, r + 1))
            }
            Oscillating::Compl(a) => {
                let (u, l) = a.limits();
                (one - l, one - u)
            }
            Oscillating::Dilate(k, a) => {
                let (u, l) = a.limits();
                let k = Rational::from_integer(*k as i128);
                (u / k, l / k)
            }
            Oscillating::Shift(_, a) | Oscillating::WithNull(a, _) | Oscillating::WithoutNull(a, _) => a.limits(),
        }
    }
}

pub fn oscillating() -> impl Strategy<Value = Oscillating> {
    (2..5u64).prop_map(Oscillating::Geometric).prop_recursive(3, 6, 1, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| Oscillating::Compl(Box::new(a))),
            (2..4u64, inner.clone()).prop_map(|(k, a)| Oscillating::Dilate(k, Box::new(a))),
            (0..6u64, inner.clone()).prop_map(|(k, a)| Oscillating::Shift(k, Box::new(a))),
            (inner.clone(), null_tree()).prop_map(|(a, n)| Oscillating::WithNull(Box::new(a), n)),
            (inner, null_tree()).prop_map(|(a, n)| Oscillating::WithoutNull(Box::new(a), n)),
        ]
    })
}

/// Draws `count` values from `strategy` with a fixed seed.
pub fn sample<S: Strategy>(strategy: S, count: usize) -> Vec<S::Value> {
    let mut runner = TestRunner::deterministic();
    (0..count).map(|_| strategy.new_tree(&mut runner).unwrap().current()).collect()
}

pub fn limits(e: &SetExpr) -> (Rational, Rational) {
    let r = cesaro::limits::exact_limits(e).unwrap_or_else(|err| panic!("{e}: {err}"));
    (r.upper.exact().unwrap(), r.lower.exact().unwrap())
}

/// ν of a set the library must find in F.
pub fn nu(e: &SetExpr) -> Rational {
    let (u, l) = limits(e);
    assert_eq!(u, l, "{e} has no limit");
    u
}

fn check(ok: bool, what: &str, e: &SetExpr) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(format!("{what}: {e}"))
    }
}

/// Library limits agree with the oracle.
pub fn oracle_agrees(t: &Tree) -> Result<(), String> {
    let e = t.expr();
    check(nu(&e) == t.density(), "exact ν differs from the period count", &e)
}

/// Union, intersection and complement rules on a pair in F.
pub fn boolean_pair(a: &Tree, b: &Tree) -> Result<(), String> {
    let (ea, eb) = (a.expr(), b.expr());
    let one = Rational::from_integer(1);
    check(nu(&SetExpr::compl(ea.clone())) == one - nu(&ea), "complement rule", &ea)?;
    let union = SetExpr::union(ea.clone(), eb.clone());
    let inter = SetExpr::inter(ea.clone(), eb.clone());
    check(nu(&union) == nu(&ea) + nu(&eb) - nu(&inter), "inclusion-exclusion", &union)?;
    check(limits(&union).0 <= limits(&ea).0 + limits(&eb).0, "subadditivity", &union)
}

/// Monotonicity for A ⊆ B; `in_f` adds the second group.
/// `diff` is B \ A written in a form the closed-form reducer accepts; it is
/// checked against the literal difference on a prefix.
pub fn monotone_pair(a: &SetExpr, b: &SetExpr, diff: &SetExpr, in_f: bool) -> Result<(), String> {
    if let Some(n) = (1..=2000).find(|&n| a.member(n) && !b.member(n)) {
        return Err(format!("A ⊄ B at {n}"));
    }
    if let Some(n) = (1..=2000).find(|&n| diff.member(n) != (b.member(n) && !a.member(n))) {
        return Err(format!("difference form disagrees at {n}"));
    }
    let ((ua, la), (ub, lb)) = (limits(a), limits(b));
    let (ud, ld) = limits(diff);
    check(ua <= ub, "ν⁺ monotone", b)?;
    check(ud >= ub - ua, "ν⁺(B \\ A) ≥ ν⁺(B) − ν⁺(A)", b)?;
    check(la <= lb, "ν⁻ monotone", b)?;
    check(ld <= lb - la, "ν⁻(B \\ A) ≤ ν⁻(B) − ν⁻(A)", b)?;
    if in_f {
        check(ud == ld, "B \\ A in F", b)?;
        check(ud == ub - ua, "ν(B \\ A) = ν(B) − ν(A)", b)?;
        check((ua == ub) == (ud == Rational::from_integer(0)), "equal ν iff null difference", b)?;
    }
    Ok(())
}

/// A null set changes no limits, and its pieces are null.
pub fn null_absorption(null: &Tree, c: &SetExpr) -> Result<(), String> {
    let n = null.expr();
    let zero = Rational::from_integer(0);
    check(nu(&n) == zero, "null tree has ν = 0", &n)?;
    let (uc, lc) = limits(c);
    let with = SetExpr::union(n.clone(), c.clone());
    let without = SetExpr::diff(c.clone(), n.clone());
    check(limits(&with) == (uc, lc), "ν±(A ∪ C) = ν±(C)", &with)?;
    check(limits(&without) == (uc, lc), "ν±(C \\ A) = ν±(C)", &without)?;
    check(nu(&SetExpr::inter(n.clone(), c.clone())) == zero, "A ∩ C null", &n)?;
    check(nu(&SetExpr::diff(n.clone(), c.clone())) == zero, "A \\ C null", &n)
}

/// Finite additivity: cut `t` into pairwise disjoint pieces along residues mod m.
pub fn finite_additivity(t: &Tree, m: u64, labels: &[usize]) -> Result<(), String> {
    let e = t.expr();
    let pieces: Vec<SetExpr> = (0..=labels.iter().copied().max().unwrap_or(0))
        .map(|piece| {
            let residues = (0..m).filter(|&r| labels[r as usize % labels.len()] == piece);
            SetExpr::inter(e.clone(), SetExpr::residue(m, residues).unwrap())
        })
        .collect();
    for n in 1..=200 {
        if pieces.iter().filter(|p| p.member(n)).count() > 1 {
            return Err(format!("pieces overlap at {n}"));
        }
    }
    let total: Rational = pieces.iter().map(nu).sum();
    check(total == nu(&SetExpr::union_all(pieces)), "ν of a disjoint union is the sum", &e)
}
