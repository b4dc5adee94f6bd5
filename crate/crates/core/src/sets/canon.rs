//! Structural simplification of set expressions.

use std::sync::Arc;

use super::pattern::ResiduePattern;
use super::SetExpr;

/// Bottom-up rewrite to a simpler expression denoting the same set.
///
/// Applies the Boolean identity and absorption laws, folds combinations
/// of residue classes into a single residue class (while the common
/// modulus stays under the pattern limit), and evaluates operations whose
/// result is finite and listable.
pub fn canonicalize(e: &SetExpr) -> SetExpr {
    match e {
        SetExpr::Residue { modulus, residues } => {
            ResiduePattern::new(*modulus, residues).map(|p| p.minimized().to_expr()).unwrap_or_else(|_| e.clone())
        }
        SetExpr::Explicit(elements) if elements.is_empty() => SetExpr::Empty,
        SetExpr::Empty
        | SetExpr::All
        | SetExpr::Explicit(_)
        | SetExpr::Blocks(_)
        | SetExpr::Greedy(_)
        | SetExpr::Predicate(_) => e.clone(),
        SetExpr::Compl(a) => compl(canonicalize(a)),
        SetExpr::Union(a, b) => union(canonicalize(a), canonicalize(b)),
        SetExpr::Inter(a, b) => inter(canonicalize(a), canonicalize(b)),
        SetExpr::Diff(a, b) => diff(canonicalize(a), canonicalize(b)),
        SetExpr::SymDiff(a, b) => sym_diff(canonicalize(a), canonicalize(b)),
        SetExpr::Dilate(k, a) => dilate(*k, canonicalize(a)),
        SetExpr::Shift(k, a) => shift(*k, canonicalize(a)),
        SetExpr::Midpoint(m) => {
            let (lower, upper) = (canonicalize(m.lower()), canonicalize(m.upper()));
            if lower == upper {
                lower
            } else {
                SetExpr::Midpoint(super::MidpointSet::new(lower, upper, m.is_nested()))
            }
        }
    }
}

fn pattern_of(e: &SetExpr) -> Option<ResiduePattern> {
    match e {
        SetExpr::Empty => Some(ResiduePattern::constant(false)),
        SetExpr::All => Some(ResiduePattern::constant(true)),
        SetExpr::Residue { modulus, residues } => ResiduePattern::new(*modulus, residues).ok(),
        _ => None,
    }
}

fn finite(e: &SetExpr) -> Option<&[u64]> {
    match e {
        SetExpr::Explicit(x) => Some(x),
        SetExpr::Empty => Some(&[]),
        _ => None,
    }
}

fn listed(elements: Vec<u64>) -> SetExpr {
    SetExpr::explicit_from_unsorted(elements)
}

fn compl(a: SetExpr) -> SetExpr {
    match a {
        SetExpr::Compl(inner) => Arc::unwrap_or_clone(inner),
        other => match pattern_of(&other) {
            Some(p) => p.compl().to_expr(),
            None => SetExpr::compl(other),
        },
    }
}

fn union(a: SetExpr, b: SetExpr) -> SetExpr {
    match (&a, &b) {
        (SetExpr::Empty, _) => return b,
        (_, SetExpr::Empty) => return a,
        (SetExpr::All, _) | (_, SetExpr::All) => return SetExpr::All,
        _ if a == b => return a,
        _ => {}
    }
    if let (Some(p), Some(q)) = (pattern_of(&a), pattern_of(&b)) {
        if let Ok(r) = p.union(&q) {
            return r.to_expr();
        }
    }
    if let (Some(x), Some(y)) = (finite(&a), finite(&b)) {
        return listed(x.iter().chain(y).copied().collect());
    }
    SetExpr::union(a, b)
}

fn inter(a: SetExpr, b: SetExpr) -> SetExpr {
    match (&a, &b) {
        (SetExpr::Empty, _) | (_, SetExpr::Empty) => return SetExpr::Empty,
        (SetExpr::All, _) => return b,
        (_, SetExpr::All) => return a,
        _ if a == b => return a,
        _ => {}
    }
    if let (Some(p), Some(q)) = (pattern_of(&a), pattern_of(&b)) {
        if let Ok(r) = p.inter(&q) {
            return r.to_expr();
        }
    }
    if let Some(x) = finite(&a) {
        return listed(x.iter().copied().filter(|&n| b.member(n)).collect());
    }
    if let Some(y) = finite(&b) {
        return listed(y.iter().copied().filter(|&n| a.member(n)).collect());
    }
    SetExpr::inter(a, b)
}

fn diff(a: SetExpr, b: SetExpr) -> SetExpr {
    match (&a, &b) {
        (SetExpr::Empty, _) | (_, SetExpr::All) => return SetExpr::Empty,
        (_, SetExpr::Empty) => return a,
        (SetExpr::All, _) => return compl(b),
        _ if a == b => return SetExpr::Empty,
        _ => {}
    }
    if let (Some(p), Some(q)) = (pattern_of(&a), pattern_of(&b)) {
        if let Ok(r) = p.diff(&q) {
            return r.to_expr();
        }
    }
    if let Some(x) = finite(&a) {
        return listed(x.iter().copied().filter(|&n| !b.member(n)).collect());
    }
    SetExpr::diff(a, b)
}

fn sym_diff(a: SetExpr, b: SetExpr) -> SetExpr {
    match (&a, &b) {
        (SetExpr::Empty, _) => return b,
        (_, SetExpr::Empty) => return a,
        (SetExpr::All, _) => return compl(b),
        (_, SetExpr::All) => return compl(a),
        _ if a == b => return SetExpr::Empty,
        _ => {}
    }
    if let (Some(p), Some(q)) = (pattern_of(&a), pattern_of(&b)) {
        if let Ok(r) = p.sym_diff(&q) {
            return r.to_expr();
        }
    }
    if let (Some(x), Some(y)) = (finite(&a), finite(&b)) {
        let in_x: Vec<u64> = x.iter().copied().filter(|n| y.binary_search(n).is_err()).collect();
        let in_y = y.iter().copied().filter(|n| x.binary_search(n).is_err());
        return listed(in_x.into_iter().chain(in_y).collect());
    }
    SetExpr::sym_diff(a, b)
}

fn dilate(k: u64, a: SetExpr) -> SetExpr {
    if k == 1 {
        return a;
    }
    if let Some(p) = pattern_of(&a) {
        if let Ok(r) = p.dilate(k) {
            return r.to_expr();
        }
    }
    if let Some(x) = finite(&a) {
        if let Some(scaled) = x.iter().map(|&n| n.checked_mul(k)).collect::<Option<Vec<u64>>>() {
            return listed(scaled);
        }
    }
    SetExpr::Dilate(k, Arc::new(a))
}

fn shift(k: u64, a: SetExpr) -> SetExpr {
    if k == 0 {
        return a;
    }
    if let Some(p) = pattern_of(&a) {
        return p.shift(k).minimized().to_expr();
    }
    if let Some(x) = finite(&a) {
        return listed(x.iter().filter(|&&n| n > k).map(|&n| n - k).collect());
    }
    match a {
        SetExpr::Shift(j, inner) => match j.checked_add(k) {
            Some(total) => SetExpr::Shift(total, inner),
            None => SetExpr::shift(k, SetExpr::Shift(j, inner)),
        },
        other => SetExpr::shift(k, other),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::ZSpec;

    fn agree(e: &SetExpr) -> SetExpr {
        let c = canonicalize(e);
        for n in 1..=1000 {
            assert_eq!(c.member(n), e.member(n), "{e} vs {c} at {n}");
        }
        c
    }

    #[test]
    fn identity_laws() {
        let geo = SetExpr::blocks(ZSpec::Geometric { ratio: 2 }).unwrap();
        assert_eq!(agree(&SetExpr::inter(SetExpr::All, geo.clone())), geo);
        assert_eq!(agree(&SetExpr::union(geo.clone(), SetExpr::Empty)), geo);
        assert_eq!(agree(&SetExpr::compl(SetExpr::compl(geo.clone()))), geo);
        assert_eq!(agree(&SetExpr::sym_diff(geo.clone(), geo)), SetExpr::Empty);
    }

    #[test]
    fn residue_merging() {
        let even = SetExpr::residue(2, [0]).unwrap();
        let odd = SetExpr::residue(2, [1]).unwrap();
        assert_eq!(agree(&SetExpr::union(even, odd)), SetExpr::All);
        let d = SetExpr::diff(SetExpr::residue(4, [0, 2]).unwrap(), SetExpr::residue(4, [0]).unwrap());
        assert_eq!(agree(&d), SetExpr::residue(4, [2]).unwrap());
        assert_eq!(agree(&SetExpr::residue(1, [0]).unwrap()), SetExpr::All);
        assert_eq!(agree(&SetExpr::residue(6, [0, 2, 4]).unwrap()), SetExpr::residue(2, [0]).unwrap());
    }

    #[test]
    fn explicit_algebra() {
        let a = SetExpr::explicit([1, 3, 5]).unwrap();
        let b = SetExpr::explicit([3, 4]).unwrap();
        assert_eq!(agree(&SetExpr::union(a.clone(), b.clone())), SetExpr::explicit([1, 3, 4, 5]).unwrap());
        assert_eq!(agree(&SetExpr::sym_diff(a.clone(), b.clone())), SetExpr::explicit([1, 4, 5]).unwrap());
        let evens = SetExpr::residue(2, [0]).unwrap();
        assert_eq!(agree(&SetExpr::inter(evens, b.clone())), SetExpr::explicit([4]).unwrap());
        assert_eq!(agree(&SetExpr::shift(3, a)), SetExpr::explicit([2]).unwrap());
        assert_eq!(agree(&SetExpr::dilate(2, b).unwrap()), SetExpr::explicit([6, 8]).unwrap());
    }

    #[test]
    fn opaque_parts_survive() {
        let primes = SetExpr::predicate("primes").unwrap();
        let e = SetExpr::union(SetExpr::shift(1, SetExpr::shift(2, primes.clone())), SetExpr::residue(3, [0]).unwrap());
        let c = agree(&e);
        assert_eq!(c, SetExpr::union(SetExpr::shift(3, primes), SetExpr::residue(3, [0]).unwrap()));
    }
}
