//! Closed-form limits for the structured fragment.
//!
//! Every expression in the fragment reduces to one of two forms:
//!
//! * a residue pattern P together with an implicit null set Z, denoting a
//!   set that differs from P by a subset of Z. Its density is the density
//!   of P. Finite sets, squares, cubes and powers of two are pure null
//!   atoms.
//! * a set with known ν⁺ and ν⁻ that is not periodic modulo null, such as
//!   a block set or a transform of one.
//!
//! Oscillating parts only combine with complement, dilation, shift, and
//! Boolean operations against null or co-null patterns. Every other
//! combination is reported as not exactly solvable.

use crate::rational::Rational;
use crate::sets::pattern::ResiduePattern;
use crate::sets::{Predicate, SetExpr, ZSpec};

use super::{LimitReport, LimitsError, Method};

/// Reduced form of an exactly solvable expression.
#[derive(Debug, Clone, PartialEq)]
pub enum ExactForm {
    /// Equal to the pattern up to a null set.
    Periodic(ResiduePattern),
    /// Known upper and lower limits, not periodic modulo null.
    Limits { upper: Rational, lower: Rational },
}

impl ExactForm {
    pub fn upper(&self) -> Rational {
        match self {
            ExactForm::Periodic(p) => p.density(),
            ExactForm::Limits { upper, .. } => *upper,
        }
    }

    pub fn lower(&self) -> Rational {
        match self {
            ExactForm::Periodic(p) => p.density(),
            ExactForm::Limits { lower, .. } => *lower,
        }
    }

    fn is_null(&self) -> bool {
        matches!(self, ExactForm::Periodic(p) if p.is_empty())
    }

    fn is_conull(&self) -> bool {
        matches!(self, ExactForm::Periodic(p) if p.is_full())
    }

    fn compl(self) -> Self {
        match self {
            ExactForm::Periodic(p) => ExactForm::Periodic(p.compl()),
            ExactForm::Limits { upper, lower } => {
                let one = Rational::from_integer(1);
                ExactForm::Limits { upper: one - lower, lower: one - upper }
            }
        }
    }
}

fn unsolvable(why: impl Into<String>) -> LimitsError {
    LimitsError::NotExactlySolvable(why.into())
}

#[derive(Clone, Copy)]
enum Op {
    Union,
    Inter,
    Diff,
    SymDiff,
}

fn combine(op: Op, a: ExactForm, b: ExactForm) -> Result<ExactForm, LimitsError> {
    use ExactForm::Periodic;
    if let (Periodic(p), Periodic(q)) = (&a, &b) {
        let r = match op {
            Op::Union => p.union(q),
            Op::Inter => p.inter(q),
            Op::Diff => p.diff(q),
            Op::SymDiff => p.sym_diff(q),
        };
        return r.map(Periodic).map_err(|e| unsolvable(e.to_string()));
    }
    let null = || Periodic(ResiduePattern::constant(false));
    let conull = || Periodic(ResiduePattern::constant(true));
    // At least one side oscillates; the other must be null or co-null.
    let out = match op {
        Op::Union if a.is_null() => b,
        Op::Union if b.is_null() => a,
        Op::Union if a.is_conull() || b.is_conull() => conull(),
        Op::Inter if a.is_conull() => b,
        Op::Inter if b.is_conull() => a,
        Op::Inter if a.is_null() || b.is_null() => null(),
        Op::Diff if b.is_null() => a,
        Op::Diff if a.is_null() || b.is_conull() => null(),
        Op::Diff if a.is_conull() => b.compl(),
        Op::SymDiff if a.is_null() => b,
        Op::SymDiff if b.is_null() => a,
        Op::SymDiff if a.is_conull() => b.compl(),
        Op::SymDiff if b.is_conull() => a.compl(),
        _ => return Err(unsolvable("Boolean combination of a non-periodic set with a set that is neither null nor co-null")),
    };
    Ok(out)
}

/// Reduces `e`; the flag records whether a block formula was used.
fn reduce(e: &SetExpr) -> Result<(ExactForm, bool), LimitsError> {
    use ExactForm::{Limits, Periodic};
    let null = Periodic(ResiduePattern::constant(false));
    Ok(match e {
        SetExpr::Empty => (null, false),
        SetExpr::All => (Periodic(ResiduePattern::constant(true)), false),
        SetExpr::Explicit(_) => (null, false),
        SetExpr::Residue { modulus, residues } => {
            (Periodic(ResiduePattern::new(*modulus, residues).map_err(|e| unsolvable(e.to_string()))?), false)
        }
        SetExpr::Predicate(Predicate::Squares | Predicate::Cubes | Predicate::Pow2) => (null, false),
        SetExpr::Predicate(p) => return Err(unsolvable(format!("predicate {p} has no closed form"))),
        SetExpr::Greedy(_) => return Err(unsolvable("greedy sets stream")),
        SetExpr::Blocks(b) => match b.spec() {
            ZSpec::Geometric { ratio } => {
                let r = *ratio as i128;
                (Limits { upper: Rational::new(r, r + 1), lower: Rational::new(1, r + 1) }, true)
            }
            ZSpec::Poly { .. } => {
                let half = Rational::new(1, 2);
                (Limits { upper: half, lower: half }, true)
            }
            ZSpec::List { .. } => return Err(unsolvable("block lists have no closed form")),
        },
        SetExpr::Compl(a) => {
            let (f, blocks) = reduce(a)?;
            (f.compl(), blocks)
        }
        SetExpr::Union(a, b) | SetExpr::Inter(a, b) | SetExpr::Diff(a, b) | SetExpr::SymDiff(a, b) => {
            let (fa, ba) = reduce(a)?;
            let (fb, bb) = reduce(b)?;
            let op = match e {
                SetExpr::Union(..) => Op::Union,
                SetExpr::Inter(..) => Op::Inter,
                SetExpr::Diff(..) => Op::Diff,
                _ => Op::SymDiff,
            };
            (combine(op, fa, fb)?, ba || bb)
        }
        SetExpr::Dilate(k, a) => {
            let (f, blocks) = reduce(a)?;
            let f = match f {
                // Past the modulus limit the periodic structure is dropped
                // but the density d/k is still exact.
                Periodic(p) => match p.dilate(*k) {
                    Ok(q) => Periodic(q),
                    Err(_) => {
                        let d = p.density() / Rational::from_integer(*k as i128);
                        Limits { upper: d, lower: d }
                    }
                },
                Limits { upper, lower } => {
                    let k = Rational::from_integer(*k as i128);
                    Limits { upper: upper / k, lower: lower / k }
                }
            };
            (f, blocks)
        }
        SetExpr::Shift(k, a) => {
            let (f, blocks) = reduce(a)?;
            let f = match f {
                Periodic(p) => Periodic(p.shift(*k)),
                limits => limits,
            };
            (f, blocks)
        }
        SetExpr::Midpoint(m) => {
            let (fb, bb) = reduce(m.lower())?;
            if fb.upper() != fb.lower() {
                return Err(unsolvable("midpoint of sets without a limit"));
            }
            // ν(C \ B): from the difference itself, or from ν(C) − ν(B)
            // when B ⊆ C is known.
            let (gap, bd) = match reduce(&SetExpr::diff(m.upper().clone(), m.lower().clone())) {
                Ok((fd, bd)) if fd.upper() == fd.lower() => (fd.upper(), bd),
                Ok(_) => return Err(unsolvable("midpoint of sets without a limit")),
                Err(_) if m.is_nested() => {
                    let (fc, bc) = reduce(m.upper())?;
                    if fc.upper() != fc.lower() {
                        return Err(unsolvable("midpoint of sets without a limit"));
                    }
                    (fc.upper() - fb.upper(), bc)
                }
                Err(e) => return Err(e),
            };
            if gap == Rational::from_integer(0) {
                // Differs from the lower set by part of a null set.
                (fb, bb)
            } else {
                let v = fb.upper() + gap / Rational::from_integer(2);
                (Limits { upper: v, lower: v }, bb || bd)
            }
        }
    })
}

/// Closed-form ν⁺, ν⁻ for the structured fragment.
pub fn exact_limits(e: &SetExpr) -> Result<LimitReport, LimitsError> {
    let (form, blocks) = reduce(e)?;
    let method = if blocks { Method::BlockFormula } else { Method::Exact };
    Ok(LimitReport::exact(form.upper(), form.lower(), method))
}

/// Exact reduced form, for callers that need more than the report.
pub fn exact_form(e: &SetExpr) -> Result<ExactForm, LimitsError> {
    reduce(e).map(|(f, _)| f)
}

/// Exact ν⁺, or an error outside the fragment.
pub fn exact_upper(e: &SetExpr) -> Result<Rational, LimitsError> {
    reduce(e).map(|(f, _)| f.upper())
}
