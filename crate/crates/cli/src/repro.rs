//! Reference examples with known answers, re-run end to end.

use std::io::{self, Write};

use cesaro::chains::{self, ChainError};
use cesaro::constructions::{counterexample_base, counterexample_pair, dyadic_partition, residue_set};
use cesaro::limits::{block_gap_profile, classify, exact_limits, Class, EstimateOptions, Verdict};
use cesaro::nullmod::{chain_psi, null_modify};
use cesaro::quotient::{build_algebra, null_equivalent, Equivalence};
use cesaro::rational::above;
use cesaro::sets::{count_upto, parse};
use cesaro::{Rational, SetExpr};

type Check = fn() -> bool;

fn exact_nu(e: &SetExpr) -> Option<Rational> {
    exact_limits(e).ok()?.limit?.exact()
}

fn e(text: &str) -> SetExpr {
    parse(text).expect("built-in example parses")
}

const CHECKS: &[(&str, Check)] = &[
    ("residue 3 {0} has density 1/3", || exact_nu(&e("residue 3 {0}")) == Some(Rational::new(1, 3))),
    ("residue 5 {0} has density 1/5", || exact_nu(&e("residue 5 {0}")) == Some(Rational::new(1, 5))),
    ("geometric blocks: upper 2/3, lower 1/3, no limit", || {
        let r = exact_limits(&e("blocks geometric 2")).unwrap();
        r.verdict == Verdict::NotInF
            && r.upper.exact() == Some(Rational::new(2, 3))
            && r.lower.exact() == Some(Rational::new(1, 3))
    }),
    ("square blocks have density 1/2", || {
        let r = exact_limits(&e("blocks poly 2")).unwrap();
        r.verdict == Verdict::InF && r.limit.and_then(|l| l.exact()) == Some(Rational::new(1, 2))
    }),
    ("square blocks: normalized gaps stay in a fixed bracket", || block_gap_profile(2, 1 << 20).unwrap().within),
    ("primes are null: below 0.1 at 10^7, density falling like 1/(ln N - 1)", || {
        let primes = e("predicate primes");
        let options = EstimateOptions { horizon: 10_000_000, tolerance: 0.1, ..Default::default() };
        let decades: Vec<f64> = (3..=7).map(|k| count_upto(&primes, 10u64.pow(k)) as f64 / 10f64.powi(k as i32)).collect();
        let tracks = (3..=7).zip(&decades).all(|(k, nu)| (nu * ((k as f64) * 10f64.ln() - 1.0) - 1.0).abs() < 0.05);
        classify(&primes, &options).unwrap().class == Class::Null && decades.windows(2).all(|w| w[1] < w[0]) && tracks
    }),
    ("evens lie in F with density 1/2", || {
        let c = classify(&residue_set(2, [0]).unwrap(), &EstimateOptions::default()).unwrap();
        !c.approximate && matches!(c.class, Class::InF(d) if d.exact() == Some(Rational::new(1, 2)))
    }),
    ("counterexample: exactly one of 2k-1, 2k lies in C", || {
        let (b, c) = counterexample_pair();
        exact_nu(&b) == Some(Rational::new(1, 2)) && (1..=100_000u64).all(|k| c.member(2 * k - 1) != c.member(2 * k))
    }),
    ("counterexample: B ∩ C = 2A", || {
        let (b, c) = counterexample_pair();
        let doubled = SetExpr::dilate(2, counterexample_base()).unwrap();
        let bc = SetExpr::inter(b, c);
        let (mut x, mut y) = (bc.stream(), doubled.stream());
        (1..=100_000).all(|_| x.next_bit() == y.next_bit())
    }),
    ("dyadic sets never exceed their density", || {
        dyadic_partition(4).unwrap().iter().all(|d| {
            let nu = exact_nu(d).unwrap();
            let mut bits = d.stream();
            let mut count = 0;
            (1..=100_000).all(|n| {
                count += bits.next_bit() as u64;
                !above(count, n, &nu)
            })
        })
    }),
    ("Algorithm 1 on the odds removes exactly {1}", || {
        let r = null_modify(&e("residue 2 {1}"), Rational::new(1, 2), 100_000).unwrap();
        r.removed_elements == [1]
    }),
    ("psi of the chain {odds} removes exactly {1}", || {
        let m = chain_psi(&[e("residue 2 {1}")], 100_000).unwrap();
        m.images[0].removed == [1] && m.images[0].added.is_empty()
    }),
    ("a chain holding geometric blocks is not uniformly convergent", || {
        let chain = chains::verify_chain(&[e("blocks geometric 2")], 1000).unwrap();
        chains::uniformity_check(&chain, 1e-3, 1 << 16) == Err(ChainError::NotInF { index: 0 })
    }),
    ("P({1}) is the two-element algebra", || build_algebra(1).map(|a| a.size() == 2).unwrap_or(false)),
    ("adding the powers of two to the evens changes nothing up to null sets", || {
        let v = null_equivalent(&e("residue 2 {0}"), &e("union(residue 2 {0}, predicate pow2)"), &EstimateOptions::default()).unwrap();
        v.value == Equivalence::Equivalent
    }),
];

/// Runs every check, printing one line each. Returns whether all passed.
pub fn run(out: &mut impl Write) -> io::Result<bool> {
    let mut all = true;
    for (name, check) in CHECKS {
        let ok = check();
        all &= ok;
        writeln!(out, "{} {name}", if ok { "PASS" } else { "FAIL" })?;
    }
    Ok(all)
}
