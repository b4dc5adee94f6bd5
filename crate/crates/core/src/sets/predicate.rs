//! Fixed registry of named sets.

use std::fmt;
use std::str::FromStr;

use num_integer::Roots;

use super::blocks::{BlockSet, ZSpec};
use super::stream::BitStream;
use super::SetError;

/// Registered predicate sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Predicate {
    /// {1, 4, 9, …}
    Squares,
    /// {1, 8, 27, …}
    Cubes,
    /// {2, 4, 8, …}; 1 = 2⁰ is excluded so that the count below N is ⌊log₂ N⌋.
    Pow2,
    Primes,
    /// The set C of the B/C counterexample, built over the geometric block
    /// set A: even n ∈ C iff n/2 ∈ A, odd n ∈ C iff (n+1)/2 ∉ A.
    Pairing,
}

impl Predicate {
    pub const ALL: [Predicate; 5] =
        [Predicate::Squares, Predicate::Cubes, Predicate::Pow2, Predicate::Primes, Predicate::Pairing];

    pub fn name(self) -> &'static str {
        match self {
            Predicate::Squares => "squares",
            Predicate::Cubes => "cubes",
            Predicate::Pow2 => "pow2",
            Predicate::Primes => "primes",
            Predicate::Pairing => "pairing",
        }
    }

    pub fn member(self, n: u64) -> bool {
        match self {
            Predicate::Squares => {
                let r = n.sqrt();
                r * r == n
            }
            Predicate::Cubes => {
                let r = n.cbrt();
                r * r * r == n
            }
            Predicate::Pow2 => n >= 2 && n.is_power_of_two(),
            Predicate::Primes => is_prime(n),
            Predicate::Pairing => {
                let a = counterexample_base();
                if n % 2 == 0 {
                    a.member(n / 2)
                } else {
                    !a.member(n / 2 + 1)
                }
            }
        }
    }

    /// Closed-form count of members in [1, n] where one exists.
    pub fn count_upto(self, n: u64) -> Option<u64> {
        match self {
            Predicate::Squares => Some(n.sqrt()),
            Predicate::Cubes => Some(n.cbrt()),
            Predicate::Pow2 => Some(if n == 0 { 0 } else { u64::from(63 - n.leading_zeros()) }),
            Predicate::Primes | Predicate::Pairing => None,
        }
    }

    pub(crate) fn stream_from(self, start: u64) -> Box<dyn BitStream> {
        match self {
            Predicate::Squares => Box::new(PowerStream::new(start, 2)),
            Predicate::Cubes => Box::new(PowerStream::new(start, 3)),
            Predicate::Pow2 => Box::new(Pow2Stream::new(start)),
            Predicate::Primes => Box::new(PrimeStream::new(start)),
            Predicate::Pairing => Box::new(PairingStream::new(start)),
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Predicate {
    type Err = SetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Predicate::ALL
            .into_iter()
            .find(|p| p.name() == s || (s == "paperC" && *p == Predicate::Pairing))
            .ok_or_else(|| SetError::UnknownPredicate(s.to_string()))
    }
}

/// The geometric block set (z_n = 2^(n−1)) that the counterexample pair
/// is built over.
pub(crate) fn counterexample_base() -> &'static BlockSet {
    static BASE: std::sync::OnceLock<BlockSet> = std::sync::OnceLock::new();
    BASE.get_or_init(|| BlockSet::new(ZSpec::Geometric { ratio: 2 }).expect("valid spec"))
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for p in BASES {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Perfect powers n = r^exponent.
struct PowerStream {
    n: u64,
    root: u64,
    next: u64,
    exponent: u32,
}

impl PowerStream {
    fn new(start: u64, exponent: u32) -> Self {
        let root = if exponent == 2 { (start - 1).sqrt() + 1 } else { (start - 1).cbrt() + 1 };
        let next = root.checked_pow(exponent).unwrap_or(u64::MAX);
        PowerStream { n: start, root, next, exponent }
    }
}

impl BitStream for PowerStream {
    fn next_bit(&mut self) -> bool {
        let hit = self.n == self.next;
        if hit {
            self.root += 1;
            self.next = self.root.checked_pow(self.exponent).unwrap_or(u64::MAX);
        }
        self.n += 1;
        hit
    }
}

struct Pow2Stream {
    n: u64,
    next: u64,
}

impl Pow2Stream {
    fn new(start: u64) -> Self {
        let next = start.max(2).checked_next_power_of_two().unwrap_or(u64::MAX);
        Pow2Stream { n: start, next }
    }
}

impl BitStream for Pow2Stream {
    fn next_bit(&mut self) -> bool {
        let hit = self.n == self.next;
        if hit {
            self.next = self.next.checked_mul(2).unwrap_or(u64::MAX);
        }
        self.n += 1;
        hit
    }
}

const SEGMENT: u64 = 1 << 16;

/// Segmented sieve of Eratosthenes.
struct PrimeStream {
    base: Vec<u64>,
    base_limit: u64,
    segment: Vec<bool>,
    lo: u64,
    pos: usize,
}

impl PrimeStream {
    fn new(start: u64) -> Self {
        let mut stream = PrimeStream { base: Vec::new(), base_limit: 1, segment: Vec::new(), lo: start, pos: 0 };
        stream.fill(start);
        stream
    }

    fn grow_base(&mut self, limit: u64) {
        if limit <= self.base_limit {
            return;
        }
        let limit = limit.max(self.base_limit * 2);
        let mut composite = vec![false; (limit + 1) as usize];
        let mut primes = Vec::new();
        for i in 2..=limit {
            if !composite[i as usize] {
                primes.push(i);
                let mut j = i * i;
                while j <= limit {
                    composite[j as usize] = true;
                    j += i;
                }
            }
        }
        self.base = primes;
        self.base_limit = limit;
    }

    fn fill(&mut self, lo: u64) {
        let hi = lo.saturating_add(SEGMENT);
        self.grow_base(hi.sqrt() + 1);
        let mut segment = vec![true; (hi - lo) as usize];
        for n in lo..lo.saturating_add(2).min(hi) {
            if n < 2 {
                segment[(n - lo) as usize] = false;
            }
        }
        for &p in &self.base {
            if p * p >= hi {
                break;
            }
            let first = (p * p).max(lo.div_ceil(p) * p);
            let mut m = first;
            while m < hi {
                segment[(m - lo) as usize] = false;
                m += p;
            }
        }
        self.segment = segment;
        self.lo = lo;
        self.pos = 0;
    }
}

impl BitStream for PrimeStream {
    fn next_bit(&mut self) -> bool {
        if self.pos == self.segment.len() {
            let next = self.lo + self.segment.len() as u64;
            self.fill(next);
        }
        let bit = self.segment[self.pos];
        self.pos += 1;
        bit
    }
}

/// Interleaves the base set A: position 2k−1 carries ¬I_A(k), 2k carries I_A(k).
struct PairingStream {
    base: Box<dyn BitStream>,
    pending: Option<bool>,
}

impl PairingStream {
    fn new(start: u64) -> Self {
        let k = start.div_ceil(2);
        let mut base: Box<dyn BitStream> =
            super::stream::build(&super::SetExpr::Blocks(counterexample_base().clone()), k);
        let pending = if start % 2 == 0 { Some(base.next_bit()) } else { None };
        PairingStream { base, pending }
    }
}

impl BitStream for PairingStream {
    fn next_bit(&mut self) -> bool {
        match self.pending.take() {
            Some(bit) => bit,
            None => {
                let a = self.base.next_bit();
                self.pending = Some(a);
                !a
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn streamed(p: Predicate, start: u64, len: u64) -> Vec<bool> {
        let mut s = p.stream_from(start);
        (0..len).map(|_| s.next_bit()).collect()
    }

    #[test]
    fn streams_match_membership_from_any_start() {
        for p in Predicate::ALL {
            for start in [1, 2, 3, 17, 65_530, 65_537, 1_000_000] {
                let direct: Vec<bool> = (start..start + 300).map(|n| p.member(n)).collect();
                assert_eq!(streamed(p, start, 300), direct, "{p} from {start}");
            }
        }
    }

    #[test]
    fn closed_form_counts() {
        for p in [Predicate::Squares, Predicate::Cubes, Predicate::Pow2] {
            let mut running = 0;
            for n in 1..=5000 {
                running += p.member(n) as u64;
                assert_eq!(p.count_upto(n), Some(running), "{p} at {n}");
            }
        }
    }

    #[test]
    fn primes_small() {
        let primes: Vec<u64> = (1..40).filter(|&n| is_prime(n)).collect();
        assert_eq!(primes, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37]);
        assert!(is_prime(1_000_000_007));
        assert!(!is_prime(3_215_031_751));
    }

    #[test]
    fn prime_count_to_a_million() {
        let mut s = Predicate::Primes.stream_from(1);
        let count = (0..1_000_000).filter(|_| s.next_bit()).count();
        assert_eq!(count, 78_498);
    }

    #[test]
    fn pairing_takes_one_of_each_pair() {
        for k in 1..=10_000 {
            let odd = Predicate::Pairing.member(2 * k - 1);
            let even = Predicate::Pairing.member(2 * k);
            assert!(odd ^ even, "pair {k}");
        }
    }

    #[test]
    fn registry_round_trip() {
        for p in Predicate::ALL {
            assert_eq!(p.name().parse::<Predicate>().unwrap(), p);
        }
    }
}
