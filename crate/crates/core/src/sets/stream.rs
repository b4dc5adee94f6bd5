//! Sequential indicator streams.
//!
//! [`build`] compiles a [`SetExpr`] into a tree of small state machines that
//! emit I(start), I(start+1), … one bit per call. Streams avoid the
//! per-call lookups that random-access membership needs, so full scans run
//! in time linear in the scanned span for every variant.

use super::{SetExpr, ZSpec};

/// An infinite indicator sequence read left to right.
pub trait BitStream: Send {
    fn next_bit(&mut self) -> bool;

    /// Discards `len` bits.
    fn skip(&mut self, len: u64) {
        for _ in 0..len {
            self.next_bit();
        }
    }

    /// Number of ones among the next `len` bits.
    fn count(&mut self, len: u64) -> u64 {
        let mut ones = 0;
        for _ in 0..len {
            ones += self.next_bit() as u64;
        }
        ones
    }
}

impl<S: BitStream + ?Sized> BitStream for Box<S> {
    fn next_bit(&mut self) -> bool {
        (**self).next_bit()
    }

    fn skip(&mut self, len: u64) {
        (**self).skip(len)
    }

    fn count(&mut self, len: u64) -> u64 {
        (**self).count(len)
    }
}

/// Builds a stream whose first bit is I(start). `start` must be ≥ 1.
pub fn build(expr: &SetExpr, start: u64) -> Box<dyn BitStream> {
    debug_assert!(start >= 1);
    match expr {
        SetExpr::Empty => Box::new(Constant(false)),
        SetExpr::All => Box::new(Constant(true)),
        SetExpr::Explicit(elements) => {
            let elements: Vec<u64> = elements[elements.partition_point(|&x| x < start)..].to_vec();
            Box::new(ExplicitStream { elements, index: 0, n: start })
        }
        SetExpr::Residue { modulus, residues } => {
            let r = start % modulus;
            let next = residues.partition_point(|&x| x < r);
            Box::new(ResidueStream { modulus: *modulus, residues: residues.to_vec(), r, next })
        }
        SetExpr::Blocks(blocks) => Box::new(BlockStream::new(blocks.spec(), start)),
        SetExpr::Greedy(greedy) => {
            let mut s = greedy.stream();
            s.skip(start - 1);
            Box::new(s)
        }
        SetExpr::Predicate(p) => p.stream_from(start),
        SetExpr::Union(a, b) => binary(a, b, start, |x, y| x || y),
        SetExpr::Inter(a, b) => binary(a, b, start, |x, y| x && y),
        SetExpr::Diff(a, b) => binary(a, b, start, |x, y| x && !y),
        SetExpr::SymDiff(a, b) => binary(a, b, start, |x, y| x != y),
        SetExpr::Compl(a) => Box::new(Not(build(a, start))),
        SetExpr::Dilate(k, a) => {
            let k = *k;
            let inner = build(a, start.div_ceil(k));
            Box::new(DilateStream { inner, k, phase: start % k })
        }
        SetExpr::Shift(k, a) => match start.checked_add(*k) {
            Some(s) => build(a, s),
            None => Box::new(Constant(false)),
        },
        SetExpr::Midpoint(m) => {
            let mut s = m.stream();
            s.skip(start - 1);
            Box::new(s)
        }
    }
}

struct Constant(bool);

impl BitStream for Constant {
    fn next_bit(&mut self) -> bool {
        self.0
    }

    fn skip(&mut self, _len: u64) {}

    fn count(&mut self, len: u64) -> u64 {
        if self.0 {
            len
        } else {
            0
        }
    }
}

struct ExplicitStream {
    elements: Vec<u64>,
    index: usize,
    n: u64,
}

impl BitStream for ExplicitStream {
    fn next_bit(&mut self) -> bool {
        let hit = self.elements.get(self.index) == Some(&self.n);
        self.index += hit as usize;
        self.n += 1;
        hit
    }
}

struct ResidueStream {
    modulus: u64,
    residues: Vec<u64>,
    /// n mod modulus for the next bit.
    r: u64,
    /// First index into `residues` with value ≥ r.
    next: usize,
}

impl BitStream for ResidueStream {
    fn next_bit(&mut self) -> bool {
        let hit = self.residues.get(self.next) == Some(&self.r);
        self.next += hit as usize;
        self.r += 1;
        if self.r == self.modulus {
            self.r = 0;
            self.next = 0;
        }
        hit
    }
}

struct BlockStream {
    runs: super::blocks::Runs,
    n: u64,
    last: u64,
    one: bool,
}

impl BlockStream {
    fn new(spec: &ZSpec, start: u64) -> Self {
        let mut runs = spec.runs();
        let (mut last, mut one) = (0, false);
        for (_, l, o) in runs.by_ref() {
            (last, one) = (l, o);
            if l >= start {
                break;
            }
        }
        BlockStream { runs, n: start, last, one }
    }
}

impl BitStream for BlockStream {
    fn next_bit(&mut self) -> bool {
        if self.n > self.last {
            if let Some((_, l, o)) = self.runs.next() {
                self.last = l;
                self.one = o;
            }
        }
        self.n += 1;
        self.one
    }

    fn count(&mut self, mut len: u64) -> u64 {
        let mut ones = 0;
        while len > 0 {
            if self.n > self.last {
                match self.runs.next() {
                    Some((_, l, o)) => {
                        self.last = l;
                        self.one = o;
                    }
                    None => self.last = u64::MAX,
                }
            }
            let take = len.min(self.last - self.n + 1);
            if self.one {
                ones += take;
            }
            self.n += take;
            len -= take;
        }
        ones
    }

    fn skip(&mut self, len: u64) {
        self.count(len);
    }
}

struct Binary<F> {
    a: Box<dyn BitStream>,
    b: Box<dyn BitStream>,
    op: F,
}

impl<F: Fn(bool, bool) -> bool + Send> BitStream for Binary<F> {
    fn next_bit(&mut self) -> bool {
        let x = self.a.next_bit();
        let y = self.b.next_bit();
        (self.op)(x, y)
    }
}

fn binary<F>(a: &SetExpr, b: &SetExpr, start: u64, op: F) -> Box<dyn BitStream>
where
    F: Fn(bool, bool) -> bool + Send + 'static,
{
    Box::new(Binary { a: build(a, start), b: build(b, start), op })
}

struct Not(Box<dyn BitStream>);

impl BitStream for Not {
    fn next_bit(&mut self) -> bool {
        !self.0.next_bit()
    }

    fn skip(&mut self, len: u64) {
        self.0.skip(len)
    }

    fn count(&mut self, len: u64) -> u64 {
        len - self.0.count(len)
    }
}

struct DilateStream {
    inner: Box<dyn BitStream>,
    k: u64,
    /// n mod k for the next bit.
    phase: u64,
}

impl BitStream for DilateStream {
    fn next_bit(&mut self) -> bool {
        let bit = self.phase == 0 && self.inner.next_bit();
        self.phase += 1;
        if self.phase == self.k {
            self.phase = 0;
        }
        bit
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::Tail;

    fn sample_exprs() -> Vec<SetExpr> {
        let geo = SetExpr::blocks(ZSpec::Geometric { ratio: 2 }).unwrap();
        vec![
            SetExpr::Empty,
            SetExpr::All,
            SetExpr::explicit([3, 7, 8, 100]).unwrap(),
            SetExpr::residue(6, [1, 5]).unwrap(),
            geo.clone(),
            SetExpr::blocks(ZSpec::List { lengths: vec![2, 1, 3], tail: Tail::Cycle }).unwrap(),
            SetExpr::union(geo.clone(), SetExpr::residue(3, [0]).unwrap()),
            SetExpr::compl(SetExpr::sym_diff(geo.clone(), SetExpr::predicate("squares").unwrap())),
            SetExpr::dilate(3, geo.clone()).unwrap(),
            SetExpr::shift(5, SetExpr::dilate(2, geo).unwrap()),
        ]
    }

    #[test]
    fn every_start_matches_membership() {
        for e in sample_exprs() {
            for start in [1, 2, 3, 4, 7, 8, 50, 99] {
                let mut s = build(&e, start);
                for n in start..start + 200 {
                    assert_eq!(s.next_bit(), e.member(n), "{e} at {n} from {start}");
                }
            }
        }
    }

    #[test]
    fn count_matches_bitwise() {
        for e in sample_exprs() {
            let mut a = build(&e, 1);
            let mut b = build(&e, 1);
            for len in [1, 5, 17, 300, 1000] {
                let bitwise = (0..len).filter(|_| b.next_bit()).count() as u64;
                assert_eq!(a.count(len), bitwise, "{e}");
            }
        }
    }
}
