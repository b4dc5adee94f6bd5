//! Periodic indicator patterns: a residue set modulo M stored as a bit table.

use bitvec::vec::BitVec;
use num_integer::{Integer, Roots};
use thiserror::Error;

use crate::rational::Rational;

use super::SetExpr;

/// Largest modulus a pattern may be refined to.
pub const MAX_MODULUS: u64 = 1_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("common modulus {0} exceeds the limit of {MAX_MODULUS}")]
pub struct ModulusTooLarge(pub u64);

/// `{n ≥ 1 : bits[n mod modulus]}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResiduePattern {
    modulus: u64,
    bits: BitVec,
}

impl ResiduePattern {
    pub fn new(modulus: u64, residues: &[u64]) -> Result<Self, ModulusTooLarge> {
        if modulus > MAX_MODULUS {
            return Err(ModulusTooLarge(modulus));
        }
        let mut bits = BitVec::repeat(false, modulus as usize);
        for &r in residues {
            bits.set(r as usize, true);
        }
        Ok(ResiduePattern { modulus, bits })
    }

    pub fn constant(value: bool) -> Self {
        ResiduePattern { modulus: 1, bits: BitVec::repeat(value, 1) }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn contains(&self, n: u64) -> bool {
        self.bits[(n % self.modulus) as usize]
    }

    pub fn is_empty(&self) -> bool {
        self.bits.not_any()
    }

    pub fn is_full(&self) -> bool {
        self.bits.all()
    }

    /// Exact density |R| / M.
    pub fn density(&self) -> Rational {
        Rational::new(self.bits.count_ones() as i128, self.modulus as i128)
    }

    pub fn residues(&self) -> Vec<u64> {
        self.bits.iter_ones().map(|r| r as u64).collect()
    }

    /// The same set over a multiple of the modulus.
    fn lift(&self, modulus: u64) -> BitVec {
        debug_assert_eq!(modulus % self.modulus, 0);
        let mut out = BitVec::with_capacity(modulus as usize);
        for _ in 0..modulus / self.modulus {
            out.extend_from_bitslice(&self.bits);
        }
        out
    }

    fn zip(&self, other: &Self, op: impl Fn(bool, bool) -> bool) -> Result<Self, ModulusTooLarge> {
        let modulus = self.modulus.lcm(&other.modulus);
        if modulus > MAX_MODULUS {
            return Err(ModulusTooLarge(modulus));
        }
        let (a, b) = (self.lift(modulus), other.lift(modulus));
        let bits = a.iter().by_vals().zip(b.iter().by_vals()).map(|(x, y)| op(x, y)).collect();
        Ok(ResiduePattern { modulus, bits }.minimized())
    }

    pub fn union(&self, other: &Self) -> Result<Self, ModulusTooLarge> {
        self.zip(other, |x, y| x || y)
    }

    pub fn inter(&self, other: &Self) -> Result<Self, ModulusTooLarge> {
        self.zip(other, |x, y| x && y)
    }

    pub fn diff(&self, other: &Self) -> Result<Self, ModulusTooLarge> {
        self.zip(other, |x, y| x && !y)
    }

    pub fn sym_diff(&self, other: &Self) -> Result<Self, ModulusTooLarge> {
        self.zip(other, |x, y| x != y)
    }

    pub fn compl(&self) -> Self {
        ResiduePattern { modulus: self.modulus, bits: !self.bits.clone() }
    }

    /// `{k·n : n ∈ self}`, a pattern modulo k·M.
    pub fn dilate(&self, k: u64) -> Result<Self, ModulusTooLarge> {
        let modulus = self.modulus.checked_mul(k).filter(|&m| m <= MAX_MODULUS).ok_or(ModulusTooLarge(self.modulus.saturating_mul(k)))?;
        let bits = (0..modulus).map(|r| r % k == 0 && self.contains(r / k)).collect();
        Ok(ResiduePattern { modulus, bits }.minimized())
    }

    /// `{n − k : n ∈ self, n > k}`.
    pub fn shift(&self, k: u64) -> Self {
        let bits = (0..self.modulus).map(|r| self.contains(r + k % self.modulus)).collect();
        ResiduePattern { modulus: self.modulus, bits }
    }

    /// Reduces to the smallest period.
    pub fn minimized(self) -> Self {
        let m = self.modulus;
        let mut divisors: Vec<u64> = (1..=m.sqrt()).filter(|d| m % d == 0).flat_map(|d| [d, m / d]).collect();
        divisors.sort_unstable();
        divisors.dedup();
        for d in divisors {
            if d == m {
                break;
            }
            let head = &self.bits[..d as usize];
            if self.bits.chunks(d as usize).all(|chunk| chunk == head) {
                return ResiduePattern { modulus: d, bits: head.to_bitvec() };
            }
        }
        self
    }

    /// `Empty`, `All` or a `Residue` expression for the pattern.
    pub fn to_expr(&self) -> SetExpr {
        if self.is_empty() {
            SetExpr::Empty
        } else if self.is_full() {
            SetExpr::All
        } else {
            SetExpr::Residue { modulus: self.modulus, residues: self.residues().into() }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pattern(m: u64, r: &[u64]) -> ResiduePattern {
        ResiduePattern::new(m, r).unwrap()
    }

    #[test]
    fn union_of_parity_classes_is_everything() {
        let all = pattern(2, &[0]).union(&pattern(2, &[1])).unwrap();
        assert!(all.is_full());
        assert_eq!(all.modulus(), 1);
    }

    #[test]
    fn diff_matches_membership() {
        let d = pattern(4, &[0, 2]).diff(&pattern(4, &[0])).unwrap();
        assert_eq!((d.modulus(), d.residues()), (4, vec![2]));
    }

    #[test]
    fn lcm_refinement() {
        let p = pattern(4, &[1]).inter(&pattern(6, &[1, 5])).unwrap();
        for n in 1..500 {
            assert_eq!(p.contains(n), n % 4 == 1 && (n % 6 == 1 || n % 6 == 5));
        }
        assert_eq!(p.density(), Rational::new(1, 6));
    }

    #[test]
    fn dilate_and_shift() {
        let odd = pattern(2, &[1]);
        let d = odd.dilate(4).unwrap();
        for n in 1..200 {
            assert_eq!(d.contains(n), n % 4 == 0 && (n / 4) % 2 == 1);
        }
        let s = pattern(5, &[0]).shift(2);
        for n in 1..200 {
            assert_eq!(s.contains(n), (n + 2) % 5 == 0);
        }
    }

    #[test]
    fn guard_rejects_huge_moduli() {
        let a = pattern(100_003, &[1]);
        let b = pattern(100_019, &[1]);
        assert!(a.union(&b).is_err());
    }
}
