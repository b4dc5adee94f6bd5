//! Run-length ("block") sets: z₁ zeros, then z₂ ones, then z₃ zeros, …

use std::sync::{Arc, RwLock};

use super::SetError;

/// What a `List` schedule does after its explicit entries run out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tail {
    /// z_n = z_k for n > k.
    RepeatLast,
    /// z_{k+1}, z_{k+2}, … cycle through z₂ … z_k.
    Cycle,
}

/// Run-length schedule z₁, z₂, … with z₁ ≥ 0 and z_n ≥ 1 for n ≥ 2.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ZSpec {
    /// z_n = ratio^(n−1).
    Geometric { ratio: u64 },
    /// z_n = n^exponent.
    Poly { exponent: u32 },
    /// Finite prefix `lengths` followed by `tail`.
    List { lengths: Vec<u64>, tail: Tail },
}

impl ZSpec {
    pub fn validate(&self) -> Result<(), SetError> {
        match self {
            ZSpec::Geometric { ratio } if *ratio < 2 => Err(SetError::InvalidBlocks("geometric ratio must be at least 2")),
            ZSpec::Poly { exponent } if *exponent < 1 => Err(SetError::InvalidBlocks("polynomial exponent must be at least 1")),
            ZSpec::List { lengths, .. } if lengths.len() < 2 => {
                Err(SetError::InvalidBlocks("list needs z1 and at least one later run length"))
            }
            ZSpec::List { lengths, .. } if lengths[1..].contains(&0) => {
                Err(SetError::InvalidBlocks("run lengths after z1 must be at least 1"))
            }
            _ => Ok(()),
        }
    }

    /// Run length z_n for n ≥ 1, saturating at `u64::MAX`.
    pub fn length(&self, n: u64) -> u64 {
        debug_assert!(n >= 1);
        match self {
            ZSpec::Geometric { ratio } => u32::try_from(n - 1)
                .ok()
                .and_then(|e| ratio.checked_pow(e))
                .unwrap_or(u64::MAX),
            ZSpec::Poly { exponent } => n.checked_pow(*exponent).unwrap_or(u64::MAX),
            ZSpec::List { lengths, tail } => {
                let k = lengths.len() as u64;
                if n <= k {
                    lengths[(n - 1) as usize]
                } else {
                    match tail {
                        Tail::RepeatLast => lengths[lengths.len() - 1],
                        Tail::Cycle => lengths[1 + ((n - 1 - k) % (k - 1)) as usize],
                    }
                }
            }
        }
    }

    /// Runs `(first, last, is_one)` in order, stopping once positions pass
    /// `u64::MAX`. Empty runs (z₁ = 0) are skipped.
    pub fn runs(&self) -> Runs {
        Runs { spec: self.clone(), index: 0, end: 0, done: false }
    }
}

/// Iterator over the runs of a block schedule.
#[derive(Debug, Clone)]
pub struct Runs {
    spec: ZSpec,
    index: u64,
    end: u64,
    done: bool,
}

impl Runs {
    /// Index (1-based) of the run most recently yielded.
    pub fn index(&self) -> u64 {
        self.index
    }
}

impl Iterator for Runs {
    type Item = (u64, u64, bool);

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if self.done {
                return None;
            }
            self.index += 1;
            let len = self.spec.length(self.index);
            if len == 0 {
                continue;
            }
            let first = self.end + 1;
            let last = self.end.saturating_add(len);
            if last == u64::MAX {
                self.done = true;
            }
            self.end = last;
            return Some((first, last, self.index % 2 == 0));
        }
    }
}

/// Checkpoints Z_n and cumulative ones, extended lazily.
#[derive(Debug, Default)]
struct Checkpoints {
    /// `ends[j]` = Z_{j+1}.
    ends: Vec<u64>,
    /// `ones[j]` = number of ones in [1, Z_{j+1}].
    ones: Vec<u64>,
    saturated: bool,
}

/// A block set together with its lazily extended checkpoint table.
#[derive(Debug, Clone)]
pub struct BlockSet {
    spec: ZSpec,
    table: Arc<RwLock<Checkpoints>>,
}

impl PartialEq for BlockSet {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl BlockSet {
    pub fn new(spec: ZSpec) -> Result<Self, SetError> {
        spec.validate()?;
        Ok(BlockSet { spec, table: Arc::default() })
    }

    pub fn spec(&self) -> &ZSpec {
        &self.spec
    }

    fn ensure(&self, n: u64) {
        {
            let table = self.table.read().expect("block table poisoned");
            if table.saturated || table.ends.last().is_some_and(|&z| z >= n) {
                return;
            }
        }
        let mut table = self.table.write().expect("block table poisoned");
        while !table.saturated && table.ends.last().is_none_or(|&z| z < n) {
            let j = table.ends.len() as u64 + 1;
            let len = self.spec.length(j);
            let prev_end = table.ends.last().copied().unwrap_or(0);
            let prev_ones = table.ones.last().copied().unwrap_or(0);
            let end = prev_end.saturating_add(len);
            let ones = if j % 2 == 0 { prev_ones.saturating_add(end - prev_end) } else { prev_ones };
            table.ends.push(end);
            table.ones.push(ones);
            if end == u64::MAX {
                table.saturated = true;
            }
        }
    }

    /// Index j (1-based) of the run containing n, i.e. Z_{j−1} < n ≤ Z_j.
    pub fn run_index(&self, n: u64) -> u64 {
        self.ensure(n);
        let table = self.table.read().expect("block table poisoned");
        table.ends.partition_point(|&z| z < n) as u64 + 1
    }

    /// Partial sum Z_j.
    pub fn partial_sum(&self, j: u64) -> u64 {
        assert!(j >= 1);
        loop {
            {
                let table = self.table.read().expect("block table poisoned");
                if let Some(&z) = table.ends.get((j - 1) as usize) {
                    return z;
                }
                if table.saturated {
                    return u64::MAX;
                }
            }
            let target = {
                let table = self.table.read().expect("block table poisoned");
                table.ends.last().copied().unwrap_or(0).saturating_add(1)
            };
            self.ensure(target);
        }
    }

    pub fn member(&self, n: u64) -> bool {
        self.run_index(n) % 2 == 0
    }

    /// Members in [1, n], from the checkpoint table.
    pub fn count_upto(&self, n: u64) -> u64 {
        if n == 0 {
            return 0;
        }
        let j = self.run_index(n) as usize;
        let table = self.table.read().expect("block table poisoned");
        let (prev_end, prev_ones) = if j >= 2 { (table.ends[j - 2], table.ones[j - 2]) } else { (0, 0) };
        if j % 2 == 0 {
            prev_ones + (n - prev_end)
        } else {
            prev_ones
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn indicator(set: &BlockSet, upto: u64) -> Vec<u8> {
        (1..=upto).map(|n| set.member(n) as u8).collect()
    }

    #[test]
    fn geometric_prefix() {
        let set = BlockSet::new(ZSpec::Geometric { ratio: 2 }).unwrap();
        assert_eq!(indicator(&set, 15), vec![0, 1, 1, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1, 1, 1]);
        assert_eq!(set.partial_sum(4), 15);
    }

    #[test]
    fn list_starting_with_ones() {
        let set = BlockSet::new(ZSpec::List { lengths: vec![0, 1], tail: Tail::RepeatLast }).unwrap();
        assert_eq!(indicator(&set, 8), vec![1, 0, 1, 0, 1, 0, 1, 0]);
    }

    #[test]
    fn poly_one_run_lengths() {
        let set = BlockSet::new(ZSpec::Poly { exponent: 1 }).unwrap();
        let runs: Vec<u64> = ZSpec::Poly { exponent: 1 }.runs().take(5).map(|(a, b, _)| b - a + 1).collect();
        assert_eq!(runs, vec![1, 2, 3, 4, 5]);
        assert_eq!(indicator(&set, 10), vec![0, 1, 1, 0, 0, 0, 1, 1, 1, 1]);
    }

    #[test]
    fn cycle_tail_repeats_later_entries() {
        let spec = ZSpec::List { lengths: vec![1, 2, 3], tail: Tail::Cycle };
        let lengths: Vec<u64> = (1..=7).map(|n| spec.length(n)).collect();
        assert_eq!(lengths, vec![1, 2, 3, 2, 3, 2, 3]);
    }

    #[test]
    fn invalid_specs() {
        assert!(BlockSet::new(ZSpec::Geometric { ratio: 1 }).is_err());
        assert!(BlockSet::new(ZSpec::Poly { exponent: 0 }).is_err());
        assert!(BlockSet::new(ZSpec::List { lengths: vec![3], tail: Tail::Cycle }).is_err());
        assert!(BlockSet::new(ZSpec::List { lengths: vec![0, 1, 0], tail: Tail::Cycle }).is_err());
    }

    #[test]
    fn counts_match_scan() {
        for spec in [ZSpec::Geometric { ratio: 3 }, ZSpec::Poly { exponent: 2 }] {
            let set = BlockSet::new(spec).unwrap();
            let mut running = 0;
            for n in 1..=5000 {
                running += set.member(n) as u64;
                assert_eq!(set.count_upto(n), running);
            }
        }
    }

    #[test]
    fn saturates_without_overflow() {
        let set = BlockSet::new(ZSpec::Geometric { ratio: 1 << 20 }).unwrap();
        assert!(set.member(u64::MAX) || !set.member(u64::MAX));
        assert_eq!(set.partial_sum(10), u64::MAX);
    }
}
