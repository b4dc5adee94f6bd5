//! Gap-function diagnostics: is P_A(N) = o(N)?

use serde::Serialize;

use crate::sets::{gap_functions, BlockSet, Gap, SetExpr, ZSpec};

use super::estimate::MIN_HORIZON;
use super::LimitsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Trend {
    Decreasing,
    BoundedAwayFromZero,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapSample {
    pub n: u64,
    /// P_A(N) / N, or `None` when no member was found before the search limit.
    pub p_ratio: Option<f64>,
    /// Q_A(N) / N, or `None` when no non-member was found.
    pub q_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapDiagnostic {
    pub samples: Vec<GapSample>,
    /// Positions searched beyond each sample before a gap is censored.
    pub search_limit: u64,
    pub p_trend: Trend,
    pub q_trend: Trend,
    pub trend: Trend,
}

/// Least-squares non-increasing fit (pool adjacent violators).
pub(crate) fn antitonic_fit(values: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<(f64, usize)> = Vec::new();
    for &v in values {
        blocks.push((v, 1));
        while blocks.len() >= 2 {
            let (b, nb) = blocks[blocks.len() - 1];
            let (a, na) = blocks[blocks.len() - 2];
            if a >= b {
                break;
            }
            blocks.pop();
            let total = na + nb;
            *blocks.last_mut().unwrap() = ((a * na as f64 + b * nb as f64) / total as f64, total);
        }
    }
    blocks.into_iter().flat_map(|(v, n)| std::iter::repeat_n(v, n)).collect()
}

/// Fitted tail values below this are treated as vanishing.
const VANISHING: f64 = 0.05;

fn tail_trend(ratios: &[Option<f64>]) -> Option<Trend> {
    let finite: Vec<f64> = ratios.iter().flatten().copied().collect();
    if finite.is_empty() {
        return None;
    }
    let tail = &finite[finite.len() / 2..];
    if tail.len() < 3 {
        return Some(Trend::Inconclusive);
    }
    let fit = antitonic_fit(tail);
    let (first, last) = (fit[0], fit[fit.len() - 1]);
    Some(if last >= VANISHING && last >= first / 2.0 {
        Trend::BoundedAwayFromZero
    } else if last < VANISHING && last <= first / 2.0 {
        Trend::Decreasing
    } else {
        Trend::Inconclusive
    })
}

/// P_A(N)/N and Q_A(N)/N at N = 1, 2, 4, … ≤ horizon, with the trend of
/// each ratio over the later half of the samples.
pub fn gap_sublinearity(e: &SetExpr, horizon: u64) -> Result<GapDiagnostic, LimitsError> {
    if horizon < MIN_HORIZON {
        return Err(LimitsError::HorizonTooSmall { min: MIN_HORIZON, got: horizon });
    }
    let search_limit = horizon.saturating_mul(4);
    let ratio = |g: Gap, n: u64| g.finite().map(|k| k as f64 / n as f64);
    let samples: Vec<GapSample> = std::iter::successors(Some(1u64), |&n| n.checked_mul(2))
        .take_while(|&n| n <= horizon)
        .map(|n| {
            let gaps = gap_functions(e, n, n + search_limit);
            GapSample { n, p_ratio: ratio(gaps.p, n), q_ratio: ratio(gaps.q, n) }
        })
        .collect();
    let p: Vec<Option<f64>> = samples.iter().map(|s| s.p_ratio).collect();
    let q: Vec<Option<f64>> = samples.iter().map(|s| s.q_ratio).collect();
    let (pt, qt) = (tail_trend(&p), tail_trend(&q));
    let trend = match (pt, qt) {
        (Some(Trend::BoundedAwayFromZero), _) | (_, Some(Trend::BoundedAwayFromZero)) => Trend::BoundedAwayFromZero,
        (Some(Trend::Decreasing) | None, Some(Trend::Decreasing) | None) if pt.is_some() || qt.is_some() => {
            Trend::Decreasing
        }
        _ => Trend::Inconclusive,
    };
    Ok(GapDiagnostic {
        samples,
        search_limit,
        p_trend: pt.unwrap_or(Trend::Inconclusive),
        q_trend: qt.unwrap_or(Trend::Inconclusive),
        trend,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockGapSample {
    /// Block pair index N.
    pub index: u64,
    /// Z_{2N}, the end of the N-th run of ones.
    pub end: u64,
    /// P_A(Z_{2N}), measured by scanning.
    pub gap: u64,
    /// P_A(Z_{2N})^{(q+1)/q} / Z_{2N}.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockGapProfile {
    pub exponent: u32,
    pub samples: Vec<BlockGapSample>,
    /// [c, C] = [r₁/4, 4·r₁] from the first sample's ratio r₁.
    pub bracket: (f64, f64),
    pub within: bool,
}

/// Width factor of the bracket around the first ratio.
pub const BRACKET_FACTOR: f64 = 4.0;

/// For z_n = n^q: the normalized gap after each one-run, which stays
/// bounded above and below although P_A(N)/N → 0 only like N^{−1/(q+1)}.
pub fn block_gap_profile(exponent: u32, horizon: u64) -> Result<BlockGapProfile, LimitsError> {
    if horizon < MIN_HORIZON {
        return Err(LimitsError::HorizonTooSmall { min: MIN_HORIZON, got: horizon });
    }
    let blocks = BlockSet::new(ZSpec::Poly { exponent }).map_err(|e| LimitsError::NotExactlySolvable(e.to_string()))?;
    let set = SetExpr::Blocks(blocks.clone());
    let power = (exponent as f64 + 1.0) / exponent as f64;
    let mut samples = Vec::new();
    for index in 1.. {
        let end = blocks.partial_sum(2 * index);
        let next_one = blocks.partial_sum(2 * index + 1).saturating_add(1);
        if next_one > horizon {
            break;
        }
        let gap = gap_functions(&set, end, next_one).p.finite().expect("next run of ones lies within the search");
        samples.push(BlockGapSample { index, end, gap, ratio: (gap as f64).powf(power) / end as f64 });
    }
    let first = samples.first().map_or(f64::NAN, |s| s.ratio);
    let bracket = (first / BRACKET_FACTOR, first * BRACKET_FACTOR);
    let within = !samples.is_empty() && samples.iter().all(|s| s.ratio >= bracket.0 && s.ratio <= bracket.1);
    Ok(BlockGapProfile { exponent, samples, bracket, within })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pava_pools_violations() {
        assert_eq!(antitonic_fit(&[3.0, 1.0, 2.0]), vec![3.0, 1.5, 1.5]);
        assert_eq!(antitonic_fit(&[1.0, 2.0, 3.0]), vec![2.0, 2.0, 2.0]);
    }

    #[test]
    fn evens_have_vanishing_gaps() {
        let d = gap_sublinearity(&SetExpr::residue(2, [0]).unwrap(), 1 << 15).unwrap();
        assert_eq!(d.trend, Trend::Decreasing);
        for s in &d.samples {
            assert!(s.p_ratio.unwrap() <= 2.0 / s.n as f64);
        }
    }

    #[test]
    fn geometric_gaps_stay_proportional() {
        let d = gap_sublinearity(&SetExpr::blocks(ZSpec::Geometric { ratio: 2 }).unwrap(), 1 << 20).unwrap();
        assert_eq!(d.p_trend, Trend::BoundedAwayFromZero);
        assert_eq!(d.trend, Trend::BoundedAwayFromZero);
    }

    #[test]
    fn everything_has_censored_complement_gaps() {
        let d = gap_sublinearity(&SetExpr::All, 4096).unwrap();
        assert!(d.samples.iter().all(|s| s.q_ratio.is_none()));
        assert_eq!(d.trend, Trend::Decreasing);
    }

    #[test]
    fn polynomial_profile_is_bracketed() {
        let p = block_gap_profile(2, 1 << 20).unwrap();
        assert!(p.within, "{:?}", p.samples.iter().map(|s| s.ratio).collect::<Vec<_>>());
        assert!(p.samples.len() > 10);
        assert_eq!(p.samples[0].gap, 10);
    }
}
