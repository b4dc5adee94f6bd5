//! Streamed estimates of ν⁺ and ν⁻ over a trailing window.

use std::cmp::Ordering;

use crate::rational::{ratio, Rational};
use crate::sets::SetExpr;

use super::{Density, LimitReport, LimitsError, Method, Verdict};

/// Smallest horizon accepted by [`estimate_limits`].
pub const MIN_HORIZON: u64 = 1000;

/// Oscillation below this amplitude is never called persistent, whatever
/// the tolerance. Slowly converging members of 𝓕 (polynomial blocks with
/// large exponents) still swing by a few hundredths at 10⁷.
pub const PERSISTENCE_FLOOR: f64 = 0.05;

/// Trace points per doubling of N (spacing ratio 2^(1/8)).
pub const TRACE_STEPS_PER_DOUBLING: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateOptions {
    pub horizon: u64,
    /// Fraction of the horizon scanned for extremes: N ∈ [⌈(1−w)H⌉, H].
    pub window: f64,
    pub tolerance: f64,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        EstimateOptions { horizon: 1_000_000, window: 0.5, tolerance: 1e-3 }
    }
}

impl EstimateOptions {
    pub fn validate(&self) -> Result<(), LimitsError> {
        if self.horizon < MIN_HORIZON {
            return Err(LimitsError::HorizonTooSmall { min: MIN_HORIZON, got: self.horizon });
        }
        if !(self.window > 0.0 && self.window < 1.0) {
            return Err(LimitsError::InvalidWindow);
        }
        if !(self.tolerance.is_finite() && self.tolerance >= 0.0) {
            return Err(LimitsError::InvalidTolerance);
        }
        Ok(())
    }
}

/// `count / n`, kept unreduced for cheap exact comparison.
#[derive(Debug, Clone, Copy)]
struct Frac {
    count: u64,
    n: u64,
}

impl Frac {
    fn cmp(&self, other: &Frac) -> Ordering {
        (self.count as u128 * other.n as u128).cmp(&(other.count as u128 * self.n as u128))
    }

    fn value(&self) -> Rational {
        ratio(self.count, self.n)
    }
}

/// One streaming pass: exact window extremes plus the f64 amplitude of ν_N
/// over (H/2, H], (H/4, H/2] and (H/8, H/4].
pub(crate) struct WindowScan {
    pub max: Rational,
    pub min: Rational,
    pub amplitudes: [f64; 3],
    /// Minimum of ν_N in the same sub-windows.
    pub minima: [f64; 3],
}

pub(crate) fn window_scan(e: &SetExpr, horizon: u64, window: f64) -> WindowScan {
    let start = (((1.0 - window) * horizon as f64).ceil() as u64).clamp(1, horizon);
    let sub_start = horizon / 8 + 1;
    let first = start.min(sub_start);
    let mut stream = e.stream();
    let mut count = stream.count(first - 1);
    let mut max = Frac { count: 0, n: 1 };
    let mut min = Frac { count: 1, n: 1 };
    let bounds = [horizon / 2, horizon / 4, horizon / 8];
    let mut sub = [(f64::INFINITY, f64::NEG_INFINITY); 3];
    for n in first..=horizon {
        count += stream.next_bit() as u64;
        let here = Frac { count, n };
        if n >= start {
            if here.cmp(&max) == Ordering::Greater {
                max = here;
            }
            if here.cmp(&min) == Ordering::Less {
                min = here;
            }
        }
        if n >= sub_start {
            let j = bounds.iter().position(|&b| n > b).unwrap_or(2);
            let v = count as f64 / n as f64;
            sub[j].0 = sub[j].0.min(v);
            sub[j].1 = sub[j].1.max(v);
        }
    }
    let amplitudes = sub.map(|(lo, hi)| if hi >= lo { hi - lo } else { 0.0 });
    let minima = sub.map(|(lo, _)| if lo.is_finite() { lo } else { 0.0 });
    WindowScan { max: max.value(), min: min.value(), amplitudes, minima }
}

/// Truncated limsup/liminf: extremes of ν_N over the trailing window.
///
/// The verdict is `InF` when the window range is within tolerance,
/// `NotInF` when each of the three latest doubling sub-windows swings by
/// more than `max(tolerance, PERSISTENCE_FLOOR)`, and `Unknown` otherwise.
pub fn estimate_limits(e: &SetExpr, options: &EstimateOptions) -> Result<LimitReport, LimitsError> {
    options.validate()?;
    let scan = window_scan(e, options.horizon, options.window);
    let (upper, lower) = (crate::rational::to_f64(&scan.max), crate::rational::to_f64(&scan.min));
    let threshold = options.tolerance.max(PERSISTENCE_FLOOR);
    let verdict = if upper - lower <= options.tolerance {
        Verdict::InF
    } else if scan.amplitudes.iter().all(|&a| a > threshold) {
        Verdict::NotInF
    } else {
        Verdict::Unknown
    };
    let point = (upper + lower) / 2.0;
    Ok(LimitReport {
        upper: Density::Approx(upper),
        lower: Density::Approx(lower),
        limit: (verdict == Verdict::InF).then_some(Density::Approx(point)),
        method: Method::Streamed,
        horizon: Some(options.horizon),
        tolerance: options.tolerance,
        verdict,
        point: Some(point),
        oscillation: scan.amplitudes.to_vec(),
    })
}

/// Sample points ⌊2^(i/8)⌋ up to `horizon`, deduplicated, always ending at
/// `horizon`.
pub fn trace_points(horizon: u64) -> Vec<u64> {
    let mut points = Vec::new();
    let mut i = 0u32;
    loop {
        let n = 2f64.powf(i as f64 / TRACE_STEPS_PER_DOUBLING as f64).floor() as u64;
        if n >= horizon {
            break;
        }
        if points.last() != Some(&n) {
            points.push(n);
        }
        i += 1;
    }
    points.push(horizon);
    points
}

/// Exact ν_N at geometrically spaced N, in one pass.
pub fn trace(e: &SetExpr, horizon: u64) -> Vec<(u64, Rational)> {
    let mut stream = e.stream();
    let mut count = 0;
    let mut at = 0;
    trace_points(horizon.max(1))
        .into_iter()
        .map(|n| {
            count += stream.count(n - at);
            at = n;
            (n, ratio(count, n))
        })
        .collect()
}
