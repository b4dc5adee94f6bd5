//! Upper and lower Cesàro limits ν⁺, ν⁻ and the limit ν.
//!
//! [`exact_limits`] evaluates the structured fragment in closed form.
//! [`estimate_limits`] scans ν_N up to a horizon and reports the extremes
//! over a trailing window. [`classify`] tries the first and falls back to
//! the second.

pub(crate) mod estimate;
mod exact;
mod gaps;

use std::fmt;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::rational::{decimal12, format_sig, to_f64, Rational};
use crate::sets::SetExpr;

pub use estimate::{estimate_limits, trace, trace_points, EstimateOptions, MIN_HORIZON, PERSISTENCE_FLOOR, TRACE_STEPS_PER_DOUBLING};
pub use exact::{exact_form, exact_limits, exact_upper, ExactForm};
pub use gaps::{block_gap_profile, gap_sublinearity, BlockGapProfile, BlockGapSample, BRACKET_FACTOR, GapDiagnostic, GapSample, Trend};

/// A density value: exact, or a floating-point estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Density {
    Exact(Rational),
    Approx(f64),
}

impl Density {
    pub fn to_f64(&self) -> f64 {
        match self {
            Density::Exact(r) => to_f64(r),
            Density::Approx(x) => *x,
        }
    }

    pub fn exact(&self) -> Option<Rational> {
        match self {
            Density::Exact(r) => Some(*r),
            Density::Approx(_) => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Density::Exact(_))
    }
}

impl fmt::Display for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Density::Exact(r) => write!(f, "{r}"),
            Density::Approx(x) => write!(f, "≈{}", format_sig(*x, 6)),
        }
    }
}

impl Serialize for Density {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("Density", 2)?;
        match self {
            Density::Exact(r) => {
                s.serialize_field("exact", &r.to_string())?;
                s.serialize_field("decimal", &decimal12(r))?;
            }
            Density::Approx(x) => {
                s.serialize_field("exact", &Option::<String>::None)?;
                s.serialize_field("decimal", &format_sig(*x, 12))?;
            }
        }
        s.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    /// Residue arithmetic modulo null sets.
    Exact,
    /// Closed-form block formulas (possibly combined with exact parts).
    BlockFormula,
    Streamed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    InF,
    NotInF,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitReport {
    pub upper: Density,
    pub lower: Density,
    /// Present when ν⁺ and ν⁻ agree within `tolerance`.
    pub limit: Option<Density>,
    pub method: Method,
    /// Largest N examined; `None` for closed-form results.
    pub horizon: Option<u64>,
    pub tolerance: f64,
    pub verdict: Verdict,
    /// Streamed only: midpoint of the window extremes, the best single
    /// guess at ν even when the window has not settled.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<f64>,
    /// Streamed only: ν_N amplitude in the three latest doubling
    /// sub-windows, newest first.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub oscillation: Vec<f64>,
}

impl LimitReport {
    pub(crate) fn exact(upper: Rational, lower: Rational, method: Method) -> Self {
        let limit = (upper == lower).then_some(Density::Exact(upper));
        LimitReport {
            upper: Density::Exact(upper),
            lower: Density::Exact(lower),
            limit,
            method,
            horizon: None,
            tolerance: 0.0,
            verdict: if upper == lower { Verdict::InF } else { Verdict::NotInF },
            point: None,
            oscillation: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LimitsError {
    #[error("not exactly solvable: {0}")]
    NotExactlySolvable(String),
    #[error("horizon must be at least {min}, got {got}")]
    HorizonTooSmall { min: u64, got: u64 },
    #[error("window must lie strictly between 0 and 1")]
    InvalidWindow,
    #[error("tolerance must be finite and nonnegative")]
    InvalidTolerance,
}

/// Outcome of [`classify`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Class {
    InF(Density),
    Null,
    NotInF { upper: Density, lower: Density },
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub class: Class,
    /// True when the class rests on a streamed estimate.
    pub approximate: bool,
    pub report: LimitReport,
}

/// Exact classification when possible, else a streamed estimate.
pub fn classify(e: &SetExpr, options: &EstimateOptions) -> Result<Classification, LimitsError> {
    let report = match exact_limits(e) {
        Ok(report) => report,
        Err(LimitsError::NotExactlySolvable(_)) => estimate_limits(e, options)?,
        Err(other) => return Err(other),
    };
    let approximate = report.method == Method::Streamed;
    let class = match (report.verdict, report.limit) {
        (Verdict::InF, Some(limit)) => {
            let null = match limit {
                Density::Exact(r) => r == Rational::from_integer(0),
                Density::Approx(x) => x <= options.tolerance,
            };
            if null {
                Class::Null
            } else {
                Class::InF(limit)
            }
        }
        (Verdict::NotInF, _) => Class::NotInF { upper: report.upper, lower: report.lower },
        _ => Class::Unknown,
    };
    Ok(Classification { class, approximate, report })
}

/// ν of a set with a limit, and the ν⁺ bound to use with it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitValue {
    pub value: Rational,
    pub upper: Rational,
    /// False when both come from a streamed estimate.
    pub exact: bool,
}

/// Rounds an estimate in [0, 1] to a rational with denominator 10¹².
fn rational_estimate(x: f64) -> Rational {
    const SCALE: i128 = 1_000_000_000_000;
    Rational::new((x.clamp(0.0, 1.0) * SCALE as f64).round() as i128, SCALE)
}

/// The limit of `e`: exact when possible, else the midpoint of a streamed
/// window at `horizon`. `None` when the set is known to oscillate.
/// An `Unknown` streamed verdict is given the benefit of the doubt.
pub fn limit_value(e: &SetExpr, horizon: u64) -> Result<Option<LimitValue>, LimitsError> {
    match exact_limits(e) {
        Ok(r) => Ok(r.limit.map(|limit| {
            let value = limit.exact().expect("closed form");
            LimitValue { value, upper: value, exact: true }
        })),
        Err(LimitsError::NotExactlySolvable(_)) => {
            let r = estimate_limits(e, &EstimateOptions { horizon, ..Default::default() })?;
            if r.verdict == Verdict::NotInF {
                return Ok(None);
            }
            let point = r.point.expect("streamed estimate");
            Ok(Some(LimitValue {
                value: rational_estimate(point),
                upper: rational_estimate(r.upper.to_f64()),
                exact: false,
            }))
        }
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::ZSpec;

    #[test]
    fn residue_classifies_exactly() {
        let c = classify(&SetExpr::residue(2, [0]).unwrap(), &EstimateOptions::default()).unwrap();
        assert_eq!(c.class, Class::InF(Density::Exact(Rational::new(1, 2))));
        assert!(!c.approximate);
    }

    #[test]
    fn geometric_blocks_are_not_in_f() {
        let e = SetExpr::blocks(ZSpec::Geometric { ratio: 2 }).unwrap();
        let c = classify(&e, &EstimateOptions::default()).unwrap();
        assert_eq!(
            c.class,
            Class::NotInF { upper: Density::Exact(Rational::new(2, 3)), lower: Density::Exact(Rational::new(1, 3)) }
        );
    }

    #[test]
    fn primes_are_approximately_null() {
        let options = EstimateOptions { horizon: 1_000_000, window: 0.5, tolerance: 0.1 };
        let c = classify(&SetExpr::predicate("primes").unwrap(), &options).unwrap();
        assert_eq!(c.class, Class::Null);
        assert!(c.approximate);
    }

    #[test]
    fn exact_null_atoms() {
        let e = SetExpr::union(SetExpr::predicate("squares").unwrap(), SetExpr::explicit([5, 7]).unwrap());
        let c = classify(&e, &EstimateOptions::default()).unwrap();
        assert_eq!(c.class, Class::Null);
        assert!(!c.approximate);
    }

    #[test]
    fn report_json_shape() {
        let r = exact_limits(&SetExpr::residue(3, [0]).unwrap()).unwrap();
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["limit"]["exact"], "1/3");
        assert_eq!(json["limit"]["decimal"], "0.333333333333");
        assert_eq!(json["verdict"], "InF");
        assert!(json.get("point").is_none());
    }
}
