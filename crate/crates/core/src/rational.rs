//! Exact rational arithmetic used for every partial average.

use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

/// Exact rational number. All partial averages and exact limits use this.
pub type Rational = Ratio<i128>;

/// Largest number of fractional digits accepted in a decimal literal.
///
/// Keeps denominators below 10^24 so that `count * q` stays inside `i128`
/// for horizons up to 10^12.
pub const MAX_DECIMAL_DIGITS: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RationalParseError {
    #[error("empty rational literal")]
    Empty,
    #[error("invalid rational literal `{0}`")]
    Invalid(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
    #[error("decimal literal `{0}` has more than {MAX_DECIMAL_DIGITS} fractional digits")]
    TooPrecise(String),
}

/// Parses `p/q`, an integer, or a decimal literal such as `0.41421356` into
/// an exact rational. Decimals are converted at their written precision.
pub fn parse_rational(text: &str) -> Result<Rational, RationalParseError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(RationalParseError::Empty);
    }
    let invalid = || RationalParseError::Invalid(s.to_string());
    if let Some((p, q)) = s.split_once('/') {
        let p: i128 = p.trim().parse().map_err(|_| invalid())?;
        let q: i128 = q.trim().parse().map_err(|_| invalid())?;
        if q == 0 {
            return Err(RationalParseError::ZeroDenominator(s.to_string()));
        }
        return Ok(Rational::new(p, q));
    }
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(invalid());
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return Err(invalid());
    }
    if frac_part.len() > MAX_DECIMAL_DIGITS {
        return Err(RationalParseError::TooPrecise(s.to_string()));
    }
    let int_value: i128 = if int_part.is_empty() { 0 } else { int_part.parse().map_err(|_| invalid())? };
    let scale = 10i128.pow(frac_part.len() as u32);
    let frac_value: i128 = if frac_part.is_empty() { 0 } else { frac_part.parse().map_err(|_| invalid())? };
    let numer = int_value.checked_mul(scale).and_then(|v| v.checked_add(frac_value)).ok_or_else(invalid)?;
    let value = Rational::new(numer, scale);
    Ok(if negative { -value } else { value })
}

/// Converts to `f64` (lossy).
pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// Renders `value` as a decimal with 12 significant digits.
pub fn decimal12(value: &Rational) -> String {
    format_sig(to_f64(value), 12)
}

/// Renders a float with `digits` significant digits, without exponent for
/// the unit-interval values this crate produces.
pub fn format_sig(value: f64, digits: usize) -> String {
    if value == 0.0 {
        return "0".to_string();
    }
    if !value.is_finite() {
        return value.to_string();
    }
    let magnitude = value.abs().log10().floor() as i32;
    let decimals = (digits as i32 - 1 - magnitude).max(0) as usize;
    let rendered = format!("{value:.decimals$}");
    if rendered.contains('.') {
        rendered.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        rendered
    }
}

/// `count / n` as an exact rational (reduced).
pub fn ratio(count: u64, n: u64) -> Rational {
    Rational::new(count as i128, n as i128)
}

/// Returns true when `count / n < target`, compared exactly.
pub fn below(count: u64, n: u64, target: &Rational) -> bool {
    (count as i128) * target.denom() < target.numer() * (n as i128)
}

/// Returns true when `count / n > target`, compared exactly.
pub fn above(count: u64, n: u64, target: &Rational) -> bool {
    (count as i128) * target.denom() > target.numer() * (n as i128)
}

pub fn is_unit_interval(value: &Rational) -> bool {
    *value >= Rational::zero() && *value <= Rational::one()
}
