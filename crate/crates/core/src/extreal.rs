//! Extended positive numbers `[0, +inf]`.
//!
//! Zero and infinity are explicit variants so that the product conventions of
//! GG-convex analysis stay visible: `0 * inf = inf` for convex-type products
//! and `0 * inf = 0` for concave-type products, `1/0 = inf`, `1/inf = 0`,
//! `ln 0 = -inf`.
//!
//! Kernels that work on the logarithmic scale use plain `f64` with
//! `-inf`/`+inf`; the `ln_*` helpers below implement the same conventions
//! there.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Which convention resolves the indeterminate product `0 * inf`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProductMode {
    /// `0 * inf = inf` (GG-convex functions, inf-convolutions).
    Convex,
    /// `0 * inf = 0` (GG-concave functions).
    Concave,
}

/// A value in `[0, +inf]`.
///
/// `Finite` always holds a strictly positive, finite `f64`; use the
/// constructors rather than building the variant by hand.
#[derive(Debug, Clone, Copy)]
pub enum ExtendedPositive {
    Zero,
    Finite(f64),
    Infinity,
}

impl ExtendedPositive {
    pub const ONE: ExtendedPositive = ExtendedPositive::Finite(1.0);

    /// Classifies a nonnegative float. `0.0` maps to `Zero`, `+inf` to
    /// `Infinity`. Negative values and NaN are rejected.
    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() || value < 0.0 {
            return Err(Error::Parse(format!("{value} is not an extended positive number")));
        }
        Ok(Self::from_nonneg(value))
    }

    fn from_nonneg(value: f64) -> Self {
        if value == 0.0 {
            ExtendedPositive::Zero
        } else if value.is_infinite() {
            ExtendedPositive::Infinity
        } else {
            ExtendedPositive::Finite(value)
        }
    }

    /// Extended exponential: `-inf -> 0`, `+inf -> inf`. Overflow saturates to
    /// `Infinity` and underflow to `Zero`.
    pub fn from_ln(log_value: f64) -> Self {
        debug_assert!(!log_value.is_nan());
        if log_value == f64::NEG_INFINITY {
            ExtendedPositive::Zero
        } else if log_value == f64::INFINITY {
            ExtendedPositive::Infinity
        } else {
            Self::from_nonneg(log_value.exp())
        }
    }

    /// Extended natural logarithm: `ln 0 = -inf`, `ln inf = +inf`.
    pub fn ln(self) -> f64 {
        match self {
            ExtendedPositive::Zero => f64::NEG_INFINITY,
            ExtendedPositive::Finite(v) => v.ln(),
            ExtendedPositive::Infinity => f64::INFINITY,
        }
    }

    /// `1/0 = inf`, `1/inf = 0`.
    pub fn recip(self) -> Self {
        match self {
            ExtendedPositive::Zero => ExtendedPositive::Infinity,
            ExtendedPositive::Finite(v) => Self::from_nonneg(1.0 / v),
            ExtendedPositive::Infinity => ExtendedPositive::Zero,
        }
    }

    /// Product under the given convention for `0 * inf`.
    pub fn mul(self, other: Self, mode: ProductMode) -> Self {
        use ExtendedPositive::*;
        match (self, other) {
            (Zero, Infinity) | (Infinity, Zero) => match mode {
                ProductMode::Convex => Infinity,
                ProductMode::Concave => Zero,
            },
            (Infinity, _) | (_, Infinity) => Infinity,
            (Zero, _) | (_, Zero) => Zero,
            (Finite(a), Finite(b)) => Self::from_nonneg(a * b),
        }
    }

    /// The value as an `f64` (`0.0`, the finite value, or `+inf`).
    pub fn to_f64(self) -> f64 {
        match self {
            ExtendedPositive::Zero => 0.0,
            ExtendedPositive::Finite(v) => v,
            ExtendedPositive::Infinity => f64::INFINITY,
        }
    }

    pub fn is_zero(self) -> bool {
        matches!(self, ExtendedPositive::Zero)
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, ExtendedPositive::Infinity)
    }

    pub fn is_finite_positive(self) -> bool {
        matches!(self, ExtendedPositive::Finite(_))
    }
}

impl PartialEq for ExtendedPositive {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for ExtendedPositive {}

impl PartialOrd for ExtendedPositive {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// `Zero < every finite value < Infinity`.
impl Ord for ExtendedPositive {
    fn cmp(&self, other: &Self) -> Ordering {
        self.to_f64().total_cmp(&other.to_f64())
    }
}

impl fmt::Display for ExtendedPositive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedPositive::Zero => f.write_str("0"),
            ExtendedPositive::Infinity => f.write_str("inf"),
            ExtendedPositive::Finite(v) => write!(f, "{}", format_decimal(*v)),
        }
    }
}

impl FromStr for ExtendedPositive {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let l = parse_ln_token(s)?;
        Ok(ExtendedPositive::from_ln(l))
    }
}

fn format_decimal(v: f64) -> String {
    let a = v.abs();
    if (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Convex-mode product on the log scale: `-inf + inf = +inf`.
pub fn ln_mul_convex(a: f64, b: f64) -> f64 {
    if a == f64::INFINITY || b == f64::INFINITY {
        f64::INFINITY
    } else {
        a + b
    }
}

/// Concave-mode product on the log scale: `-inf + inf = -inf`.
pub fn ln_mul_concave(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY || b == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else {
        a + b
    }
}

/// Formats a log-scale value as a text token of the value itself: `"0"`,
/// `"inf"` or a decimal literal. Values beyond the `f64` range are written
/// as `<mantissa>e<exponent>` computed on the log scale, so nothing
/// overflows to `inf` on output.
pub fn format_ln_token(log_value: f64) -> String {
    if log_value == f64::NEG_INFINITY {
        return "0".to_string();
    }
    if log_value == f64::INFINITY {
        return "inf".to_string();
    }
    let v = log_value.exp();
    if v.is_finite() && v >= f64::MIN_POSITIVE {
        return format_decimal(v);
    }
    let decades = log_value / std::f64::consts::LN_10;
    let mut exponent = decades.floor();
    let mut mantissa = 10f64.powf(decades - exponent);
    if mantissa >= 10.0 {
        mantissa /= 10.0;
        exponent += 1.0;
    }
    format!("{mantissa}e{exponent}")
}

/// Parses a value token (`"0"`, `"inf"`, decimal literal) to its natural
/// logarithm. Decimal literals whose magnitude exceeds the `f64` range are
/// evaluated on the log scale.
pub fn parse_ln_token(token: &str) -> Result<f64> {
    let s = token.trim();
    match s.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" | "+infinity" => return Ok(f64::INFINITY),
        _ => {}
    }
    let v: f64 = s
        .parse()
        .map_err(|_| Error::Parse(format!("`{s}` is not a value token")))?;
    if v.is_nan() || v < 0.0 || (v == 0.0 && s.starts_with('-')) {
        return Err(Error::Parse(format!("`{s}` is not a nonnegative value")));
    }
    if v == 0.0 || v.is_infinite() {
        // Either a literal zero/infinity or an out-of-range literal.
        if let Some((m, e)) = s.split_once(['e', 'E']) {
            let m: f64 = m.parse().map_err(|_| Error::Parse(format!("bad mantissa in `{s}`")))?;
            let e: f64 = e.parse().map_err(|_| Error::Parse(format!("bad exponent in `{s}`")))?;
            if m > 0.0 && m.is_finite() {
                return Ok(m.ln() + e * std::f64::consts::LN_10);
            }
        }
        return Ok(if v == 0.0 { f64::NEG_INFINITY } else { f64::INFINITY });
    }
    Ok(v.ln())
}
