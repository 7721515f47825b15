//! Exact number types: big rationals, half-log coordinates and lattice points.
//!
//! Every abscissa and ordinate of a combined graph has the form `½·log(r)` for a
//! positive rational `r`. [`LogCoord`] stores `r`, so comparisons, sums and
//! differences of graph coordinates are exact rational operations.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always kept in canonical form.
pub type Rational = BigRational;

/// Parses `"p/q"`, an integer literal, or a finite decimal such as `"-0.125"`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let text = text.trim();
    let malformed = || Error::Parse(text.to_string());
    if text.is_empty() {
        return Err(malformed());
    }
    if let Some((num, den)) = text.split_once('/') {
        let num = parse_integer(num).ok_or_else(malformed)?;
        let den = parse_integer(den).ok_or_else(malformed)?;
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        return Ok(Rational::new(num, den));
    }
    if let Some((int_part, frac_part)) = text.split_once('.') {
        let (negative, int_digits) = match int_part.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, int_part.strip_prefix('+').unwrap_or(int_part)),
        };
        let digits_ok = |s: &str| s.bytes().all(|b| b.is_ascii_digit());
        if !digits_ok(int_digits)
            || !digits_ok(frac_part)
            || (int_digits.is_empty() && frac_part.is_empty())
        {
            return Err(malformed());
        }
        let all_digits = format!("{int_digits}{frac_part}");
        let mut num = BigInt::from_str(if all_digits.is_empty() {
            "0"
        } else {
            &all_digits
        })
        .map_err(|_| malformed())?;
        if negative {
            num = -num;
        }
        let den = num_traits::pow(BigInt::from(10u32), frac_part.len());
        return Ok(Rational::new(num, den));
    }
    let num = parse_integer(text).ok_or_else(malformed)?;
    Ok(Rational::from_integer(num))
}

fn parse_integer(text: &str) -> Option<BigInt> {
    let text = text.trim();
    let digits = text.strip_prefix(['-', '+']).unwrap_or(text);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    BigInt::from_str(text).ok()
}

/// Canonical text form: `"p/q"`, or `"p"` when the denominator is one.
pub fn format_rational(value: &Rational) -> String {
    value.to_string()
}

/// Natural log of a big unsigned integer, stable for values far beyond `f64::MAX`.
pub(crate) fn ln_biguint(n: &BigUint) -> f64 {
    if let Some(f) = n.to_f64().filter(|f| f.is_finite()) {
        return f.ln();
    }
    // Keep the top 64 bits and add back the shifted-out part as bits·ln 2.
    let shift = n.bits().saturating_sub(64);
    let top = (n >> shift).to_f64().unwrap_or(f64::MAX);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// The real number `½·log(ratio)` for a positive rational `ratio`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LogCoord {
    ratio: Rational,
}

impl LogCoord {
    /// `½·log(ratio)`. Fails unless `ratio > 0`.
    pub fn new(ratio: Rational) -> Result<Self> {
        if ratio.is_positive() {
            Ok(Self { ratio })
        } else {
            Err(Error::NonPositiveRatio(format_rational(&ratio)))
        }
    }

    pub(crate) fn from_ratio_unchecked(ratio: Rational) -> Self {
        debug_assert!(ratio.is_positive());
        Self { ratio }
    }

    /// The value `0` (ratio 1).
    pub fn zero() -> Self {
        Self {
            ratio: Rational::one(),
        }
    }

    /// `log|x|`, stored as ratio `x²`. `None` when `x = 0`.
    pub fn log_abs(x: &Rational) -> Option<Self> {
        if x.is_zero() {
            None
        } else {
            Some(Self { ratio: x * x })
        }
    }

    /// `log|n|` for an integer, as ratio `n²`.
    pub fn log_abs_int(n: &BigInt) -> Option<Self> {
        Self::log_abs(&Rational::from_integer(n.clone()))
    }

    pub fn ratio(&self) -> &Rational {
        &self.ratio
    }

    pub fn into_ratio(self) -> Rational {
        self.ratio
    }

    pub fn is_zero(&self) -> bool {
        self.ratio.is_one()
    }

    /// Floating-point `½·ln(ratio)`; for plotting only.
    pub fn to_f64(&self) -> f64 {
        let num = self.ratio.numer().magnitude();
        let den = self.ratio.denom().magnitude();
        0.5 * (ln_biguint(num) - ln_biguint(den))
    }
}

impl Ord for LogCoord {
    fn cmp(&self, other: &Self) -> Ordering {
        // log is increasing; BigRational compares by cross-multiplication.
        self.ratio.cmp(&other.ratio)
    }
}

impl PartialOrd for LogCoord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// Adding half-logs multiplies ratios.
#[allow(clippy::suspicious_arithmetic_impl)]
impl Add for &LogCoord {
    type Output = LogCoord;
    fn add(self, rhs: &LogCoord) -> LogCoord {
        LogCoord {
            ratio: &self.ratio * &rhs.ratio,
        }
    }
}

impl Add for LogCoord {
    type Output = LogCoord;
    fn add(self, rhs: LogCoord) -> LogCoord {
        &self + &rhs
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl Sub for &LogCoord {
    type Output = LogCoord;
    fn sub(self, rhs: &LogCoord) -> LogCoord {
        LogCoord {
            ratio: &self.ratio / &rhs.ratio,
        }
    }
}

impl Sub for LogCoord {
    type Output = LogCoord;
    fn sub(self, rhs: LogCoord) -> LogCoord {
        &self - &rhs
    }
}

impl Neg for &LogCoord {
    type Output = LogCoord;
    fn neg(self) -> LogCoord {
        LogCoord {
            ratio: self.ratio.recip(),
        }
    }
}

impl Neg for LogCoord {
    type Output = LogCoord;
    fn neg(self) -> LogCoord {
        -&self
    }
}

impl fmt::Display for LogCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "½log({})", self.ratio)
    }
}

impl Serialize for LogCoord {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("LogCoord", 3)?;
        st.serialize_field("num", &self.ratio.numer().to_string())?;
        st.serialize_field("den", &self.ratio.denom().to_string())?;
        st.serialize_field("approx", &self.to_f64())?;
        st.end()
    }
}

/// An integer point `(Q, P)` of the plane.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePoint {
    pub q: BigInt,
    pub p: BigInt,
}

impl LatticePoint {
    pub fn new(q: impl Into<BigInt>, p: impl Into<BigInt>) -> Self {
        Self {
            q: q.into(),
            p: p.into(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.q.is_zero() && self.p.is_zero()
    }

    /// `Q·P' − Q'·P`; zero iff the two points are linearly dependent.
    pub fn det(&self, other: &LatticePoint) -> BigInt {
        &self.q * &other.p - &other.q * &self.p
    }

    /// `|Qξ − P|`.
    pub fn error(&self, xi: &Rational) -> Rational {
        (xi * Rational::from_integer(self.q.clone()) - Rational::from_integer(self.p.clone())).abs()
    }

    /// The representative of `±x` with `Q > 0`, or `(0, |P|)` on the vertical axis.
    pub fn normalized(&self) -> LatticePoint {
        let flip = match self.q.sign() {
            Sign::Minus => true,
            Sign::NoSign => self.p.is_negative(),
            Sign::Plus => false,
        };
        if flip {
            LatticePoint {
                q: -&self.q,
                p: -&self.p,
            }
        } else {
            self.clone()
        }
    }

    pub fn is_primitive(&self) -> bool {
        self.q.gcd(&self.p).is_one()
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.q, self.p)
    }
}

impl Serialize for LatticePoint {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("LatticePoint", 2)?;
        st.serialize_field("Q", &self.q.to_string())?;
        st.serialize_field("P", &self.p.to_string())?;
        st.end()
    }
}

/// Shorthand for building small rationals in code and tests.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Shorthand for a LogCoord with a small positive ratio.
pub fn lc(num: i64, den: i64) -> LogCoord {
    LogCoord::new(rat(num, den)).expect("positive ratio")
}
