//! Scalar abstraction.
//!
//! Every algorithm in this crate is written against [`Scalar`]. Decision
//! procedures are only meaningful for exact fields, so the crate root fixes
//! [`Rat`] (arbitrary precision rationals) as the default instantiation.
//! Floating point types implement the trait for interpolation and plotting
//! work where exact zero tests are not required.

use std::fmt::Debug;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{Num, One, Signed, Zero};

use crate::error::{Error, Result};

/// Exact arbitrary precision rational, always in lowest terms with a
/// positive denominator.
pub type Rat = BigRational;

pub trait Scalar: Clone + Debug + PartialOrd + Num + Signed + Send + Sync + 'static {
    /// The value `numer / denom`. `denom` must be nonzero.
    fn from_ratio(numer: i64, denom: i64) -> Self;

    /// Greatest integer not exceeding `self`.
    fn floor_i64(&self) -> i64;

    fn from_int(value: i64) -> Self {
        Self::from_ratio(value, 1)
    }
}

impl Scalar for BigRational {
    fn from_ratio(numer: i64, denom: i64) -> Self {
        Ratio::new(BigInt::from(numer), BigInt::from(denom))
    }

    fn floor_i64(&self) -> i64 {
        let fl = self.floor().to_integer();
        i64::try_from(fl).expect("floor out of i64 range")
    }
}

impl Scalar for Ratio<i64> {
    fn from_ratio(numer: i64, denom: i64) -> Self {
        Ratio::new(numer, denom)
    }

    fn floor_i64(&self) -> i64 {
        self.floor().to_integer()
    }
}

impl Scalar for f64 {
    fn from_ratio(numer: i64, denom: i64) -> Self {
        numer as f64 / denom as f64
    }

    fn floor_i64(&self) -> i64 {
        f64::floor(*self) as i64
    }
}

impl Scalar for f32 {
    fn from_ratio(numer: i64, denom: i64) -> Self {
        numer as f32 / denom as f32
    }

    fn floor_i64(&self) -> i64 {
        f32::floor(*self) as i64
    }
}

/// Reduces `x` into `[0, 1)`.
pub fn frac<S: Scalar>(x: &S) -> S {
    x.clone() - S::from_int(x.floor_i64())
}

/// Parses `"p/r"` or `"p"` into a rational. Surrounding whitespace is
/// rejected so that files stay byte-stable.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let bad = || Error::Parse(format!("malformed rational {s:?}"));
    if s.is_empty() || s.trim() != s {
        return Err(bad());
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let num = BigInt::from_str(num).map_err(|_| bad())?;
    let den = BigInt::from_str(den).map_err(|_| bad())?;
    if den.is_zero() || den.is_negative() {
        return Err(bad());
    }
    Ok(Ratio::new(num, den))
}

/// Lowest-terms string form: `"p/r"`, or `"p"` when the denominator is one.
pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses a string of the form `"x1,x2"` into a pair of rationals.
pub fn parse_rat_pair(s: &str) -> Result<(Rat, Rat)> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| Error::Parse(format!("expected \"x1,x2\", got {s:?}")))?;
    Ok((parse_rat(a)?, parse_rat(b)?))
}

/// Convenience constructor used pervasively in tests.
pub fn rat(numer: i64, denom: i64) -> Rat {
    Rat::from_ratio(numer, denom)
}
