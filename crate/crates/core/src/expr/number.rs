//! Exact scalar values for literals.
//!
//! Decimals read from OCR output are kept as exact rationals so that step
//! traces can do exact arithmetic; they are converted to `f64` only at
//! evaluation boundaries.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Number(BigRational);

impl Number {
    pub fn zero() -> Self {
        Number(BigRational::zero())
    }

    pub fn one() -> Self {
        Number(BigRational::one())
    }

    pub fn from_integer(value: i64) -> Self {
        Number(BigRational::from_integer(BigInt::from(value)))
    }

    pub fn from_big_integer(value: BigInt) -> Self {
        Number(BigRational::from_integer(value))
    }

    pub fn from_ratio(numer: i64, denom: i64) -> Option<Self> {
        if denom == 0 {
            return None;
        }
        Some(Number(BigRational::new(BigInt::from(numer), BigInt::from(denom))))
    }

    pub fn from_rational(value: BigRational) -> Self {
        Number(value)
    }

    /// Parses an unsigned decimal such as `2734.55`, `7` or `.5`.
    pub fn parse_decimal(text: &str) -> Option<Self> {
        let (int_part, frac_part) = match text.split_once('.') {
            Some((i, f)) => (i, f),
            None => (text, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return None;
        }
        if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let digits = format!("{int_part}{frac_part}");
        let numer: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
        let denom = num_traits::pow(BigInt::from(10u32), frac_part.len());
        Some(Number(BigRational::new(numer, denom)))
    }

    /// Converts a float through its shortest round-trip decimal form, so
    /// `0.1` becomes exactly one tenth rather than the nearest binary value.
    pub fn from_f64(value: f64) -> Option<Self> {
        if !value.is_finite() {
            return None;
        }
        let text = format!("{}", value.abs());
        let magnitude = Self::parse_decimal(&text)?;
        Some(if value < 0.0 { -magnitude } else { magnitude })
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn as_rational(&self) -> &BigRational {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn to_integer(&self) -> Option<BigInt> {
        self.0.is_integer().then(|| self.0.to_integer())
    }

    pub fn to_i64(&self) -> Option<i64> {
        self.to_integer()?.to_i64()
    }

    pub fn abs(&self) -> Self {
        Number(self.0.abs())
    }

    pub fn recip(&self) -> Option<Self> {
        (!self.is_zero()).then(|| Number(self.0.recip()))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    /// Raises to an integer power; `None` for `0^k` with `k < 0` or
    /// exponents too large to be worth materializing.
    pub fn powi(&self, exponent: i64) -> Option<Self> {
        if exponent.unsigned_abs() > 4096 {
            return None;
        }
        if exponent < 0 {
            let base = self.recip()?;
            return Some(Number(num_traits::pow(base.0, exponent.unsigned_abs() as usize)));
        }
        Some(Number(num_traits::pow(self.0.clone(), exponent as usize)))
    }

    /// Exact square root when both numerator and denominator are perfect squares.
    pub fn exact_sqrt(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        let n = self.numer().sqrt();
        let d = self.denom().sqrt();
        (&n * &n == *self.numer() && &d * &d == *self.denom()).then(|| Number(BigRational::new(n, d)))
    }

    /// Decimal digits when the value terminates in base ten (denominator of
    /// the form 2^a 5^b), e.g. `-2734.55`.
    pub fn to_decimal_string(&self) -> Option<String> {
        let denom = self.denom().clone();
        let two = BigInt::from(2);
        let five = BigInt::from(5);
        let mut rest = denom.clone();
        let (mut twos, mut fives) = (0usize, 0usize);
        while rest.is_even() {
            rest /= &two;
            twos += 1;
        }
        while (&rest % &five).is_zero() {
            rest /= &five;
            fives += 1;
        }
        if !rest.is_one() {
            return None;
        }
        let places = twos.max(fives);
        let scale = num_traits::pow(BigInt::from(10), places);
        let scaled = (self.numer().abs() * scale) / denom;
        let mut digits = scaled.to_string();
        if places > 0 {
            if digits.len() <= places {
                digits = format!("{}{}", "0".repeat(places + 1 - digits.len()), digits);
            }
            digits.insert(digits.len() - places, '.');
        }
        if self.is_negative() {
            digits.insert(0, '-');
        }
        Some(digits)
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_decimal_string() {
            Some(text) => f.write_str(&text),
            None => write!(f, "{}/{}", self.numer(), self.denom()),
        }
    }
}

impl Add for &Number {
    type Output = Number;
    fn add(self, rhs: &Number) -> Number {
        Number(&self.0 + &rhs.0)
    }
}

impl Sub for &Number {
    type Output = Number;
    fn sub(self, rhs: &Number) -> Number {
        Number(&self.0 - &rhs.0)
    }
}

impl Mul for &Number {
    type Output = Number;
    fn mul(self, rhs: &Number) -> Number {
        Number(&self.0 * &rhs.0)
    }
}

/// Panics on division by zero; callers check `is_zero` first.
impl Div for &Number {
    type Output = Number;
    fn div(self, rhs: &Number) -> Number {
        Number(&self.0 / &rhs.0)
    }
}

impl Neg for Number {
    type Output = Number;
    fn neg(self) -> Number {
        Number(-self.0)
    }
}

impl Neg for &Number {
    type Output = Number;
    fn neg(self) -> Number {
        Number(-self.0.clone())
    }
}
