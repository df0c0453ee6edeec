//! Scalar backends.
//!
//! Every container in this crate is generic over [`Scalar`], which is
//! implemented for `f64`, `f32` and [`Rational`] (arbitrary precision).
//! Decision procedures run on [`Rational`]; divergences are always `f64`.
//! Conversion only flows from exact to float implicitly ([`Scalar::to_f64`]);
//! going the other way is explicit, either bit-exact ([`exact_from_f64`]) or
//! through bounded continued fractions ([`rationalize`]).

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Arbitrary-precision rational number (always in lowest terms, positive denominator).
pub type Rational = BigRational;

/// Numeric tolerances shared by the float backend.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Two floats closer than this are equal; also the float support threshold.
    pub equality: f64,
    /// Allowed violation of an inequality between derived float quantities.
    pub slack: f64,
    /// Denominator cap used when floats are rationalized for an LP.
    pub max_denominator: u64,
}

pub const TOLERANCES: Tolerances = Tolerances {
    equality: 1e-12,
    slack: 1e-9,
    max_denominator: 1_000_000_000,
};

/// Which arithmetic a value lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Rational,
    Float,
}

/// JSON form of a scalar: floats are numbers, rationals are `"num/den"` strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarRepr {
    Number(f64),
    Text(String),
}

/// Field-like numeric type usable as a probability weight.
pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Num + Signed + Send + Sync + 'static
{
    const BACKEND: Backend;

    /// Absolute equality tolerance, `0` for exact arithmetic.
    fn tolerance() -> f64;

    fn from_ratio(num: i64, den: i64) -> Self;

    fn from_usize(n: usize) -> Self {
        Self::from_ratio(n as i64, 1)
    }

    fn to_f64(&self) -> f64;

    /// Exact rational value of `self` (floats are dyadic rationals).
    fn to_rational(&self) -> Rational;

    /// Nearest representable value; exact on the rational backend.
    fn from_rational(r: &Rational) -> Self;

    fn to_repr(&self) -> ScalarRepr;

    fn from_repr(repr: &ScalarRepr) -> Result<Self, String>;

    fn is_exact() -> bool {
        Self::BACKEND == Backend::Rational
    }

    fn approx_eq(&self, other: &Self) -> bool {
        if Self::is_exact() {
            self == other
        } else {
            (self.clone() - other.clone()).abs().to_f64() <= Self::tolerance()
        }
    }

    /// `self` is zero up to the backend tolerance.
    fn is_negligible(&self) -> bool {
        if Self::is_exact() {
            self.is_zero()
        } else {
            self.abs().to_f64() <= Self::tolerance()
        }
    }

    /// `self > other` beyond the backend tolerance.
    fn definitely_gt(&self, other: &Self) -> bool {
        if Self::is_exact() {
            self > other
        } else {
            (self.clone() - other.clone()).to_f64() > Self::tolerance()
        }
    }

    /// `self >= other` up to the backend tolerance.
    fn ge_tol(&self, other: &Self) -> bool {
        !other.definitely_gt(self)
    }
}

impl Scalar for f64 {
    const BACKEND: Backend = Backend::Float;

    fn tolerance() -> f64 {
        TOLERANCES.equality
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn to_rational(&self) -> Rational {
        exact_from_f64(*self)
    }

    fn from_rational(r: &Rational) -> Self {
        rational_to_f64(r)
    }

    fn to_repr(&self) -> ScalarRepr {
        ScalarRepr::Number(*self)
    }

    fn from_repr(repr: &ScalarRepr) -> Result<Self, String> {
        match repr {
            ScalarRepr::Number(x) => Ok(*x),
            ScalarRepr::Text(s) => parse_rational(s).map(|r| rational_to_f64(&r)),
        }
    }
}

impl Scalar for f32 {
    const BACKEND: Backend = Backend::Float;

    fn tolerance() -> f64 {
        1e-6
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        (num as f64 / den as f64) as f32
    }

    fn to_f64(&self) -> f64 {
        *self as f64
    }

    fn to_rational(&self) -> Rational {
        exact_from_f64(*self as f64)
    }

    fn from_rational(r: &Rational) -> Self {
        rational_to_f64(r) as f32
    }

    fn to_repr(&self) -> ScalarRepr {
        ScalarRepr::Number(*self as f64)
    }

    fn from_repr(repr: &ScalarRepr) -> Result<Self, String> {
        f64::from_repr(repr).map(|x| x as f32)
    }
}

impl Scalar for Rational {
    const BACKEND: Backend = Backend::Rational;

    fn tolerance() -> f64 {
        0.0
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Rational::new(BigInt::from(num), BigInt::from(den))
    }

    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }

    fn to_rational(&self) -> Rational {
        self.clone()
    }

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn to_repr(&self) -> ScalarRepr {
        ScalarRepr::Text(format!("{}/{}", self.numer(), self.denom()))
    }

    fn from_repr(repr: &ScalarRepr) -> Result<Self, String> {
        match repr {
            ScalarRepr::Text(s) => parse_rational(s),
            ScalarRepr::Number(x) => Err(format!(
                "rational backend expects \"num/den\" strings, found number {x}"
            )),
        }
    }
}

/// Parse `"num/den"` or an integer string.
pub fn parse_rational(text: &str) -> Result<Rational, String> {
    let text = text.trim();
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let num = BigInt::from_str_radix(num, 10).map_err(|_| format!("bad numerator in {text:?}"))?;
    let den =
        BigInt::from_str_radix(den, 10).map_err(|_| format!("bad denominator in {text:?}"))?;
    if den.is_zero() {
        return Err(format!("zero denominator in {text:?}"));
    }
    Ok(Rational::new(num, den))
}

/// Exact value of a finite float. Panics on NaN or infinity.
pub fn exact_from_f64(x: f64) -> Rational {
    Rational::from_f64(x).unwrap_or_else(|| panic!("cannot convert non-finite float {x}"))
}

/// Correctly rounded enough for reporting: ratio of big integers via scaled division.
pub fn rational_to_f64(r: &Rational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // Large operands: shift both down so they fit, keeping ~60 significant bits.
    let nbits = r.numer().bits() as i64;
    let dbits = r.denom().bits() as i64;
    let shift_n = (nbits - 60).max(0);
    let shift_d = (dbits - 60).max(0);
    let n = (r.numer() >> shift_n as usize).to_f64().unwrap_or(0.0);
    let d = (r.denom() >> shift_d as usize).to_f64().unwrap_or(1.0);
    (n / d) * 2f64.powi((shift_n - shift_d) as i32)
}

/// Best rational approximation of `x` with denominator at most `max_den`
/// (continued fractions with a final semiconvergent).
pub fn rationalize(x: f64, max_den: u64) -> Rational {
    assert!(max_den >= 1, "denominator cap must be positive");
    let exact = exact_from_f64(x);
    if exact.denom() <= &BigInt::from(max_den) {
        return exact;
    }
    let cap = BigInt::from(max_den);
    // convergents h/k
    let (mut h_prev, mut h) = (BigInt::zero(), BigInt::one());
    let (mut k_prev, mut k) = (BigInt::one(), BigInt::zero());
    let mut rem = exact.clone();
    loop {
        let a = rem.floor().to_integer();
        let h_next = &a * &h + &h_prev;
        let k_next = &a * &k + &k_prev;
        if k_next > cap {
            // semiconvergent with the largest admissible partial quotient
            let t = (&cap - &k_prev).div_floor(&k);
            let semi = Rational::new(&t * &h + &h_prev, &t * &k + &k_prev);
            let conv = Rational::new(h, k);
            let semi_err = (&semi - &exact).abs();
            let conv_err = (&conv - &exact).abs();
            return if semi_err < conv_err { semi } else { conv };
        }
        h_prev = std::mem::replace(&mut h, h_next);
        k_prev = std::mem::replace(&mut k, k_next);
        let frac = &rem - Rational::from_integer(a);
        if frac.is_zero() {
            return Rational::new(h, k);
        }
        rem = frac.recip();
    }
}

/// Least common multiple of the denominators of `values`.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

/// `ceil` of a rational as a big integer.
pub fn ceil_integer(r: &Rational) -> BigInt {
    r.ceil().to_integer()
}

/// Convenience constructor used throughout the tests and examples.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::from_ratio(num, den)
}

pub(crate) fn sum<'a, S: Scalar>(values: impl IntoIterator<Item = &'a S>) -> S {
    values.into_iter().fold(S::zero(), |acc, v| acc + v.clone())
}
