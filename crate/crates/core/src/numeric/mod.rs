//! Exact arithmetic: rationals, real quadratic surds, weight expansions and
//! negative weight expansions.

mod expansion;
mod surd;
mod weights;

pub use expansion::{negative_weight_expansion, NegativeWeightExpansion};
pub use surd::{solve_accumulation_quadratic, surd_floor, QuadraticSurd};
pub use weights::{check_weight_identities, weight_expansion, weight_expansion_length, WeightExpansion};

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary precision rational, always kept in lowest terms with a positive
/// denominator.
pub type Rational = BigRational;

/// `n/d` from machine integers. Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// The integer `n` as a rational.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"p/q"`, `"-7"`, `"6.9"` or `"1e-2"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    if t.is_empty() {
        return Err(Error::Parse("empty rational".into()));
    }
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| Error::Parse(format!("bad numerator in {t:?}")))?;
        let d: BigInt = d.trim().parse().map_err(|_| Error::Parse(format!("bad denominator in {t:?}")))?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {t:?}")));
        }
        return Ok(Rational::new(n, d));
    }
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => {
            let e: i64 = t[i + 1..].parse().map_err(|_| Error::Parse(format!("bad exponent in {t:?}")))?;
            (&t[..i], e)
        }
        None => (t, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (ip, fp) = body.split_once('.').unwrap_or((body, ""));
    if ip.is_empty() && fp.is_empty() {
        return Err(Error::Parse(format!("bad number {t:?}")));
    }
    if !ip.chars().chain(fp.chars()).all(|c| c.is_ascii_digit()) {
        return Err(Error::Parse(format!("bad number {t:?}")));
    }
    let digits = format!("{ip}{fp}");
    let n: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().unwrap() };
    let scale = exp - fp.len() as i64;
    let mut r = Rational::from_integer(n);
    if scale >= 0 {
        r *= Rational::from_integer(pow10(scale as u32));
    } else {
        r /= Rational::from_integer(pow10((-scale) as u32));
    }
    Ok(if neg { -r } else { r })
}

/// `"p/q"` (or `"p"` for integers).
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub(crate) fn pow10(e: u32) -> BigInt {
    num_traits::pow(BigInt::from(10), e as usize)
}

/// Greatest integer `<= r`.
pub fn floor(r: &Rational) -> BigInt {
    r.numer().div_floor(r.denom())
}

/// Least integer `>= r`.
pub fn ceil(r: &Rational) -> BigInt {
    -((-r.numer()).div_floor(r.denom()))
}

/// Floor of the square root of a nonnegative integer.
pub fn isqrt(n: &BigInt) -> BigInt {
    assert!(!n.is_negative(), "isqrt of a negative integer");
    n.sqrt()
}

pub fn is_square(n: &BigInt) -> bool {
    if n.is_negative() {
        return false;
    }
    let s = n.sqrt();
    &s * &s == *n
}

/// Rounds `|x|` to `sig` significant digits and renders a plain decimal string.
/// `floor_scaled(s)` must return `floor(|x| * 10^s + 1/2)` for any integer `s`,
/// and `cmp_pow10(e)` must report whether `|x| >= 10^e`.
pub(crate) fn render_decimal(
    negative: bool,
    zero: bool,
    sig: u32,
    cmp_pow10: impl Fn(i64) -> bool,
    floor_scaled: impl Fn(i64) -> BigInt,
) -> String {
    if zero {
        return "0".into();
    }
    let sig = sig.max(1) as i64;
    // e = floor(log10 |x|)
    let mut e: i64 = 0;
    if cmp_pow10(0) {
        while cmp_pow10(e + 1) {
            e += 1;
        }
    } else {
        e = -1;
        while !cmp_pow10(e) {
            e -= 1;
        }
    }
    let mut shift = sig - 1 - e;
    let mut n = floor_scaled(shift);
    // rounding may carry into a new digit
    if n.to_string().len() as i64 > sig {
        shift -= 1;
        n = floor_scaled(shift);
    }
    let digits = n.to_string();
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if shift <= 0 {
        out.push_str(&digits);
        out.push_str(&"0".repeat((-shift) as usize));
    } else if (shift as usize) >= digits.len() {
        out.push_str("0.");
        out.push_str(&"0".repeat(shift as usize - digits.len()));
        out.push_str(&digits);
    } else {
        let split = digits.len() - shift as usize;
        out.push_str(&digits[..split]);
        out.push('.');
        out.push_str(&digits[split..]);
    }
    out
}

/// Decimal rendering with `sig` significant digits (round half up).
pub fn rational_to_decimal(r: &Rational, sig: u32) -> String {
    let a = r.abs();
    render_decimal(
        r.is_negative(),
        r.is_zero(),
        sig,
        |e| a >= pow10_rat(e),
        |s| floor(&(&a * pow10_rat(s) + rat(1, 2))),
    )
}

pub(crate) fn pow10_rat(e: i64) -> Rational {
    if e >= 0 {
        Rational::from_integer(pow10(e as u32))
    } else {
        Rational::new(BigInt::one(), pow10((-e) as u32))
    }
}

/// Nearest `f64`, for plotting and diagnostics only.
pub fn to_f64(r: &Rational) -> f64 {
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => rational_to_decimal(r, 20).parse().unwrap_or(f64::NAN),
    }
}

/// Continued fraction `[a0; a1, ...]` of a rational.
pub fn continued_fraction(r: &Rational) -> Vec<BigInt> {
    let mut out = Vec::new();
    let (mut n, mut d) = (r.numer().clone(), r.denom().clone());
    while !d.is_zero() {
        let (q, rem) = n.div_mod_floor(&d);
        out.push(q);
        n = d;
        d = rem;
    }
    out
}

/// Least common multiple of the denominators.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values.into_iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

/// Serializes a rational as its `"p/q"` string.
pub struct RatStr<'a>(pub &'a Rational);

impl serde::Serialize for RatStr<'_> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(self.0))
    }
}

/// `serialize_with` helper for rational fields.
pub fn serialize_rational<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(r))
}

/// `serialize_with` helper for lists of rationals.
pub fn serialize_rationals<S: serde::Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(RatStr))
}
