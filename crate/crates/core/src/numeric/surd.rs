use super::{pow10_rat, render_decimal, Rational};
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;

/// Exact real number `(p + q*sqrt(D))/r` with `D` square-free.
///
/// Canonical form: `r > 0`, `gcd(p, q, r) = 1`, and `q = 0` forces `D = 0`.
/// A radicand that is a perfect square is folded into `p`, so a surd with
/// `D = 0` is exactly a rational number.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadraticSurd {
    p: BigInt,
    q: BigInt,
    d: BigInt,
    r: BigInt,
}

/// Sign of `a + b*sqrt(d)` for `d >= 0`.
fn sign_with_root(a: &BigInt, b: &BigInt, d: &BigInt) -> Ordering {
    let zero = BigInt::zero();
    if b.is_zero() || d.is_zero() {
        return a.cmp(&zero);
    }
    let sa = a.cmp(&zero);
    let sb = b.cmp(&zero);
    match (sa, sb) {
        (Ordering::Less, Ordering::Less) | (Ordering::Equal, Ordering::Less) => Ordering::Less,
        (Ordering::Greater, Ordering::Greater) | (Ordering::Equal, Ordering::Greater) => Ordering::Greater,
        (Ordering::Greater, Ordering::Less) => (a * a).cmp(&(b * b * d)),
        (Ordering::Less, Ordering::Greater) => (b * b * d).cmp(&(a * a)),
        (_, Ordering::Equal) => unreachable!(),
    }
}

/// Splits `n = f^2 * m` with `m` square-free; returns `(f, m)`.
fn square_free_part(n: &BigInt) -> (BigInt, BigInt) {
    if let Some(mut m) = n.to_u128() {
        let mut f: u128 = 1;
        let mut i: u128 = 2;
        while i * i <= m {
            let sq = i * i;
            while m % sq == 0 {
                m /= sq;
                f *= i;
            }
            i += if i == 2 { 1 } else { 2 };
        }
        return (BigInt::from(f), BigInt::from(m));
    }
    let mut m = n.clone();
    let mut f = BigInt::one();
    let mut i = BigInt::from(2);
    while &i * &i <= m {
        let sq = &i * &i;
        while (&m % &sq).is_zero() {
            m /= &sq;
            f *= &i;
        }
        i += 1;
    }
    (f, m)
}

impl QuadraticSurd {
    /// `(p + q*sqrt(d))/r`, normalized.
    pub fn new(p: BigInt, q: BigInt, d: BigInt, r: BigInt) -> Result<Self> {
        if r.is_zero() {
            return Err(Error::InvalidInput("surd with zero denominator".into()));
        }
        if d.is_negative() {
            return Err(Error::InvalidInput("negative radicand".into()));
        }
        Ok(Self::normalize(p, q, d, r))
    }

    /// Convenience constructor from machine integers. Panics on invalid input.
    pub fn from_i64(p: i64, q: i64, d: i64, r: i64) -> Self {
        Self::new(p.into(), q.into(), d.into(), r.into()).expect("valid surd")
    }

    fn normalize(mut p: BigInt, mut q: BigInt, mut d: BigInt, mut r: BigInt) -> Self {
        if r.is_negative() {
            p = -p;
            q = -q;
            r = -r;
        }
        if q.is_zero() || d.is_zero() {
            q = BigInt::zero();
            d = BigInt::zero();
        } else {
            let (f, m) = square_free_part(&d);
            q *= f;
            d = m;
            if d.is_one() {
                p += &q;
                q = BigInt::zero();
                d = BigInt::zero();
            }
        }
        let g = p.gcd(&q).gcd(&r);
        if !g.is_zero() && !g.is_one() {
            p /= &g;
            q /= &g;
            r /= &g;
        }
        QuadraticSurd { p, q, d, r }
    }

    pub fn from_rational(x: &Rational) -> Self {
        QuadraticSurd {
            p: x.numer().clone(),
            q: BigInt::zero(),
            d: BigInt::zero(),
            r: x.denom().clone(),
        }
    }

    pub fn from_integer(n: i64) -> Self {
        Self::from_rational(&Rational::from_integer(n.into()))
    }

    /// `sqrt(x)` for rational `x >= 0`.
    pub fn sqrt_of(x: &Rational) -> Result<Self> {
        if x.is_negative() {
            return Err(Error::InvalidInput("square root of a negative number".into()));
        }
        // sqrt(n/m) = sqrt(n*m)/m
        let n = x.numer() * x.denom();
        Ok(Self::normalize(BigInt::zero(), BigInt::one(), n, x.denom().clone()))
    }

    pub fn p(&self) -> &BigInt {
        &self.p
    }
    pub fn q(&self) -> &BigInt {
        &self.q
    }
    /// The square-free radicand `D` (zero for rationals).
    pub fn radicand(&self) -> &BigInt {
        &self.d
    }
    pub fn r(&self) -> &BigInt {
        &self.r
    }

    pub fn is_rational(&self) -> bool {
        self.q.is_zero()
    }

    pub fn to_rational(&self) -> Option<Rational> {
        self.is_rational().then(|| Rational::new(self.p.clone(), self.r.clone()))
    }

    pub fn is_zero(&self) -> bool {
        self.p.is_zero() && self.q.is_zero()
    }

    fn field(&self, other: &Self) -> Result<BigInt> {
        match (self.d.is_zero(), other.d.is_zero()) {
            (true, true) => Ok(BigInt::zero()),
            (true, false) => Ok(other.d.clone()),
            (false, true) => Ok(self.d.clone()),
            (false, false) if self.d == other.d => Ok(self.d.clone()),
            _ => Err(Error::FieldMismatch {
                left: self.d.to_string(),
                right: other.d.to_string(),
            }),
        }
    }

    pub fn checked_add(&self, o: &Self) -> Result<Self> {
        let d = self.field(o)?;
        Ok(Self::normalize(
            &self.p * &o.r + &o.p * &self.r,
            &self.q * &o.r + &o.q * &self.r,
            d,
            &self.r * &o.r,
        ))
    }

    pub fn checked_sub(&self, o: &Self) -> Result<Self> {
        self.checked_add(&o.neg())
    }

    pub fn checked_mul(&self, o: &Self) -> Result<Self> {
        let d = self.field(o)?;
        Ok(Self::normalize(
            &self.p * &o.p + &self.q * &o.q * &d,
            &self.p * &o.q + &self.q * &o.p,
            d,
            &self.r * &o.r,
        ))
    }

    pub fn checked_div(&self, o: &Self) -> Result<Self> {
        self.checked_mul(&o.recip()?)
    }

    pub fn neg(&self) -> Self {
        QuadraticSurd { p: -&self.p, q: -&self.q, d: self.d.clone(), r: self.r.clone() }
    }

    /// `(p - q*sqrt(D))/r`.
    pub fn conjugate(&self) -> Self {
        QuadraticSurd { p: self.p.clone(), q: -&self.q, d: self.d.clone(), r: self.r.clone() }
    }

    /// `x * conj(x)`, a rational.
    pub fn norm(&self) -> Rational {
        Rational::new(&self.p * &self.p - &self.q * &self.q * &self.d, &self.r * &self.r)
    }

    /// `x + conj(x)`, a rational.
    pub fn trace(&self) -> Rational {
        Rational::new(BigInt::from(2) * &self.p, self.r.clone())
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::InvalidInput("reciprocal of zero".into()));
        }
        // r/(p + q sqrt D) = r (p - q sqrt D) / (p^2 - q^2 D)
        let den = &self.p * &self.p - &self.q * &self.q * &self.d;
        Ok(Self::normalize(&self.r * &self.p, -&self.r * &self.q, self.d.clone(), den))
    }

    pub fn add_rational(&self, x: &Rational) -> Self {
        self.checked_add(&Self::from_rational(x)).expect("rationals lie in every field")
    }

    pub fn mul_rational(&self, x: &Rational) -> Self {
        self.checked_mul(&Self::from_rational(x)).expect("rationals lie in every field")
    }

    pub fn signum(&self) -> Ordering {
        sign_with_root(&self.p, &self.q, &self.d)
    }

    /// Exact comparison; errors when the fields differ.
    pub fn cmp_surd(&self, o: &Self) -> Result<Ordering> {
        Ok(self.checked_sub(o)?.signum())
    }

    pub fn cmp_rational(&self, x: &Rational) -> Ordering {
        // sign of p + q sqrt D - r x  (r > 0)
        let a = &self.p * x.denom() - &self.r * x.numer();
        let b = &self.q * x.denom();
        sign_with_root(&a, &b, &self.d)
    }

    /// Greatest integer `<= self`, exact.
    pub fn floor(&self) -> BigInt {
        if self.q.is_zero() {
            return self.p.div_floor(&self.r);
        }
        let s = (&self.q * &self.q * &self.d).sqrt();
        let approx = if self.q.is_positive() { &self.p + &s } else { &self.p - &s - 1 };
        let mut k = approx.div_floor(&self.r);
        // invariant sought: r*k <= p + q sqrt D < r*(k+1)
        loop {
            let below = sign_with_root(&(&self.p - &self.r * &k), &self.q, &self.d);
            if below == Ordering::Less {
                k -= 1;
                continue;
            }
            let above = sign_with_root(&(&self.p - &self.r * (&k + 1)), &self.q, &self.d);
            if above != Ordering::Less {
                k += 1;
                continue;
            }
            return k;
        }
    }

    pub fn ceil(&self) -> BigInt {
        -self.neg().floor()
    }

    /// Fractional part `x - floor(x)`.
    pub fn fract(&self) -> Self {
        self.add_rational(&Rational::from_integer(-self.floor()))
    }

    /// Decimal rendering with `sig` significant digits.
    pub fn to_decimal(&self, sig: u32) -> String {
        let neg = self.signum() == Ordering::Less;
        let a = if neg { self.neg() } else { self.clone() };
        render_decimal(
            neg,
            self.is_zero(),
            sig,
            |e| a.cmp_rational(&pow10_rat(e)) != Ordering::Less,
            |s| a.mul_rational(&pow10_rat(s)).add_rational(&Rational::new(1.into(), 2.into())).floor(),
        )
    }

    /// Nearest `f64`, for plotting and diagnostics only.
    pub fn to_f64(&self) -> f64 {
        self.to_decimal(20).parse().unwrap_or(f64::NAN)
    }

    /// The first `count` continued-fraction convergents, computed exactly.
    pub fn convergents(&self, count: usize) -> Vec<Rational> {
        let mut out = Vec::with_capacity(count);
        let (mut h0, mut h1) = (BigInt::zero(), BigInt::one());
        let (mut k0, mut k1) = (BigInt::one(), BigInt::zero());
        let mut x = self.clone();
        for _ in 0..count {
            let a = x.floor();
            let h = &a * &h1 + &h0;
            let k = &a * &k1 + &k0;
            out.push(Rational::new(h.clone(), k.clone()));
            h0 = std::mem::replace(&mut h1, h);
            k0 = std::mem::replace(&mut k1, k);
            let frac = x.add_rational(&Rational::from_integer(-a));
            if frac.is_zero() {
                break;
            }
            x = frac.recip().expect("nonzero fractional part");
        }
        out
    }
}

macro_rules! surd_binop {
    ($tr:ident, $m:ident, $checked:ident) => {
        impl std::ops::$tr<&QuadraticSurd> for &QuadraticSurd {
            type Output = QuadraticSurd;
            /// Panics when the operands live in different quadratic fields;
            /// use the `checked_*` methods to handle that case.
            fn $m(self, o: &QuadraticSurd) -> QuadraticSurd {
                self.$checked(o).expect("surd operands from different quadratic fields")
            }
        }
        impl std::ops::$tr<QuadraticSurd> for QuadraticSurd {
            type Output = QuadraticSurd;
            fn $m(self, o: QuadraticSurd) -> QuadraticSurd {
                (&self).$m(&o)
            }
        }
    };
}
surd_binop!(Add, add, checked_add);
surd_binop!(Sub, sub, checked_sub);
surd_binop!(Mul, mul, checked_mul);
surd_binop!(Div, div, checked_div);

impl std::ops::Neg for QuadraticSurd {
    type Output = QuadraticSurd;
    fn neg(self) -> QuadraticSurd {
        QuadraticSurd::neg(&self)
    }
}

impl PartialOrd for QuadraticSurd {
    /// `None` when the two values live in different fields.
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        self.cmp_surd(o).ok()
    }
}

impl fmt::Display for QuadraticSurd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.q.is_zero() {
            return if self.r.is_one() { write!(f, "{}", self.p) } else { write!(f, "{}/{}", self.p, self.r) };
        }
        let qabs = self.q.abs();
        let root = if qabs.is_one() { format!("sqrt({})", self.d) } else { format!("{}*sqrt({})", qabs, self.d) };
        let sign = if self.q.is_negative() { "-" } else { "+" };
        let body = if self.p.is_zero() {
            if self.q.is_negative() { format!("-{root}") } else { root }
        } else {
            format!("{}{}{}", self.p, sign, root)
        };
        if self.r.is_one() {
            write!(f, "{body}")
        } else if self.p.is_zero() && !self.q.is_negative() {
            write!(f, "{body}/{}", self.r)
        } else {
            write!(f, "({body})/{}", self.r)
        }
    }
}

impl Serialize for QuadraticSurd {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Exact floor of a surd.
pub fn surd_floor(x: &QuadraticSurd) -> BigInt {
    x.floor()
}

/// Both roots of `a^2 - K a + 1 = 0`, larger first, or `None` when the
/// discriminant is negative.
pub fn solve_accumulation_quadratic(k: &Rational) -> Option<(QuadraticSurd, QuadraticSurd)> {
    // K = n/m: roots (n +- sqrt(n^2 - 4 m^2)) / (2m)
    let n = k.numer();
    let m = k.denom();
    let disc = n * n - BigInt::from(4) * m * m;
    if disc.is_negative() {
        return None;
    }
    let two_m = BigInt::from(2) * m;
    let hi = QuadraticSurd::normalize(n.clone(), BigInt::one(), disc.clone(), two_m.clone());
    let lo = QuadraticSurd::normalize(n.clone(), -BigInt::one(), disc, two_m);
    Some((hi, lo))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{int, rat};

    fn s(p: i64, q: i64, d: i64, r: i64) -> QuadraticSurd {
        QuadraticSurd::from_i64(p, q, d, r)
    }

    #[test]
    fn canonical_form() {
        let x = s(2, 2, 8, 2); // (2 + 2 sqrt 8)/2 = 1 + 2 sqrt 2
        assert_eq!((x.p(), x.q(), x.radicand(), x.r()), (&1.into(), &2.into(), &2.into(), &1.into()));
        let y = s(3, 5, 4, 1); // 3 + 10
        assert!(y.is_rational());
        assert_eq!(y.to_rational(), Some(int(13)));
        let z = s(4, 0, 7, -6);
        assert_eq!(z.radicand(), &BigInt::zero());
        assert_eq!(z.to_rational(), Some(rat(-2, 3)));
    }

    #[test]
    fn floors_match_examples() {
        assert_eq!(surd_floor(&s(7, 3, 5, 2)), 6.into());
        assert_eq!(surd_floor(&s(5, 0, 0, 2)), 2.into());
        assert_eq!(surd_floor(&s(3, 2, 2, 1)), 5.into());
        assert_eq!(surd_floor(&s(-7, -3, 5, 2)), (-7).into());
        assert_eq!(surd_floor(&s(0, -1, 2, 1)), (-2).into());
    }

    #[test]
    fn arithmetic_and_fields() {
        let a = s(1, 1, 5, 2);
        let b = s(3, -1, 5, 4);
        assert_eq!(&(&a + &b) - &b, a);
        assert_eq!(&(&a * &b) / &b, a);
        let c = s(1, 1, 2, 1);
        assert!(matches!(a.checked_add(&c), Err(Error::FieldMismatch { .. })));
        assert!(a.partial_cmp(&c).is_none());
        assert_eq!(a.checked_add(&QuadraticSurd::from_integer(3)).unwrap(), s(7, 1, 5, 2));
    }

    #[test]
    fn comparisons() {
        let phi = s(1, 1, 5, 2);
        assert_eq!(phi.cmp_rational(&rat(8, 5)), Ordering::Greater);
        assert_eq!(phi.cmp_rational(&rat(13, 8)), Ordering::Less);
        assert_eq!(QuadraticSurd::sqrt_of(&rat(9, 4)).unwrap().to_rational(), Some(rat(3, 2)));
        assert_eq!(QuadraticSurd::sqrt_of(&rat(1, 2)).unwrap(), s(0, 1, 2, 2));
    }

    #[test]
    fn accumulation_roots() {
        let (hi, lo) = solve_accumulation_quadratic(&int(7)).unwrap();
        assert_eq!(hi, s(7, 3, 5, 2));
        assert_eq!(lo, s(7, -3, 5, 2));
        let (one, one2) = solve_accumulation_quadratic(&int(2)).unwrap();
        assert_eq!(one.to_rational(), Some(int(1)));
        assert_eq!(one2.to_rational(), Some(int(1)));
        let (r, _) = solve_accumulation_quadratic(&rat(59, 11)).unwrap();
        assert_eq!(r.to_decimal(6), "5.17022");
        assert!(solve_accumulation_quadratic(&int(1)).is_none());
    }

    #[test]
    fn decimals_and_convergents() {
        assert_eq!(s(0, 1, 2, 1).to_decimal(20), "1.4142135623730950488");
        assert_eq!(s(0, -1, 2, 1).to_decimal(5), "-1.4142");
        let cv = s(1, 1, 5, 2).convergents(6);
        assert_eq!(cv, vec![int(1), int(2), rat(3, 2), rat(5, 3), rat(8, 5), rat(13, 8)]);
        assert_eq!(format!("{}", s(7, 3, 5, 2)), "(7+3*sqrt(5))/2");
        assert_eq!(format!("{}", s(3, 2, 2, 1)), "3+2*sqrt(2)");
    }
}
