//! Lattice counts in surd triangles, the defect `d(T)`, the sums `C_theta(n)`
//! and quasipolynomial fits of cap functions.

use crate::capacities::{ech_convex_toric, CapacitySequence};
use crate::error::{Error, Result};
use crate::numeric::{NegativeWeightExpansion, QuadraticSurd, Rational};
use crate::polygon::{fano_domains, other_reflexive_polygons, pt, LatticePolygon};
use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

/// `floor(c * theta)` for integers `c`, with `theta = (p + q sqrt d)/r`
/// held in machine words when it fits. Overflowing products fall back to
/// exact big-integer floors.
#[derive(Clone, Debug)]
struct FloorKernel {
    theta: QuadraticSurd,
    words: Option<(i128, i128, u128, i128)>,
}

impl FloorKernel {
    fn new(theta: &QuadraticSurd) -> Self {
        let words = (|| {
            Some((theta.p().to_i128()?, theta.q().to_i128()?, theta.radicand().to_u128()?, theta.r().to_i128()?))
        })();
        FloorKernel { theta: theta.clone(), words }
    }

    fn floor_mul(&self, c: i128) -> i128 {
        self.fast(c).unwrap_or_else(|| {
            let x = self.theta.mul_rational(&Rational::from_integer(c.into()));
            x.floor().to_i128().expect("floor fits in i128")
        })
    }

    fn fast(&self, c: i128) -> Option<i128> {
        let (p, q, d, r) = self.words?;
        let a = c.checked_mul(p)?;
        let s = c.checked_mul(q)?;
        if s == 0 || d == 0 {
            return Some(Integer::div_floor(&a, &r));
        }
        let s2d = s.unsigned_abs().checked_mul(s.unsigned_abs())?.checked_mul(d)?;
        let root = i128::try_from(s2d.sqrt()).ok()?;
        // sqrt(s^2 d) is irrational, so its ceiling is root + 1
        let num = if s > 0 { a.checked_add(root)? } else { a.checked_sub(root)?.checked_sub(1)? };
        Some(Integer::div_floor(&num, &r))
    }
}

fn half() -> Rational {
    Rational::new(BigInt::one(), BigInt::from(2))
}

/// `C_theta(n) = sum_{k=0}^n ({k theta} - 1/2)`, exactly.
pub fn c_theta(theta: &QuadraticSurd, n: u64) -> QuadraticSurd {
    let k = FloorKernel::new(theta);
    let floors: i128 = (0..=n as i128).map(|j| k.floor_mul(j)).sum();
    c_theta_from_floor_sum(theta, n, floors)
}

fn c_theta_from_floor_sum(theta: &QuadraticSurd, n: u64, floors: i128) -> QuadraticSurd {
    let n_r = Rational::from_integer(BigInt::from(n));
    let tri = &n_r * (&n_r + Rational::one()) * half();
    let rest = -Rational::from_integer(BigInt::from(floors)) - (n_r + Rational::one()) * half();
    theta.mul_rational(&tri).add_rational(&rest)
}

/// `C_theta(n)` for `n = 0..=n_max`.
pub fn c_theta_series(theta: &QuadraticSurd, n_max: u64) -> Vec<QuadraticSurd> {
    let k = FloorKernel::new(theta);
    let mut acc: i128 = 0;
    (0..=n_max)
        .map(|n| {
            acc += k.floor_mul(n as i128);
            c_theta_from_floor_sum(theta, n, acc)
        })
        .collect()
}

/// `C_theta(n) + C_{1/theta}(n)` for `n = 0..=n_max`. Requires
/// `theta + 1/theta` rational, which makes every term rational.
pub fn c_theta_pair_series(theta: &QuadraticSurd, n_max: u64) -> Result<Vec<Rational>> {
    let inv = theta.recip()?;
    let sum = theta.checked_add(&inv)?;
    let k_sum = sum
        .to_rational()
        .ok_or_else(|| Error::InvalidInput("theta + 1/theta is irrational".into()))?;
    let (ka, kb) = (FloorKernel::new(theta), FloorKernel::new(&inv));
    let mut acc: i128 = 0;
    Ok((0..=n_max)
        .map(|n| {
            acc += ka.floor_mul(n as i128) + kb.floor_mul(n as i128);
            let n_r = Rational::from_integer(BigInt::from(n));
            &k_sum * &n_r * (&n_r + Rational::one()) * half()
                - Rational::from_integer(BigInt::from(acc))
                - (n_r + Rational::one())
        })
        .collect())
}

/// Side lengths of the triangle with vertices `0`, `(T/u) e_1`, `(T/v) e_2`
/// scaled so that `u v = vol` and `u + v = per`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SurdPair {
    pub u: QuadraticSurd,
    pub v: QuadraticSurd,
    #[serde(serialize_with = "crate::numeric::serialize_rational")]
    pub per: Rational,
    #[serde(serialize_with = "crate::numeric::serialize_rational")]
    pub vol: Rational,
}

impl SurdPair {
    /// Any positive pair whose sum and product are rational.
    pub fn new(u: QuadraticSurd, v: QuadraticSurd) -> Result<Self> {
        if u.signum().is_le() || v.signum().is_le() {
            return Err(Error::InvalidInput("u and v must be positive".into()));
        }
        let per = u
            .checked_add(&v)?
            .to_rational()
            .ok_or_else(|| Error::InvalidInput("u + v is irrational".into()))?;
        let vol = u
            .checked_mul(&v)?
            .to_rational()
            .ok_or_else(|| Error::InvalidInput("u v is irrational".into()))?;
        Ok(SurdPair { u, v, per, vol })
    }

    /// `u = sqrt(vol/a0)`, `v = sqrt(a0 vol)`: the roots of
    /// `z^2 - per z + vol`. Rejects expansions with rational `a0`.
    pub fn from_expansion(x: &NegativeWeightExpansion) -> Result<Self> {
        let (per, vol) = (x.per(), x.vol());
        let disc = &per * &per - Rational::from_integer(4.into()) * &vol;
        if disc.is_negative() {
            return Err(Error::InvalidInput(format!("{x} has no real accumulation point")));
        }
        let root = QuadraticSurd::sqrt_of(&disc)?;
        if root.is_rational() {
            return Err(Error::InvalidInput(format!("{x} has a rational accumulation point")));
        }
        let h = half();
        let u = root.neg().add_rational(&per).mul_rational(&h);
        let v = root.add_rational(&per).mul_rational(&h);
        Ok(SurdPair { u, v, per, vol })
    }

    /// `v/u`, the accumulation point.
    pub fn a0(&self) -> Result<QuadraticSurd> {
        self.v.checked_div(&self.u)
    }

    pub fn is_irrational(&self) -> bool {
        !self.u.is_rational()
    }
}

/// `#{(x, y) in Z^2_{>=0} : x u + y v <= T}`, grouped by `m = min(x, y)`.
pub fn ehrhart_triangle(pair: &SurdPair, t: u64) -> u64 {
    EhrhartCounter::new(pair).count(t)
}

struct EhrhartCounter {
    inv_u: FloorKernel,
    inv_v: FloorKernel,
    per_num: i128,
    per_den: i128,
}

impl EhrhartCounter {
    fn new(pair: &SurdPair) -> Self {
        let den = Rational::from_integer(pair.per.denom().clone());
        let scaled = |s: &QuadraticSurd| FloorKernel::new(&s.mul_rational(&den).recip().expect("positive side"));
        EhrhartCounter {
            inv_u: scaled(&pair.u),
            inv_v: scaled(&pair.v),
            per_num: pair.per.numer().to_i128().expect("perimeter numerator fits"),
            per_den: pair.per.denom().to_i128().expect("perimeter denominator fits"),
        }
    }

    fn count(&self, t: u64) -> u64 {
        let top = t as i128 * self.per_den;
        let mut total: i128 = 0;
        let mut c = top;
        while c >= 0 {
            total += 1 + self.inv_v.floor_mul(c) + self.inv_u.floor_mul(c);
            c -= self.per_num;
        }
        total as u64
    }
}

/// `ehr(T) - T^2/(2 vol) - per T/(2 vol)`.
pub fn d_of_t(pair: &SurdPair, t: u64) -> Rational {
    defect(pair, t, ehrhart_triangle(pair, t))
}

fn defect(pair: &SurdPair, t: u64, count: u64) -> Rational {
    let t = Rational::from_integer(BigInt::from(t));
    let two_vol = Rational::from_integer(2.into()) * &pair.vol;
    Rational::from_integer(BigInt::from(count)) - (&t * &t + &pair.per * &t) / two_vol
}

/// `d(T)` for `T = 0..=t_max`, computed in parallel.
pub fn d_series(pair: &SurdPair, t_max: u64) -> Vec<Rational> {
    let counter = EhrhartCounter::new(pair);
    (0..=t_max).into_par_iter().map(|t| defect(pair, t, counter.count(t))).collect()
}

/// Whether the lattice count of the dilated triangle is a quasipolynomial:
/// `per/vol` and `per^2/vol` are both integers. Requires `u/v` irrational.
pub fn quasipolynomial_test(pair: &SurdPair) -> Result<bool> {
    if !pair.is_irrational() {
        return Err(Error::InvalidInput("u/v is rational".into()));
    }
    let beta = &pair.per / &pair.vol;
    let alpha_beta = &pair.per * &pair.per / &pair.vol;
    Ok(beta.is_integer() && alpha_beta.is_integer())
}

/// Exactly one interior lattice point.
pub fn reflexive_check(p: &LatticePolygon) -> bool {
    p.interior_points() == 1
}

/// A polygon with the given expansion: a catalogue domain when one carries
/// the label, otherwise the `b`-triangle with its top, right and origin
/// corners cut (at most three parts).
pub fn polygon_for_expansion(x: &NegativeWeightExpansion) -> Result<LatticePolygon> {
    let label = x.to_string();
    let same = |l: &str| NegativeWeightExpansion::parse(l).map(|y| y.to_string() == label).unwrap_or(false);
    if let Some((_, p)) = fano_domains().into_iter().find(|(l, _)| same(l)) {
        return Ok(p);
    }
    if let Some((_, p)) = other_reflexive_polygons().into_iter().find(|(l, _)| l.is_some_and(same)) {
        return Ok(p);
    }
    if !x.is_integral() || x.parts().len() > 3 {
        return Err(Error::UnsupportedShape(format!("no normal-form polygon for {x}")));
    }
    let as_i64 = |r: &Rational| r.to_integer().to_i64().ok_or(Error::Overflow("polygon coordinates"));
    let b = as_i64(x.b())?;
    let mut cuts = [0i64; 3];
    for (c, p) in cuts.iter_mut().zip(x.parts()) {
        *c = as_i64(p)?;
    }
    let [top, right, origin] = cuts;
    if top + right > b || top + origin > b || right + origin > b {
        return Err(Error::UnsupportedShape(format!("corner cuts of {x} overlap")));
    }
    let pts = [
        pt(origin, 0),
        pt(b - right, 0),
        pt(b - right, right),
        pt(top, b - top),
        pt(0, b - top),
        pt(0, origin),
    ];
    let poly = LatticePolygon::hull(&pts)?;
    let vol = x.vol();
    if Rational::from_integer(poly.area2().into()) != vol {
        return Err(Error::UnsupportedShape(format!("corner cuts of {x} do not realise it")));
    }
    Ok(poly)
}

/// `per/vol` is an integer and the polygon dilated by it is reflexive.
pub fn scaled_reflexive_test(x: &NegativeWeightExpansion) -> Result<bool> {
    let poly = polygon_for_expansion(x)?;
    let beta = x.per() / x.vol();
    if !beta.is_integer() {
        return Ok(false);
    }
    let k = beta.to_integer().to_i64().ok_or(Error::Overflow("dilation factor"))?;
    Ok(reflexive_check(&poly.dilate(k)))
}

/// `cap(T) = quadratic T^2 + linear T + gamma[T mod modulus]` for every
/// `T >= stabilization` that was tested.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuasiPoly {
    pub modulus: u64,
    #[serde(serialize_with = "crate::numeric::serialize_rational")]
    pub quadratic: Rational,
    #[serde(serialize_with = "crate::numeric::serialize_rational")]
    pub linear: Rational,
    #[serde(serialize_with = "crate::numeric::serialize_rationals")]
    pub gamma: Vec<Rational>,
    pub stabilization: u64,
    pub tested_to: u64,
}

impl QuasiPoly {
    pub fn eval(&self, t: u64) -> Rational {
        let tr = Rational::from_integer(BigInt::from(t));
        &self.quadratic * &tr * &tr + &self.linear * &tr + &self.gamma[(t % self.modulus) as usize]
    }

    pub fn gamma_min(&self) -> &Rational {
        self.gamma.iter().min().expect("nonempty residue table")
    }
}

/// Minimum number of full periods that must agree after stabilization.
pub const GAMMA_CONFIRM_PERIODS: u64 = 3;

/// `cap(T)` for `T = 0..=t_max`, growing the certified prefix as needed.
pub fn cap_values(x: &NegativeWeightExpansion, t_max: u64) -> Result<Vec<u64>> {
    let t = Rational::from_integer(BigInt::from(t_max));
    let est = (&t * &t + x.per() * &t) / (Rational::from_integer(2.into()) * x.vol());
    let mut count = est.ceil().to_integer().to_usize().ok_or(Error::Overflow("cap prefix"))? + 64;
    loop {
        let seq = ech_convex_toric(x, count)?;
        let seq = seq.truncate(seq.certified_len());
        if !seq.is_empty() && seq.value(seq.len() - 1) > t {
            return Ok(counts_up_to(&seq, t_max));
        }
        count = count * 3 / 2;
    }
}

fn counts_up_to(seq: &CapacitySequence, t_max: u64) -> Vec<u64> {
    let (numers, den) = (seq.numers(), seq.denom());
    let mut out = Vec::with_capacity(t_max as usize + 1);
    let mut i = 0usize;
    for t in 0..=t_max {
        let bound = t as i128 * den;
        while i < numers.len() && numers[i] <= bound {
            i += 1;
        }
        out.push(i as u64);
    }
    out
}

/// First index from which `g` is periodic with period `m` through its end,
/// provided at least `GAMMA_CONFIRM_PERIODS` periods confirm it.
fn stabilization(g: &[Rational], m: usize) -> Option<usize> {
    let last_bad = (m..g.len()).rev().find(|&t| g[t] != g[t - m]);
    let start = match last_bad {
        Some(t) => t + 1 - m,
        None => 0,
    };
    (g.len() - start >= (GAMMA_CONFIRM_PERIODS as usize + 1) * m).then_some(start)
}

/// `(1/(2 vol), per/(2 vol))`, the leading coefficients of `cap_X`.
pub fn leading_terms(x: &NegativeWeightExpansion) -> (Rational, Rational) {
    let two_vol = Rational::from_integer(2.into()) * x.vol();
    (Rational::one() / &two_vol, x.per() / &two_vol)
}

/// Fits `cap_X(T) - T^2/(2 vol) - per T/(2 vol)` to a periodic table,
/// trying modulus `vol` and then its divisors (smallest that stabilizes).
/// `X` must be integral and primitive; a dilated domain has a linear term
/// that depends on the residue, so no such table exists.
pub fn fit_gamma(x: &NegativeWeightExpansion, t_max: u64) -> Result<QuasiPoly> {
    let vol = x.vol();
    if !x.is_integral() || !x.is_primitive() {
        return Err(Error::InvalidInput(format!("{x} must be integral and primitive")));
    }
    let vol_n = vol.to_integer().to_u64().ok_or(Error::Overflow("volume"))?;
    let caps = cap_values(x, t_max)?;
    let (quadratic, linear) = leading_terms(x);
    let g: Vec<Rational> = caps
        .iter()
        .enumerate()
        .map(|(t, &c)| {
            let tr = Rational::from_integer(BigInt::from(t));
            Rational::from_integer(BigInt::from(c)) - &quadratic * &tr * &tr - &linear * &tr
        })
        .collect();
    if stabilization(&g, vol_n as usize).is_none() {
        return Err(Error::CheckFailed(format!(
            "cap function of {x} does not stabilize modulo {vol_n} by T = {t_max}"
        )));
    }
    let (modulus, start) = (1..=vol_n)
        .filter(|d| vol_n % d == 0)
        .find_map(|d| stabilization(&g, d as usize).map(|s| (d, s)))
        .expect("modulus vol stabilizes");
    let first = start + (modulus as usize - start % modulus as usize) % modulus as usize;
    let mut gamma = vec![Rational::zero(); modulus as usize];
    for t in first..first + modulus as usize {
        gamma[t % modulus as usize] = g[t].clone();
    }
    Ok(QuasiPoly { modulus, quadratic, linear, gamma, stabilization: start as u64, tested_to: t_max })
}

/// Smallest `T <= t_max` with `d(T) < min_r Gamma_r`.
pub fn key_inequality_witness(pair: &SurdPair, fit: &QuasiPoly, t_max: u64) -> Option<(u64, Rational)> {
    let bound = fit.gamma_min();
    d_series(pair, t_max)
        .into_iter()
        .enumerate()
        .find(|(_, d)| d < bound)
        .map(|(t, d)| (t as u64, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{rat, solve_accumulation_quadratic};
    use proptest::prelude::*;
    use std::cmp::Ordering;
    use std::collections::BTreeSet;

    const SIX: [&str; 6] = ["(3)", "(4;2,2)", "(3;1)", "(3;1,1)", "(3;1,1,1)", "(3;1,1,1,1)"];

    fn pair(s: &str) -> SurdPair {
        SurdPair::from_expansion(&NegativeWeightExpansion::parse(s).unwrap()).unwrap()
    }

    /// Direct enumeration with exact comparisons.
    fn brute_count(p: &SurdPair, t: u64) -> u64 {
        let t = Rational::from_integer(BigInt::from(t));
        let mut n = 0;
        for x in 0.. {
            let xu = p.u.mul_rational(&Rational::from_integer(BigInt::from(x)));
            if xu.cmp_rational(&t) == Ordering::Greater {
                break;
            }
            for y in 0.. {
                let yv = p.v.mul_rational(&Rational::from_integer(BigInt::from(y)));
                if xu.checked_add(&yv).unwrap().cmp_rational(&t) == Ordering::Greater {
                    break;
                }
                n += 1;
            }
        }
        n
    }

    #[test]
    fn pairs() {
        for s in SIX {
            let p = pair(s);
            let inv = p.u.recip().unwrap().checked_add(&p.v.recip().unwrap()).unwrap();
            assert_eq!(inv.to_rational(), Some(&p.per / &p.vol), "{s}");
            assert_eq!(p.a0().unwrap().cmp_rational(&Rational::one()), Ordering::Greater);
        }
        assert!(SurdPair::from_expansion(&NegativeWeightExpansion::parse("(3;1,1,1,1,1)").unwrap()).is_err());
        assert!(SurdPair::from_expansion(&NegativeWeightExpansion::parse("(4;1,1,1,1)").unwrap()).is_err());
    }

    #[test]
    fn c_theta_values() {
        let th = QuadraticSurd::from_i64(0, 1, 2, 1);
        assert_eq!(c_theta(&th, 0).to_rational(), Some(rat(-1, 2)));
        // {sqrt 2} - 1/2 - 1/2
        assert_eq!(c_theta(&th, 1), th.add_rational(&rat(-2, 1)));
        let series = c_theta_series(&th, 50);
        assert_eq!(series[50], c_theta(&th, 50));
        // {0} + {1/2} + {1} + {3/2} - 2
        assert_eq!(c_theta(&QuadraticSurd::from_rational(&rat(1, 2)), 3).to_rational(), Some(rat(-1, 1)));
    }

    #[test]
    fn c_theta_pair_sums() {
        let (a0, _) = solve_accumulation_quadratic(&rat(5, 1)).unwrap();
        let s = c_theta_pair_series(&a0, 200).unwrap();
        // only the k = 0 term survives: {k a0} + {k/a0} = 1 for k >= 1
        assert!(s.iter().all(|v| *v == rat(-1, 1)));
        let direct = c_theta(&a0, 37).checked_add(&c_theta(&a0.recip().unwrap(), 37)).unwrap();
        assert_eq!(direct.to_rational(), Some(rat(-1, 1)));
        let (t, _) = solve_accumulation_quadratic(&rat(61, 9)).unwrap();
        let s = c_theta_pair_series(&t, 2000).unwrap();
        assert!(s.iter().all(|v| (v * rat(9, 1)).is_integer()));
        assert!(s.iter().any(|v| v.is_positive()) && s.iter().any(|v| v.is_negative()));
        assert!(c_theta_pair_series(&QuadraticSurd::from_i64(0, 1, 2, 1), 3).is_err());
    }

    #[test]
    fn ehrhart_counts() {
        let one = QuadraticSurd::from_integer(1);
        let p = SurdPair::new(one.clone(), one).unwrap();
        assert_eq!(ehrhart_triangle(&p, 2), 6);
        assert_eq!(d_of_t(&p, 0), Rational::one());
        for s in SIX {
            let p = pair(s);
            for t in 0..=60 {
                assert_eq!(ehrhart_triangle(&p, t), brute_count(&p, t), "{s} T={t}");
            }
        }
    }

    #[test]
    fn defect_identity() {
        for s in SIX {
            let p = pair(s);
            let per = p.per.to_integer().to_u64().unwrap();
            let a0 = p.a0().unwrap();
            let sums = c_theta_pair_series(&a0, 300).unwrap();
            for n in 0..=300u64 {
                assert_eq!(d_of_t(&p, n * per), -sums[n as usize].clone(), "{s} n={n}");
            }
        }
    }

    #[test]
    fn defect_ranges() {
        for s in SIX {
            let p = pair(s);
            let values: BTreeSet<Rational> = d_series(&p, 2000).into_iter().collect();
            assert!(values.len() as u64 <= p.vol.to_integer().to_u64().unwrap(), "{s}: {}", values.len());
        }
        let p = pair("(4;2,1)");
        let d = d_series(&p, 3000);
        assert!(d.iter().any(|v| v.is_positive()) && d.iter().any(|v| v.is_negative()));
    }

    #[test]
    fn quasipolynomial_conditions() {
        assert!(quasipolynomial_test(&pair("(3)")).unwrap());
        assert!(quasipolynomial_test(&pair("(4;2,2)")).unwrap());
        assert!(!quasipolynomial_test(&pair("(4;2,1)")).unwrap());
        for s in SIX {
            assert!(quasipolynomial_test(&pair(s)).unwrap());
        }
        let one = QuadraticSurd::from_integer(1);
        assert!(quasipolynomial_test(&SurdPair::new(one.clone(), one).unwrap()).is_err());
    }

    #[test]
    fn reflexive_polygons() {
        for (l, p) in fano_domains() {
            assert!(reflexive_check(&p), "{l}");
        }
        for (_, p) in other_reflexive_polygons() {
            assert!(reflexive_check(&p));
        }
        let rect = LatticePolygon::from_vertices(&[pt(0, 0), pt(3, 0), pt(3, 1), pt(0, 1)]).unwrap();
        assert!(!reflexive_check(&rect));
        let x = |s: &str| NegativeWeightExpansion::parse(s).unwrap();
        for s in SIX {
            assert!(scaled_reflexive_test(&x(s)).unwrap(), "{s}");
        }
        assert!(scaled_reflexive_test(&x("(2;1,1)")).unwrap());
        assert!(!scaled_reflexive_test(&x("(4;2,1)")).unwrap());
        assert!(!scaled_reflexive_test(&x("(6;3,3)")).unwrap());
        assert!(polygon_for_expansion(&x("(5;1,1,1,1)")).is_err());
    }

    #[test]
    fn gamma_fits() {
        let x = |s: &str| NegativeWeightExpansion::parse(s).unwrap();
        let q = fit_gamma(&x("(3;1,1,1,1,1)"), 120).unwrap();
        assert_eq!(q.modulus, 4);
        assert_eq!(q.gamma, vec![rat(1, 1), rat(3, 8), rat(1, 2), rat(3, 8)]);
        assert_eq!((q.quadratic.clone(), q.linear.clone()), (rat(1, 8), rat(1, 2)));
        let ball = fit_gamma(&x("(1)"), 60).unwrap();
        assert_eq!((ball.modulus, ball.gamma.clone()), (1, vec![rat(1, 1)]));
        assert_eq!(leading_terms(&x("(3)")), (rat(1, 18), rat(1, 2)));
        assert!(matches!(fit_gamma(&x("(3)"), 120), Err(Error::InvalidInput(_))));
        let q = fit_gamma(&x("(4;2,1)"), 400).unwrap();
        let caps = cap_values(&x("(4;2,1)"), 400).unwrap();
        for t in q.stabilization..=400 {
            assert_eq!(q.eval(t), Rational::from_integer(caps[t as usize].into()));
        }
    }

    proptest! {
        #[test]
        fn pair_sum_is_rational_with_bounded_denominator(p in 3i64..40, q in 1i64..6, n in 0u64..300) {
            prop_assume!(p > 2 * q);
            let k = rat(p, q);
            let (a0, _) = solve_accumulation_quadratic(&k).unwrap();
            prop_assume!(!a0.is_rational());
            let s = c_theta_pair_series(&a0, n).unwrap();
            let direct = c_theta(&a0, n).checked_add(&c_theta(&a0.recip().unwrap(), n)).unwrap();
            prop_assert_eq!(direct.to_rational(), Some(s[n as usize].clone()));
            prop_assert!((&s[n as usize] * Rational::from_integer(BigInt::from(2 * q))).is_integer());
        }

        #[test]
        fn ehrhart_matches_enumeration(b in 4i64..9, c in 1i64..3, t in 0u64..40) {
            let x = NegativeWeightExpansion::from_ints(b, &[c]).unwrap();
            if let Ok(p) = SurdPair::from_expansion(&x) {
                prop_assert_eq!(ehrhart_triangle(&p, t), brute_count(&p, t));
            }
        }
    }
}
