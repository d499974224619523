//! Classes `(d; m~, m)` solving the two Diophantine conditions and their
//! obstruction functions `mu(a) = sum m_j a_j / (d b - sum m~_i b_i)`.

use crate::error::{Error, Result};
use crate::numeric::{weight_expansion, NegativeWeightExpansion, QuadraticSurd, Rational};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ObstructiveClass {
    pub d: u64,
    /// One entry per part `b_i` of the target expansion.
    pub m_tilde: Vec<u64>,
    /// Nonincreasing, without trailing zeros.
    pub m: Vec<u64>,
}

impl ObstructiveClass {
    /// Validates both Diophantine conditions and the ordering of `m`.
    pub fn new(d: u64, m_tilde: Vec<u64>, mut m: Vec<u64>) -> Result<Self> {
        while m.last() == Some(&0) {
            m.pop();
        }
        let c = ObstructiveClass { d, m_tilde, m };
        if !c.m.windows(2).all(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(format!("{c}: m must be nonincreasing")));
        }
        if !c.satisfies_conditions() {
            return Err(Error::InvalidInput(format!("{c} violates the Diophantine conditions")));
        }
        Ok(c)
    }

    pub fn satisfies_conditions(&self) -> bool {
        let s: u64 = self.m_tilde.iter().chain(&self.m).sum();
        let q: u64 = self.m_tilde.iter().chain(&self.m).map(|x| x * x).sum();
        s + 1 == 3 * self.d && q == self.d * self.d + 1
    }

    /// `l(m)`: the number of nonzero `m_j`.
    pub fn length(&self) -> usize {
        self.m.iter().filter(|&&x| x > 0).count()
    }

    /// `d b - sum m~_i b_i`.
    pub fn denominator(&self, x: &NegativeWeightExpansion) -> Result<Rational> {
        if self.m_tilde.len() != x.parts().len() {
            return Err(Error::InvalidInput(format!("{self} has {} entries m~ but the target has {} parts", self.m_tilde.len(), x.parts().len())));
        }
        let mut den = x.b() * Rational::from_integer(BigInt::from(self.d));
        for (mt, bi) in self.m_tilde.iter().zip(x.parts()) {
            den -= bi * Rational::from_integer(BigInt::from(*mt));
        }
        Ok(den)
    }
}

impl fmt::Display for ObstructiveClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[u64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        if self.m_tilde.is_empty() {
            write!(f, "({}; {})", self.d, join(&self.m))
        } else {
            write!(f, "({}; {}; {})", self.d, join(&self.m_tilde), join(&self.m))
        }
    }
}

/// `mu_c(a)` at a rational `a >= 1`.
pub fn mu(c: &ObstructiveClass, x: &NegativeWeightExpansion, a: &Rational) -> Result<Rational> {
    let den = c.denominator(x)?;
    if den <= Rational::zero() {
        return Err(Error::InvalidInput(format!("{c} has nonpositive denominator for {x}")));
    }
    Ok(weight_expansion(a)?.dot(&c.m) / den)
}

/// Nonincreasing vectors with the given entry sum and square sum, entries at
/// most `cap`, in lexicographic order.
fn ordered_solutions(sum: u64, squares: u64, cap: u64, out: &mut Vec<Vec<u64>>, prefix: &mut Vec<u64>) {
    if sum == 0 && squares == 0 {
        out.push(prefix.clone());
        return;
    }
    // m >= 1 implies m <= m^2 <= cap m
    if sum > squares || squares > sum * cap {
        return;
    }
    for v in 1..=cap.min(sum) {
        if v * v > squares {
            break;
        }
        prefix.push(v);
        ordered_solutions(sum - v, squares - v * v, v, out, prefix);
        prefix.pop();
    }
}

/// Blocks of equal parts: `(start, len)`.
fn part_blocks(x: &NegativeWeightExpansion) -> Vec<(usize, usize)> {
    let mut blocks: Vec<(usize, usize)> = Vec::new();
    for (i, p) in x.parts().iter().enumerate() {
        match blocks.last_mut() {
            Some((s, l)) if x.parts()[*s] == *p => *l += 1,
            _ => blocks.push((i, 1)),
        }
    }
    blocks
}

/// All `m~` for degree `d`: entries at most `d`, nonincreasing inside each
/// block of equal parts, in lexicographic order.
fn tilde_choices(x: &NegativeWeightExpansion, d: u64) -> Vec<Vec<u64>> {
    let blocks = part_blocks(x);
    let n = x.parts().len();
    let mut out = Vec::new();
    let mut cur = vec![0u64; n];
    fn rec(i: usize, n: usize, d: u64, starts: &[bool], cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if i == n {
            out.push(cur.clone());
            return;
        }
        let hi = if starts[i] { d } else { cur[i - 1] };
        for v in 0..=hi {
            cur[i] = v;
            rec(i + 1, n, d, starts, cur, out);
        }
    }
    let mut starts = vec![false; n];
    for (s, _) in &blocks {
        starts[*s] = true;
    }
    rec(0, n, d, &starts, &mut cur, &mut out);
    out
}

fn classes_of_degree(x: &NegativeWeightExpansion, d: u64) -> Vec<ObstructiveClass> {
    let mut out = Vec::new();
    for mt in tilde_choices(x, d) {
        let s: u64 = mt.iter().sum();
        let q: u64 = mt.iter().map(|v| v * v).sum();
        if s + 1 > 3 * d || q > d * d + 1 {
            continue;
        }
        let mut sols = Vec::new();
        ordered_solutions(3 * d - 1 - s, d * d + 1 - q, d, &mut sols, &mut Vec::new());
        for m in sols {
            let c = ObstructiveClass { d, m_tilde: mt.clone(), m };
            if c.denominator(x).is_ok_and(|den| den > Rational::zero()) {
                debug_assert!(c.satisfies_conditions());
                out.push(c);
            }
        }
    }
    out
}

/// Every ordered class with `1 <= d <= d_max` and positive denominator,
/// sorted by `d`, then lexicographically by `(m~, m)`.
pub fn enumerate_classes(x: &NegativeWeightExpansion, d_max: u64) -> Vec<ObstructiveClass> {
    (1..=d_max).into_par_iter().map(|d| classes_of_degree(x, d)).collect::<Vec<_>>().concat()
}

/// Right hand side of the degree bound squared, without the factor `a`:
/// `1 / (b^2 d^2/(d^2+1) - sum b_i^2)`; `None` where undefined.
pub fn degree_bound_factor(x: &NegativeWeightExpansion, d: u64) -> Option<Rational> {
    let d2 = Rational::from_integer(BigInt::from(d * d));
    let sum_sq: Rational = x.parts().iter().map(|p| p * p).sum();
    let den = x.b() * x.b() * &d2 / (&d2 + Rational::one()) - sum_sq;
    (den > Rational::zero()).then(|| den.recip())
}

/// `mu^2 <= a / (b^2 d^2/(d^2+1) - sum b_i^2)`.
pub fn satisfies_degree_bound(c: &ObstructiveClass, x: &NegativeWeightExpansion, a: &Rational) -> Result<bool> {
    let v = mu(c, x, a)?;
    Ok(match degree_bound_factor(x, c.d) {
        Some(f) => &v * &v <= a * f,
        None => true,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Certificate {
    Volume,
    Class(ObstructiveClass),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Classes beyond `d_max` cannot beat the value by the degree bound.
    Exact,
    /// The value is a lower bound; larger classes were not excluded.
    LowerBound,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExactValue {
    pub value: QuadraticSurd,
    pub certificate: Certificate,
    pub d_max: u64,
    pub regime: Regime,
}

/// `max(sqrt(a/vol), max mu(a))` over the classes with `d <= d_max`.
pub fn exact_c_at(x: &NegativeWeightExpansion, a: &Rational, d_max: u64) -> Result<ExactValue> {
    if *a < Rational::one() {
        return Err(Error::InvalidInput(format!("need a >= 1, got {a}")));
    }
    let vol_sq = a / x.vol();
    let mut best: Option<(Rational, ObstructiveClass)> = None;
    for d in 1..=d_max {
        // degree d cannot beat the current best
        if let (Some((v, _)), Some(f)) = (&best, degree_bound_factor(x, d)) {
            if a * &f <= v * v {
                continue;
            }
        }
        for c in classes_of_degree(x, d) {
            let v = mu(&c, x, a)?;
            if &v * &v > vol_sq && best.as_ref().map_or(true, |(b, _)| v > *b) {
                best = Some((v, c));
            }
        }
    }
    Ok(match best {
        Some((v, c)) => {
            let exact = degree_bound_factor(x, d_max + 1).is_some_and(|f| a * f <= &v * &v);
            ExactValue {
                value: QuadraticSurd::from_rational(&v),
                certificate: Certificate::Class(c),
                d_max,
                regime: if exact { Regime::Exact } else { Regime::LowerBound },
            }
        }
        None => ExactValue {
            value: QuadraticSurd::sqrt_of(&vol_sq)?,
            certificate: Certificate::Volume,
            d_max,
            regime: Regime::LowerBound,
        },
    })
}

/// The point `a` in `[lo, hi]` with `l(a) = l(m)` where `mu > sqrt(a/vol)`,
/// scanning rationals with denominator at most `max_denominator`
/// (default `10 l(m)`).
pub fn singular_point_of(
    c: &ObstructiveClass,
    x: &NegativeWeightExpansion,
    lo: &Rational,
    hi: &Rational,
    max_denominator: Option<u64>,
) -> Result<Option<Rational>> {
    let len = c.length() as u64;
    let qmax = max_denominator.unwrap_or(10 * len.max(1));
    let lo = lo.max(&Rational::one()).clone();
    let mut found: Vec<Rational> = Vec::new();
    for q in 1..=qmax {
        let qb = BigInt::from(q);
        let start = crate::numeric::ceil(&(&lo * &qb));
        let end = crate::numeric::floor(&(hi * &qb));
        let mut p = start;
        while p <= end {
            let a = Rational::new(p.clone(), qb.clone());
            p += 1;
            if *a.denom() != qb {
                continue;
            }
            if weight_expansion(&a)?.len() != len {
                continue;
            }
            let v = mu(c, x, &a)?;
            if &v * &v > &a / x.vol() {
                found.push(a);
            }
        }
    }
    found.sort();
    Ok(found.into_iter().next())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{int, rat};
    use proptest::prelude::*;

    fn x(s: &str) -> NegativeWeightExpansion {
        NegativeWeightExpansion::parse(s).unwrap()
    }

    #[test]
    fn small_degrees() {
        let ball = x("(3)");
        assert_eq!(enumerate_classes(&ball, 1), vec![ObstructiveClass::new(1, vec![], vec![1, 1]).unwrap()]);
        let d2 = classes_of_degree(&ball, 2);
        assert_eq!(d2, vec![ObstructiveClass::new(2, vec![], vec![1, 1, 1, 1, 1]).unwrap()]);
        assert!(ObstructiveClass::new(2, vec![], vec![2, 1, 1, 1, 1]).is_err());
        assert!(enumerate_classes(&ball, 0).is_empty());
        let all = enumerate_classes(&x("(3;1)"), 6);
        assert!(all.iter().all(|c| c.satisfies_conditions()));
        assert!(all.windows(2).all(|w| w[0].d <= w[1].d));
    }

    #[test]
    fn mu_values() {
        let ball = x("(3)");
        let c = ObstructiveClass::new(1, vec![], vec![1, 1]).unwrap();
        assert_eq!(mu(&c, &ball, &int(2)).unwrap(), rat(2, 3));
        assert_eq!(mu(&c, &ball, &int(1)).unwrap(), rat(1, 3));
        let bad = ObstructiveClass::new(1, vec![1], vec![1]).unwrap();
        assert!(mu(&bad, &ball, &int(2)).is_err());
    }

    #[test]
    fn exact_values() {
        let ball = x("(3)");
        let r = exact_c_at(&ball, &int(2), 5).unwrap();
        assert_eq!(r.value, QuadraticSurd::from_rational(&rat(2, 3)));
        assert_eq!(r.certificate, Certificate::Class(ObstructiveClass::new(1, vec![], vec![1, 1]).unwrap()));
        let r = exact_c_at(&ball, &int(1), 5).unwrap();
        assert_eq!(r.value, QuadraticSurd::from_rational(&rat(1, 3)));
        assert_eq!(r.certificate, Certificate::Volume);
        let x421 = x("(4;2,1)");
        let a = rat(517022, 100000);
        let r = exact_c_at(&x421, &a, 6).unwrap();
        let v = r.value.to_rational().unwrap();
        assert!(&v * &v > &a / int(11));
    }

    #[test]
    fn singular_points() {
        let ball = x("(3)");
        let c = ObstructiveClass::new(1, vec![], vec![1, 1]).unwrap();
        assert_eq!(singular_point_of(&c, &ball, &rat(3, 2), &rat(5, 2), None).unwrap(), Some(int(2)));
        let one = ObstructiveClass::new(1, vec![1], vec![1]).unwrap();
        assert_eq!(singular_point_of(&one, &x("(3;1)"), &int(1), &rat(19, 10), None).unwrap(), Some(int(1)));
        assert_eq!(singular_point_of(&c, &ball, &int(5), &int(6), None).unwrap(), None);
    }

    #[test]
    fn permutation_dominance() {
        fn perms(v: &[u64]) -> Vec<Vec<u64>> {
            if v.len() <= 1 {
                return vec![v.to_vec()];
            }
            let mut out = Vec::new();
            for i in 0..v.len() {
                let mut rest = v.to_vec();
                let h = rest.remove(i);
                for mut p in perms(&rest) {
                    p.insert(0, h);
                    out.push(p);
                }
            }
            out
        }
        let ball = x("(3)");
        for c in enumerate_classes(&ball, 3).into_iter().filter(|c| c.m.len() <= 7) {
            for a in [rat(13, 4), rat(29, 9), int(5), rat(7, 3)] {
                let w = weight_expansion(&a).unwrap().weights();
                let dot = |m: &[u64]| -> Rational { m.iter().zip(&w).map(|(mi, wi)| wi * Rational::from_integer(BigInt::from(*mi))).sum() };
                let best = perms(&c.m).iter().map(|p| dot(p)).max().unwrap();
                assert_eq!(best, dot(&c.m));
            }
        }
    }

    proptest! {
        #[test]
        fn length_lemma(ci in 0usize..60, p in 1i64..200, q in 1i64..12, which in 0usize..3) {
            let target = ["(3)", "(3;1)", "(4;2,1)"][which];
            let xx = x(target);
            let classes = enumerate_classes(&xx, 5);
            let c = &classes[ci % classes.len()];
            let a = int(1) + rat(p, q);
            if weight_expansion(&a).unwrap().len() < c.length() as u64 {
                let v = mu(c, &xx, &a).unwrap();
                prop_assert!(&v * &v <= &a / xx.vol());
            }
        }

        #[test]
        fn degree_bound(ci in 0usize..80, p in 1i64..300, q in 1i64..15, which in 0usize..3) {
            let target = ["(3)", "(3;1,1)", "(4;2,1)"][which];
            let xx = x(target);
            let classes = enumerate_classes(&xx, 6);
            let c = &classes[ci % classes.len()];
            prop_assert!(satisfies_degree_bound(c, &xx, &(int(1) + rat(p, q))).unwrap());
        }
    }
}
