//! The ellipsoid embedding function `c_X(a)`: exact lower bounds from
//! capacity ratios, the accumulation point, the staircase obstruction test,
//! corner detection and recurrence fitting.

use crate::capacities::{ech_convex_toric, ellipsoid_prefix, CapacitySequence};
use crate::error::{Error, Result};
use crate::numeric::{serialize_rational, solve_accumulation_quadratic, NegativeWeightExpansion, QuadraticSurd, Rational};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use std::cmp::Ordering;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FunctionSample {
    #[serde(serialize_with = "serialize_rational")]
    pub a: Rational,
    /// `max_k N(1, a)_k / c_k(X)` over the computed prefix.
    #[serde(serialize_with = "serialize_rational")]
    pub value: Rational,
    pub witness_k: usize,
    pub certified: bool,
    /// The ratio bound sits below `sqrt(a/vol)` at this prefix length.
    pub below_volume: bool,
}

/// `(max_k N(1, a)_k / c_k, argmax)` over `1 <= k < caps.certified_len()`.
pub fn ratio_sup(caps: &CapacitySequence, a: &Rational) -> Result<(Rational, usize)> {
    if *a < Rational::one() {
        return Err(Error::InvalidInput(format!("need a >= 1, got {a}")));
    }
    let len = caps.certified_len();
    if len < 2 {
        return Err(Error::InsufficientLength { needed: 2, available: len });
    }
    let ell = ellipsoid_prefix(&Rational::one(), a, len)?;
    let (en, cn) = (ell.numers(), caps.numers());
    let mut best = 1usize;
    for k in 2..len {
        // en[k]/cn[k] > en[best]/cn[best], all terms positive
        if en[k] * cn[best] > en[best] * cn[k] {
            best = k;
        }
    }
    let value = Rational::new(BigInt::from(en[best]) * caps.denom(), BigInt::from(cn[best]) * ell.denom());
    Ok((value, best))
}

fn sample_at(caps: &CapacitySequence, x: &NegativeWeightExpansion, a: Rational, certified: bool) -> Result<FunctionSample> {
    let (value, witness_k) = ratio_sup(caps, &a)?;
    let below_volume = &value * &value < &a / x.vol();
    Ok(FunctionSample { a, value, witness_k, certified, below_volume })
}

/// Grid `a_min, a_min + step, ...` up to `a_max`.
pub fn grid(a_min: &Rational, a_max: &Rational, step: &Rational) -> Result<Vec<Rational>> {
    if !step.is_positive() || a_min > a_max {
        return Err(Error::InvalidInput("need a_min <= a_max and a positive step".into()));
    }
    if *a_min < Rational::one() {
        return Err(Error::InvalidInput(format!("grid starts below 1 at {a_min}")));
    }
    let n = ((a_max - a_min) / step).floor().to_integer().to_usize().ok_or(Error::Overflow("grid size"))?;
    Ok((0..=n).map(|i| a_min + step * Rational::from_integer(BigInt::from(i))).collect())
}

/// Samples on a grid against a precomputed capacity sequence.
pub fn sample_with_capacities(
    x: &NegativeWeightExpansion,
    caps: &CapacitySequence,
    points: &[Rational],
    requested: usize,
) -> Result<Vec<FunctionSample>> {
    let certified = caps.certified_len() >= requested;
    points.par_iter().map(|a| sample_at(caps, x, a.clone(), certified)).collect()
}

/// Lower bounds for `c_X` on the grid from the first `count` capacities.
pub fn sample_embedding_function(
    x: &NegativeWeightExpansion,
    a_min: &Rational,
    a_max: &Rational,
    step: &Rational,
    count: usize,
) -> Result<Vec<FunctionSample>> {
    let points = grid(a_min, a_max, step)?;
    let caps = ech_convex_toric(x, count)?;
    sample_with_capacities(x, &caps, &points, count)
}

/// Root `> 1` of `a^2 - (per^2/vol - 2) a + 1 = 0`; `1` when the
/// coefficient is 2 and `None` without real roots.
pub fn accumulation_point(x: &NegativeWeightExpansion) -> Option<QuadraticSurd> {
    solve_accumulation_quadratic(&x.k_coefficient()).map(|(hi, _)| hi)
}

#[derive(Clone, Debug, Serialize)]
pub struct Probe {
    #[serde(serialize_with = "serialize_rational")]
    pub a: Rational,
    #[serde(serialize_with = "serialize_rational")]
    pub value: Rational,
    pub witness_k: usize,
    /// Lower bound carried to `a0`: monotonicity from below, scaling from above.
    pub bound_at_a0: QuadraticSurd,
}

#[derive(Clone, Debug, Serialize)]
pub struct ObstructionReport {
    pub a0: QuadraticSurd,
    pub volume_value: QuadraticSurd,
    #[serde(serialize_with = "serialize_rational")]
    pub lower_bound: Rational,
    pub best_bound_at_a0: QuadraticSurd,
    pub probes: Vec<Probe>,
    pub gap_positive: bool,
}

/// Probes `a0` with its convergents inside `[a0 - r, a0 + r]` (and `a0`
/// itself when rational). A ratio `v` at `p <= a0` bounds `c_X(a0) >= v`;
/// at `p > a0` it bounds `c_X(a0) >= v a0 / p`. The gap is positive when
/// such a bound exceeds `sqrt(a0/vol)`.
pub fn staircase_obstruction(x: &NegativeWeightExpansion, count: usize, probe_radius: &Rational) -> Result<ObstructionReport> {
    let a0 = accumulation_point(x).ok_or_else(|| Error::InvalidInput(format!("{x} has no accumulation point")))?;
    let volume_value = volume_value_at(x, &a0);
    debug_assert_eq!(&volume_value * &volume_value, a0.mul_rational(&x.vol().recip()));
    let mut points: Vec<Rational> = match a0.to_rational() {
        Some(r) => vec![r],
        None => a0
            .convergents(60)
            .into_iter()
            .filter(|c| c.denom() <= &BigInt::from(1_000_000_000i64))
            .filter(|c| abs_le(&a0.add_rational(&-c.clone()), probe_radius))
            .collect(),
    };
    points.retain(|p| *p >= Rational::one());
    if points.is_empty() {
        return Err(Error::InvalidInput("no probe points inside the radius".into()));
    }
    let caps = ech_convex_toric(x, count)?;
    let probes: Vec<Probe> = points
        .par_iter()
        .map(|p| {
            let (value, witness_k) = ratio_sup(&caps, p)?;
            let bound_at_a0 = if a0.cmp_rational(p) == Ordering::Less {
                a0.mul_rational(&(&value / p))
            } else {
                QuadraticSurd::from_rational(&value)
            };
            Ok(Probe { a: p.clone(), value, witness_k, bound_at_a0 })
        })
        .collect::<Result<_>>()?;
    let best = probes
        .iter()
        .map(|p| p.bound_at_a0.clone())
        .reduce(|a, b| if b.cmp_surd(&a).unwrap_or(Ordering::Less) == Ordering::Greater { b } else { a })
        .expect("at least one probe");
    let gap_positive = best.cmp_surd(&volume_value)? == Ordering::Greater;
    let lower_bound = probes.iter().map(|p| p.value.clone()).max().expect("at least one probe");
    Ok(ObstructionReport { a0, volume_value, lower_bound, best_bound_at_a0: best, probes, gap_positive })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CornerType {
    Inner,
    Outer,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DetectedCorner {
    #[serde(serialize_with = "serialize_rational")]
    pub a: Rational,
    #[serde(serialize_with = "serialize_rational")]
    pub value: Rational,
    pub kind: CornerType,
}

/// Grid points where the discrete slope changes by more than `tol`. A
/// rising segment followed by a flat one is an outer corner, a flat segment
/// followed by a rising one an inner corner.
pub fn detect_corners(samples: &[FunctionSample], tol: &Rational) -> Vec<DetectedCorner> {
    let slopes: Vec<Rational> = samples.windows(2).map(|w| (&w[1].value - &w[0].value) / (&w[1].a - &w[0].a)).collect();
    let flat = |s: &Rational| s.abs() <= *tol;
    let mut out = Vec::new();
    for i in 1..slopes.len() {
        let (l, r) = (&slopes[i - 1], &slopes[i]);
        if (r - l).abs() <= *tol {
            continue;
        }
        let kind = match (flat(l), flat(r)) {
            (false, true) => CornerType::Outer,
            (true, false) => CornerType::Inner,
            _ if r < l => CornerType::Outer,
            _ => CornerType::Inner,
        };
        out.push(DetectedCorner { a: samples[i].a.clone(), value: samples[i].value.clone(), kind });
    }
    out
}

/// Solves `A c = y` exactly; `None` if inconsistent. Free variables are 0.
fn solve_exact(mut rows: Vec<Vec<Rational>>, cols: usize) -> Option<Vec<Rational>> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for v in rows[r].iter_mut() {
            *v *= &inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                let pivot = rows[r].clone();
                for (cell, p) in rows[i].iter_mut().zip(&pivot) {
                    *cell -= p * &f;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if rows[r..].iter().any(|row| !row[cols].is_zero()) {
        return None;
    }
    let mut sol = vec![Rational::zero(); cols];
    for (i, &c) in pivots.iter().enumerate() {
        sol[c] = rows[i][cols].clone();
    }
    Some(sol)
}

/// Minimal `r <= max_order` and integers `c_1..c_r` with
/// `s(n+r) = c_1 s(n+r-1) + ... + c_r s(n)` for the whole sequence, using
/// only orders with `len >= 2r + 1`.
pub fn fit_linear_recurrence(seq: &[BigInt], max_order: usize) -> Option<(usize, Vec<BigInt>)> {
    if seq.iter().all(|v| v.is_zero()) {
        return (!seq.is_empty()).then(|| (0, Vec::new()));
    }
    for r in 1..=max_order {
        if seq.len() < 2 * r + 1 {
            break;
        }
        let rows: Vec<Vec<Rational>> = (0..seq.len() - r)
            .map(|n| {
                let mut row: Vec<Rational> = (1..=r).map(|i| Rational::from_integer(seq[n + r - i].clone())).collect();
                row.push(Rational::from_integer(seq[n + r].clone()));
                row
            })
            .collect();
        if let Some(sol) = solve_exact(rows, r) {
            if sol.iter().all(|c| c.is_integer()) {
                return Some((r, sol.into_iter().map(|c| c.to_integer()).collect()));
            }
        }
    }
    None
}

/// Whether `s(n+r) = sum c_i s(n+r-i)` holds throughout.
pub fn satisfies_recurrence(seq: &[BigInt], coeffs: &[BigInt]) -> bool {
    let r = coeffs.len();
    (r..seq.len()).all(|n| seq[n] == coeffs.iter().enumerate().map(|(i, c)| c * &seq[n - 1 - i]).sum::<BigInt>())
}

/// `sqrt(a0/vol) = (per/vol) a0/(a0 + 1)`, using `(a0 + 1)^2 = (per^2/vol) a0`.
pub fn volume_value_at(x: &NegativeWeightExpansion, a0: &QuadraticSurd) -> QuadraticSurd {
    (a0 / &a0.add_rational(&Rational::one())).mul_rational(&(x.per() / x.vol()))
}

fn abs_le(v: &QuadraticSurd, r: &Rational) -> bool {
    let a = if v.signum() == Ordering::Less { v.neg() } else { v.clone() };
    a.cmp_rational(r) != Ordering::Greater
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{int, rat};
    use crate::staircases::{corners, family_by_name, staircase_graph};

    fn x(s: &str) -> NegativeWeightExpansion {
        NegativeWeightExpansion::parse(s).unwrap()
    }

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn samples() {
        let s = sample_embedding_function(&x("(3)"), &int(1), &int(2), &int(1), 200).unwrap();
        assert_eq!(s[0].value, rat(1, 3));
        assert_eq!(s[1].value, rat(2, 3));
        assert_eq!(s[1].witness_k, 2);
        assert!(sample_embedding_function(&x("(3)"), &rat(1, 2), &int(2), &int(1), 50).is_err());
    }

    #[test]
    fn accumulation_points() {
        assert_eq!(accumulation_point(&x("(3)")).unwrap(), QuadraticSurd::from_i64(7, 3, 5, 2));
        assert!(accumulation_point(&x("(3;1,1,1,1,1,1)")).is_none());
        assert_eq!(accumulation_point(&x("(3;1,1,1,1,1)")).unwrap(), QuadraticSurd::from_integer(1));
        let a = accumulation_point(&x("(4;2,1)")).unwrap();
        assert_eq!((&a + &a.recip().unwrap()).to_rational(), Some(rat(59, 11)));
        let v = volume_value_at(&x("(4;2,1)"), &a);
        assert_eq!(&v * &v, a.mul_rational(&rat(1, 11)));
    }

    #[test]
    fn obstruction_small_counts() {
        let r = staircase_obstruction(&x("(4;2,1)"), 3000, &rat(1, 10)).unwrap();
        assert!(r.gap_positive);
        let r = staircase_obstruction(&x("(3)"), 3000, &rat(1, 10)).unwrap();
        assert!(!r.gap_positive);
        let r = staircase_obstruction(&x("(4;1,1,1,1)"), 3000, &rat(1, 10)).unwrap();
        assert_eq!(r.a0, QuadraticSurd::from_integer(3));
        assert!(!r.gap_positive);
    }

    #[test]
    fn samples_below_staircase() {
        let f = family_by_name("(3)").unwrap();
        let g = staircase_graph(f);
        let s = sample_embedding_function(&x("(3)"), &int(1), &rat(68, 10), &rat(1, 20), 2000).unwrap();
        for p in &s {
            assert!(p.value <= g.value_at(&p.a).unwrap(), "a = {}", p.a);
        }
        for n in 1..=3 {
            let (_, out) = corners(f, n);
            let caps = ech_convex_toric(&x("(3)"), 2000).unwrap();
            assert_eq!(ratio_sup(&caps, &out.x).unwrap().0, out.y);
        }
    }

    #[test]
    fn corners_of_constant_and_staircase() {
        let flat: Vec<FunctionSample> = (0..10)
            .map(|i| FunctionSample { a: int(1) + rat(i, 10), value: rat(1, 2), witness_k: 1, certified: true, below_volume: false })
            .collect();
        assert!(detect_corners(&flat, &rat(1, 100)).is_empty());
        let s = sample_embedding_function(&x("(4;2,2)"), &int(2), &rat(5, 1), &rat(1, 20), 2000).unwrap();
        let cs = detect_corners(&s, &rat(1, 100));
        assert!(cs.iter().any(|c| c.a == int(3) && c.kind == CornerType::Outer), "{cs:?}");
    }

    #[test]
    fn recurrences() {
        let (r, c) = fit_linear_recurrence(&big(&[2, 1, 1, 2, 5, 13, 34, 89]), 6).unwrap();
        assert_eq!((r, c.clone()), (2, big(&[3, -1])));
        assert!(satisfies_recurrence(&big(&[2, 1, 1, 2, 5, 13, 34, 89]), &big(&[0, 7, 0, -1])));
        assert_eq!(fit_linear_recurrence(&big(&[4, 4, 4, 4]), 3), Some((1, big(&[1]))));
        let f = family_by_name("(3;1)").unwrap();
        let seq: Vec<BigInt> = (0..20).map(|n| f.g(n)).collect();
        assert_eq!(fit_linear_recurrence(&seq, 8), Some((6, big(&[0, 0, 6, 0, 0, -1]))));
        let f = family_by_name("(4;2,2)").unwrap();
        let seq: Vec<BigInt> = (0..12).map(|n| f.g(n)).collect();
        assert_eq!(fit_linear_recurrence(&seq, 5), Some((4, big(&[0, 6, 0, -1]))));
        assert_eq!(fit_linear_recurrence(&big(&[1, 2, 4, 8]), 3), Some((1, big(&[2]))));
        assert_eq!(fit_linear_recurrence(&big(&[1, 2, 4, 7, 12, 20]), 2), None);
    }
}
