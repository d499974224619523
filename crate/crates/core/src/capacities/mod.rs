//! ECH capacity sequences of balls, ellipsoids and convex toric domains.

mod cache;

pub use cache::CapacityCache;

use crate::error::{Error, Result};
use crate::numeric::{common_denominator, NegativeWeightExpansion, RatStr, Rational};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};
use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use std::cmp::Reverse;
use std::collections::BinaryHeap;

/// A nondecreasing truncated sequence `c_0 = 0 <= c_1 <= ...` of exact
/// rationals, stored as `i128` numerators over one positive denominator.
///
/// Entries with index `< certified_len` are exact; later entries are upper
/// bounds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CapacitySequence {
    numers: Vec<i128>,
    denom: i128,
    certified_len: usize,
}

impl CapacitySequence {
    /// Checks the invariants: `values[0] = 0`, nondecreasing,
    /// `certified_len <= len`.
    pub fn from_parts(numers: Vec<i128>, denom: i128, certified_len: usize) -> Result<Self> {
        if denom <= 0 {
            return Err(Error::InvalidInput("denominator must be positive".into()));
        }
        if numers.first() != Some(&0) {
            return Err(Error::InvalidInput("capacity sequences start at 0".into()));
        }
        if let Some(i) = (1..numers.len()).find(|&i| numers[i] < numers[i - 1]) {
            return Err(Error::InvalidInput(format!("sequence decreases at index {i}")));
        }
        if certified_len > numers.len() {
            return Err(Error::InvalidInput("certified length exceeds length".into()));
        }
        let g = numers.iter().fold(denom, |g, &n| g.gcd(&n));
        let (numers, denom) = if g > 1 { (numers.iter().map(|n| n / g).collect(), denom / g) } else { (numers, denom) };
        Ok(CapacitySequence { numers, denom, certified_len })
    }

    pub fn from_rationals(values: &[Rational], certified_len: usize) -> Result<Self> {
        let d = common_denominator(values);
        let d128 = to_i128(&d)?;
        let numers = values.iter().map(|v| scaled_numer(v, d128)).collect::<Result<Vec<_>>>()?;
        Self::from_parts(numers, d128, certified_len)
    }

    pub fn len(&self) -> usize {
        self.numers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.numers.is_empty()
    }

    pub fn certified_len(&self) -> usize {
        self.certified_len
    }

    pub fn is_certified(&self, k: usize) -> bool {
        k < self.certified_len
    }

    pub fn denom(&self) -> i128 {
        self.denom
    }

    pub fn numers(&self) -> &[i128] {
        &self.numers
    }

    pub fn numer(&self, k: usize) -> i128 {
        self.numers[k]
    }

    pub fn value(&self, k: usize) -> Rational {
        Rational::new(BigInt::from(self.numers[k]), BigInt::from(self.denom))
    }

    pub fn values(&self) -> Vec<Rational> {
        (0..self.len()).map(|k| self.value(k)).collect()
    }

    /// The first `len` terms.
    pub fn truncate(&self, len: usize) -> Self {
        let len = len.min(self.len());
        CapacitySequence {
            numers: self.numers[..len].to_vec(),
            denom: self.denom,
            certified_len: self.certified_len.min(len),
        }
    }

    /// Multiplies every term by a positive rational.
    pub fn scale(&self, lambda: &Rational) -> Result<Self> {
        if !lambda.is_positive() {
            return Err(Error::InvalidInput("scale factor must be positive".into()));
        }
        let num = to_i128(lambda.numer())?;
        let den = to_i128(lambda.denom())?;
        let numers = self
            .numers
            .iter()
            .map(|&n| n.checked_mul(num).ok_or(Error::Overflow("capacity scaling")))
            .collect::<Result<Vec<_>>>()?;
        let denom = self.denom.checked_mul(den).ok_or(Error::Overflow("capacity scaling"))?;
        Self::from_parts(numers, denom, self.certified_len)
    }

    /// Number of terms `<= t`, or `None` if every computed term is `<= t`
    /// (the count could then be larger than the prefix shows).
    pub fn count_at_most(&self, t: &Rational) -> Option<usize> {
        let bound = floor_i128(&(t * Rational::from_integer(self.denom.into())))?;
        let n = self.numers.partition_point(|&v| v <= bound);
        (n < self.len()).then_some(n)
    }

    fn with_denom(&self, d: i128) -> Result<Vec<i128>> {
        let f = d / self.denom;
        self.numers
            .iter()
            .map(|&n| n.checked_mul(f).ok_or(Error::Overflow("common denominator")))
            .collect()
    }

    /// For each index, the last index of its run of equal values.
    fn run_ends(&self) -> Vec<u32> {
        let n = self.len();
        let mut ends = vec![0u32; n];
        let mut end = n.saturating_sub(1);
        for i in (0..n).rev() {
            if i + 1 < n && self.numers[i] != self.numers[i + 1] {
                end = i;
            }
            ends[i] = end as u32;
        }
        ends
    }

    /// Indices where a new run of equal values begins.
    fn run_starts(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| i == 0 || self.numers[i] != self.numers[i - 1]).collect()
    }
}

impl Serialize for CapacitySequence {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let vals = self.values();
        let mut st = s.serialize_struct("CapacitySequence", 2)?;
        st.serialize_field("certified_len", &self.certified_len)?;
        st.serialize_field("values", &vals.iter().map(RatStr).collect::<Vec<_>>())?;
        st.end()
    }
}

fn to_i128(n: &BigInt) -> Result<i128> {
    n.to_i128().ok_or(Error::Overflow("value does not fit in i128"))
}

fn floor_i128(r: &Rational) -> Option<i128> {
    r.numer().div_floor(r.denom()).to_i128()
}

/// `v * d` as an integer; errors if `d` is not a multiple of the denominator.
fn scaled_numer(v: &Rational, d: i128) -> Result<i128> {
    let s = v * Rational::from_integer(d.into());
    if !s.is_integer() {
        return Err(Error::InvalidInput(format!("{v} is not a multiple of 1/{d}")));
    }
    to_i128(&s.to_integer())
}

fn lcm_i128(a: i128, b: i128) -> Result<i128> {
    (a / a.gcd(&b)).checked_mul(b).ok_or(Error::Overflow("common denominator"))
}

/// The first `len` ECH capacities of the ball `B(b)`: the value `b*d`
/// repeated `d+1` times for `d = 0, 1, ...`.
pub fn ball(b: &Rational, len: usize) -> Result<CapacitySequence> {
    if !b.is_positive() {
        return Err(Error::InvalidInput(format!("ball size must be positive, got {b}")));
    }
    let step = to_i128(b.numer())?;
    let denom = to_i128(b.denom())?;
    let mut numers = Vec::with_capacity(len.max(1));
    let mut d: i128 = 0;
    'fill: loop {
        for _ in 0..=d {
            if numers.len() >= len.max(1) {
                break 'fill;
            }
            numers.push(step * d);
        }
        d += 1;
    }
    CapacitySequence::from_parts(numers, denom, len.max(1))
}

/// Integer steps `(lo, hi)` with `lo <= hi` over the common denominator of `a, b`.
fn ellipsoid_steps(a: &Rational, b: &Rational) -> Result<(i128, i128, i128)> {
    if !a.is_positive() || !b.is_positive() {
        return Err(Error::InvalidInput(format!("ellipsoid parameters must be positive, got ({a}, {b})")));
    }
    let d = to_i128(&a.denom().lcm(b.denom()))?;
    let (x, y) = (scaled_numer(a, d)?, scaled_numer(b, d)?);
    Ok((x.min(y), x.max(y), d))
}

/// Merges the rows `r*hi + c*lo` (`0 <= r <= max_row`, `0 <= c <= max_col`)
/// and returns the smallest `len` values. Rows enter the heap lazily.
fn merge_rows(lo: i128, hi: i128, max_row: u64, max_col: u64, len: usize) -> Vec<i128> {
    let mut out = Vec::with_capacity(len);
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((0i128, 0u64, 0u64)));
    while out.len() < len {
        let Some(Reverse((v, r, c))) = heap.pop() else { break };
        out.push(v);
        if c == 0 && r < max_row {
            heap.push(Reverse((v + hi, r + 1, 0)));
        }
        if c < max_col {
            heap.push(Reverse((v + lo, r, c + 1)));
        }
    }
    out
}

/// The sorted multiset `{m a + n b : 0 <= m, n <= grid}` truncated to
/// `floor((grid+1) floor(1 + grid a/b) / 2) - 1` terms (with `a <= b`), and
/// never past the last value below `(grid+1) a`, so every term is exact.
pub fn ech_ellipsoid(a: &Rational, b: &Rational, grid: u64) -> Result<CapacitySequence> {
    let (lo, hi, d) = ellipsoid_steps(a, b)?;
    let g = grid as i128;
    let rows_in_reach = (1 + g * lo / hi) as u128;
    let l = ((grid as u128 + 1) * rows_in_reach / 2) as i128 - 1;
    let complete = count_below_steps(lo, hi, (g + 1) * lo);
    let len = (l.min(complete as i128)).max(1) as usize;
    let numers = merge_rows(lo, hi, grid, grid, len);
    CapacitySequence::from_parts(numers, d, len)
}

/// The first `len` terms of the full (untruncated) sequence `N(a, b)`.
pub fn ellipsoid_prefix(a: &Rational, b: &Rational, len: usize) -> Result<CapacitySequence> {
    let (lo, hi, d) = ellipsoid_steps(a, b)?;
    let numers = merge_rows(lo, hi, u64::MAX, u64::MAX, len.max(1));
    CapacitySequence::from_parts(numers, d, len.max(1))
}

fn count_below_steps(lo: i128, hi: i128, t: i128) -> u128 {
    let mut total = 0u128;
    let mut r = 0i128;
    while r * hi < t {
        total += ((t - r * hi - 1) / lo + 1) as u128;
        r += 1;
    }
    total
}

/// `#{(m, n) in N^2 : m a + n b < t}` for positive integers, in `O(t / max(a, b))`.
pub fn ellipsoid_count_below(a: u64, b: u64, t: u64) -> u64 {
    if t == 0 {
        return 0;
    }
    count_below_steps(a.min(b) as i128, a.max(b) as i128, t as i128) as u64
}

/// Sequence sum `(S # T)_k = max_{m+n=k} (S_m + T_n)`.
///
/// Only `m` at the start of a run of `S` (or `n` at the start of a run of
/// `T`) can be optimal, so the scan visits run starts of whichever sequence
/// has fewer of them.
pub fn seq_sum(s: &CapacitySequence, t: &CapacitySequence) -> Result<CapacitySequence> {
    let d = lcm_i128(s.denom, t.denom)?;
    let (sv, tv) = (s.with_denom(d)?, t.with_denom(d)?);
    let (ss, ts) = (s.run_starts(), t.run_starts());
    let (runs, a, b) = if ss.len() <= ts.len() { (ss, &sv, &tv) } else { (ts, &tv, &sv) };
    let len = s.len().min(t.len());
    let numers: Vec<i128> = (0..len)
        .into_par_iter()
        .map(|k| {
            runs.iter()
                .take_while(|&&m| m <= k)
                .map(|&m| a[m] + b[k - m])
                .max()
                .expect("index 0 starts a run")
        })
        .collect();
    let cert = s.certified_len.min(t.certified_len).min(len);
    CapacitySequence::from_parts(numers, d, cert)
}

/// Scans `min_{lo <= m <= hi} (S_{k+m} - T_m)`, visiting only the ends of
/// runs of `S` and the right endpoint. Returns `(value, argmin)`.
fn window_min(sv: &[i128], tv: &[i128], ends: &[u32], k: usize, lo: usize, hi: usize) -> (i128, usize) {
    let mut best = (i128::MAX, lo);
    let mut m = lo;
    loop {
        let e = ends[k + m] as usize - k;
        let mm = e.min(hi);
        let v = sv[k + mm] - tv[mm];
        if v < best.0 {
            best = (v, mm);
        }
        if mm >= hi {
            return best;
        }
        m = mm + 1;
    }
}

/// Sequence subtraction `(S - T)_k = min_{0 <= m <= window} (S_{k+m} - T_m)`.
///
/// An index is certified when its minimizer satisfies `m* <= window/2` and
/// the minima over four consecutive blocks covering the last fifth of the
/// window are nondecreasing; the certified prefix ends at the first index
/// failing the test (or at the certified prefixes of the inputs).
pub fn seq_sub(s: &CapacitySequence, t: &CapacitySequence, window: usize) -> Result<CapacitySequence> {
    if t.len() <= window || s.len() <= window {
        return Err(Error::InsufficientLength { needed: window + 1, available: s.len().min(t.len()) });
    }
    let d = lcm_i128(s.denom, t.denom)?;
    let (sv, tv) = (s.with_denom(d)?, t.with_denom(d)?);
    let ends = s.run_ends();
    let len = s.len() - window;
    let tail_start = window - window / 5;
    let block = ((window - tail_start) / 4).max(1);
    let rows: Vec<(i128, bool)> = (0..len)
        .into_par_iter()
        .map(|k| {
            let (v, arg) = window_min(&sv, &tv, &ends, k, 0, window);
            let mut ok = arg <= window / 2;
            let mut prev = i128::MIN;
            let mut lo = tail_start;
            while ok && lo <= window {
                let hi = (lo + block - 1).min(window);
                let (bm, _) = window_min(&sv, &tv, &ends, k, lo, hi);
                ok = bm >= prev;
                prev = bm;
                lo = hi + 1;
            }
            let inputs_exact = k + window < s.certified_len && window < t.certified_len;
            (v, ok && inputs_exact)
        })
        .collect();
    let cert = rows.iter().position(|&(_, ok)| !ok).unwrap_or(len);
    let numers = rows.into_iter().map(|(v, _)| v).collect();
    CapacitySequence::from_parts(numers, d, cert)
}

/// Sum of the ball sequences `c(B(b_1)) # ... # c(B(b_n))`, `len` terms.
/// No parts gives the zero sequence, which leaves `seq_sub` unchanged.
pub fn ball_sum(parts: &[Rational], len: usize) -> Result<CapacitySequence> {
    let Some((first, rest)) = parts.split_first() else {
        return CapacitySequence::from_parts(vec![0; len], 1, len);
    };
    let mut acc = ball(first, len)?;
    for p in rest {
        acc = seq_sum(&acc, &ball(p, len)?)?;
    }
    Ok(acc)
}

/// `B sqrt(p) >= r + sqrt(q)` exactly, for `B > 0`, `p, q >= 0`.
/// Conservative (may return false) when `r < 0`.
fn tail_bound_holds(b: &Rational, p: &Rational, r: &Rational, q: &Rational) -> bool {
    let lhs = b * b * p;
    if r.is_negative() {
        return lhs >= *q;
    }
    let rest = &lhs - r * r - q;
    if rest.is_negative() {
        return false;
    }
    &rest * &rest >= Rational::from_integer(4.into()) * r * r * q
}

const MAX_WINDOW_DOUBLINGS: u32 = 6;

/// ECH capacities `c(B(b)) - #_i c(B(b_i))` of the convex toric domain with
/// the given negative weight expansion, certified through index `count - 1`.
///
/// Certification is rigorous: with `Sigma = sum b_i^2`, the subtracted sum
/// satisfies `T_m <= sqrt(2 m Sigma)` and the ball satisfies
/// `S_j >= b (sqrt(2j+2) - 2)`. For `m > window >= Sigma (k+1)/vol` the
/// resulting lower bound on `S_{k+m} - T_m` increases in `m`, so the minimum
/// over the window is the true minimum once it sits below that bound at
/// `m = window + 1`. The window doubles until every index is certified.
pub fn ech_convex_toric(x: &NegativeWeightExpansion, count: usize) -> Result<CapacitySequence> {
    let count = count.max(1);
    let b = x.b();
    if x.parts().is_empty() {
        return ball(b, count);
    }
    let sigma: Rational = x.parts().iter().map(|p| p * p).sum();
    let vol = x.vol();
    let min_window = (&sigma * Rational::from_integer(BigInt::from(count)) / &vol).ceil().to_integer();
    let mut window = min_window.to_usize().ok_or(Error::Overflow("subtraction window"))? + 16;
    let mut achieved = 0;
    for _ in 0..=MAX_WINDOW_DOUBLINGS {
        let s = ball(b, count + window + 1)?;
        let t = ball_sum(x.parts(), window + 1)?;
        let d = lcm_i128(s.denom, t.denom)?;
        let (sv, tv) = (s.with_denom(d)?, t.with_denom(d)?);
        let ends = s.run_ends();
        let mins: Vec<i128> = (0..count)
            .into_par_iter()
            .map(|k| window_min(&sv, &tv, &ends, k, 0, window).0)
            .collect();
        let two = Rational::from_integer(2.into());
        let w1 = Rational::from_integer(BigInt::from(window + 1));
        let q = &two * &w1 * &sigma;
        let (bf, qf) = (crate::numeric::to_f64(b), crate::numeric::to_f64(&q));
        let first_bad = (0..count).into_par_iter().find_first(|&k| {
            let pf = 2.0 * (k + window + 1) as f64 + 2.0;
            let rf = mins[k] as f64 / d as f64 + 2.0 * bf;
            let margin = bf * pf.sqrt() - rf - qf.sqrt();
            if margin.abs() > 1e-6 * (1.0 + rf.abs()) {
                return margin < 0.0;
            }
            let p = &two * (Rational::from_integer(BigInt::from(k)) + &w1) + &two;
            let r = Rational::new(mins[k].into(), d.into()) + &two * b;
            !tail_bound_holds(b, &p, &r, &q)
        });
        match first_bad {
            None => return CapacitySequence::from_parts(mins, d, count),
            Some(k) => achieved = achieved.max(k),
        }
        window *= 2;
    }
    Err(Error::CertificationShortfall { requested: count, achieved })
}

/// Number of capacities `c_k(X) <= t`, from the first `count` capacities.
/// Fails unless the certified prefix reaches a term above `t`.
pub fn cap_function(x: &NegativeWeightExpansion, t: &Rational, count: usize) -> Result<u64> {
    let seq = ech_convex_toric(x, count)?;
    cap_from_sequence(&seq, t)
}

/// [`cap_function`] on a precomputed sequence.
pub fn cap_from_sequence(seq: &CapacitySequence, t: &Rational) -> Result<u64> {
    let exact = seq.truncate(seq.certified_len());
    exact
        .count_at_most(t)
        .map(|n| n as u64)
        .ok_or(Error::InsufficientLength { needed: exact.len() + 1, available: exact.len() })
}

/// [`cap_function`] with the prefix length chosen from the volume estimate
/// `t^2/(2 vol) + per t/(2 vol)` and grown until it suffices.
pub fn cap_function_auto(x: &NegativeWeightExpansion, t: &Rational) -> Result<u64> {
    let est = (t * t + x.per() * t) / (Rational::from_integer(2.into()) * x.vol());
    let mut count = est.ceil().to_integer().to_usize().unwrap_or(usize::MAX / 4) + 32;
    loop {
        match cap_function(x, t, count) {
            Err(Error::InsufficientLength { .. }) => count = count * 3 / 2,
            other => return other,
        }
    }
}
