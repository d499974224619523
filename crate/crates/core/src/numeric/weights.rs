use super::{RatStr, Rational};
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

/// Weight expansion `(a_1, ..., a_n)` of a rational `a >= 1`: the side lengths
/// of the squares obtained by greedily cutting the `1 x a` rectangle.
///
/// Stored run-length encoded as `(weight, multiplicity)` blocks in
/// nonincreasing order; the blocks are exactly the continued-fraction digits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightExpansion {
    blocks: Vec<(Rational, u64)>,
}

impl Serialize for WeightExpansion {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.blocks.iter().map(|(w, m)| (RatStr(w), *m)))
    }
}

impl WeightExpansion {
    /// Builds an expansion from explicit weights (used by test harnesses to
    /// feed tampered expansions to the identity check).
    pub fn from_weights(weights: &[Rational]) -> Self {
        let mut blocks: Vec<(Rational, u64)> = Vec::new();
        for w in weights {
            match blocks.last_mut() {
                Some((v, m)) if v == w => *m += 1,
                _ => blocks.push((w.clone(), 1)),
            }
        }
        WeightExpansion { blocks }
    }

    pub fn blocks(&self) -> &[(Rational, u64)] {
        &self.blocks
    }

    /// Number of weights `l(a)`.
    pub fn len(&self) -> u64 {
        self.blocks.iter().map(|(_, m)| m).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// The `i`-th weight (zero past the end).
    pub fn weight(&self, mut i: u64) -> Rational {
        for (w, m) in &self.blocks {
            if i < *m {
                return w.clone();
            }
            i -= m;
        }
        Rational::zero()
    }

    /// Expanded weight list. Large partial quotients make this long; prefer
    /// [`WeightExpansion::blocks`] for arithmetic.
    pub fn weights(&self) -> Vec<Rational> {
        self.blocks
            .iter()
            .flat_map(|(w, m)| std::iter::repeat(w.clone()).take(*m as usize))
            .collect()
    }

    pub fn last(&self) -> Option<&Rational> {
        self.blocks.last().map(|(w, _)| w)
    }

    pub fn sum(&self) -> Rational {
        self.blocks.iter().map(|(w, m)| w * Rational::from_integer(BigInt::from(*m))).sum()
    }

    pub fn sum_of_squares(&self) -> Rational {
        self.blocks.iter().map(|(w, m)| w * w * Rational::from_integer(BigInt::from(*m))).sum()
    }

    /// `sum_j m_j a_j` for a nonincreasing integer vector `m` (padded with zeros).
    pub fn dot(&self, m: &[u64]) -> Rational {
        let mut acc = Rational::zero();
        let mut idx = 0usize;
        'outer: for (w, mult) in &self.blocks {
            for _ in 0..*mult {
                if idx >= m.len() {
                    break 'outer;
                }
                acc += w * Rational::from_integer(BigInt::from(m[idx]));
                idx += 1;
            }
        }
        acc
    }
}

/// Weight expansion of a rational `a >= 1`.
pub fn weight_expansion(a: &Rational) -> Result<WeightExpansion> {
    if a < &Rational::one() {
        return Err(Error::InvalidInput(format!("weight expansion needs a >= 1, got {a}")));
    }
    let mut blocks = Vec::new();
    let (mut big, mut small) = (a.clone(), Rational::one());
    loop {
        let n = (&big / &small).floor();
        let count = n.to_integer().to_u64().ok_or(Error::Overflow("weight expansion"))?;
        blocks.push((small.clone(), count));
        let rem = &big - &small * &n;
        if rem.is_zero() {
            break;
        }
        big = std::mem::replace(&mut small, rem);
    }
    Ok(WeightExpansion { blocks })
}

/// `l(a)`: number of weights of `a`.
pub fn weight_expansion_length(a: &Rational) -> Result<u64> {
    Ok(weight_expansion(a)?.len())
}

/// The three identities satisfied by the weight expansion of `a = p/q`:
/// last weight `1/q`, sum of squares `a`, and sum `a + 1 - 1/q`.
pub fn identities_hold(a: &Rational, w: &WeightExpansion) -> bool {
    let inv_q = Rational::new(BigInt::one(), a.denom().clone());
    let last_ok = w.last() == Some(&inv_q);
    let sq_ok = &w.sum_of_squares() == a;
    let sum_ok = w.sum() == a + Rational::one() - &inv_q;
    last_ok && sq_ok && sum_ok && !a.is_negative()
}

/// Computes the expansion of `a` and checks the three identities.
pub fn check_weight_identities(a: &Rational) -> bool {
    match weight_expansion(a) {
        Ok(w) => identities_hold(a, &w),
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{int, rat};
    use proptest::prelude::*;

    #[test]
    fn small_examples() {
        assert_eq!(weight_expansion(&int(1)).unwrap().weights(), vec![int(1)]);
        assert_eq!(weight_expansion(&int(2)).unwrap().weights(), vec![int(1), int(1)]);
        assert_eq!(
            weight_expansion(&rat(5, 2)).unwrap().weights(),
            vec![int(1), int(1), rat(1, 2), rat(1, 2)]
        );
        assert_eq!(weight_expansion(&rat(25, 4)).unwrap().len(), 10);
        assert!(weight_expansion(&rat(1, 2)).is_err());
    }

    #[test]
    fn identity_check_and_negative_control() {
        assert!(check_weight_identities(&int(2)));
        assert!(check_weight_identities(&int(1)));
        let a = rat(7, 3);
        let mut ws = weight_expansion(&a).unwrap().weights();
        assert!(identities_hold(&a, &WeightExpansion::from_weights(&ws)));
        ws[0] = rat(9, 10);
        assert!(!identities_hold(&a, &WeightExpansion::from_weights(&ws)));
    }

    #[test]
    fn dot_product_pads_with_zeros() {
        let w = weight_expansion(&rat(5, 2)).unwrap();
        assert_eq!(w.dot(&[1, 1]), int(2));
        assert_eq!(w.dot(&[1, 1, 1, 1, 1, 1]), int(3));
        assert_eq!(w.weight(3), rat(1, 2));
        assert_eq!(w.weight(7), int(0));
    }

    proptest! {
        #[test]
        fn identities_for_random_rationals(q in 1i64..=40, x in 0i64..=49 * 40) {
            let a = int(1) + rat(x, q);
            prop_assert!(check_weight_identities(&a));
        }
    }
}
