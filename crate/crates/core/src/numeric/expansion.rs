use super::{format_rational, parse_rational, Rational};
use crate::error::{Error, Result};
use crate::polygon::{pt, LatticePolygon, Pt};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};
use std::fmt;

/// Negative weight expansion `(b; b_1, ..., b_n)`: a `b`-triangle with corner
/// triangles of sizes `b_i` removed.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NegativeWeightExpansion {
    b: Rational,
    parts: Vec<Rational>,
}

impl NegativeWeightExpansion {
    /// Validates positivity and `vol > 0`; parts are sorted nonincreasing.
    pub fn new(b: Rational, mut parts: Vec<Rational>) -> Result<Self> {
        if !b.is_positive() {
            return Err(Error::InvalidInput(format!("b must be positive, got {b}")));
        }
        if let Some(p) = parts.iter().find(|p| !p.is_positive()) {
            return Err(Error::InvalidInput(format!("parts must be positive, got {p}")));
        }
        parts.sort_by(|x, y| y.cmp(x));
        let x = NegativeWeightExpansion { b, parts };
        if !x.vol().is_positive() {
            return Err(Error::InvalidInput(format!("{x} has nonpositive volume")));
        }
        Ok(x)
    }

    pub fn from_ints(b: i64, parts: &[i64]) -> Result<Self> {
        Self::new(
            Rational::from_integer(b.into()),
            parts.iter().map(|&p| Rational::from_integer(p.into())).collect(),
        )
    }

    /// Parses `"4;2,1"`, `"(3;1,1)"`, `"(3)"` or `"3"`.
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim().trim_start_matches('(').trim_end_matches(')');
        let (b, rest) = match t.split_once(';') {
            Some((b, r)) => (b, r),
            None => (t, ""),
        };
        let b = parse_rational(b)?;
        let parts = rest
            .split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(parse_rational)
            .collect::<Result<Vec<_>>>()?;
        Self::new(b, parts)
    }

    pub fn b(&self) -> &Rational {
        &self.b
    }

    pub fn parts(&self) -> &[Rational] {
        &self.parts
    }

    /// `3b - sum b_i`.
    pub fn per(&self) -> Rational {
        Rational::from_integer(3.into()) * &self.b - self.parts.iter().sum::<Rational>()
    }

    /// `b^2 - sum b_i^2`.
    pub fn vol(&self) -> Rational {
        &self.b * &self.b - self.parts.iter().map(|p| p * p).sum::<Rational>()
    }

    /// `per^2/vol - 2`, the linear coefficient of the accumulation quadratic.
    pub fn k_coefficient(&self) -> Rational {
        let per = self.per();
        &per * &per / self.vol() - Rational::from_integer(2.into())
    }

    /// All entries are rational by construction.
    pub fn is_rational(&self) -> bool {
        true
    }

    pub fn is_integral(&self) -> bool {
        self.b.is_integer() && self.parts.iter().all(|p| p.is_integer())
    }

    /// `gcd(b, b_1, ..., b_n) = 1` for integral expansions.
    pub fn is_primitive(&self) -> bool {
        self.is_integral()
            && self
                .parts
                .iter()
                .fold(self.b.to_integer(), |g, p| g.gcd(&p.to_integer()))
                .is_one()
    }

    pub fn scale(&self, lambda: &Rational) -> Result<Self> {
        Self::new(&self.b * lambda, self.parts.iter().map(|p| p * lambda).collect())
    }
}

impl fmt::Display for NegativeWeightExpansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", format_rational(&self.b))?;
        if !self.parts.is_empty() {
            let ps: Vec<String> = self.parts.iter().map(format_rational).collect();
            write!(f, ";{}", ps.join(","))?;
        }
        write!(f, ")")
    }
}

impl Serialize for NegativeWeightExpansion {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Greedy corner-chopping expansion of a convex lattice polygon in axis
/// normal form: `(0,0)` is a vertex whose two edges run along the positive
/// axes and the polygon lies in the first quadrant.
pub fn negative_weight_expansion(omega: &LatticePolygon) -> Result<NegativeWeightExpansion> {
    let vs = omega.vertices();
    if vs.len() < 3 {
        return Err(Error::UnsupportedShape("polygon must be two dimensional".into()));
    }
    if vs.iter().any(|p| p.x < 0 || p.y < 0) {
        return Err(Error::UnsupportedShape("polygon leaves the first quadrant".into()));
    }
    let o = vs
        .iter()
        .position(|&p| p == pt(0, 0))
        .ok_or_else(|| Error::UnsupportedShape("origin is not a vertex".into()))?;
    let n = vs.len();
    let next = vs[(o + 1) % n];
    let prev = vs[(o + n - 1) % n];
    if !(next.y == 0 && next.x > 0 && prev.x == 0 && prev.y > 0) {
        return Err(Error::UnsupportedShape("edges at the origin must follow the axes".into()));
    }
    let b = vs.iter().map(|p| p.x + p.y).max().expect("nonempty");
    let mut current = LatticePolygon::from_vertices(&[pt(0, 0), pt(b, 0), pt(0, b)])?;
    let mut parts: Vec<i64> = Vec::new();
    let target = sorted(vs);
    while sorted(current.vertices()) != target {
        let cv = current.vertices().to_vec();
        let m = cv.len();
        let mut best: Option<(i64, usize)> = None;
        for i in 0..m {
            let v = cv[i];
            let to_next = cv[(i + 1) % m] - v;
            let to_prev = cv[(i + m - 1) % m] - v;
            let (e1, e2) = (to_next.primitive(), to_prev.primitive());
            let det = e1.cross(e2);
            // w - v = alpha e1 + beta e2
            let depth = vs
                .iter()
                .map(|&w| {
                    let d = w - v;
                    Rational::new(BigInt::from(d.cross(e2) + e1.cross(d)), BigInt::from(det))
                })
                .min()
                .expect("nonempty");
            if depth.is_zero() {
                continue;
            }
            if det != 1 {
                return Err(Error::UnsupportedShape(format!("chop needed at non-smooth corner {v}")));
            }
            let s = depth
                .to_integer()
                .min(BigInt::from(to_next.lattice_len()))
                .min(BigInt::from(to_prev.lattice_len()));
            let s: i64 = s.try_into().map_err(|_| Error::Overflow("corner chop"))?;
            if best.map_or(true, |(bs, _)| s > bs) {
                best = Some((s, i));
            }
        }
        let (s, i) = best.ok_or_else(|| Error::UnsupportedShape("no corner can be chopped".into()))?;
        let v = cv[i];
        let e1 = (cv[(i + 1) % m] - v).primitive();
        let e2 = (cv[(i + m - 1) % m] - v).primitive();
        let mut pts: Vec<Pt> = cv.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &p)| p).collect();
        pts.push(v + e1.scale(s));
        pts.push(v + e2.scale(s));
        current = LatticePolygon::hull(&pts)?;
        parts.push(s);
        if parts.len() > 64 {
            return Err(Error::UnsupportedShape("corner chopping does not terminate".into()));
        }
    }
    NegativeWeightExpansion::from_ints(b, &parts)
}

fn sorted(v: &[Pt]) -> Vec<Pt> {
    let mut s = v.to_vec();
    s.sort();
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{int, rat};
    use crate::polygon::{fano_domains, other_reflexive_polygons, parse_polygon};

    fn nwe(s: &str) -> NegativeWeightExpansion {
        NegativeWeightExpansion::parse(s).unwrap()
    }

    #[test]
    fn per_and_vol() {
        let x = nwe("4;2,1");
        assert_eq!(x.per(), int(9));
        assert_eq!(x.vol(), int(11));
        assert_eq!(x.k_coefficient(), rat(59, 11));
        assert_eq!(nwe("(3)").k_coefficient(), int(7));
        assert_eq!(nwe("(3;1,1,1,1,1)").k_coefficient(), int(2));
        assert_eq!(x.to_string(), "(4;2,1)");
        assert!(NegativeWeightExpansion::parse("2;2").is_err());
        assert!(NegativeWeightExpansion::parse("3;-1").is_err());
        assert_eq!(nwe("3;1/2,1").parts(), &[int(1), rat(1, 2)]);
    }

    #[test]
    fn greedy_examples() {
        let cases = [
            ("(0,0),(3,0),(0,3)", "(3)"),
            ("(0,0),(2,0),(2,2),(0,2)", "(4;2,2)"),
            ("(0,0),(2,0),(2,1),(0,3)", "(3;1)"),
            ("(0,0),(4,0),(0,3)", "(4;1,1,1,1)"),
            ("(0,0),(3,0),(3,1),(2,2),(0,2)", "(4;2,1)"),
            ("(0,0),(1,0),(2,1),(2,2),(1,2),(0,1)", "(4;2,2,1,1)"),
            ("(0,0),(1,0),(2,2),(0,1)", "(4;2,2,1,1,1,1)"),
            ("(0,0),(3,0),(0,2)", "(3;1,1,1)"),
        ];
        for (p, want) in cases {
            let got = negative_weight_expansion(&parse_polygon(p).unwrap()).unwrap();
            assert_eq!(got.to_string(), want, "{p}");
        }
    }

    #[test]
    fn fano_domains_match_per_and_vol() {
        for (label, p) in fano_domains() {
            let x = negative_weight_expansion(&p).unwrap();
            let y = nwe(label);
            assert_eq!((x.per(), x.vol()), (y.per(), y.vol()), "{label} {p}");
        }
        let (_, p) = &other_reflexive_polygons()[1];
        assert_eq!(negative_weight_expansion(p).unwrap().vol(), int(4));
    }

    #[test]
    fn rejects_unsupported_shapes() {
        let (_, tri) = &other_reflexive_polygons()[0];
        assert!(matches!(negative_weight_expansion(tri), Err(Error::UnsupportedShape(_))));
        let shifted = parse_polygon("(1,0),(3,0),(1,2)").unwrap();
        assert!(negative_weight_expansion(&shifted).is_err());
    }
}
