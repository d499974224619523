//! Convex lattice polygons: lattice point counts, normal forms and the
//! reflexive catalogue.

use crate::error::{Error, Result};
use num_integer::Integer;
use serde::Serialize;
use std::fmt;

/// Integer point or vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Pt {
    pub x: i64,
    pub y: i64,
}

pub const fn pt(x: i64, y: i64) -> Pt {
    Pt { x, y }
}

impl Pt {
    pub fn cross(self, o: Pt) -> i64 {
        self.x * o.y - self.y * o.x
    }
    pub fn dot(self, o: Pt) -> i64 {
        self.x * o.x + self.y * o.y
    }
    /// Lattice length: number of lattice steps along the vector.
    pub fn lattice_len(self) -> i64 {
        self.x.abs().gcd(&self.y.abs())
    }
    pub fn primitive(self) -> Pt {
        let g = self.lattice_len();
        if g == 0 {
            self
        } else {
            pt(self.x / g, self.y / g)
        }
    }
    pub fn scale(self, k: i64) -> Pt {
        pt(self.x * k, self.y * k)
    }
}

impl std::ops::Add for Pt {
    type Output = Pt;
    fn add(self, o: Pt) -> Pt {
        pt(self.x + o.x, self.y + o.y)
    }
}
impl std::ops::Sub for Pt {
    type Output = Pt;
    fn sub(self, o: Pt) -> Pt {
        pt(self.x - o.x, self.y - o.y)
    }
}
impl std::ops::Neg for Pt {
    type Output = Pt;
    fn neg(self) -> Pt {
        pt(-self.x, -self.y)
    }
}
impl fmt::Display for Pt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// A 2x2 integer matrix acting on column vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Mat2(pub [[i64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[1, 0], [0, 1]]);
    pub fn apply(&self, p: Pt) -> Pt {
        pt(self.0[0][0] * p.x + self.0[0][1] * p.y, self.0[1][0] * p.x + self.0[1][1] * p.y)
    }
    pub fn det(&self) -> i64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }
    pub fn mul(&self, o: &Mat2) -> Mat2 {
        let a = &self.0;
        let b = &o.0;
        Mat2([
            [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
            [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
        ])
    }
}

/// Unimodular matrix sending the primitive vector `u` to `(1, 0)`.
pub fn unimodular_to_x_axis(u: Pt) -> Mat2 {
    let g = u.x.extended_gcd(&u.y);
    debug_assert_eq!(g.gcd.abs(), 1, "vector must be primitive");
    // a*s + b*t = g with g = +-1; rows (s, t)/g and (-b, a) give det 1
    let (s, t) = if g.gcd == 1 { (g.x, g.y) } else { (-g.x, -g.y) };
    Mat2([[s, t], [-u.y, u.x]])
}

/// Convex lattice polygon stored counterclockwise without redundant
/// (collinear) vertices. Points and segments are allowed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct LatticePolygon {
    vertices: Vec<Pt>,
}

impl LatticePolygon {
    /// Convex hull of the given points.
    pub fn hull(points: &[Pt]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("empty point set".into()));
        }
        let mut p: Vec<Pt> = points.to_vec();
        p.sort();
        p.dedup();
        if p.len() <= 2 {
            return Ok(LatticePolygon { vertices: p });
        }
        // Andrew's monotone chain, dropping collinear points
        let mut lower: Vec<Pt> = Vec::new();
        for &q in &p {
            while lower.len() >= 2 && (lower[lower.len() - 1] - lower[lower.len() - 2]).cross(q - lower[lower.len() - 1]) <= 0 {
                lower.pop();
            }
            lower.push(q);
        }
        let mut upper: Vec<Pt> = Vec::new();
        for &q in p.iter().rev() {
            while upper.len() >= 2 && (upper[upper.len() - 1] - upper[upper.len() - 2]).cross(q - upper[upper.len() - 1]) <= 0 {
                upper.pop();
            }
            upper.push(q);
        }
        lower.pop();
        upper.pop();
        lower.extend(upper);
        Ok(LatticePolygon { vertices: lower })
    }

    /// Polygon from a vertex cycle in either orientation. Collinear and
    /// repeated vertices are dropped; a nonconvex cycle is rejected.
    pub fn from_vertices(vs: &[Pt]) -> Result<Self> {
        let hull = Self::hull(vs)?;
        // every input vertex must lie on the hull boundary in cyclic order
        let mut cyc: Vec<Pt> = Vec::new();
        for &v in vs {
            if cyc.last() != Some(&v) {
                cyc.push(v);
            }
        }
        while cyc.len() > 1 && cyc.first() == cyc.last() {
            cyc.pop();
        }
        if cyc.len() >= 3 {
            let n = cyc.len();
            let mut sign = 0i64;
            for i in 0..n {
                let a = cyc[i];
                let b = cyc[(i + 1) % n];
                let c = cyc[(i + 2) % n];
                let cr = (b - a).cross(c - b);
                if cr != 0 {
                    if sign == 0 {
                        sign = cr.signum();
                    } else if sign != cr.signum() {
                        return Err(Error::InvalidInput(format!("vertex cycle is not convex at {b}")));
                    }
                } else if (b - a).dot(c - b) < 0 {
                    return Err(Error::InvalidInput(format!("vertex cycle folds back at {b}")));
                }
            }
            if hull.vertices.len() >= 3 && cyc.iter().any(|v| !hull.on_boundary(*v)) {
                return Err(Error::InvalidInput("vertex cycle is not convex".into()));
            }
            // a convex cycle winds exactly once
            let turn: i64 = hull.area2();
            let cyc_area: i64 = (0..n).map(|i| cyc[i].cross(cyc[(i + 1) % n])).sum();
            if cyc_area.abs() != turn {
                return Err(Error::InvalidInput("vertex cycle is not simple".into()));
            }
        }
        Ok(hull)
    }

    pub fn vertices(&self) -> &[Pt] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Edge vectors in counterclockwise order (a segment yields two opposite edges).
    pub fn edges(&self) -> Vec<Pt> {
        let n = self.vertices.len();
        if n < 2 {
            return Vec::new();
        }
        (0..n).map(|i| self.vertices[(i + 1) % n] - self.vertices[i]).collect()
    }

    /// Twice the area.
    pub fn area2(&self) -> i64 {
        let n = self.vertices.len();
        if n < 3 {
            return 0;
        }
        (0..n).map(|i| self.vertices[i].cross(self.vertices[(i + 1) % n])).sum()
    }

    /// Lattice points on the boundary.
    pub fn boundary_points(&self) -> i64 {
        match self.vertices.len() {
            0 => 0,
            1 => 1,
            2 => (self.vertices[1] - self.vertices[0]).lattice_len() + 1,
            _ => self.edges().iter().map(|e| e.lattice_len()).sum(),
        }
    }

    /// Interior lattice points (Pick's theorem).
    pub fn interior_points(&self) -> i64 {
        if self.vertices.len() < 3 {
            return 0;
        }
        (self.area2() - self.boundary_points() + 2) / 2
    }

    /// All lattice points, boundary included (Pick's theorem).
    pub fn lattice_points(&self) -> i64 {
        if self.vertices.len() < 3 {
            return self.boundary_points();
        }
        (self.area2() + self.boundary_points()) / 2 + 1
    }

    /// Lattice points by direct enumeration over the bounding box.
    pub fn lattice_points_enumerated(&self) -> i64 {
        let (lo, hi) = self.bounding_box();
        let mut count = 0;
        for x in lo.x..=hi.x {
            for y in lo.y..=hi.y {
                if self.contains(pt(x, y)) {
                    count += 1;
                }
            }
        }
        count
    }

    pub fn bounding_box(&self) -> (Pt, Pt) {
        let xs = self.vertices.iter().map(|p| p.x);
        let ys = self.vertices.iter().map(|p| p.y);
        (
            pt(xs.clone().min().unwrap_or(0), ys.clone().min().unwrap_or(0)),
            pt(xs.max().unwrap_or(0), ys.max().unwrap_or(0)),
        )
    }

    /// Closed containment test.
    pub fn contains(&self, q: Pt) -> bool {
        match self.vertices.len() {
            0 => false,
            1 => self.vertices[0] == q,
            2 => on_segment(self.vertices[0], self.vertices[1], q),
            n => (0..n).all(|i| (self.vertices[(i + 1) % n] - self.vertices[i]).cross(q - self.vertices[i]) >= 0),
        }
    }

    pub fn on_boundary(&self, q: Pt) -> bool {
        let n = self.vertices.len();
        match n {
            0 => false,
            1 => self.vertices[0] == q,
            _ => (0..n).any(|i| on_segment(self.vertices[i], self.vertices[(i + 1) % n], q)),
        }
    }

    pub fn is_reflexive(&self) -> bool {
        self.vertices.len() >= 3 && self.interior_points() == 1
    }

    pub fn translate(&self, v: Pt) -> Self {
        LatticePolygon { vertices: self.vertices.iter().map(|&p| p + v).collect() }
    }

    pub fn dilate(&self, k: i64) -> Self {
        assert!(k > 0, "dilation factor must be positive");
        LatticePolygon { vertices: self.vertices.iter().map(|&p| p.scale(k)).collect() }
    }

    /// Image under an integer linear map with determinant +-1.
    pub fn transform(&self, m: &Mat2) -> Self {
        assert_eq!(m.det().abs(), 1, "map must be unimodular");
        let mut vs: Vec<Pt> = self.vertices.iter().map(|&p| m.apply(p)).collect();
        if m.det() < 0 {
            vs.reverse();
        }
        LatticePolygon { vertices: vs }
    }

    /// A vertex is smooth when its two primitive edge vectors form a lattice basis.
    pub fn is_smooth_vertex(&self, i: usize) -> bool {
        let n = self.vertices.len();
        if n < 3 {
            return false;
        }
        let v = self.vertices[i];
        let a = (self.vertices[(i + 1) % n] - v).primitive();
        let b = (self.vertices[(i + n - 1) % n] - v).primitive();
        a.cross(b).abs() == 1
    }

    /// Representative of the AGL(2,Z) class: lexicographically least vertex
    /// list over every vertex, both orientations and the normalizing shears.
    pub fn agl_normal_form(&self) -> Vec<Pt> {
        let n = self.vertices.len();
        if n < 3 {
            let mut v: Vec<Pt> = self.vertices.iter().map(|&p| p - self.vertices[0]).collect();
            if n == 2 {
                v[1] = pt(v[1].lattice_len(), 0);
            }
            return v;
        }
        let mut best: Option<Vec<Pt>> = None;
        for reflect in [false, true] {
            let base: Vec<Pt> = if reflect {
                let mut r: Vec<Pt> = self.vertices.iter().map(|p| pt(p.x, -p.y)).collect();
                r.reverse();
                r
            } else {
                self.vertices.clone()
            };
            for i in 0..n {
                let cyc: Vec<Pt> = (0..n).map(|j| base[(i + j) % n] - base[i]).collect();
                let a = unimodular_to_x_axis(cyc[1].primitive());
                let mapped: Vec<Pt> = cyc.iter().map(|&p| a.apply(p)).collect();
                // shear fixing the x-axis so the next edge direction is reduced
                let e = mapped[2] - mapped[1];
                let t = -Integer::div_floor(&e.x, &e.y);
                let sh = Mat2([[1, t], [0, 1]]);
                let cand: Vec<Pt> = mapped.iter().map(|&p| sh.apply(p)).collect();
                if best.as_ref().map_or(true, |b| cand < *b) {
                    best = Some(cand);
                }
            }
        }
        best.expect("polygon has vertices")
    }

    pub fn agl_equivalent(&self, other: &Self) -> bool {
        self.agl_normal_form() == other.agl_normal_form()
    }
}

fn on_segment(a: Pt, b: Pt, q: Pt) -> bool {
    (b - a).cross(q - a) == 0 && (q - a).dot(q - b) <= 0
}

impl fmt::Display for LatticePolygon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.vertices.iter().map(|p| p.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// Parses `"(0,0),(3,0),(0,3)"` or `"0,0 3,0 0,3"`.
pub fn parse_polygon(s: &str) -> Result<LatticePolygon> {
    let nums: Vec<i64> = s
        .split(|c: char| !(c.is_ascii_digit() || c == '-'))
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<i64>().map_err(|_| Error::Parse(format!("bad coordinate {t:?}"))))
        .collect::<Result<_>>()?;
    if nums.is_empty() || nums.len() % 2 != 0 {
        return Err(Error::Parse("polygon needs an even, nonzero number of coordinates".into()));
    }
    let pts: Vec<Pt> = nums.chunks(2).map(|c| pt(c[0], c[1])).collect();
    LatticePolygon::from_vertices(&pts)
}

fn poly(v: &[(i64, i64)]) -> LatticePolygon {
    LatticePolygon::from_vertices(&v.iter().map(|&(x, y)| pt(x, y)).collect::<Vec<_>>()).expect("catalogue polygon")
}

/// The twelve reflexive domains of the Fano staircases, in axis normal form,
/// labelled by their negative weight expansion.
pub fn fano_domains() -> Vec<(&'static str, LatticePolygon)> {
    vec![
        ("(3)", poly(&[(0, 0), (3, 0), (0, 3)])),
        ("(4;2,2)", poly(&[(0, 0), (2, 0), (2, 2), (0, 2)])),
        ("(4;2,2)", poly(&[(0, 0), (4, 0), (0, 2)])),
        ("(3;1)", poly(&[(0, 0), (3, 0), (1, 2), (0, 2)])),
        ("(3;1,1)", poly(&[(0, 0), (2, 0), (2, 1), (1, 2), (0, 2)])),
        ("(3;1,1)", poly(&[(0, 0), (3, 0), (1, 2), (0, 1)])),
        ("(3;1,1,1)", poly(&[(0, 0), (1, 0), (2, 1), (2, 2), (1, 2), (0, 1)])),
        ("(3;1,1,1)", poly(&[(0, 0), (2, 0), (2, 1), (1, 2), (0, 1)])),
        ("(3;1,1,1)", poly(&[(0, 0), (2, 0), (2, 1), (0, 2)])),
        ("(3;1,1,1)", poly(&[(0, 0), (3, 0), (0, 2)])),
        ("(3;1,1,1,1)", poly(&[(0, 0), (1, 0), (2, 1), (1, 2), (0, 1)])),
        ("(3;1,1,1,1)", poly(&[(0, 0), (2, 0), (1, 2), (0, 1)])),
    ]
}

/// The remaining four reflexive polygons, with their negative weight
/// expansion when one exists in axis form.
pub fn other_reflexive_polygons() -> Vec<(Option<&'static str>, LatticePolygon)> {
    vec![
        (None, poly(&[(1, 0), (0, 1), (-1, -1)])),
        (Some("(3;1,1,1,1,1)"), poly(&[(0, 0), (1, 0), (2, 2), (0, 1)])),
        (None, poly(&[(1, 0), (0, 1), (-1, 0), (0, -1)])),
        (None, poly(&[(0, -1), (-1, 0), (1, 2)])),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        let t = poly(&[(0, 0), (2, 0), (0, 2)]);
        assert_eq!(t.lattice_points(), 6);
        assert_eq!(t.lattice_points_enumerated(), 6);
        assert_eq!(t.interior_points(), 0);
        let seg = LatticePolygon::from_vertices(&[pt(0, 0), pt(4, 2)]).unwrap();
        assert_eq!(seg.lattice_points(), 3);
        assert_eq!(LatticePolygon::from_vertices(&[pt(5, 5)]).unwrap().lattice_points(), 1);
        assert_eq!(poly(&[(0, 0), (3, 0), (3, 1), (0, 1)]).interior_points(), 0);
    }

    #[test]
    fn rejects_nonconvex_cycles() {
        assert!(LatticePolygon::from_vertices(&[pt(0, 0), pt(2, 0), pt(1, 1), pt(2, 2), pt(0, 2)]).is_err());
        assert!(LatticePolygon::from_vertices(&[pt(0, 0), pt(2, 2), pt(2, 0), pt(0, 2)]).is_err());
        assert!(LatticePolygon::from_vertices(&[pt(0, 0), pt(0, 3), pt(3, 0)]).is_ok());
    }

    #[test]
    fn sixteen_reflexive_classes() {
        let mut forms = Vec::new();
        for (_, p) in fano_domains() {
            assert!(p.is_reflexive(), "{p}");
            forms.push(p.agl_normal_form());
        }
        for (_, p) in other_reflexive_polygons() {
            assert!(p.is_reflexive(), "{p}");
            forms.push(p.agl_normal_form());
        }
        let mut uniq = forms.clone();
        uniq.sort();
        uniq.dedup();
        assert_eq!(uniq.len(), 16);
    }

    #[test]
    fn normal_form_is_invariant() {
        let p = poly(&[(0, 0), (3, 0), (1, 2), (0, 1)]);
        let m = Mat2([[2, 1], [1, 1]]);
        let q = p.transform(&m).translate(pt(-4, 7));
        assert!(p.agl_equivalent(&q));
        let r = Mat2([[0, 1], [1, 0]]);
        assert!(p.agl_equivalent(&p.transform(&r)));
    }
}
