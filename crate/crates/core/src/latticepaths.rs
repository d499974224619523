//! Convex lattice paths, their lattice point counts and `Omega`-lengths, the
//! lattice path capacity oracle and the obstruction paths `Lambda_n`.

use crate::error::{Error, Result};
use crate::numeric::{common_denominator, format_rational, to_f64, Rational};
use crate::polygon::{pt, LatticePolygon, Pt};
use crate::staircases::{PathTemplate, RecurrenceFamily};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;
use std::cmp::Ordering;
use std::fmt::Write as _;

/// Largest `k` accepted by [`ck_via_paths`].
pub const PATH_SEARCH_MAX_K: usize = 20;

/// Default max-norm of the extra primitive directions in the path search.
pub const DEFAULT_DIRECTION_NORM: i64 = 2;

fn cross128(a: Pt, b: Pt) -> i128 {
    a.x as i128 * b.y as i128 - a.y as i128 * b.x as i128
}

fn dot128(a: Pt, b: Pt) -> i128 {
    a.x as i128 * b.x as i128 + a.y as i128 * b.y as i128
}

/// 0 for directions in the upper half plane (including the positive x-axis).
fn half(p: Pt) -> u8 {
    if p.y > 0 || (p.y == 0 && p.x > 0) {
        0
    } else {
        1
    }
}

/// Counterclockwise angular order starting at the positive x-axis.
fn ccw_cmp(a: Pt, b: Pt) -> Ordering {
    half(a).cmp(&half(b)).then_with(|| 0.cmp(&cross128(a, b)))
}

/// A closed convex lattice polygon, stored as a clockwise vertex cycle.
/// Points and segments are allowed. Paths from the y-axis to the x-axis are
/// closed up through the origin.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LatticePath {
    vertices: Vec<Pt>,
}

impl LatticePath {
    /// Path `(0, x) -> ... -> (y, 0)`; the region it cuts off with the axes
    /// must be convex.
    pub fn new(path: &[Pt]) -> Result<Self> {
        let (first, last) = match (path.first(), path.last()) {
            (Some(f), Some(l)) => (*f, *l),
            _ => return Err(Error::InvalidInput("empty lattice path".into())),
        };
        if first.x != 0 || first.y < 0 || last.y != 0 || last.x < 0 {
            return Err(Error::InvalidInput("lattice path must run from the y-axis to the x-axis".into()));
        }
        let mut cycle = path.to_vec();
        cycle.push(pt(0, 0));
        Self::closed(&cycle)
    }

    /// Closed cycle in clockwise order. Repeated and collinear vertices are
    /// dropped.
    pub fn closed(cycle: &[Pt]) -> Result<Self> {
        let mut vs: Vec<Pt> = Vec::new();
        for &v in cycle {
            if vs.last() != Some(&v) {
                vs.push(v);
            }
        }
        while vs.len() > 1 && vs.first() == vs.last() {
            vs.pop();
        }
        if vs.is_empty() {
            return Err(Error::InvalidInput("empty lattice path".into()));
        }
        if vs.len() <= 2 {
            return Ok(LatticePath { vertices: vs });
        }
        // drop vertices in the middle of straight runs
        loop {
            let n = vs.len();
            let pos = (0..n).find(|&i| {
                let (a, b, c) = (vs[(i + n - 1) % n], vs[i], vs[(i + 1) % n]);
                cross128(b - a, c - b) == 0 && dot128(b - a, c - b) > 0
            });
            match pos {
                Some(i) if n > 3 => {
                    vs.remove(i);
                }
                _ => break,
            }
        }
        let n = vs.len();
        let edges: Vec<Pt> = (0..n).map(|i| vs[(i + 1) % n] - vs[i]).collect();
        if edges.iter().all(|&e| cross128(e, edges[0]) == 0) {
            return Err(Error::InvalidInput("degenerate lattice path".into()));
        }
        let mut wraps = 0;
        for i in 0..n {
            let (e, f) = (edges[i], edges[(i + 1) % n]);
            if cross128(e, f) >= 0 {
                return Err(Error::InvalidInput(format!("lattice path is not convex clockwise at {}", vs[(i + 1) % n])));
            }
            // clockwise turning means the ccw angle decreases; count wraps
            if ccw_cmp(f, e) == Ordering::Greater {
                wraps += 1;
            }
        }
        if wraps != 1 {
            return Err(Error::InvalidInput("lattice path winds more than once".into()));
        }
        Ok(LatticePath { vertices: vs })
    }

    pub fn vertices(&self) -> &[Pt] {
        &self.vertices
    }

    /// Edge vectors of the closed cycle.
    pub fn edges(&self) -> Vec<Pt> {
        let n = self.vertices.len();
        if n < 2 {
            return Vec::new();
        }
        (0..n).map(|i| self.vertices[(i + 1) % n] - self.vertices[i]).collect()
    }

    /// Twice the enclosed area.
    pub fn area2(&self) -> i128 {
        let n = self.vertices.len();
        if n < 3 {
            return 0;
        }
        -(0..n).map(|i| cross128(self.vertices[i], self.vertices[(i + 1) % n])).sum::<i128>()
    }

    pub fn boundary_points(&self) -> i128 {
        match self.vertices.len() {
            1 => 1,
            2 => (self.vertices[1] - self.vertices[0]).lattice_len() as i128 + 1,
            _ => self.edges().iter().map(|e| e.lattice_len() as i128).sum(),
        }
    }

    pub fn polygon(&self) -> Result<LatticePolygon> {
        LatticePolygon::hull(&self.vertices)
    }

    /// JSON value `{"vertices": [[x, y], ...]}`.
    pub fn to_json(&self) -> String {
        let vs: Vec<String> = self.vertices.iter().map(|p| format!("[{},{}]", p.x, p.y)).collect();
        format!("{{\"vertices\":[{}]}}", vs.join(","))
    }

    /// SVG drawing of the path, optionally over the region.
    pub fn to_svg(&self, region: Option<&ConvexRegion>) -> String {
        let mut pts: Vec<(f64, f64)> = self.vertices.iter().map(|p| (p.x as f64, p.y as f64)).collect();
        if let Some(r) = region {
            pts.extend(r.vertices.iter().map(|(x, y)| (to_f64(x), to_f64(y))));
        }
        let (mut x0, mut y0, mut x1, mut y1) = (0.0f64, 0.0f64, 1.0f64, 1.0f64);
        for &(x, y) in &pts {
            x0 = x0.min(x);
            y0 = y0.min(y);
            x1 = x1.max(x);
            y1 = y1.max(y);
        }
        let scale = 400.0 / (x1 - x0).max(y1 - y0);
        let map = |x: f64, y: f64| ((x - x0) * scale + 20.0, (y1 - y) * scale + 20.0);
        let poly = |ps: &[(f64, f64)]| {
            ps.iter()
                .map(|&(x, y)| {
                    let (u, v) = map(x, y);
                    format!("{u:.3},{v:.3}")
                })
                .collect::<Vec<_>>()
                .join(" ")
        };
        let mut out = String::new();
        let (w, h) = ((x1 - x0) * scale + 40.0, (y1 - y0) * scale + 40.0);
        let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}">"#);
        if let Some(r) = region {
            let rp: Vec<(f64, f64)> = r.vertices.iter().map(|(x, y)| (to_f64(x), to_f64(y))).collect();
            let _ = writeln!(out, r##"<polygon points="{}" fill="#dde8f4" stroke="#5078a0"/>"##, poly(&rp));
        }
        let lp: Vec<(f64, f64)> = self.vertices.iter().map(|p| (p.x as f64, p.y as f64)).collect();
        let _ = writeln!(out, r##"<polygon points="{}" fill="none" stroke="#b03020" stroke-width="2"/>"##, poly(&lp));
        for &(x, y) in &lp {
            let (u, v) = map(x, y);
            let _ = writeln!(out, r##"<circle cx="{u:.3}" cy="{v:.3}" r="3" fill="#b03020"/>"##);
        }
        out.push_str("</svg>\n");
        out
    }
}

/// Number of lattice points enclosed, boundary included.
pub fn lattice_point_count(path: &LatticePath) -> i128 {
    if path.vertices.len() < 3 {
        return path.boundary_points();
    }
    (path.area2() + path.boundary_points()) / 2 + 1
}

/// A convex polygon with rational vertices, stored counterclockwise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvexRegion {
    vertices: Vec<(Rational, Rational)>,
}

fn rcross(a: &(Rational, Rational), b: &(Rational, Rational), c: &(Rational, Rational)) -> Rational {
    (&b.0 - &a.0) * (&c.1 - &b.1) - (&b.1 - &a.1) * (&c.0 - &b.0)
}

impl ConvexRegion {
    /// Convex polygon with at least three vertices in either orientation.
    pub fn new(vertices: Vec<(Rational, Rational)>) -> Result<Self> {
        let mut vs: Vec<(Rational, Rational)> = Vec::new();
        for v in vertices {
            if vs.last() != Some(&v) {
                vs.push(v);
            }
        }
        while vs.len() > 1 && vs.first() == vs.last() {
            vs.pop();
        }
        let n = vs.len();
        if n < 3 {
            return Err(Error::InvalidInput("region needs at least three vertices".into()));
        }
        let turns: Vec<Rational> = (0..n).map(|i| rcross(&vs[i], &vs[(i + 1) % n], &vs[(i + 2) % n])).collect();
        let pos = turns.iter().all(|t| *t > Rational::zero());
        let neg = turns.iter().all(|t| *t < Rational::zero());
        if !(pos || neg) {
            return Err(Error::InvalidInput("region is not strictly convex at every vertex".into()));
        }
        let area2: Rational = (0..n).map(|i| &vs[i].0 * &vs[(i + 1) % n].1 - &vs[i].1 * &vs[(i + 1) % n].0).sum();
        if area2 != Rational::zero() && neg {
            vs.reverse();
        }
        // a strictly convex cycle that winds twice has twice the hull area
        let hull_ok = {
            let n = vs.len();
            (0..n).all(|i| (0..n).all(|j| rcross(&vs[i], &vs[(i + 1) % n], &vs[j]) >= Rational::zero()))
        };
        if !hull_ok {
            return Err(Error::InvalidInput("region vertex cycle is not simple".into()));
        }
        Ok(ConvexRegion { vertices: vs })
    }

    pub fn from_polygon(p: &LatticePolygon) -> Result<Self> {
        Self::new(p.vertices().iter().map(|v| (Rational::from_integer(v.x.into()), Rational::from_integer(v.y.into()))).collect())
    }

    pub fn vertices(&self) -> &[(Rational, Rational)] {
        &self.vertices
    }

    /// `max_p det[nu, p]` over the region, with the lexicographically
    /// smallest maximizing vertex.
    pub fn support(&self, nu: Pt) -> (Rational, usize) {
        let val = |p: &(Rational, Rational)| &p.1 * BigInt::from(nu.x) - &p.0 * BigInt::from(nu.y);
        let mut best = 0usize;
        let mut best_val = val(&self.vertices[0]);
        for (i, p) in self.vertices.iter().enumerate().skip(1) {
            let v = val(p);
            if v > best_val || (v == best_val && *p < self.vertices[best]) {
                best = i;
                best_val = v;
            }
        }
        (best_val, best)
    }

    /// Primitive integer directions of the edges (counterclockwise).
    pub fn edge_directions(&self) -> Vec<Pt> {
        let n = self.vertices.len();
        let den = common_denominator(self.vertices.iter().flat_map(|(x, y)| [x, y]));
        (0..n)
            .filter_map(|i| {
                let (a, b) = (&self.vertices[i], &self.vertices[(i + 1) % n]);
                let dx = ((&b.0 - &a.0) * &den).to_integer();
                let dy = ((&b.1 - &a.1) * &den).to_integer();
                let g = dx.gcd(&dy);
                Some(pt((dx / &g).to_i64()?, (dy / &g).to_i64()?))
            })
            .collect()
    }

    /// Smallest Euclidean width (attained perpendicular to an edge).
    fn min_width(&self) -> f64 {
        let n = self.vertices.len();
        let vf: Vec<(f64, f64)> = self.vertices.iter().map(|(x, y)| (to_f64(x), to_f64(y))).collect();
        (0..n)
            .map(|i| {
                let (a, b) = (vf[i], vf[(i + 1) % n]);
                let (ex, ey) = (b.0 - a.0, b.1 - a.1);
                let len = (ex * ex + ey * ey).sqrt();
                vf.iter().map(|p| (ex * (p.1 - a.1) - ey * (p.0 - a.0)).abs() / len).fold(0.0, f64::max)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// `l_Omega(Lambda)`: the sum over the edges `nu` of `max_p det[nu, p]`.
pub fn omega_length(path: &LatticePath, region: &ConvexRegion) -> Rational {
    path.edges().into_iter().map(|e| region.support(e).0).sum()
}

/// `c_k` for `0 <= k <= k_max`: the least `Omega`-length of a closed convex
/// lattice polygon enclosing at least `k + 1` lattice points, searching
/// edge directions among the region's edges and the primitive vectors of
/// max-norm at most `direction_norm`.
pub fn capacities_via_paths(region: &ConvexRegion, k_max: usize, direction_norm: i64) -> Result<Vec<Rational>> {
    let mut dirs: Vec<Pt> = Vec::new();
    for x in -direction_norm..=direction_norm {
        for y in -direction_norm..=direction_norm {
            if (x, y) != (0, 0) && x.gcd(&y) == 1 {
                dirs.push(pt(x, y));
            }
        }
    }
    for d in region.edge_directions() {
        dirs.push(d);
        dirs.push(-d);
    }
    dirs.sort_by(|a, b| ccw_cmp(*b, *a));
    dirs.dedup();

    let den = common_denominator(region.vertices.iter().flat_map(|(x, y)| [x, y]));
    let cost = |d: Pt| -> Result<i64> {
        (region.support(d).0 * &den).to_integer().to_i64().ok_or(Error::Overflow("path cost"))
    };
    let costs: Vec<i64> = dirs.iter().map(|&d| cost(d)).collect::<Result<_>>()?;

    // a k-segment is always admissible; longer extents cost more than that
    let seg = dirs
        .iter()
        .map(|&d| Ok(cost(d)? + cost(-d)?))
        .collect::<Result<Vec<i64>>>()?
        .into_iter()
        .min()
        .unwrap_or(0) as f64
        * k_max as f64
        / to_f64(&Rational::from_integer(den.clone()));
    let w = region.min_width();
    if w.is_nan() || w <= 0.0 {
        return Err(Error::InvalidInput("region has no interior".into()));
    }
    let m = ((seg / w) * (1.0 + 1e-9)).floor() as i64 + 1;
    let side = 2 * m + 1;
    let slots = 2 * k_max + 1;
    let cells = (side as usize).pow(2) * slots;
    if cells > 200_000_000 {
        return Err(Error::SearchBound(format!("path search grid of {cells} states is too large")));
    }
    const INF: i64 = i64::MAX / 4;
    let mut dp = vec![INF; cells];
    let idx = |p: Pt| (((p.y + m) * side + (p.x + m)) as usize) * slots;
    dp[idx(pt(0, 0))] = 0;
    let top = (slots - 1) as i128;
    for (&d, &c) in dirs.iter().zip(&costs) {
        let xs: Vec<i64> = if d.x >= 0 { (-m..=m).collect() } else { (-m..=m).rev().collect() };
        let ys: Vec<i64> = if d.y >= 0 { (-m..=m).collect() } else { (-m..=m).rev().collect() };
        for &x in &xs {
            for &y in &ys {
                let p = pt(x, y);
                let q = p + d;
                if q.x.abs() > m || q.y.abs() > m {
                    continue;
                }
                let gain = -cross128(p, d);
                if gain < 0 {
                    continue;
                }
                let (from, to) = (idx(p), idx(q));
                for s in 0..slots {
                    let v = dp[from + s];
                    if v >= INF {
                        continue;
                    }
                    let ns = (s as i128 + gain + 1).min(top) as usize;
                    if v + c < dp[to + ns] {
                        dp[to + ns] = v + c;
                    }
                }
            }
        }
    }
    let o = idx(pt(0, 0));
    (0..=k_max)
        .map(|k| {
            let best = dp[o + 2 * k..o + slots].iter().copied().min().unwrap_or(INF);
            if best >= INF {
                Err(Error::SearchBound(format!("no lattice polygon found for k = {k}")))
            } else {
                Ok(Rational::new(BigInt::from(best), den.clone()))
            }
        })
        .collect()
}

/// `c_k` by lattice path minimization, for `k <= PATH_SEARCH_MAX_K`.
pub fn ck_via_paths(region: &ConvexRegion, k: usize) -> Result<Rational> {
    if k > PATH_SEARCH_MAX_K {
        return Err(Error::SearchBound(format!("k = {k} exceeds the path search bound {PATH_SEARCH_MAX_K}")));
    }
    Ok(capacities_via_paths(region, k, DEFAULT_DIRECTION_NORM)?.pop().expect("k + 1 values"))
}

/// `(s_n, t_n, Lambda_n)` for a staircase family.
pub fn lambda_family(f: &RecurrenceFamily, n: usize) -> Result<(i64, i64, LatticePath)> {
    let (s, t) = f.s_t(n)?;
    let s = s.to_i64().ok_or(Error::Overflow("s_n"))?;
    let t = t.to_i64().ok_or(Error::Overflow("t_n"))?;
    let cycle = match &f.template {
        PathTemplate::Kite => vec![pt(0, 0), pt(0, s - 2 * t), pt(t, s - t), pt(s - t, t), pt(s - 2 * t, 0)],
        PathTemplate::Chops(table) => {
            let [a, b, o] = table[n % table.len()].map(|c| c.map_or(0, |off| t + off));
            vec![pt(0, s - a), pt(a, s - a), pt(s - b, b), pt(s - b, 0), pt(o, 0), pt(0, o)]
        }
    };
    Ok((s, t, LatticePath::closed(&cycle)?))
}

/// The closed forms for `L(Lambda_n)` and `l_Omega(Lambda_n)`, written out
/// per family and residue.
pub fn lambda_closed_forms(f: &RecurrenceFamily, n: usize, s: i64, t: i64) -> Option<(i128, i128)> {
    let (s, t) = (s as i128, t as i128);
    let tri = (s + 1) * (s + 2);
    let (twice_l, ell) = match (f.name, n) {
        ("(3)", _) => (tri, 3 * s),
        ("(4;2,2)", n) if n % 2 == 0 => (tri - t * (t + 1) - t * (t - 1), 4 * s - 4 * t + 2),
        ("(4;2,2)", _) => (tri - 2 * t * (t + 1), 4 * s - 4 * t),
        ("(3;1)", _) => (tri - t * (t + 1), 3 * s - t),
        ("(3;1,1)", n) if n % 3 == 0 => (tri - t * (t + 1) - t * (t - 1), 3 * s - 2 * t + 1),
        ("(3;1,1)", _) => (tri - 2 * t * (t + 1), 3 * s - 2 * t),
        ("(3;1,1,1)", n) => match n % 4 {
            0 => (tri - 2 * t * (t + 1) - (t + 1) * (t + 2), 3 * s - 3 * t - 1),
            2 => (tri - 2 * t * (t + 1) - (t - 1) * t, 3 * s - 3 * t + 1),
            _ => (tri - 3 * t * (t + 1), 3 * s - 3 * t),
        },
        ("(3;1,1,1,1)", _) => (tri - 4 * t * (t + 1), 3 * s - 4 * t),
        _ => return None,
    };
    (twice_l % 2 == 0).then_some((twice_l / 2, ell))
}

#[derive(Clone, Debug, Serialize)]
pub struct LambdaCheck {
    pub n: usize,
    pub s: Option<i64>,
    pub t: Option<i64>,
    pub target_points: String,
    pub target_length: String,
    pub points: Option<String>,
    pub length: Option<String>,
    pub ok: bool,
    pub diagnostics: Vec<String>,
}

/// Checks `L(Lambda_n) = (g(n)+1)(g(n+J)+1)/2` and
/// `l_Omega(Lambda_n) = g(n) + g(n+J)` by direct geometry, by the closed
/// forms, and `l = B s - k b t + e_n` from the constant tables.
pub fn verify_lambda(f: &RecurrenceFamily, n: usize) -> Result<LambdaCheck> {
    let (a, b) = (f.g(n), f.g(n + f.j));
    let target_l: BigInt = (&a + 1) * (&b + 1) / 2;
    let target_len: BigInt = &a + &b;
    let mut check = LambdaCheck {
        n,
        s: None,
        t: None,
        target_points: target_l.to_string(),
        target_length: target_len.to_string(),
        points: None,
        length: None,
        ok: false,
        diagnostics: Vec::new(),
    };
    let (s, t, path) = match lambda_family(f, n) {
        Ok(v) => v,
        Err(e @ Error::Overflow(_)) => return Err(e),
        Err(e) => {
            check.diagnostics.push(e.to_string());
            return Ok(check);
        }
    };
    check.s = Some(s);
    check.t = Some(t);
    let region = ConvexRegion::from_polygon(&f.omega_polygon())?;
    let l = lattice_point_count(&path);
    let len = omega_length(&path, &region);
    check.points = Some(l.to_string());
    check.length = Some(format_rational(&len));
    let d = &mut check.diagnostics;
    if BigInt::from(l) != target_l {
        d.push(format!("lattice points {l} != {target_l}"));
    }
    if len != Rational::from_integer(target_len.clone()) {
        d.push(format!("omega length {} != {target_len}", format_rational(&len)));
    }
    match lambda_closed_forms(f, n, s, t) {
        Some((cl, cell)) => {
            if BigInt::from(cl) != target_l {
                d.push(format!("closed-form lattice points {cl} != {target_l}"));
            }
            if BigInt::from(cell) != target_len {
                d.push(format!("closed-form length {cell} != {target_len}"));
            }
        }
        None => d.push(format!("no closed form for {} at n={n}", f.name)),
    }
    let table_len = f.big_b as i128 * s as i128 - (f.count_b * f.small_b) as i128 * t as i128 + f.e_at(n) as i128;
    if BigInt::from(table_len) != target_len {
        d.push(format!("B s - k b t + e_n = {table_len} != {target_len}"));
    }
    check.ok = check.diagnostics.is_empty();
    Ok(check)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{int, rat};
    use crate::polygon::fano_domains;
    use crate::staircases::{families, family_by_name};
    use proptest::prelude::*;

    fn region(v: &[(i64, i64)]) -> ConvexRegion {
        ConvexRegion::new(v.iter().map(|&(x, y)| (int(x), int(y))).collect()).unwrap()
    }

    #[test]
    fn point_counts() {
        assert_eq!(lattice_point_count(&LatticePath::new(&[pt(0, 2), pt(2, 0)]).unwrap()), 6);
        assert_eq!(lattice_point_count(&LatticePath::new(&[pt(0, 0)]).unwrap()), 1);
        let f = family_by_name("(3)").unwrap();
        let (s, _, lam) = lambda_family(f, 1).unwrap();
        assert_eq!(s, 1);
        assert_eq!(lattice_point_count(&lam), 3);
    }

    #[test]
    fn lengths() {
        let tri = region(&[(0, 0), (3, 0), (0, 3)]);
        assert_eq!(omega_length(&LatticePath::new(&[pt(0, 1), pt(1, 0)]).unwrap(), &tri), int(3));
        assert_eq!(omega_length(&LatticePath::new(&[pt(0, 0)]).unwrap(), &tri), int(0));
        let sq = region(&[(0, 0), (2, 0), (2, 2), (0, 2)]);
        assert_eq!(omega_length(&LatticePath::new(&[pt(0, 2), pt(1, 1), pt(2, 0)]).unwrap(), &sq), int(8));
        assert_eq!(sq.support(pt(1, 0)), (int(2), 3));
        let r = ConvexRegion::new(vec![(int(0), int(0)), (rat(3, 2), int(0)), (int(0), rat(1, 2))]).unwrap();
        assert_eq!(omega_length(&LatticePath::new(&[pt(0, 1), pt(1, 0)]).unwrap(), &r), rat(3, 2));
    }

    #[test]
    fn rejects_bad_paths() {
        assert!(LatticePath::new(&[pt(0, 2), pt(1, 0), pt(2, 0)]).is_err());
        assert!(LatticePath::new(&[pt(0, 2), pt(1, 0), pt(1, 1), pt(2, 0)]).is_err());
        assert!(LatticePath::new(&[pt(0, 2), pt(1, 2), pt(2, 0)]).is_ok());
        assert!(LatticePath::new(&[pt(1, 2), pt(2, 0)]).is_err());
        assert!(LatticePath::closed(&[pt(0, 0), pt(2, 0), pt(0, 2)]).is_err());
        assert!(LatticePath::closed(&[pt(0, 0), pt(0, 2), pt(2, 0)]).is_ok());
        assert!(ConvexRegion::new(vec![(int(0), int(0)), (int(1), int(1))]).is_err());
    }

    #[test]
    fn path_capacities_small() {
        let tri = region(&[(0, 0), (3, 0), (0, 3)]);
        assert_eq!(ck_via_paths(&tri, 2).unwrap(), int(3));
        let caps = capacities_via_paths(&tri, 9, 2).unwrap();
        assert_eq!(caps, [0, 3, 3, 6, 6, 6, 9, 9, 9, 9].map(int).to_vec());
        let sq = region(&[(0, 0), (2, 0), (2, 2), (0, 2)]);
        assert_eq!(ck_via_paths(&sq, 3).unwrap(), int(4));
        assert!(ck_via_paths(&sq, 21).is_err());
    }

    #[test]
    fn path_capacities_match_subtraction() {
        use crate::capacities::ech_convex_toric;
        use crate::numeric::negative_weight_expansion;
        for (label, poly) in fano_domains() {
            let x = negative_weight_expansion(&poly).unwrap();
            let caps = ech_convex_toric(&x, 11).unwrap();
            let paths = capacities_via_paths(&ConvexRegion::from_polygon(&poly).unwrap(), 10, 2).unwrap();
            assert_eq!(caps.values(), paths, "{label} {poly}");
        }
    }

    #[test]
    fn lambda_paths() {
        for f in families() {
            for n in 0..=20 {
                let c = verify_lambda(f, n).unwrap();
                assert!(c.ok, "{} n={n}: {:?}", f.name, c.diagnostics);
            }
        }
    }

    #[test]
    fn lambda_negative_control() {
        let mut f = family_by_name("(3;1,1)").unwrap().clone();
        f.e_n = vec![0, 1, 1];
        assert!(!verify_lambda(&f, 1).unwrap().ok);
        assert!(!verify_lambda(&f, 3).unwrap().ok);
        let mut h = family_by_name("(3;1)").unwrap().clone();
        h.c_n[0] += h.vol;
        let c = verify_lambda(&h, 0).unwrap();
        assert!(!c.ok && !c.diagnostics.is_empty());
        let mut q = family_by_name("(3)").unwrap().clone();
        q.c_n = vec![1];
        assert!(!verify_lambda(&q, 2).unwrap().ok);
    }

    #[test]
    fn exports() {
        let p = LatticePath::new(&[pt(0, 2), pt(2, 0)]).unwrap();
        assert_eq!(p.to_json(), "{\"vertices\":[[0,2],[2,0],[0,0]]}");
        let svg = p.to_svg(Some(&region(&[(0, 0), (3, 0), (0, 3)])));
        assert!(svg.starts_with("<svg") && svg.contains("<polygon"));
    }

    proptest! {
        #[test]
        fn pick_matches_enumeration(pts in proptest::collection::vec((0i64..7, 0i64..7), 1..8)) {
            let hull = LatticePolygon::hull(&pts.iter().map(|&(x, y)| pt(x, y)).collect::<Vec<_>>()).unwrap();
            let mut cyc = hull.vertices().to_vec();
            cyc.reverse();
            let path = LatticePath::closed(&cyc).unwrap();
            prop_assert_eq!(lattice_point_count(&path), hull.lattice_points_enumerated() as i128);
        }

        #[test]
        fn path_capacities_nondecreasing(b in 1i64..4, c in 1i64..4) {
            let caps = capacities_via_paths(&region(&[(0, 0), (b, 0), (0, c)]), 8, 2).unwrap();
            prop_assert!(caps.windows(2).all(|w| w[0] <= w[1]));
            prop_assert!(caps[1..].iter().all(|c| *c > int(0)));
        }
    }
}
