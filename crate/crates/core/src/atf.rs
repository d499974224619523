//! Base diagrams of almost toric fibrations: nodal trades, mutations, the
//! scripted seed diagrams and the mutation recursion for the six Fano cases.

use crate::error::{Error, Result};
use crate::numeric::{to_f64, Rational};
use crate::staircases::RecurrenceFamily;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};
use std::fmt::Write as _;

/// Rational point in the plane.
pub type Point = [Rational; 2];
/// Integer vector.
pub type Vector = [BigInt; 2];
/// Integer 2x2 matrix acting on column vectors.
pub type Matrix = [[BigInt; 2]; 2];

fn q(n: &BigInt) -> Rational {
    Rational::from_integer(n.clone())
}

fn qi(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

fn vec_i(x: i64, y: i64) -> Vector {
    [x.into(), y.into()]
}

/// `(x, y)` as a rational point.
pub fn point(x: Rational, y: Rational) -> Point {
    [x, y]
}

fn pi(x: i64, y: i64) -> Point {
    [qi(x), qi(y)]
}

fn sub(a: &Point, b: &Point) -> Point {
    [&a[0] - &b[0], &a[1] - &b[1]]
}

fn add(a: &Point, b: &Point) -> Point {
    [&a[0] + &b[0], &a[1] + &b[1]]
}

fn scale(k: &Rational, a: &Point) -> Point {
    [k * &a[0], k * &a[1]]
}

fn cross(a: &Point, b: &Point) -> Rational {
    &a[0] * &b[1] - &a[1] * &b[0]
}

fn as_point(v: &Vector) -> Point {
    [q(&v[0]), q(&v[1])]
}

fn neg(v: &Vector) -> Vector {
    [-&v[0], -&v[1]]
}

fn mat_vec(m: &Matrix, v: &Vector) -> Vector {
    [&m[0][0] * &v[0] + &m[0][1] * &v[1], &m[1][0] * &v[0] + &m[1][1] * &v[1]]
}

fn mat_point(m: &Matrix, p: &Point) -> Point {
    [q(&m[0][0]) * &p[0] + q(&m[0][1]) * &p[1], q(&m[1][0]) * &p[0] + q(&m[1][1]) * &p[1]]
}

fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let e = |i: usize, j: usize| &a[i][0] * &b[0][j] + &a[i][1] * &b[1][j];
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

fn det(m: &Matrix) -> BigInt {
    &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0]
}

/// Inverse of a determinant-one matrix.
fn inverse_unimodular(m: &Matrix) -> Matrix {
    [[m[1][1].clone(), -&m[0][1]], [-&m[1][0], m[0][0].clone()]]
}

fn is_primitive(v: &Vector) -> bool {
    v[0].gcd(&v[1]).is_one()
}

/// Primitive integer vector pointing along a nonzero rational vector.
fn primitive_along(p: &Point) -> Vector {
    let den = p[0].denom().lcm(p[1].denom());
    let x = p[0].numer() * (&den / p[0].denom());
    let y = p[1].numer() * (&den / p[1].denom());
    let g = x.gcd(&y);
    [x / &g, y / &g]
}

/// Nodal ray: anchored at a polygon vertex, pointing into the interior and
/// carrying a number of singular fibers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodalRay {
    pub anchor: usize,
    pub direction: Vector,
    pub nodes: u32,
}

/// Which piece of the polygon a mutation moves: the one to the left or to
/// the right of the ray, looking along its direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Side {
    Left,
    Right,
}

/// Convex polygon (counterclockwise) decorated with nodal rays.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaseDiagram {
    vertices: Vec<Point>,
    rays: Vec<NodalRay>,
}

/// Result of a mutation.
#[derive(Clone, Debug)]
pub struct Mutation {
    pub diagram: BaseDiagram,
    /// Linear part of the map applied to the moved piece, about the anchor.
    pub matrix: Matrix,
    /// `matrix = I + shear * r (r_2, -r_1)^T` for the ray direction `r`.
    pub shear: BigInt,
    pub exit: Point,
}

impl BaseDiagram {
    /// Validates strict convexity, counterclockwise order, primitive ray
    /// directions pointing into the interior and at most one ray per vertex.
    pub fn new(vertices: Vec<Point>, rays: Vec<NodalRay>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::InvalidInput("a base diagram needs at least three vertices".into()));
        }
        for i in 0..n {
            let e1 = sub(&vertices[(i + 1) % n], &vertices[i]);
            let e2 = sub(&vertices[(i + 2) % n], &vertices[(i + 1) % n]);
            if !cross(&e1, &e2).is_positive() {
                return Err(Error::InvalidInput("polygon must be strictly convex and counterclockwise".into()));
            }
        }
        let mut seen = vec![false; n];
        for r in &rays {
            if r.anchor >= n || std::mem::replace(&mut seen[r.anchor], true) {
                return Err(Error::InvalidInput(format!("bad ray anchor {}", r.anchor)));
            }
            if !is_primitive(&r.direction) || r.nodes == 0 {
                return Err(Error::InvalidInput("ray directions must be primitive with at least one node".into()));
            }
            let (next, prev) = Self::edges_at(&vertices, r.anchor);
            let d = as_point(&r.direction);
            if !(cross(&next, &d).is_positive() && cross(&d, &prev).is_positive()) {
                return Err(Error::InvalidInput(format!("ray at vertex {} does not enter the polygon", r.anchor)));
            }
        }
        Ok(BaseDiagram { vertices, rays })
    }

    /// A toric base diagram with integer vertices.
    pub fn from_points(vertices: &[(i64, i64)]) -> Result<Self> {
        Self::new(vertices.iter().map(|&(x, y)| pi(x, y)).collect(), Vec::new())
    }

    fn edges_at(vertices: &[Point], i: usize) -> (Point, Point) {
        let n = vertices.len();
        (sub(&vertices[(i + 1) % n], &vertices[i]), sub(&vertices[(i + n - 1) % n], &vertices[i]))
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn rays(&self) -> &[NodalRay] {
        &self.rays
    }

    pub fn vertex_index(&self, p: &Point) -> Option<usize> {
        self.vertices.iter().position(|v| v == p)
    }

    pub fn ray_at(&self, vertex: usize) -> Option<&NodalRay> {
        self.rays.iter().find(|r| r.anchor == vertex)
    }

    /// Twice the Euclidean area.
    pub fn area2(&self) -> Rational {
        let n = self.vertices.len();
        (0..n).map(|i| cross(&self.vertices[i], &self.vertices[(i + 1) % n])).sum()
    }

    pub fn total_nodes(&self) -> u32 {
        self.rays.iter().map(|r| r.nodes).sum()
    }

    fn smooth_edges(&self, vertex: usize) -> Result<(Vector, Vector)> {
        if vertex >= self.vertices.len() {
            return Err(Error::InvalidInput(format!("no vertex {vertex}")));
        }
        let (next, prev) = Self::edges_at(&self.vertices, vertex);
        let (e1, e2) = (primitive_along(&next), primitive_along(&prev));
        if !(&e1[0] * &e2[1] - &e1[1] * &e2[0]).abs().is_one() {
            return Err(Error::InvalidInput(format!("vertex {vertex} is not a smooth corner")));
        }
        Ok((e1, e2))
    }

    /// Adds a one-node ray along the sum of the primitive edge vectors at a
    /// smooth corner.
    pub fn nodal_trade(&self, vertex: usize) -> Result<Self> {
        if self.ray_at(vertex).is_some() {
            return Err(Error::InvalidInput(format!("vertex {vertex} already carries a ray")));
        }
        let (e1, e2) = self.smooth_edges(vertex)?;
        let mut rays = self.rays.clone();
        rays.push(NodalRay { anchor: vertex, direction: [&e1[0] + &e2[0], &e1[1] + &e2[1]], nodes: 1 });
        Self::new(self.vertices.clone(), rays)
    }

    /// Cuts a corner triangle of the given size off a smooth corner without
    /// a ray.
    pub fn toric_blowup(&self, vertex: usize, size: &Rational) -> Result<Self> {
        if self.ray_at(vertex).is_some() {
            return Err(Error::InvalidInput(format!("vertex {vertex} carries a ray")));
        }
        let (e1, e2) = self.smooth_edges(vertex)?;
        let (next, prev) = Self::edges_at(&self.vertices, vertex);
        let fits = |edge: &Point, e: &Vector| {
            let len = if e[0].is_zero() { &edge[1] / q(&e[1]) } else { &edge[0] / q(&e[0]) };
            size.is_positive() && size < &len
        };
        if !fits(&next, &e1) || !fits(&prev, &e2) {
            return Err(Error::InvalidInput(format!("blowup of size {size} does not fit at vertex {vertex}")));
        }
        let v = &self.vertices[vertex];
        let mut vertices = self.vertices.clone();
        vertices.splice(vertex..=vertex, [add(v, &scale(size, &as_point(&e2))), add(v, &scale(size, &as_point(&e1)))]);
        let rays = self
            .rays
            .iter()
            .map(|r| NodalRay { anchor: if r.anchor > vertex { r.anchor + 1 } else { r.anchor }, ..r.clone() })
            .collect();
        Self::new(vertices, rays)
    }

    /// Where a ray leaves the polygon: the point, the edge index and whether
    /// the point is a vertex.
    fn exit(&self, ray: &NodalRay) -> (Point, usize, Option<usize>) {
        let a = &self.vertices[ray.anchor];
        let r = as_point(&ray.direction);
        let n = self.vertices.len();
        let mut best: Option<(Rational, usize, Rational)> = None;
        for j in 0..n {
            let (p, p2) = (&self.vertices[j], &self.vertices[(j + 1) % n]);
            let e = sub(p2, p);
            let den = cross(&r, &e);
            if den.is_zero() {
                continue;
            }
            let ap = sub(p, a);
            let t = cross(&ap, &e) / &den;
            let s = cross(&ap, &r) / &den;
            if t.is_positive() && !s.is_negative() && s <= Rational::one() && best.as_ref().map_or(true, |b| t < b.0) {
                best = Some((t, j, s));
            }
        }
        let (t, j, s) = best.expect("a ray into a convex polygon leaves it");
        let p = add(a, &scale(&t, &r));
        let at_vertex = if s.is_zero() {
            Some(j)
        } else if s.is_one() {
            Some((j + 1) % n)
        } else {
            None
        };
        (p, j, at_vertex)
    }

    /// Mutation along a ray: the piece on `side` is moved by the shear that
    /// fixes the ray direction and straightens the boundary at the anchor.
    /// The ray is reversed and re-anchored where it left the polygon,
    /// merging with an opposite ray there if one exists.
    pub fn mutate(&self, ray_index: usize, side: Side) -> Result<Mutation> {
        let ray = self
            .rays
            .get(ray_index)
            .ok_or_else(|| Error::InvalidInput(format!("no ray {ray_index}")))?
            .clone();
        let a = self.vertices[ray.anchor].clone();
        let r = as_point(&ray.direction);
        let (exit, edge, at_vertex) = self.exit(&ray);
        let opposite = neg(&ray.direction);
        if let Some(k) = at_vertex {
            if self.ray_at(k).map(|o| &o.direction) != Some(&opposite) {
                return Err(Error::InvalidInput(format!(
                    "ray at vertex {} hits vertex {k}, which has no opposite ray",
                    ray.anchor
                )));
            }
        }
        let sign = if side == Side::Left { qi(1) } else { qi(-1) };
        let moves = |p: &Point| (&sign * cross(&r, &sub(p, &a))).is_positive();
        let (next, prev) = Self::edges_at(&self.vertices, ray.anchor);
        let (moved_edge, kept_edge) = if moves(&add(&a, &next)) { (next, prev) } else { (prev, next) };
        let (p, qd) = (&ray.direction[0], &ray.direction[1]);
        let normal = [q(qd), -q(p)];
        let along = &normal[0] * &moved_edge[0] + &normal[1] * &moved_edge[1];
        let shear = -cross(&moved_edge, &kept_edge) / (along * cross(&r, &kept_edge));
        if !shear.is_integer() {
            return Err(Error::CheckFailed(format!("mutation shear {shear} is not an integer")));
        }
        let shear = shear.to_integer();
        if shear.abs() != BigInt::from(ray.nodes) {
            return Err(Error::CheckFailed(format!(
                "mutation shear {shear} does not match the {} node(s) on the ray",
                ray.nodes
            )));
        }
        let matrix: Matrix = [
            [BigInt::one() + &shear * p * qd, -&shear * p * p],
            [&shear * qd * qd, BigInt::one() - &shear * p * qd],
        ];
        let image = |v: &Point| if moves(v) { add(&a, &mat_point(&matrix, &sub(v, &a))) } else { v.clone() };

        let mut cycle: Vec<(Point, Option<(Vector, u32)>)> = Vec::new();
        for (i, v) in self.vertices.iter().enumerate() {
            let decoration = if i == ray.anchor {
                None
            } else {
                self.ray_at(i).map(|o| {
                    let d = if moves(v) { mat_vec(&matrix, &o.direction) } else { o.direction.clone() };
                    (d, o.nodes)
                })
            };
            cycle.push((image(v), decoration));
            if i == edge && at_vertex.is_none() {
                cycle.push((exit.clone(), None));
            }
        }
        let k = cycle.iter().position(|(v, _)| *v == exit).expect("exit point is on the cycle");
        cycle[k].1 = Some(match cycle[k].1.take() {
            Some((d, m)) => (d, m + ray.nodes),
            None => (opposite, ray.nodes),
        });
        // drop vertices that became straight
        let mut changed = true;
        while changed {
            changed = false;
            let n = cycle.len();
            for i in 0..n {
                let e1 = sub(&cycle[i].0, &cycle[(i + n - 1) % n].0);
                let e2 = sub(&cycle[(i + 1) % n].0, &cycle[i].0);
                if cross(&e1, &e2).is_zero() {
                    if cycle[i].1.is_some() {
                        return Err(Error::CheckFailed("a ray is anchored at a straightened vertex".into()));
                    }
                    cycle.remove(i);
                    changed = true;
                    break;
                }
            }
        }
        let vertices: Vec<Point> = cycle.iter().map(|(v, _)| v.clone()).collect();
        let rays = cycle
            .iter()
            .enumerate()
            .filter_map(|(i, (_, d))| d.clone().map(|(direction, nodes)| NodalRay { anchor: i, direction, nodes }))
            .collect();
        let diagram = Self::new(vertices, rays)
            .map_err(|e| Error::CheckFailed(format!("mutation does not give a valid diagram: {e}")))?;
        Ok(Mutation { diagram, matrix, shear, exit })
    }

    /// Image under `x -> m x + t`, with `m` unimodular.
    pub fn transform(&self, m: &Matrix, t: &Point) -> Result<Self> {
        let dm = det(m);
        if !dm.abs().is_one() {
            return Err(Error::InvalidInput("transform must be unimodular".into()));
        }
        let mut vertices: Vec<Point> = self.vertices.iter().map(|v| add(&mat_point(m, v), t)).collect();
        let n = vertices.len();
        let mut rays: Vec<NodalRay> = self
            .rays
            .iter()
            .map(|r| NodalRay { anchor: r.anchor, direction: mat_vec(m, &r.direction), nodes: r.nodes })
            .collect();
        if dm.is_negative() {
            vertices.reverse();
            for r in &mut rays {
                r.anchor = n - 1 - r.anchor;
            }
        }
        rays.sort_by_key(|r| r.anchor);
        Self::new(vertices, rays)
    }

    /// A map `x -> m x + t` with `m` in `GL(2, Z)` carrying this diagram,
    /// rays and node counts included, onto `other`.
    pub fn equivalence_to(&self, other: &Self) -> Option<(Matrix, Point)> {
        let n = self.vertices.len();
        if n != other.vertices.len() || self.rays.len() != other.rays.len() {
            return None;
        }
        let mut sorted_other = other.rays.clone();
        sorted_other.sort_by_key(|r| r.anchor);
        for reversed in [false, true] {
            let order: Vec<usize> = if reversed { (0..n).rev().collect() } else { (0..n).collect() };
            let src = |i: usize| &self.vertices[order[i % n]];
            let e0 = sub(src(1), src(0));
            let e1 = sub(src(2), src(1));
            let d = cross(&e0, &e1);
            for shift in 0..n {
                let dst = |i: usize| &other.vertices[(i + shift) % n];
                let f0 = sub(dst(1), dst(0));
                let f1 = sub(dst(2), dst(1));
                // m [e0 e1] = [f0 f1]
                let entry = |fa: &Rational, fb: &Rational, ea: &Rational, eb: &Rational| (fa * eb - fb * ea) / &d;
                let m = [
                    [entry(&f0[0], &f1[0], &e0[1], &e1[1]), -entry(&f0[0], &f1[0], &e0[0], &e1[0])],
                    [entry(&f0[1], &f1[1], &e0[1], &e1[1]), -entry(&f0[1], &f1[1], &e0[0], &e1[0])],
                ];
                if m.iter().flatten().any(|x| !x.is_integer()) {
                    continue;
                }
                let m: Matrix = [
                    [m[0][0].to_integer(), m[0][1].to_integer()],
                    [m[1][0].to_integer(), m[1][1].to_integer()],
                ];
                if !det(&m).abs().is_one() {
                    continue;
                }
                let t = sub(dst(0), &mat_point(&m, src(0)));
                let Ok(image) = self.transform(&m, &t) else { continue };
                let mut rays = image.rays.clone();
                rays.sort_by_key(|r| r.anchor);
                if image.vertices == other.vertices && rays == sorted_other {
                    return Some((m, t));
                }
                // same polygon, cyclically shifted labels
                if let Some(k) = image.vertex_index(&other.vertices[0]) {
                    let rotated: Vec<Point> = (0..n).map(|i| image.vertices[(i + k) % n].clone()).collect();
                    let mut rr: Vec<NodalRay> = image
                        .rays
                        .iter()
                        .map(|r| NodalRay { anchor: (r.anchor + n - k) % n, ..r.clone() })
                        .collect();
                    rr.sort_by_key(|r| r.anchor);
                    if rotated == other.vertices && rr == sorted_other {
                        return Some((m, t));
                    }
                }
            }
        }
        None
    }

    pub fn equivalent(&self, other: &Self) -> bool {
        self.equivalence_to(other).is_some()
    }

    /// Whether every point lies in the closed polygon.
    pub fn contains_points(&self, pts: &[Point]) -> bool {
        let n = self.vertices.len();
        pts.iter().all(|p| {
            (0..n).all(|i| {
                let e = sub(&self.vertices[(i + 1) % n], &self.vertices[i]);
                !cross(&e, &sub(p, &self.vertices[i])).is_negative()
            })
        })
    }

    pub fn to_svg(&self) -> String {
        let pts: Vec<(f64, f64)> = self.vertices.iter().map(|p| (to_f64(&p[0]), to_f64(&p[1]))).collect();
        let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
        for &(x, y) in &pts {
            x0 = x0.min(x);
            y0 = y0.min(y);
            x1 = x1.max(x);
            y1 = y1.max(y);
        }
        let s = 400.0 / (x1 - x0).max(y1 - y0).max(1e-9);
        let map = |x: f64, y: f64| ((x - x0) * s + 20.0, (y1 - y) * s + 20.0);
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}">"#,
            (x1 - x0) * s + 40.0,
            (y1 - y0) * s + 40.0
        );
        let poly: Vec<String> = pts
            .iter()
            .map(|&(x, y)| {
                let (u, v) = map(x, y);
                format!("{u:.3},{v:.3}")
            })
            .collect();
        let _ = writeln!(out, r##"<polygon points="{}" fill="#eef2e6" stroke="#2f4f2f" stroke-width="2"/>"##, poly.join(" "));
        for r in &self.rays {
            let (e, _, _) = self.exit(r);
            let (ax, ay) = map(pts[r.anchor].0, pts[r.anchor].1);
            let (ex, ey) = map(to_f64(&e[0]), to_f64(&e[1]));
            let (mx, my) = (ax + (ex - ax) * 0.35, ay + (ey - ay) * 0.35);
            let _ = writeln!(
                out,
                r##"<line x1="{ax:.3}" y1="{ay:.3}" x2="{ex:.3}" y2="{ey:.3}" stroke="#555" stroke-dasharray="6,4"/>"##
            );
            let _ = writeln!(
                out,
                r##"<text x="{mx:.3}" y="{my:.3}" font-size="14" fill="#a02020">x{}</text>"##,
                r.nodes
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

#[derive(Serialize)]
struct RayJson {
    anchor: usize,
    direction: [String; 2],
    nodes: u32,
}

#[derive(Serialize)]
struct DiagramJson {
    vertices: Vec<[String; 2]>,
    rays: Vec<RayJson>,
    area2: String,
}

impl Serialize for BaseDiagram {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DiagramJson {
            vertices: self.vertices.iter().map(|p| [p[0].to_string(), p[1].to_string()]).collect(),
            rays: self
                .rays
                .iter()
                .map(|r| RayJson {
                    anchor: r.anchor,
                    direction: [r.direction[0].to_string(), r.direction[1].to_string()],
                    nodes: r.nodes,
                })
                .collect(),
            area2: self.area2().to_string(),
        }
        .serialize(s)
    }
}

/// One move of a seed script.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Move {
    Trade(Point),
    Mutate(Point, Side),
    Blowup(Point, Rational),
}

impl std::fmt::Display for Move {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let p = |p: &Point| format!("({}, {})", p[0], p[1]);
        match self {
            Move::Trade(v) => write!(f, "nodal trade at {}", p(v)),
            Move::Mutate(v, s) => write!(f, "mutation of the ray at {} ({s:?} piece)", p(v)),
            Move::Blowup(v, size) => write!(f, "toric blowup of size {size} at {}", p(v)),
        }
    }
}

/// Applies one move, locating vertices by coordinates.
pub fn apply_move(d: &BaseDiagram, m: &Move) -> Result<BaseDiagram> {
    let find = |v: &Point| {
        d.vertex_index(v)
            .ok_or_else(|| Error::CheckFailed(format!("{m}: no vertex at ({}, {})", v[0], v[1])))
    };
    match m {
        Move::Trade(v) => d.nodal_trade(find(v)?),
        Move::Blowup(v, size) => d.toric_blowup(find(v)?, size),
        Move::Mutate(v, side) => {
            let i = find(v)?;
            let k = d
                .rays
                .iter()
                .position(|r| r.anchor == i)
                .ok_or_else(|| Error::CheckFailed(format!("{m}: no ray there")))?;
            Ok(d.mutate(k, *side)?.diagram)
        }
    }
}

/// A replayed seed script.
#[derive(Clone, Debug, Serialize)]
pub struct Pregame {
    pub case: &'static str,
    pub start: BaseDiagram,
    pub steps: Vec<(String, BaseDiagram)>,
    /// The final diagram moved into the position of the recursion at `n = 0`.
    pub seed: BaseDiagram,
}

fn script(name: &str) -> Result<(Option<&'static str>, BaseDiagram, Vec<Move>)> {
    use Move::*;
    use Side::Left;
    let t = |x, y| Trade(pi(x, y));
    let mu = |x, y| Mutate(pi(x, y), Left);
    Ok(match name {
        "(3)" => (None, BaseDiagram::from_points(&[(0, 0), (3, 0), (0, 3)])?, vec![t(3, 0), t(0, 3)]),
        "(3;1)" => (
            None,
            BaseDiagram::from_points(&[(0, 0), (3, 0), (1, 2), (0, 2)])?,
            vec![t(3, 0), t(1, 2), t(0, 2)],
        ),
        "(3;1,1)" => (
            None,
            BaseDiagram::from_points(&[(0, 0), (2, 0), (2, 1), (1, 2), (0, 2)])?,
            vec![t(2, 0), t(2, 1), t(1, 2), t(0, 2), mu(2, 0)],
        ),
        "(4;2,2)" => (
            None,
            BaseDiagram::from_points(&[(0, 0), (2, 0), (2, 2), (0, 2)])?,
            vec![t(2, 0), t(2, 2), t(0, 2), mu(2, 0)],
        ),
        "(3;1,1,1)" => (
            None,
            BaseDiagram::from_points(&[(1, 0), (2, 0), (2, 1), (1, 2), (0, 2), (0, 1)])?,
            vec![t(2, 0), t(2, 1), t(1, 2), t(0, 2), t(0, 1), mu(2, 0), mu(1, 0), mu(2, 1)],
        ),
        "(3;1,1,1,1)" => (
            Some("(3;1,1,1)"),
            BaseDiagram::from_points(&[(0, 0), (1, 0), (0, 1)])?,
            vec![Blowup(pi(0, 0), qi(1)), t(1, 0), mu(1, 0), mu(0, 2)],
        ),
        other => return Err(Error::InvalidInput(format!("no seed script for {other}"))),
    })
}

/// Replays the seed script of a case and moves the result onto the base
/// diagram of the recursion at `n = 0`.
pub fn pregame(f: &'static RecurrenceFamily) -> Result<Pregame> {
    let (from, mut d, moves) = script(f.name)?;
    if let Some(prev) = from {
        d = pregame(crate::staircases::family_by_name(prev)?)?.seed;
    }
    let start = d.clone();
    let mut steps = Vec::with_capacity(moves.len());
    for m in &moves {
        d = apply_move(&d, m).map_err(|e| Error::CheckFailed(format!("{} seed script, {m}: {e}", f.name)))?;
        steps.push((m.to_string(), d.clone()));
    }
    let target = RecursionState::closed_form(f, 0)?.diagram()?;
    let (m, t) = d
        .equivalence_to(&target)
        .ok_or_else(|| Error::CheckFailed(format!("{} seed script does not reach the n = 0 diagram", f.name)))?;
    let seed = d.transform(&m, &t)?;
    Ok(Pregame { case: f.name, start, steps, seed: reorder_like(&seed, &target) })
}

/// Same diagram, vertex labels rotated to start where `like` starts.
fn reorder_like(d: &BaseDiagram, like: &BaseDiagram) -> BaseDiagram {
    let n = d.vertices.len();
    let k = d.vertex_index(&like.vertices[0]).unwrap_or(0);
    let vertices = (0..n).map(|i| d.vertices[(i + k) % n].clone()).collect();
    let mut rays: Vec<NodalRay> =
        d.rays.iter().map(|r| NodalRay { anchor: (r.anchor + n - k) % n, ..r.clone() }).collect();
    rays.sort_by_key(|r| r.anchor);
    BaseDiagram { vertices, rays }
}

/// Data of the base diagram after `n` recursive mutations.
///
/// For two-step recurrences the diagram is the triangle `(0,0)`, `(b,0)`,
/// `(0,a)` with rays `v` at the top and `u` at the right corner and
/// hypotenuse `c w` from top to right. For three-step recurrences it is the
/// quadrilateral `(0,0)`, `(b,0)`, `C`, `(0,a)` with `C = (0,a) + d upper`,
/// `(b,0) = C + c lower`, and rays `w` at the top, `v` at `C`, `u` at
/// `(b,0)`. `m` is the mutation matrix taking step `n` to `n + 1`.
#[derive(Clone, Debug)]
pub struct RecursionState {
    pub family: &'static RecurrenceFamily,
    pub n: usize,
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
    pub d: Option<Rational>,
    pub u: Vector,
    pub v: Vector,
    pub w: Vector,
    pub upper: Option<Vector>,
    pub lower: Option<Vector>,
    pub m: Matrix,
}

impl RecursionState {
    /// Closed forms at step `n`.
    pub fn closed_form(f: &'static RecurrenceFamily, n: usize) -> Result<Self> {
        let g = |i: usize| f.g(i);
        let sigma = |i: usize| BigInt::from(f.sigma_at(i));
        let ratio = |x: BigInt, y: BigInt| Rational::new(x, y);
        if f.j == 2 {
            let a = ratio(g(n + 1) + g(n + 3), g(n + 1));
            let b = ratio(g(n) + g(n + 2), g(n + 2));
            let v = [g(n + 1), -g(n + 3)];
            let u = [-g(n), g(n + 2)];
            let w = [sigma(n + 1) * g(n + 1) * g(n + 1), -sigma(n + 2) * g(n + 2) * g(n + 2)];
            let m = [
                [-sigma(n + 2) * g(n + 2) * g(n + 2), -sigma(n + 1) * g(n + 1) * g(n + 1)],
                [sigma(n + 3) * g(n + 3) * g(n + 3), BigInt::from(2) + sigma(n + 2) * g(n + 2) * g(n + 2)],
            ];
            let c = &b / q(&w[0]);
            return Ok(RecursionState { family: f, n, a, b, c, d: None, u, v, w, upper: None, lower: None, m });
        }
        if f.j != 3 {
            return Err(Error::InvalidInput(format!("unsupported step {}", f.j)));
        }
        let mat = |k: usize| -> Matrix {
            let s = sigma(k + 1);
            let (g1, g4) = (g(k + 1), g(k + 4));
            [
                [BigInt::one() - &s * &g1 * &g4, -&s * &g1 * &g1],
                [sigma(k + 4) * &g4 * &g4, BigInt::one() + &s * &g1 * &g4],
            ]
        };
        let a = ratio(g(n + 1) + g(n + 4), g(n + 1));
        let b = ratio(g(n) + g(n + 3), g(n + 3));
        let u = [-g(n), g(n + 3)];
        let w = [g(n + 1), -g(n + 4)];
        let upper = [sigma(n + 1) * g(n + 1) * g(n + 1), BigInt::one() - sigma(n + 1) * g(n + 1) * g(n + 4)];
        let lower = [sigma(n) * g(n) * g(n + 3) - 1, -sigma(n + 3) * g(n + 3) * g(n + 3)];
        let m = mat(n);
        let v = mat_vec(&inverse_unimodular(&m), &[g(n + 2), -g(n + 5)]);
        let (up, lo) = (as_point(&upper), as_point(&lower));
        let side = [b.clone(), -a.clone()];
        let det_ul = cross(&up, &lo);
        if det_ul.is_zero() {
            return Err(Error::CheckFailed(format!("{} n={n}: degenerate quadrilateral", f.name)));
        }
        let d = cross(&side, &lo) / &det_ul;
        let c = cross(&up, &side) / &det_ul;
        Ok(RecursionState { family: f, n, a, b, c, d: Some(d), u, v, w, upper: Some(upper), lower: Some(lower), m })
    }

    /// Node counts of the rays: `(top, right, middle)`, the last only for
    /// quadrilaterals.
    fn node_counts(&self) -> (u32, u32, u32) {
        let f = self.family;
        let s = |i: usize| f.sigma_at(i) as u32;
        let period = f.sigma.len();
        (s(self.n + 1), s(self.n), s(self.n + period - 1))
    }

    /// The base diagram this state describes.
    pub fn diagram(&self) -> Result<BaseDiagram> {
        let zero = Rational::zero();
        let top = [zero.clone(), self.a.clone()];
        let right = [self.b.clone(), zero.clone()];
        let (nt, nr, nm) = self.node_counts();
        match (&self.d, &self.upper) {
            (None, _) => BaseDiagram::new(
                vec![[zero.clone(), zero], right, top],
                vec![
                    NodalRay { anchor: 1, direction: self.u.clone(), nodes: nr },
                    NodalRay { anchor: 2, direction: self.v.clone(), nodes: nt },
                ],
            ),
            (Some(d), Some(upper)) => {
                let corner = add(&top, &scale(d, &as_point(upper)));
                BaseDiagram::new(
                    vec![[zero.clone(), zero], right, corner, top],
                    vec![
                        NodalRay { anchor: 1, direction: self.u.clone(), nodes: nr },
                        NodalRay { anchor: 2, direction: self.v.clone(), nodes: nm },
                        NodalRay { anchor: 3, direction: self.w.clone(), nodes: nt },
                    ],
                )
            }
            _ => unreachable!("three-step states carry both edge directions"),
        }
    }

    /// The ray that is mutated to reach the next step.
    fn mutated_ray(&self) -> &Vector {
        if self.d.is_some() {
            &self.w
        } else {
            &self.v
        }
    }

    /// `(a/b, 1/b)`: the inner corner the legs of the triangle encode.
    pub fn inner_corner(&self) -> (Rational, Rational) {
        (&self.a / &self.b, Rational::one() / &self.b)
    }
}

fn check(ok: bool, st: &RecursionState, item: u32, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::CheckFailed(format!("{} n={}: item {item} ({what}) fails", st.family.name, st.n)))
    }
}

/// One mutation step with every check of the recursion, in exact arithmetic.
/// Returns the state at `n + 1`. Item 0 is the comparison with the generic
/// mutation of the base diagram.
pub fn recursion_step(st: &RecursionState) -> Result<RecursionState> {
    let f = st.family;
    let next = RecursionState::closed_form(f, st.n + 1)?;
    let m = &st.m;
    let e2 = vec_i(0, 1);
    let minus_e1 = vec_i(-1, 0);
    if let (Some(d), Some(upper), Some(lower)) = (&st.d, &st.upper, &st.lower) {
        check(mat_vec(m, &st.w) == st.w, st, 1, "M w = w")?;
        check(mat_vec(m, upper) == e2, st, 2, "M upper = (0,1)")?;
        check(det(m).is_one(), st, 3, "det M = 1")?;
        check(next.upper.as_ref() == Some(&mat_vec(m, lower)), st, 4, "upper' = M lower")?;
        check(next.lower.as_ref() == Some(&mat_vec(m, &minus_e1)), st, 5, "lower' = M (-1,0)")?;
        let mut six = mat_vec(m, &st.u) == next.v && mat_vec(m, &st.v) == next.w;
        if st.n > 0 {
            let prev = RecursionState::closed_form(f, st.n - 1)?;
            six &= mat_vec(&mat_mul(m, &prev.m), &prev.u) == next.w;
        }
        check(six, st, 6, "v' = M u, w' = M v = M M_prev u_prev")?;
        check(next.u == neg(&st.w), st, 7, "u' = -w")?;
        check(next.a == &st.a + d, st, 8, "a' = a + d")?;
        check(next.d.as_ref() == Some(&st.c), st, 9, "d' = c")?;
        check(next.b == -&st.a * q(&st.w[0]) / q(&st.w[1]), st, 10, "b' = -a w_1/w_2")?;
        check(next.c == &st.b - &next.b, st, 11, "c' = b - b'")?;
        check(st.c.is_positive() && d.is_positive(), st, 0, "c, d > 0")?;
    } else {
        check(mat_vec(m, &st.v) == st.v, st, 1, "M v = v")?;
        check(mat_vec(m, &st.w) == e2, st, 2, "M w = (0,1)")?;
        check(det(m).is_one(), st, 3, "det M = 1")?;
        check(mat_vec(m, &minus_e1) == next.w, st, 4, "w' = M (-1,0)")?;
        check(mat_vec(m, &st.u) == next.v, st, 5, "v' = M u")?;
        check(next.u == neg(&st.v), st, 6, "u' = -v")?;
        check(next.a == &st.a + &st.c, st, 7, "a' = a + c")?;
        check(next.b == -&st.a * q(&st.v[0]) / q(&st.v[1]), st, 8, "b' = -a v_1/v_2")?;
        check(next.c == &st.b - &next.b, st, 9, "c' = b - b'")?;
    }
    let here = st.diagram()?;
    let k = here
        .rays
        .iter()
        .position(|r| &r.direction == st.mutated_ray())
        .expect("mutated ray is present");
    let mutation = here.mutate(k, Side::Left)?;
    check(&mutation.matrix == m, st, 0, "generic mutation matrix equals M")?;
    check(mutation.diagram.equivalence_to(&next.diagram()?).is_some(), st, 0, "generic mutation gives the next diagram")?;
    check(
        reorder_like(&mutation.diagram, &next.diagram()?) == next.diagram()?,
        st,
        0,
        "generic mutation gives the next diagram in place",
    )?;
    Ok(next)
}

/// Whether the triangle `(0,0)`, `(b,0)`, `(0,a)` lies in the diagram.
pub fn contains_ellipsoid_triangle(st: &RecursionState) -> Result<bool> {
    let zero = Rational::zero();
    let tri = [[zero.clone(), zero.clone()], [st.b.clone(), zero.clone()], [zero, st.a.clone()]];
    Ok(st.diagram()?.contains_points(&tri))
}

/// Whether the diagram is exactly that triangle.
pub fn fills_triangle(st: &RecursionState) -> Result<bool> {
    Ok(st.diagram()?.vertices.len() == 3 && contains_ellipsoid_triangle(st)?)
}

/// Seed script, then `steps` recursion steps; the states at `0..=steps`.
pub fn run_recursion(f: &'static RecurrenceFamily, steps: usize) -> Result<Vec<RecursionState>> {
    let seed = pregame(f)?.seed;
    let mut st = RecursionState::closed_form(f, 0)?;
    if seed != st.diagram()? {
        return Err(Error::CheckFailed(format!("{}: seed diagram differs from the n = 0 closed form", f.name)));
    }
    let mut out = vec![st.clone()];
    for _ in 0..steps {
        st = recursion_step(&st)?;
        out.push(st.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rat;
    use crate::staircases::{corners, families, family_by_name};

    fn fam(s: &str) -> &'static RecurrenceFamily {
        family_by_name(s).unwrap()
    }

    #[test]
    fn trades() {
        let t = BaseDiagram::from_points(&[(0, 0), (3, 0), (0, 3)]).unwrap();
        let top = t.nodal_trade(2).unwrap();
        assert_eq!(top.rays()[0].direction, vec_i(1, -2));
        let both = top.nodal_trade(1).unwrap();
        assert_eq!(both.ray_at(1).unwrap().direction, vec_i(-2, 1));
        assert!(both.nodal_trade(1).is_err());
        let wedge = BaseDiagram::from_points(&[(0, 0), (1, 0), (0, 2)]).unwrap();
        assert!(wedge.nodal_trade(1).is_err());
        assert!(BaseDiagram::from_points(&[(0, 0), (0, 3), (3, 0)]).is_err());
    }

    #[test]
    fn mutation_of_the_projective_plane() {
        // triangle with a ray at the top: moving the right piece gives the
        // triangle with legs 3/2 and 6
        let d = BaseDiagram::from_points(&[(0, 0), (3, 0), (0, 3)]).unwrap().nodal_trade(2).unwrap();
        let m = d.mutate(0, Side::Left).unwrap();
        assert_eq!(m.exit, [rat(3, 2), qi(0)]);
        assert_eq!(m.diagram.vertices(), &[pi(0, 0), [rat(3, 2), qi(0)], pi(0, 6)]);
        assert_eq!(m.diagram.area2(), d.area2());
        assert_eq!(m.diagram.rays()[0].direction, vec_i(-1, 2));
        assert_eq!(det(&m.matrix), BigInt::one());
        let other = d.mutate(0, Side::Right).unwrap();
        assert!(other.diagram.equivalent(&m.diagram));
        // both corners traded: the ray hits the interior of the base
        let two = d.nodal_trade(1).unwrap();
        let k = two.rays().iter().position(|r| r.anchor == 2).unwrap();
        assert!(two.mutate(k, Side::Left).is_ok());
    }

    #[test]
    fn inadmissible_target() {
        // the diagonal ray of the square hits the opposite corner, which has no ray
        let d = BaseDiagram::from_points(&[(0, 0), (2, 0), (2, 2), (0, 2)]).unwrap().nodal_trade(0).unwrap();
        assert!(d.mutate(0, Side::Left).is_err());
    }

    #[test]
    fn blowup() {
        let d = BaseDiagram::from_points(&[(0, 0), (2, 0), (0, 3)]).unwrap();
        let b = d.toric_blowup(0, &qi(1)).unwrap();
        assert_eq!(b.vertices(), &[pi(0, 1), pi(1, 0), pi(2, 0), pi(0, 3)]);
        assert!(d.toric_blowup(0, &qi(2)).is_err());
    }

    #[test]
    fn seed_scripts() {
        for f in families() {
            let p = pregame(f).unwrap();
            assert_eq!(p.seed, RecursionState::closed_form(f, 0).unwrap().diagram().unwrap(), "{}", f.name);
            for (_, d) in &p.steps {
                assert_eq!(d.area2(), p.start.area2() - if f.name == "(3;1,1,1,1)" { qi(1) } else { qi(0) });
            }
        }
        let shapes = |s: &str| -> Vec<(usize, usize)> {
            pregame(fam(s)).unwrap().steps.iter().map(|(_, d)| (d.vertices().len(), d.rays().len())).collect()
        };
        assert_eq!(shapes("(3)"), vec![(3, 1), (3, 2)]);
        assert_eq!(shapes("(3;1)").last(), Some(&(4, 3)));
        assert_eq!(shapes("(3;1,1,1)")[4..], [(6, 5), (5, 4), (4, 3), (3, 2)]);
        assert_eq!(shapes("(3;1,1,1,1)"), vec![(4, 2), (4, 3), (4, 3), (3, 2)]);
        let nodes = |s: &str| {
            let mut v: Vec<u32> = pregame(fam(s)).unwrap().seed.rays().iter().map(|r| r.nodes).collect();
            v.sort();
            v
        };
        assert_eq!(nodes("(3;1,1,1,1)"), vec![1, 5]);
        assert_eq!(nodes("(3;1,1,1)"), vec![2, 3]);
        assert_eq!(nodes("(4;2,2)"), vec![1, 2]);
        assert_eq!(nodes("(3;1,1)"), vec![1, 1, 2]);
    }

    #[test]
    fn recursion_runs() {
        for f in families() {
            let states = run_recursion(f, 30).unwrap();
            for st in &states {
                assert!(contains_ellipsoid_triangle(st).unwrap());
                assert_eq!(fills_triangle(st).unwrap(), f.j == 2, "{} n={}", f.name, st.n);
                assert_eq!(st.diagram().unwrap().area2(), states[0].diagram().unwrap().area2() * qi(1));
            }
        }
        let s = RecursionState::closed_form(fam("(3)"), 0).unwrap();
        let next = recursion_step(&s).unwrap();
        assert_eq!(det(&s.m), BigInt::one());
        assert_eq!(next.v, mat_vec(&s.m, &s.u));
    }

    #[test]
    fn node_counts_alternate() {
        let f = fam("(4;2,2)");
        let top: Vec<u32> = (0..4)
            .map(|n| {
                let st = RecursionState::closed_form(f, n).unwrap();
                st.diagram().unwrap().ray_at(2).unwrap().nodes
            })
            .collect();
        assert_eq!(top, vec![1, 2, 1, 2]);
    }

    #[test]
    fn tampered_state_reports_item() {
        let mut s = RecursionState::closed_form(fam("(3)"), 2).unwrap();
        s.a += qi(1);
        let e = recursion_step(&s).unwrap_err().to_string();
        assert!(e.contains("item 7"), "{e}");
        let mut t = RecursionState::closed_form(fam("(3;1)"), 2).unwrap();
        t.w = vec_i(1, -3);
        assert!(recursion_step(&t).unwrap_err().to_string().contains("item 1"));
    }

    #[test]
    fn legs_match_inner_corners() {
        for f in families() {
            for n in 0..8 {
                let st = RecursionState::closed_form(f, n).unwrap();
                let (inner, _) = corners(f, n);
                assert_eq!(st.inner_corner(), (inner.x.clone(), inner.y.clone()), "{} n={n}", f.name);
            }
        }
    }

    #[test]
    fn exports() {
        let d = RecursionState::closed_form(fam("(3;1,1)"), 1).unwrap().diagram().unwrap();
        assert!(d.to_svg().contains("<line"));
        let js = serde_json::to_string(&d).unwrap();
        assert!(js.contains("\"nodes\""));
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(48))]
        #[test]
        fn mutations_preserve_area_and_nodes(
            case in 0usize..6,
            picks in proptest::collection::vec((0usize..4, proptest::bool::ANY), 1..6),
        ) {
            let mut d = pregame(&families()[case]).unwrap().seed;
            let (area, nodes) = (d.area2(), d.total_nodes());
            for (k, left) in picks {
                let k = k % d.rays().len();
                let side = if left { Side::Left } else { Side::Right };
                if let Ok(m) = d.mutate(k, side) {
                    proptest::prop_assert_eq!(det(&m.matrix), BigInt::one());
                    d = m.diagram;
                }
                proptest::prop_assert_eq!(d.area2(), area.clone());
                proptest::prop_assert_eq!(d.total_nodes(), nodes);
            }
        }
    }
}
