//! The six Fano staircase families: recurrence sequences, identities, corner
//! formulas, the piecewise linear staircase graph and the outer corner check.

use crate::capacities::{ech_convex_toric, ellipsoid_count_below, ellipsoid_prefix};
use crate::error::{Error, Result};
use crate::latticepaths::verify_lambda;
use crate::numeric::{serialize_rational, solve_accumulation_quadratic, NegativeWeightExpansion, QuadraticSurd, Rational};
use crate::polygon::{pt, LatticePolygon};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use std::sync::{OnceLock, RwLock};

/// Region shape of the lattice paths `Lambda_n` for one family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PathTemplate {
    /// The `s`-triangle with corners cut off; entry `n mod len` gives the
    /// (top, right, origin) cut sizes as offsets from `t`, `None` for no cut.
    Chops(Vec<[Option<i64>; 3]>),
    /// The pentagon `(0,0), (0,s-2t), (t,s-t), (s-t,t), (s-2t,0)`.
    Kite,
}

/// One Fano family: recurrence data, identity constants, ATF data and the
/// lattice path constants.
#[derive(Debug)]
pub struct RecurrenceFamily {
    pub name: &'static str,
    pub k: i64,
    pub j: usize,
    pub seeds: Vec<i64>,
    /// Tabulated accumulation point `(p, q, D, r)` for `(p + q sqrt D)/r`.
    pub a0_listed: (i64, i64, i64, i64),
    /// Constant of the heart identity (`J = 2`).
    pub alpha: Option<i64>,
    /// Residue tables indexed by `n mod len`.
    pub beta: Vec<i64>,
    pub delta: Vec<i64>,
    pub mu: Vec<i64>,
    pub sigma: Vec<i64>,
    /// Club identity coefficients for `J = 3`: `g(n)+g(n+3) = x g(n+1) + y g(n+2)`.
    pub club3: Vec<(i64, i64)>,
    /// Lattice path data: expansion `(B; b, ..., b)` with `count_b` copies of `b`.
    pub big_b: i64,
    pub small_b: i64,
    pub count_b: i64,
    pub vol: i64,
    pub c_n: Vec<i64>,
    pub d_n: Vec<i64>,
    pub e_n: Vec<i64>,
    pub omega: Vec<(i64, i64)>,
    pub template: PathTemplate,
    memo: RwLock<Vec<BigInt>>,
}

impl Clone for RecurrenceFamily {
    fn clone(&self) -> Self {
        RecurrenceFamily {
            name: self.name,
            k: self.k,
            j: self.j,
            seeds: self.seeds.clone(),
            a0_listed: self.a0_listed,
            alpha: self.alpha,
            beta: self.beta.clone(),
            delta: self.delta.clone(),
            mu: self.mu.clone(),
            sigma: self.sigma.clone(),
            club3: self.club3.clone(),
            big_b: self.big_b,
            small_b: self.small_b,
            count_b: self.count_b,
            vol: self.vol,
            c_n: self.c_n.clone(),
            d_n: self.d_n.clone(),
            e_n: self.e_n.clone(),
            omega: self.omega.clone(),
            template: self.template.clone(),
            memo: RwLock::new(Vec::new()),
        }
    }
}

fn at(table: &[i64], n: usize) -> i64 {
    table[n % table.len()]
}

impl RecurrenceFamily {
    pub fn expansion(&self) -> NegativeWeightExpansion {
        NegativeWeightExpansion::parse(self.name).expect("registry labels parse")
    }

    /// `g(n)`, memoized.
    pub fn g(&self, n: usize) -> BigInt {
        if let Some(v) = self.memo.read().expect("memo lock").get(n) {
            return v.clone();
        }
        let mut memo = self.memo.write().expect("memo lock");
        if memo.is_empty() {
            memo.extend(self.seeds.iter().map(|&s| BigInt::from(s)));
        }
        let k = BigInt::from(self.k);
        while memo.len() <= n {
            let m = memo.len() - 2 * self.j;
            let next = &k * &memo[m + self.j] - &memo[m];
            memo.push(next);
        }
        memo[n].clone()
    }

    pub fn g_i64(&self, n: usize) -> Option<i64> {
        self.g(n).to_i64()
    }

    pub fn beta_at(&self, n: usize) -> i64 {
        at(&self.beta, n)
    }
    pub fn sigma_at(&self, n: usize) -> i64 {
        at(&self.sigma, n)
    }
    pub fn c_at(&self, n: usize) -> i64 {
        at(&self.c_n, n)
    }
    pub fn d_at(&self, n: usize) -> i64 {
        at(&self.d_n, n)
    }
    pub fn e_at(&self, n: usize) -> i64 {
        at(&self.e_n, n)
    }

    /// The domain `Omega` used for the lattice paths.
    pub fn omega_polygon(&self) -> LatticePolygon {
        let pts: Vec<_> = self.omega.iter().map(|&(x, y)| pt(x, y)).collect();
        LatticePolygon::from_vertices(&pts).expect("registry polygon")
    }

    pub fn a0(&self) -> QuadraticSurd {
        let (p, q, d, r) = self.a0_listed;
        QuadraticSurd::from_i64(p, q, d, r)
    }

    /// `a0` recomputed from `per^2/vol - 2` of the expansion.
    pub fn a0_computed(&self) -> Option<QuadraticSurd> {
        solve_accumulation_quadratic(&self.expansion().k_coefficient()).map(|(hi, _)| hi)
    }

    /// `sqrt(a0/vol)`, which equals `a0/(a0+1)` because `vol = K + 2`.
    pub fn volume_limit(&self) -> QuadraticSurd {
        let a0 = self.a0();
        &a0 / &a0.add_rational(&Rational::one())
    }

    /// Every identity of the family for `0 <= n <= n_max`; returns the
    /// failures as readable strings.
    pub fn identity_failures(&self, n_max: usize) -> Vec<String> {
        let mut bad = Vec::new();
        let k = BigInt::from(self.k);
        let g = |i: usize| self.g(i);
        for n in 0..=n_max {
            if self.j == 2 {
                let alpha = BigInt::from(self.alpha.unwrap_or(0));
                let b1 = BigInt::from(self.beta_at(n + 1));
                if g(n) + g(n + 2) != &b1 * g(n + 1) {
                    bad.push(format!("{} club at n={n}", self.name));
                }
                if g(n) * g(n) + g(n + 2) * g(n + 2) - &k * g(n) * g(n + 2) != -(&alpha * &b1) {
                    bad.push(format!("{} diamond at n={n}", self.name));
                }
                if g(n) * g(n + 3) != g(n + 1) * g(n + 2) + &alpha {
                    bad.push(format!("{} heart at n={n}", self.name));
                }
                if self.beta_at(n) * self.beta_at(n + 1) != self.k + 2 {
                    bad.push(format!("{} beta product at n={n}", self.name));
                }
            } else {
                let (x, y) = self.club3[n % 3];
                if g(n) + g(n + 3) != x * g(n + 1) + y * g(n + 2) {
                    bad.push(format!("{} club at n={n}", self.name));
                }
                let b1 = BigInt::from(self.beta_at(n + 1));
                if g(n) * g(n) + g(n + 3) * g(n + 3) - &k * g(n) * g(n + 3) != -b1 {
                    bad.push(format!("{} diamond at n={n}", self.name));
                }
                if g(n) * g(n + 4) != g(n + 1) * g(n + 3) + at(&self.delta, n) {
                    bad.push(format!("{} heart.1 at n={n}", self.name));
                }
                if g(n) * g(n + 5) != g(n + 2) * g(n + 3) + at(&self.mu, n) {
                    bad.push(format!("{} heart.2 at n={n}", self.name));
                }
            }
            // the residue subsequences obey the order two recurrence
            if g(n + 2 * self.j) != &k * g(n + self.j) - g(n) {
                bad.push(format!("{} subsequence recurrence at n={n}", self.name));
            }
        }
        bad
    }

    pub fn verify_identities(&self, n_max: usize) -> bool {
        self.identity_failures(n_max).is_empty()
    }

    /// Residues `r` (mod the table period) where `B c_n - k b d_n + vol e_n != 0`.
    pub fn table_consistency_failures(&self) -> Vec<usize> {
        let period = lcm(lcm(self.c_n.len(), self.d_n.len()), self.e_n.len());
        (0..period)
            .filter(|&r| {
                self.big_b * self.c_at(r) - self.count_b * self.small_b * self.d_at(r) + self.vol * self.e_at(r) != 0
            })
            .collect()
    }

    /// `(s_n, t_n)`; errors if either is not an integer.
    pub fn s_t(&self, n: usize) -> Result<(BigInt, BigInt)> {
        let big_g = self.g(n) + self.g(n + self.j);
        let vol = BigInt::from(self.vol);
        let sn = BigInt::from(self.big_b) * &big_g + self.c_at(n);
        let tn = BigInt::from(self.small_b) * &big_g + self.d_at(n);
        if !(&sn % &vol).is_zero() || !(&tn % &vol).is_zero() {
            return Err(Error::CheckFailed(format!("{}: s_n or t_n not integral at n={n}", self.name)));
        }
        Ok((sn / &vol, tn / vol))
    }
}

fn lcm(a: usize, b: usize) -> usize {
    use num_integer::Integer;
    a.lcm(&b)
}

#[allow(clippy::too_many_arguments, clippy::type_complexity)]
fn family(
    name: &'static str,
    k: i64,
    j: usize,
    seeds: &[i64],
    a0: (i64, i64, i64, i64),
    identities: (Option<i64>, &[i64], &[i64], &[i64], &[(i64, i64)]),
    sigma: &[i64],
    path: (i64, i64, i64, i64),
    cde: (&[i64], &[i64], &[i64]),
    omega: &[(i64, i64)],
    template: PathTemplate,
) -> RecurrenceFamily {
    let (alpha, beta, delta, mu, club3) = identities;
    RecurrenceFamily {
        name,
        k,
        j,
        seeds: seeds.to_vec(),
        a0_listed: a0,
        alpha,
        beta: beta.to_vec(),
        delta: delta.to_vec(),
        mu: mu.to_vec(),
        sigma: sigma.to_vec(),
        club3: club3.to_vec(),
        big_b: path.0,
        small_b: path.1,
        count_b: path.2,
        vol: path.3,
        c_n: cde.0.to_vec(),
        d_n: cde.1.to_vec(),
        e_n: cde.2.to_vec(),
        omega: omega.to_vec(),
        template,
        memo: RwLock::new(Vec::new()),
    }
}

const Z: Option<i64> = Some(0);
const M1: Option<i64> = Some(-1);
const P1: Option<i64> = Some(1);

/// The audited constant table. Residue tables are indexed by `n mod len`.
pub fn families() -> &'static [RecurrenceFamily] {
    static REGISTRY: OnceLock<Vec<RecurrenceFamily>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        vec![
            family(
                "(3)", 7, 2, &[2, 1, 1, 2], (7, 3, 5, 2),
                (Some(3), &[3], &[], &[], &[]),
                &[1],
                (3, 0, 0, 9), (&[0], &[0], &[0]),
                &[(0, 0), (3, 0), (0, 3)],
                PathTemplate::Chops(vec![[None, None, None]]),
            ),
            family(
                "(4;2,2)", 6, 2, &[1, 1, 1, 3], (3, 2, 2, 1),
                (Some(2), &[4, 2], &[], &[], &[]),
                &[2, 1],
                (4, 2, 2, 8), (&[0], &[4, 0], &[2, 0]),
                &[(0, 0), (2, 0), (2, 2), (0, 2)],
                PathTemplate::Chops(vec![[Z, M1, None], [Z, Z, None]]),
            ),
            family(
                "(3;1,1,1)", 4, 2, &[1, 1, 1, 2], (2, 1, 3, 1),
                (Some(1), &[3, 2], &[], &[], &[]),
                &[3, 2],
                (3, 1, 3, 6), (&[0, 3, 0, -3], &[-2, 3, 2, -3], &[-1, 0, 1, 0]),
                &[(1, 0), (2, 0), (2, 1), (1, 2), (0, 2), (0, 1)],
                PathTemplate::Chops(vec![[P1, Z, Z], [Z, Z, Z], [Z, M1, Z], [Z, Z, Z]]),
            ),
            family(
                "(3;1,1,1,1)", 3, 2, &[1, 2, 1, 3], (3, 1, 5, 2),
                (Some(1), &[5, 1], &[], &[], &[]),
                &[5, 1],
                (3, 1, 4, 5), (&[4, 0, -4, 0], &[3, 0, -3, 0], &[0]),
                &[(0, 0), (1, 0), (2, 1), (1, 2), (0, 1)],
                PathTemplate::Kite,
            ),
            family(
                "(3;1)", 6, 3, &[1, 1, 1, 1, 2, 4], (3, 2, 2, 1),
                (None, &[7, 4, 7], &[1, 2, 1], &[3], &[(1, 1), (2, 1), (1, 2)]),
                &[1],
                (3, 1, 1, 8), (&[2, -1, 1, -2, 1, -1], &[6, -3, 3, -6, 3, -3], &[0]),
                &[(0, 0), (3, 0), (1, 2), (0, 2)],
                PathTemplate::Chops(vec![[Z, None, None]]),
            ),
            family(
                "(3;1,1)", 5, 3, &[1, 1, 1, 1, 2, 3], (5, 1, 21, 2),
                (None, &[5, 3, 5], &[1], &[2, 2, 3], &[(1, 1), (1, 2), (2, 1)]),
                &[2, 1, 1],
                (3, 1, 2, 7), (&[1, -2, 2, -1, 2, -2], &[5, -3, 3, 2, 3, -3], &[1, 0, 0]),
                &[(0, 0), (2, 0), (2, 1), (1, 2), (0, 2)],
                PathTemplate::Chops(vec![[Z, M1, None], [Z, Z, None], [Z, Z, None]]),
            ),
        ]
    })
}

/// Looks a family up by its expansion, e.g. `"(3;1)"`, `"3;1"` or `"3"`.
pub fn family_by_name(name: &str) -> Result<&'static RecurrenceFamily> {
    let want = NegativeWeightExpansion::parse(name)
        .map_err(|_| Error::InvalidInput(format!("unknown case {name:?}")))?
        .to_string();
    families()
        .iter()
        .find(|f| f.name == want)
        .ok_or_else(|| Error::InvalidInput(format!("unknown case {name:?}; expected one of (3), (4;2,2), (3;1,1,1), (3;1,1,1,1), (3;1), (3;1,1)")))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CornerKind {
    Inner,
    Outer,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Corner {
    #[serde(serialize_with = "serialize_rational")]
    pub x: Rational,
    #[serde(serialize_with = "serialize_rational")]
    pub y: Rational,
    pub kind: CornerKind,
    pub n: usize,
}

/// Inner and outer corner with index `n`.
pub fn corners(f: &RecurrenceFamily, n: usize) -> (Corner, Corner) {
    let j = f.j;
    let (g0, gj) = (f.g(n), f.g(n + j));
    let (g1, g1j) = (f.g(n + 1), f.g(n + 1 + j));
    let y = Rational::new(gj.clone(), &g0 + &gj);
    let x_in = Rational::new(&gj * (&g1 + &g1j), (&g0 + &gj) * &g1);
    let x_out = Rational::new(gj, g0);
    (
        Corner { x: x_in, y: y.clone(), kind: CornerKind::Inner, n },
        Corner { x: x_out, y, kind: CornerKind::Outer, n },
    )
}

/// Interleaving `x_out_n < x_in_n < x_out_{n+1}` for `n <= n_max`, strictly
/// shrinking distances of `x_out_n` to `a0` and `y_out_n` to `sqrt(a0/vol)`
/// over `1 <= n <= n_max`, both below `eps` at `n_max`.
pub fn verify_structure(f: &RecurrenceFamily, n_max: usize, eps: &Rational) -> bool {
    let a0 = f.a0();
    let ylim = f.volume_limit();
    let dist = |x: &Rational, target: &QuadraticSurd| {
        let d = target.add_rational(&-x.clone());
        if d.signum() == std::cmp::Ordering::Less {
            d.neg()
        } else {
            d
        }
    };
    let mut prev: Option<(QuadraticSurd, QuadraticSurd)> = None;
    for n in 0..=n_max {
        let (inner, outer) = corners(f, n);
        let (_, next_outer) = corners(f, n + 1);
        if !(outer.x < inner.x && inner.x < next_outer.x) || outer.y != inner.y {
            return false;
        }
        if n == 0 {
            continue;
        }
        let dx = dist(&outer.x, &a0);
        let dy = dist(&outer.y, &ylim);
        if let Some((px, py)) = &prev {
            if dx.cmp_surd(px).ok() != Some(std::cmp::Ordering::Less) || dy.cmp_surd(py).ok() != Some(std::cmp::Ordering::Less) {
                return false;
            }
        }
        prev = Some((dx, dy));
    }
    match prev {
        Some((dx, dy)) if n_max > 0 => dx.cmp_rational(eps).is_lt() && dy.cmp_rational(eps).is_lt(),
        _ => true,
    }
}

/// The staircase graph: corners `in_0, out_1, in_1, out_2, ...` joined by
/// alternately horizontal and through-origin segments. Corners are
/// generated on demand up to the evaluation point.
#[derive(Debug)]
pub struct StaircaseGraph {
    family: &'static RecurrenceFamily,
    corners: RwLock<Vec<Corner>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentKind {
    Horizontal,
    ThroughOrigin,
}

impl StaircaseGraph {
    pub fn new(family: &'static RecurrenceFamily) -> Self {
        StaircaseGraph { family, corners: RwLock::new(vec![corners(family, 0).0]) }
    }

    pub fn family(&self) -> &'static RecurrenceFamily {
        self.family
    }

    fn extend_to(&self, a: &Rational) {
        let mut cs = self.corners.write().expect("corner lock");
        while cs.last().map_or(true, |c| c.x < *a) {
            let n = cs.last().map_or(0, |c| c.n) + 1;
            let (inner, outer) = corners(self.family, n);
            cs.push(outer);
            cs.push(inner);
        }
    }

    /// Corners with `x <= a_max` (at least the first inner corner).
    pub fn corners_up_to(&self, a_max: &Rational) -> Vec<Corner> {
        self.extend_to(a_max);
        self.corners.read().expect("corner lock").iter().filter(|c| c.x <= *a_max || c.n == 0).cloned().collect()
    }

    /// Exact graph value at `a`, for `x_in_0 <= a < a0`.
    pub fn value_at(&self, a: &Rational) -> Result<Rational> {
        let start = corners(self.family, 0).0;
        if *a < start.x {
            return Err(Error::InvalidInput(format!("{a} lies below the first inner corner {}", start.x)));
        }
        if self.family.a0().cmp_rational(a).is_le() {
            return Err(Error::InvalidInput(format!("{a} is not below the accumulation point")));
        }
        self.extend_to(a);
        let cs = self.corners.read().expect("corner lock");
        let i = cs.partition_point(|c| c.x <= *a);
        let left = &cs[i - 1];
        Ok(match left.kind {
            CornerKind::Outer => left.y.clone(),
            CornerKind::Inner => &left.y * a / &left.x,
        })
    }

    /// Segment kinds between consecutive corners up to `a_max`.
    pub fn segments(&self, a_max: &Rational) -> Vec<(Corner, Corner, SegmentKind)> {
        let cs = self.corners_up_to(a_max);
        cs.windows(2)
            .map(|w| {
                let kind = if w[0].kind == CornerKind::Inner { SegmentKind::ThroughOrigin } else { SegmentKind::Horizontal };
                (w[0].clone(), w[1].clone(), kind)
            })
            .collect()
    }
}

pub fn staircase_graph(f: &'static RecurrenceFamily) -> StaircaseGraph {
    StaircaseGraph::new(f)
}

/// Index bound up to which the outer check also computes capacities directly.
pub const DIRECT_CHECK_MAX_K: usize = 20_000;

#[derive(Clone, Debug, Serialize)]
pub struct OuterObstructionReport {
    pub n: usize,
    pub k_n: String,
    /// `#{terms of N(g(n), g(n+J)) strictly below g(n) g(n+J)}`.
    pub strict_count: u64,
    pub count_ok: bool,
    pub lambda_ok: bool,
    /// `(N(1, x_out)_{k_n}, c_{k_n}(X))` when `k_n` is small enough.
    pub direct: Option<(String, String)>,
    #[serde(serialize_with = "serialize_rational")]
    pub y_out: Rational,
    pub holds: bool,
}

/// Certifies `y_out_n <= c_X(x_out_n)` through index
/// `k_n = (g(n)+1)(g(n+J)+1)/2 - 1`: the strict count of `N(g(n), g(n+J))`
/// below `g(n) g(n+J)` is at most `k_n`, and `Lambda_n` bounds `c_{k_n}(X)`
/// by `g(n) + g(n+J)`.
pub fn verify_outer_obstruction(f: &RecurrenceFamily, n: usize) -> Result<OuterObstructionReport> {
    let (a, b) = (f.g(n), f.g(n + f.j));
    let k_n: BigInt = (&a + 1) * (&b + 1) / 2 - 1;
    let (ai, bi) = (a.to_u64().ok_or(Error::Overflow("g(n)"))?, b.to_u64().ok_or(Error::Overflow("g(n+J)"))?);
    let prod = ai.checked_mul(bi).ok_or(Error::Overflow("g(n) g(n+J)"))?;
    let strict_count = ellipsoid_count_below(ai, bi, prod);
    let count_ok = BigInt::from(strict_count) <= k_n;
    let lambda_ok = verify_lambda(f, n)?.ok;
    let (_, outer) = corners(f, n);
    let mut direct = None;
    let mut direct_ok = true;
    if let Some(k) = k_n.to_usize().filter(|&k| k <= DIRECT_CHECK_MAX_K) {
        let caps = ech_convex_toric(&f.expansion(), k + 1)?;
        let ell = ellipsoid_prefix(&Rational::one(), &outer.x, k + 1)?;
        let (nv, cv) = (ell.value(k), caps.value(k));
        direct_ok = nv >= Rational::from_integer(b.clone()) && cv <= Rational::from_integer(&a + &b) && &nv / &cv >= outer.y;
        direct = Some((crate::numeric::format_rational(&nv), crate::numeric::format_rational(&cv)));
    }
    Ok(OuterObstructionReport {
        n,
        k_n: k_n.to_string(),
        strict_count,
        count_ok,
        lambda_ok,
        direct,
        holds: count_ok && lambda_ok && direct_ok && !outer.y.is_negative(),
        y_out: outer.y,
    })
}
