//! One PASS/FAIL line per acceptance criterion, each with its time limit.
//! Run with `cargo test -p toric-ech --test acceptance -- --nocapture`.

use num_traits::{One, Signed, ToPrimitive};
use rand::{rngs::StdRng, Rng, SeedableRng};
use std::time::{Duration, Instant};
use toric_ech::atf::{contains_ellipsoid_triangle, fills_triangle, run_recursion};
use toric_ech::capacities::{ball, ball_sum, ech_convex_toric, seq_sub};
use toric_ech::embedfn::{accumulation_point, detect_corners, sample_embedding_function, staircase_obstruction};
use toric_ech::latticepaths::{ck_via_paths, verify_lambda, ConvexRegion};
use toric_ech::numeric::{
    check_weight_identities, int, negative_weight_expansion, rat, solve_accumulation_quadratic, NegativeWeightExpansion,
    QuadraticSurd, Rational,
};
use toric_ech::numtheory::{
    c_theta_pair_series, d_of_t, fit_gamma, quasipolynomial_test, reflexive_check, scaled_reflexive_test, SurdPair,
};
use toric_ech::polygon::{fano_domains, other_reflexive_polygons};
use toric_ech::staircases::{corners, families, family_by_name, staircase_graph, verify_outer_obstruction};

type Outcome = std::result::Result<(), String>;
type Values = std::result::Result<Vec<Rational>, String>;
/// Number, description, time budget in seconds, check.
type Criterion = (u32, &'static str, u64, fn() -> Outcome);

fn nwe(s: &str) -> NegativeWeightExpansion {
    NegativeWeightExpansion::parse(s).unwrap()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

const OUTER_N_MAX: usize = 12;
const LAMBDA_N_MAX: usize = 20;
const IDENTITY_N_MAX: usize = 200;
const ATF_STEPS: usize = 30;
const PATH_K_MAX: usize = 15;
const POLYDISK_K_MAX: usize = 50;
const GRAPH_COUNT: usize = 50_000;
const OBSTRUCTION_COUNT: usize = 100_000;
const DEFECT_N_MAX: u64 = 300;
const PAIR_SUM_N_MAX: u64 = 200;
const SIGN_N_MAX: u64 = 2000;
const RANDOM_WEIGHTS: usize = 1000;

fn table_accumulation_points() -> Outcome {
    let listed = [
        ("(3)", QuadraticSurd::from_i64(7, 3, 5, 2)),
        ("(4;2,2)", QuadraticSurd::from_i64(3, 2, 2, 1)),
        ("(3;1,1,1)", QuadraticSurd::from_i64(2, 1, 3, 1)),
        ("(3;1,1,1,1)", QuadraticSurd::from_i64(3, 1, 5, 2)),
        ("(3;1)", QuadraticSurd::from_i64(3, 2, 2, 1)),
        ("(3;1,1)", QuadraticSurd::from_i64(5, 1, 21, 2)),
    ];
    for (case, surd) in listed {
        let got = accumulation_point(&nwe(case)).ok_or(format!("{case}: no accumulation point"))?;
        ensure(got == surd, || format!("{case}: {got} != {surd}"))?;
    }
    Ok(())
}

fn appendix_example() -> Outcome {
    let x = nwe("(4;2,1)");
    let a0 = accumulation_point(&x).ok_or("no accumulation point")?;
    ensure(a0.to_decimal(6) == "5.17022", || format!("a0 = {}", a0.to_decimal(12)))?;
    ensure(x.per() == int(9) && x.vol() == int(11), || format!("per = {}, vol = {}", x.per(), x.vol()))
}

fn outer_obstruction() -> Outcome {
    for f in families() {
        for n in 0..=OUTER_N_MAX {
            let r = verify_outer_obstruction(f, n).map_err(|e| format!("{} n={n}: {e}", f.name))?;
            ensure(r.holds, || format!("{} n={n}: {r:?}", f.name))?;
        }
    }
    let r = verify_outer_obstruction(family_by_name("(3)").unwrap(), 1).map_err(|e| e.to_string())?;
    let (n_k, c_k) = r.direct.clone().ok_or("no direct capacities at n = 1")?;
    let ratio = n_k.parse::<Rational>().map_err(|e| e.to_string())? / c_k.parse::<Rational>().map_err(|e| e.to_string())?;
    ensure(r.k_n == "2" && ratio == rat(2, 3) && r.y_out == rat(2, 3), || format!("(3) n=1: {r:?}"))
}

fn lattice_path_families() -> Outcome {
    for f in families() {
        for n in 0..=LAMBDA_N_MAX {
            let c = verify_lambda(f, n).map_err(|e| format!("{} n={n}: {e}", f.name))?;
            ensure(c.ok, || format!("{} n={n}: {:?}", f.name, c.diagnostics))?;
        }
    }
    Ok(())
}

fn identity_suite() -> Outcome {
    for f in families() {
        let bad = f.identity_failures(IDENTITY_N_MAX);
        ensure(bad.is_empty(), || format!("{}: {}", f.name, bad.join("; ")))?;
        let rows = f.table_consistency_failures();
        ensure(rows.is_empty(), || format!("{}: table rows {rows:?}", f.name))?;
    }
    Ok(())
}

fn atf_recursion() -> Outcome {
    for f in families() {
        let states = run_recursion(f, ATF_STEPS).map_err(|e| e.to_string())?;
        ensure(states.len() == ATF_STEPS + 1, || format!("{}: {} states", f.name, states.len()))?;
        for st in &states {
            let inside = contains_ellipsoid_triangle(st).map_err(|e| e.to_string())?;
            let full = fills_triangle(st).map_err(|e| e.to_string())?;
            ensure(inside && full == (f.j == 2), || format!("{} n={}: inside {inside}, full {full}", f.name, st.n))?;
        }
    }
    Ok(())
}

fn polydisk(a: i64, b: i64, k: i64) -> Rational {
    let best = (0..=k)
        .flat_map(|m| (0..=k).map(move |n| (m, n)))
        .filter(|&(m, n)| (m + 1) * (n + 1) > k)
        .map(|(m, n)| a * m + b * n)
        .min()
        .unwrap();
    int(best)
}

fn oracle_equivalence() -> Outcome {
    for (label, p) in fano_domains() {
        let greedy = negative_weight_expansion(&p).map_err(|e| e.to_string())?;
        let region = ConvexRegion::from_polygon(&p).map_err(|e| e.to_string())?;
        let paths: Vec<Rational> = (0..=PATH_K_MAX)
            .map(|k| ck_via_paths(&region, k).map_err(|e| format!("{label} k={k}: {e}")))
            .collect::<Values>()?;
        // the greedy expansion can differ from the label; both describe the domain
        for x in [nwe(label), greedy] {
            let caps = ech_convex_toric(&x, PATH_K_MAX + 1).map_err(|e| e.to_string())?;
            let raw = seq_sub(
                &ball(x.b(), 40 * (PATH_K_MAX + 1)).map_err(|e| e.to_string())?,
                &ball_sum(x.parts(), 30 * (PATH_K_MAX + 1)).map_err(|e| e.to_string())?,
                20 * (PATH_K_MAX + 1),
            )
            .map_err(|e| e.to_string())?;
            for (k, path) in paths.iter().enumerate() {
                ensure(caps.value(k) == *path && raw.value(k) == *path, || {
                    format!("{label} as {x}, k={k}: {} / {} vs paths {path}", caps.value(k), raw.value(k))
                })?;
            }
        }
    }
    let square = ech_convex_toric(&nwe("(4;2,2)"), POLYDISK_K_MAX + 1).map_err(|e| e.to_string())?;
    for k in 0..=POLYDISK_K_MAX {
        ensure(square.value(k) == polydisk(2, 2, k as i64), || format!("polydisk k={k}: {}", square.value(k)))?;
    }
    Ok(())
}

fn graph_vs_sampling() -> Outcome {
    let f = family_by_name("(3)").unwrap();
    let x = f.expansion();
    let (lo, hi, step) = (int(1), rat(68, 10), rat(1, 100));
    let samples = sample_embedding_function(&x, &lo, &hi, &step, GRAPH_COUNT).map_err(|e| e.to_string())?;
    let graph = staircase_graph(f);
    for s in &samples {
        let g = graph.value_at(&s.a).map_err(|e| e.to_string())?;
        ensure(s.value <= g, || format!("a = {}: sample {} above graph {g}", s.a, s.value))?;
    }
    let on_grid = |a: &Rational| ((a - &lo) / &step).is_integer() && *a <= hi;
    let mut checked = 0;
    for c in graph.corners_up_to(&hi).iter().filter(|c| on_grid(&c.x)) {
        let s = samples.iter().find(|s| s.a == c.x).ok_or(format!("corner {} not sampled", c.x))?;
        ensure(s.value == c.y, || format!("corner a = {}: sample {} vs {}", c.x, s.value, c.y))?;
        checked += 1;
    }
    ensure(checked >= 4, || format!("only {checked} corners on the grid"))?;
    let found = detect_corners(&samples, &rat(1, 100));
    for want in [int(2), int(4), int(5), rat(25, 4)] {
        ensure(found.iter().any(|c| (&c.a - &want).abs() <= step), || {
            format!("corner {want} not detected among {:?}", found.iter().map(|c| c.a.to_string()).collect::<Vec<_>>())
        })?;
    }
    let (inner, _) = corners(f, 2);
    ensure(inner.x == rat(25, 4), || format!("inner corner n=2 at {}", inner.x))
}

fn obstruction_gap() -> Outcome {
    let radius = rat(1, 10);
    for (case, gap) in [("(4;2,1)", true), ("(3)", false), ("(4;2,2)", false), ("(4;1,1,1,1)", false)] {
        let r = staircase_obstruction(&nwe(case), OBSTRUCTION_COUNT, &radius).map_err(|e| format!("{case}: {e}"))?;
        ensure(r.gap_positive == gap, || format!("{case}: gap_positive = {}", r.gap_positive))?;
    }
    Ok(())
}

fn number_theory() -> Outcome {
    for f in families() {
        let p = SurdPair::from_expansion(&f.expansion()).map_err(|e| e.to_string())?;
        let per = p.per.to_integer().to_u64().ok_or("per")?;
        let sums = c_theta_pair_series(&p.a0().map_err(|e| e.to_string())?, DEFECT_N_MAX).map_err(|e| e.to_string())?;
        for n in 0..=DEFECT_N_MAX {
            let d = d_of_t(&p, n * per);
            ensure(d == -sums[n as usize].clone(), || format!("{} n={n}: d = {d}", f.name))?;
        }
        let a0 = f.a0();
        let trace = a0.checked_add(&a0.recip().map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        if trace.to_rational().is_some_and(|t| t.is_integer()) {
            let s = c_theta_pair_series(&a0, PAIR_SUM_N_MAX).map_err(|e| e.to_string())?;
            // the k = 0 term contributes -1, every other term cancels
            ensure(s.iter().all(|v| *v == -Rational::one()), || format!("{}: pair sums not constant", f.name))?;
        }
    }
    for (trace, q) in [(rat(59, 11), 11), (rat(61, 9), 9)] {
        let (theta, _) = solve_accumulation_quadratic(&trace).ok_or("no root")?;
        let s = c_theta_pair_series(&theta, SIGN_N_MAX).map_err(|e| e.to_string())?;
        ensure(s.iter().all(|v| (v * int(q)).is_integer()), || format!("{trace}: denominators"))?;
        ensure(s.iter().any(|v| v.is_positive()) && s.iter().any(|v| v.is_negative()), || format!("{trace}: one sign"))?;
    }
    let fit = fit_gamma(&nwe("(3;1,1,1,1,1)"), 200).map_err(|e| e.to_string())?;
    ensure(fit.modulus == 4 && fit.gamma == vec![int(1), rat(3, 8), rat(1, 2), rat(3, 8)], || format!("{fit:?}"))
}

fn reflexivity() -> Outcome {
    let domains = fano_domains();
    let others = other_reflexive_polygons();
    ensure(domains.len() + others.len() == 16, || "catalogue size".into())?;
    for (label, p) in &domains {
        ensure(reflexive_check(p), || format!("{label} not reflexive"))?;
    }
    for (label, p) in &others {
        ensure(reflexive_check(p), || format!("{label:?} not reflexive"))?;
    }
    let mut labels: Vec<&str> = domains.iter().map(|(l, _)| *l).collect();
    labels.extend(others.iter().filter_map(|(l, _)| *l));
    labels.extend(["(4;2,1)", "(2;1,1)", "(6;3,3)", "(5;2,1)"]);
    labels.dedup();
    let mut compared = 0;
    for l in labels {
        let x = nwe(l);
        let Ok(pair) = SurdPair::from_expansion(&x) else { continue };
        let quasi = quasipolynomial_test(&pair).map_err(|e| e.to_string())?;
        let scaled = scaled_reflexive_test(&x).map_err(|e| format!("{l}: {e}"))?;
        ensure(quasi == scaled, || format!("{l}: quasipolynomial {quasi}, scaled {scaled}"))?;
        compared += 1;
    }
    ensure(compared >= 8, || format!("only {compared} expansions compared"))
}

fn weight_expansions() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    for _ in 0..RANDOM_WEIGHTS {
        let q: i64 = rng.gen_range(1..=10_000);
        let p: i64 = rng.gen_range(q..=40 * q);
        let a = rat(p, q);
        ensure(check_weight_identities(&a), || format!("identities fail at {a}"))?;
    }
    Ok(())
}

#[test]
fn acceptance() {
    let criteria: Vec<Criterion> = vec![
        (1, "accumulation points match the table", 1, table_accumulation_points),
        (2, "(4;2,1): a0 = 5.17022, per = 9, vol = 11", 1, appendix_example),
        (3, "outer corners obstruct, n <= 12", 120, outer_obstruction),
        (4, "lattice path families, n <= 20", 60, lattice_path_families),
        (5, "recurrence identities n <= 200 and table consistency", 10, identity_suite),
        (6, "ATF recursion, 30 steps from each seed", 10, atf_recursion),
        (7, "subtraction capacities equal lattice path minima", 120, oracle_equivalence),
        (8, "(3): samples below the staircase graph, corners found", 300, graph_vs_sampling),
        (9, "obstruction gap signs at 10^5 capacities", 300, obstruction_gap),
        (10, "number theory identities and Gamma fit", 180, number_theory),
        (11, "reflexive polygons and the scaled test", 5, reflexivity),
        (12, "weight expansion identities on 1000 random rationals", 5, weight_expansions),
    ];
    let mut failed = Vec::new();
    for (id, what, limit, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let outcome = outcome.and_then(|_| {
            ensure(took <= Duration::from_secs(limit), || format!("took {:.2}s, limit {limit}s", took.as_secs_f64()))
        });
        match &outcome {
            Ok(()) => println!("criterion {id:>2}: PASS ({:.2}s / {limit}s) {what}", took.as_secs_f64()),
            Err(e) => {
                println!("criterion {id:>2}: FAIL ({:.2}s / {limit}s) {what}: {e}", took.as_secs_f64());
                failed.push(id);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
