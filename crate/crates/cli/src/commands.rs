use crate::output::{Cell, Col, Table};
use crate::{AtfAction, CliError, Command, Domain};
use std::path::PathBuf;
use toric_ech::atf::{contains_ellipsoid_triangle, fills_triangle, pregame, run_recursion, BaseDiagram, Vector};
use toric_ech::capacities::ech_convex_toric;
use toric_ech::embedfn::{
    accumulation_point, detect_corners, sample_embedding_function, staircase_obstruction,
};
use toric_ech::latticepaths::{lambda_family, verify_lambda, ConvexRegion};
use toric_ech::numeric::{parse_rational, solve_accumulation_quadratic, weight_expansion, NegativeWeightExpansion, Rational};
use toric_ech::numtheory::{
    c_theta_pair_series, c_theta_series, cap_values, d_series, ehrhart_triangle, fit_gamma, leading_terms,
    quasipolynomial_test, reflexive_check, scaled_reflexive_test, SurdPair,
};
use toric_ech::obstructions::{exact_c_at, Certificate};
use toric_ech::polygon::{fano_domains, other_reflexive_polygons};
use toric_ech::staircases::{corners, families, family_by_name, staircase_graph, RecurrenceFamily};

pub struct Outcome {
    pub table: Table,
    pub artifacts: Vec<(PathBuf, String)>,
    /// Set when the output was produced but a verification inside it failed.
    pub failure: Option<String>,
}

impl From<Table> for Outcome {
    fn from(table: Table) -> Self {
        Outcome { table, artifacts: Vec::new(), failure: None }
    }
}

type Res<T> = Result<T, CliError>;

fn rational(name: &str, s: &str) -> Res<Rational> {
    parse_rational(s).map_err(|e| CliError::config(format!("--{name}: {e}")))
}

fn family(name: &str) -> Res<&'static RecurrenceFamily> {
    Ok(family_by_name(name)?)
}

fn expansion(d: &Domain) -> Res<NegativeWeightExpansion> {
    match (&d.case, &d.expansion) {
        (Some(c), None) => Ok(family(c)?.expansion()),
        (None, Some(e)) => NegativeWeightExpansion::parse(e).map_err(|e| CliError::config(format!("--expansion: {e}"))),
        _ => Err(CliError::config("give exactly one of --case and --expansion")),
    }
}

fn vector(v: &Vector) -> String {
    format!("({}, {})", v[0], v[1])
}

fn vertices(d: &BaseDiagram) -> String {
    d.vertices().iter().map(|p| format!("({}, {})", p[0], p[1])).collect::<Vec<_>>().join(" ")
}

fn rays(d: &BaseDiagram) -> String {
    d.rays()
        .iter()
        .map(|r| {
            let p = &d.vertices()[r.anchor];
            format!("({}, {}) -> {} x{}", p[0], p[1], vector(&r.direction), r.nodes)
        })
        .collect::<Vec<_>>()
        .join("; ")
}

pub fn run(cmd: &Command) -> Res<Outcome> {
    match cmd {
        Command::Capacities { domain, count } => capacities(domain, *count),
        Command::Weights { a } => weights(a),
        Command::Embedfn { domain, amin, amax, astep, count, corner_tol } => {
            embedfn(domain, amin, amax, astep, *count, corner_tol.as_deref())
        }
        Command::Accpoint { domain } => accpoint(domain),
        Command::Obstruction { domain, count, radius, at, dmax } => obstruction(domain, *count, radius, at.as_deref(), *dmax),
        Command::Corners { case, n, nmax } => corner_table(&case.case, *n, *nmax),
        Command::Graph { case, amax } => graph(&case.case, amax),
        Command::Identities { case, nmax } => identities(case.as_deref(), *nmax),
        Command::Latticepath { case, n, svg } => latticepath(&case.case, *n, svg.clone()),
        Command::Atf { action: AtfAction::Replay { case, svg_dir } } => replay(&case.case, svg_dir.clone()),
        Command::Atf { action: AtfAction::Recurse { case, steps } } => recurse(&case.case, *steps),
        Command::Ctheta { domain, trace, nmax, pair } => ctheta(domain, trace.as_deref(), *nmax, *pair),
        Command::Ehrhart { domain, tmax } => ehrhart(domain, *tmax),
        Command::Capfn { domain, tmax } => capfn(domain, *tmax),
        Command::Reflexive { domain } => reflexive(domain),
        Command::Rerun { .. } => Err(CliError::config("rerun is handled before dispatch")),
    }
}

fn capacities(d: &Domain, count: usize) -> Res<Outcome> {
    let x = expansion(d)?;
    let caps = ech_convex_toric(&x, count)?;
    let mut t = Table::new(vec![Col::Plain("k"), Col::Exact("capacity")]);
    for k in 0..count.min(caps.len()) {
        t.rows.push(vec![Cell::of(k), Cell::rat(&caps.value(k))]);
    }
    t.diag("expansion", x.to_string());
    t.diag("certified_len", caps.certified_len());
    Ok(t.into())
}

fn weights(a: &str) -> Res<Outcome> {
    let a = rational("a", a)?;
    let w = weight_expansion(&a)?;
    let mut t = Table::new(vec![Col::Plain("block"), Col::Exact("weight"), Col::Plain("multiplicity")]);
    for (i, (v, m)) in w.blocks().iter().enumerate() {
        t.rows.push(vec![Cell::of(i), Cell::rat(v), Cell::of(m)]);
    }
    t.diag("length", w.len());
    t.diag("sum_of_squares_equals_a", w.sum_of_squares() == a);
    t.diag("identities_hold", toric_ech::numeric::check_weight_identities(&a));
    Ok(t.into())
}

fn embedfn(d: &Domain, amin: &str, amax: &str, astep: &str, count: usize, tol: Option<&str>) -> Res<Outcome> {
    let x = expansion(d)?;
    let (lo, hi, step) = (rational("amin", amin)?, rational("amax", amax)?, rational("astep", astep)?);
    let samples = sample_embedding_function(&x, &lo, &hi, &step, count)?;
    let mut t = Table::new(vec![
        Col::Exact("a"),
        Col::Exact("value"),
        Col::Plain("witness_k"),
        Col::Plain("certified"),
        Col::Plain("below_volume"),
    ]);
    for s in &samples {
        t.rows.push(vec![Cell::rat(&s.a), Cell::rat(&s.value), Cell::of(s.witness_k), Cell::of(s.certified), Cell::of(s.below_volume)]);
    }
    if let Some(tol) = tol {
        t.diag("corners", detect_corners(&samples, &rational("corner-tol", tol)?));
    }
    t.diag("expansion", x.to_string());
    Ok(t.into())
}

fn accpoint(d: &Domain) -> Res<Outcome> {
    let x = expansion(d)?;
    let a0 = accumulation_point(&x).ok_or_else(|| CliError::config(format!("{x} has no accumulation point")))?;
    let mut t = Table::new(vec![Col::Exact("a0"), Col::Exact("per"), Col::Exact("vol"), Col::Exact("k")]);
    t.rows.push(vec![Cell::surd(&a0), Cell::rat(&x.per()), Cell::rat(&x.vol()), Cell::rat(&x.k_coefficient())]);
    Ok(t.into())
}

fn obstruction(d: &Domain, count: usize, radius: &str, at: Option<&str>, dmax: u64) -> Res<Outcome> {
    let x = expansion(d)?;
    if let Some(a) = at {
        let a = rational("at", a)?;
        let v = exact_c_at(&x, &a, dmax)?;
        let mut t = Table::new(vec![Col::Exact("a"), Col::Exact("value"), Col::Plain("regime"), Col::Plain("certificate")]);
        let cert = match &v.certificate {
            Certificate::Volume => "volume".to_string(),
            Certificate::Class(c) => c.to_string(),
        };
        let regime = serde_json::to_value(v.regime).expect("regime");
        t.rows.push(vec![Cell::rat(&a), Cell::surd(&v.value), Cell::of(regime.as_str().unwrap_or("")), Cell::of(cert)]);
        t.diag("d_max", dmax);
        return Ok(t.into());
    }
    let r = staircase_obstruction(&x, count, &rational("radius", radius)?)?;
    let mut t = Table::new(vec![Col::Exact("probe"), Col::Exact("value"), Col::Plain("witness_k"), Col::Exact("bound_at_a0")]);
    for p in &r.probes {
        t.rows.push(vec![Cell::rat(&p.a), Cell::rat(&p.value), Cell::of(p.witness_k), Cell::surd(&p.bound_at_a0)]);
    }
    t.diag("a0", r.a0.to_string());
    t.diag("volume_value", r.volume_value.to_string());
    t.diag("best_bound_at_a0", r.best_bound_at_a0.to_string());
    t.diag("gap_positive", r.gap_positive);
    Ok(t.into())
}

fn corner_table(case: &str, n: Option<usize>, nmax: usize) -> Res<Outcome> {
    let f = family(case)?;
    let range = match n {
        Some(n) => n..=n,
        None => 0..=nmax,
    };
    let mut t = Table::new(vec![Col::Plain("n"), Col::Plain("kind"), Col::Exact("x"), Col::Exact("y")]);
    for n in range {
        let (inner, outer) = corners(f, n);
        for c in [inner, outer] {
            let kind = serde_json::to_value(c.kind).expect("kind");
            t.rows.push(vec![Cell::of(n), Cell::of(kind.as_str().unwrap_or("")), Cell::rat(&c.x), Cell::rat(&c.y)]);
        }
    }
    Ok(t.into())
}

fn graph(case: &str, amax: &str) -> Res<Outcome> {
    let f = family(case)?;
    let amax = rational("amax", amax)?;
    let g = staircase_graph(f);
    let mut t = Table::new(vec![Col::Exact("from_a"), Col::Exact("from_value"), Col::Exact("to_a"), Col::Exact("to_value"), Col::Plain("segment")]);
    for (a, b, kind) in g.segments(&amax) {
        let kind = serde_json::to_value(kind).expect("kind");
        t.rows.push(vec![Cell::rat(&a.x), Cell::rat(&a.y), Cell::rat(&b.x), Cell::rat(&b.y), Cell::of(kind.as_str().unwrap_or(""))]);
    }
    t.diag("a0", f.a0().to_string());
    Ok(t.into())
}

fn identities(case: Option<&str>, nmax: usize) -> Res<Outcome> {
    let list: Vec<&'static RecurrenceFamily> = match case {
        Some(c) => vec![family(c)?],
        None => families().iter().collect(),
    };
    let mut t = Table::new(vec![Col::Plain("case"), Col::Plain("n_max"), Col::Plain("identities"), Col::Plain("table")]);
    let mut failures = Vec::new();
    for f in list {
        let bad = f.identity_failures(nmax);
        let rows = f.table_consistency_failures();
        t.rows.push(vec![Cell::of(f.name), Cell::of(nmax), Cell::of(bad.is_empty()), Cell::of(rows.is_empty())]);
        failures.extend(bad.into_iter().map(|b| format!("{}: {b}", f.name)));
        failures.extend(rows.into_iter().map(|r| format!("{}: table residue {r}", f.name)));
    }
    t.diag("failures", &failures);
    let failure = (!failures.is_empty()).then(|| format!("{} identity failures", failures.len()));
    Ok(Outcome { table: t, artifacts: Vec::new(), failure })
}

fn latticepath(case: &str, n: usize, svg: Option<PathBuf>) -> Res<Outcome> {
    let f = family(case)?;
    let (s, tn, path) = lambda_family(f, n)?;
    let check = verify_lambda(f, n)?;
    let mut t = Table::new(vec![Col::Plain("vertex"), Col::Plain("x"), Col::Plain("y")]);
    for (i, p) in path.vertices().iter().enumerate() {
        t.rows.push(vec![Cell::of(i), Cell::of(p.x), Cell::of(p.y)]);
    }
    t.diag("s", s);
    t.diag("t", tn);
    t.diag("check", &check);
    let mut artifacts = Vec::new();
    if let Some(p) = svg {
        let region = ConvexRegion::from_polygon(&f.omega_polygon())?;
        artifacts.push((p, path.to_svg(Some(&region))));
    }
    let failure = (!check.ok).then(|| format!("{} n={n}: lattice path check failed", f.name));
    Ok(Outcome { table: t, artifacts, failure })
}

fn replay(case: &str, svg_dir: Option<PathBuf>) -> Res<Outcome> {
    let f = family(case)?;
    let p = pregame(f)?;
    let mut t = Table::new(vec![Col::Plain("step"), Col::Plain("move"), Col::Plain("vertices"), Col::Plain("rays"), Col::Exact("area2")]);
    let mut frames = vec![("start".to_string(), p.start.clone())];
    frames.extend(p.steps.iter().cloned());
    frames.push(("lattice equivalence onto the recursion seed".to_string(), p.seed.clone()));
    let mut artifacts = Vec::new();
    for (i, (what, d)) in frames.iter().enumerate() {
        t.rows.push(vec![Cell::of(i), Cell::of(what), Cell::of(vertices(d)), Cell::of(rays(d)), Cell::rat(&d.area2())]);
        if let Some(dir) = &svg_dir {
            artifacts.push((dir.join(format!("step_{i:02}.svg")), d.to_svg()));
        }
    }
    if let Some(dir) = &svg_dir {
        std::fs::create_dir_all(dir).map_err(|e| CliError::config(format!("{}: {e}", dir.display())))?;
    }
    t.diag("case", f.name);
    t.diag("seed", &p.seed);
    Ok(Outcome { table: t, artifacts, failure: None })
}

fn recurse(case: &str, steps: usize) -> Res<Outcome> {
    let f = family(case)?;
    let states = run_recursion(f, steps)?;
    let mut t = Table::new(vec![
        Col::Plain("n"),
        Col::Exact("a"),
        Col::Exact("b"),
        Col::Exact("c"),
        Col::Exact("d"),
        Col::Plain("u"),
        Col::Plain("v"),
        Col::Plain("w"),
        Col::Plain("contains_triangle"),
        Col::Plain("fills_triangle"),
    ]);
    for st in &states {
        t.rows.push(vec![
            Cell::of(st.n),
            Cell::rat(&st.a),
            Cell::rat(&st.b),
            Cell::rat(&st.c),
            st.d.as_ref().map_or_else(Cell::empty_exact, Cell::rat),
            Cell::of(vector(&st.u)),
            Cell::of(vector(&st.v)),
            Cell::of(vector(&st.w)),
            Cell::of(contains_ellipsoid_triangle(st)?),
            Cell::of(fills_triangle(st)?),
        ]);
    }
    t.diag("case", f.name);
    t.diag("all_checks_passed", true);
    Ok(t.into())
}

fn ctheta(d: &Domain, trace: Option<&str>, nmax: u64, pair: bool) -> Res<Outcome> {
    let theta = match trace {
        Some(k) if d.case.is_none() && d.expansion.is_none() => {
            let k = rational("trace", k)?;
            solve_accumulation_quadratic(&k).map(|(hi, _)| hi).ok_or_else(|| CliError::config(format!("x^2 - {k} x + 1 has no real root")))?
        }
        Some(_) => return Err(CliError::config("give --trace or a domain, not both")),
        None => {
            let x = expansion(d)?;
            accumulation_point(&x).ok_or_else(|| CliError::config(format!("{x} has no accumulation point")))?
        }
    };
    let mut t = Table::new(vec![Col::Plain("n"), Col::Exact(if pair { "pair_sum" } else { "c_theta" })]);
    if pair {
        for (n, v) in c_theta_pair_series(&theta, nmax)?.iter().enumerate() {
            t.rows.push(vec![Cell::of(n), Cell::rat(v)]);
        }
    } else {
        for (n, v) in c_theta_series(&theta, nmax).iter().enumerate() {
            t.rows.push(vec![Cell::of(n), Cell::surd(v)]);
        }
    }
    t.diag("theta", theta.to_string());
    Ok(t.into())
}

fn ehrhart(d: &Domain, tmax: u64) -> Res<Outcome> {
    let x = expansion(d)?;
    let pair = SurdPair::from_expansion(&x)?;
    let defects = d_series(&pair, tmax);
    let mut t = Table::new(vec![Col::Plain("t"), Col::Plain("count"), Col::Exact("defect")]);
    for (i, dv) in defects.iter().enumerate() {
        t.rows.push(vec![Cell::of(i), Cell::of(ehrhart_triangle(&pair, i as u64)), Cell::rat(dv)]);
    }
    t.diag("u", pair.u.to_string());
    t.diag("v", pair.v.to_string());
    t.diag("quasipolynomial_test", quasipolynomial_test(&pair)?);
    Ok(t.into())
}

fn capfn(d: &Domain, tmax: u64) -> Res<Outcome> {
    let x = expansion(d)?;
    let values = cap_values(&x, tmax)?;
    let mut t = Table::new(vec![Col::Plain("t"), Col::Plain("cap")]);
    for (i, v) in values.iter().enumerate() {
        t.rows.push(vec![Cell::of(i), Cell::of(v)]);
    }
    match fit_gamma(&x, tmax) {
        Ok(q) => t.diag("quasipolynomial", &q),
        Err(e) => {
            let (quad, lin) = leading_terms(&x);
            t.diag("quasipolynomial_unavailable", e.to_string());
            t.diag("quadratic", toric_ech::numeric::format_rational(&quad));
            t.diag("linear", toric_ech::numeric::format_rational(&lin));
        }
    }
    Ok(t.into())
}

fn reflexive(d: &Domain) -> Res<Outcome> {
    let mut t = Table::new(vec![
        Col::Plain("label"),
        Col::Plain("polygon"),
        Col::Plain("reflexive"),
        Col::Plain("scaled_test"),
        Col::Plain("quasipolynomial_test"),
    ]);
    let tests = |x: &NegativeWeightExpansion| -> Res<(String, String)> {
        let scaled = scaled_reflexive_test(x).map(|b| b.to_string()).unwrap_or_else(|_| "n/a".into());
        let quasi = match SurdPair::from_expansion(x) {
            Ok(p) => quasipolynomial_test(&p)?.to_string(),
            Err(_) => "n/a".into(),
        };
        Ok((scaled, quasi))
    };
    if d.case.is_some() || d.expansion.is_some() {
        let x = expansion(d)?;
        let (scaled, quasi) = tests(&x)?;
        let poly = toric_ech::numtheory::polygon_for_expansion(&x).map(|p| p.to_string()).unwrap_or_default();
        t.rows.push(vec![Cell::of(&x), Cell::of(poly), Cell::of(""), Cell::of(scaled), Cell::of(quasi)]);
        return Ok(t.into());
    }
    let mut all: Vec<(Option<&str>, _)> = fano_domains().into_iter().map(|(l, p)| (Some(l), p)).collect();
    all.extend(other_reflexive_polygons());
    for (label, p) in all {
        let (scaled, quasi) = match label {
            Some(l) => tests(&NegativeWeightExpansion::parse(l)?)?,
            None => ("n/a".into(), "n/a".into()),
        };
        t.rows.push(vec![Cell::of(label.unwrap_or("")), Cell::of(&p), Cell::of(reflexive_check(&p)), Cell::of(scaled), Cell::of(quasi)]);
    }
    Ok(t.into())
}
