//! Acceptance criteria 1-8, one pass/fail line each.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the report.

use std::f64::consts::PI;
use std::time::Instant;

use henlab::bifurcation::{
    analytic_curve, continue_codim1, fixed_point_resonance, island_scan, nf13_coefficients, pitchfork_local_analysis,
    solve_at_m2, Branch, Condition, Continuation, ContinuationSettings, CurveId, IslandSettings, PitchforkKind,
    PitchforkSettings,
};
use henlab::manifolds::{certify_lamb_stenkin, CycleThresholds, GrowthSettings};
use henlab::maps::{
    verify_conservativity, verify_reversibility, verify_second_iterate_identity, Sampler,
};
use henlab::orbits::{find_periodic, grid_seed, pair_match, symmetric_search, GridOptions, NewtonSettings, Orbit, OrbitClass};
use henlab::{CubicSign, CubicSign::*, Family, MapSpec, Point, Region};
use num_complex::Complex64;

/// Outcome of one criterion: every named check with its verdict.
struct Outcome {
    checks: Vec<(String, bool)>,
}

impl Outcome {
    fn new() -> Self {
        Outcome { checks: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        self.checks.push((what.into(), ok));
    }

    fn pass(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.1)
    }
}

fn square() -> Region {
    Region::new(-2.0, 2.0, -2.0, 2.0)
}

fn inventory(spec: &MapSpec, q: usize) -> Vec<Orbit> {
    grid_seed(spec, q, &square(), (161, 161), &GridOptions::default())
}

fn count(orbits: &[Orbit], class: impl Fn(OrbitClass) -> bool, symmetric: bool) -> usize {
    orbits.iter().filter(|o| class(o.class) && o.symmetric == symmetric).count()
}

fn continuation_settings(direction: (f64, f64)) -> ContinuationSettings {
    ContinuationSettings {
        bounds: Some(Region::new(-3.0, 3.0, -3.0, 4.0)),
        arclength: 6.0,
        steps: 3000,
        direction,
        ..Default::default()
    }
}

fn continued(base: &MapSpec, q: usize, c: Condition, m2: f64, p: f64, m1: f64, dir: (f64, f64)) -> Continuation {
    let start = solve_at_m2(base, q, c, m2, Point::new(p, p), m1).expect("start on the curve");
    continue_codim1(base, q, c, &start, &continuation_settings(dir)).expect("continuation")
}

fn criterion_1() -> Outcome {
    let mut o = Outcome::new();
    let sampler = Sampler::new(square(), 10_000).with_seed(1);
    for family in [Family::Qr, Family::CrossformSq] {
        for eps in [0.05, 0.3] {
            for d in [Plus, Minus] {
                let spec = MapSpec::new(family, d, -0.364, -0.5, eps);
                let r = verify_reversibility(&spec, &sampler, 1e-9);
                o.check(r.pass && r.samples == 10_000, format!("reversibility {family} d={d} eps={eps}: {:.1e}", r.max_residual));
            }
        }
    }
    for d in [Plus, Minus] {
        let r = verify_second_iterate_identity(d, 0.2, -1.25, 0.0, &sampler, 1e-12);
        o.check(r.pass, format!("second-iterate identity d={d}: {:.1e}", r.max_residual));
        let r = verify_conservativity(&MapSpec::h3(d, 0.2, -1.25), &sampler, 1e-10);
        o.check(r.pass, format!("conservativity eps=0 d={d}: {:.1e}", r.max_residual));
        for family in [Family::Qr, Family::CrossformSq] {
            let r = verify_conservativity(&MapSpec::new(family, d, 0.2, -1.25, 0.05), &sampler, 1e-10);
            o.check(!r.pass && r.max_residual > 1e-3, format!("conservativity broken {family} d={d}: {:.1e}", r.max_residual));
        }
    }
    o
}

fn criterion_2() -> Outcome {
    let mut o = Outcome::new();
    let spec = MapSpec::h3(Minus, 0.0, 3.5);
    let r = 1.5f64.sqrt();
    let target = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
    for s in [1.0, -1.0] {
        let f = find_periodic(&spec, 1, Point::new(s * (r + 0.05), s * (r - 0.03)), &NewtonSettings::default());
        let Ok(f) = f else {
            o.check(false, format!("fixed point near {s}(r, r) not found"));
            continue;
        };
        let p = f.start();
        let err = f.multipliers.iter().map(|l| (l - target).norm().min((l - target.conj()).norm())).fold(0.0, f64::max);
        o.check(p.dist(Point::new(s * r, s * r)) < 1e-10, format!("fixed point {s:+}(sqrt 1.5, sqrt 1.5)"));
        o.check(err < 1e-8, format!("multipliers at {s:+}: {err:.1e}"));
    }
    for d in [Plus, Minus] {
        for b in [Branch::M1Pos, Branch::M1Neg] {
            let c = nf13_coefficients(d, -1.0, b).expect("coefficients");
            o.check(c.a02 == Complex64::new(0.0, 0.0), format!("a02(M2=-1) d={d} {b:?}"));
        }
    }
    let h3 = |d| MapSpec::h3(d, 0.0, 0.0);
    let pf = [
        (Plus, continued(&h3(Plus), 3, Condition::Pitchfork, -1.25, 0.2887, 0.048, (0.0, 1.0))),
        (Minus, continued(&h3(Minus), 3, Condition::Pitchfork, -0.8, 0.2582, -0.0344, (0.0, -1.0))),
    ];
    for (d, c) in &pf {
        let gap = c.cusps.iter().map(|k| k.m1.hypot(k.m2 + 1.0)).fold(f64::INFINITY, f64::min);
        o.check(gap < 1e-3, format!("PF3 d={d} cusp at (0,-1): {gap:.1e}"));
    }
    let p3 = [
        (Plus, continued(&h3(Plus), 3, Condition::Parabolic, -1.25, 0.457, 1.0099, (0.0, 1.0))),
        (Minus, continued(&h3(Minus), 3, Condition::Parabolic, -0.8, 0.4728, 0.9002, (0.0, -1.0))),
    ];
    for (d, c) in &p3 {
        let gap = c.distance_to(0.0, -1.0);
        o.check(gap < 1e-3, format!("P3 d={d} reaches (0,-1): {gap:.1e}"));
    }
    o
}

fn criterion_3() -> Outcome {
    let mut o = Outcome::new();
    let c = analytic_curve(CurveId::L13, Plus, -1.25).expect("l13");
    let m1 = c.m1_plus.unwrap_or(f64::NAN);
    o.check((m1 - 0.9141).abs() < 1e-3, format!("analytic l13 M1={m1:.6}"));
    o.check((m1 - 0.915).abs() < 2e-3, "consistent with portrait value 0.915");
    let crossing = |base: MapSpec, m2_start: f64, p: f64, m1: f64, m2: f64| -> Vec<f64> {
        let c = continued(&base, 1, Condition::L13, m2_start, p, m1, (0.0, -1.0));
        c.crossings_m2(m2).iter().map(|s| s.m1).collect()
    };
    let plus = crossing(MapSpec::qr(Plus, 0.0, 0.0, 0.05), -1.1, 0.183, 0.56, -1.25);
    let best = plus.iter().copied().min_by(|a, b| (a - 0.8827).abs().total_cmp(&(b - 0.8827).abs()));
    o.check(best.is_some_and(|m| (m - 0.8827).abs() < 1e-3), format!("perturbed l13 d=+1 at M2=-1.25: {best:?}"));
    let spec = MapSpec::new(Family::CrossformSq, Minus, 0.0, 0.0, 0.05);
    let a = analytic_curve(CurveId::L13, Minus, -0.7).expect("l13");
    let y = a.resonant_points.expect("points")[0].x;
    let minus = crossing(spec, -0.7, y, a.m1_plus.unwrap_or(0.0), -0.8);
    let best = minus.iter().copied().min_by(|a, b| (a - 0.7494).abs().total_cmp(&(b - 0.7494).abs()));
    o.check(best.is_some_and(|m| (m - 0.7494).abs() < 1e-3), format!("perturbed l13 d=-1 at M2=-0.8: {best:?}"));
    o
}

fn pitchfork_kinds(base: MapSpec, bracket: (f64, f64)) -> Vec<PitchforkKind> {
    symmetric_search(&base.with_m1(bracket.0), 3, (-2.0, 2.0), 2001, &NewtonSettings::default())
        .expect("symmetric orbits")
        .iter()
        .filter_map(|s| pitchfork_local_analysis(&base, 3, bracket, s.start(), &PitchforkSettings::default()).ok())
        .map(|r| r.kind)
        .collect()
}

fn is_saddle(c: OrbitClass) -> bool {
    c.is_saddle()
}

fn criterion_4() -> Outcome {
    let mut o = Outcome::new();
    let orbits = inventory(&MapSpec::qr(Plus, 0.08, -1.25, 0.05), 3);
    o.check(count(&orbits, is_saddle, true) >= 1, "symmetric saddle 3-orbit present");
    let sinks: Vec<&Orbit> = orbits.iter().filter(|o| o.class == OrbitClass::Sink && !o.symmetric).collect();
    let sources: Vec<&Orbit> = orbits.iter().filter(|o| o.class == OrbitClass::Source && !o.symmetric).collect();
    let paired = sinks.iter().any(|a| {
        sources.iter().any(|b| {
            pair_match(a, b, 1e-6).is_pair && (a.jacobian_product * b.jacobian_product - 1.0).abs() < 1e-6
        })
    });
    o.check(paired, format!("sink/source pair ({} sinks, {} sources)", sinks.len(), sources.len()));
    let kinds = pitchfork_kinds(MapSpec::qr(Plus, 0.0, -1.25, 0.05), (0.08, 0.15));
    o.check(!kinds.is_empty() && kinds.iter().all(|k| *k == PitchforkKind::Supercritical), format!("pitchfork on [0.08, 0.15]: {kinds:?}"));
    o
}

fn criterion_5() -> Outcome {
    let mut o = Outcome::new();
    let orbits = inventory(&MapSpec::qr(Minus, -0.364, -0.5, 0.3), 3);
    let saddles: Vec<&Orbit> = orbits.iter().filter(|o| o.class.is_saddle() && !o.symmetric).collect();
    o.check(saddles.len() == 2, format!("{} nonsymmetric saddle 3-orbits", saddles.len()));
    if let [a, b] = saddles.as_slice() {
        let (lo, hi) = if a.jacobian_product < b.jacobian_product { (a, b) } else { (b, a) };
        o.check((lo.jacobian_product - 0.995).abs() < 1e-3, format!("J = {:.6}", lo.jacobian_product));
        o.check((hi.jacobian_product - 1.005).abs() < 1e-3, format!("J = {:.6}", hi.jacobian_product));
        let prod = lo.jacobian_product * hi.jacobian_product;
        o.check((prod - 1.0).abs() < 1e-6, format!("product {prod:.9}"));
    }
    let kinds = pitchfork_kinds(MapSpec::qr(Minus, 0.0, -0.8, 0.05), (-0.025, 0.5));
    o.check(!kinds.is_empty() && kinds.iter().all(|k| *k == PitchforkKind::Subcritical), format!("pitchfork at eps=0.05: {kinds:?}"));
    o
}

fn criterion_6() -> Outcome {
    let mut o = Outcome::new();
    let cases: [(CubicSign, f64, bool); 2] = [(Plus, 0.575, true), (Minus, 0.66, false)];
    for (d, m2, symmetric_saddles) in cases {
        match island_scan(&MapSpec::h3(d, 0.0, m2), 5, &IslandSettings::default()) {
            Ok(f) => {
                let elliptic = |c: OrbitClass| c == OrbitClass::Elliptic;
                o.check(f.orbits.len() == 4, format!("d={d} M2={m2}: {} period-5 orbits", f.orbits.len()));
                o.check(count(&f.orbits, is_saddle, symmetric_saddles) == 2, format!("d={d}: two saddles, symmetric={symmetric_saddles}"));
                o.check(count(&f.orbits, elliptic, !symmetric_saddles) == 2, format!("d={d}: two elliptic, symmetric={}", !symmetric_saddles));
            }
            Err(e) => o.check(false, format!("d={d} M2={m2}: {e}")),
        }
    }
    let trace = fixed_point_resonance(1, 5).expect("trace");
    o.check((trace - 2.0 * (2.0 * PI / 5.0).cos()).abs() < 1e-15, format!("trace {trace}"));
    for d in [Plus, Minus] {
        let origin = find_periodic(&MapSpec::h3(d, 0.0, trace), 1, Point::new(0.01, -0.01), &NewtonSettings::default());
        let target = Complex64::from_polar(1.0, 2.0 * PI / 5.0);
        let err = origin.map_or(f64::INFINITY, |f| {
            f.multipliers.iter().map(|l| (l - target).norm().min((l - target.conj()).norm())).fold(0.0, f64::max)
        });
        o.check(err < 1e-10, format!("origin multipliers d={d}: {err:.1e}"));
    }
    o
}

fn criterion_7() -> Outcome {
    let mut o = Outcome::new();
    let spec = MapSpec::qr(Minus, -0.364, -0.5, 0.3);
    let ns = NewtonSettings::default();
    let (s1, s2) = match (
        find_periodic(&spec, 3, Point::new(-0.7974439, 0.2884816), &ns),
        find_periodic(&spec, 3, Point::new(-0.7672034, 0.4312409), &ns),
    ) {
        (Ok(a), Ok(b)) => (a, b),
        _ => {
            o.check(false, "saddles not found");
            return o;
        }
    };
    let growth = GrowthSettings { budget: 10.0, ..Default::default() };
    match certify_lamb_stenkin(&spec, &s1, &s2, &growth, &CycleThresholds::default()) {
        Ok(r) => {
            o.check(r.lamb_stenkin_candidate, "candidate");
            o.check(r.transversal_crossings >= 1, format!("{} transversal crossings", r.transversal_crossings));
            o.check(r.min_angle < 0.05, format!("near-tangent crossing at {:.2e} rad", r.min_angle));
            o.check(r.heteroclinic, format!("heteroclinic check {:?}", r.heteroclinic_check));
        }
        Err(e) => o.check(false, format!("certification failed: {e}")),
    }
    o
}

fn criterion_8() -> Outcome {
    let mut o = Outcome::new();
    let elliptic = |c: OrbitClass| c == OrbitClass::Elliptic;
    // (count, symmetric saddles, symmetric elliptic, nonsymmetric saddles, nonsymmetric elliptic)
    let plus = [(1.2, [0, 0, 0, 0]), (0.98, [1, 1, 0, 0]), (0.83, [1, 1, 0, 0]), (0.03, [2, 0, 0, 2])];
    let minus = [(1.2, [0, 0, 0, 0]), (0.85, [1, 1, 0, 0]), (0.5, [1, 1, 0, 0]), (0.025, [0, 2, 2, 0])];
    for (d, m2, table) in [(Plus, -1.25, plus), (Minus, -0.8, minus)] {
        for (m1, want) in table {
            let orbits = inventory(&MapSpec::h3(d, m1, m2), 3);
            let got = [
                count(&orbits, is_saddle, true),
                count(&orbits, elliptic, true),
                count(&orbits, is_saddle, false),
                count(&orbits, elliptic, false),
            ];
            let n = orbits.len();
            let expect: usize = want.iter().sum();
            o.check(n == expect && got == want, format!("d={d} M1={m1}: {n} orbits {got:?}"));
        }
    }
    o
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("structural identities", criterion_1),
        ("resonant fixed points and cusp", criterion_2),
        ("l13 crossing values", criterion_3),
        ("supercritical pitchfork", criterion_4),
        ("subcritical pitchfork and Jacobians", criterion_5),
        ("degenerate odd-q garlands", criterion_6),
        ("Lamb-Stenkin certification", criterion_7),
        ("conservative orbit counts", criterion_8),
    ];
    let results: Vec<(Outcome, f64)> = std::thread::scope(|s| {
        let handles: Vec<_> = criteria
            .iter()
            .map(|&(_, f)| {
                s.spawn(move || {
                    let t = Instant::now();
                    (f(), t.elapsed().as_secs_f64())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("criterion panicked")).collect()
    });
    let mut failed = Vec::new();
    for (k, ((name, _), (outcome, secs))) in criteria.iter().zip(&results).enumerate() {
        let verdict = if outcome.pass() { "PASS" } else { "FAIL" };
        println!("criterion {}: {verdict} {name} ({secs:.1} s)", k + 1);
        for (what, ok) in &outcome.checks {
            println!("    [{}] {what}", if *ok { "ok" } else { "x" });
        }
        if !outcome.pass() {
            failed.push(k + 1);
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
