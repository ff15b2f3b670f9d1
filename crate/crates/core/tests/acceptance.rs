//! Acceptance criteria 1-11. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use geometa::geom::{
    check_hyperbolic_type, check_linear_axioms, default_t_grid, grid_points, random_triples,
    sample_points, Geodesic, GeodesicSpace, Norm, Point, SpaceKind, SpaceWithGeodesic,
};
use geometa::glformula::{builtin, evaluate, FiniteStructure};
use geometa::iterate::{mann_iterate, verify_goebel_kirk};
use geometa::maps::{
    check_condition_c, check_condition_d, check_condition_e, check_nonexpansive, MapKind,
    MapUnderTest, Witness,
};
use geometa::metastab::{
    counterexample_F, least_witness, oscillation, uniform_bound, FSpec, FamilyKind, FamilySpec,
    MetastabSettings,
};
use geometa::tbound::{alpha_from_beta, alpha_net, modulus_beta};
use num_rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let v = f();
    (v, start.elapsed())
}

fn toy_space() -> SpaceWithGeodesic {
    SpaceWithGeodesic::interval(0.0, 3.0).unwrap()
}

fn criterion_1() -> Outcome {
    let (s, t) = (toy_space(), MapUnderTest::suzuki_toy());
    // warm-up outside the timed call
    mann_iterate(&s, &t, &3.0.into(), 0.5, 30).unwrap();
    let (tr, took) = timed(|| mann_iterate(&s, &t, &3.0.into(), 0.5, 30).unwrap());
    for n in 1..=30 {
        let err = (tr.point(n).x() - toy_point(n)).abs();
        check(
            err <= 1e-12,
            format!("x_{n} = {} vs {}", tr.point(n).x(), toy_point(n)),
        )?;
    }
    for n in 2..=30 {
        check(tr.residual(n) == tr.point(n).x(), format!("r_{n} != x_{n}"))?;
    }
    check(took < Duration::from_millis(1), format!("took {took:?}"))?;
    Ok(format!("x_2=2, x_3=1, x_n=2^(3-n) to n=30; {took:?}"))
}

fn criterion_2() -> Outcome {
    let (s, t) = (toy_space(), MapUnderTest::suzuki_toy());
    let tr = mann_iterate(&s, &t, &3.0.into(), 0.5, 30).unwrap();
    let r = tr.residuals.as_slice();
    let f = FSpec::linear(2);
    let (rep, took) = timed(|| least_witness(r, &f, 0.1, 15).unwrap());
    let o612 = oscillation(r, 6, 12).unwrap();
    let o714 = oscillation(r, 7, 14).unwrap();
    check(
        o612 == 0.123046875 && o612 >= 0.1,
        format!("osc[6,12] = {o612}"),
    )?;
    check(
        o714 == 0.06201171875 && o714 < 0.1,
        format!("osc[7,14] = {o714}"),
    )?;
    check(took < Duration::from_millis(1), format!("took {took:?}"))?;
    let oracle = brute_witness(r, |n| 2 * n, 0.1, 15);
    check(
        rep.witness_n == oracle,
        format!(
            "least_witness {:?} disagrees with exhaustive scan {oracle:?}",
            rep.witness_n
        ),
    )?;
    let xs: Vec<f64> = tr.points.iter().map(Point::x).collect();
    let on_points = least_witness(xs.as_slice(), &f, 0.1, 15).unwrap().witness_n;
    check(
        rep.witness_n == Some(7),
        format!(
            "expected witness 7 on the residual sequence, got {:?} (exhaustive scan: {oracle:?}, \
             window [1,2] has r_1 = r_2 = 2; on the iterates x_n the witness is {on_points:?}); \
             osc[6,12] and osc[7,14] match",
            rep.witness_n
        ),
    )?;
    Ok(format!(
        "witness 7, osc[6,12]={o612}, osc[7,14]={o714}; {took:?}"
    ))
}

fn criterion_3() -> Outcome {
    let s = toy_space();
    let t = MapUnderTest::suzuki_toy();
    let grid = grid_points(&s, 3 * 4096 + 1).unwrap();
    check(
        grid.len() >= 10_000 && grid.iter().any(|p| p.x() == 3.0),
        "grid",
    )?;
    let ((c, d, e, ne), took) = timed(|| {
        (
            check_condition_c(&s, &t, 0.5, &grid, 0.0).unwrap(),
            check_condition_d(&s, &t, 0.5, &grid, 0.0).unwrap(),
            check_condition_e(&s, &t, 3.0, &grid, 0.0).unwrap(),
            check_nonexpansive(&s, &t, &grid, 0.0).unwrap(),
        )
    });
    for r in [&c, &d, &e] {
        check(
            r.passed && r.worst_violation == 0.0,
            format!("{} violation {}", r.label(), r.worst_violation),
        )?;
    }
    check(!ne.passed, "nonexpansive check passed")?;
    match &ne.witness {
        Some(Witness::Pair(x, y)) => {
            let other = if x.x() == 3.0 { y.x() } else { x.x() };
            check(
                (x.x() == 3.0 || y.x() == 3.0) && other != 3.0 && (3.0 - other).abs() < 1.0,
                format!("witness ({x}, {y})"),
            )?;
        }
        w => return Err(format!("witness {w:?}")),
    }
    // every sampled y near the jump pairs with 3 into a violation
    let three = Point::scalar(3.0);
    for y in grid
        .iter()
        .filter(|y| y.x() != 3.0 && (3.0 - y.x()).abs() < 1.0)
    {
        let pair = [three.clone(), y.clone()];
        let r = check_nonexpansive(&s, &t, &pair, 0.0).unwrap();
        let expected = 1.0 - (3.0 - y.x());
        check(
            r.worst_violation == expected && !r.passed,
            format!("pair (3, {y})"),
        )?;
    }
    check(took < Duration::from_secs(1), format!("took {took:?}"))?;
    Ok(format!(
        "C(0.5), D(0.5), E(3) zero on {} points; nonexpansive fails at {}; {took:?}",
        grid.len(),
        ne.witness.as_ref().unwrap()
    ))
}

/// Built-in maps that pass (D_lambda) on their own trace.
fn gk_cases() -> Vec<(SpaceWithGeodesic, MapUnderTest, Point, f64)> {
    let unit = SpaceWithGeodesic::interval(0.0, 1.0).unwrap();
    let disc = SpaceWithGeodesic::new(SpaceKind::Ball {
        center: vec![0.0, 0.0],
        radius: 1.0,
        norm: Norm::L2,
    })
    .unwrap();
    let square = SpaceWithGeodesic::norm_box(vec![0.0, 0.0], vec![1.0, 1.0], Norm::Sup).unwrap();
    vec![
        (toy_space(), MapUnderTest::suzuki_toy(), 3.0.into(), 0.5),
        (toy_space(), MapUnderTest::identity(), 1.7.into(), 0.5),
        (
            unit.clone(),
            MapUnderTest::new(MapKind::Constant { value: vec![0.25] }).unwrap(),
            1.0.into(),
            0.5,
        ),
        (
            unit.clone(),
            MapUnderTest::affine(0.5, 0.25).unwrap(),
            0.0.into(),
            0.5,
        ),
        (
            unit.clone(),
            MapUnderTest::affine(-0.5, 0.5).unwrap(),
            1.0.into(),
            0.5,
        ),
        (
            disc,
            MapUnderTest::new(MapKind::RotationShrink {
                center: [0.0, 0.0],
                angle: 1.0,
                factor: 0.9,
            })
            .unwrap(),
            [0.6, 0.0].into(),
            0.5,
        ),
        (
            square,
            MapUnderTest::new(MapKind::Matrix {
                rows: vec![vec![0.5, 0.0], vec![0.0, 0.25]],
            })
            .unwrap(),
            [1.0, 1.0].into(),
            0.5,
        ),
    ]
}

fn criterion_4() -> Outcome {
    let (res, took) = timed(|| -> Result<(usize, usize, f64), String> {
        let mut pairs = 0;
        let mut skipped = 0;
        let mut worst: f64 = 0.0;
        for (s, t, x1, lambda) in gk_cases() {
            let tr = mann_iterate(&s, &t, &x1, lambda, 400).unwrap();
            let d = check_condition_d(&s, &t, lambda, &tr.points, 1e-9).unwrap();
            check(
                d.passed,
                format!("{} fails D({lambda}) on its trace", t.kind.name()),
            )?;
            let gk = verify_goebel_kirk(&s, &tr, 1e-6).unwrap();
            check(
                gk.passed(),
                format!(
                    "{} lambda={lambda}: violation {} at {:?}",
                    t.kind.name(),
                    gk.worst_violation,
                    gk.witness
                ),
            )?;
            pairs += gk.pairs_checked;
            skipped += gk.pairs_skipped;
            worst = worst.max(gk.worst_violation);
        }
        Ok((pairs, skipped, worst))
    });
    let (pairs, skipped, worst) = res?;
    check(pairs >= 100_000, format!("only {pairs} pairs"))?;
    check(took < Duration::from_secs(5), format!("took {took:?}"))?;
    Ok(format!(
        "{pairs} pairs checked ({skipped} guarded), worst {worst:e}; {took:?}"
    ))
}

/// Violation of hyperbolic type at t = 1/2 for the north pole and two points
/// at colatitude `theta` and longitudes `phi1`, `phi2` on the unit sphere.
fn sphere_oracle(theta: f64, phi1: f64, phi2: f64) -> f64 {
    let x = [
        theta.sin() * phi1.cos(),
        theta.sin() * phi1.sin(),
        theta.cos(),
    ];
    let y = [
        theta.sin() * phi2.cos(),
        theta.sin() * phi2.sin(),
        theta.cos(),
    ];
    let s: Vec<f64> = (0..3).map(|i| x[i] + y[i]).collect();
    let norm = (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt();
    (s[2] / norm).acos() - theta
}

fn criterion_5() -> Outcome {
    let ((checked, worst, sphere), took) = timed(|| {
        let mut spaces = vec![toy_space()];
        for d in 1..=4 {
            for norm in [Norm::L1, Norm::L2, Norm::Sup] {
                spaces.push(SpaceWithGeodesic::norm_box(vec![0.0; d], vec![1.0; d], norm).unwrap());
            }
        }
        let grid = default_t_grid(None);
        let mut worst: f64 = 0.0;
        for (i, s) in spaces.iter().enumerate() {
            let triples = random_triples(s, 10_000, 100 + i as u64).unwrap();
            worst = worst.max(
                check_hyperbolic_type(s, &triples, &grid, 1e-12)
                    .unwrap()
                    .worst_violation,
            );
        }
        let sphere = SpaceWithGeodesic::unit_sphere();
        let north: Point = [0.0, 0.0, 1.0].into();
        let mut family = Vec::new();
        for (theta, phi1, phi2) in [(2.0_f64, 0.0, 1.0), (2.5, 0.3, 2.0), (1.7, -1.0, 0.5)] {
            let p = |phi: f64| -> Point {
                [
                    theta.sin() * f64::cos(phi),
                    theta.sin() * f64::sin(phi),
                    f64::cos(theta),
                ]
                .into()
            };
            family.push((
                (north.clone(), p(phi1), p(phi2)),
                sphere_oracle(theta, phi1, phi2),
            ));
        }
        let mut results = Vec::new();
        for (triple, oracle) in family {
            let r =
                check_hyperbolic_type(&sphere, std::slice::from_ref(&triple), &[0.5], 0.0).unwrap();
            results.push((r, oracle));
        }
        (spaces.len(), worst, results)
    });
    check(worst <= 1e-12, format!("affine worst {worst:e}"))?;
    for (r, oracle) in &sphere {
        check(
            *oracle > 0.0 && r.worst_violation > 0.0,
            "sphere violation not positive",
        )?;
        check(
            (r.worst_violation - oracle).abs() <= 1e-12,
            format!("{} vs oracle {oracle}", r.worst_violation),
        )?;
        check(r.witness.is_some(), "no sphere witness")?;
    }
    check(took < Duration::from_secs(2), format!("took {took:?}"))?;
    Ok(format!(
        "{checked} affine spaces, worst {worst:e}; sphere violation {:.6} with witness; {took:?}",
        sphere[0].0.worst_violation
    ))
}

fn criterion_6() -> Outcome {
    let plane = |g| {
        SpaceWithGeodesic::with_geodesic(
            SpaceKind::Box {
                lo: vec![-1.0, -1.0],
                hi: vec![3.0, 3.0],
                norm: Norm::Sup,
            },
            g,
        )
        .unwrap()
    };
    let (l, lp) = (plane(Geodesic::Affine), plane(Geodesic::SupNormDetour));
    let pair = vec![([0.0, 0.0].into(), [2.0, 0.0].into())];
    let grid: Vec<f64> = (0..=512).map(|i| i as f64 / 512.0).collect();
    for s in [&l, &lp] {
        let r = check_linear_axioms(s, &pair, &grid, 1e-12).unwrap();
        check(
            r.worst_violation <= 1e-12,
            format!("{:?}: {}", s.geodesic_kind(), r.worst_violation),
        )?;
    }
    let (x, y): (Point, Point) = pair[0].clone();
    let a = l.geodesic_point(&x, &y, 0.25).unwrap();
    let b = lp.geodesic_point(&x, &y, 0.25).unwrap();
    let gap = l.distance(&a, &b).unwrap();
    check(gap == 0.5, format!("disagreement {gap}"))?;
    Ok(format!(
        "both structures pass on {} t values; L(1/4)={a}, L'(1/4)={b}, gap {gap}",
        grid.len()
    ))
}

fn criterion_7() -> Outcome {
    let unit = SpaceWithGeodesic::interval(0.0, 1.0).unwrap();
    let sample = grid_points(&unit, 1025).unwrap();
    // least k with 2/(k+1) < 1/(K+1), in exact arithmetic
    let oracle = |big_k: u64| {
        (0u64..)
            .find(|&k| Ratio::new(2u64, k + 1) < Ratio::new(1u64, big_k + 1))
            .unwrap() as usize
    };
    for (big_k, expected) in [(0usize, 2usize), (1, 4)] {
        check(oracle(big_k as u64) == expected, "oracle")?;
        let (k, beta_k) = alpha_from_beta(|k| modulus_beta(&unit, &sample, k), big_k).unwrap();
        check(k == expected, format!("K={big_k}: k={k}"))?;
        let net = alpha_net(&unit, &sample, big_k).unwrap();
        check(net.k == k && net.beta_k == beta_k, "alpha_net disagrees")?;
        check(
            net.net.covers(&unit, &sample, 1.0 / (big_k as f64 + 1.0)),
            "post-hoc coverage",
        )?;
        check(net.covers_target, "covers_target false")?;
    }
    Ok("K=0 -> k=2, K=1 -> k=4; centers cover at 1/(K+1)".into())
}

fn criterion_8() -> Outcome {
    let s = toy_space();
    let maps = [
        MapUnderTest::suzuki_toy(),
        // violates both conditions
        MapUnderTest::new(MapKind::PiecewiseJump {
            breaks: vec![1.0, 2.0],
            values: vec![3.0, 0.0, 1.5],
            jumps: vec![(3.0, 0.0)],
        })
        .unwrap(),
    ];
    let e3 = builtin("condition_E(3)").unwrap();
    let ds: Vec<_> = [0.25, 0.5, 0.75]
        .iter()
        .map(|l| (*l, builtin(&format!("condition_D({l})")).unwrap()))
        .collect();
    let mut worst_gap: f64 = 0.0;
    let mut nonzero = 0;
    for seed in 0..20 {
        let sample = sample_points(&s, 120, 1000 + seed, true).unwrap();
        for map in &maps {
            let st = FiniteStructure::new(s.clone(), sample.clone())
                .unwrap()
                .with_map("T", map.clone());
            let f = evaluate(&e3, &st, &[]).unwrap().value;
            let c = check_condition_e(&s, map, 3.0, &sample, 0.0)
                .unwrap()
                .worst_violation;
            worst_gap = worst_gap.max((f - c).abs());
            nonzero += usize::from(c > 0.0);
            for (l, d) in &ds {
                let f = evaluate(d, &st, &[]).unwrap().value;
                let c = check_condition_d(&s, map, *l, &sample, 0.0)
                    .unwrap()
                    .worst_violation;
                worst_gap = worst_gap.max((f - c).abs());
                nonzero += usize::from(c > 0.0);
            }
        }
    }
    check(worst_gap <= 1e-12, format!("max gap {worst_gap:e}"))?;
    Ok(format!("20 grids, E(3) and D(1/4, 1/2, 3/4): max gap {worst_gap:e} ({nonzero} nonzero comparisons)"))
}

fn criterion_9() -> Outcome {
    let alt: Vec<f64> = (0..1001).map(|k| (k % 2) as f64).collect();
    let f = counterexample_F(alt.as_slice(), 0.5, 1000).ok_or("no counterexample")?;
    for n in 1..=1000 {
        check(
            f.eval(n).ok() == Some(n + 1),
            format!("F({n}) = {:?}", f.eval(n)),
        )?;
    }
    for cap in [1, 2, 3, 10, 100, 999, 1000] {
        let r = least_witness(alt.as_slice(), &f, 0.5, cap).unwrap();
        check(
            r.exhausted && r.witness_n.is_none(),
            format!("cap {cap} found {:?}", r.witness_n),
        )?;
    }
    Ok("F(n) = n+1 for n <= 1000; every cap exhausted".into())
}

fn criterion_10() -> Outcome {
    let family = FamilySpec::new(FamilyKind::Mixed, 100, 2024, 0.5);
    let settings = MetastabSettings::new(FSpec::linear(2), 0.05, 1000);
    let (runs, took) = timed(|| {
        [1, 2, 4].map(|threads| uniform_bound(&family, &settings, Some(threads)).unwrap())
    });
    let base = &runs[0];
    check(
        runs.iter().all(|r| r == base),
        "results depend on the worker count",
    )?;
    check(
        base.all_verified(),
        "an instance failed (D_1/2) on its trace",
    )?;
    let bound = base.uniform_bound.ok_or("no witness at all")?;
    check(
        base.failures.is_empty(),
        format!("exhausted: {:?}", base.failures),
    )?;
    let max = base
        .instances
        .iter()
        .filter_map(|o| o.report.witness_n)
        .max()
        .unwrap();
    check(bound == max, "bound is not the max")?;
    for o in &base.instances {
        let inst = family.instance(o.id).unwrap();
        let tr = mann_iterate(
            &inst.space,
            &inst.map,
            &inst.x1,
            0.5,
            settings.trace_length().unwrap(),
        )
        .unwrap();
        let oracle = brute_witness(&tr.residuals, |n| 2 * n, 0.05, 1000);
        check(
            o.report.witness_n == oracle,
            format!("instance {}: {:?} vs {oracle:?}", o.id, o.report.witness_n),
        )?;
        let n = o.report.witness_n.unwrap();
        check(
            oscillation(tr.residuals.as_slice(), n, 2 * n).unwrap() < 0.05,
            "validity",
        )?;
        for m in 1..n {
            check(
                oscillation(tr.residuals.as_slice(), m, 2 * m).unwrap() >= 0.05,
                "minimality",
            )?;
        }
    }
    check(took < Duration::from_secs(10), format!("took {took:?}"))?;
    Ok(format!(
        "100 instances, empirical bound {bound}, identical for 1/2/4 workers; {took:?}"
    ))
}

fn criterion_11() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..1000 {
        let f = random_formula(&mut rng, 5);
        let text = f.to_string();
        let back = geometa::glformula::parse(&text).map_err(|e| format!("#{i}: {e} in {text}"))?;
        check(back == f, format!("#{i}: {text}"))?;
    }
    let specs = [
        "hyperbolic_type(1/2)",
        "condition_D(1/2)",
        "condition_E(3)",
        "sap_axiom_1(P)",
        "sap_axiom_2(P)",
        "linear_axiom_a(1/4, 3/4)",
        "linear_axiom_b(1/4)",
        "approx_tb(1, 1)",
    ];
    for spec in specs {
        builtin(spec).map_err(|e| format!("{spec}: {e}"))?;
    }
    Ok(format!(
        "1000 random trees round-trip; {} builtins parse",
        specs.len()
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("suzuki trace exactness", criterion_1),
        ("metastability witness", criterion_2),
        ("condition suite", criterion_3),
        ("Goebel-Kirk verifier", criterion_4),
        ("hyperbolic type", criterion_5),
        ("dual geodesics", criterion_6),
        ("beta to alpha conversion", criterion_7),
        ("formula/checker agreement", criterion_8),
        ("counterexample soundness", criterion_9),
        ("family uniformity", criterion_10),
        ("parser round trip", criterion_11),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 11 criteria passed");
    } else {
        println!("acceptance: failed {failed:?}");
        std::process::exit(1);
    }
}
