//! Acceptance suite: one check per shipped guarantee, one line per check.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the table.

use std::time::Instant;

use flatcur_core::current::{
    consistency_report, liouville_length, refinement_additivity_check,
};
use flatcur_core::fixtures;
use flatcur_core::foliation::{
    crossing_statistics, empirical_small_box_measure, SampleSpec,
};
use flatcur_core::geodesic::{
    finsler_length, path_finsler_length, random_homotopic_perturbation, theta_length,
    tighten_closed, verify_geodesic, GeodesicRep, SurfacePath, TightenOptions,
};
use flatcur_core::norm::{
    decompose_norm, named_norm, reconstruct_norm, web_ball, NormOracle, PolygonalNorm,
};
use flatcur_core::rng::Rng;
use flatcur_core::surface::{build, SurfaceComplex};
use flatcur_core::Vec2;

const PI: f64 = std::f64::consts::PI;
const TAU: f64 = std::f64::consts::TAU;

struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
    seconds: f64,
}

fn check(name: &'static str, limit: f64, f: impl FnOnce() -> (bool, String)) -> Outcome {
    let t0 = Instant::now();
    let (mut pass, mut detail) = f();
    let seconds = t0.elapsed().as_secs_f64();
    if seconds > limit {
        pass = false;
        detail = format!("{detail}; runtime {seconds:.1}s exceeds {limit}s");
    }
    Outcome { name, pass, detail, seconds }
}

/// The three fixture surfaces with their curves and compatible norms.
fn fixture_set() -> Vec<(&'static str, SurfaceComplex, Vec<SurfacePath>, Vec<(String, PolygonalNorm)>)> {
    let eps = 1e-9;
    let mk = |names: &[&str]| -> Vec<(String, PolygonalNorm)> {
        names
            .iter()
            .map(|n| (n.to_string(), named_norm(n, eps).expect("named norm")))
            .collect()
    };
    vec![
        (
            "octagon",
            build(&fixtures::octagon()).unwrap(),
            fixtures::sample_loops(&fixtures::octagon()),
            mk(&["l1", "hexagonal", "octagonal"]),
        ),
        (
            "quarter-octagon",
            build(&fixtures::quarter_octagon()).unwrap(),
            fixtures::sample_loops(&fixtures::quarter_octagon()),
            mk(&["l1", "octagonal", "web:4:0.3"]),
        ),
        (
            "third-hexagons",
            build(&fixtures::third_hexagons()).unwrap(),
            fixtures::hexagon_loops(),
            mk(&["hexagonal", "web:3:0", "web:3:0.4"]),
        ),
    ]
}

fn gauss_bonnet() -> (bool, String) {
    let mut pass = true;
    let mut notes = Vec::new();
    let residual = |s: &SurfaceComplex| -> f64 {
        let gb: f64 = s.classes().iter().map(|c| c.total - TAU).sum();
        (gb - 4.0 * PI * (f64::from(s.genus) - 1.0)).abs()
    };
    let oct = build(&fixtures::octagon()).unwrap();
    pass &= oct.genus == 2
        && oct.cone_points.len() == 1
        && (oct.cone_points[0].total_angle - 6.0 * PI).abs() < 1e-9
        && residual(&oct) < 1e-9;
    notes.push(format!("octagon 6π genus 2 residual {:.1e}", residual(&oct)));
    let quarter = build(&fixtures::quarter_octagon()).unwrap();
    pass &= quarter.genus == 2
        && quarter.cone_points.len() == 1
        && (quarter.cone_points[0].total_angle - 6.0 * PI).abs() < 1e-9
        && residual(&quarter) < 1e-9;
    notes.push("1/4-surface: one 6π cone, genus 2".to_string());
    let third = build(&fixtures::third_hexagons()).unwrap();
    pass &= third.genus == 2
        && third.cone_points.len() == 2
        && third
            .cone_points
            .iter()
            .all(|c| (c.total_angle - 4.0 * PI).abs() < 1e-9)
        && residual(&third) < 1e-9;
    notes.push("1/3-surface: two 4π cones, genus 2".to_string());
    (pass, notes.join("; "))
}

fn decomposition_exactness() -> (bool, String) {
    let cases: Vec<(String, PolygonalNorm, u32)> = vec![
        ("l1".into(), named_norm("l1", 1e-9).unwrap(), 4),
        ("hexagonal".into(), named_norm("hexagonal", 1e-9).unwrap(), 3),
        ("web:3:0".into(), web_ball(3, 0.0, 1e-9).unwrap(), 3),
        ("web:4:0.3".into(), web_ball(4, 0.3, 1e-9).unwrap(), 4),
        ("web:6:0.1".into(), web_ball(6, 0.1, 1e-9).unwrap(), 6),
    ];
    let mut pass = true;
    let mut worst_err = 0.0_f64;
    let mut worst_mass = 0.0_f64;
    for (name, q, n) in &cases {
        let m = decompose_norm(q, *n, 1e-9).expect("decompose");
        let mass_gap =
            (m.total_mass() - q.dual_perimeter() / (4.0 * f64::from(*n))).abs();
        worst_mass = worst_mass.max(mass_gap);
        pass &= mass_gap < 1e-12;
        let mut rng = Rng::new(20260811);
        let mut err = 0.0_f64;
        for _ in 0..10_000 {
            let v = Vec2::new(rng.range(-10.0, 10.0), rng.range(-10.0, 10.0));
            if v.norm() < 1e-6 {
                continue;
            }
            let a = q.eval(v);
            let b = reconstruct_norm(&m, v);
            err = err.max((a - b).abs() / a);
        }
        worst_err = worst_err.max(err);
        pass &= err < 1e-10;
        let _ = name;
    }
    (pass, format!("max rel err {worst_err:.1e} over 1e4 vectors; mass gap {worst_mass:.1e}"))
}

fn liouville_identity() -> (bool, String) {
    let mut pass = true;
    let mut worst = 0.0_f64;
    let mut count = 0usize;
    for (name, surface, curves, norms) in fixture_set() {
        let reports = consistency_report(&surface, &curves, &norms, &[0.0], 64)
            .unwrap_or_else(|e| panic!("{name}: {e}"));
        for r in &reports {
            for e in &r.norms {
                worst = worst.max(e.residual);
                pass &= e.residual < 1e-9;
                count += 1;
            }
        }
    }
    (pass, format!("{count} (surface × curve × norm) cases, worst rel residual {worst:.1e}"))
}

fn theorem_a_minimality() -> (bool, String) {
    let mut pass = true;
    let mut worst = 0.0_f64;
    let mut cases = 0usize;
    for (name, surface, curves, norms) in fixture_set() {
        for path in &curves {
            let rep = tighten_closed(&surface, path, TightenOptions::default())
                .unwrap_or_else(|e| panic!("{name}: {e}"));
            for (_, q) in &norms {
                let base = finsler_length(&rep, q);
                for seed in 0..100u64 {
                    let p = random_homotopic_perturbation(&surface, &rep, 0.1, seed)
                        .expect("perturbation");
                    let len = path_finsler_length(&surface, &p, q).expect("length");
                    let slack = (base - len) / base;
                    worst = worst.max(slack);
                    pass &= len >= base - 1e-9 * base;
                    cases += 1;
                }
            }
        }
    }
    (pass, format!("{cases} perturbations; worst (tightened−perturbed)/tightened = {worst:.1e}"))
}

fn geodesic_validity() -> (bool, String) {
    let mut pass = true;
    let mut worst_gap = 0.0_f64;
    let mut classes = 0usize;
    for (name, surface, curves, _) in fixture_set() {
        for path in &curves {
            let rep = tighten_closed(&surface, path, TightenOptions::default())
                .unwrap_or_else(|e| panic!("{name}: {e}"));
            let v = verify_geodesic(&surface, &rep, 1e-9);
            pass &= v.pass;
            let base = rep.cat0_length();
            for seed in 100..110u64 {
                let p = random_homotopic_perturbation(&surface, &rep, 0.25, seed)
                    .expect("perturbation");
                let rep2 = tighten_closed(&surface, &p, TightenOptions::default())
                    .unwrap_or_else(|e| panic!("{name} retighten: {e}"));
                let v2 = verify_geodesic(&surface, &rep2, 1e-9);
                pass &= v2.pass;
                let gap = (rep2.cat0_length() - base).abs() / base;
                worst_gap = worst_gap.max(gap);
                pass &= gap <= 1e-8;
            }
            classes += 1;
        }
    }
    (pass, format!("{classes} classes × 10 restarts; worst length spread {worst_gap:.1e}"))
}

fn crossing_laws() -> (bool, String) {
    let mut pass = true;
    let mut notes = Vec::new();
    for (name, spec, theta, n) in [
        ("quarter-octagon", fixtures::quarter_octagon(), 0.2, 4u32),
        ("sixth-hexagons", fixtures::sixth_hexagons(), 0.1, 6),
    ] {
        let surface = build(&spec).unwrap();
        let sample = SampleSpec { max_traces: 20, ..SampleSpec::default_for(&surface) };
        let stats = crossing_statistics(&surface, theta, &sample).expect("statistics");
        let step = TAU / f64::from(n);
        let mut angle_ok = true;
        for &a in &stats.angles {
            let k = (a / step).round();
            angle_ok &= (a - k * step).abs() < 1e-9 && k >= 1.0 && 2 * (k as u32) < n;
        }
        let mut super_ok = true;
        for t in &stats.triples {
            super_ok &= t.superadditivity_slack >= -1e-9;
        }
        let order_ok = stats.max_positive_crossing <= n / 2;
        pass &= angle_ok && super_ok && order_ok;
        notes.push(format!(
            "{name}: {} crossings, {} positive triples, max order {} ≤ {}",
            stats.crossings,
            stats.triples.len(),
            stats.max_positive_crossing,
            n / 2
        ));
    }
    (pass, notes.join("; "))
}

fn empirical_intersection() -> (bool, String) {
    let surface = build(&fixtures::octagon()).unwrap();
    let rep = tighten_closed(
        &surface,
        &fixtures::octagon_vertical_loop(),
        TightenOptions::default(),
    )
    .unwrap();
    let exact = theta_length(&rep, 1, 0.0);
    let a = Vec2::new(0.0, -0.5);
    let b = Vec2::new(0.0, 0.5 + 0.5 * std::f64::consts::SQRT_2);
    let est = empirical_small_box_measure(&surface, 0.0, 0, a, b, 1000, &rep, 60.0)
        .expect("estimate");
    let rel = (est - exact).abs() / exact;
    (rel < 0.02, format!("m=1000 estimate {est:.6} vs exact {exact:.6} (rel {rel:.4})"))
}

fn refinement_additivity() -> (bool, String) {
    let mut pass = true;
    let mut notes = Vec::new();
    // n = 3·1 on the octagon.
    let s1 = build(&fixtures::octagon()).unwrap();
    let rep = tighten_closed(&s1, &fixtures::octagon_vertical_loop(), TightenOptions::default())
        .unwrap();
    for theta in [0.0, 0.4, 1.1] {
        let r = refinement_additivity_check(
            &fixtures::octagon(),
            &fixtures::octagon_n(3),
            theta,
            &rep,
        )
        .expect("refinement");
        pass &= r.pass;
        notes.push(format!("3 = 3·1 θ={theta}: rel {:.1e}", r.rel_error));
    }
    // n = 4 = 2·2 on the half-translation redeclaration.
    let s2 = build(&fixtures::octagon_n(2)).unwrap();
    let rep2 = tighten_closed(&s2, &fixtures::octagon_diagonal_loop(), TightenOptions::default())
        .unwrap();
    for theta in [0.0, 0.7] {
        let r = refinement_additivity_check(
            &fixtures::octagon_n(2),
            &fixtures::octagon_n(4),
            theta,
            &rep2,
        )
        .expect("refinement");
        pass &= r.pass;
        notes.push(format!("4 = 2·2 θ={theta}: rel {:.1e}", r.rel_error));
    }
    (pass, notes.join("; "))
}

fn dual_perimeter_monotonicity() -> (bool, String) {
    let rounds =
        flatcur_core::norm::approximate_norm(&NormOracle::Euclidean, 4, &[], 5).expect("rounds");
    let per: Vec<f64> = rounds.iter().map(|r| r.polygon.dual_perimeter()).collect();
    let mut pass = true;
    for w in per.windows(2) {
        pass &= w[1] <= w[0] + 1e-12;
    }
    let final_gap = (per[4] - TAU) / TAU;
    pass &= final_gap.abs() < 0.01;
    (pass, format!("perimeters {:?} → 2π within {:.3}%", per.iter().map(|p| (p * 1e4).round() / 1e4).collect::<Vec<_>>(), final_gap * 100.0))
}

#[test]
fn acceptance() {
    let outcomes = vec![
        check("1 gauss-bonnet fixtures", 1.0, gauss_bonnet),
        check("2 norm decomposition exactness", 1.0, decomposition_exactness),
        check("3 liouville identity", 10.0, liouville_identity),
        check("4 theorem-a minimality", 60.0, theorem_a_minimality),
        check("5 geodesic validity + restarts", 60.0, geodesic_validity),
        check("6 crossing laws", 60.0, crossing_laws),
        check("7 empirical intersection", 30.0, empirical_intersection),
        check("8 refinement additivity", 10.0, refinement_additivity),
        check("9 dual perimeter monotonicity", 10.0, dual_perimeter_monotonicity),
    ];
    let mut all = true;
    for o in &outcomes {
        println!(
            "[{}] {:<34} {:>6.2}s  {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.name,
            o.seconds,
            o.detail
        );
        all &= o.pass;
    }
    assert!(all, "acceptance criteria failed");
}

/// The liouville identity also holds entry-wise through the public
/// `liouville_length`, not only through the report plumbing.
#[test]
fn liouville_direct_entry() {
    let surface = build(&fixtures::quarter_octagon()).unwrap();
    let q = named_norm("l1", 1e-9).unwrap();
    let m = decompose_norm(&q, 4, 1e-9).unwrap();
    let rep: GeodesicRep = tighten_closed(
        &surface,
        &fixtures::octagon_diagonal_loop(),
        TightenOptions::default(),
    )
    .unwrap();
    let lv = liouville_length(&surface, &m, &rep).unwrap();
    let fl = finsler_length(&rep, &q);
    assert!((lv - fl).abs() <= 1e-10 * fl);
}
