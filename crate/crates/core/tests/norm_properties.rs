//! Property tests for the norm axioms and the decomposition identity.

use proptest::prelude::*;

use flatcur_core::norm::{
    decompose_norm, reconstruct_norm, web_norm, PolygonalNorm, WebMeasure,
};
use flatcur_core::Vec2;

const TAU: f64 = std::f64::consts::TAU;

fn order() -> impl Strategy<Value = u32> {
    prop_oneof![Just(3u32), Just(4), Just(5), Just(6)]
}

fn vector() -> impl Strategy<Value = Vec2> {
    ((-10.0..10.0f64), (-10.0..10.0f64)).prop_map(|(x, y)| Vec2::new(x, y))
}

/// A random web measure with 1–3 distinct atoms.
fn measure() -> impl Strategy<Value = WebMeasure> {
    order().prop_flat_map(|n| {
        let step = TAU / f64::from(n);
        prop::collection::vec(((0.02..0.98f64), (0.1..3.0f64)), 1..4).prop_map(move |raw| {
            let mut atoms: Vec<(f64, f64)> = Vec::new();
            for (frac, w) in raw {
                let theta = frac * step;
                if atoms.iter().all(|a| (a.0 - theta).abs() > 1e-6) {
                    atoms.push((theta, w));
                }
            }
            atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            WebMeasure { n, atoms }
        })
    })
}

/// Unit ball of the norm defined by a web measure, built radially: vertices
/// sit at the atoms' web directions and their antipodes, where the support
/// function kinks. Independent of `decompose_norm`.
fn measure_ball(m: &WebMeasure) -> PolygonalNorm {
    let mut dirs: Vec<f64> = Vec::new();
    for &(theta, _) in &m.atoms {
        for k in 0..m.n {
            let base = theta + TAU * f64::from(k) / f64::from(m.n);
            dirs.push(base.rem_euclid(TAU));
            dirs.push((base + std::f64::consts::PI).rem_euclid(TAU));
        }
    }
    dirs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    dirs.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let verts: Vec<Vec2> = dirs
        .iter()
        .map(|&phi| {
            let e = Vec2::from_angle(phi);
            e * (1.0 / reconstruct_norm(m, e))
        })
        .collect();
    PolygonalNorm::new(verts, m.n, 1e-9).expect("measure ball is a valid invariant polygon")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Triangle inequality and positive homogeneity for the web norm.
    #[test]
    fn web_norm_axioms(n in order(), theta in 0.0..TAU, a in vector(), b in vector(), s in 0.0..5.0f64) {
        let na = web_norm(n, theta, a);
        let nb = web_norm(n, theta, b);
        let nsum = web_norm(n, theta, a + b);
        prop_assert!(nsum <= na + nb + 1e-9 * (na + nb + 1.0));
        prop_assert!((web_norm(n, theta, a * s) - s * na).abs() <= 1e-9 * (1.0 + s * na));
    }

    /// Triangle inequality and homogeneity for reconstructed norms and for
    /// the polygon evaluation of their unit balls.
    #[test]
    fn reconstructed_norm_axioms(m in measure(), a in vector(), b in vector(), s in 0.0..5.0f64) {
        let na = reconstruct_norm(&m, a);
        let nb = reconstruct_norm(&m, b);
        prop_assert!(reconstruct_norm(&m, a + b) <= na + nb + 1e-9 * (na + nb + 1.0));
        prop_assert!((reconstruct_norm(&m, a * s) - s * na).abs() <= 1e-9 * (1.0 + s * na));
        let ball = measure_ball(&m);
        prop_assert!(ball.eval(a + b) <= ball.eval(a) + ball.eval(b) + 1e-9);
    }

    /// Decomposing the unit ball of a random invariant norm reproduces the
    /// norm exactly: the radial ball construction plus dual-edge
    /// decomposition agrees with direct web summation vector by vector.
    #[test]
    fn decomposition_reconstructs_measure_norms(m in measure(), v in vector()) {
        prop_assume!(v.norm() > 1e-3);
        let ball = measure_ball(&m);
        let decomposed = decompose_norm(&ball, m.n, 1e-9).expect("decompose");
        let direct = reconstruct_norm(&m, v);
        let via_ball = ball.eval(v);
        let via_decomposition = reconstruct_norm(&decomposed, v);
        prop_assert!((via_ball - direct).abs() <= 1e-9 * direct.max(1e-9),
            "ball eval {via_ball} vs direct {direct}");
        prop_assert!((via_decomposition - direct).abs() <= 1e-9 * direct.max(1e-9),
            "decomposed {via_decomposition} vs direct {direct}");
    }

    /// The supporting vector never decreases the norm along its line.
    #[test]
    fn supporting_vector_inequality(m in measure(), u in vector(), t in -10.0..10.0f64) {
        prop_assume!(u.norm() > 1e-3);
        let ball = measure_ball(&m);
        let w = ball.supporting_vector(u, 1e-9);
        prop_assert!(w.norm() > 0.0);
        prop_assert!(ball.eval(u + w * t) >= ball.eval(u) - 1e-12);
    }
}
