//! Reference surfaces and curves used by tests, the acceptance suite and the
//! CLI `report` command.

use alloc::vec;
use alloc::vec::Vec;

use crate::geodesic::SurfacePath;
use crate::geom::{Vec2, TAU};
use crate::surface::{EdgeRef, Gluing, PolygonSpec, SurfaceSpec};

/// Regular octagon of side 1 with opposite sides identified by translation.
///
/// One cone point of angle 6π, genus two. Declared with rotation order
/// `n`, which must keep all rotation indices zero (any `n ≥ 1` works).
pub fn octagon_n(n: u32) -> SurfaceSpec {
    let s = 0.5 * core::f64::consts::SQRT_2;
    let h = 0.5 + s;
    // Counterclockwise, starting from the bottom-right corner of the
    // bottom (horizontal) side.
    let vertices = vec![
        Vec2::new(0.5, -h),
        Vec2::new(h, -0.5),
        Vec2::new(h, 0.5),
        Vec2::new(0.5, h),
        Vec2::new(-0.5, h),
        Vec2::new(-h, 0.5),
        Vec2::new(-h, -0.5),
        Vec2::new(-0.5, -h),
    ];
    let gluings = (0..4)
        .map(|i| Gluing {
            from: EdgeRef::new(0, i),
            to: EdgeRef::new(0, i + 4),
            rotation: 0,
        })
        .collect();
    SurfaceSpec { n, polygons: vec![PolygonSpec { id: 0, vertices }], gluings }
}

/// The octagon surface as a translation surface (`n = 1`).
pub fn octagon() -> SurfaceSpec {
    octagon_n(1)
}

/// A 1/4-translation surface with one cone point of angle 6π and genus two:
/// a regular octagon with edge `i` glued to edge `i+2` by a quarter turn.
pub fn quarter_octagon() -> SurfaceSpec {
    let s = 0.5 * core::f64::consts::SQRT_2;
    let h = 0.5 + s;
    let vertices = vec![
        Vec2::new(0.5, -h),
        Vec2::new(h, -0.5),
        Vec2::new(h, 0.5),
        Vec2::new(0.5, h),
        Vec2::new(-0.5, h),
        Vec2::new(-h, 0.5),
        Vec2::new(-h, -0.5),
        Vec2::new(-0.5, -h),
    ];
    let pairs = [(0u32, 2u32), (1, 3), (4, 6), (5, 7)];
    let gluings = pairs
        .iter()
        .map(|&(a, b)| Gluing { from: EdgeRef::new(0, a), to: EdgeRef::new(0, b), rotation: 1 })
        .collect();
    SurfaceSpec { n: 4, polygons: vec![PolygonSpec { id: 0, vertices }], gluings }
}

fn regular_hexagon(center: Vec2) -> Vec<Vec2> {
    (0..6)
        .map(|k| center + Vec2::from_angle(TAU * k as f64 / 6.0))
        .collect()
}

/// A 1/3-translation surface with two cone points of angle 4π and genus two:
/// two regular hexagons with edge `i` of the first glued to edge `i+1` of
/// the second by a third of a turn.
pub fn third_hexagons() -> SurfaceSpec {
    let h0 = PolygonSpec { id: 0, vertices: regular_hexagon(Vec2::ZERO) };
    let h1 = PolygonSpec { id: 1, vertices: regular_hexagon(Vec2::new(3.0, 0.0)) };
    let gluings = (0..6u32)
        .map(|i| Gluing {
            from: EdgeRef::new(0, i),
            to: EdgeRef::new(1, (i + 1) % 6),
            rotation: 1,
        })
        .collect();
    SurfaceSpec { n: 3, polygons: vec![h0, h1], gluings }
}

/// The two-hexagon surface re-declared with order 6 (rotation indices
/// doubled): a 1/6-translation structure induced by the 1/3 structure.
pub fn sixth_hexagons() -> SurfaceSpec {
    let mut spec = third_hexagons();
    spec.n = 6;
    for g in &mut spec.gluings {
        g.rotation *= 2;
    }
    spec
}

/// An L-shaped translation surface (nonconvex polygon) exercising the
/// internal triangulation: three unit squares in an L, opposite unit sides
/// identified by translation. One cone point of angle 6π, genus two.
pub fn l_shape() -> SurfaceSpec {
    // 2×1 base with a 1×1 block on its left half; collinear vertices split
    // the long sides into unit edges.
    let vertices = vec![
        Vec2::new(0.0, 0.0),
        Vec2::new(1.0, 0.0),
        Vec2::new(2.0, 0.0),
        Vec2::new(2.0, 1.0),
        Vec2::new(1.0, 1.0),
        Vec2::new(1.0, 2.0),
        Vec2::new(0.0, 2.0),
        Vec2::new(0.0, 1.0),
    ];
    let gluings = vec![
        Gluing { from: EdgeRef::new(0, 0), to: EdgeRef::new(0, 5), rotation: 0 },
        Gluing { from: EdgeRef::new(0, 1), to: EdgeRef::new(0, 3), rotation: 0 },
        Gluing { from: EdgeRef::new(0, 2), to: EdgeRef::new(0, 7), rotation: 0 },
        Gluing { from: EdgeRef::new(0, 4), to: EdgeRef::new(0, 6), rotation: 0 },
    ];
    SurfaceSpec { n: 1, polygons: vec![PolygonSpec { id: 0, vertices }], gluings }
}

/// Height of the regular octagon of side 1 (distance between opposite
/// sides): 1 + √2.
pub const OCTAGON_SPAN: f64 = 1.0 + core::f64::consts::SQRT_2;

/// Closed path on the octagon crossing the top/bottom edge pair once:
/// homotopic to a core curve of the vertical cylinder. Drawn in developed
/// coordinates: the second waypoint lies one full span above the first.
pub fn octagon_vertical_loop() -> SurfacePath {
    SurfacePath {
        closed: true,
        waypoints: vec![(0, Vec2::new(0.0, 0.0)), (0, Vec2::new(0.0, OCTAGON_SPAN))],
    }
}

/// Zigzag in the same class as [`octagon_vertical_loop`].
pub fn octagon_zigzag() -> SurfacePath {
    SurfacePath {
        closed: true,
        waypoints: vec![
            (0, Vec2::new(-0.1, -0.6)),
            (0, Vec2::new(0.4, -0.1)),
            (0, Vec2::new(-0.35, 0.4)),
            (0, Vec2::new(-0.1, -0.6 + OCTAGON_SPAN)),
        ],
    }
}

/// Closed path on the octagon crossing the left/right edge pair once.
pub fn octagon_horizontal_loop() -> SurfacePath {
    SurfacePath {
        closed: true,
        waypoints: vec![(0, Vec2::new(0.0, 0.0)), (0, Vec2::new(OCTAGON_SPAN, 0.0))],
    }
}

/// Closed path on the octagon crossing one diagonal edge pair.
pub fn octagon_diagonal_loop() -> SurfacePath {
    let d = OCTAGON_SPAN * 0.5 * core::f64::consts::SQRT_2;
    SurfacePath {
        closed: true,
        waypoints: vec![(0, Vec2::new(0.0, 0.0)), (0, Vec2::new(d, d))],
    }
}

/// Sample curves for a fixture surface, by polygon ids present.
pub fn sample_loops(spec: &SurfaceSpec) -> Vec<SurfacePath> {
    let single = spec.polygons.len() == 1;
    if single {
        vec![octagon_vertical_loop(), octagon_horizontal_loop(), octagon_diagonal_loop()]
    } else {
        hexagon_loops()
    }
}

/// Closed curves on the two-hexagon fixtures. Three waypoints each, placed
/// so the outgoing and returning hops pick different glued edges (a
/// two-waypoint loop would retrace its own door and be null-homotopic).
pub fn hexagon_loops() -> Vec<SurfacePath> {
    let c1 = Vec2::new(3.0, 0.0);
    vec![
        SurfacePath {
            closed: true,
            waypoints: vec![
                (0, Vec2::new(0.4, 0.2)),
                (1, c1 + Vec2::new(0.5, 0.3)),
                (0, Vec2::new(-0.4, 0.45)),
            ],
        },
        SurfacePath {
            closed: true,
            waypoints: vec![
                (0, Vec2::new(-0.2, -0.5)),
                (1, c1 + Vec2::new(-0.45, 0.2)),
                (0, Vec2::new(0.5, 0.1)),
            ],
        },
        SurfacePath {
            closed: true,
            waypoints: vec![
                (0, Vec2::new(0.0, 0.55)),
                (1, c1 + Vec2::new(0.1, -0.55)),
                (0, Vec2::new(-0.55, -0.1)),
            ],
        },
    ]
}

pub use crate::surface::build;
