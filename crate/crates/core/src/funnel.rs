//! Shortest taut path through an ordered sequence of window segments.
//!
//! A corridor of convex cells developed into the plane reduces to its
//! windows: the path must cross `W_1, …, W_m` in order, and between
//! consecutive windows it lies in a common convex cell, so the shortest
//! path is the taut polyline bending only at window endpoints.

use alloc::vec;
use alloc::vec::Vec;

use crate::geom::{orient, Vec2};

/// A window with `left`/`right` labeled relative to the direction of travel.
#[derive(Debug, Clone, Copy)]
pub struct Window {
    pub left: Vec2,
    pub right: Vec2,
}

/// A bend of the taut path: which window endpoint it wraps around.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bend {
    pub window: usize,
    pub is_left: bool,
}

/// Funnel result: bends in order from start to target.
#[derive(Debug, Clone)]
pub struct TautPath {
    pub bends: Vec<Bend>,
}

impl TautPath {
    /// Full polyline including the endpoints.
    pub fn polyline(&self, s: Vec2, t: Vec2, windows: &[Window]) -> Vec<Vec2> {
        let mut pts = vec![s];
        for b in &self.bends {
            let w = windows[b.window];
            pts.push(if b.is_left { w.left } else { w.right });
        }
        pts.push(t);
        pts
    }

    pub fn length(&self, s: Vec2, t: Vec2, windows: &[Window]) -> f64 {
        let pts = self.polyline(s, t, windows);
        pts.windows(2).map(|p| p[0].dist(p[1])).sum()
    }
}

/// Compute the taut path from `s` to `t` crossing `windows` in order.
///
/// Collinear configurations count as tight: a path grazing a window endpoint
/// reports a bend there with a straight angle.
pub fn funnel(s: Vec2, t: Vec2, windows: &[Window]) -> TautPath {
    // Portal list: start, windows, target.
    let m = windows.len();
    let portal = |i: usize| -> (Vec2, Vec2) {
        if i == 0 {
            (s, s)
        } else if i <= m {
            (windows[i - 1].left, windows[i - 1].right)
        } else {
            (t, t)
        }
    };

    let mut bends = Vec::new();
    let mut apex = s;
    let mut left = s;
    let mut right = s;
    let mut left_idx = 0usize;
    let mut right_idx = 0usize;

    let eps = 1e-12 * (s.dist(t) + windows.iter().map(|w| w.left.dist(w.right)).sum::<f64>() + 1.0);

    let mut i = 1;
    while i <= m + 1 {
        let (pl, pr) = portal(i);

        // Tighten the right side: pr narrows when it is counterclockwise of
        // the ray apex→right, and is accepted while it has not crossed the
        // left ray.
        if orient(apex, right, pr) >= -eps {
            if apex.dist(right) <= eps || orient(apex, left, pr) <= eps {
                right = pr;
                right_idx = i;
            } else {
                // Right sweep crossed the left chain point: apex advances.
                if left_idx >= 1 && left_idx <= m {
                    bends.push(Bend { window: left_idx - 1, is_left: true });
                }
                apex = left;
                right = apex;
                right_idx = left_idx;
                i = left_idx + 1;
                left = apex;
                continue;
            }
        }

        // Tighten the left side, mirrored.
        if orient(apex, left, pl) <= eps {
            if apex.dist(left) <= eps || orient(apex, right, pl) >= -eps {
                left = pl;
                left_idx = i;
            } else {
                if right_idx >= 1 && right_idx <= m {
                    bends.push(Bend { window: right_idx - 1, is_left: false });
                }
                apex = right;
                left = apex;
                left_idx = right_idx;
                i = right_idx + 1;
                right = apex;
                continue;
            }
        }

        i += 1;
    }

    TautPath { bends }
}

/// Crossing points of the taut polyline with each window, as the parameter
/// of `left.lerp(right, t)`; clamped to `[0, 1]`.
pub fn window_crossings(s: Vec2, t: Vec2, windows: &[Window], path: &TautPath) -> Vec<f64> {
    // Walk the polyline and intersect each leg with the windows between its
    // bend anchors.
    let mut anchors: Vec<(usize, Vec2)> = vec![(0, s)];
    for b in &path.bends {
        let w = windows[b.window];
        anchors.push((b.window + 1, if b.is_left { w.left } else { w.right }));
    }
    anchors.push((windows.len() + 1, t));

    let mut out = vec![0.0; windows.len()];
    for seg in anchors.windows(2) {
        let (i0, p0) = seg[0];
        let (i1, p1) = seg[1];
        for wi in i0.max(1)..i1 {
            let w = windows[wi - 1];
            let denom = (p1 - p0).cross(w.right - w.left);
            let t = if denom.abs() < 1e-300 {
                0.5
            } else {
                (p0 - w.left).cross(p1 - p0) / -denom
            };
            out[wi - 1] = t.clamp(0.0, 1.0);
        }
        // Windows at anchors get the anchor itself.
        if i1 >= 1 && i1 <= windows.len() {
            let w = windows[i1 - 1];
            let len = w.left.dist(w.right);
            out[i1 - 1] = if len == 0.0 { 0.0 } else { (p1 - w.left).norm() / len };
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    /// Rubber-band relaxation: coordinate descent on window parameters.
    /// The objective is convex, so this converges to the optimum.
    fn relaxed_length(s: Vec2, t: Vec2, windows: &[Window]) -> f64 {
        let m = windows.len();
        let mut ts = vec![0.5; m];
        let point = |w: &Window, t: f64| w.left.lerp(w.right, t);
        for _ in 0..4000 {
            let mut delta = 0.0;
            for i in 0..m {
                let prev = if i == 0 { s } else { point(&windows[i - 1], ts[i - 1]) };
                let next = if i + 1 == m { t } else { point(&windows[i + 1], ts[i + 1]) };
                // Optimal crossing of segment (left,right) between prev/next:
                // minimize |prev-x| + |x-next| over the segment; solve by
                // golden-section (robust against the kink at reflection).
                let w = &windows[i];
                let f = |tt: f64| {
                    let x = point(w, tt);
                    prev.dist(x) + x.dist(next)
                };
                let (mut a, mut b) = (0.0, 1.0);
                for _ in 0..60 {
                    let m1 = a + (b - a) * 0.381_966_011_250_105;
                    let m2 = b - (b - a) * 0.381_966_011_250_105;
                    if f(m1) <= f(m2) {
                        b = m2;
                    } else {
                        a = m1;
                    }
                }
                let tn = 0.5 * (a + b);
                delta += (tn - ts[i]).abs();
                ts[i] = tn;
            }
            if delta < 1e-13 {
                break;
            }
        }
        let mut len = 0.0;
        let mut cur = s;
        for i in 0..m {
            let x = point(&windows[i], ts[i]);
            len += cur.dist(x);
            cur = x;
        }
        len + cur.dist(t)
    }

    #[test]
    fn straight_corridor_no_bends() {
        let windows = vec![
            Window { left: Vec2::new(1.0, 1.0), right: Vec2::new(1.0, -1.0) },
            Window { left: Vec2::new(2.0, 1.0), right: Vec2::new(2.0, -1.0) },
        ];
        let path = funnel(Vec2::new(0.0, 0.0), Vec2::new(3.0, 0.0), &windows);
        assert!(path.bends.is_empty());
        assert!((path.length(Vec2::new(0.0, 0.0), Vec2::new(3.0, 0.0), &windows) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn single_bend_around_offset_window() {
        // Narrow window forces a bend at its right endpoint.
        let windows = vec![Window { left: Vec2::new(1.0, 3.0), right: Vec2::new(1.0, 2.0) }];
        let s = Vec2::new(0.0, 0.0);
        let t = Vec2::new(2.0, 0.0);
        let path = funnel(s, t, &windows);
        assert_eq!(path.bends, vec![Bend { window: 0, is_left: false }]);
        let expect = s.dist(Vec2::new(1.0, 2.0)) + Vec2::new(1.0, 2.0).dist(t);
        assert!((path.length(s, t, &windows) - expect).abs() < 1e-12);
    }

    #[test]
    fn matches_rubber_band_on_random_corridors() {
        let mut rng = Rng::new(2024);
        for case in 0..60 {
            // Random monotone corridor along x with varying widths/offsets.
            let m = 1 + rng.below(8);
            let mut windows = Vec::new();
            for i in 0..m {
                let x = (i + 1) as f64;
                let c = rng.range(-1.5, 1.5);
                let hw = rng.range(0.05, 1.2);
                windows.push(Window {
                    left: Vec2::new(x, c + hw),
                    right: Vec2::new(x, c - hw),
                });
            }
            let s = Vec2::new(0.0, rng.range(-1.0, 1.0));
            let t = Vec2::new(m as f64 + 1.0, rng.range(-1.0, 1.0));
            let path = funnel(s, t, &windows);
            let lf = path.length(s, t, &windows);
            let lr = relaxed_length(s, t, &windows);
            assert!(
                lf <= lr + 1e-7 && lf >= lr - 1e-7,
                "case {case}: funnel {lf} vs relaxation {lr}"
            );
            // Crossing points lie on their windows in order.
            let ts = window_crossings(s, t, &windows, &path);
            assert_eq!(ts.len(), m);
            for v in ts {
                assert!((0.0..=1.0).contains(&v));
            }
        }
    }

    #[test]
    fn collinear_graze_reports_bend_or_straight() {
        // Target exactly behind a window endpoint.
        let windows = vec![Window { left: Vec2::new(1.0, 1.0), right: Vec2::new(1.0, 0.0) }];
        let s = Vec2::new(0.0, 0.0);
        let t = Vec2::new(2.0, 0.0);
        let path = funnel(s, t, &windows);
        let len = path.length(s, t, &windows);
        assert!((len - 2.0).abs() < 1e-12);
    }
}
