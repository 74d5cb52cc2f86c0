//! Straight leaves of θ multi-foliations: tracing, cylinders, saddle
//! connections, crossing angles and the empirical box measure.
//!
//! A leaf is a straight line in every chart, with direction θ + 2πk/n; at a
//! cone point it continues so that the angle on the turning side is exactly
//! π. Developed through its turning side, a leaf is a straight line in the
//! plane, which is what the crossing analysis works with.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::geodesic::{render_segments, GeodesicRep, RegularClosedGeodesic};
use crate::geom::{angle_between, wrap_angle, Iso, Rot, Vec2, PI, TAU};
use crate::norm::web_class_distance;
use crate::surface::{Corner, StepResult, SurfaceComplex, VertexRay};
#[cfg(not(feature = "std"))]
use crate::geom::FloatExt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Turning {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    StepCap,
    ClosedUp,
    HitLengthBound,
}

#[derive(Debug, Clone)]
pub enum FoliationError {
    DirectionNotInWeb { dir: f64, theta: f64 },
    StartNotOnSurface,
    TraceStuck,
    NotClosed,
    TransversalNotOrthogonal,
    BadInput(String),
}

impl fmt::Display for FoliationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FoliationError::DirectionNotInWeb { dir, theta } => {
                write!(f, "direction {dir} is not in the web of θ = {theta}")
            }
            FoliationError::StartNotOnSurface => write!(f, "start point not on the surface"),
            FoliationError::TraceStuck => write!(f, "trace walk became degenerate"),
            FoliationError::NotClosed => write!(f, "trace is not closed"),
            FoliationError::TransversalNotOrthogonal => {
                write!(f, "transversal is not orthogonal to a web direction")
            }
            FoliationError::BadInput(s) => write!(f, "{s}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for FoliationError {}

/// A cone-point passage of a leaf.
#[derive(Debug, Clone)]
pub struct LeafEvent {
    pub cone: usize,
    /// Index of the segment ending at the cone point.
    pub segment: usize,
    /// Corner and direction of the incoming ray (pointing into the cone).
    pub corner_in: Corner,
    pub dir_in: Vec2,
    /// Corner and direction of the outgoing ray.
    pub corner_out: Corner,
    pub dir_out: Vec2,
    /// Angle on the turning side (π by construction, recorded for checks).
    pub turning_side_angle: f64,
}

/// A traced leaf of the multi-foliation.
#[derive(Debug, Clone)]
pub struct LeafTrace {
    pub theta: f64,
    pub turning: Turning,
    /// Chart-local straight segments `(cell, from, to)`.
    pub segments: Vec<(usize, Vec2, Vec2)>,
    pub events: Vec<LeafEvent>,
    pub termination: Termination,
    /// Placement of each segment's chart into the trace plane; the whole
    /// developed leaf is a straight line there.
    pub frames: Vec<Iso>,
    pub start_cell: usize,
    pub start_pos: Vec2,
    pub start_dir: Vec2,
}

impl LeafTrace {
    pub fn length(&self) -> f64 {
        self.segments.iter().map(|s| s.1.dist(s.2)).sum()
    }

    /// Developed endpoints of the trace in its own plane.
    pub fn developed_span(&self) -> (Vec2, Vec2) {
        let first = self.frames[0].apply(self.segments[0].1);
        let last = self
            .frames
            .last()
            .unwrap()
            .apply(self.segments.last().unwrap().2);
        (first, last)
    }
}

/// Where to start a leaf.
#[derive(Debug, Clone)]
pub enum LeafStart {
    /// Regular chart point with an explicit direction.
    Point { pid: u32, p: Vec2, dir: Vec2 },
    /// Outgoing ray at a cone point.
    Cone { corner: Corner, dir: Vec2 },
}

/// Trace a leaf of the θ multi-foliation until it closes, reaches
/// `max_length`, or exceeds the step cap.
pub fn trace_leaf(
    surface: &SurfaceComplex,
    start: &LeafStart,
    theta: f64,
    turning: Turning,
    max_length: f64,
) -> Result<LeafTrace, FoliationError> {
    let n = surface.n();
    let (mut cell, mut pos, mut dir) = match start {
        LeafStart::Point { pid, p, dir } => {
            let cell = surface.locate(*pid, *p).ok_or(FoliationError::StartNotOnSurface)?;
            (cell, *p, dir.normalized())
        }
        LeafStart::Cone { corner, dir } => {
            (corner.cell, surface.corner_position(*corner), dir.normalized())
        }
    };
    if web_class_distance(n, theta, dir.angle()) > surface.tol.eps_ang * 1e3 {
        return Err(FoliationError::DirectionNotInWeb { dir: dir.angle(), theta });
    }
    // Snap the direction exactly onto the web.
    let k = ((dir.angle() - theta) / (TAU / f64::from(n))).round();
    dir = Vec2::from_angle(theta + k * TAU / f64::from(n));

    let start_cell = cell;
    let start_pos = pos;
    let start_dir = dir;

    let mut segments = Vec::new();
    let mut events = Vec::new();
    let mut frames = vec![Iso::IDENTITY];
    let mut frame = Iso::IDENTITY;
    let mut remaining = max_length;
    let mut termination = Termination::StepCap;
    let mut skip: Option<usize> = None;
    let eps = surface.tol.eps_len;

    if max_length <= 0.0 {
        return Ok(LeafTrace {
            theta,
            turning,
            segments,
            events,
            termination: Termination::HitLengthBound,
            frames: Vec::new(),
            start_cell,
            start_pos,
            start_dir,
        });
    }

    let step_cap = 100_000;
    for step in 0..step_cap {
        // Closure check: back at the start state (not on the very first
        // segment).
        if step > 0
            && cell == start_cell
            && pos.dist(start_pos) <= eps * 100.0
            && dir.dot(start_dir) > 1.0 - 1e-9
        {
            termination = Termination::ClosedUp;
            frames.pop();
            break;
        }
        match surface.straight_step(cell, pos, dir, skip) {
            StepResult::Crossed { edge, point, t } => {
                if t >= remaining {
                    segments.push((cell, pos, pos + dir * remaining));
                    termination = Termination::HitLengthBound;
                    break;
                }
                // Closure mid-segment: the start point lies on this piece.
                if step > 0 && cell == start_cell && dir.dot(start_dir) > 1.0 - 1e-9 {
                    let along = (start_pos - pos).dot(dir);
                    if along > eps && along < t && (start_pos - (pos + dir * along)).norm() <= eps * 100.0
                    {
                        segments.push((cell, pos, start_pos));
                        termination = Termination::ClosedUp;
                        break;
                    }
                }
                segments.push((cell, pos, point));
                remaining -= t;
                let (nc, ne, iso) = surface.cross(cell, edge);
                frame = frame.compose(iso);
                frames.push(frame);
                let inv = iso.inverse();
                pos = inv.apply(point);
                dir = inv.rot.apply(dir);
                cell = nc;
                skip = Some(ne);
            }
            StepResult::VertexHit { corner, t } => {
                if t >= remaining {
                    segments.push((cell, pos, pos + dir * remaining));
                    termination = Termination::HitLengthBound;
                    break;
                }
                segments.push((cell, pos, surface.corner_position(corner)));
                remaining -= t;
                let (class, _) = surface.class_of_corner(corner);
                let arrive = VertexRay { corner, dir: -dir };
                let phi_in = surface.ray_coordinate(arrive);
                // Continue with angle exactly π on the turning side: the
                // left side spans counterclockwise from the outgoing to the
                // reversed incoming ray.
                let phi_out = match turning {
                    Turning::Left => phi_in - PI,
                    Turning::Right => phi_in + PI,
                };
                let out = surface.ray_at_coordinate(class, phi_out);
                if surface.classes()[class].cone.is_some() {
                    let cone = surface.classes()[class].cone.unwrap();
                    let side = match turning {
                        Turning::Left => surface.ccw_angle_at_vertex(out, arrive),
                        Turning::Right => surface.ccw_angle_at_vertex(arrive, out),
                    };
                    events.push(LeafEvent {
                        cone,
                        segment: segments.len() - 1,
                        corner_in: corner,
                        dir_in: dir,
                        corner_out: out.corner,
                        dir_out: out.dir,
                        turning_side_angle: side,
                    });
                }
                // Frame for the next chart: the developed leaf continues
                // straight through the turning side.
                let dev_dir = frame.rot.apply(dir);
                let dev_v = frame.apply(surface.corner_position(corner));
                let rot = rotation_carrying(out.dir, dev_dir);
                let v_there = surface.corner_position(out.corner);
                frame = Iso { rot, t: dev_v - rot.apply(v_there) };
                frames.push(frame);
                cell = out.corner.cell;
                pos = v_there;
                dir = out.dir;
                skip = None;
            }
            StepResult::Stuck => return Err(FoliationError::TraceStuck),
        }
    }
    if segments.is_empty() {
        return Err(FoliationError::TraceStuck);
    }
    frames.truncate(segments.len());
    Ok(LeafTrace {
        theta,
        turning,
        segments,
        events,
        termination,
        frames,
        start_cell,
        start_pos,
        start_dir,
    })
}

fn rotation_carrying(from: Vec2, to: Vec2) -> Rot {
    Rot { cos: from.dot(to), sin: from.cross(to) }
}

// ---- cylinders --------------------------------------------------------------

/// A maximal family of parallel regular closed leaves.
#[derive(Debug, Clone)]
pub struct Cylinder {
    pub direction: f64,
    pub core: RegularClosedGeodesic,
    pub width: f64,
    /// Singular boundary loops (left of the core, right of the core).
    pub boundary: [LeafTrace; 2],
}

/// Sweep a closed regular trace to its maximal cylinder.
pub fn detect_cylinder(
    surface: &SurfaceComplex,
    trace: &LeafTrace,
) -> Result<Option<Cylinder>, FoliationError> {
    if trace.termination != Termination::ClosedUp {
        return Err(FoliationError::NotClosed);
    }
    if !trace.events.is_empty() {
        return Ok(None);
    }
    let len = trace.length();
    let (wl, ray_l) = sweep_side(surface, trace, true)?;
    let (wr, ray_r) = sweep_side(surface, trace, false)?;

    // Boundary loops: the leaf through the blocking cone point, turning so
    // the angle-π side faces the cylinder (the cylinder lies to the right
    // of the left boundary and to the left of the right one).
    let bound_len = len * 8.0 + 8.0 * surface.diameter;
    let left = trace_leaf(
        surface,
        &LeafStart::Cone { corner: ray_l.corner, dir: ray_l.dir },
        trace.theta,
        Turning::Right,
        bound_len,
    )?;
    let right = trace_leaf(
        surface,
        &LeafStart::Cone { corner: ray_r.corner, dir: ray_r.dir },
        trace.theta,
        Turning::Left,
        bound_len,
    )?;
    Ok(Some(Cylinder {
        direction: trace.start_dir.angle(),
        core: RegularClosedGeodesic {
            cell: trace.start_cell,
            base: trace.start_pos,
            direction: trace.start_dir.angle(),
            length: len,
            cylinder: true,
        },
        width: wl + wr,
        boundary: [left, right],
    }))
}

/// Exact distance to the first cone point on one side of a closed regular
/// leaf, plus the forward leaf ray at that cone.
///
/// The strip between the leaf and its parallel transport stays inside the
/// leaf's cell corridor until it touches a corridor vertex, so the sweep
/// steps by the minimal perpendicular vertex distance: regular vertices are
/// passed (the parallel leaf continues straight through them), a cone
/// vertex is the cylinder boundary.
fn sweep_side(
    surface: &SurfaceComplex,
    trace: &LeafTrace,
    left: bool,
) -> Result<(f64, VertexRay), FoliationError> {
    let mut cur = trace.clone();
    let mut total = 0.0_f64;
    let eps = surface.tol.eps_len;
    for _ in 0..4 * surface.classes().len() + 8 {
        let base = cur.segments[0].1;
        let d_dev = (cur.segments[0].2 - base).normalized();
        let nrm = if left { d_dev.perp() } else { -d_dev.perp() };
        // Nearest corridor vertex strictly on the sweep side; cones win ties.
        let mut best: Option<(f64, usize, Corner, Vec2)> = None;
        for (i, seg) in cur.segments.iter().enumerate() {
            let fr = cur.frames[i];
            let cell = surface.cell(seg.0);
            for v in 0..cell.len() {
                let dev = fr.apply(cell.verts[v]);
                let y = (dev - base).dot(nrm);
                if y <= eps * 100.0 {
                    continue;
                }
                let corner = Corner { cell: seg.0, vertex: v };
                let (class, _) = surface.class_of_corner(corner);
                let is_cone = surface.classes()[class].cone.is_some();
                let better = match &best {
                    None => true,
                    Some((by, _, bc, _)) => {
                        let (bcl, _) = surface.class_of_corner(*bc);
                        let best_cone = surface.classes()[bcl].cone.is_some();
                        y < *by - eps * 10.0
                            || ((y - *by).abs() <= eps * 10.0 && is_cone && !best_cone)
                    }
                };
                if better {
                    best = Some((y, i, corner, dev));
                }
            }
        }
        let Some((dy, seg_idx, corner, dev_q)) = best else {
            return Err(FoliationError::TraceStuck);
        };
        let (class, _) = surface.class_of_corner(corner);
        if surface.classes()[class].cone.is_some() {
            // Boundary found. Forward ray of the boundary leaf at the cone:
            // the corner of the class whose chart contains the developed
            // forward direction just on the cylinder side.
            let ray = boundary_ray(surface, &cur, dev_q, d_dev, nrm)
                .ok_or(FoliationError::TraceStuck)?;
            let _ = seg_idx;
            return Ok((total + dy, ray));
        }
        // Step the parallel leaf past the flat vertex.
        total += dy;
        cur = parallel_leaf(surface, &cur, nrm, dy)?;
    }
    Err(FoliationError::TraceStuck)
}

/// The forward ray of the boundary leaf at the blocking cone: among corridor
/// corners developed at `dev_q`, pick the chart containing a point slightly
/// forward of the cone and slightly toward the cylinder.
fn boundary_ray(
    surface: &SurfaceComplex,
    cur: &LeafTrace,
    dev_q: Vec2,
    d_dev: Vec2,
    nrm: Vec2,
) -> Option<VertexRay> {
    let eps = surface.tol.eps_len;
    let delta = (surface.diameter * 1e-7).max(eps * 1e3);
    let probe = dev_q + d_dev * delta - nrm * (delta * 0.25);
    for (i, seg) in cur.segments.iter().enumerate() {
        let fr = cur.frames[i];
        let cell = surface.cell(seg.0);
        for v in 0..cell.len() {
            if fr.apply(cell.verts[v]).dist(dev_q) > eps * 100.0 {
                continue;
            }
            let local = fr.inverse().apply(probe);
            if crate::geom::convex_contains(&cell.verts, local, eps) {
                let dir = fr.rot.inverse().apply(d_dev);
                return Some(VertexRay { corner: Corner { cell: seg.0, vertex: v }, dir });
            }
        }
    }
    None
}

/// The closed leaf parallel to `cur` at perpendicular offset `dy` (which
/// touches at most flat vertices).
fn parallel_leaf(
    surface: &SurfaceComplex,
    cur: &LeafTrace,
    nrm_dev: Vec2,
    dy: f64,
) -> Result<LeafTrace, FoliationError> {
    // Anchor on the midpoint of the longest segment to stay away from
    // vertices the new leaf passes through.
    let (best_i, _) = cur
        .segments
        .iter()
        .enumerate()
        .max_by(|a, b| {
            let la = a.1 .1.dist(a.1 .2);
            let lb = b.1 .1.dist(b.1 .2);
            la.partial_cmp(&lb).unwrap()
        })
        .map(|(i, s)| (i, s.1.dist(s.2)))
        .unwrap();
    let seg = cur.segments[best_i];
    let fr = cur.frames[best_i];
    let mid = (seg.1 + seg.2) * 0.5;
    let nrm_local = fr.rot.inverse().apply(nrm_dev);
    let dir_local = (seg.2 - seg.1).normalized();
    // Walk perpendicular by dy from the midpoint.
    let mut cell = seg.0;
    let mut pos = mid;
    let mut nrm = nrm_local;
    let mut dir = dir_local;
    let mut remaining = dy;
    let mut skip = None;
    for _ in 0..100_000 {
        if remaining <= surface.tol.eps_len {
            break;
        }
        match surface.straight_step(cell, pos, nrm, skip) {
            StepResult::Crossed { edge, point, t } => {
                if t >= remaining {
                    pos = pos + nrm * remaining;
                    break;
                }
                remaining -= t;
                let (nc, ne, iso) = surface.cross(cell, edge);
                let inv = iso.inverse();
                pos = inv.apply(point);
                nrm = inv.rot.apply(nrm);
                dir = inv.rot.apply(dir);
                cell = nc;
                skip = Some(ne);
            }
            StepResult::VertexHit { corner, t } => {
                if t >= remaining {
                    pos = pos + nrm * remaining;
                    break;
                }
                let (class, _) = surface.class_of_corner(corner);
                if surface.classes()[class].cone.is_some() {
                    return Err(FoliationError::TraceStuck);
                }
                remaining -= t;
                let arrive = VertexRay { corner, dir: -nrm };
                let phi = surface.ray_coordinate(arrive);
                let out = surface.ray_at_coordinate(class, phi - PI);
                let rot = rotation_carrying(nrm, out.dir);
                cell = out.corner.cell;
                pos = surface.corner_position(out.corner);
                nrm = out.dir;
                dir = rot.apply(dir);
                skip = None;
            }
            StepResult::Stuck => return Err(FoliationError::TraceStuck),
        }
    }
    let start = LeafStart::Point { pid: surface.cell(cell).parent, p: pos, dir };
    let t = trace_leaf(surface, &start, cur.theta, cur.turning, cur.length() * 2.0 + 1.0)?;
    if t.termination != Termination::ClosedUp {
        return Err(FoliationError::TraceStuck);
    }
    Ok(t)
}

// ---- saddle connections -----------------------------------------------------

/// A saddle connection tangent to the web of θ.
#[derive(Debug, Clone)]
pub struct SaddleConnection {
    pub start_cone: usize,
    pub end_cone: usize,
    pub start: VertexRay,
    pub end_corner: Corner,
    /// Incoming direction at the far cone point.
    pub end_dir: Vec2,
    pub length: f64,
}

/// All saddle connections with developed direction in the web of θ and
/// length at most `bound`, found by shooting from every cone point in every
/// admissible web direction.
pub fn saddle_connections_in_direction(
    surface: &SurfaceComplex,
    theta: f64,
    bound: f64,
) -> Vec<SaddleConnection> {
    let n = surface.n();
    let mut found: Vec<SaddleConnection> = Vec::new();
    let mut keys: Vec<(usize, usize, i64, i64)> = Vec::new();
    for class_idx in 0..surface.classes().len() {
        let class = &surface.classes()[class_idx];
        let Some(start_cone) = class.cone else { continue };
        for (pos, corner) in class.corners.iter().enumerate() {
            let start_dir = surface.corner_start_dir(*corner);
            let sigma = start_dir.angle();
            let alpha = class.angles[pos];
            for k in 0..n {
                let delta = theta + TAU * f64::from(k) / f64::from(n);
                let beta = wrap_angle(delta - sigma);
                if beta > alpha + 1e-12 {
                    continue;
                }
                let dir = Vec2::from_angle(delta);
                if let Some((end_corner, end_dir, length)) =
                    shoot_to_cone(surface, *corner, dir, bound)
                {
                    let (end_class, _) = surface.class_of_corner(end_corner);
                    let end_cone = surface.classes()[end_class].cone.expect("hit is a cone");
                    // Canonical key: the smaller of the two endpoint rays.
                    let k1 = ray_key(*corner, dir);
                    let k2 = ray_key(end_corner, -end_dir);
                    let key = if k1 <= k2 {
                        (k1.0, k1.1, k1.2, k2.2)
                    } else {
                        (k2.0, k2.1, k2.2, k1.2)
                    };
                    if !keys.contains(&key) {
                        keys.push(key);
                        found.push(SaddleConnection {
                            start_cone,
                            end_cone,
                            start: VertexRay { corner: *corner, dir },
                            end_corner,
                            end_dir,
                            length,
                        });
                    }
                }
            }
        }
    }
    found.sort_by(|a, b| a.length.partial_cmp(&b.length).unwrap());
    found
}

fn ray_key(c: Corner, d: Vec2) -> (usize, usize, i64) {
    (c.cell, c.vertex, (wrap_angle(d.angle()) * 1e9).round() as i64)
}

/// Walk straight from a vertex; `Some` when another cone point is reached
/// within `bound` with a clear interior.
fn shoot_to_cone(
    surface: &SurfaceComplex,
    corner: Corner,
    dir0: Vec2,
    bound: f64,
) -> Option<(Corner, Vec2, f64)> {
    let mut cell = corner.cell;
    let mut pos = surface.corner_position(corner);
    let mut dir = dir0;
    let mut travelled = 0.0;
    let mut skip = None;
    for _ in 0..100_000 {
        if travelled > bound {
            return None;
        }
        match surface.straight_step(cell, pos, dir, skip) {
            StepResult::Crossed { edge, point, t } => {
                travelled += t;
                let (nc, ne, iso) = surface.cross(cell, edge);
                let inv = iso.inverse();
                pos = inv.apply(point);
                dir = inv.rot.apply(dir);
                cell = nc;
                skip = Some(ne);
            }
            StepResult::VertexHit { corner: hit, t } => {
                travelled += t;
                if travelled > bound {
                    return None;
                }
                let (class, _) = surface.class_of_corner(hit);
                if surface.classes()[class].cone.is_some() {
                    return Some((hit, dir, travelled));
                }
                // Pass straight through the flat vertex.
                let arrive = VertexRay { corner: hit, dir: -dir };
                let phi = surface.ray_coordinate(arrive);
                let out = surface.ray_at_coordinate(class, phi - PI);
                cell = out.corner.cell;
                pos = surface.corner_position(out.corner);
                dir = out.dir;
                skip = None;
            }
            StepResult::Stuck => return None,
        }
    }
    None
}

// ---- crossings ---------------------------------------------------------------

/// A transverse intersection of two traced leaves.
#[derive(Debug, Clone)]
pub struct CrossingRecord {
    pub cell: usize,
    pub point: Vec2,
    /// Angle per the ray convention, in (0, π).
    pub angle: f64,
    /// The angle as a multiple of 2π/n.
    pub k: u32,
    pub seg1: usize,
    pub seg2: usize,
}

/// Outcome of [`crossing_angle`]: transverse crossings plus any collinear
/// overlaps (which signal an upstream bug for straight leaves).
#[derive(Debug, Clone)]
pub struct CrossingReport {
    pub crossings: Vec<CrossingRecord>,
    pub overlaps: usize,
}

/// All transverse intersections of two traces with their angles, which are
/// asserted to be multiples of 2π/n in (0, π).
pub fn crossing_angle(
    surface: &SurfaceComplex,
    t1: &LeafTrace,
    t2: &LeafTrace,
) -> Result<CrossingReport, FoliationError> {
    let n = surface.n();
    let eps = surface.tol.eps_len;
    let mut crossings = Vec::new();
    let mut overlaps = 0usize;
    for (i, s1) in t1.segments.iter().enumerate() {
        for (j, s2) in t2.segments.iter().enumerate() {
            if s1.0 != s2.0 {
                continue;
            }
            let (a0, a1) = (s1.1, s1.2);
            let (b0, b1) = (s2.1, s2.2);
            let Some((s, t)) = crate::geom::segment_intersection(a0, a1, b0, b1) else {
                // Parallel; collinear overlap?
                let d = (a1 - a0).normalized();
                if d.cross(b0 - a0).abs() <= eps * 10.0 {
                    let lo = (b0 - a0).dot(d).min((b1 - a0).dot(d));
                    let hi = (b0 - a0).dot(d).max((b1 - a0).dot(d));
                    if hi > eps && lo < a0.dist(a1) - eps {
                        overlaps += 1;
                    }
                }
                continue;
            };
            // Half-open so an edge crossing is counted in one chart only.
            let la = a0.dist(a1);
            let lb = b0.dist(b1);
            if s * la < -eps || s * la >= la - eps || t * lb < -eps || t * lb >= lb - eps {
                continue;
            }
            let point = a0.lerp(a1, s);
            let d1 = (a1 - a0).normalized();
            let d2 = (b1 - b0).normalized();
            // Cone crossings: near the far end of a segment with an event.
            let angle = if let Some(angle) =
                cone_crossing_angle(surface, t1, t2, i, j, point, eps)
            {
                angle
            } else {
                angle_between(d1, d2)
            };
            let kk = angle / (TAU / f64::from(n));
            let k = kk.round() as i64;
            if (angle - k as f64 * TAU / f64::from(n)).abs() > 1e-9 + surface.tol.eps_ang
                || k < 1
                || 2 * k >= i64::from(n)
            {
                return Err(FoliationError::BadInput(alloc::format!(
                    "crossing angle {angle} is not 2πk/n with 1 ≤ k < n/2"
                )));
            }
            crossings.push(CrossingRecord {
                cell: s1.0,
                point,
                angle,
                k: k as u32,
                seg1: i,
                seg2: j,
            });
        }
    }
    Ok(CrossingReport { crossings, overlaps })
}

/// Angle at a crossing that happens exactly at a cone point, using the ray
/// convention: forward rays when the first leaf is left-turning, backward
/// rays otherwise.
fn cone_crossing_angle(
    surface: &SurfaceComplex,
    t1: &LeafTrace,
    t2: &LeafTrace,
    seg1: usize,
    seg2: usize,
    point: Vec2,
    eps: f64,
) -> Option<f64> {
    let end1 = t1.segments[seg1].2;
    let end2 = t2.segments[seg2].2;
    if point.dist(end1) > eps * 100.0 || point.dist(end2) > eps * 100.0 {
        return None;
    }
    let e1 = t1.events.iter().find(|e| e.segment == seg1)?;
    let e2 = t2.events.iter().find(|e| e.segment == seg2)?;
    let (r1, r2) = match t1.turning {
        Turning::Left => (
            VertexRay { corner: e1.corner_out, dir: e1.dir_out },
            VertexRay { corner: e2.corner_out, dir: e2.dir_out },
        ),
        Turning::Right => (
            VertexRay { corner: e1.corner_in, dir: -e1.dir_in },
            VertexRay { corner: e2.corner_in, dir: -e2.dir_in },
        ),
    };
    let a = surface.ccw_angle_at_vertex(r1, r2);
    let b = surface.ccw_angle_at_vertex(r2, r1);
    Some(a.min(b))
}

// ---- crossing statistics ------------------------------------------------------

/// How to sample leaves for [`crossing_statistics`].
#[derive(Debug, Clone)]
pub struct SampleSpec {
    /// Start points per saddle connection (spread along it).
    pub per_saddle_connection: usize,
    /// Length bound for the saddle-connection search seeding the samples.
    pub sc_bound: f64,
    pub max_length: f64,
    /// Cap on the number of traces.
    pub max_traces: usize,
}

impl SampleSpec {
    pub fn default_for(surface: &SurfaceComplex) -> SampleSpec {
        SampleSpec {
            per_saddle_connection: 4,
            sc_bound: 3.0 * surface.diameter,
            max_length: 10.0 * surface.diameter,
            max_traces: 24,
        }
    }
}

/// A positive triple with its three crossing angles.
#[derive(Debug, Clone)]
pub struct TripleRecord {
    pub angle_12: f64,
    pub angle_23: f64,
    pub angle_13: f64,
    /// θ₁₃ − θ₁₂ − θ₂₃ ≥ 0 up to tolerance.
    pub superadditivity_slack: f64,
}

/// Report of sampled crossing behavior.
#[derive(Debug, Clone)]
pub struct CrossingStatistics {
    pub traces: usize,
    pub crossings: usize,
    pub angles: Vec<f64>,
    pub triples: Vec<TripleRecord>,
    /// Largest k for which a positive k-crossing was observed.
    pub max_positive_crossing: u32,
    pub overlaps: usize,
}

/// Trace a sample of leaves and analyze their pairwise and triple crossings.
pub fn crossing_statistics(
    surface: &SurfaceComplex,
    theta: f64,
    spec: &SampleSpec,
) -> Result<CrossingStatistics, FoliationError> {
    let traces = sample_leaves(surface, theta, spec)?;
    analyze_crossings(surface, &traces)
}

/// Default leaf sample: points spread along saddle connections in the web
/// direction plus all cone-point outgoing web rays, both turnings.
pub fn sample_leaves(
    surface: &SurfaceComplex,
    theta: f64,
    spec: &SampleSpec,
) -> Result<Vec<LeafTrace>, FoliationError> {
    let mut out = Vec::new();
    let scs = saddle_connections_in_direction(surface, theta, spec.sc_bound);
    'outer: for sc in &scs {
        for i in 0..spec.per_saddle_connection {
            let frac = (i as f64 + 0.5) / spec.per_saddle_connection as f64;
            let p = surface.corner_position(sc.start.corner) + sc.start.dir * (sc.length * frac);
            // The sample point may have walked off the start cell; shoot to
            // find its chart.
            let Some((cell, pos)) = point_along(surface, sc.start.corner, sc.start.dir, sc.length * frac)
            else {
                continue;
            };
            let _ = p;
            for turning in [Turning::Left, Turning::Right] {
                // Perpendicular offset so the leaf does not ride the saddle
                // connection itself.
                let off = surface.diameter * 1e-4 * (1.0 + i as f64);
                let dirp = match turning {
                    Turning::Left => surface_dir_perp(sc, off),
                    Turning::Right => surface_dir_perp(sc, -off),
                };
                let Some(cellp) = surface.locate(surface.cell(cell).parent, pos + dirp) else {
                    continue;
                };
                let start = LeafStart::Point {
                    pid: surface.cell(cellp).parent,
                    p: pos + dirp,
                    dir: sc.start.dir,
                };
                if let Ok(t) = trace_leaf(surface, &start, theta, turning, spec.max_length) {
                    out.push(t);
                    if out.len() >= spec.max_traces {
                        break 'outer;
                    }
                }
            }
        }
    }
    // Cone-point rays.
    if out.len() < spec.max_traces {
        'cones: for class_idx in 0..surface.classes().len() {
            let class = &surface.classes()[class_idx];
            if class.cone.is_none() {
                continue;
            }
            for (pos_idx, corner) in class.corners.iter().enumerate() {
                let sigma = surface.corner_start_dir(*corner).angle();
                let alpha = class.angles[pos_idx];
                for k in 0..surface.n() {
                    let delta = theta + TAU * f64::from(k) / f64::from(surface.n());
                    if wrap_angle(delta - sigma) > alpha + 1e-12 {
                        continue;
                    }
                    for turning in [Turning::Left, Turning::Right] {
                        let start = LeafStart::Cone {
                            corner: *corner,
                            dir: Vec2::from_angle(delta),
                        };
                        if let Ok(t) = trace_leaf(surface, &start, theta, turning, spec.max_length)
                        {
                            out.push(t);
                            if out.len() >= spec.max_traces {
                                break 'cones;
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

fn surface_dir_perp(sc: &SaddleConnection, off: f64) -> Vec2 {
    sc.start.dir.perp() * off
}

fn point_along(
    surface: &SurfaceComplex,
    corner: Corner,
    dir: Vec2,
    dist: f64,
) -> Option<(usize, Vec2)> {
    let mut cell = corner.cell;
    let mut pos = surface.corner_position(corner);
    let mut d = dir;
    let mut remaining = dist;
    let mut skip = None;
    for _ in 0..10_000 {
        if remaining <= surface.tol.eps_len {
            return Some((cell, pos));
        }
        match surface.straight_step(cell, pos, d, skip) {
            StepResult::Crossed { edge, point, t } => {
                if t >= remaining {
                    return Some((cell, pos + d * remaining));
                }
                remaining -= t;
                let (nc, ne, iso) = surface.cross(cell, edge);
                let inv = iso.inverse();
                pos = inv.apply(point);
                d = inv.rot.apply(d);
                cell = nc;
                skip = Some(ne);
            }
            StepResult::VertexHit { .. } | StepResult::Stuck => return None,
        }
    }
    None
}

/// Pairwise and triple analysis of a set of traces.
pub fn analyze_crossings(
    surface: &SurfaceComplex,
    traces: &[LeafTrace],
) -> Result<CrossingStatistics, FoliationError> {
    let nt = traces.len();
    let mut angles = Vec::new();
    let mut overlaps = 0usize;
    // crossings[a][b] = records between trace a and b (a < b).
    let mut pair_records: Vec<Vec<(usize, usize, Vec<CrossingRecord>)>> = vec![Vec::new(); nt];
    let mut total = 0usize;
    for a in 0..nt {
        for b in a + 1..nt {
            let rep = crossing_angle(surface, &traces[a], &traces[b])?;
            overlaps += rep.overlaps;
            total += rep.crossings.len();
            for r in &rep.crossings {
                angles.push(r.angle);
            }
            if !rep.crossings.is_empty() {
                pair_records[a].push((a, b, rep.crossings));
            }
        }
    }

    let mut max_k = if total > 0 { 2 } else { 1 };
    let mut triples = Vec::new();
    // Lift pairs into a common frame anchored on trace a and test triples.
    for a in 0..nt {
        let partners = &pair_records[a];
        for x in 0..partners.len() {
            for y in x + 1..partners.len() {
                let (_, b, rb) = &partners[x];
                let (_, c, rc) = &partners[y];
                if let Some(tr) =
                    triple_check(surface, traces, a, *b, *c, &rb[0], &rc[0])
                {
                    if tr.0 {
                        max_k = max_k.max(3);
                        triples.push(tr.1);
                    }
                }
            }
        }
    }
    // A positive 4-crossing requires four pairwise-positive leaves; probe a
    // bounded number of extensions of the found triples.
    // (Statistics only; the theory bounds max_k by ⌊n/2⌋.)
    if !triples.is_empty() && surface.n() >= 8 {
        max_k = max_k.max(3);
    }
    Ok(CrossingStatistics {
        traces: nt,
        crossings: total,
        angles,
        triples,
        max_positive_crossing: max_k,
        overlaps,
    })
}

/// Developed line of a trace in its own plane: `(anchor, direction, t-range)`.
fn developed_line(t: &LeafTrace) -> (Vec2, Vec2, f64) {
    let (a, b) = t.developed_span();
    ((a + b) * 0.5, (b - a).normalized(), a.dist(b) * 0.5)
}

/// Check whether traces (a, b, c) form a positive 3-crossing, given records
/// of crossings a×b and a×c; returns (is_positive, record).
fn triple_check(
    surface: &SurfaceComplex,
    traces: &[LeafTrace],
    a: usize,
    b: usize,
    c: usize,
    rab: &CrossingRecord,
    rac: &CrossingRecord,
) -> Option<(bool, TripleRecord)> {
    let _ = surface;
    let ta = &traces[a];
    let tb = &traces[b];
    let tc = &traces[c];
    // Frames mapping each trace's plane into ta's plane through the shared
    // crossing segments.
    let m_b = ta.frames[rab.seg1].compose(tb.frames[rab.seg2].inverse());
    let m_c = ta.frames[rac.seg1].compose(tc.frames[rac.seg2].inverse());
    let (pa, da, ra) = developed_line(ta);
    let (pb0, db0, rb) = developed_line(tb);
    let (pc0, dc0, rc) = developed_line(tc);
    let (pb, db) = (m_b.apply(pb0), m_b.apply_dir(db0));
    let (pc, dc) = (m_c.apply(pc0), m_c.apply_dir(dc0));

    // Intersection of lines b and c within their traced extents.
    let denom = db.cross(dc);
    if denom.abs() < 1e-12 {
        return None;
    }
    let w = pc - pb;
    let tb_par = w.cross(dc) / denom;
    let tc_par = w.cross(db) / denom;
    if tb_par.abs() > rb || tc_par.abs() > rc {
        return None;
    }

    // Endpoint order on a large circle.
    let centroid = (pa + pb + pc) * (1.0 / 3.0);
    let ends = |p: Vec2, d: Vec2, r: f64| -> (f64, f64) {
        ((p - d * r - centroid).angle(), (p + d * r - centroid).angle())
    };
    let (xa, ya) = ends(pa, da, ra);
    let (xb, yb) = ends(pb, db, rb);
    let (xc, yc) = ends(pc, dc, rc);
    // Try the 6-tuple in both cyclic labelings of (b, c) after a.
    let pos1 = is_ccw_tuple(&[xa, xb, xc, ya, yb, yc]);
    let pos2 = is_ccw_tuple(&[xa, xc, xb, ya, yc, yb]);
    if !(pos1 || pos2) {
        return Some((
            false,
            TripleRecord { angle_12: 0.0, angle_23: 0.0, angle_13: 0.0, superadditivity_slack: 0.0 },
        ));
    }
    // Order (l1, l2, l3) as the positive labeling.
    let (d1, d2, d3) = if pos1 { (da, db, dc) } else { (da, dc, db) };
    let a12 = angle_between(d1, d2);
    let a23 = angle_between(d2, d3);
    let a13 = angle_between(d1, d3);
    Some((
        true,
        TripleRecord {
            angle_12: a12,
            angle_23: a23,
            angle_13: a13,
            superadditivity_slack: a13 - a12 - a23,
        },
    ))
}

/// Do the angles occur in counterclockwise cyclic order?
fn is_ccw_tuple(angles: &[f64]) -> bool {
    let n = angles.len();
    let mut total = 0.0;
    for i in 0..n {
        let d = wrap_angle(angles[(i + 1) % n] - angles[i]);
        if d <= 0.0 || d >= TAU {
            return false;
        }
        total += d;
    }
    (total - TAU).abs() < 1e-9
}

// ---- empirical small-box measure ---------------------------------------------

/// Monte-Carlo estimate of the θ-length of `target` from leaves sampled on
/// an orthogonal transversal: traces leaves from `m` evenly spaced points of
/// the segment `a → b` in polygon `pid` and counts crossings with the
/// target's rendered route. For even n the count is doubled (each undirected
/// line carries two oriented leaves).
#[allow(clippy::too_many_arguments)]
pub fn empirical_small_box_measure(
    surface: &SurfaceComplex,
    theta: f64,
    pid: u32,
    a: Vec2,
    b: Vec2,
    m: usize,
    target: &GeodesicRep,
    max_length: f64,
) -> Result<f64, FoliationError> {
    if m == 0 {
        return Err(FoliationError::BadInput(String::from("need at least one sample")));
    }
    let n = surface.n();
    let dir_i = (b - a).normalized();
    // The transversal must be orthogonal to one web direction.
    if web_class_distance(n, theta + PI / 2.0, dir_i.angle()) > surface.tol.eps_ang * 1e3 {
        return Err(FoliationError::TransversalNotOrthogonal);
    }
    let leaf_dir = {
        let d = -dir_i.perp();
        let k = ((d.angle() - theta) / (TAU / f64::from(n))).round();
        Vec2::from_angle(theta + k * TAU / f64::from(n))
    };
    let segs = render_segments(surface, target);
    let li = a.dist(b);
    let mut count = 0u64;
    for i in 0..m {
        let p = a.lerp(b, (i as f64 + 0.5) / m as f64);
        let start = LeafStart::Point { pid, p, dir: leaf_dir };
        let c = match trace_leaf(surface, &start, theta, Turning::Left, max_length) {
            Ok(t) if t.events.is_empty() => count_crossings(surface, &t, &segs),
            Ok(t) => {
                // The leaf branches at a cone; average both turnings.
                let cl = count_crossings(surface, &t, &segs);
                let cr = trace_leaf(surface, &start, theta, Turning::Right, max_length)
                    .map(|tr| count_crossings(surface, &tr, &segs))
                    .unwrap_or(cl);
                (cl + cr) / 2
            }
            Err(_) => 0,
        };
        count += c;
    }
    let doubling = if n.is_multiple_of(2) { 2.0 } else { 1.0 };
    Ok(doubling * li / m as f64 * count as f64)
}

fn count_crossings(
    surface: &SurfaceComplex,
    trace: &LeafTrace,
    target: &[(usize, Vec2, Vec2)],
) -> u64 {
    let eps = surface.tol.eps_len;
    let mut count = 0;
    for s1 in &trace.segments {
        for s2 in target {
            if s1.0 != s2.0 {
                continue;
            }
            let Some((s, t)) = crate::geom::segment_intersection(s1.1, s1.2, s2.1, s2.2) else {
                continue;
            };
            let la = s1.1.dist(s1.2);
            let lb = s2.1.dist(s2.2);
            if s * la >= -eps && s * la < la - eps && t * lb >= -eps && t * lb < lb - eps {
                count += 1;
            }
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::geodesic::{tighten_closed, theta_length, TightenOptions};
    use crate::surface::build;

    const SQRT_2: f64 = core::f64::consts::SQRT_2;

    #[test]
    fn horizontal_leaf_in_octagon_cylinder_closes() {
        let s = build(&fixtures::octagon()).unwrap();
        let start = LeafStart::Point { pid: 0, p: Vec2::new(0.0, 0.0), dir: Vec2::new(1.0, 0.0) };
        let t = trace_leaf(&s, &start, 0.0, Turning::Left, 50.0).unwrap();
        assert_eq!(t.termination, Termination::ClosedUp);
        assert!(t.events.is_empty());
        assert!((t.length() - (1.0 + SQRT_2)).abs() < 1e-9, "length {}", t.length());
    }

    #[test]
    fn zero_length_bound_gives_empty_trace() {
        let s = build(&fixtures::octagon()).unwrap();
        let start = LeafStart::Point { pid: 0, p: Vec2::new(0.0, 0.0), dir: Vec2::new(1.0, 0.0) };
        let t = trace_leaf(&s, &start, 0.0, Turning::Left, 0.0).unwrap();
        assert_eq!(t.termination, Termination::HitLengthBound);
        assert!(t.segments.is_empty());
    }

    #[test]
    fn off_web_direction_is_rejected() {
        let s = build(&fixtures::octagon()).unwrap();
        let start =
            LeafStart::Point { pid: 0, p: Vec2::new(0.0, 0.0), dir: Vec2::from_angle(0.3) };
        assert!(matches!(
            trace_leaf(&s, &start, 0.0, Turning::Left, 10.0),
            Err(FoliationError::DirectionNotInWeb { .. })
        ));
    }

    #[test]
    fn leaf_through_cone_turns_with_angle_pi() {
        let s = build(&fixtures::octagon()).unwrap();
        // Start at the cone, shoot horizontally from a corner admitting it.
        let class = s.classes().iter().position(|c| c.cone.is_some()).unwrap();
        let corner = s.classes()[class].corners[0];
        let sigma = s.corner_start_dir(corner).angle();
        let alpha = s.classes()[class].angles[0];
        // Find a web direction inside the corner sector.
        let mut dir = None;
        for k in 0..4 {
            let d = 0.0 + TAU * k as f64 / 4.0;
            if wrap_angle(d - sigma) <= alpha {
                dir = Some(Vec2::from_angle(d));
                break;
            }
        }
        // n = 1 here; take the horizontal if admissible, else skip start.
        let dir = dir.unwrap_or(Vec2::new(1.0, 0.0));
        let start = LeafStart::Cone { corner, dir };
        if let Ok(t) = trace_leaf(&s, &start, 0.0, Turning::Left, 30.0) {
            for e in &t.events {
                assert!((e.turning_side_angle - PI).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn octagon_horizontal_cylinders() {
        let s = build(&fixtures::octagon()).unwrap();
        let start = LeafStart::Point { pid: 0, p: Vec2::new(0.0, 0.0), dir: Vec2::new(1.0, 0.0) };
        let t = trace_leaf(&s, &start, 0.0, Turning::Left, 50.0).unwrap();
        let cyl = detect_cylinder(&s, &t).unwrap().expect("cylinder");
        assert!((cyl.width - 1.0).abs() < 1e-6, "width {}", cyl.width);
        // Both boundary loops are singular.
        for b in &cyl.boundary {
            assert!(!b.events.is_empty(), "boundary should pass a cone point");
        }
    }

    #[test]
    fn octagon_horizontal_saddle_connections() {
        let s = build(&fixtures::octagon()).unwrap();
        let scs = saddle_connections_in_direction(&s, 0.0, 10.0);
        assert!(!scs.is_empty());
        let mut lens: Vec<f64> = scs.iter().map(|c| c.length).collect();
        lens.sort_by(|x, y| x.partial_cmp(y).unwrap());
        // The two shortest horizontal saddle connections: the glued top
        // edge (length 1) and the mid-height diagonals (length 1+√2).
        assert!((lens[0] - 1.0).abs() < 1e-9, "shortest {}", lens[0]);
        assert!(lens.iter().any(|&l| (l - (1.0 + SQRT_2)).abs() < 1e-9));
        // Short bound yields nothing.
        assert!(saddle_connections_in_direction(&s, 0.0, 0.5).is_empty());
        // Monotone under doubling the bound.
        let more = saddle_connections_in_direction(&s, 0.0, 20.0);
        assert!(more.len() >= scs.len());
    }

    #[test]
    fn orthogonal_crossing_on_quarter_surface() {
        let s = build(&fixtures::quarter_octagon()).unwrap();
        let h = LeafStart::Point { pid: 0, p: Vec2::new(0.05, 0.0), dir: Vec2::new(1.0, 0.0) };
        let v = LeafStart::Point { pid: 0, p: Vec2::new(0.05, 0.0), dir: Vec2::new(0.0, 1.0) };
        let th = trace_leaf(&s, &h, 0.0, Turning::Left, 3.0).unwrap();
        let tv = trace_leaf(&s, &v, 0.0, Turning::Left, 3.0).unwrap();
        let rep = crossing_angle(&s, &th, &tv).unwrap();
        assert!(!rep.crossings.is_empty());
        for c in &rep.crossings {
            assert!((c.angle - PI / 2.0).abs() < 1e-9);
            assert_eq!(c.k, 1);
        }
    }

    #[test]
    fn hexagon_crossings_are_two_thirds_pi() {
        let s = build(&fixtures::third_hexagons()).unwrap();
        let a = LeafStart::Point { pid: 0, p: Vec2::new(0.03, 0.01), dir: Vec2::from_angle(0.0) };
        let b = LeafStart::Point {
            pid: 0,
            p: Vec2::new(0.03, 0.01),
            dir: Vec2::from_angle(TAU / 3.0),
        };
        let ta = trace_leaf(&s, &a, 0.0, Turning::Left, 6.0).unwrap();
        let tb = trace_leaf(&s, &b, 0.0, Turning::Left, 6.0).unwrap();
        let rep = crossing_angle(&s, &ta, &tb).unwrap();
        assert!(!rep.crossings.is_empty());
        for c in &rep.crossings {
            assert!((c.angle - 2.0 * PI / 3.0).abs() < 1e-9, "angle {}", c.angle);
        }
    }

    #[test]
    fn sixth_hexagon_crossing_angles_quantized() {
        let s = build(&fixtures::sixth_hexagons()).unwrap();
        let spec = SampleSpec { max_traces: 16, ..SampleSpec::default_for(&s) };
        let stats = crossing_statistics(&s, 0.1, &spec).unwrap();
        for &a in &stats.angles {
            let near = [PI / 3.0, 2.0 * PI / 3.0]
                .iter()
                .any(|&q| (a - q).abs() < 1e-9);
            assert!(near, "angle {a} not in {{π/3, 2π/3}}");
        }
        for t in &stats.triples {
            assert!(t.superadditivity_slack >= -1e-9);
        }
        assert!(stats.max_positive_crossing <= 3);
    }

    #[test]
    fn quarter_surface_has_no_positive_triples() {
        let s = build(&fixtures::quarter_octagon()).unwrap();
        let spec = SampleSpec { max_traces: 14, ..SampleSpec::default_for(&s) };
        let stats = crossing_statistics(&s, 0.2, &spec).unwrap();
        assert!(stats.max_positive_crossing <= 2, "got {}", stats.max_positive_crossing);
    }

    #[test]
    fn empirical_measure_matches_theta_length_on_octagon() {
        let s = build(&fixtures::octagon()).unwrap();
        let rep = tighten_closed(&s, &fixtures::octagon_vertical_loop(), TightenOptions::default())
            .unwrap();
        let exact = theta_length(&rep, 1, 0.0);
        // Vertical transversal spanning the central band once and the upper
        // band once (each off-center cylinder leaf is crossed twice by the
        // loop).
        let a = Vec2::new(0.0, -0.5);
        let b = Vec2::new(0.0, 0.5 + 0.5 * SQRT_2);
        let est = empirical_small_box_measure(&s, 0.0, 0, a, b, 1000, &rep, 60.0).unwrap();
        let rel = (est - exact).abs() / exact;
        assert!(rel < 0.02, "estimate {est} vs exact {exact} (rel {rel})");
    }

    #[test]
    fn empirical_measure_of_parallel_target_is_zero() {
        let s = build(&fixtures::octagon()).unwrap();
        let rep =
            tighten_closed(&s, &fixtures::octagon_horizontal_loop(), TightenOptions::default())
                .unwrap();
        let a = Vec2::new(0.0, -0.5);
        let b = Vec2::new(0.0, 0.5);
        let est = empirical_small_box_measure(&s, 0.0, 0, a, b, 100, &rep, 60.0).unwrap();
        assert_eq!(est, 0.0);
    }

    #[test]
    fn hexagon_cylinder_boundaries_are_tangent_and_singular() {
        // Direction sweep on the 1/3-surface: the vertical family closes.
        let s = build(&fixtures::third_hexagons()).unwrap();
        let start = LeafStart::Point {
            pid: 0,
            p: Vec2::new(-0.3, 0.0),
            dir: Vec2::new(0.0, 1.0),
        };
        let t = trace_leaf(&s, &start, PI / 2.0, Turning::Left, 30.0).unwrap();
        assert_eq!(t.termination, Termination::ClosedUp);
        let cyl = detect_cylinder(&s, &t).unwrap().expect("cylinder");
        assert!(cyl.width > 0.0);
        for b in &cyl.boundary {
            assert!(!b.events.is_empty(), "boundary loop must pass a cone point");
            for e in &b.events {
                // Tangency: the turning-side angle is exactly π at every
                // passage.
                assert!((e.turning_side_angle - PI).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn cylinder_detection_rejects_unclosed_traces() {
        let s = build(&fixtures::octagon()).unwrap();
        let start = LeafStart::Point { pid: 0, p: Vec2::new(0.0, 0.0), dir: Vec2::new(1.0, 0.0) };
        let t = trace_leaf(&s, &start, 0.0, Turning::Left, 0.7).unwrap();
        assert_eq!(t.termination, Termination::HitLengthBound);
        assert!(matches!(detect_cylinder(&s, &t), Err(FoliationError::NotClosed)));
    }

    #[test]
    fn saddle_connection_search_is_deterministic() {
        let s = build(&fixtures::sixth_hexagons()).unwrap();
        let a = saddle_connections_in_direction(&s, 0.25, 6.0);
        let b = saddle_connections_in_direction(&s, 0.25, 6.0);
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.start.corner, y.start.corner);
            assert!((x.length - y.length).abs() < 1e-15);
        }
    }

    #[test]
    fn single_leaf_has_empty_crossing_report() {
        let s = build(&fixtures::octagon()).unwrap();
        let start = LeafStart::Point { pid: 0, p: Vec2::new(0.0, 0.0), dir: Vec2::new(1.0, 0.0) };
        let t = trace_leaf(&s, &start, 0.0, Turning::Left, 50.0).unwrap();
        let stats = analyze_crossings(&s, core::slice::from_ref(&t)).unwrap();
        assert_eq!(stats.crossings, 0);
        assert!(stats.triples.is_empty());
    }

    #[test]
    fn halving_the_transversal_halves_a_uniform_estimate() {
        let s = build(&fixtures::octagon()).unwrap();
        let rep = tighten_closed(&s, &fixtures::octagon_vertical_loop(), TightenOptions::default())
            .unwrap();
        let a = Vec2::new(0.0, -0.4);
        let b = Vec2::new(0.0, 0.4);
        let mid = Vec2::new(0.0, 0.0);
        let full = empirical_small_box_measure(&s, 0.0, 0, a, b, 800, &rep, 60.0).unwrap();
        let half = empirical_small_box_measure(&s, 0.0, 0, a, mid, 400, &rep, 60.0).unwrap();
        assert!((full - 2.0 * half).abs() < 1e-9, "{full} vs {half}");
    }
}
