//! CAT(0) tightening of closed curves and length evaluation.
//!
//! A closed curve is carried combinatorially as a cyclic word of tokens:
//! edge crossings and vertex touches. Tightening alternates two moves until
//! the length is stationary:
//!
//! * corridor straightening — develop the cells between consecutive touches
//!   and replace the path by the taut polyline through the windows
//!   ([`crate::funnel`]); bends surface as new vertex touches;
//! * pivot relaxation — a touch whose smaller side angle is below π is
//!   rerouted across that side, which strictly shortens the curve.
//!
//! The fixed points are exactly the CAT(0) geodesics: concatenations of
//! saddle connections meeting at angles at least π on both sides, or
//! regular closed geodesics (cylinder curves) when no touch survives.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::funnel::{funnel, Window};
use crate::geom::{Iso, Vec2, PI};
use crate::norm::{web_norm, PolygonalNorm};
use crate::rng::Rng;
use crate::surface::{Corner, StepResult, SurfaceComplex, VertexRay};
#[cfg(not(feature = "std"))]
use crate::geom::FloatExt;

/// A closed (or open) piecewise-straight path given by chart waypoints.
///
/// Each waypoint is read in the chart the path is currently in: a waypoint
/// may lie beyond a glued edge of its polygon, in which case the straight
/// segment crosses that edge and continues in the neighboring chart (the
/// usual way of drawing paths on unfolded polygons). A waypoint whose
/// polygon id differs from the current one hops across the single glued
/// edge connecting the two polygons.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfacePath {
    pub closed: bool,
    pub waypoints: Vec<(u32, Vec2)>,
}

/// One saddle connection of a closed chain.
#[derive(Debug, Clone)]
pub struct Leg {
    /// Cone point the leg starts at.
    pub start_cone: usize,
    /// Direction in the chart of the starting cell, radians.
    pub direction: f64,
    pub length: f64,
    /// Corner instance realizing the start (internal anchor for walks).
    pub start_corner: Corner,
}

/// Angles at the cone point between consecutive legs.
#[derive(Debug, Clone, Copy)]
pub struct Pivot {
    pub cone: usize,
    pub left_angle: f64,
    pub right_angle: f64,
}

/// A closed CAT(0) geodesic through cone points.
#[derive(Debug, Clone)]
pub struct SaddleChain {
    /// Cyclic; `pivots[i]` sits at the start of `legs[i]`.
    pub legs: Vec<Leg>,
    pub pivots: Vec<Pivot>,
}

impl SaddleChain {
    pub fn cat0_length(&self) -> f64 {
        self.legs.iter().map(|l| l.length).sum()
    }
}

/// A closed geodesic through regular points only (a cylinder curve).
#[derive(Debug, Clone)]
pub struct RegularClosedGeodesic {
    pub cell: usize,
    pub base: Vec2,
    /// Direction in the chart of `cell`, radians.
    pub direction: f64,
    pub length: f64,
    pub cylinder: bool,
}

#[derive(Debug, Clone)]
pub enum GeodesicKind {
    Chain(SaddleChain),
    Regular(RegularClosedGeodesic),
}

/// Tightened representative with provenance.
#[derive(Debug, Clone)]
pub struct GeodesicRep {
    pub kind: GeodesicKind,
    pub sweeps: u64,
    pub final_decrement: f64,
    /// Length after each sweep; nonincreasing up to numerical noise.
    pub sweep_lengths: Vec<f64>,
}

impl GeodesicRep {
    /// Legs as `(direction, length, anchor cell)` triples; a regular
    /// geodesic is a single leg.
    pub fn leg_data(&self) -> Vec<(f64, f64)> {
        match &self.kind {
            GeodesicKind::Chain(c) => c.legs.iter().map(|l| (l.direction, l.length)).collect(),
            GeodesicKind::Regular(r) => vec![(r.direction, r.length)],
        }
    }

    pub fn cat0_length(&self) -> f64 {
        self.leg_data().iter().map(|l| l.1).sum()
    }
}

#[derive(Debug, Clone)]
pub enum GeodesicError {
    NullHomotopic,
    OpenPath,
    BadPath(String),
    IterationCap { residual: f64 },
    PerturbationTooLarge,
}

impl fmt::Display for GeodesicError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeodesicError::NullHomotopic => write!(f, "path is null-homotopic"),
            GeodesicError::OpenPath => write!(f, "path is not closed"),
            GeodesicError::BadPath(s) => write!(f, "invalid path: {s}"),
            GeodesicError::IterationCap { residual } => {
                write!(f, "iteration cap exceeded (residual {residual})")
            }
            GeodesicError::PerturbationTooLarge => write!(f, "perturbation does not fit corridor"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for GeodesicError {}

// ---- token word ----------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Tok {
    /// Crossing from `cell` through its edge `edge`.
    Cross { cell: usize, edge: usize },
    /// Passing through the vertex shared by corner (cell_in, v_in) on the
    /// incoming side and (cell_out, v_out) on the outgoing side.
    Touch { cell_in: usize, v_in: usize, cell_out: usize, v_out: usize },
}

fn twin(surface: &SurfaceComplex, cell: usize, edge: usize) -> (usize, usize) {
    let e = &surface.cell(cell).edges[edge];
    (e.neighbor, e.neighbor_edge)
}

/// Cell the path is in after the token.
fn cell_after(surface: &SurfaceComplex, tok: Tok) -> usize {
    match tok {
        Tok::Cross { cell, edge } => twin(surface, cell, edge).0,
        Tok::Touch { cell_out, .. } => cell_out,
    }
}

fn cell_before(tok: Tok) -> usize {
    match tok {
        Tok::Cross { cell, .. } => cell,
        Tok::Touch { cell_in, .. } => cell_in,
    }
}

/// Cancel adjacent inverse crossings, cyclically.
fn reduce_word(surface: &SurfaceComplex, word: &mut Vec<Tok>) {
    loop {
        let n = word.len();
        if n < 2 {
            return;
        }
        let mut removed = false;
        for i in 0..n {
            let j = (i + 1) % n;
            if let (Tok::Cross { cell: c1, edge: e1 }, Tok::Cross { cell: c2, edge: e2 }) =
                (word[i], word[j])
            {
                if twin(surface, c1, e1) == (c2, e2) {
                    if i < j {
                        word.remove(j);
                        word.remove(i);
                    } else {
                        word.remove(i);
                        word.remove(j);
                    }
                    removed = true;
                    break;
                }
            }
        }
        if !removed {
            return;
        }
    }
}

/// Convert a waypoint path into a crossing word.
fn tokens_from_path(
    surface: &SurfaceComplex,
    path: &SurfacePath,
) -> Result<Vec<Tok>, GeodesicError> {
    if !path.closed {
        return Err(GeodesicError::OpenPath);
    }
    // Deduplicate repeated waypoints.
    let mut pts: Vec<(u32, Vec2)> = Vec::new();
    for &(pid, p) in &path.waypoints {
        if pts.last().is_none_or(|&(q, r)| q != pid || r.dist(p) > 1e-12) {
            pts.push((pid, p));
        }
    }
    if pts.len() < 2 {
        return Err(GeodesicError::NullHomotopic);
    }
    let (pid0, p0) = pts[0];
    let cell0 = surface
        .locate(pid0, p0)
        .ok_or_else(|| GeodesicError::BadPath(format!("waypoint {p0} not in polygon {pid0}")))?;

    let mut word = Vec::new();
    let mut cell = cell0;
    let mut pos = p0;
    let m = pts.len();
    for i in 1..=m {
        let (pid_t, xy_t) = pts[i % m];
        if surface.cell(cell).parent == pid_t {
            // Target read in the current chart; walk straight to it.
            walk_to_target(surface, &mut cell, &mut pos, xy_t, &mut word)?;
        } else {
            // Hop across the single glued edge towards the other polygon.
            hop_to_polygon(surface, &mut cell, &mut pos, pid_t, xy_t, &mut word)?;
        }
    }
    // The walk must return to the starting point.
    if (cell != cell0 || pos.dist(p0) > surface.tol.eps_len * 1e4)
        && (surface.cell(cell).parent != pid0 || pos.dist(p0) > surface.tol.eps_len * 1e4) {
            return Err(GeodesicError::BadPath(String::from("path does not close up")));
        }
    Ok(word)
}

/// Walk straight from `pos` to `target` (both read in the current chart),
/// crossing edges as the segment leaves cells; regular vertices are passed
/// through. Updates the cell, the position and the word.
fn walk_to_target(
    surface: &SurfaceComplex,
    cell: &mut usize,
    pos: &mut Vec2,
    target: Vec2,
    word: &mut Vec<Tok>,
) -> Result<(), GeodesicError> {
    let mut tgt = target;
    let mut skip: Option<usize> = None;
    for _ in 0..100_000 {
        let d = tgt - *pos;
        let dist = d.norm();
        if dist <= surface.tol.eps_len * 10.0 {
            *pos = tgt;
            return Ok(());
        }
        let dir = d * (1.0 / dist);
        match surface.straight_step(*cell, *pos, dir, skip) {
            StepResult::Crossed { edge, point, t } => {
                if t >= dist {
                    *pos = tgt;
                    return Ok(());
                }
                word.push(Tok::Cross { cell: *cell, edge });
                let (nc, ne, iso) = surface.cross(*cell, edge);
                let inv = iso.inverse();
                *pos = inv.apply(point);
                tgt = inv.apply(tgt);
                *cell = nc;
                skip = Some(ne);
            }
            StepResult::VertexHit { corner, t } => {
                if t >= dist - surface.tol.eps_len {
                    // Arrived exactly at a vertex target.
                    *pos = tgt;
                    return Ok(());
                }
                let (class, _) = surface.class_of_corner(corner);
                if surface.classes()[class].cone.is_some() {
                    return Err(GeodesicError::BadPath(String::from(
                        "waypoint segment passes through a cone point",
                    )));
                }
                // Straight through the flat vertex: re-anchor in the
                // continuing corner and transport the target by the rotation
                // identifying the charts around the vertex.
                let arrive = VertexRay { corner, dir: -dir };
                let phi = surface.ray_coordinate(arrive);
                let out = surface.ray_at_coordinate(class, phi - PI);
                word.extend(corner_route(surface, corner, out.corner));
                let v_here = surface.corner_position(corner);
                let v_there = surface.corner_position(out.corner);
                let rot = rotation_between(dir, out.dir);
                tgt = v_there + rot.apply(tgt - v_here);
                *cell = out.corner.cell;
                *pos = v_there;
                skip = None;
            }
            StepResult::Stuck => {
                return Err(GeodesicError::BadPath(String::from("walk stuck between waypoints")));
            }
        }
    }
    Err(GeodesicError::BadPath(String::from("waypoint walk did not terminate")))
}

fn rotation_between(from: Vec2, to: Vec2) -> crate::geom::Rot {
    // Rotation carrying `from` to `to` (both unit).
    crate::geom::Rot { cos: from.dot(to), sin: from.cross(to) }
}

/// Crossing tokens for the corner route from `a` to `b` around their common
/// vertex class, taking the side with fewer corners.
fn corner_route(surface: &SurfaceComplex, a: Corner, b: Corner) -> Vec<Tok> {
    let mut cw = Vec::new();
    let mut cur = a;
    let cap = surface.classes().iter().map(|c| c.corners.len()).max().unwrap_or(1) + 2;
    let mut ok_cw = false;
    for _ in 0..cap {
        if cur == b {
            ok_cw = true;
            break;
        }
        cw.push(Tok::Cross { cell: cur.cell, edge: cur.vertex });
        let (nc, ne) = twin(surface, cur.cell, cur.vertex);
        let kn = surface.cell(nc).len();
        cur = Corner { cell: nc, vertex: (ne + 1) % kn };
    }
    let mut ccw = Vec::new();
    let mut cur = a;
    let mut ok_ccw = false;
    for _ in 0..cap {
        if cur == b {
            ok_ccw = true;
            break;
        }
        let len = surface.cell(cur.cell).len();
        let e = (cur.vertex + len - 1) % len;
        ccw.push(Tok::Cross { cell: cur.cell, edge: e });
        let (nc, ne) = twin(surface, cur.cell, e);
        cur = Corner { cell: nc, vertex: ne };
    }
    match (ok_cw, ok_ccw) {
        (true, true) => {
            if cw.len() <= ccw.len() {
                cw
            } else {
                ccw
            }
        }
        (true, false) => cw,
        (false, true) => ccw,
        (false, false) => Vec::new(),
    }
}

/// Hop to a waypoint declared in a different polygon: cross the glued edge
/// minimizing the developed segment length among edges the segment crosses.
fn hop_to_polygon(
    surface: &SurfaceComplex,
    cell: &mut usize,
    pos: &mut Vec2,
    pid_t: u32,
    xy_t: Vec2,
    word: &mut Vec<Tok>,
) -> Result<(), GeodesicError> {
    let cb = surface.locate(pid_t, xy_t).ok_or_else(|| {
        GeodesicError::BadPath(format!("waypoint {xy_t} not in polygon {pid_t}"))
    })?;
    let ca = *cell;
    let mut best: Option<(usize, f64)> = None;
    for e in 0..surface.cell(ca).len() {
        let ce = &surface.cell(ca).edges[e];
        if ce.neighbor != cb {
            continue;
        }
        let dev_b = ce.iso.apply(xy_t);
        let (a0, a1) = surface.cell(ca).edge_endpoints(e);
        let crosses = matches!(
            crate::geom::segment_intersection(*pos, dev_b, a0, a1),
            Some((s, t)) if (0.0..=1.0).contains(&s) && (0.0..=1.0).contains(&t)
        );
        let score = if crosses {
            pos.dist(dev_b)
        } else {
            pos.dist(dev_b) + 1e3 * surface.diameter
        };
        if best.is_none_or(|(_, b)| score < b) {
            best = Some((e, score));
        }
    }
    let (e, _) = best.ok_or_else(|| {
        GeodesicError::BadPath(format!("no glued edge connects to polygon {pid_t}"))
    })?;
    word.push(Tok::Cross { cell: ca, edge: e });
    *cell = cb;
    *pos = xy_t;
    Ok(())
}

// ---- corridor development and runs ---------------------------------------

/// Developed data of one run of crossings.
struct DevRun {
    /// Frame of the cell after each prefix of crossings; `frames[0]` is the
    /// identity on the starting cell.
    frames: Vec<Iso>,
    windows: Vec<Window>,
    /// Corner of each window endpoint, on the near (pre-crossing) side and
    /// far (post-crossing) side: (left near, left far, right near, right far).
    endpoint_corners: Vec<(Corner, Corner, Corner, Corner)>,
}

/// Develop the crossings of a run starting from `start_cell` with frame Id.
fn develop_run(surface: &SurfaceComplex, start_cell: usize, crossings: &[Tok]) -> DevRun {
    let mut frames = vec![Iso::IDENTITY];
    let mut windows = Vec::with_capacity(crossings.len());
    let mut endpoint_corners = Vec::with_capacity(crossings.len());
    let mut cell = start_cell;
    let mut frame = Iso::IDENTITY;
    let mut prev_mid: Option<Vec2> = None;
    for tok in crossings {
        let Tok::Cross { cell: c, edge: e } = *tok else {
            unreachable!("runs contain only crossings")
        };
        debug_assert_eq!(c, cell, "crossing token out of chain");
        let (a, b) = surface.cell(c).edge_endpoints(e);
        let (da, db) = (frame.apply(a), frame.apply(b));
        let k = surface.cell(c).len();
        let (nc, ne, iso) = surface.cross(c, e);
        let kn = surface.cell(nc).len();
        // Corner identities: vertex e ↔ neighbor vertex ne+1; vertex e+1 ↔ ne.
        let ca_near = Corner { cell: c, vertex: e };
        let cb_near = Corner { cell: c, vertex: (e + 1) % k };
        let ca_far = Corner { cell: nc, vertex: (ne + 1) % kn };
        let cb_far = Corner { cell: nc, vertex: ne };
        // Left/right labeling decided after we know the next midpoint; store
        // raw and fix in a second pass.
        windows.push(Window { left: da, right: db });
        endpoint_corners.push((ca_near, ca_far, cb_near, cb_far));
        let _ = prev_mid.replace((da + db) * 0.5);
        frame = frame.compose(iso);
        frames.push(frame);
        cell = nc;
    }
    DevRun { frames, windows, endpoint_corners }
}

/// Orient windows so `left` is left of the direction of travel.
fn label_windows(run: &mut DevRun, s: Vec2, t: Vec2) {
    let m = run.windows.len();
    for i in 0..m {
        let mid = (run.windows[i].left + run.windows[i].right) * 0.5;
        let next = if i + 1 < m {
            (run.windows[i + 1].left + run.windows[i + 1].right) * 0.5
        } else {
            t
        };
        let prev = if i == 0 { s } else { (run.windows[i - 1].left + run.windows[i - 1].right) * 0.5 };
        let d = next - prev;
        let a = run.windows[i].left;
        if d.cross(a - mid) < 0.0 {
            run.windows[i] = Window { left: run.windows[i].right, right: run.windows[i].left };
            let (an, af, bn, bf) = run.endpoint_corners[i];
            run.endpoint_corners[i] = (bn, bf, an, af);
        }
    }
}

// ---- the tightener --------------------------------------------------------

/// Options for [`tighten_closed`].
#[derive(Debug, Clone, Copy)]
pub struct TightenOptions {
    /// Stop when a full sweep decreases the length by less than this times
    /// the initial length.
    pub rel_tol: f64,
    pub max_sweeps: u64,
}

impl Default for TightenOptions {
    fn default() -> Self {
        TightenOptions { rel_tol: 1e-10, max_sweeps: 100_000 }
    }
}

/// Tighten a closed path to its CAT(0) geodesic representative.
pub fn tighten_closed(
    surface: &SurfaceComplex,
    path: &SurfacePath,
    options: TightenOptions,
) -> Result<GeodesicRep, GeodesicError> {
    let mut word = tokens_from_path(surface, path)?;
    reduce_word(surface, &mut word);
    if word.is_empty() {
        return Err(GeodesicError::NullHomotopic);
    }
    let scale = surface.diameter;
    let mut prev_len = f64::INFINITY;
    let mut tol_abs = f64::INFINITY; // pinned after the first sweep
    let mut decrement = f64::INFINITY;
    let mut stable_sweeps = 0u32;
    let mut sweep_lengths: Vec<f64> = Vec::new();
    for sweep in 0..options.max_sweeps {
        if word.is_empty() {
            return Err(GeodesicError::NullHomotopic);
        }
        let has_touch = word.iter().any(|t| matches!(t, Tok::Touch { .. }));
        let (len, changed) = if has_touch {
            sweep_with_touches(surface, &mut word)?
        } else {
            match sweep_closed(surface, &mut word, sweep as usize)? {
                ClosedSweep::Regular(reg) => {
                    if reg.length < 1e-7 * scale {
                        return Err(GeodesicError::NullHomotopic);
                    }
                    sweep_lengths.push(reg.length);
                    return Ok(GeodesicRep {
                        kind: GeodesicKind::Regular(reg),
                        sweeps: sweep + 1,
                        final_decrement: decrement,
                        sweep_lengths,
                    });
                }
                ClosedSweep::Bent(len) => (len, true),
            }
        };
        if len < 1e-7 * scale {
            return Err(GeodesicError::NullHomotopic);
        }
        if len.is_finite() {
            sweep_lengths.push(len);
        }
        if tol_abs.is_infinite() {
            tol_abs = options.rel_tol * len;
        }
        decrement = prev_len - len;
        let stable = decrement.abs() <= tol_abs;
        stable_sweeps = if stable { stable_sweeps + 1 } else { 0 };
        // Converged when nothing moved; also accept a word that keeps
        // flapping between equivalent descriptions at stationary length
        // (e.g. a touch recorded at either of two coincident window
        // endpoints).
        let accept = (!changed && stable) || stable_sweeps >= 8;
        if accept && word.iter().any(|t| matches!(t, Tok::Touch { .. })) {
            let chain = extract_chain(surface, &word)?;
            return Ok(GeodesicRep {
                kind: chain,
                sweeps: sweep + 1,
                final_decrement: decrement.abs(),
                sweep_lengths,
            });
        }
        prev_len = len;
    }
    Err(GeodesicError::IterationCap { residual: decrement })
}

enum ClosedSweep {
    Regular(RegularClosedGeodesic),
    Bent(f64),
}

/// Sweep for a word with no touches: closed corridor with a rotating cut.
fn sweep_closed(
    surface: &SurfaceComplex,
    word: &mut Vec<Tok>,
    sweep: usize,
) -> Result<ClosedSweep, GeodesicError> {
    let m = word.len();
    let cut = sweep % m;
    let rotated: Vec<Tok> = (0..m).map(|i| word[(cut + i) % m]).collect();
    let Tok::Cross { cell: c0, edge: e0 } = rotated[0] else { unreachable!() };

    // Develop the full loop starting *after* the cut crossing.
    let start_cell = cell_after(surface, rotated[0]);
    let mut run = develop_run(surface, start_cell, &rotated[1..]);
    // The final frame after re-crossing the cut edge gives the holonomy on
    // the cut window.
    let last_cell = if m == 1 { start_cell } else { cell_after(surface, rotated[m - 1]) };
    debug_assert_eq!(cell_before(rotated[0]), last_cell);
    let last_frame = *run.frames.last().unwrap();
    let (_, _, iso_back) = surface.cross(c0, e0);
    // Window of the cut edge, seen from the starting cell (entry side) and
    // from the final frame (exit side).
    let k0 = surface.cell(c0).len();
    let (a_cut, b_cut) = surface.cell(c0).edge_endpoints(e0);
    let (nc0, ne0, _) = surface.cross(c0, e0);
    debug_assert_eq!(nc0, start_cell);
    let kn0 = surface.cell(nc0).len();
    let (sa, sb) = surface.cell(nc0).edge_endpoints(ne0);
    // Entry window endpoints in the start frame (identity): the cut edge as
    // seen in the entered cell; vertex pairing e0 ↔ ne0+1, e0+1 ↔ ne0.
    let entry_a = sb; // corresponds to vertex e0 of c0
    let entry_b = sa;
    let exit_a = last_frame.apply(a_cut);
    let exit_b = last_frame.apply(b_cut);

    // Entry parameter u ∈ [0,1] along the cut edge from vertex e0 to e0+1.
    let entry = |u: f64| entry_a.lerp(entry_b, u);
    let exit = |u: f64| exit_a.lerp(exit_b, u);

    let s_probe = entry(0.5);
    let t_probe = exit(0.5);
    label_windows(&mut run, s_probe, t_probe);

    let length_at = |u: f64| -> f64 {
        let s = entry(u);
        let t = exit(u);
        funnel(s, t, &run.windows).length(s, t, &run.windows)
    };

    // Golden-section search; the length is convex along the window.
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    const INV_PHI2: f64 = 0.381_966_011_250_105;
    for _ in 0..200 {
        let m1 = lo + (hi - lo) * INV_PHI2;
        let m2 = hi - (hi - lo) * INV_PHI2;
        if length_at(m1) <= length_at(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let u = 0.5 * (lo + hi);
    let s = entry(u);
    let t = exit(u);
    let path = funnel(s, t, &run.windows);
    let len = path.length(s, t, &run.windows);

    let eps_v = surface.tol.eps_len * 1e3;
    if path.bends.is_empty() {
        let edge_len = entry_a.dist(entry_b);
        if u * edge_len > eps_v && (1.0 - u) * edge_len > eps_v {
            // Straight closed regular geodesic.
            let dir = (t - s).normalized();
            return Ok(ClosedSweep::Regular(RegularClosedGeodesic {
                cell: start_cell,
                base: s,
                direction: dir.angle(),
                length: len,
                cylinder: true,
            }));
        }
        // The minimum sits at a vertex of the cut window: the geodesic goes
        // through that vertex. Introduce the touch explicitly.
        let at_a = u * edge_len <= eps_v;
        let (v_in_c0, v_out_n) = if at_a {
            (e0, (ne0 + 1) % kn0)
        } else {
            ((e0 + 1) % k0, ne0)
        };
        let touch = Tok::Touch { cell_in: c0, v_in: v_in_c0, cell_out: nc0, v_out: v_out_n };
        let mut new_word: Vec<Tok> = vec![touch];
        new_word.extend_from_slice(&rotated[1..]);
        *word = new_word;
        return Ok(ClosedSweep::Bent(len));
    }

    // Replace bent crossings by touches. Window i corresponds to rotated
    // token i+1. A path grazing a window endpoint passes through that
    // vertex and is recorded as a touch too.
    let mut new_word: Vec<Tok> = vec![rotated[0]];
    let mut bend_at: Vec<Option<bool>> = vec![None; run.windows.len()];
    for b in &path.bends {
        bend_at[b.window] = Some(b.is_left);
    }
    mark_grazes(surface, s, t, &run.windows, &path, &mut bend_at);
    for (i, tok) in rotated[1..].iter().enumerate() {
        match bend_at[i] {
            None => new_word.push(*tok),
            Some(is_left) => {
                let (ln, lf, rn, rf) = run.endpoint_corners[i];
                let (near, far) = if is_left { (ln, lf) } else { (rn, rf) };
                new_word.push(Tok::Touch {
                    cell_in: near.cell,
                    v_in: near.vertex,
                    cell_out: far.cell,
                    v_out: far.vertex,
                });
            }
        }
    }
    let _ = iso_back;
    merge_adjacent_touches(&mut new_word);
    *word = new_word;
    Ok(ClosedSweep::Bent(len))
}

/// Mark windows whose crossing point coincides with an endpoint: the taut
/// path passes through that vertex.
fn mark_grazes(
    surface: &SurfaceComplex,
    s: Vec2,
    t: Vec2,
    windows: &[Window],
    path: &crate::funnel::TautPath,
    bend_at: &mut [Option<bool>],
) {
    if windows.is_empty() {
        return;
    }
    let eps = surface.tol.eps_len * 100.0;
    let params = crate::funnel::window_crossings(s, t, windows, path);
    for (i, &p) in params.iter().enumerate() {
        if bend_at[i].is_some() {
            continue;
        }
        let w = &windows[i];
        let len = w.left.dist(w.right);
        if p * len <= eps {
            bend_at[i] = Some(true);
        } else if (1.0 - p) * len <= eps {
            bend_at[i] = Some(false);
        }
    }
}

/// Merge cyclically adjacent touches at the same vertex class (a composite
/// passage through one vertex recorded window by window).
fn merge_adjacent_touches(word: &mut Vec<Tok>) {
    loop {
        let n = word.len();
        if n < 2 {
            return;
        }
        let mut merged = false;
        for i in 0..n {
            let j = (i + 1) % n;
            if let (
                Tok::Touch { cell_in, v_in, cell_out, v_out },
                Tok::Touch { cell_in: ci2, v_in: vi2, cell_out: co2, v_out: vo2 },
            ) = (word[i], word[j])
            {
                // Same passage: the first touch exits exactly where the
                // second enters (window-by-window records of one vertex).
                if cell_out == ci2 && v_out == vi2 {
                    let combined = Tok::Touch { cell_in, v_in, cell_out: co2, v_out: vo2 };
                    word[i] = combined;
                    word.remove(j);
                    merged = true;
                    break;
                }
            }
        }
        if !merged {
            return;
        }
    }
}

/// Sweep for a word with touches: straighten each run, then relax pivots.
/// Returns the length after straightening and whether the word changed.
fn sweep_with_touches(
    surface: &SurfaceComplex,
    word: &mut Vec<Tok>,
) -> Result<(f64, bool), GeodesicError> {
    reduce_word(surface, word);
    if word.is_empty() {
        return Err(GeodesicError::NullHomotopic);
    }
    let m = word.len();
    let touch_idx: Vec<usize> = (0..m)
        .filter(|&i| matches!(word[i], Tok::Touch { .. }))
        .collect();
    if touch_idx.is_empty() {
        // All touches relaxed away; defer to the closed sweep.
        return Ok((f64::INFINITY, true));
    }

    // Straighten each run between consecutive touches.
    let mut new_word: Vec<Tok> = Vec::with_capacity(m);
    let mut total_len = 0.0;
    let mut changed = false;
    // Per-touch leg directions for the pivot pass: direction of the leg
    // leaving touch k (in cell_out chart) and entering touch k+1 (in
    // cell_in chart), collected per run.
    let nt = touch_idx.len();
    let mut out_dirs: Vec<Vec2> = vec![Vec2::ZERO; nt];
    let mut in_dirs: Vec<Vec2> = vec![Vec2::ZERO; nt];

    let mut touch_tags: Vec<Option<usize>> = Vec::new();
    for k in 0..nt {
        let i0 = touch_idx[k];
        let i1 = touch_idx[(k + 1) % nt];
        let t0 = word[i0];
        let t1 = word[i1];
        let Tok::Touch { cell_out, v_out, .. } = t0 else { unreachable!() };
        let Tok::Touch { cell_in, v_in, .. } = t1 else { unreachable!() };
        new_word.push(t0);
        touch_tags.push(Some(k));

        let mut crossings: Vec<Tok> = Vec::new();
        let mut j = (i0 + 1) % m;
        while j != i1 {
            crossings.push(word[j]);
            j = (j + 1) % m;
        }
        let mut run = develop_run(surface, cell_out, &crossings);
        let s = surface.cell(cell_out).verts[v_out];
        let last_frame = *run.frames.last().unwrap();
        debug_assert_eq!(
            if crossings.is_empty() { cell_out } else { cell_after(surface, *crossings.last().unwrap()) },
            cell_in
        );
        let t = last_frame.apply(surface.cell(cell_in).verts[v_in]);
        label_windows(&mut run, s, t);
        let path = funnel(s, t, &run.windows);
        total_len += path.length(s, t, &run.windows);

        // Record boundary directions for the pivot pass.
        let poly = path.polyline(s, t, &run.windows);
        let d_out = (poly[1] - poly[0]).normalized();
        let d_in_dev = (poly[poly.len() - 1] - poly[poly.len() - 2]).normalized();
        out_dirs[k] = d_out;
        in_dirs[(k + 1) % nt] = last_frame.rot.inverse().apply(d_in_dev);

        let mut bend_at: Vec<Option<bool>> = vec![None; run.windows.len()];
        for b in &path.bends {
            if bend_at[b.window].is_some() {
                continue;
            }
            bend_at[b.window] = Some(b.is_left);
        }
        let pre_graze: usize = bend_at.iter().flatten().count();
        mark_grazes(surface, s, t, &run.windows, &path, &mut bend_at);
        if bend_at.iter().flatten().count() > pre_graze {
            changed = true;
        }
        for (i, tok) in crossings.iter().enumerate() {
            match bend_at[i] {
                None => new_word.push(*tok),
                Some(is_left) => {
                    changed = true;
                    let (ln, lf, rn, rf) = run.endpoint_corners[i];
                    let (near, far) = if is_left { (ln, lf) } else { (rn, rf) };
                    new_word.push(Tok::Touch {
                        cell_in: near.cell,
                        v_in: near.vertex,
                        cell_out: far.cell,
                        v_out: far.vertex,
                    });
                    touch_tags.push(None);
                }
            }
        }
    }

    // Pivot relaxation on the straightened word. Touches introduced this
    // sweep have no recorded leg directions yet; they are relaxed on the
    // next sweep.
    let mut relaxed: Vec<Tok> = Vec::with_capacity(new_word.len());
    let mut ti = 0usize;
    for tok in &new_word {
        match *tok {
            Tok::Cross { .. } => relaxed.push(*tok),
            Tok::Touch { cell_in, v_in, cell_out, v_out } => {
                let tag = touch_tags[ti];
                ti += 1;
                let Some(k) = tag else {
                    relaxed.push(*tok);
                    continue;
                };
                let d_out = out_dirs[k];
                let d_in = in_dirs[k];
                let r_out = VertexRay { corner: Corner { cell: cell_out, vertex: v_out }, dir: d_out };
                let r_in = VertexRay { corner: Corner { cell: cell_in, vertex: v_in }, dir: -d_in };
                let (class, _) = surface.class_of_corner(r_out.corner);
                let total = surface.classes()[class].total;
                let left = surface.ccw_angle_at_vertex(r_out, r_in);
                let right = total - left;
                let slack = 1e-9;
                if left < PI - slack || right < PI - slack {
                    changed = true;
                    let push_left = left <= right;
                    push_across(surface, &mut relaxed, cell_in, v_in, cell_out, v_out, push_left);
                } else if surface.classes()[class].cone.is_none()
                    && (left - PI).abs() <= slack
                    && (right - PI).abs() <= slack
                {
                    // Straight passage through a regular vertex: drop the
                    // touch and keep the corner route on one side.
                    changed = true;
                    push_across(surface, &mut relaxed, cell_in, v_in, cell_out, v_out, true);
                } else {
                    relaxed.push(*tok);
                }
            }
        }
    }
    merge_adjacent_touches(&mut relaxed);
    reduce_word(surface, &mut relaxed);
    *word = relaxed;
    Ok((total_len, changed))
}

/// Emit the crossings replacing a touch, routing across the left or right
/// side of the vertex.
fn push_across(
    surface: &SurfaceComplex,
    out: &mut Vec<Tok>,
    cell_in: usize,
    v_in: usize,
    cell_out: usize,
    v_out: usize,
    left_side: bool,
) {
    let mut cur = Corner { cell: cell_in, vertex: v_in };
    let target = Corner { cell: cell_out, vertex: v_out };
    let cap = surface.classes().iter().map(|c| c.corners.len()).max().unwrap_or(1) + 2;
    for _ in 0..cap {
        if cur == target {
            return;
        }
        if left_side {
            // Clockwise walk: cross the corner's outgoing edge.
            out.push(Tok::Cross { cell: cur.cell, edge: cur.vertex });
            let (nc, ne) = twin(surface, cur.cell, cur.vertex);
            let kn = surface.cell(nc).len();
            cur = Corner { cell: nc, vertex: (ne + 1) % kn };
        } else {
            // Counterclockwise walk: cross the corner's incoming edge.
            let len = surface.cell(cur.cell).len();
            let e = (cur.vertex + len - 1) % len;
            out.push(Tok::Cross { cell: cur.cell, edge: e });
            let (nc, ne) = twin(surface, cur.cell, e);
            cur = Corner { cell: nc, vertex: ne };
        }
    }
    debug_assert!(false, "corner walk did not reach the far corner");
}

/// Build the final chain from a converged word.
fn extract_chain(
    surface: &SurfaceComplex,
    word: &[Tok],
) -> Result<GeodesicKind, GeodesicError> {
    let m = word.len();
    let touch_idx: Vec<usize> = (0..m)
        .filter(|&i| matches!(word[i], Tok::Touch { .. }))
        .collect();
    if touch_idx.is_empty() {
        return Err(GeodesicError::BadPath(String::from(
            "converged word without touches must be handled by the closed sweep",
        )));
    }
    let nt = touch_idx.len();
    let mut legs = Vec::with_capacity(nt);
    let mut in_rays: Vec<VertexRay> = Vec::with_capacity(nt);
    let mut out_rays: Vec<VertexRay> = Vec::with_capacity(nt);

    for k in 0..nt {
        let i0 = touch_idx[k];
        let i1 = touch_idx[(k + 1) % nt];
        let Tok::Touch { cell_out, v_out, .. } = word[i0] else { unreachable!() };
        let Tok::Touch { cell_in, v_in, .. } = word[i1] else { unreachable!() };
        let mut crossings: Vec<Tok> = Vec::new();
        let mut j = (i0 + 1) % m;
        while j != i1 {
            crossings.push(word[j]);
            j = (j + 1) % m;
        }
        let run = develop_run(surface, cell_out, &crossings);
        let s = surface.cell(cell_out).verts[v_out];
        let last_frame = *run.frames.last().unwrap();
        let t = last_frame.apply(surface.cell(cell_in).verts[v_in]);
        let d = t - s;
        let corner = Corner { cell: cell_out, vertex: v_out };
        let (class, _) = surface.class_of_corner(corner);
        let cone = surface.classes()[class]
            .cone
            .ok_or_else(|| GeodesicError::BadPath(String::from("pivot at a regular vertex")))?;
        legs.push(Leg {
            start_cone: cone,
            direction: d.angle(),
            length: d.norm(),
            start_corner: corner,
        });
        out_rays.push(VertexRay { corner, dir: d.normalized() });
        in_rays.push(VertexRay {
            corner: Corner { cell: cell_in, vertex: v_in },
            dir: -(last_frame.rot.inverse().apply(d.normalized())),
        });
    }

    let mut pivots = Vec::with_capacity(nt);
    for k in 0..nt {
        // Pivot at the start of leg k: incoming leg is k-1.
        let r_in = in_rays[(k + nt - 1) % nt];
        let r_out = out_rays[k];
        let (class, _) = surface.class_of_corner(r_out.corner);
        let total = surface.classes()[class].snapped;
        let left = surface.ccw_angle_at_vertex(r_out, r_in);
        pivots.push(Pivot {
            cone: legs[k].start_cone,
            left_angle: left,
            right_angle: total - left,
        });
    }
    Ok(GeodesicKind::Chain(SaddleChain { legs, pivots }))
}

// ---- verification ---------------------------------------------------------

/// Per-pivot verification entry.
#[derive(Debug, Clone)]
pub struct PivotCheck {
    pub cone: usize,
    pub left_angle: f64,
    pub right_angle: f64,
    pub ok: bool,
}

/// Outcome of [`verify_geodesic`].
#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub pivots: Vec<PivotCheck>,
    pub legs_clear: bool,
    pub closes: bool,
    pub pass: bool,
}

/// Check the geodesic conditions: every pivot has both side angles ≥ π and
/// every leg is free of cone points in its interior.
pub fn verify_geodesic(surface: &SurfaceComplex, rep: &GeodesicRep, eps_ang: f64) -> VerifyReport {
    match &rep.kind {
        GeodesicKind::Regular(_) => {
            let closes = check_regular_closes(surface, rep);
            VerifyReport { pivots: Vec::new(), legs_clear: true, closes, pass: closes }
        }
        GeodesicKind::Chain(c) => {
            let mut pivots = Vec::with_capacity(c.pivots.len());
            let mut all_ok = true;
            for p in &c.pivots {
                let ok = p.left_angle >= PI - eps_ang && p.right_angle >= PI - eps_ang;
                all_ok &= ok;
                pivots.push(PivotCheck {
                    cone: p.cone,
                    left_angle: p.left_angle,
                    right_angle: p.right_angle,
                    ok,
                });
            }
            let legs_clear = c.legs.iter().all(|l| leg_interior_clear(surface, l));
            VerifyReport { pivots, legs_clear, closes: true, pass: all_ok && legs_clear }
        }
    }
}

fn check_regular_closes(surface: &SurfaceComplex, rep: &GeodesicRep) -> bool {
    // The route construction validates the closing identification, whether
    // the walk ends at its base or on the other copy of a glued edge.
    route_of(surface, rep).is_ok()
}

/// Walk straight for `length`; regular vertices are passed through, a cone
/// hit aborts with `None`.
fn trace_segments(
    surface: &SurfaceComplex,
    cell: usize,
    pos: Vec2,
    dir: Vec2,
    length: f64,
) -> Option<(usize, Vec2, Vec2)> {
    let mut cell = cell;
    let mut pos = pos;
    let mut dir = dir;
    let mut remaining = length;
    let mut skip = None;
    let cap = 64 + (length / surface.tol.eps_len.max(1e-12)) as usize;
    for _ in 0..cap.min(1_000_000) {
        if remaining <= surface.tol.eps_len * 1e3 {
            return Some((cell, pos, dir));
        }
        match surface.straight_step(cell, pos, dir, skip) {
            StepResult::Crossed { edge, point, t } => {
                if t >= remaining {
                    return Some((cell, pos + dir * remaining, dir));
                }
                remaining -= t;
                let (nc, ne, iso) = surface.cross(cell, edge);
                let inv = iso.inverse();
                pos = inv.apply(point);
                dir = inv.rot.apply(dir);
                cell = nc;
                skip = Some(ne);
            }
            StepResult::VertexHit { corner, t } => {
                if t >= remaining {
                    return Some((cell, pos + dir * remaining, dir));
                }
                let (class, _) = surface.class_of_corner(corner);
                if surface.classes()[class].cone.is_some() {
                    return None;
                }
                remaining -= t;
                // Continue straight through the flat vertex.
                let arrive = VertexRay { corner, dir: -dir };
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

fn leg_interior_clear(surface: &SurfaceComplex, leg: &Leg) -> bool {
    let start = surface.corner_position(leg.start_corner);
    let dir = Vec2::from_angle(leg.direction);
    // Walk from just inside the leg to just before its end.
    let eps = surface.tol.eps_len * 10.0;
    let inner = leg.length - 2.0 * eps;
    if inner <= 0.0 {
        return true;
    }
    // Step off the vertex before walking.
    let cell = leg.start_corner.cell;
    let pos = start + dir * eps;
    if !crate::geom::convex_contains(&surface.cell(cell).verts, pos, surface.tol.eps_len * 100.0) {
        // Leg leaves through a corner sector not contained in this cell;
        // conservatively accept (the tightener built it from a development).
        return true;
    }
    trace_segments(surface, cell, pos, dir, inner).is_some()
}

// ---- lengths ---------------------------------------------------------------

pub fn cat0_length(rep: &GeodesicRep) -> f64 {
    rep.cat0_length()
}

/// Finsler length with respect to a polygonal norm: Σ ‖leg vector‖_Q.
pub fn finsler_length(rep: &GeodesicRep, q: &PolygonalNorm) -> f64 {
    rep.leg_data()
        .iter()
        .map(|&(dir, len)| q.eval(Vec2::from_angle(dir) * len))
        .sum()
}

/// θ-length: Σ_legs Σ_k |J| |sin(φ − θ + 2πk/n)|, the length functional of
/// the θ multi-foliation of order n.
pub fn theta_length(rep: &GeodesicRep, n: u32, theta: f64) -> f64 {
    rep.leg_data()
        .iter()
        .map(|&(dir, len)| web_norm(n, theta, Vec2::from_angle(dir) * len))
        .sum()
}

// ---- perturbation harness ---------------------------------------------------

/// Render a representative into chart-local segments `(cell, from, to)`.
pub fn render_segments(surface: &SurfaceComplex, rep: &GeodesicRep) -> Vec<(usize, Vec2, Vec2)> {
    let mut out = Vec::new();
    match &rep.kind {
        GeodesicKind::Regular(r) => {
            collect_segments(surface, r.cell, r.base, Vec2::from_angle(r.direction), r.length, &mut out);
        }
        GeodesicKind::Chain(c) => {
            for leg in &c.legs {
                let start = surface.corner_position(leg.start_corner);
                let dir = Vec2::from_angle(leg.direction);
                collect_segments(surface, leg.start_corner.cell, start, dir, leg.length, &mut out);
            }
        }
    }
    out
}

fn collect_segments(
    surface: &SurfaceComplex,
    cell: usize,
    pos: Vec2,
    dir: Vec2,
    length: f64,
    out: &mut Vec<(usize, Vec2, Vec2)>,
) {
    let mut cell = cell;
    let mut pos = pos;
    let mut dir = dir;
    let mut remaining = length;
    let mut skip = None;
    for _ in 0..1_000_000 {
        if remaining <= surface.tol.eps_len * 1e3 {
            return;
        }
        match surface.straight_step(cell, pos, dir, skip) {
            StepResult::Crossed { edge, point, t } => {
                if t >= remaining {
                    out.push((cell, pos, pos + dir * remaining));
                    return;
                }
                out.push((cell, pos, point));
                remaining -= t;
                let (nc, ne, iso) = surface.cross(cell, edge);
                let inv = iso.inverse();
                pos = inv.apply(point);
                dir = inv.rot.apply(dir);
                cell = nc;
                skip = Some(ne);
            }
            StepResult::VertexHit { corner, t } => {
                if t >= remaining {
                    out.push((cell, pos, pos + dir * remaining));
                    return;
                }
                out.push((cell, pos, surface.corner_position(corner)));
                remaining -= t;
                let (class, _) = surface.class_of_corner(corner);
                let arrive = VertexRay { corner, dir: -dir };
                let phi = surface.ray_coordinate(arrive);
                let out_ray = surface.ray_at_coordinate(class, phi - PI);
                cell = out_ray.corner.cell;
                pos = surface.corner_position(out_ray.corner);
                dir = out_ray.dir;
                skip = None;
            }
            StepResult::Stuck => return,
        }
    }
}

/// Rendered route of a representative: chart-local subsegments with the
/// transition placing each next chart into the previous one.
struct Route {
    /// `(cell, from, to)` per subsegment.
    subsegs: Vec<(usize, Vec2, Vec2)>,
    /// `links[j]` maps the chart of subsegment `j+1` (cyclically) into the
    /// chart of subsegment `j`; `None` marks a cone pivot handled
    /// separately.
    links: Vec<Option<Iso>>,
    /// Cone pivots at cyclic junction `j → j+1`: corners on both sides.
    pivots: Vec<Option<(Corner, Corner)>>,
}

#[allow(clippy::too_many_arguments)]
fn walk_leg_into(
    surface: &SurfaceComplex,
    cell: usize,
    pos: Vec2,
    dir: Vec2,
    length: f64,
    subsegs: &mut Vec<(usize, Vec2, Vec2)>,
    links: &mut Vec<Option<Iso>>,
    pivots: &mut Vec<Option<(Corner, Corner)>>,
) -> Result<(), GeodesicError> {
    let mut cell = cell;
    let mut pos = pos;
    let mut dir = dir;
    let mut remaining = length;
    let mut skip = None;
    for _ in 0..1_000_000 {
        if remaining <= surface.tol.eps_len * 1e3 {
            return Ok(());
        }
        match surface.straight_step(cell, pos, dir, skip) {
            StepResult::Crossed { edge, point, t } => {
                if t >= remaining {
                    subsegs.push((cell, pos, pos + dir * remaining));
                    return Ok(());
                }
                subsegs.push((cell, pos, point));
                remaining -= t;
                let (nc, ne, iso) = surface.cross(cell, edge);
                links.push(Some(iso));
                pivots.push(None);
                let inv = iso.inverse();
                pos = inv.apply(point);
                dir = inv.rot.apply(dir);
                cell = nc;
                skip = Some(ne);
            }
            StepResult::VertexHit { corner, t } => {
                if t >= remaining - surface.tol.eps_len * 10.0 {
                    subsegs.push((cell, pos, pos + dir * remaining.min(t)));
                    return Ok(());
                }
                let (class, _) = surface.class_of_corner(corner);
                if surface.classes()[class].cone.is_some() {
                    return Err(GeodesicError::BadPath(String::from(
                        "leg interior passes a cone point",
                    )));
                }
                subsegs.push((cell, pos, surface.corner_position(corner)));
                remaining -= t;
                let arrive = VertexRay { corner, dir: -dir };
                let phi = surface.ray_coordinate(arrive);
                let out = surface.ray_at_coordinate(class, phi - PI);
                // Identification of the charts around the flat vertex.
                let v_here = surface.corner_position(corner);
                let v_there = surface.corner_position(out.corner);
                let rot = rotation_between(out.dir, dir);
                let iso = Iso { rot, t: v_here - rot.apply(v_there) };
                links.push(Some(iso));
                pivots.push(None);
                cell = out.corner.cell;
                pos = v_there;
                dir = out.dir;
                skip = None;
            }
            StepResult::Stuck => {
                return Err(GeodesicError::BadPath(String::from("route walk stuck")));
            }
        }
    }
    Err(GeodesicError::BadPath(String::from("route walk did not terminate")))
}

fn route_of(surface: &SurfaceComplex, rep: &GeodesicRep) -> Result<Route, GeodesicError> {
    let mut subsegs = Vec::new();
    let mut links: Vec<Option<Iso>> = Vec::new();
    let mut pivots: Vec<Option<(Corner, Corner)>> = Vec::new();

    match &rep.kind {
        GeodesicKind::Regular(r) => {
            walk_leg_into(
                surface,
                r.cell,
                r.base,
                Vec2::from_angle(r.direction),
                r.length,
                &mut subsegs,
                &mut links,
                &mut pivots,
            )?;
            // Closing link: identify the end of the walk with its start.
            // When the base sits on a glued edge the walk ends on the other
            // copy of that edge, and the closure is its crossing iso.
            let (end_cell, _, end_pos) = *subsegs.last().unwrap();
            let eps = surface.tol.eps_len * 1e4;
            let mut closing = None;
            if end_cell == r.cell && end_pos.dist(r.base) <= eps {
                closing = Some(Iso::IDENTITY);
            } else {
                for e in 0..surface.cell(end_cell).len() {
                    let (a, b) = surface.cell(end_cell).edge_endpoints(e);
                    let ev = (b - a).normalized();
                    let d = ev.cross(end_pos - a).abs();
                    if d > eps {
                        continue;
                    }
                    let ce = &surface.cell(end_cell).edges[e];
                    if ce.neighbor == r.cell && ce.iso.apply(r.base).dist(end_pos) <= eps {
                        closing = Some(ce.iso);
                        break;
                    }
                }
            }
            let closing = closing.ok_or_else(|| {
                GeodesicError::BadPath(String::from("regular geodesic does not close up"))
            })?;
            // A closed route needs at least two entries to make a loop.
            if subsegs.len() == 1 {
                let (c, a, b) = subsegs[0];
                let m = (a + b) * 0.5;
                subsegs = vec![(c, a, m), (c, m, b)];
                links = vec![None];
                pivots = vec![None];
                links[0] = Some(Iso::IDENTITY);
            }
            links.push(Some(closing));
            pivots.push(None);
        }
        GeodesicKind::Chain(c) => {
            let n = c.legs.len();
            for (k, leg) in c.legs.iter().enumerate() {
                let start = surface.corner_position(leg.start_corner);
                walk_leg_into(
                    surface,
                    leg.start_corner.cell,
                    start,
                    Vec2::from_angle(leg.direction),
                    leg.length,
                    &mut subsegs,
                    &mut links,
                    &mut pivots,
                )?;
                // Pivot between this leg and the next: corners at the far
                // end of this leg and the start of the next.
                let next = &c.legs[(k + 1) % n];
                let last = subsegs
                    .last()
                    .ok_or_else(|| GeodesicError::BadPath(String::from("empty leg")))?;
                let end_cell = last.0;
                let end_pos = last.2;
                let vtx = (0..surface.cell(end_cell).len())
                    .min_by(|&a, &b| {
                        let da = surface.cell(end_cell).verts[a].dist(end_pos);
                        let db = surface.cell(end_cell).verts[b].dist(end_pos);
                        da.partial_cmp(&db).unwrap()
                    })
                    .unwrap();
                let corner_in = Corner { cell: end_cell, vertex: vtx };
                links.push(None);
                pivots.push(Some((corner_in, next.start_corner)));
            }
        }
    }
    if subsegs.is_empty() {
        return Err(GeodesicError::BadPath(String::from("empty representative")));
    }
    Ok(Route { subsegs, links, pivots })
}

/// A piecewise-straight closed path homotopic to `rep`: interior sample
/// points are displaced by up to `magnitude` inside their cells, while
/// points adjacent to cone pivots stay pinned and the path is routed around
/// each pivot by short chords at a small radius.
pub fn random_homotopic_perturbation(
    surface: &SurfaceComplex,
    rep: &GeodesicRep,
    magnitude: f64,
    seed: u64,
) -> Result<SurfacePath, GeodesicError> {
    let route = route_of(surface, rep)?;
    let mut rng = Rng::new(seed);
    let mut mag = magnitude;
    for _ in 0..24 {
        match build_perturbed(surface, &route, mag, &mut rng) {
            Ok(path) => return Ok(path),
            Err(_) if mag > 0.0 => mag *= 0.5,
            Err(e) => return Err(e),
        }
    }
    Err(GeodesicError::PerturbationTooLarge)
}

fn build_perturbed(
    surface: &SurfaceComplex,
    route: &Route,
    magnitude: f64,
    rng: &mut Rng,
) -> Result<SurfacePath, GeodesicError> {
    // Entries `(cell, point, iso)` where `iso` maps this entry's chart into
    // the previous entry's chart.
    let m = route.subsegs.len();
    let mut decl: Vec<(usize, Vec2, Iso)> = Vec::new();
    let sub_mid = |j: usize, rng: &mut Rng| -> (usize, Vec2) {
        let (cell, a, b) = route.subsegs[j];
        let margin = 0.3 * a.dist(b);
        (cell, displace_within(surface, cell, (a + b) * 0.5, magnitude.min(margin), rng))
    };
    let first = sub_mid(0, rng);
    decl.push((first.0, first.1, Iso::IDENTITY));
    for j in 0..m {
        let next = (j + 1) % m;
        match (route.links[j], route.pivots[j]) {
            (Some(iso), None) => {
                let (cell, p) = if next == 0 { (first.0, first.1) } else { sub_mid(next, rng) };
                decl.push((cell, p, iso));
            }
            (None, Some((corner_in, corner_out))) => {
                let (_, a0, b0) = route.subsegs[j];
                let (_, a1, b1) = route.subsegs[next];
                let d_in = (b0 - a0).normalized();
                let d_out = (b1 - a1).normalized();
                // Detour radius: scales with the magnitude so that zero
                // magnitude traces the representative arbitrarily closely,
                // but stays above the walking tolerances.
                let delta = (0.25 * a0.dist(b0).min(a1.dist(b1)))
                    .min(0.5 * magnitude)
                    .max(surface.tol.eps_len * 1e3);
                decl.extend(pivot_sweep(surface, corner_in, corner_out, d_in, d_out, delta)?);
                let (cell, p) = if next == 0 { (first.0, first.1) } else { sub_mid(next, rng) };
                decl.push((cell, p, Iso::IDENTITY));
            }
            _ => unreachable!("route links and pivots are exclusive"),
        }
    }
    // Declared waypoints: each point in the chart of the previous entry.
    let mut waypoints: Vec<(u32, Vec2)> = Vec::new();
    waypoints.push((surface.cell(decl[0].0).parent, decl[0].1));
    for j in 1..decl.len() {
        let prev_cell = decl[j - 1].0;
        waypoints.push((surface.cell(prev_cell).parent, decl[j].2.apply(decl[j].1)));
    }
    Ok(SurfacePath { closed: true, waypoints })
}

fn displace_within(
    surface: &SurfaceComplex,
    cell: usize,
    p: Vec2,
    magnitude: f64,
    rng: &mut Rng,
) -> Vec2 {
    if magnitude <= 0.0 {
        return p;
    }
    let verts = &surface.cell(cell).verts;
    let margin = surface.tol.eps_len * 100.0;
    let mut mag = magnitude;
    for _ in 0..30 {
        let d = Vec2::from_angle(rng.range(0.0, crate::geom::TAU)) * (mag * rng.uniform());
        let q = p + d;
        if crate::geom::convex_contains(verts, q, -margin) {
            return q;
        }
        mag *= 0.5;
    }
    p
}

/// Waypoint entries routing around a vertex at radius `delta`: one point on
/// the bisector of each corner along the shorter side from `corner_in` to
/// `corner_out`. Consecutive bisector points are separated by less than π,
/// so the chord between them crosses exactly the radial edge between the
/// corners and passes the vertex on the correct side.
fn pivot_sweep(
    surface: &SurfaceComplex,
    corner_in: Corner,
    corner_out: Corner,
    d_in: Vec2,
    d_out: Vec2,
    delta: f64,
) -> Result<Vec<(usize, Vec2, Iso)>, GeodesicError> {
    let (class, _) = surface.class_of_corner(corner_in);
    let total = surface.classes()[class].total;
    let phi_in = surface.ray_coordinate(VertexRay { corner: corner_in, dir: -d_in });
    let phi_out = surface.ray_coordinate(VertexRay { corner: corner_out, dir: d_out });
    let ccw = (phi_out - phi_in).rem_euclid(total);
    let go_ccw = ccw <= total - ccw;

    let bis_point = |c: Corner| -> Vec2 {
        let (cls, pos) = surface.class_of_corner(c);
        let half = surface.classes()[cls].angles[pos] * 0.5;
        let dir = crate::geom::Rot::from_angle(half).apply(surface.corner_start_dir(c));
        surface.corner_position(c) + dir * delta
    };

    let mut entries: Vec<(usize, Vec2, Iso)> =
        vec![(corner_in.cell, bis_point(corner_in), Iso::IDENTITY)];
    let mut cur = corner_in;
    let cap = surface.classes()[class].corners.len() + 1;
    for _ in 0..cap {
        if cur == corner_out {
            return Ok(entries);
        }
        let step_iso;
        if go_ccw {
            let len = surface.cell(cur.cell).len();
            let e = (cur.vertex + len - 1) % len;
            step_iso = surface.cell(cur.cell).edges[e].iso;
            let (nc, ne) = twin(surface, cur.cell, e);
            cur = Corner { cell: nc, vertex: ne };
        } else {
            step_iso = surface.cell(cur.cell).edges[cur.vertex].iso;
            let (nc, ne) = twin(surface, cur.cell, cur.vertex);
            let kn = surface.cell(nc).len();
            cur = Corner { cell: nc, vertex: (ne + 1) % kn };
        }
        entries.push((cur.cell, bis_point(cur), step_iso));
    }
    Err(GeodesicError::BadPath(String::from("corner walk does not reach the far corner")))
}

/// Finsler length of a waypoint path: the sum of ‖chord‖_Q over the straight
/// chords the path develops into.
pub fn path_finsler_length(
    surface: &SurfaceComplex,
    path: &SurfacePath,
    q: &PolygonalNorm,
) -> Result<f64, GeodesicError> {
    let chords = path_chords(surface, path)?;
    Ok(chords.iter().map(|&v| q.eval(v)).sum())
}

/// Developed chord vectors of a waypoint path (one per consecutive pair).
pub fn path_chords(
    surface: &SurfaceComplex,
    path: &SurfacePath,
) -> Result<Vec<Vec2>, GeodesicError> {
    if !path.closed {
        return Err(GeodesicError::OpenPath);
    }
    let mut pts: Vec<(u32, Vec2)> = Vec::new();
    for &(pid, p) in &path.waypoints {
        if pts.last().is_none_or(|&(qq, r)| qq != pid || r.dist(p) > 1e-12) {
            pts.push((pid, p));
        }
    }
    if pts.len() < 2 {
        return Ok(Vec::new());
    }
    let (pid0, p0) = pts[0];
    let cell0 = surface
        .locate(pid0, p0)
        .ok_or_else(|| GeodesicError::BadPath(format!("waypoint {p0} not in polygon {pid0}")))?;
    let mut chords = Vec::new();
    let mut cell = cell0;
    let mut pos = p0;
    let mut word = Vec::new();
    let m = pts.len();
    for i in 1..=m {
        let (pid_t, xy_t) = pts[i % m];
        if surface.cell(cell).parent == pid_t {
            chords.push(xy_t - pos);
            walk_to_target(surface, &mut cell, &mut pos, xy_t, &mut word)?;
        } else {
            let before = pos;
            let ca = cell;
            hop_to_polygon(surface, &mut cell, &mut pos, pid_t, xy_t, &mut word)?;
            // Recover the developed chord across the chosen edge.
            let Tok::Cross { cell: wc, edge } = *word.last().unwrap() else { unreachable!() };
            debug_assert_eq!(wc, ca);
            let iso = surface.cell(ca).edges[edge].iso;
            chords.push(iso.apply(xy_t) - before);
        }
    }
    Ok(chords)
}
