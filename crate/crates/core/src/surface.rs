//! Surfaces glued from planar polygons by isometries `v ↦ R_{2πk/n} v + t`.
//!
//! [`SurfaceSpec`] is the raw gluing data; [`build_surface`] validates it and
//! produces a [`SurfaceComplex`] carrying chart transitions, vertex classes
//! with their cone structure, genus, and a convex cell decomposition used by
//! the walking primitives. Nonconvex polygons are triangulated internally;
//! cells of a common parent polygon share its coordinate chart.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::geom::{self, ccw_angle, interior_angle, orient, polygon_area, Iso, Rot, Vec2, PI, TAU};
#[cfg(not(feature = "std"))]
use crate::geom::FloatExt;

/// Length and angle tolerances used throughout validation and walking.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub eps_len: f64,
    pub eps_ang: f64,
}

impl Tolerances {
    /// Default tolerances for a spec: `eps_len` scales with the largest
    /// polygon diameter, `eps_ang` is absolute.
    pub fn for_spec(spec: &SurfaceSpec) -> Tolerances {
        let mut diam: f64 = 1.0;
        for p in &spec.polygons {
            for a in &p.vertices {
                for b in &p.vertices {
                    diam = diam.max(a.dist(*b));
                }
            }
        }
        Tolerances { eps_len: 1e-9 * diam, eps_ang: 1e-9 }
    }
}

/// One side of a gluing record: edge `edge` of polygon `polygon`.
///
/// Edge `e` of a polygon runs from vertex `e` to vertex `e+1` (mod the vertex
/// count), with vertices listed counterclockwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct EdgeRef {
    pub polygon: u32,
    pub edge: u32,
}

impl EdgeRef {
    pub const fn new(polygon: u32, edge: u32) -> EdgeRef {
        EdgeRef { polygon, edge }
    }
}

impl fmt::Display for EdgeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.polygon, self.edge)
    }
}

/// Identification of two polygon edges by `v ↦ R_{2π·rotation/n} v + t`,
/// mapping the `to` edge onto the `from` edge with reversed orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Gluing {
    pub from: EdgeRef,
    pub to: EdgeRef,
    pub rotation: u32,
}

/// A polygon of the gluing data, vertices counterclockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonSpec {
    pub id: u32,
    pub vertices: Vec<Vec2>,
}

/// Raw polygon-gluing data for a 1/n-translation surface.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceSpec {
    /// Rotation order: chart transitions rotate by multiples of 2π/n.
    pub n: u32,
    pub polygons: Vec<PolygonSpec>,
    pub gluings: Vec<Gluing>,
}

/// Transition across a glued edge: places the neighboring chart into the
/// chart of the edge's own polygon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartTransition {
    pub rotation_index: u32,
    pub translation: Vec2,
    /// The edge of the neighboring polygon this edge is glued to.
    pub partner: EdgeRef,
}

impl ChartTransition {
    pub fn iso(&self, n: u32) -> Iso {
        Iso::new(Rot::fraction(self.rotation_index, n), self.translation)
    }
}

/// A vertex class of total angle `2πk/n` for some `k > n`.
#[derive(Debug, Clone)]
pub struct ConePoint {
    pub id: usize,
    /// Corners `(polygon id, vertex index)` of the class, counterclockwise.
    pub corner_list: Vec<(u32, u32)>,
    /// Snapped total angle, an exact multiple of 2π/n.
    pub total_angle: f64,
}

#[derive(Debug, Clone)]
pub enum SurfaceError {
    DuplicatePolygonId(u32),
    TooFewVertices(u32),
    NotCounterclockwise(u32),
    NotSimple(u32),
    NonFiniteCoordinate(u32),
    UnknownPolygon(u32),
    EdgeIndexOutOfRange(EdgeRef),
    RotationOutOfRange { gluing: usize, rotation: u32, n: u32 },
    EdgeUsedTwice(EdgeRef),
    EdgeUnglued(EdgeRef),
    SelfGluedEdge(EdgeRef),
    EdgeMismatch { gluing: usize, detail: String },
    BadVertexAngle { corner: (u32, u32), angle: f64 },
    NonOrientable,
    GaussBonnetResidual(f64),
    ZeroOrder,
}

impl fmt::Display for SurfaceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SurfaceError::DuplicatePolygonId(id) => write!(f, "duplicate polygon id {id}"),
            SurfaceError::TooFewVertices(id) => write!(f, "polygon {id} has fewer than 3 vertices"),
            SurfaceError::NotCounterclockwise(id) => {
                write!(f, "polygon {id} is not counterclockwise")
            }
            SurfaceError::NotSimple(id) => write!(f, "polygon {id} is not simple"),
            SurfaceError::NonFiniteCoordinate(id) => {
                write!(f, "polygon {id} has a non-finite coordinate")
            }
            SurfaceError::UnknownPolygon(id) => write!(f, "unknown polygon id {id}"),
            SurfaceError::EdgeIndexOutOfRange(e) => write!(f, "edge index out of range: {e}"),
            SurfaceError::RotationOutOfRange { gluing, rotation, n } => {
                write!(f, "rotation index out of range in gluing {gluing}: {rotation} not in [0, {n})")
            }
            SurfaceError::EdgeUsedTwice(e) => write!(f, "edge {e} appears in two gluings"),
            SurfaceError::EdgeUnglued(e) => write!(f, "edge {e} appears in no gluing"),
            SurfaceError::SelfGluedEdge(e) => {
                write!(f, "edge {e} glued to itself (non-orientable gluing pattern)")
            }
            SurfaceError::EdgeMismatch { gluing, detail } => {
                write!(f, "gluing {gluing} mismatch: {detail}")
            }
            SurfaceError::BadVertexAngle { corner, angle } => write!(
                f,
                "vertex class at corner ({}, {}) has angle {angle} not in {{2π}} ∪ {{2πk/n : k > n}}",
                corner.0, corner.1
            ),
            SurfaceError::NonOrientable => write!(f, "non-orientable gluing pattern"),
            SurfaceError::GaussBonnetResidual(r) => {
                write!(f, "Gauss-Bonnet residual {r} exceeds tolerance")
            }
            SurfaceError::ZeroOrder => write!(f, "rotation order n must be positive"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for SurfaceError {}

/// A corner of a cell: vertex `vertex` of cell `cell`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Corner {
    pub cell: usize,
    pub vertex: usize,
}

/// How a cell edge connects onward.
#[derive(Debug, Clone, Copy)]
pub struct CellEdge {
    pub neighbor: usize,
    pub neighbor_edge: usize,
    /// Neighbor chart → this chart.
    pub iso: Iso,
    /// Rotation index of the transition, mod n (0 for internal diagonals).
    pub rotation_index: u32,
    /// The parent polygon edge this cell edge lies on, if any.
    pub parent_edge: Option<EdgeRef>,
}

/// A convex cell of the refined complex; vertices counterclockwise in the
/// parent polygon's chart.
#[derive(Debug, Clone)]
pub struct Cell {
    pub parent: u32,
    pub verts: Vec<Vec2>,
    /// Parent vertex index for each cell vertex.
    pub parent_vertex: Vec<u32>,
    pub edges: Vec<CellEdge>,
}

impl Cell {
    pub fn len(&self) -> usize {
        self.verts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.verts.is_empty()
    }

    pub fn edge_endpoints(&self, e: usize) -> (Vec2, Vec2) {
        (self.verts[e], self.verts[(e + 1) % self.verts.len()])
    }
}

/// A vertex class of the identified complex with its cone structure.
#[derive(Debug, Clone)]
pub struct VertexClass {
    /// Cell corners in counterclockwise order around the vertex.
    pub corners: Vec<Corner>,
    /// Interior angle of each corner.
    pub angles: Vec<f64>,
    /// Angular offset of each corner's sector start; `offsets[i] = Σ_{j<i} angles[j]`.
    pub offsets: Vec<f64>,
    /// Raw total angle.
    pub total: f64,
    /// Total angle snapped to the nearest multiple of 2π/n (or exactly 2π).
    pub snapped: f64,
    /// Index into `SurfaceComplex::cone_points` when the class is singular.
    pub cone: Option<usize>,
}

/// A validated surface: gluing data plus derived structure.
#[derive(Debug, Clone)]
pub struct SurfaceComplex {
    pub spec: SurfaceSpec,
    /// Transition for every directed polygon edge.
    pub transitions: BTreeMap<EdgeRef, ChartTransition>,
    pub cone_points: Vec<ConePoint>,
    pub genus: u32,
    pub euler_characteristic: i64,
    pub tol: Tolerances,
    /// Largest polygon diameter; length scale of the surface.
    pub diameter: f64,

    cells: Vec<Cell>,
    classes: Vec<VertexClass>,
    corner_class: BTreeMap<Corner, (usize, usize)>,
    parent_edge_cell: BTreeMap<EdgeRef, (usize, usize)>,
    poly_index: BTreeMap<u32, usize>,
}

/// A path of chart placements, produced by developing a crossing sequence.
#[derive(Debug, Clone)]
pub struct DevelopedPath {
    /// `(polygon id, placement of that polygon's chart into the common plane)`.
    pub placements: Vec<(u32, Iso)>,
}

/// Parse-level validation of the gluing data.
pub fn validate_spec(spec: &SurfaceSpec) -> Result<(), SurfaceError> {
    if spec.n == 0 {
        return Err(SurfaceError::ZeroOrder);
    }
    let mut ids = BTreeMap::new();
    for (idx, p) in spec.polygons.iter().enumerate() {
        if ids.insert(p.id, idx).is_some() {
            return Err(SurfaceError::DuplicatePolygonId(p.id));
        }
        if p.vertices.len() < 3 {
            return Err(SurfaceError::TooFewVertices(p.id));
        }
        if !p.vertices.iter().all(|v| v.is_finite()) {
            return Err(SurfaceError::NonFiniteCoordinate(p.id));
        }
        if polygon_area(&p.vertices) <= 0.0 {
            return Err(SurfaceError::NotCounterclockwise(p.id));
        }
        if !is_simple(&p.vertices) {
            return Err(SurfaceError::NotSimple(p.id));
        }
    }
    let mut seen: BTreeMap<EdgeRef, ()> = BTreeMap::new();
    for (gi, g) in spec.gluings.iter().enumerate() {
        for side in [g.from, g.to] {
            let pidx = *ids
                .get(&side.polygon)
                .ok_or(SurfaceError::UnknownPolygon(side.polygon))?;
            if side.edge as usize >= spec.polygons[pidx].vertices.len() {
                return Err(SurfaceError::EdgeIndexOutOfRange(side));
            }
        }
        if g.rotation >= spec.n {
            return Err(SurfaceError::RotationOutOfRange { gluing: gi, rotation: g.rotation, n: spec.n });
        }
        if g.from == g.to {
            return Err(SurfaceError::SelfGluedEdge(g.from));
        }
        for side in [g.from, g.to] {
            if seen.insert(side, ()).is_some() {
                return Err(SurfaceError::EdgeUsedTwice(side));
            }
        }
    }
    for p in &spec.polygons {
        for e in 0..p.vertices.len() as u32 {
            let r = EdgeRef::new(p.id, e);
            if !seen.contains_key(&r) {
                return Err(SurfaceError::EdgeUnglued(r));
            }
        }
    }
    Ok(())
}

fn is_simple(verts: &[Vec2]) -> bool {
    let n = verts.len();
    for i in 0..n {
        let (a0, a1) = (verts[i], verts[(i + 1) % n]);
        if a0.dist(a1) == 0.0 {
            return false;
        }
        for j in i + 1..n {
            // Skip adjacent edges (they share a vertex).
            if j == i || (j + 1) % n == i || (i + 1) % n == j {
                continue;
            }
            let (b0, b1) = (verts[j], verts[(j + 1) % n]);
            if let Some((s, t)) = geom::segment_intersection(a0, a1, b0, b1) {
                if (0.0..=1.0).contains(&s) && (0.0..=1.0).contains(&t) {
                    return false;
                }
            }
        }
    }
    true
}

/// Build and validate the full surface structure.
pub fn build_surface(spec: &SurfaceSpec, tol: Tolerances) -> Result<SurfaceComplex, SurfaceError> {
    validate_spec(spec)?;
    let n = spec.n;
    let mut poly_index = BTreeMap::new();
    for (i, p) in spec.polygons.iter().enumerate() {
        poly_index.insert(p.id, i);
    }

    // Edge pairing with rotation/length consistency.
    let mut transitions: BTreeMap<EdgeRef, ChartTransition> = BTreeMap::new();
    for (gi, g) in spec.gluings.iter().enumerate() {
        let ef = edge_vec(spec, &poly_index, g.from);
        let et = edge_vec(spec, &poly_index, g.to);
        let (lf, lt) = (ef.norm(), et.norm());
        if (lf - lt).abs() > tol.eps_len {
            return Err(SurfaceError::EdgeMismatch {
                gluing: gi,
                detail: alloc::format!("edge lengths differ: {lf} vs {lt}"),
            });
        }
        let rot = Rot::fraction(g.rotation, n);
        let resid = (rot.apply(et) + ef).norm();
        if resid > tol.eps_len.max(tol.eps_ang * lf) * 8.0 {
            return Err(SurfaceError::EdgeMismatch {
                gluing: gi,
                detail: alloc::format!(
                    "rotation {} does not map edge {} onto reversed edge {} (residual {resid})",
                    g.rotation, g.to, g.from
                ),
            });
        }
        // to-chart → from-chart: R maps the `to` edge start to the `from` edge end.
        let (af, _bf) = edge_pts(spec, &poly_index, g.from);
        let (_at, bt) = edge_pts(spec, &poly_index, g.to);
        let t_ft = af - rot.apply(bt);
        transitions.insert(
            g.from,
            ChartTransition { rotation_index: g.rotation, translation: t_ft, partner: g.to },
        );
        // from-chart → to-chart is the inverse.
        let inv_rot = (n - g.rotation) % n;
        let inv = Iso::new(rot, t_ft).inverse();
        transitions.insert(
            g.to,
            ChartTransition { rotation_index: inv_rot, translation: inv.t, partner: g.from },
        );
    }

    // Convex cells; nonconvex polygons are ear-clipped.
    let mut cells: Vec<Cell> = Vec::new();
    let mut parent_edge_cell: BTreeMap<EdgeRef, (usize, usize)> = BTreeMap::new();
    for p in &spec.polygons {
        let base = cells.len();
        let tris = if is_convex(&p.vertices, tol.eps_len) {
            vec![(0..p.vertices.len() as u32).collect::<Vec<u32>>()]
        } else {
            ear_clip(&p.vertices)
        };
        // Map unordered parent-vertex pairs to the cells that carry them,
        // to connect internal diagonals.
        let mut diagonals: BTreeMap<(u32, u32), (usize, usize)> = BTreeMap::new();
        for (ti, tri) in tris.iter().enumerate() {
            let ci = base + ti;
            let k = tri.len();
            let mut edges = Vec::with_capacity(k);
            for e in 0..k {
                let a = tri[e];
                let b = tri[(e + 1) % k];
                let parent_edge = if b == (a + 1) % p.vertices.len() as u32 {
                    Some(EdgeRef::new(p.id, a))
                } else {
                    None
                };
                if let Some(pe) = parent_edge {
                    parent_edge_cell.insert(pe, (ci, e));
                } else {
                    let key = (a.min(b), a.max(b));
                    if let Some(&(cj, ej)) = diagonals.get(&key) {
                        // Connect twin diagonals; identity transition.
                        // Resolved after all cells of this polygon exist.
                        diagonals.insert(key, (cj, ej));
                        let _ = (cj, ej);
                    } else {
                        diagonals.insert(key, (ci, e));
                    }
                }
                edges.push(CellEdge {
                    neighbor: usize::MAX,
                    neighbor_edge: usize::MAX,
                    iso: Iso::IDENTITY,
                    rotation_index: 0,
                    parent_edge,
                });
            }
            cells.push(Cell {
                parent: p.id,
                verts: tri.iter().map(|&i| p.vertices[i as usize]).collect(),
                parent_vertex: tri.clone(),
                edges,
            });
        }
        // Second pass to wire diagonal twins of this polygon.
        let mut seen: BTreeMap<(u32, u32), (usize, usize)> = BTreeMap::new();
        for ti in 0..tris.len() {
            let ci = base + ti;
            for e in 0..cells[ci].len() {
                if cells[ci].edges[e].parent_edge.is_some() {
                    continue;
                }
                let a = cells[ci].parent_vertex[e];
                let b = cells[ci].parent_vertex[(e + 1) % cells[ci].len()];
                let key = (a.min(b), a.max(b));
                if let Some(&(cj, ej)) = seen.get(&key) {
                    cells[ci].edges[e].neighbor = cj;
                    cells[ci].edges[e].neighbor_edge = ej;
                    cells[cj].edges[ej].neighbor = ci;
                    cells[cj].edges[ej].neighbor_edge = e;
                } else {
                    seen.insert(key, (ci, e));
                }
            }
        }
    }

    // Wire glued boundary edges at cell level.
    let keys: Vec<EdgeRef> = parent_edge_cell.keys().copied().collect();
    for pe in keys {
        let (ci, e) = parent_edge_cell[&pe];
        let tr = transitions[&pe];
        let (cj, ej) = parent_edge_cell[&tr.partner];
        let cell = &mut cells[ci];
        cell.edges[e].neighbor = cj;
        cell.edges[e].neighbor_edge = ej;
        cell.edges[e].iso = tr.iso(n);
        cell.edges[e].rotation_index = tr.rotation_index;
    }

    // Vertex classes by counterclockwise corner walks.
    let mut corner_class: BTreeMap<Corner, (usize, usize)> = BTreeMap::new();
    let mut classes: Vec<VertexClass> = Vec::new();
    for ci in 0..cells.len() {
        for v in 0..cells[ci].len() {
            let start = Corner { cell: ci, vertex: v };
            if corner_class.contains_key(&start) {
                continue;
            }
            let mut corners = Vec::new();
            let mut cur = start;
            loop {
                corners.push(cur);
                let len = cells[cur.cell].len();
                let edge_in = (cur.vertex + len - 1) % len;
                let ce = &cells[cur.cell].edges[edge_in];
                cur = Corner { cell: ce.neighbor, vertex: ce.neighbor_edge };
                if cur == start {
                    break;
                }
                if corners.len() > cells.iter().map(Cell::len).sum::<usize>() {
                    return Err(SurfaceError::NonOrientable);
                }
            }
            let idx = classes.len();
            let mut angles = Vec::with_capacity(corners.len());
            let mut offsets = Vec::with_capacity(corners.len());
            let mut acc = 0.0;
            for (pos, c) in corners.iter().enumerate() {
                corner_class.insert(*c, (idx, pos));
                let a = interior_angle(&cells[c.cell].verts, c.vertex);
                offsets.push(acc);
                acc += a;
                angles.push(a);
            }
            classes.push(VertexClass {
                corners,
                angles,
                offsets,
                total: acc,
                snapped: 0.0,
                cone: None,
            });
        }
    }

    // Angle snapping and cone classification.
    let step = TAU / f64::from(n);
    let mut cone_points = Vec::new();
    for class in classes.iter_mut() {
        let total = class.total;
        if (total - TAU).abs() <= tol.eps_ang {
            class.snapped = TAU;
            continue;
        }
        let k = (total / step).round();
        if (total - k * step).abs() > tol.eps_ang || k * step <= TAU {
            let c0 = class.corners[0];
            let cell = &cells[c0.cell];
            return Err(SurfaceError::BadVertexAngle {
                corner: (cell.parent, cell.parent_vertex[c0.vertex]),
                angle: total,
            });
        }
        class.snapped = k * step;
        let id = cone_points.len();
        class.cone = Some(id);
        // Parent-level corner list: merge consecutive cell corners that came
        // from triangulating the same parent corner.
        let mut corner_list: Vec<(u32, u32)> = Vec::new();
        for c in &class.corners {
            let cell = &cells[c.cell];
            let pc = (cell.parent, cell.parent_vertex[c.vertex]);
            if corner_list.last() != Some(&pc) {
                corner_list.push(pc);
            }
        }
        if corner_list.len() > 1 && corner_list.first() == corner_list.last() {
            corner_list.pop();
        }
        cone_points.push(ConePoint { id, corner_list, total_angle: class.snapped });
    }

    // Euler characteristic of the identified complex. Triangulation adds as
    // many edges as faces, so counting on the original polygons is the same.
    let v = classes.len() as i64;
    let e = spec.gluings.len() as i64;
    let f = spec.polygons.len() as i64;
    let chi = v - e + f;
    if chi % 2 != 0 || chi > 2 {
        return Err(SurfaceError::NonOrientable);
    }
    let genus = ((2 - chi) / 2) as u32;

    // Gauss-Bonnet as an independent check on the raw angles.
    let gb: f64 = classes.iter().map(|c| c.total - TAU).sum();
    let residual = (gb - 4.0 * PI * (f64::from(genus) - 1.0)).abs();
    if residual > tol.eps_ang * (1.0 + classes.len() as f64) {
        return Err(SurfaceError::GaussBonnetResidual(residual));
    }

    let mut diam: f64 = 0.0;
    for p in &spec.polygons {
        for a in &p.vertices {
            for b in &p.vertices {
                diam = diam.max(a.dist(*b));
            }
        }
    }

    Ok(SurfaceComplex {
        spec: spec.clone(),
        transitions,
        cone_points,
        genus,
        euler_characteristic: chi,
        tol,
        diameter: diam,
        cells,
        classes,
        corner_class,
        parent_edge_cell,
        poly_index,
    })
}

fn edge_pts(spec: &SurfaceSpec, idx: &BTreeMap<u32, usize>, e: EdgeRef) -> (Vec2, Vec2) {
    let p = &spec.polygons[idx[&e.polygon]];
    let k = p.vertices.len();
    (p.vertices[e.edge as usize], p.vertices[(e.edge as usize + 1) % k])
}

fn edge_vec(spec: &SurfaceSpec, idx: &BTreeMap<u32, usize>, e: EdgeRef) -> Vec2 {
    let (a, b) = edge_pts(spec, idx, e);
    b - a
}

fn is_convex(verts: &[Vec2], eps: f64) -> bool {
    let n = verts.len();
    for i in 0..n {
        let a = verts[i];
        let b = verts[(i + 1) % n];
        let c = verts[(i + 2) % n];
        if orient(a, b, c) < -eps {
            return false;
        }
    }
    true
}

/// Ear-clipping triangulation; returns triangles as parent vertex indices.
fn ear_clip(verts: &[Vec2]) -> Vec<Vec<u32>> {
    let mut idx: Vec<u32> = (0..verts.len() as u32).collect();
    let mut tris = Vec::new();
    while idx.len() > 3 {
        let m = idx.len();
        let mut clipped = false;
        for i in 0..m {
            let (ia, ib, ic) = (idx[(i + m - 1) % m], idx[i], idx[(i + 1) % m]);
            let (a, b, c) = (verts[ia as usize], verts[ib as usize], verts[ic as usize]);
            if orient(a, b, c) <= 0.0 {
                continue;
            }
            let mut ear = true;
            for &j in &idx {
                if j == ia || j == ib || j == ic {
                    continue;
                }
                let p = verts[j as usize];
                if orient(a, b, p) >= 0.0 && orient(b, c, p) >= 0.0 && orient(c, a, p) >= 0.0 {
                    ear = false;
                    break;
                }
            }
            if ear {
                tris.push(vec![ia, ib, ic]);
                idx.remove(i);
                clipped = true;
                break;
            }
        }
        if !clipped {
            // Degenerate leftovers; emit a fan to stay total.
            break;
        }
    }
    if idx.len() >= 3 {
        for i in 1..idx.len() - 1 {
            tris.push(vec![idx[0], idx[i], idx[i + 1]]);
        }
    }
    tris
}

/// A ray based at a vertex class, pointing into a specific corner.
#[derive(Debug, Clone, Copy)]
pub struct VertexRay {
    pub corner: Corner,
    /// Direction in the corner cell's chart.
    pub dir: Vec2,
}

impl SurfaceComplex {
    pub fn n(&self) -> u32 {
        self.spec.n
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, i: usize) -> &Cell {
        &self.cells[i]
    }

    pub fn classes(&self) -> &[VertexClass] {
        &self.classes
    }

    pub fn class_of_corner(&self, c: Corner) -> (usize, usize) {
        self.corner_class[&c]
    }

    pub fn polygon(&self, id: u32) -> &PolygonSpec {
        &self.spec.polygons[self.poly_index[&id]]
    }

    /// Cells belonging to polygon `id`.
    pub fn cells_of_polygon(&self, id: u32) -> impl Iterator<Item = usize> + '_ {
        let cells = &self.cells;
        (0..cells.len()).filter(move |&i| cells[i].parent == id)
    }

    /// Cell and cell-edge carrying a directed parent edge.
    pub fn cell_of_parent_edge(&self, e: EdgeRef) -> (usize, usize) {
        self.parent_edge_cell[&e]
    }

    /// Locate the cell of polygon `pid` containing `p`.
    pub fn locate(&self, pid: u32, p: Vec2) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for ci in self.cells_of_polygon(pid) {
            if geom::convex_contains(&self.cells[ci].verts, p, self.tol.eps_len) {
                // Prefer the cell where p is deepest inside, to settle
                // points on internal diagonals.
                let d = self.depth(ci, p);
                if best.is_none_or(|(_, bd)| d > bd) {
                    best = Some((ci, d));
                }
            }
        }
        best.map(|(ci, _)| ci)
    }

    fn depth(&self, ci: usize, p: Vec2) -> f64 {
        let cell = &self.cells[ci];
        let mut d = f64::INFINITY;
        for e in 0..cell.len() {
            let (a, b) = cell.edge_endpoints(e);
            let ev = (b - a).normalized();
            d = d.min(ev.cross(p - a));
        }
        d
    }

    /// Total (raw) angle of the vertex class containing the given parent
    /// corner `(polygon id, vertex index)`.
    pub fn cone_angle_around(&self, pid: u32, vertex: u32) -> Option<f64> {
        let ci = self
            .cells_of_polygon(pid)
            .find(|&c| self.cells[c].parent_vertex.contains(&vertex))?;
        let v = self.cells[ci].parent_vertex.iter().position(|&x| x == vertex)?;
        let (cls, _) = self.corner_class[&Corner { cell: ci, vertex: v }];
        Some(self.classes[cls].total)
    }

    /// Develop a chain of directed parent-edge crossings into the plane,
    /// starting from polygon `start` placed by `seed`.
    ///
    /// Each crossing must be an edge of the polygon the path is currently
    /// in; consecutive placements differ by the crossed edge's transition.
    pub fn develop_path(
        &self,
        start: u32,
        crossings: &[EdgeRef],
        seed: Iso,
    ) -> Result<DevelopedPath, SurfaceError> {
        if !self.poly_index.contains_key(&start) {
            return Err(SurfaceError::UnknownPolygon(start));
        }
        let mut placements = Vec::with_capacity(crossings.len() + 1);
        let mut pid = start;
        let mut frame = seed;
        placements.push((pid, frame));
        for e in crossings {
            if e.polygon != pid {
                return Err(SurfaceError::EdgeMismatch {
                    gluing: 0,
                    detail: alloc::format!("crossing {e} is not an edge of polygon {pid}"),
                });
            }
            let tr = *self.transitions.get(e).ok_or(SurfaceError::EdgeIndexOutOfRange(*e))?;
            frame = frame.compose(tr.iso(self.spec.n));
            pid = tr.partner.polygon;
            placements.push((pid, frame));
        }
        Ok(DevelopedPath { placements })
    }

    // ---- cone structure -------------------------------------------------

    /// Snapped total angle of a class.
    pub fn class_angle(&self, class: usize) -> f64 {
        self.classes[class].snapped
    }

    /// Direction (in the corner cell's chart) of a corner's sector start:
    /// the ray from the vertex along its outgoing edge.
    pub fn corner_start_dir(&self, c: Corner) -> Vec2 {
        let cell = &self.cells[c.cell];
        let k = cell.len();
        (cell.verts[(c.vertex + 1) % k] - cell.verts[c.vertex]).normalized()
    }

    /// Angular coordinate of a vertex ray in `[0, Θ)` around its class.
    ///
    /// The ray direction may be expressed in the chart of a nearby corner
    /// of the class (as happens when a segment ends exactly on a glued
    /// edge); it is transported around the vertex until a corner whose
    /// sector contains it is found.
    pub fn ray_coordinate(&self, ray: VertexRay) -> f64 {
        let ray = self.resolve_vertex_ray(ray);
        let (cls, pos) = self.corner_class[&ray.corner];
        let class = &self.classes[cls];
        let start = self.corner_start_dir(ray.corner);
        let beta = ccw_angle(start.angle(), ray.dir.angle());
        let beta = if beta >= TAU - 1e-9 { 0.0 } else { beta.min(class.angles[pos]) };
        class.offsets[pos] + beta
    }

    /// Re-anchor a vertex ray on a corner whose sector contains it.
    pub fn resolve_vertex_ray(&self, ray: VertexRay) -> VertexRay {
        let (cls, _) = self.corner_class[&ray.corner];
        let class = &self.classes[cls];
        let eps = 1e-9;
        let fits = |c: Corner, d: Vec2| -> bool {
            let (ccls, pos) = self.corner_class[&c];
            let beta = ccw_angle(self.corner_start_dir(c).angle(), d.angle());
            beta <= self.classes[ccls].angles[pos] + eps || beta >= TAU - eps
        };
        if fits(ray.corner, ray.dir) {
            return ray;
        }
        // Walk alternately counterclockwise and clockwise, transporting the
        // direction through each radial edge crossing.
        let mut ccw_c = ray.corner;
        let mut ccw_d = ray.dir;
        let mut cw_c = ray.corner;
        let mut cw_d = ray.dir;
        for _ in 0..class.corners.len() {
            // One step counterclockwise: across the incoming edge.
            {
                let len = self.cells[ccw_c.cell].len();
                let e = (ccw_c.vertex + len - 1) % len;
                let ce = &self.cells[ccw_c.cell].edges[e];
                ccw_d = ce.iso.rot.inverse().apply(ccw_d);
                ccw_c = Corner { cell: ce.neighbor, vertex: ce.neighbor_edge };
                if fits(ccw_c, ccw_d) {
                    return VertexRay { corner: ccw_c, dir: ccw_d };
                }
            }
            // One step clockwise: across the outgoing edge.
            {
                let ce = &self.cells[cw_c.cell].edges[cw_c.vertex];
                cw_d = ce.iso.rot.inverse().apply(cw_d);
                let kn = self.cells[ce.neighbor].len();
                cw_c = Corner { cell: ce.neighbor, vertex: (ce.neighbor_edge + 1) % kn };
                if fits(cw_c, cw_d) {
                    return VertexRay { corner: cw_c, dir: cw_d };
                }
            }
        }
        ray
    }

    /// Inverse of [`ray_coordinate`]: the ray at angular coordinate `phi`.
    pub fn ray_at_coordinate(&self, class: usize, phi: f64) -> VertexRay {
        let cl = &self.classes[class];
        let phi = phi.rem_euclid(cl.total);
        let mut pos = cl.corners.len() - 1;
        for i in 0..cl.corners.len() {
            let end = cl.offsets[i] + cl.angles[i];
            if phi <= end + 1e-12 {
                pos = i;
                break;
            }
        }
        let beta = (phi - cl.offsets[pos]).max(0.0).min(cl.angles[pos]);
        let corner = cl.corners[pos];
        let start = self.corner_start_dir(corner);
        let dir = Rot::from_angle(beta).apply(start);
        VertexRay { corner, dir }
    }

    /// Counterclockwise angle from ray `a` to ray `b` around their common
    /// vertex class, in `[0, Θ)`.
    pub fn ccw_angle_at_vertex(&self, a: VertexRay, b: VertexRay) -> f64 {
        let (ca, _) = self.corner_class[&a.corner];
        let (cb, _) = self.corner_class[&b.corner];
        debug_assert_eq!(ca, cb, "rays at different vertex classes");
        let total = self.classes[ca].total;
        let d = self.ray_coordinate(b) - self.ray_coordinate(a);
        let r = d.rem_euclid(total);
        if r >= total { r - total } else { r }
    }

    /// Position of a class representative vertex in some corner cell chart.
    pub fn corner_position(&self, c: Corner) -> Vec2 {
        self.cells[c.cell].verts[c.vertex]
    }

    // ---- straight walking ------------------------------------------------

    /// One straight step inside cell `cell` from `pos` in unit direction
    /// `dir`: either crosses an edge or hits a vertex.
    ///
    /// `skip_edge` suppresses the edge the point currently lies on.
    pub fn straight_step(
        &self,
        cell: usize,
        pos: Vec2,
        dir: Vec2,
        skip_edge: Option<usize>,
    ) -> StepResult {
        let c = &self.cells[cell];
        let k = c.len();
        let eps = self.tol.eps_len;
        let mut best: Option<(f64, usize, f64)> = None;
        for e in 0..k {
            if Some(e) == skip_edge {
                continue;
            }
            let (a, b) = c.edge_endpoints(e);
            let eb = b - a;
            let denom = dir.cross(eb);
            if denom.abs() < 1e-15 {
                continue;
            }
            let d = a - pos;
            let t = d.cross(eb) / denom;
            let s = d.cross(dir) / denom;
            let elen = eb.norm();
            if t > eps && (-eps / elen..=1.0 + eps / elen).contains(&s)
                && best.is_none_or(|(bt, _, _)| t < bt) {
                    best = Some((t, e, s));
                }
        }
        let Some((t, e, s)) = best else {
            return StepResult::Stuck;
        };
        let (a, b) = c.edge_endpoints(e);
        let hit = pos + dir * t;
        let elen = (b - a).norm();
        if s * elen < eps {
            return StepResult::VertexHit { corner: Corner { cell, vertex: e }, t };
        }
        if (1.0 - s) * elen < eps {
            return StepResult::VertexHit { corner: Corner { cell, vertex: (e + 1) % k }, t };
        }
        StepResult::Crossed { edge: e, point: hit, t }
    }

    /// Cross cell edge `(cell, edge)`: returns the neighbor cell, the entry
    /// edge index there, and the transition placing the neighbor chart into
    /// this chart.
    pub fn cross(&self, cell: usize, edge: usize) -> (usize, usize, Iso) {
        let ce = &self.cells[cell].edges[edge];
        (ce.neighbor, ce.neighbor_edge, ce.iso)
    }
}

/// Result of one straight step across a cell.
#[derive(Debug, Clone, Copy)]
pub enum StepResult {
    Crossed { edge: usize, point: Vec2, t: f64 },
    VertexHit { corner: Corner, t: f64 },
    /// No exit found; numerically degenerate input.
    Stuck,
}

/// Convenience: build with default tolerances.
pub fn build(spec: &SurfaceSpec) -> Result<SurfaceComplex, SurfaceError> {
    build_surface(spec, Tolerances::for_spec(spec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use alloc::vec;

    /// Square torus: one polygon, opposite sides glued, no cone points.
    fn square_torus() -> SurfaceSpec {
        SurfaceSpec {
            n: 1,
            polygons: vec![PolygonSpec {
                id: 0,
                vertices: vec![
                    Vec2::new(0.0, 0.0),
                    Vec2::new(1.0, 0.0),
                    Vec2::new(1.0, 1.0),
                    Vec2::new(0.0, 1.0),
                ],
            }],
            gluings: vec![
                Gluing { from: EdgeRef::new(0, 0), to: EdgeRef::new(0, 2), rotation: 0 },
                Gluing { from: EdgeRef::new(0, 1), to: EdgeRef::new(0, 3), rotation: 0 },
            ],
        }
    }

    #[test]
    fn torus_has_regular_vertex_class() {
        let s = build(&square_torus()).unwrap();
        assert_eq!(s.genus, 1);
        assert!(s.cone_points.is_empty());
        assert!((s.cone_angle_around(0, 0).unwrap() - TAU).abs() < 1e-12);
    }

    #[test]
    fn develop_path_empty_is_seed() {
        let s = build(&fixtures::octagon()).unwrap();
        let seed = Iso::new(Rot::from_angle(0.3), Vec2::new(1.0, 2.0));
        let d = s.develop_path(0, &[], seed).unwrap();
        assert_eq!(d.placements.len(), 1);
        assert_eq!(d.placements[0].0, 0);
        assert_eq!(d.placements[0].1, seed);
    }

    #[test]
    fn develop_path_translation_crossing() {
        let s = build(&fixtures::octagon()).unwrap();
        let d = s.develop_path(0, &[EdgeRef::new(0, 3)], Iso::IDENTITY).unwrap();
        assert_eq!(d.placements.len(), 2);
        let iso = d.placements[1].1;
        // Pure translation: crossing the top edge places the next copy a
        // full span above.
        assert!((iso.rot.angle()).abs() < 1e-12);
        assert!((iso.t - Vec2::new(0.0, fixtures::OCTAGON_SPAN)).norm() < 1e-12);
        // Shared edge coincides pointwise: the glued bottom edge of the
        // developed copy equals the top edge of the base.
        let p = &s.spec.polygons[0];
        let (a_top, b_top) = (p.vertices[3], p.vertices[4]);
        let (a_bot, b_bot) = (p.vertices[7], p.vertices[0]);
        assert!(iso.apply(a_bot).dist(b_top) < 1e-12);
        assert!(iso.apply(b_bot).dist(a_top) < 1e-12);
    }

    #[test]
    fn develop_path_rotation_crossing() {
        let s = build(&fixtures::quarter_octagon()).unwrap();
        let d = s.develop_path(0, &[EdgeRef::new(0, 0)], Iso::IDENTITY).unwrap();
        let iso = d.placements[1].1;
        // Crossing edge 0 (glued to edge 2 by a quarter turn) rotates the
        // next chart by ±π/2.
        assert!((iso.rot.angle().abs() - PI / 2.0).abs() < 1e-12);
        let p = &s.spec.polygons[0];
        let (a0, b0) = (p.vertices[0], p.vertices[1]);
        let (a2, b2) = (p.vertices[2], p.vertices[3]);
        assert!(iso.apply(a2).dist(b0) < 1e-12 && iso.apply(b2).dist(a0) < 1e-12);
    }

    #[test]
    fn develop_path_rejects_unchained_crossings() {
        let s = build(&fixtures::third_hexagons()).unwrap();
        // Crossing an edge of polygon 1 while starting in polygon 0.
        assert!(s.develop_path(0, &[EdgeRef::new(1, 0)], Iso::IDENTITY).is_err());
    }

    #[test]
    fn corner_loop_composes_to_class_rotation() {
        for spec in [fixtures::octagon(), fixtures::quarter_octagon(), fixtures::third_hexagons()]
        {
            let s = build(&spec).unwrap();
            for class in s.classes() {
                // Compose the cell transitions of one counterclockwise walk
                // around the vertex; the result fixes the vertex and rotates
                // by the total angle (a multiple of 2π/n).
                let mut iso = Iso::IDENTITY;
                let mut cur = class.corners[0];
                loop {
                    let len = s.cell(cur.cell).len();
                    let e = (cur.vertex + len - 1) % len;
                    let ce = &s.cell(cur.cell).edges[e];
                    iso = iso.compose(ce.iso);
                    cur = Corner { cell: ce.neighbor, vertex: ce.neighbor_edge };
                    if cur == class.corners[0] {
                        break;
                    }
                }
                let v = s.corner_position(class.corners[0]);
                assert!(iso.apply(v).dist(v) < 1e-9, "vertex not fixed");
                let expected = crate::geom::wrap_angle(-class.snapped);
                let got = crate::geom::wrap_angle(iso.rot.angle());
                let d = crate::geom::dist_to_multiple(got - expected, TAU);
                assert!(d < 1e-9, "rotation {got} vs {expected}");
            }
        }
    }

    #[test]
    fn cone_point_count_bound() {
        for spec in [fixtures::octagon(), fixtures::quarter_octagon(), fixtures::third_hexagons()]
        {
            let s = build(&spec).unwrap();
            let bound = 2 * s.n() * (s.genus - 1);
            assert!(s.cone_points.len() as u32 <= bound);
        }
    }
}
