//! Symmetric polygonal norms on the plane and their direction measures.
//!
//! A polygonal norm is given by its unit sphere, a convex symmetric polygon
//! `P` containing the origin. Evaluation goes through the dual polygon: the
//! norm of `v` is the maximum of `⟨v, E⟩` over dual vertices `E`. A norm that
//! is invariant under rotation by 2π/n decomposes into a finite measure on
//! direction classes mod 2π/n: each vertex `V` of `P` contributes the length
//! of its dual edge divided by 4n at the direction of `V`, and the norm is
//! recovered as a weighted sum of web norms.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::geom::{dist_to_multiple, wrap_angle, Rot, Vec2, PI, TAU};
#[cfg(not(feature = "std"))]
use crate::geom::FloatExt;

#[derive(Debug, Clone)]
pub enum NormError {
    TooFewVertices,
    NotConvex,
    OriginNotInterior,
    NotSymmetric,
    NotInvariant { n: u32 },
    DegenerateEdge(usize),
    WebOrderTooSmall(u32),
    OracleCheckFailed(String),
    NonPositiveWeight,
    DuplicateAtom,
    OrderMismatch { expected: u32, got: u32 },
}

impl fmt::Display for NormError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormError::TooFewVertices => write!(f, "polygon needs at least 4 vertices"),
            NormError::NotConvex => write!(f, "polygon is not convex"),
            NormError::OriginNotInterior => write!(f, "origin is not interior to the polygon"),
            NormError::NotSymmetric => write!(f, "polygon is not symmetric about the origin"),
            NormError::NotInvariant { n } => {
                write!(f, "polygon is not invariant under rotation by 2π/{n}")
            }
            NormError::DegenerateEdge(i) => write!(f, "degenerate edge {i} after deduplication"),
            NormError::WebOrderTooSmall(n) => {
                write!(f, "web norm of order {n} is degenerate; n ≥ 3 required for a unit ball")
            }
            NormError::OracleCheckFailed(s) => write!(f, "norm oracle spot-check failed: {s}"),
            NormError::NonPositiveWeight => write!(f, "web measure has a non-positive weight"),
            NormError::DuplicateAtom => write!(f, "web measure has duplicate direction classes"),
            NormError::OrderMismatch { expected, got } => {
                write!(f, "rotation order mismatch: expected {expected}, got {got}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for NormError {}

/// A symmetric convex polygon used as a unit sphere, with the rotation order
/// it respects (`n = 1` when unconstrained).
#[derive(Debug, Clone)]
pub struct PolygonalNorm {
    vertices: Vec<Vec2>,
    n: u32,
    dual: Vec<Vec2>,
}

impl PolygonalNorm {
    /// Validate and construct. Consecutive collinear vertices are removed
    /// before dualizing.
    pub fn new(vertices: Vec<Vec2>, n: u32, eps: f64) -> Result<PolygonalNorm, NormError> {
        let verts = cleanup_collinear(vertices, eps);
        if verts.len() < 4 {
            return Err(NormError::TooFewVertices);
        }
        let m = verts.len();
        for i in 0..m {
            let a = verts[i];
            let b = verts[(i + 1) % m];
            let c = verts[(i + 2) % m];
            if (b - a).cross(c - b) <= 0.0 {
                return Err(NormError::NotConvex);
            }
            if a.cross(b) <= 0.0 {
                return Err(NormError::OriginNotInterior);
            }
        }
        // Symmetry: -v must be a vertex for every vertex v.
        let scale = verts.iter().map(|v| v.norm()).fold(0.0_f64, f64::max);
        for v in &verts {
            if !verts.iter().any(|w| (*w + *v).norm() <= eps * scale.max(1.0) * 8.0) {
                return Err(NormError::NotSymmetric);
            }
        }
        if n > 1 {
            let rot = Rot::fraction(1, n);
            for v in &verts {
                let rv = rot.apply(*v);
                if !verts.iter().any(|w| (*w - rv).norm() <= eps * scale.max(1.0) * 8.0) {
                    return Err(NormError::NotInvariant { n });
                }
            }
        }
        let dual = dual_vertices(&verts)?;
        Ok(PolygonalNorm { vertices: verts, n, dual })
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn order(&self) -> u32 {
        self.n
    }

    /// Vertices of the dual polygon, in order matching the edges of `P`:
    /// `dual()[i]` is the coefficient pair of the supporting line of edge
    /// `vertices()[i] → vertices()[i+1]`.
    pub fn dual(&self) -> &[Vec2] {
        &self.dual
    }

    /// Norm evaluation by the dual support function:
    /// `‖v‖ = max_i ⟨v, E_i⟩` over dual vertices `E_i`.
    pub fn eval(&self, v: Vec2) -> f64 {
        let mut best = 0.0_f64;
        for e in &self.dual {
            best = best.max(v.dot(*e));
        }
        best
    }

    /// The dual polygon as a norm (order inherited: the dual of a
    /// Z/n-invariant polygon is Z/n-invariant).
    pub fn dual_polygon(&self, eps: f64) -> Result<PolygonalNorm, NormError> {
        PolygonalNorm::new(self.dual.clone(), self.n, eps)
    }

    /// Euclidean perimeter of the dual polygon.
    pub fn dual_perimeter(&self) -> f64 {
        let m = self.dual.len();
        (0..m).map(|i| self.dual[i].dist(self.dual[(i + 1) % m])).sum()
    }

    /// A vector `w` with `‖u + t w‖ ≥ ‖u‖` for all real `t`.
    ///
    /// On an edge interior the supporting line is unique and `w` is the edge
    /// tangent taken clockwise; at a vertex, `w` is the bisector of the cone
    /// of supporting lines, oriented to a positive basis with `u`.
    pub fn supporting_vector(&self, u: Vec2, eps: f64) -> Vec2 {
        debug_assert!(u.norm() > 0.0);
        let p = u * (1.0 / self.eval(u));
        let m = self.vertices.len();
        // Vertex case first: p within eps of a vertex.
        for i in 0..m {
            let v = self.vertices[i];
            if p.dist(v) <= eps * v.norm().max(1.0) {
                let prev = self.vertices[(i + m - 1) % m];
                let next = self.vertices[(i + 1) % m];
                let t_in = (v - prev).normalized();
                let t_out = (next - v).normalized();
                let mut w = (t_in + t_out).normalized();
                if u.cross(w) < 0.0 {
                    w = -w;
                }
                return w;
            }
        }
        // Edge case: find the edge whose sector contains u.
        for i in 0..m {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % m];
            if a.cross(p) >= -eps && p.cross(b) >= -eps {
                return (a - b).normalized();
            }
        }
        // Fallback (numerical corner): clockwise tangent of the nearest edge.
        let mut besti = 0;
        let mut bestd = f64::INFINITY;
        for i in 0..m {
            let d = p.dist(self.vertices[i]);
            if d < bestd {
                bestd = d;
                besti = i;
            }
        }
        let a = self.vertices[besti];
        let b = self.vertices[(besti + 1) % m];
        (a - b).normalized()
    }
}

fn cleanup_collinear(mut verts: Vec<Vec2>, eps: f64) -> Vec<Vec2> {
    loop {
        let m = verts.len();
        if m < 3 {
            return verts;
        }
        let mut removed = false;
        for i in 0..m {
            let a = verts[(i + m - 1) % m];
            let b = verts[i];
            let c = verts[(i + 1) % m];
            let e1 = (b - a).normalized();
            let e2 = (c - b).normalized();
            if e1.cross(e2).abs() <= eps && e1.dot(e2) > 0.0 {
                verts.remove(i);
                removed = true;
                break;
            }
        }
        if !removed {
            return verts;
        }
    }
}

/// Dual vertex for each edge: `E_i` solves `⟨E_i, V_i⟩ = ⟨E_i, V_{i+1}⟩ = 1`.
fn dual_vertices(verts: &[Vec2]) -> Result<Vec<Vec2>, NormError> {
    let m = verts.len();
    let mut dual = Vec::with_capacity(m);
    for i in 0..m {
        let a = verts[i];
        let b = verts[(i + 1) % m];
        let det = a.cross(b);
        if det.abs() < 1e-300 || a.dist(b) == 0.0 {
            return Err(NormError::DegenerateEdge(i));
        }
        dual.push(Vec2::new((b.y - a.y) / det, (a.x - b.x) / det));
    }
    Ok(dual)
}

/// The θ-norm of order n: sum of |⟨v, w⟩| over the n unit vectors `w` at
/// angles θ + π/2 + 2πk/n (the web orthogonal to the θ-web).
pub fn web_norm(n: u32, theta: f64, v: Vec2) -> f64 {
    let mut acc = 0.0;
    for k in 0..n {
        let w = Vec2::from_angle(theta + PI / 2.0 + TAU * f64::from(k) / f64::from(n));
        acc += v.dot(w).abs();
    }
    acc
}

/// Unit ball of the θ-norm of order n as a polygon (requires n ≥ 3; below
/// that the θ-norm is degenerate and has no bounded ball).
pub fn web_ball(n: u32, theta: f64, eps: f64) -> Result<PolygonalNorm, NormError> {
    if n < 3 {
        return Err(NormError::WebOrderTooSmall(n));
    }
    // The ball is the polar of the zonotope spanned by the web vectors; its
    // vertices sit in the directions bisecting consecutive web normals.
    // Build it radially: between consecutive kink directions the radial
    // function 1/‖e_φ‖ traces a straight edge, so the vertices are exactly
    // at the kinks, where some ⟨e_φ, w_k⟩ changes sign: φ = θ + 2πk/n and
    // φ = θ + π + 2πk/n.
    let mut dirs: Vec<f64> = Vec::new();
    for k in 0..n {
        dirs.push(wrap_angle(theta + TAU * f64::from(k) / f64::from(n)));
        dirs.push(wrap_angle(theta + PI + TAU * f64::from(k) / f64::from(n)));
    }
    dirs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    dirs.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let verts: Vec<Vec2> = dirs
        .iter()
        .map(|&phi| {
            let e = Vec2::from_angle(phi);
            e * (1.0 / web_norm(n, theta, e))
        })
        .collect();
    PolygonalNorm::new(verts, n, eps)
}

/// A finite atomic measure on direction classes in `[0, 2π/n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WebMeasure {
    pub n: u32,
    /// `(direction class, weight)` pairs, classes strictly increasing.
    pub atoms: Vec<(f64, f64)>,
}

impl WebMeasure {
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    pub fn validate(&self, eps_ang: f64) -> Result<(), NormError> {
        if self.atoms.iter().any(|a| a.1 <= 0.0) {
            return Err(NormError::NonPositiveWeight);
        }
        for i in 0..self.atoms.len() {
            for j in i + 1..self.atoms.len() {
                if (self.atoms[i].0 - self.atoms[j].0).abs() < eps_ang {
                    return Err(NormError::DuplicateAtom);
                }
            }
        }
        Ok(())
    }
}

/// Decompose a Z/n-invariant polygonal norm into a web measure.
///
/// Each vertex `V_i` of `P` contributes weight `K_i / 4n` at the direction
/// class of `V_i` mod 2π/n, where `K_i` is the length of the corresponding
/// dual edge. Classes within `eps_ang` are merged with summed weights.
pub fn decompose_norm(q: &PolygonalNorm, n: u32, eps_ang: f64) -> Result<WebMeasure, NormError> {
    if n > 1 && !q.order().is_multiple_of(n) {
        // The polygon was not validated against this order; re-check.
        let _ = PolygonalNorm::new(q.vertices().to_vec(), n, 1e-9)?;
    }
    let verts = q.vertices();
    let dual = q.dual();
    let m = verts.len();
    let step = TAU / f64::from(n);
    let mut atoms: Vec<(f64, f64)> = Vec::new();
    for i in 0..m {
        // Vertex V_i sits between edges i-1 and i; its dual edge runs from
        // E_{i-1} to E_i.
        let k_i = dual[i].dist(dual[(i + m - 1) % m]);
        let theta = verts[i].angle().rem_euclid(step);
        let theta = if step - theta < eps_ang { 0.0 } else { theta };
        let w = k_i / (4.0 * f64::from(n));
        if let Some(a) = atoms.iter_mut().find(|a| (a.0 - theta).abs() < eps_ang) {
            a.1 += w;
        } else {
            atoms.push((theta, w));
        }
    }
    atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Ok(WebMeasure { n, atoms })
}

/// Evaluate the norm reconstructed from a web measure:
/// `‖v‖ = Σ_i w_i · web_norm(n, θ_i, v)`.
pub fn reconstruct_norm(m: &WebMeasure, v: Vec2) -> f64 {
    m.atoms.iter().map(|&(theta, w)| w * web_norm(m.n, theta, v)).sum()
}

/// A norm given by an evaluator rather than a polygon.
#[derive(Debug, Clone)]
pub enum NormOracle {
    Polygon(PolygonalNorm),
    Euclidean,
    Web { n: u32, theta: f64 },
}

impl NormOracle {
    pub fn eval(&self, v: Vec2) -> f64 {
        match self {
            NormOracle::Polygon(p) => p.eval(v),
            NormOracle::Euclidean => v.norm(),
            NormOracle::Web { n, theta } => web_norm(*n, *theta, v),
        }
    }

    /// Spot-check positive homogeneity, symmetry and Z/n-invariance on a
    /// deterministic sample of vectors.
    pub fn spot_check(&self, n: u32) -> Result<(), NormError> {
        let rot = Rot::fraction(1, n.max(1));
        for i in 0..64 {
            let v = Vec2::from_angle(0.37 + TAU * i as f64 / 64.0) * (0.1 + 0.27 * i as f64);
            let f = self.eval(v);
            if !(f.is_finite() && f >= 0.0) {
                return Err(NormError::OracleCheckFailed(String::from("non-finite value")));
            }
            let rel = 1e-9 * (1.0 + f);
            if (self.eval(v * 2.5) - 2.5 * f).abs() > rel {
                return Err(NormError::OracleCheckFailed(String::from("not homogeneous")));
            }
            if (self.eval(-v) - f).abs() > rel {
                return Err(NormError::OracleCheckFailed(String::from("not symmetric")));
            }
            if n > 1 && (self.eval(rot.apply(v)) - f).abs() > rel {
                return Err(NormError::OracleCheckFailed(String::from("not Z/n-invariant")));
            }
        }
        Ok(())
    }
}

/// One round of the polygon approximation scheme.
#[derive(Debug, Clone)]
pub struct ApproximationRound {
    pub polygon: PolygonalNorm,
    pub measure: WebMeasure,
    /// Sup-difference between the reconstructed norm and the oracle on a
    /// sample of the unit circle.
    pub sup_error: f64,
}

/// Approximate an oracle norm by inscribed symmetric Z/n-invariant polygons.
///
/// Round `r` inserts the orbit (under rotations by π and 2π/n) of the
/// 2^{r+1}-th roots of unity together with the seed directions, scaled onto
/// the oracle's unit sphere. Dual perimeters are nonincreasing along the
/// rounds.
pub fn approximate_norm(
    oracle: &NormOracle,
    n: u32,
    seed_dirs: &[f64],
    rounds: u32,
) -> Result<Vec<ApproximationRound>, NormError> {
    oracle.spot_check(n)?;
    let mut out = Vec::with_capacity(rounds as usize);
    for r in 1..=rounds {
        let count = 2u32.pow(r + 1);
        let mut dirs: Vec<f64> = Vec::new();
        for i in 0..count {
            dirs.push(TAU * f64::from(i) / f64::from(count));
        }
        dirs.extend_from_slice(seed_dirs);
        let dirs = orbit_closure(&dirs, n);
        let verts: Vec<Vec2> = dirs
            .iter()
            .map(|&phi| {
                let e = Vec2::from_angle(phi);
                e * (1.0 / oracle.eval(e))
            })
            .collect();
        let polygon = PolygonalNorm::new(verts, n, 1e-9)?;
        let measure = decompose_norm(&polygon, n, 1e-9)?;
        let mut sup = 0.0_f64;
        for i in 0..2048 {
            let v = Vec2::from_angle(TAU * i as f64 / 2048.0);
            sup = sup.max((reconstruct_norm(&measure, v) - oracle.eval(v)).abs());
        }
        out.push(ApproximationRound { polygon, measure, sup_error: sup });
    }
    Ok(out)
}

/// Close a set of directions under rotation by π and by 2π/n, sorted and
/// deduplicated.
fn orbit_closure(dirs: &[f64], n: u32) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for &d in dirs {
        for k in 0..n {
            let base = d + TAU * f64::from(k) / f64::from(n);
            out.push(wrap_angle(base));
            out.push(wrap_angle(base + PI));
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    // 2π wraps onto 0.
    if out.len() > 1 && (TAU - out[out.len() - 1]) + out[0] < 1e-12 {
        out.pop();
    }
    out
}

/// Convenience: the four standard named unit-sphere polygons.
pub fn named_norm(name: &str, eps: f64) -> Option<PolygonalNorm> {
    match name {
        "l1" => PolygonalNorm::new(
            alloc::vec![
                Vec2::new(1.0, 0.0),
                Vec2::new(0.0, 1.0),
                Vec2::new(-1.0, 0.0),
                Vec2::new(0.0, -1.0),
            ],
            4,
            eps,
        )
        .ok(),
        "hexagonal" => PolygonalNorm::new(
            (0..6).map(|k| Vec2::from_angle(TAU * k as f64 / 6.0)).collect(),
            6,
            eps,
        )
        .ok(),
        "octagonal" => PolygonalNorm::new(
            (0..8).map(|k| Vec2::from_angle(TAU * k as f64 / 8.0)).collect(),
            8,
            eps,
        )
        .ok(),
        _ => {
            let rest = name.strip_prefix("web:")?;
            let mut parts = rest.splitn(2, ':');
            let n: u32 = parts.next()?.parse().ok()?;
            let theta: f64 = parts.next().map_or(Some(0.0), |t| t.parse().ok())?;
            web_ball(n, theta, eps).ok()
        }
    }
}

/// Distance from a direction to the nearest web class of `theta` mod 2π/n.
pub fn web_class_distance(n: u32, theta: f64, dir: f64) -> f64 {
    dist_to_multiple(dir - theta, TAU / f64::from(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l1() -> PolygonalNorm {
        named_norm("l1", 1e-9).unwrap()
    }

    fn hexagonal() -> PolygonalNorm {
        named_norm("hexagonal", 1e-9).unwrap()
    }

    #[test]
    fn l1_eval_matches_manhattan() {
        let q = l1();
        assert!((q.eval(Vec2::new(1.0, 1.0)) - 2.0).abs() < 1e-12);
        assert_eq!(q.eval(Vec2::ZERO), 0.0);
        assert!((q.eval(Vec2::new(3.0, -4.0)) - 7.0).abs() < 1e-12);
    }

    #[test]
    fn hexagon_unit_vertices() {
        let q = hexagonal();
        assert!((q.eval(Vec2::new(1.0, 0.0)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dual_of_l1_square_is_sup_square() {
        let q = l1();
        let d = q.dual();
        assert_eq!(d.len(), 4);
        for e in d {
            assert!((e.x.abs() - 1.0).abs() < 1e-12 && (e.y.abs() - 1.0).abs() < 1e-12);
        }
        assert!((q.dual_perimeter() - 8.0).abs() < 1e-12);
    }

    #[test]
    fn dual_of_hexagon() {
        let q = hexagonal();
        // Apothem √3/2 ⇒ dual circumradius 2/√3, rotated by π/6.
        let d = q.dual();
        assert_eq!(d.len(), 6);
        for e in d {
            assert!((e.norm() - 2.0 / 3.0_f64.sqrt()).abs() < 1e-12);
        }
        assert!((q.dual_perimeter() - 4.0 * 3.0_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn dual_dual_recovers_polygon() {
        let q = hexagonal();
        let dd = q.dual_polygon(1e-9).unwrap().dual_polygon(1e-9).unwrap();
        // Same polygon up to a cyclic index shift.
        let m = q.vertices().len();
        assert_eq!(dd.vertices().len(), m);
        let off = (0..m)
            .find(|&o| q.vertices()[o].dist(dd.vertices()[0]) < 1e-9)
            .expect("no matching vertex");
        for i in 0..m {
            assert!(dd.vertices()[i].dist(q.vertices()[(i + off) % m]) < 1e-9);
        }
    }

    #[test]
    fn web_norm_examples() {
        assert!((web_norm(4, 0.0, Vec2::new(1.0, 0.0)) - 2.0).abs() < 1e-12);
        assert!((web_norm(3, 0.0, Vec2::new(1.0, 0.0)) - 3.0_f64.sqrt()).abs() < 1e-12);
        assert_eq!(web_norm(7, 0.3, Vec2::ZERO), 0.0);
    }

    #[test]
    fn l1_decomposes_to_single_atom() {
        let m = decompose_norm(&l1(), 4, 1e-9).unwrap();
        assert_eq!(m.atoms.len(), 1);
        assert!(m.atoms[0].0.abs() < 1e-12);
        assert!((m.atoms[0].1 - 0.5).abs() < 1e-12);
        assert!((m.total_mass() - 8.0 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn hexagon_decomposes_to_two_atoms() {
        let m = decompose_norm(&hexagonal(), 3, 1e-9).unwrap();
        assert_eq!(m.atoms.len(), 2);
        let s3 = 3.0_f64.sqrt();
        assert!(m.atoms[0].0.abs() < 1e-12);
        assert!((m.atoms[0].1 - s3 / 6.0).abs() < 1e-12);
        assert!((m.atoms[1].0 - PI / 3.0).abs() < 1e-12);
        assert!((m.atoms[1].1 - s3 / 6.0).abs() < 1e-12);
        // Reconstruction at a unit-sphere point.
        assert!((reconstruct_norm(&m, Vec2::new(1.0, 0.0)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn web_ball_of_order_four_is_half_l1() {
        let q = web_ball(4, 0.0, 1e-9).unwrap();
        let m = decompose_norm(&q, 4, 1e-9).unwrap();
        assert_eq!(m.atoms.len(), 1);
        assert!(m.atoms[0].0.abs() < 1e-12);
        assert!((m.atoms[0].1 - 1.0).abs() < 1e-12);
        assert!((q.dual_perimeter() - 16.0).abs() < 1e-12);
        for v in q.vertices() {
            assert!((v.norm() - 0.5).abs() < 1e-12 || (v.x.abs() - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn reconstruct_l1_from_half_weight_atom() {
        let m = WebMeasure { n: 4, atoms: alloc::vec![(0.0, 0.5)] };
        assert!((reconstruct_norm(&m, Vec2::new(3.0, 4.0)) - 7.0).abs() < 1e-12);
        let empty = WebMeasure { n: 4, atoms: alloc::vec![] };
        assert_eq!(reconstruct_norm(&empty, Vec2::new(1.0, 2.0)), 0.0);
    }

    #[test]
    fn supporting_vector_on_l1() {
        let q = l1();
        let w = q.supporting_vector(Vec2::new(1.0, 1.0), 1e-9);
        // Edge interior: clockwise tangent ∝ (1, -1).
        assert!(w.x > 0.0 && (w.x + w.y).abs() < 1e-12);
        let w = q.supporting_vector(Vec2::new(1.0, 0.0), 1e-9);
        assert!((w - Vec2::new(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn supporting_vector_on_hexagon_vertex() {
        let q = hexagonal();
        let w = q.supporting_vector(Vec2::new(1.0, 0.0), 1e-9);
        assert!((w - Vec2::new(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn supporting_inequality_holds() {
        let q = hexagonal();
        let mut rng = crate::rng::Rng::new(1);
        for _ in 0..50 {
            let u = Vec2::from_angle(rng.range(0.0, TAU)) * rng.range(0.1, 3.0);
            let w = q.supporting_vector(u, 1e-9);
            let nu = q.eval(u);
            for _ in 0..100 {
                let t = rng.range(-10.0, 10.0);
                assert!(q.eval(u + w * t) >= nu - 1e-12);
            }
        }
    }

    #[test]
    fn decomposition_is_exact_on_random_vectors() {
        for (q, n) in [(l1(), 4u32), (hexagonal(), 3), (web_ball(6, 0.2, 1e-9).unwrap(), 6)] {
            let m = decompose_norm(&q, n, 1e-9).unwrap();
            let mut rng = crate::rng::Rng::new(7);
            for _ in 0..2000 {
                let v = Vec2::new(rng.range(-5.0, 5.0), rng.range(-5.0, 5.0));
                let a = q.eval(v);
                let b = reconstruct_norm(&m, v);
                assert!((a - b).abs() <= 1e-10 * a.max(1e-30), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn total_mass_equals_dual_perimeter_over_4n() {
        for (q, n) in [(l1(), 4u32), (hexagonal(), 3), (web_ball(3, 0.0, 1e-9).unwrap(), 3)] {
            let m = decompose_norm(&q, n, 1e-9).unwrap();
            assert!((m.total_mass() - q.dual_perimeter() / (4.0 * f64::from(n))).abs() < 1e-12);
        }
    }

    #[test]
    fn euclidean_approximation_perimeters_decrease_to_2pi() {
        let rounds = approximate_norm(&NormOracle::Euclidean, 4, &[], 5).unwrap();
        let per: Vec<f64> = rounds.iter().map(|r| r.polygon.dual_perimeter()).collect();
        for w in per.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
        assert!((per[4] - TAU) / TAU < 0.01, "last perimeter {} vs 2π", per[4]);
        for w in rounds.windows(2) {
            assert!(w[1].sup_error <= w[0].sup_error + 1e-12);
        }
    }

    #[test]
    fn polygon_oracle_is_fixed_point() {
        let q = hexagonal();
        let seeds: Vec<f64> = q.vertices().iter().map(|v| v.angle()).collect();
        let rounds = approximate_norm(&NormOracle::Polygon(q.clone()), 3, &seeds, 2).unwrap();
        assert!(rounds.last().unwrap().sup_error < 1e-12);
    }

    #[test]
    fn web_oracle_measures_converge_to_unit_atom() {
        let rounds = approximate_norm(&NormOracle::Web { n: 3, theta: 0.0 }, 3, &[], 4).unwrap();
        let last = rounds.last().unwrap();
        assert!((last.measure.total_mass() - 1.0).abs() < 1e-9);
        // All atom locations are ≡ 0 mod π/3: for odd n the web norm has
        // period π/n in θ, so these reconstruct the single atom (0, 1).
        for &(theta, _) in &last.measure.atoms {
            assert!(dist_to_multiple(theta, PI / 3.0) < 1e-9, "atom at {theta}");
        }
        assert!(last.sup_error < 1e-9);
    }

    #[test]
    fn vertex_insertion_never_increases_dual_perimeter() {
        // Insert one symmetric invariant orbit into the hexagon.
        let q = hexagonal();
        let with_orbit = {
            let mut dirs: Vec<f64> =
                q.vertices().iter().map(|v| v.angle()).collect();
            dirs.push(0.19);
            let dirs = orbit_closure(&dirs, 3);
            let verts: Vec<Vec2> = dirs
                .iter()
                .map(|&phi| {
                    let e = Vec2::from_angle(phi);
                    e * (1.0 / q.eval(e))
                })
                .collect();
            PolygonalNorm::new(verts, 3, 1e-9).unwrap()
        };
        assert!(with_orbit.dual_perimeter() <= q.dual_perimeter() + 1e-12);
    }

    #[test]
    fn invariance_transport() {
        let q = hexagonal();
        let rot = Rot::fraction(1, 3);
        let mut rng = crate::rng::Rng::new(3);
        for _ in 0..200 {
            let v = Vec2::new(rng.range(-2.0, 2.0), rng.range(-2.0, 2.0));
            assert!((q.eval(rot.apply(v)) - q.eval(v)).abs() < 1e-12);
        }
    }
}
