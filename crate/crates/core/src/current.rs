//! The length identity: a Z/n-invariant polygonal norm decomposes into a
//! web measure, and the weighted sum of θ-lengths of a geodesic equals its
//! Finsler length. The identity holds leg by leg because the decomposition
//! reconstructs the norm exactly on every vector.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::geodesic::{
    finsler_length, theta_length, tighten_closed, verify_geodesic, GeodesicError, GeodesicRep,
    SurfacePath, TightenOptions,
};
use crate::geom::{Vec2, TAU};
use crate::norm::{decompose_norm, web_norm, NormError, PolygonalNorm, WebMeasure};
use crate::surface::SurfaceComplex;
#[cfg(not(feature = "std"))]
use crate::geom::FloatExt;

#[derive(Debug, Clone)]
pub enum CurrentError {
    OrderMismatch { surface: u32, measure: u32 },
    NotRefinement(String),
    Geodesic(GeodesicError),
    Norm(NormError),
}

impl fmt::Display for CurrentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurrentError::OrderMismatch { surface, measure } => {
                write!(f, "measure order {measure} differs from surface order {surface}")
            }
            CurrentError::NotRefinement(s) => write!(f, "not a refinement re-declaration: {s}"),
            CurrentError::Geodesic(e) => write!(f, "{e}"),
            CurrentError::Norm(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for CurrentError {}

impl From<GeodesicError> for CurrentError {
    fn from(e: GeodesicError) -> Self {
        CurrentError::Geodesic(e)
    }
}

impl From<NormError> for CurrentError {
    fn from(e: NormError) -> Self {
        CurrentError::Norm(e)
    }
}

/// Length of a geodesic against a web measure: Σᵢ wᵢ ℓ_{θᵢ}.
pub fn liouville_length(
    surface: &SurfaceComplex,
    measure: &WebMeasure,
    rep: &GeodesicRep,
) -> Result<f64, CurrentError> {
    if measure.n != surface.n() {
        return Err(CurrentError::OrderMismatch { surface: surface.n(), measure: measure.n });
    }
    Ok(measure
        .atoms
        .iter()
        .map(|&(theta, w)| w * theta_length(rep, measure.n, theta))
        .sum())
}

/// One term of the fundamental-domain decomposition of the intersection.
#[derive(Debug, Clone, Copy)]
pub struct IntersectionTerm {
    pub leg: usize,
    pub k: u32,
    /// |J_j| · |sin(θ_j − θ + 2πk/n)|
    pub value: f64,
}

/// Intersection of the symmetrized θ multi-foliation current with a closed
/// curve: equal to the θ-length, exposed with its per-leg, per-direction
/// breakdown.
#[derive(Debug, Clone)]
pub struct Intersection {
    pub total: f64,
    pub terms: Vec<IntersectionTerm>,
}

pub fn intersection_with_curve(
    surface: &SurfaceComplex,
    theta: f64,
    rep: &GeodesicRep,
) -> Intersection {
    let n = surface.n();
    let mut terms = Vec::new();
    let mut total = 0.0;
    for (j, (dir, len)) in rep.leg_data().iter().enumerate() {
        for k in 0..n {
            let value = len * (dir - theta + TAU * f64::from(k) / f64::from(n)).sin().abs();
            terms.push(IntersectionTerm { leg: j, k, value });
            total += value;
        }
    }
    Intersection { total, terms }
}

/// Outcome of the refinement additivity check
/// ℓ_θ under order n  =  Σ_{j<k} ℓ_{θ+2πj/n} under order m,  n = k·m.
#[derive(Debug, Clone)]
pub struct RefinementReport {
    pub n: u32,
    pub m: u32,
    pub lhs: f64,
    pub rhs: f64,
    pub rel_error: f64,
    pub pass: bool,
}

/// Validate that `fine` re-declares `coarse` with order n = k·m and scaled
/// rotation indices, then check the θ-length additivity on `rep`.
pub fn refinement_additivity_check(
    coarse: &crate::surface::SurfaceSpec,
    fine: &crate::surface::SurfaceSpec,
    theta: f64,
    rep: &GeodesicRep,
) -> Result<RefinementReport, CurrentError> {
    let m = coarse.n;
    let n = fine.n;
    if !n.is_multiple_of(m) {
        return Err(CurrentError::NotRefinement(alloc::format!(
            "{n} is not a multiple of {m}"
        )));
    }
    let k = n / m;
    if coarse.polygons != fine.polygons || coarse.gluings.len() != fine.gluings.len() {
        return Err(CurrentError::NotRefinement(String::from("gluing data differs")));
    }
    for (a, b) in coarse.gluings.iter().zip(&fine.gluings) {
        if a.from != b.from || a.to != b.to || b.rotation != a.rotation * k {
            return Err(CurrentError::NotRefinement(alloc::format!(
                "gluing {}→{} rotation {} does not scale to {}",
                a.from, a.to, a.rotation, b.rotation
            )));
        }
    }
    let lhs = theta_length(rep, n, theta);
    let rhs: f64 = (0..k)
        .map(|j| theta_length(rep, m, theta + TAU * f64::from(j) / f64::from(n)))
        .sum();
    let rel = (lhs - rhs).abs() / lhs.abs().max(1e-300);
    Ok(RefinementReport { n, m, lhs, rhs, rel_error: rel, pass: rel <= 1e-10 })
}

/// Per-norm entry of a length report.
#[derive(Debug, Clone)]
pub struct NormEntry {
    pub name: String,
    pub finsler: f64,
    pub liouville: f64,
    /// |liouville − finsler| / finsler
    pub residual: f64,
    /// Largest relative reconstruction error of the decomposition over the
    /// sampled vectors.
    pub reconstruction_error: f64,
}

/// Length data for one curve.
#[derive(Debug, Clone)]
pub struct LengthReport {
    pub curve: usize,
    pub cat0: f64,
    pub geodesic_ok: bool,
    pub theta_lengths: Vec<(f64, f64)>,
    pub norms: Vec<NormEntry>,
    pub pass: bool,
}

/// Tighten every curve and compare Finsler lengths against the weighted
/// θ-length combination for every norm. Fails when any relative residual
/// exceeds 1e-9.
pub fn consistency_report(
    surface: &SurfaceComplex,
    curves: &[SurfacePath],
    norms: &[(String, PolygonalNorm)],
    directions: &[f64],
    m_samples: usize,
) -> Result<Vec<LengthReport>, CurrentError> {
    let n = surface.n();
    let mut out = Vec::with_capacity(curves.len());
    for (ci, path) in curves.iter().enumerate() {
        let rep = tighten_closed(surface, path, TightenOptions::default())?;
        let verify = verify_geodesic(surface, &rep, 1e-9);
        let cat0 = rep.cat0_length();
        let theta_lengths: Vec<(f64, f64)> =
            directions.iter().map(|&t| (t, theta_length(&rep, n, t))).collect();
        let mut entries = Vec::with_capacity(norms.len());
        let mut pass = verify.pass;
        for (name, q) in norms {
            let measure = decompose_norm(q, n, surface.tol.eps_ang)?;
            let fl = finsler_length(&rep, q);
            let lv = liouville_length(surface, &measure, &rep)?;
            let residual = (lv - fl).abs() / fl.abs().max(1e-300);
            let recon = reconstruction_error(q, &measure, m_samples);
            pass &= residual <= 1e-9;
            entries.push(NormEntry {
                name: name.clone(),
                finsler: fl,
                liouville: lv,
                residual,
                reconstruction_error: recon,
            });
        }
        out.push(LengthReport {
            curve: ci,
            cat0,
            geodesic_ok: verify.pass,
            theta_lengths,
            norms: entries,
            pass,
        });
    }
    Ok(out)
}

/// Length entry for an oracle (non-polygonal) norm: the weighted θ-length
/// combination uses the measure of the polygon approximation at the given
/// depth, so the residual reflects the approximation error and decreases
/// with the depth instead of being asserted exact.
#[derive(Debug, Clone)]
pub struct OracleEntry {
    pub depth: u32,
    pub finsler: f64,
    pub liouville: f64,
    pub residual: f64,
}

pub fn oracle_report(
    surface: &SurfaceComplex,
    rep: &GeodesicRep,
    oracle: &crate::norm::NormOracle,
    depth: u32,
) -> Result<OracleEntry, CurrentError> {
    let rounds = crate::norm::approximate_norm(oracle, surface.n(), &[], depth.max(1))?;
    let last = rounds.last().expect("at least one round");
    let lv = liouville_length(surface, &last.measure, rep)?;
    let fl: f64 = rep
        .leg_data()
        .iter()
        .map(|&(dir, len)| oracle.eval(Vec2::from_angle(dir) * len))
        .sum();
    Ok(OracleEntry { depth, finsler: fl, liouville: lv, residual: (lv - fl).abs() / fl.max(1e-300) })
}

/// Max relative error of the measure reconstruction over a deterministic
/// sample of directions and radii.
pub fn reconstruction_error(q: &PolygonalNorm, measure: &WebMeasure, samples: usize) -> f64 {
    let mut rng = crate::rng::Rng::new(0x5eed);
    let mut worst = 0.0_f64;
    for _ in 0..samples.max(16) {
        let v = Vec2::from_angle(rng.range(0.0, TAU)) * rng.range(0.1, 10.0);
        let a = q.eval(v);
        let b: f64 = measure
            .atoms
            .iter()
            .map(|&(theta, w)| w * web_norm(measure.n, theta, v))
            .sum();
        worst = worst.max((a - b).abs() / a.max(1e-300));
    }
    worst
}
