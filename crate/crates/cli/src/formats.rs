//! JSON interchange formats mapped onto the core types.

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use flatcur_core::geodesic::{GeodesicKind, GeodesicRep, SurfacePath};
use flatcur_core::foliation::{LeafTrace, Termination, Turning};
use flatcur_core::norm::{named_norm, NormOracle, PolygonalNorm, WebMeasure};
use flatcur_core::surface::{EdgeRef, Gluing, PolygonSpec, SurfaceSpec};
use flatcur_core::Vec2;

#[derive(Debug, Serialize, Deserialize)]
struct SurfaceDoc {
    n: u32,
    polygons: Vec<PolygonDoc>,
    gluings: Vec<GluingDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
struct PolygonDoc {
    id: u32,
    vertices: Vec<[f64; 2]>,
}

#[derive(Debug, Serialize, Deserialize)]
struct GluingDoc {
    from: [u32; 2],
    to: [u32; 2],
    rotation: u32,
}

/// Parse a surface document; positions of syntax errors are reported by the
/// underlying JSON parser, structural problems by the validator.
pub fn parse_surface(text: &str) -> Result<SurfaceSpec> {
    let doc: SurfaceDoc = serde_json::from_str(text).context("surface document syntax")?;
    let spec = SurfaceSpec {
        n: doc.n,
        polygons: doc
            .polygons
            .into_iter()
            .map(|p| PolygonSpec {
                id: p.id,
                vertices: p.vertices.iter().map(|v| Vec2::new(v[0], v[1])).collect(),
            })
            .collect(),
        gluings: doc
            .gluings
            .into_iter()
            .map(|g| Gluing {
                from: EdgeRef::new(g.from[0], g.from[1]),
                to: EdgeRef::new(g.to[0], g.to[1]),
                rotation: g.rotation,
            })
            .collect(),
    };
    flatcur_core::surface::validate_spec(&spec).map_err(|e| anyhow!("{e}"))?;
    Ok(spec)
}

pub fn serialize_surface(spec: &SurfaceSpec) -> String {
    let doc = SurfaceDoc {
        n: spec.n,
        polygons: spec
            .polygons
            .iter()
            .map(|p| PolygonDoc {
                id: p.id,
                vertices: p.vertices.iter().map(|v| [v.x, v.y]).collect(),
            })
            .collect(),
        gluings: spec
            .gluings
            .iter()
            .map(|g| GluingDoc {
                from: [g.from.polygon, g.from.edge],
                to: [g.to.polygon, g.to.edge],
                rotation: g.rotation,
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("serializable")
}

#[derive(Debug, Serialize, Deserialize)]
struct CurveDoc {
    closed: bool,
    waypoints: Vec<(u32, f64, f64)>,
}

pub fn curve_from_json(text: &str) -> Result<SurfacePath> {
    let doc: CurveDoc = serde_json::from_str(text).context("curve document syntax")?;
    Ok(SurfacePath {
        closed: doc.closed,
        waypoints: doc.waypoints.iter().map(|&(p, x, y)| (p, Vec2::new(x, y))).collect(),
    })
}

pub fn curve_to_json(path: &SurfacePath) -> String {
    let doc = CurveDoc {
        closed: path.closed,
        waypoints: path.waypoints.iter().map(|&(p, v)| (p, v.x, v.y)).collect(),
    };
    serde_json::to_string_pretty(&doc).expect("serializable")
}

#[derive(Debug, Serialize, Deserialize)]
struct NormDoc {
    n: u32,
    vertices: Vec<[f64; 2]>,
}

pub fn norm_from_json(text: &str, eps: f64) -> Result<PolygonalNorm> {
    let doc: NormDoc = serde_json::from_str(text).context("norm document syntax")?;
    PolygonalNorm::new(
        doc.vertices.iter().map(|v| Vec2::new(v[0], v[1])).collect(),
        doc.n,
        eps,
    )
    .map_err(|e| anyhow!("{e}"))
}

pub fn norm_to_json(q: &PolygonalNorm) -> String {
    let doc = NormDoc {
        n: q.order(),
        vertices: q.vertices().iter().map(|v| [v.x, v.y]).collect(),
    };
    serde_json::to_string_pretty(&doc).expect("serializable")
}

#[derive(Debug, Serialize, Deserialize)]
struct MeasureDoc {
    n: u32,
    atoms: Vec<[f64; 2]>,
}

pub fn measure_from_json(text: &str) -> Result<WebMeasure> {
    let doc: MeasureDoc = serde_json::from_str(text).context("measure document syntax")?;
    let m = WebMeasure { n: doc.n, atoms: doc.atoms.iter().map(|a| (a[0], a[1])).collect() };
    m.validate(1e-12).map_err(|e| anyhow!("{e}"))?;
    Ok(m)
}

pub fn measure_to_json(m: &WebMeasure) -> String {
    let doc = MeasureDoc { n: m.n, atoms: m.atoms.iter().map(|&(t, w)| [t, w]).collect() };
    serde_json::to_string_pretty(&doc).expect("serializable")
}

/// A norm named on the command line: a built-in name, `web:<n>:<theta>`,
/// `euclidean`, or a path to a norm polygon document.
#[derive(Debug, Clone)]
pub enum NormArg {
    Polygon { name: String, norm: PolygonalNorm },
    Euclidean,
}

pub fn resolve_norm(arg: &str, eps: f64) -> Result<NormArg> {
    if arg == "euclidean" {
        return Ok(NormArg::Euclidean);
    }
    if let Some(q) = named_norm(arg, eps) {
        return Ok(NormArg::Polygon { name: arg.to_string(), norm: q });
    }
    if std::path::Path::new(arg).exists() {
        let text = std::fs::read_to_string(arg)?;
        let q = norm_from_json(&text, eps)?;
        return Ok(NormArg::Polygon { name: arg.to_string(), norm: q });
    }
    bail!("unknown norm {arg:?}: expected l1, hexagonal, octagonal, web:<n>:<theta>, euclidean, or a file path")
}

impl NormArg {
    pub fn oracle(&self) -> NormOracle {
        match self {
            NormArg::Polygon { norm, .. } => NormOracle::Polygon(norm.clone()),
            NormArg::Euclidean => NormOracle::Euclidean,
        }
    }

    pub fn name(&self) -> &str {
        match self {
            NormArg::Polygon { name, .. } => name,
            NormArg::Euclidean => "euclidean",
        }
    }
}

#[derive(Debug, Serialize)]
struct GeodesicDoc {
    kind: &'static str,
    cat0_length: f64,
    sweeps: u64,
    final_decrement: f64,
    legs: Vec<LegDoc>,
    pivots: Vec<PivotDoc>,
    seed: u64,
}

#[derive(Debug, Serialize)]
struct LegDoc {
    start_cone: usize,
    direction: f64,
    length: f64,
}

#[derive(Debug, Serialize)]
struct PivotDoc {
    cone: usize,
    left_angle: f64,
    right_angle: f64,
}

pub fn geodesic_to_json(rep: &GeodesicRep, seed: u64) -> String {
    let (kind, legs, pivots) = match &rep.kind {
        GeodesicKind::Chain(c) => (
            "chain",
            c.legs
                .iter()
                .map(|l| LegDoc {
                    start_cone: l.start_cone,
                    direction: l.direction,
                    length: l.length,
                })
                .collect(),
            c.pivots
                .iter()
                .map(|p| PivotDoc {
                    cone: p.cone,
                    left_angle: p.left_angle,
                    right_angle: p.right_angle,
                })
                .collect(),
        ),
        GeodesicKind::Regular(r) => (
            "regular",
            vec![LegDoc { start_cone: usize::MAX, direction: r.direction, length: r.length }],
            Vec::new(),
        ),
    };
    let doc = GeodesicDoc {
        kind,
        cat0_length: rep.cat0_length(),
        sweeps: rep.sweeps,
        final_decrement: rep.final_decrement,
        legs,
        pivots,
        seed,
    };
    serde_json::to_string_pretty(&doc).expect("serializable")
}

#[derive(Debug, Serialize)]
struct TraceDoc {
    theta: f64,
    turning: &'static str,
    termination: &'static str,
    length: f64,
    segments: Vec<SegmentDoc>,
    events: Vec<EventDoc>,
    seed: u64,
}

#[derive(Debug, Serialize)]
struct SegmentDoc {
    cell: usize,
    from: [f64; 2],
    to: [f64; 2],
}

#[derive(Debug, Serialize)]
struct EventDoc {
    cone: usize,
    segment: usize,
    turning_side_angle: f64,
}

pub fn trace_to_json(trace: &LeafTrace, seed: u64) -> String {
    let doc = TraceDoc {
        theta: trace.theta,
        turning: match trace.turning {
            Turning::Left => "left",
            Turning::Right => "right",
        },
        termination: match trace.termination {
            Termination::ClosedUp => "closed-up",
            Termination::HitLengthBound => "hit-length-bound",
            Termination::StepCap => "step-cap",
        },
        length: trace.length(),
        segments: trace
            .segments
            .iter()
            .map(|&(c, a, b)| SegmentDoc { cell: c, from: [a.x, a.y], to: [b.x, b.y] })
            .collect(),
        events: trace
            .events
            .iter()
            .map(|e| EventDoc {
                cone: e.cone,
                segment: e.segment,
                turning_side_angle: e.turning_side_angle,
            })
            .collect(),
        seed,
    };
    serde_json::to_string_pretty(&doc).expect("serializable")
}

#[cfg(test)]
mod tests {
    use super::*;
    use flatcur_core::fixtures;

    #[test]
    fn octagon_document_parses_to_expected_counts() {
        let text = serialize_surface(&fixtures::octagon());
        let spec = parse_surface(&text).unwrap();
        assert_eq!(spec.n, 1);
        assert_eq!(spec.polygons.len(), 1);
        assert_eq!(spec.gluings.len(), 4);
    }

    #[test]
    fn surface_roundtrip_field_for_field() {
        for spec in [
            fixtures::octagon(),
            fixtures::quarter_octagon(),
            fixtures::third_hexagons(),
            fixtures::l_shape(),
        ] {
            let text = serialize_surface(&spec);
            let back = parse_surface(&text).unwrap();
            assert_eq!(back, spec);
        }
    }

    #[test]
    fn rotation_out_of_range_is_reported() {
        let text = r#"{"n": 4, "polygons": [{"id": 0, "vertices": [[0,0],[1,0],[1,1],[0,1]]}],
                       "gluings": [{"from": [0,0], "to": [0,2], "rotation": 5},
                                   {"from": [0,1], "to": [0,3], "rotation": 0}]}"#;
        let err = parse_surface(text).unwrap_err();
        assert!(format!("{err}").contains("rotation index out of range"), "{err}");
    }

    #[test]
    fn syntax_error_reports_position() {
        let err = parse_surface("{ not json").unwrap_err();
        let msg = format!("{err:#}");
        assert!(msg.contains("column") || msg.contains("line"), "{msg}");
    }

    #[test]
    fn curve_roundtrip() {
        let c = fixtures::octagon_zigzag();
        let back = curve_from_json(&curve_to_json(&c)).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn named_and_file_norms_resolve() {
        assert!(matches!(resolve_norm("euclidean", 1e-9).unwrap(), NormArg::Euclidean));
        let l1 = resolve_norm("l1", 1e-9).unwrap();
        match l1 {
            NormArg::Polygon { norm, .. } => assert_eq!(norm.vertices().len(), 4),
            _ => panic!(),
        }
        assert!(resolve_norm("web:3:0.5", 1e-9).is_ok());
        assert!(resolve_norm("nope", 1e-9).is_err());
    }
}
