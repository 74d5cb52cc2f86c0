//! Layered SVG rendering: one `<g>` per semantic class.

use flatcur_core::foliation::LeafTrace;
use flatcur_core::geodesic::GeodesicRep;
use flatcur_core::surface::SurfaceComplex;
use flatcur_core::Vec2;

/// Accumulates drawing primitives per layer and emits a standalone SVG.
pub struct SvgDoc {
    polygons: Vec<Vec<Vec2>>,
    leaves: Vec<(Vec2, Vec2)>,
    geodesic: Vec<(Vec2, Vec2)>,
    cone_points: Vec<Vec2>,
    crossings: Vec<Vec2>,
}

impl SvgDoc {
    pub fn new() -> SvgDoc {
        SvgDoc {
            polygons: Vec::new(),
            leaves: Vec::new(),
            geodesic: Vec::new(),
            cone_points: Vec::new(),
            crossings: Vec::new(),
        }
    }

    /// Draw the polygons of the surface and mark its cone points.
    pub fn add_surface(&mut self, surface: &SurfaceComplex) {
        for p in &surface.spec.polygons {
            self.polygons.push(p.vertices.clone());
        }
        for cone in &surface.cone_points {
            for &(pid, v) in &cone.corner_list {
                let poly = surface.polygon(pid);
                self.cone_points.push(poly.vertices[v as usize]);
            }
        }
    }

    pub fn add_trace(&mut self, surface: &SurfaceComplex, trace: &LeafTrace) {
        for &(cell, a, b) in &trace.segments {
            let _ = surface.cell(cell);
            self.leaves.push((a, b));
        }
    }

    pub fn add_geodesic(&mut self, surface: &SurfaceComplex, rep: &GeodesicRep) {
        for (_, a, b) in flatcur_core::geodesic::render_segments(surface, rep) {
            self.geodesic.push((a, b));
        }
    }

    pub fn add_crossing(&mut self, p: Vec2) {
        self.crossings.push(p);
    }

    pub fn render(&self) -> String {
        let mut min = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut max = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        let mut see = |p: Vec2| {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        };
        for poly in &self.polygons {
            for &p in poly {
                see(p);
            }
        }
        for &(a, b) in self.leaves.iter().chain(&self.geodesic) {
            see(a);
            see(b);
        }
        if !min.x.is_finite() {
            min = Vec2::new(-1.0, -1.0);
            max = Vec2::new(1.0, 1.0);
        }
        let pad = 0.05 * (max.x - min.x).max(max.y - min.y).max(1.0);
        let (w, h) = (max.x - min.x + 2.0 * pad, max.y - min.y + 2.0 * pad);
        let sw = (w.max(h) / 400.0).max(1e-6);

        let mut out = String::new();
        out.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {} {}\">\n",
            fmt(min.x - pad),
            fmt(-(max.y + pad)),
            fmt(w),
            fmt(h)
        ));
        // Flip y so the picture is in the usual orientation.
        out.push_str("<g transform=\"scale(1,-1)\">\n");

        out.push_str("<g id=\"polygons\" fill=\"#f5f2e8\" stroke=\"#444444\" stroke-width=\"");
        out.push_str(&fmt(sw));
        out.push_str("\">\n");
        for poly in &self.polygons {
            out.push_str("<polygon points=\"");
            for (i, p) in poly.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                out.push_str(&format!("{},{}", fmt(p.x), fmt(p.y)));
            }
            out.push_str("\"/>\n");
        }
        out.push_str("</g>\n");

        out.push_str(&format!(
            "<g id=\"leaves\" stroke=\"#2a7fdb\" stroke-width=\"{}\" fill=\"none\">\n",
            fmt(sw)
        ));
        for &(a, b) in &self.leaves {
            out.push_str(&line(a, b));
        }
        out.push_str("</g>\n");

        out.push_str(&format!(
            "<g id=\"geodesic\" stroke=\"#c23b22\" stroke-width=\"{}\" fill=\"none\">\n",
            fmt(1.8 * sw)
        ));
        for &(a, b) in &self.geodesic {
            out.push_str(&line(a, b));
        }
        out.push_str("</g>\n");

        out.push_str("<g id=\"conepoints\" fill=\"#222222\">\n");
        for &p in &self.cone_points {
            out.push_str(&format!(
                "<circle cx=\"{}\" cy=\"{}\" r=\"{}\"/>\n",
                fmt(p.x),
                fmt(p.y),
                fmt(3.0 * sw)
            ));
        }
        out.push_str("</g>\n");

        out.push_str("<g id=\"crossings\" fill=\"#0a8f3c\">\n");
        for &p in &self.crossings {
            out.push_str(&format!(
                "<circle cx=\"{}\" cy=\"{}\" r=\"{}\"/>\n",
                fmt(p.x),
                fmt(p.y),
                fmt(2.2 * sw)
            ));
        }
        out.push_str("</g>\n");

        out.push_str("</g>\n</svg>\n");
        out
    }
}

impl Default for SvgDoc {
    fn default() -> Self {
        SvgDoc::new()
    }
}

fn line(a: Vec2, b: Vec2) -> String {
    format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>\n",
        fmt(a.x),
        fmt(a.y),
        fmt(b.x),
        fmt(b.y)
    )
}

fn fmt(x: f64) -> String {
    // Fixed short decimals keep the files small and diff-stable.
    format!("{x:.6}")
}
