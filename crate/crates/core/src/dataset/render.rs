//! SVG views of an oracle reconstruction: ground truth, centers, fan
//! endpoints, auxiliary windows, refined and gap sequences, and the final
//! mask. Elements carry classes (`center`, `endpoint`, `window`, `refined`,
//! `gap`, `mask`, `ground-truth`) so the layers can be styled or counted.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use super::coco::{AnnotationSet, ImageInfo, PolygonRecord};
use crate::assembly::{reconstruct_oracle_detailed, ReconstructionMode};
use crate::error::{Error, Result};
use crate::geom::{ObjectMask, Point2};

const STYLE: &str = "\
.ground-truth{fill:#d9d9d9;stroke:#888;stroke-width:0.5}\
.mask{fill:none;stroke:#1f5fbf;stroke-width:1}\
.ray{stroke:#bbb;stroke-width:0.3}\
.window{fill:#f2c14e;fill-opacity:0.25;stroke:none}\
.refined{fill:none;stroke-width:1.5;stroke-opacity:0.7}\
.gap{fill:none;stroke:#222;stroke-width:1.5;stroke-dasharray:2 2}\
.endpoint{fill:#666}\
.center{stroke:#fff;stroke-width:0.5}\
.main{fill:#000}.q1{stroke:#d62728;fill:#d62728}.q2{stroke:#2ca02c;fill:#2ca02c}\
.q3{stroke:#ff7f0e;fill:#ff7f0e}.q4{stroke:#9467bd;fill:#9467bd}";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderOptions {
    pub n: usize,
    pub mode: ReconstructionMode,
    /// Raster resolution of the oracle's object mask.
    pub raster: usize,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self {
            n: 36,
            mode: ReconstructionMode::Multi,
            raster: super::study::DEFAULT_STUDY_RASTER,
        }
    }
}

/// SVG document for every polygon of instance `id`.
pub fn render_instance(set: &AnnotationSet, id: u64, opts: &RenderOptions) -> Result<String> {
    let parts: Vec<&PolygonRecord> = set.instance(id).collect();
    let first = parts.first().ok_or_else(|| Error::NotFound(format!("instance {id}")))?;
    render_parts(&parts, set.image(first.image_id), opts)
}

pub fn render_parts(parts: &[&PolygonRecord], image: Option<&ImageInfo>, opts: &RenderOptions) -> Result<String> {
    let (width, height) = match image {
        Some(im) => (f64::from(im.width), f64::from(im.height)),
        None => {
            let bb = parts
                .iter()
                .map(|r| r.polygon.bbox())
                .reduce(|a, b| a.union(&b))
                .ok_or_else(|| Error::NotFound("no polygons to render".into()))?;
            (bb.max.x.max(1.0).ceil(), bb.max.y.max(1.0).ceil())
        }
    };
    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = fmt(width),
        h = fmt(height)
    );
    let _ = writeln!(svg, "<style>{STYLE}</style>");
    for rec in parts {
        render_part(&mut svg, rec, height, opts)?;
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn render_part(svg: &mut String, rec: &PolygonRecord, height: f64, opts: &RenderOptions) -> Result<()> {
    let obj = ObjectMask::with_resolution(rec.polygon.clone(), opts.raster)?;
    let recon = reconstruct_oracle_detailed(&obj, opts.n, opts.mode)?;
    let flip = |p: Point2| Point2::new(p.x, height - p.y);
    let points = |pts: &[Point2]| -> String {
        pts.iter()
            .map(|&p| {
                let q = flip(p);
                format!("{},{}", fmt(q.x), fmt(q.y))
            })
            .collect::<Vec<_>>()
            .join(" ")
    };
    let bb = rec.polygon.bbox();
    let marker = 0.012 * bb.width().max(bb.height()).max(1.0);

    let _ = writeln!(
        svg,
        r#"<g class="part" data-instance="{}" data-part="{}" data-mode="{}">"#,
        rec.instance_id, rec.part, opts.mode
    );
    let _ = writeln!(svg, r#"<polygon class="ground-truth" points="{}"/>"#, points(rec.polygon.vertices()));

    if let Some(a) = &recon.assembly {
        let radius = 0.25 * bb.width().max(bb.height());
        svg.push_str("<g class=\"windows\">\n");
        for (q, w) in a.windows.iter().enumerate() {
            let c = recon.mpm.as_ref().expect("multi mode").aux()[q].center();
            let steps = 24;
            let mut wedge = vec![c];
            wedge.extend((0..=steps).map(|s| {
                let t = w.start + w.sweep.min(TAU) * s as f64 / steps as f64;
                c + Point2::new(t.cos(), t.sin()) * radius
            }));
            let _ = writeln!(svg, r#"<polygon class="window q{}" points="{}"/>"#, q + 1, points(&wedge));
        }
        svg.push_str("</g>\n");
    }

    svg.push_str("<g class=\"rays\">\n");
    let main = recon.main.center();
    for e in recon.main.endpoints() {
        let (a, b) = (flip(main), flip(e));
        let _ = writeln!(
            svg,
            r#"<line class="ray main" x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
            fmt(a.x),
            fmt(a.y),
            fmt(b.x),
            fmt(b.y)
        );
    }
    svg.push_str("</g>\n<g class=\"endpoints\">\n");
    let mut fans = vec![("main".to_string(), &recon.main)];
    if let Some(mpm) = &recon.mpm {
        fans.extend(mpm.aux().iter().enumerate().map(|(q, f)| (format!("q{}", q + 1), f)));
    }
    for (tag, fan) in &fans {
        for e in fan.endpoints() {
            let p = flip(e);
            let _ = writeln!(
                svg,
                r#"<circle class="endpoint {tag}" cx="{}" cy="{}" r="{}"/>"#,
                fmt(p.x),
                fmt(p.y),
                fmt(0.5 * marker)
            );
        }
    }
    svg.push_str("</g>\n");

    if let Some(a) = &recon.assembly {
        svg.push_str("<g class=\"sequences\">\n");
        for q in 0..4 {
            let _ = writeln!(
                svg,
                r#"<polyline class="refined q{}" points="{}"/>"#,
                q + 1,
                points(&a.refined_points(q))
            );
            let gap = a.gap_points(q);
            if !gap.is_empty() {
                let _ = writeln!(
                    svg,
                    r#"<polyline class="gap q{}-q{}" points="{}"/>"#,
                    q + 1,
                    (q + 1) % 4 + 1,
                    points(&gap)
                );
            }
        }
        svg.push_str("</g>\n");
    }

    let _ = writeln!(svg, r#"<polygon class="mask" points="{}"/>"#, points(recon.polygon.vertices()));
    svg.push_str("<g class=\"centers\">\n");
    for (tag, fan) in &fans {
        let p = flip(fan.center());
        let kind = if tag == "main" { "main" } else { "aux" };
        let _ = writeln!(
            svg,
            r#"<circle class="center {kind} {tag}" cx="{}" cy="{}" r="{}"/>"#,
            fmt(p.x),
            fmt(p.y),
            fmt(1.5 * marker)
        );
    }
    svg.push_str("</g>\n</g>\n");
    Ok(())
}

fn fmt(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".to_string()
    } else {
        s
    }
}
