use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Boundary, PhaseDiagram};
use crate::error::{Error, Result};
use crate::io::{with_schema, without_schema};

pub const DIAGRAM_SCHEMA: &str = "gibbsd-diagram/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    Svg,
    Csv,
    Json,
}

impl std::str::FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "svg" => Ok(ExportFormat::Svg),
            "csv" => Ok(ExportFormat::Csv),
            "json" => Ok(ExportFormat::Json),
            other => Err(Error::InvalidArgument(format!(
                "unknown diagram format `{other}`"
            ))),
        }
    }
}

pub fn diagram_to_json(diagram: &PhaseDiagram) -> Result<String> {
    with_schema(DIAGRAM_SCHEMA, diagram)
}

pub fn diagram_from_json(text: &str) -> Result<PhaseDiagram> {
    without_schema(text, DIAGRAM_SCHEMA)
}

pub fn read_diagram(path: impl AsRef<Path>) -> Result<PhaseDiagram> {
    let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
    diagram_from_json(&text)
}

fn label_text(label: &[String]) -> String {
    label.join("+")
}

fn boundary_text(b: &Boundary) -> String {
    b.between
        .iter()
        .map(|l| label_text(l))
        .collect::<Vec<_>>()
        .join(" | ")
}

/// One row per boundary vertex; coordinates are printed in shortest
/// round-trip form.
pub fn diagram_to_csv(diagram: &PhaseDiagram) -> String {
    let mut out = String::from("boundary,polyline,vertex");
    for a in &diagram.spec.axes {
        out.push(',');
        out.push_str(&a.name);
    }
    out.push_str(",between\n");
    for (bi, b) in diagram.boundaries.iter().enumerate() {
        for (li, line) in b.polylines.iter().enumerate() {
            for (vi, p) in line.iter().enumerate() {
                let _ = write!(out, "{bi},{li},{vi}");
                for c in p {
                    let _ = write!(out, ",{c}");
                }
                let _ = writeln!(out, ",\"{}\"", boundary_text(b));
            }
        }
    }
    out
}

/// Palette indexed by an FNV-1a hash of the region label.
const PALETTE: [&str; 12] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7",
    "#9c755f", "#bab0ac", "#86bcb6", "#d37295",
];

fn color(label: &str) -> &'static str {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    PALETTE[(h % PALETTE.len() as u64) as usize]
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Convex hull of 2D points in counter-clockwise order.
fn convex_polygon(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2
                && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
            {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

struct Frame {
    lo: [f64; 2],
    hi: [f64; 2],
    width: f64,
    height: f64,
    margin: f64,
}

impl Frame {
    fn map(&self, p: &[f64]) -> (f64, f64) {
        let sx = (p[0] - self.lo[0]) / (self.hi[0] - self.lo[0]);
        let sy = (p[1] - self.lo[1]) / (self.hi[1] - self.lo[1]);
        (
            self.margin + sx * (self.width - 2.0 * self.margin),
            self.height - self.margin - sy * (self.height - 2.0 * self.margin),
        )
    }
}

fn frame(diagram: &PhaseDiagram) -> Frame {
    let (w, h) = diagram.spec.resolution;
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    if let Some(b) = &diagram.spec.bounds {
        for k in 0..2 {
            lo[k] = b[k].0;
            hi[k] = b[k].1;
        }
    } else {
        let all = diagram
            .regions
            .iter()
            .flat_map(|r| r.cells.iter().flat_map(|c| c.points.iter()))
            .chain(
                diagram
                    .boundaries
                    .iter()
                    .flat_map(|b| b.polylines.iter().flatten()),
            );
        for p in all {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        for k in 0..2 {
            if !lo[k].is_finite() {
                lo[k] = 0.0;
                hi[k] = 1.0;
            }
            let pad = if hi[k] > lo[k] {
                0.05 * (hi[k] - lo[k])
            } else {
                0.5
            };
            lo[k] -= pad;
            hi[k] += pad;
        }
    }
    Frame {
        lo,
        hi,
        width: f64::from(w),
        height: f64::from(h),
        margin: 60.0,
    }
}

/// SVG 1.1 rendering of a two-axis diagram: filled cells grouped by region,
/// boundary polylines and a legend.
pub fn diagram_to_svg(diagram: &PhaseDiagram) -> Result<String> {
    if diagram.spec.axes.len() != 2 {
        return Err(Error::UnsupportedAxisCount(diagram.spec.axes.len()));
    }
    let f = frame(diagram);
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = f.width + 160.0,
        h = f.height
    );
    let _ = writeln!(
        s,
        r#"<rect x="0" y="0" width="{}" height="{}" fill="white"/>"#,
        f.width + 160.0,
        f.height
    );
    for r in &diagram.regions {
        let label = label_text(&r.label);
        let fill = color(&label);
        let _ = writeln!(
            s,
            r#"<g class="region" data-label="{}" fill="{fill}" stroke="{fill}">"#,
            escape(&label)
        );
        for c in &r.cells {
            let pts: Vec<[f64; 2]> = c.points.iter().map(|p| [p[0], p[1]]).collect();
            let poly = convex_polygon(&pts);
            match poly.len() {
                0 => {}
                1 => {
                    let (x, y) = f.map(&poly[0]);
                    let _ = writeln!(s, r#"<circle cx="{x:.3}" cy="{y:.3}" r="2"/>"#);
                }
                2 => {
                    let (x1, y1) = f.map(&poly[0]);
                    let (x2, y2) = f.map(&poly[1]);
                    let _ = writeln!(
                        s,
                        r#"<line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}" stroke-width="2"/>"#
                    );
                }
                _ => {
                    let coords: Vec<String> = poly
                        .iter()
                        .map(|p| {
                            let (x, y) = f.map(p);
                            format!("{x:.3},{y:.3}")
                        })
                        .collect();
                    let _ = writeln!(
                        s,
                        r#"<polygon points="{}" stroke-width="0.3"/>"#,
                        coords.join(" ")
                    );
                }
            }
        }
        let _ = writeln!(s, "</g>");
    }
    for b in &diagram.boundaries {
        let _ = writeln!(
            s,
            r#"<g class="boundary" data-between="{}" fill="none" stroke="black">"#,
            escape(&boundary_text(b))
        );
        for line in &b.polylines {
            let coords: Vec<String> = line
                .iter()
                .map(|p| {
                    let (x, y) = f.map(p);
                    format!("{x:.3},{y:.3}")
                })
                .collect();
            if coords.len() == 1 {
                let (x, y) = f.map(&line[0]);
                let _ = writeln!(s, r#"<circle cx="{x:.3}" cy="{y:.3}" r="3" fill="black"/>"#);
            } else {
                let _ = writeln!(
                    s,
                    r#"<polyline points="{}" stroke-width="1.5"/>"#,
                    coords.join(" ")
                );
            }
        }
        let _ = writeln!(s, "</g>");
    }
    // axes
    let (x0, y0) = (f.margin, f.height - f.margin);
    let (x1, y1) = (f.width - f.margin, f.margin);
    let _ = writeln!(
        s,
        r#"<rect class="axes" x="{x0:.3}" y="{y1:.3}" width="{:.3}" height="{:.3}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y0 - y1
    );
    let ax = &diagram.spec.axes;
    let _ = writeln!(
        s,
        r#"<text x="{:.3}" y="{:.3}" text-anchor="middle" font-size="14">{}</text>"#,
        (x0 + x1) / 2.0,
        f.height - 15.0,
        escape(&ax[0].name)
    );
    let _ = writeln!(
        s,
        r#"<text x="15" y="{:.3}" text-anchor="middle" font-size="14" transform="rotate(-90 15 {:.3})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(&ax[1].name)
    );
    let ticks = [
        (x0, y0 + 18.0, "middle", f.lo[0]),
        (x1, y0 + 18.0, "middle", f.hi[0]),
        (x0 - 6.0, y0, "end", f.lo[1]),
        (x0 - 6.0, y1 + 4.0, "end", f.hi[1]),
    ];
    for (x, y, anchor, v) in ticks {
        let _ = writeln!(
            s,
            r#"<text x="{x:.3}" y="{y:.3}" text-anchor="{anchor}" font-size="11">{v:.4}</text>"#
        );
    }
    let _ = writeln!(s, r#"<g class="legend" font-size="12">"#);
    for (i, r) in diagram.regions.iter().enumerate() {
        let label = label_text(&r.label);
        let y = 20.0 + 18.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<rect x="{:.3}" y="{:.3}" width="12" height="12" fill="{}"/><text x="{:.3}" y="{:.3}">{}</text>"#,
            f.width,
            y,
            color(&label),
            f.width + 18.0,
            y + 10.0,
            escape(&label)
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, "</svg>");
    Ok(s)
}

pub fn export_diagram(
    diagram: &PhaseDiagram,
    format: ExportFormat,
    path: impl AsRef<Path>,
) -> Result<()> {
    let text = match format {
        ExportFormat::Svg => diagram_to_svg(diagram)?,
        ExportFormat::Csv => diagram_to_csv(diagram),
        ExportFormat::Json => diagram_to_json(diagram)?,
    };
    crate::io::write_text(path, &text)
}
