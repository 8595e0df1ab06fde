//! Deterministic SVG scatter plots of an experiment.
//!
//! Points are colored by cluster, the query is a red star and cluster heads
//! are black stars. kNN edges are gray lines, symbolic edges red dashed lines,
//! each stored edge drawn once. Every retrieved item gets one marker per
//! method. Coordinates are printed with two decimals and nothing time- or
//! environment-dependent is emitted, so equal inputs give equal bytes.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::experiment::ExperimentReport;
use crate::geometry::{EmbeddingVector, ItemId};
use crate::graph::{EdgeKind, LabeledVector, SemanticGraph};
use crate::hybrid::Method;
use crate::io::write_text;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const MARGIN: f64 = 40.0;
const LEGEND_WIDTH: f64 = 180.0;

enum Legend {
    Star(&'static str),
    Line(&'static str),
    Marker(Method),
}

const PALETTE: [&str; 10] = [
    "#1f77b4", "#2ca02c", "#9467bd", "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f", "#aec7e8", "#98df8a",
];

struct Frame {
    min: (f64, f64),
    scale: f64,
}

impl Frame {
    fn fit<'a>(points: impl Iterator<Item = &'a EmbeddingVector>) -> Frame {
        let (mut lo, mut hi) = ((f64::INFINITY, f64::INFINITY), (f64::NEG_INFINITY, f64::NEG_INFINITY));
        for p in points {
            lo = (lo.0.min(p.values[0]), lo.1.min(p.values[1]));
            hi = (hi.0.max(p.values[0]), hi.1.max(p.values[1]));
        }
        let span_x = (hi.0 - lo.0).max(1e-9);
        let span_y = (hi.1 - lo.1).max(1e-9);
        let scale = ((WIDTH - LEGEND_WIDTH - 2.0 * MARGIN) / span_x).min((HEIGHT - 2.0 * MARGIN) / span_y);
        Frame { min: lo, scale }
    }

    /// SVG y grows downward.
    fn map(&self, v: &EmbeddingVector) -> (f64, f64) {
        (
            MARGIN + (v.values[0] - self.min.0) * self.scale,
            HEIGHT - MARGIN - (v.values[1] - self.min.1) * self.scale,
        )
    }
}

fn star_points(cx: f64, cy: f64, r: f64) -> String {
    let mut pts = Vec::with_capacity(10);
    for i in 0..10 {
        let radius = if i % 2 == 0 { r } else { r * 0.45 };
        let angle = -std::f64::consts::FRAC_PI_2 + i as f64 * std::f64::consts::PI / 5.0;
        pts.push(format!("{:.2},{:.2}", cx + radius * angle.cos(), cy + radius * angle.sin()));
    }
    pts.join(" ")
}

fn method_style(m: Method) -> (&'static str, &'static str) {
    match m {
        Method::TopkAnn => ("ring", "#1f77b4"),
        Method::SemanticCompression => ("square", "#2ca02c"),
        Method::GraphPpr => ("triangle", "#ff7f0e"),
        Method::Hybrid => ("diamond", "#9467bd"),
    }
}

fn method_marker(out: &mut String, m: Method, x: f64, y: f64) {
    let (shape, color) = method_style(m);
    let class = format!("marker method-{}", m.as_str());
    let w = |out: &mut String, body: String| writeln!(out, "{body}").expect("write to string");
    match shape {
        "ring" => w(out, format!(
            r#"<circle class="{class}" cx="{x:.2}" cy="{y:.2}" r="9.00" fill="none" stroke="{color}" stroke-width="2"/>"#
        )),
        "square" => w(out, format!(
            r#"<rect class="{class}" x="{:.2}" y="{:.2}" width="12.00" height="12.00" fill="none" stroke="{color}" stroke-width="2"/>"#,
            x - 6.0,
            y - 6.0
        )),
        "triangle" => w(out, format!(
            r#"<polygon class="{class}" points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            x, y - 8.0, x - 7.0, y + 5.0, x + 7.0, y + 5.0
        )),
        _ => w(out, format!(
            r#"<polygon class="{class}" points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            x, y - 11.0, x + 11.0, y, x, y + 11.0, x - 11.0, y
        )),
    }
}

/// Renders the plot; `graph` may be omitted for a scatter-only figure.
pub fn render_plot(report: &ExperimentReport, dataset: &[LabeledVector], graph: Option<&SemanticGraph>) -> Result<String> {
    let dim = dataset.first().map_or(report.query.dim(), |d| d.vector.dim());
    if dim != 2 || report.query.dim() != 2 {
        return Err(Error::PlotDimension(if dim != 2 { dim } else { report.query.dim() }));
    }
    if let Some(g) = graph {
        if let Some(v) = g.nodes().iter().find(|v| v.dim() != 2) {
            return Err(Error::PlotDimension(v.dim()));
        }
    }

    let locate = |id: ItemId| -> Result<&EmbeddingVector> {
        dataset
            .iter()
            .map(|d| &d.vector)
            .find(|v| v.id == id)
            .or_else(|| graph.and_then(|g| g.node(id)))
            .ok_or(Error::UnknownId(id))
    };

    let frame = Frame::fit(
        dataset
            .iter()
            .map(|d| &d.vector)
            .chain(graph.into_iter().flat_map(|g| g.nodes()))
            .chain(std::iter::once(&report.query)),
    );

    let mut out = String::new();
    let w = |out: &mut String, line: String| writeln!(out, "{line}").expect("write to string");
    w(&mut out, r#"<?xml version="1.0" encoding="UTF-8"?>"#.into());
    w(&mut out, format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    ));
    w(&mut out, format!(r##"<rect width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>"##));

    if let Some(g) = graph {
        w(&mut out, r#"<g id="edges">"#.into());
        for e in g.edges() {
            let (x1, y1) = frame.map(g.node(e.source).expect("edge endpoint"));
            let (x2, y2) = frame.map(g.node(e.target).expect("edge endpoint"));
            let style = match e.kind {
                EdgeKind::Knn => r##"stroke="#b0b0b0" stroke-width="0.6""##,
                EdgeKind::Symbolic => r##"stroke="#d62728" stroke-width="1.2" stroke-dasharray="5,3""##,
            };
            w(&mut out, format!(
                r#"<line class="edge edge-{}" x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" {style}/>"#,
                e.kind
            ));
        }
        w(&mut out, "</g>".into());
    }

    w(&mut out, r#"<g id="points">"#.into());
    for d in dataset {
        let (x, y) = frame.map(&d.vector);
        let color = PALETTE[d.label as usize % PALETTE.len()];
        w(&mut out, format!(
            r#"<circle class="point cluster-{}" cx="{x:.2}" cy="{y:.2}" r="3.00" fill="{color}"/>"#,
            d.label
        ));
    }
    w(&mut out, "</g>".into());

    if let Some(heads) = graph.and_then(|g| g.cluster_heads()) {
        w(&mut out, r#"<g id="heads">"#.into());
        for &h in heads {
            let (x, y) = frame.map(locate(h)?);
            w(&mut out, format!(r##"<polygon class="head" points="{}" fill="#000000"/>"##, star_points(x, y, 8.0)));
        }
        w(&mut out, "</g>".into());
    }

    w(&mut out, r#"<g id="retrieved">"#.into());
    for r in &report.results {
        for item in &r.items {
            let (x, y) = frame.map(locate(item.id)?);
            method_marker(&mut out, r.method, x, y);
        }
    }
    w(&mut out, "</g>".into());

    let (qx, qy) = frame.map(&report.query);
    w(&mut out, format!(
        r##"<polygon class="query" points="{}" fill="#d62728" stroke="#000000" stroke-width="0.8"/>"##,
        star_points(qx, qy, 12.0)
    ));

    let lx = WIDTH - LEGEND_WIDTH + 10.0;
    let mut entries: Vec<(Legend, &str)> = vec![(Legend::Star("#d62728"), "query")];
    if graph.and_then(|g| g.cluster_heads()).is_some() {
        entries.push((Legend::Star("#000000"), "cluster head"));
    }
    if graph.is_some() {
        entries.push((Legend::Line(r##"stroke="#b0b0b0" stroke-width="1.5""##), "knn edge"));
        entries.push((
            Legend::Line(r##"stroke="#d62728" stroke-width="1.5" stroke-dasharray="5,3""##),
            "symbolic edge",
        ));
    }
    entries.extend(report.results.iter().map(|r| (Legend::Marker(r.method), r.method.as_str())));

    w(&mut out, r#"<g id="legend" font-family="sans-serif" font-size="12">"#.into());
    for (i, (glyph, label)) in entries.into_iter().enumerate() {
        let ly = MARGIN + 20.0 * i as f64;
        match glyph {
            Legend::Star(fill) => w(&mut out, format!(
                r#"<polygon points="{}" fill="{fill}"/>"#,
                star_points(lx + 6.0, ly, 7.0)
            )),
            Legend::Line(style) => w(&mut out, format!(
                r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" {style}/>"#,
                lx + 14.0
            )),
            Legend::Marker(m) => {
                let mut g = String::new();
                method_marker(&mut g, m, lx + 6.0, ly);
                out.push_str(&g.replace("class=\"marker ", "class=\"legend-marker "));
            }
        }
        w(&mut out, format!(r#"<text x="{:.2}" y="{:.2}">{label}</text>"#, lx + 20.0, ly + 4.0));
    }
    w(&mut out, "</g>".into());
    w(&mut out, "</svg>".into());
    Ok(out)
}

pub fn emit_plot(
    report: &ExperimentReport,
    dataset: &[LabeledVector],
    graph: Option<&SemanticGraph>,
    path: &Path,
) -> Result<()> {
    write_text(path, &render_plot(report, dataset, graph)?)
}
