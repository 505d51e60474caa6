//! Segment exporters. All outputs follow the graph's canonical segment order,
//! so identical graphs produce identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use jacobi_sets::connectivity::{JacobiGraph, NodeKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExportFormat {
    Csv,
    Json,
    Svg,
}

impl ExportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ExportFormat::Csv => "csv",
            ExportFormat::Json => "json",
            ExportFormat::Svg => "svg",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Some(ExportFormat::Csv),
            "json" => Some(ExportFormat::Json),
            "svg" => Some(ExportFormat::Svg),
            _ => None,
        }
    }
}

pub const CSV_HEADER: &str = "x1,y1,x2,y2,node_kind1,node_kind2,source_vertex";

pub fn segments_csv(graph: &JacobiGraph) -> String {
    let mut out = String::with_capacity(64 * (graph.segments.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for s in &graph.segments {
        let p = &graph.nodes[s.nodes[0] as usize];
        let q = &graph.nodes[s.nodes[1] as usize];
        let source = s.source_vertex.map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            p.pos.x,
            p.pos.y,
            q.pos.x,
            q.pos.y,
            p.kind.label(),
            q.kind.label(),
            source
        );
    }
    out
}

pub fn segments_json(graph: &JacobiGraph) -> String {
    let mut s = serde_json::to_string_pretty(graph).expect("graph serializes");
    s.push('\n');
    s
}

/// World-coordinate SVG with y pointing up. Segments are black lines,
/// barycenter nodes red dots.
pub fn segments_svg(graph: &JacobiGraph) -> String {
    let (mut min_x, mut min_y, mut max_x, mut max_y) = (
        f64::INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::NEG_INFINITY,
    );
    for n in &graph.nodes {
        min_x = min_x.min(n.pos.x);
        max_x = max_x.max(n.pos.x);
        min_y = min_y.min(n.pos.y);
        max_y = max_y.max(n.pos.y);
    }
    if !min_x.is_finite() {
        (min_x, min_y, max_x, max_y) = (0.0, 0.0, 1.0, 1.0);
    }
    let w = (max_x - min_x).max(1e-12);
    let h = (max_y - min_y).max(1e-12);
    let pad = 0.02 * w.max(h);
    let radius = 0.004 * w.max(h);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}" width="800" height="{}">"#,
        min_x - pad,
        -max_y - pad,
        w + 2.0 * pad,
        h + 2.0 * pad,
        (800.0 * (h + 2.0 * pad) / (w + 2.0 * pad)).round()
    );
    let _ = writeln!(
        out,
        r#"<g id="segments" fill="none" stroke="black" stroke-width="1" vector-effect="non-scaling-stroke">"#
    );
    for s in &graph.segments {
        let p = graph.nodes[s.nodes[0] as usize].pos;
        let q = graph.nodes[s.nodes[1] as usize].pos;
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" vector-effect="non-scaling-stroke"/>"#,
            p.x, -p.y, q.x, -q.y
        );
    }
    out.push_str("</g>\n");
    out.push_str("<g id=\"barycenters\" fill=\"red\">\n");
    for n in &graph.nodes {
        if let NodeKind::Barycenter { vertex, degree } = n.kind {
            let _ = writeln!(
                out,
                r#"<circle cx="{}" cy="{}" r="{radius}" data-vertex="{vertex}" data-degree="{degree}"/>"#,
                n.pos.x, -n.pos.y
            );
        }
    }
    out.push_str("</g>\n</svg>\n");
    out
}

pub fn export_segments(
    graph: &JacobiGraph,
    format: ExportFormat,
    path: &Path,
) -> std::io::Result<()> {
    let text = match format {
        ExportFormat::Csv => segments_csv(graph),
        ExportFormat::Json => segments_json(graph),
        ExportFormat::Svg => segments_svg(graph),
    };
    fs::write(path, text)
}
