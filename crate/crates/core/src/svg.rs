//! Deterministic SVG rendering of vertex layouts and cluster quotient
//! figures (pie charts, p-value grayscales, group coloring). Identical
//! inputs produce byte-identical documents; coordinates are rounded to
//! three decimals.

use crate::community::{ClusterGraph, ClusterGroup};
use crate::graph::ContactGraph;
use crate::io::Orientation;

const CANVAS: f64 = 840.0;
const MARGIN: f64 = 70.0;

/// Orientation palette: women red, heterosexual men blue, MSM green,
/// unknown gray.
fn orientation_color(o: Orientation) -> &'static str {
    match o {
        Orientation::Woman => "#d62728",
        Orientation::HeterosexualMan => "#1f77b4",
        Orientation::Msm => "#2ca02c",
        Orientation::Unknown => "#9e9e9e",
    }
}

fn group_color(g: ClusterGroup) -> &'static str {
    match g {
        ClusterGroup::Typical => "#ffffff",
        ClusterGroup::MsmGroup => "#2ca02c",
        ClusterGroup::MixedGroup => "#d62728",
    }
}

fn fmt(v: f64) -> String {
    format!("{v:.3}")
}

/// Affine map from layout coordinates into the canvas, preserving aspect.
struct Viewport {
    scale: f64,
    ox: f64,
    oy: f64,
}

impl Viewport {
    fn fit(points: &[(f64, f64)]) -> Viewport {
        let (mut x0, mut y0) = (f64::INFINITY, f64::INFINITY);
        let (mut x1, mut y1) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for &(x, y) in points {
            x0 = x0.min(x);
            y0 = y0.min(y);
            x1 = x1.max(x);
            y1 = y1.max(y);
        }
        let w = (x1 - x0).max(1e-9);
        let h = (y1 - y0).max(1e-9);
        let scale = ((CANVAS - 2.0 * MARGIN) / w).min((CANVAS - 2.0 * MARGIN) / h);
        Viewport {
            scale,
            ox: MARGIN - x0 * scale + (CANVAS - 2.0 * MARGIN - w * scale) / 2.0,
            oy: MARGIN - y0 * scale + (CANVAS - 2.0 * MARGIN - h * scale) / 2.0,
        }
    }

    fn map(&self, p: (f64, f64)) -> (f64, f64) {
        (p.0 * self.scale + self.ox, p.1 * self.scale + self.oy)
    }
}

fn header() -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{c}\" height=\"{c}\" viewBox=\"0 0 {c} {c}\">\n<rect x=\"0\" y=\"0\" width=\"{c}\" height=\"{c}\" fill=\"#ffffff\"/>\n",
        c = CANVAS
    )
}

/// One circle per vertex, one line per edge. When `by_orientation` is set,
/// circles take the orientation palette; otherwise a single default color.
pub fn render_vertex_svg(
    g: &ContactGraph,
    pos: &[(f64, f64)],
    by_orientation: bool,
) -> String {
    let vp = Viewport::fit(pos);
    let mut out = header();
    for &(s, d, _) in g.edges() {
        let a = vp.map(pos[s as usize]);
        let b = vp.map(pos[d as usize]);
        out.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#888888\" stroke-width=\"0.700\"/>\n",
            fmt(a.0),
            fmt(a.1),
            fmt(b.0),
            fmt(b.1)
        ));
    }
    for v in 0..g.n() {
        let (x, y) = vp.map(pos[v]);
        let color = if by_orientation {
            orientation_color(g.vertex(v as u32).orientation)
        } else {
            "#1f77b4"
        };
        out.push_str(&format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"3.500\" fill=\"{}\" stroke=\"#333333\" stroke-width=\"0.400\"/>\n",
            fmt(x),
            fmt(y),
            color
        ));
    }
    if by_orientation {
        out.push_str(&orientation_legend());
    }
    out.push_str("</svg>\n");
    out
}

fn orientation_legend() -> String {
    let mut out = String::new();
    let entries = [
        (Orientation::Woman, "women"),
        (Orientation::HeterosexualMan, "heterosexual men"),
        (Orientation::Msm, "MSM"),
        (Orientation::Unknown, "unknown"),
    ];
    for (i, (o, label)) in entries.iter().enumerate() {
        let y = 18.0 + 18.0 * i as f64;
        out.push_str(&format!(
            "<rect x=\"12.000\" y=\"{}\" width=\"12.000\" height=\"12.000\" fill=\"{}\"/>\n",
            fmt(y),
            orientation_color(*o)
        ));
        out.push_str(&format!(
            "<text x=\"30.000\" y=\"{}\" font-size=\"12\" font-family=\"sans-serif\">{}</text>\n",
            fmt(y + 10.0),
            label
        ));
    }
    out
}

/// Grayscale encoding of a p-value: white at p = 1, black at p ≤ 1e-4,
/// linear in −log10(p) between.
fn pvalue_gray(p: f64) -> String {
    let neg_log = if p <= 0.0 { 4.0 } else { (-p.log10()).clamp(0.0, 4.0) };
    let level = ((1.0 - neg_log / 4.0) * 255.0).round() as u8;
    format!("#{level:02x}{level:02x}{level:02x}")
}

fn link_paths(cg: &ClusterGraph, centers: &[(f64, f64)]) -> String {
    let max_mult = cg
        .links
        .iter()
        .map(|l| l.multiplicity)
        .max()
        .unwrap_or(1)
        .max(1);
    let mut out = String::new();
    for link in &cg.links {
        let a = centers[link.a];
        let b = centers[link.b];
        let width = (4.0 * link.multiplicity as f64 / max_mult as f64).max(0.600);
        let dash = if link.multiplicity == 1 {
            " stroke-dasharray=\"5,4\""
        } else {
            ""
        };
        out.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#555555\" stroke-width=\"{}\"{}/>\n",
            fmt(a.0),
            fmt(a.1),
            fmt(b.0),
            fmt(b.1),
            fmt(width),
            dash
        ));
    }
    out
}

/// Disk radii with area proportional to cluster size.
fn disk_radii(cg: &ClusterGraph) -> Vec<f64> {
    let max_size = cg.nodes.iter().map(|n| n.size).max().unwrap_or(1).max(1);
    let base = 44.0 / (max_size as f64).sqrt();
    cg.nodes.iter().map(|n| base * (n.size as f64).sqrt()).collect()
}

fn pie_sectors(cx: f64, cy: f64, r: f64, counts: &[(Orientation, u64)]) -> String {
    let total: u64 = counts.iter().map(|&(_, c)| c).sum();
    if total == 0 {
        return format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"#ffffff\" stroke=\"#222222\" stroke-width=\"1.000\"/>\n",
            fmt(cx),
            fmt(cy),
            fmt(r)
        );
    }
    let nonzero: Vec<&(Orientation, u64)> = counts.iter().filter(|&&(_, c)| c > 0).collect();
    if nonzero.len() == 1 {
        return format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{}\" stroke=\"#222222\" stroke-width=\"1.000\"/>\n",
            fmt(cx),
            fmt(cy),
            fmt(r),
            orientation_color(nonzero[0].0)
        );
    }
    let mut out = String::new();
    let mut angle = -std::f64::consts::FRAC_PI_2;
    for &&(o, c) in &nonzero {
        let sweep = 2.0 * std::f64::consts::PI * c as f64 / total as f64;
        let a0 = angle;
        let a1 = angle + sweep;
        angle = a1;
        let (x0, y0) = (cx + r * a0.cos(), cy + r * a0.sin());
        let (x1, y1) = (cx + r * a1.cos(), cy + r * a1.sin());
        let large = if sweep > std::f64::consts::PI { 1 } else { 0 };
        out.push_str(&format!(
            "<path d=\"M {} {} L {} {} A {} {} 0 {} 1 {} {} Z\" fill=\"{}\" stroke=\"#222222\" stroke-width=\"0.500\"/>\n",
            fmt(cx),
            fmt(cy),
            fmt(x0),
            fmt(y0),
            fmt(r),
            fmt(r),
            large,
            fmt(x1),
            fmt(y1),
            orientation_color(o)
        ));
    }
    out
}

fn orientation_counts(node: &crate::community::ClusterNode) -> Vec<(Orientation, u64)> {
    Orientation::ALL
        .iter()
        .map(|&o| {
            (
                o,
                node.orientation_counts.get(o.code()).copied().unwrap_or(0),
            )
        })
        .collect()
}

/// Cluster quotient figure. Disk area is proportional to cluster size;
/// multiplicity-1 links are dashed, heavier links get proportional stroke
/// width. Without p-values each disk is a pie of the orientation shares;
/// with p-values the disks take a white-to-black grayscale fill.
pub fn render_cluster_svg(
    cg: &ClusterGraph,
    pos: &[(f64, f64)],
    pvalues: Option<&[f64]>,
) -> String {
    let vp = Viewport::fit(pos);
    let centers: Vec<(f64, f64)> = pos.iter().map(|&p| vp.map(p)).collect();
    let radii = disk_radii(cg);
    let mut out = header();
    out.push_str(&link_paths(cg, &centers));
    for (i, node) in cg.nodes.iter().enumerate() {
        let (cx, cy) = centers[i];
        match pvalues {
            Some(ps) => {
                out.push_str(&format!(
                    "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{}\" stroke=\"#222222\" stroke-width=\"1.000\"/>\n",
                    fmt(cx),
                    fmt(cy),
                    fmt(radii[i]),
                    pvalue_gray(ps[i])
                ));
            }
            None => out.push_str(&pie_sectors(cx, cy, radii[i], &orientation_counts(node))),
        }
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" font-family=\"sans-serif\" text-anchor=\"middle\">{}</text>\n",
            fmt(cx),
            fmt(cy - radii[i] - 4.0),
            i
        ));
    }
    if pvalues.is_none() {
        out.push_str(&orientation_legend());
    }
    out.push_str("</svg>\n");
    out
}

/// Cluster quotient figure colored by atypicality group: typical clusters
/// white, MSM-dominated green, mixed red.
pub fn render_cluster_groups_svg(
    cg: &ClusterGraph,
    pos: &[(f64, f64)],
    groups: &[ClusterGroup],
) -> String {
    let vp = Viewport::fit(pos);
    let centers: Vec<(f64, f64)> = pos.iter().map(|&p| vp.map(p)).collect();
    let radii = disk_radii(cg);
    let mut out = header();
    out.push_str(&link_paths(cg, &centers));
    for i in 0..cg.nodes.len() {
        let (cx, cy) = centers[i];
        out.push_str(&format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{}\" stroke=\"#222222\" stroke-width=\"1.000\"/>\n",
            fmt(cx),
            fmt(cy),
            fmt(radii[i]),
            group_color(groups[i])
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" font-family=\"sans-serif\" text-anchor=\"middle\">{}</text>\n",
            fmt(cx),
            fmt(cy - radii[i] - 4.0),
            i
        ));
    }
    out.push_str("</svg>\n");
    out
}
