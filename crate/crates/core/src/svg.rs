//! Deterministic SVG renderings: dendrogram, NL2 scatter, radial profiles and
//! box plots. Numbers are written with two decimals so identical inputs give
//! identical bytes.

use std::fmt::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cluster::MergeTree;
use crate::report::{BoxplotSummary, RadialProfile, ReportError};

const PALETTE: [&str; 10] = [
    "#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666",
    "#1f78b4", "#b2df8a",
];
const MARGIN: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChartKind {
    Dendrogram,
    Nl2Scatter,
    Radial,
    Boxplot,
}

impl ChartKind {
    pub const ALL: [ChartKind; 4] = [
        ChartKind::Dendrogram,
        ChartKind::Nl2Scatter,
        ChartKind::Radial,
        ChartKind::Boxplot,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ChartKind::Dendrogram => "dendrogram",
            ChartKind::Nl2Scatter => "nl2-scatter",
            ChartKind::Radial => "radial",
            ChartKind::Boxplot => "boxplot",
        }
    }
}

impl FromStr for ChartKind {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ChartKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| ReportError::InconsistentInput(format!("unknown chart kind {s:?}")))
    }
}

pub fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Formats with two decimals and no negative zero.
fn f(x: f64) -> String {
    let s = format!("{x:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

struct Doc {
    body: String,
}

impl Doc {
    fn new(kind: ChartKind, width: f64, height: f64, title: &str, provenance: &str) -> Doc {
        let mut body = String::new();
        writeln!(body, r##"<?xml version="1.0" encoding="UTF-8"?>"##).unwrap();
        writeln!(
            body,
            r##"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}" data-kind="{k}">"##,
            w = f(width),
            h = f(height),
            k = kind.as_str()
        )
        .unwrap();
        writeln!(body, "<title>{}</title>", escape(title)).unwrap();
        if !provenance.is_empty() {
            writeln!(body, "<metadata>{}</metadata>", escape(provenance)).unwrap();
        }
        writeln!(
            body,
            r##"<rect x="0" y="0" width="{}" height="{}" fill="white"/>"##,
            f(width),
            f(height)
        )
        .unwrap();
        Doc { body }
    }

    fn line(&mut self, s: impl AsRef<str>) {
        self.body.push_str(s.as_ref());
        self.body.push('\n');
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

fn inconsistent(msg: impl Into<String>) -> ReportError {
    ReportError::InconsistentInput(msg.into())
}

/// Leaves left to right in traversal order, junctions as elbow paths, and an
/// optional horizontal cut line.
pub fn render_dendrogram(
    tree: &MergeTree,
    labels: &[String],
    cut_height: Option<f64>,
    provenance: &str,
) -> Result<String, ReportError> {
    tree.validate().map_err(|e| inconsistent(e.to_string()))?;
    if labels.len() != tree.n {
        return Err(inconsistent(format!(
            "{} labels for {} leaves",
            labels.len(),
            tree.n
        )));
    }
    let n = tree.n;
    let step = 14.0;
    let plot_h = 400.0;
    let label_h = 80.0;
    let width = 2.0 * MARGIN + step * n as f64;
    let height = 2.0 * MARGIN + plot_h + label_h;
    let top = tree
        .heights()
        .into_iter()
        .chain(cut_height)
        .fold(0.0f64, f64::max);
    let scale = if top > 0.0 { plot_h / top } else { 0.0 };
    let base = MARGIN + plot_h;
    let y = |h: f64| base - h * scale;

    let mut x = vec![0.0; 2 * n - 1];
    for (pos, leaf) in tree.leaf_order().into_iter().enumerate() {
        x[leaf] = MARGIN + step * (pos as f64 + 0.5);
    }
    let mut doc = Doc::new(
        ChartKind::Dendrogram,
        width,
        height,
        "Dendrogram",
        provenance,
    );
    doc.line(r##"<g fill="none" stroke="#333333" stroke-width="1">"##);
    for (k, m) in tree.merges.iter().enumerate() {
        let node = n + k;
        x[node] = (x[m.left] + x[m.right]) / 2.0;
        let (hl, hr) = (tree.height_of(m.left), tree.height_of(m.right));
        doc.line(format!(
            r##"<path class="junction" data-node="{node}" d="M{} {} V{} H{} V{}"/>"##,
            f(x[m.left]),
            f(y(hl)),
            f(y(m.height)),
            f(x[m.right]),
            f(y(hr))
        ));
    }
    doc.line("</g>");
    doc.line(r##"<g font-family="sans-serif" font-size="10" fill="#000000">"##);
    for (leaf, label) in labels.iter().enumerate() {
        let (lx, ly) = (f(x[leaf]), f(base + 6.0));
        doc.line(format!(
            r##"<text class="leaf" data-leaf="{leaf}" x="{lx}" y="{ly}" transform="rotate(90 {lx} {ly})">{}</text>"##,
            escape(label)
        ));
    }
    doc.line("</g>");
    if let Some(h) = cut_height {
        doc.line(format!(
            r##"<line class="cut" x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="#d62728" stroke-width="2"/>"##,
            f(MARGIN),
            f(width - MARGIN),
            y = f(y(h))
        ));
    }
    Ok(doc.finish())
}

/// NL2 against entity id, coloured by label. `legend` fixes the colour order
/// and must contain every point label.
pub fn render_nl2_scatter(
    ids: &[u64],
    values: &[f64],
    labels: &[String],
    legend: &[String],
    highlight: &[u64],
    provenance: &str,
) -> Result<String, ReportError> {
    if ids.len() != values.len() || ids.len() != labels.len() {
        return Err(inconsistent("ids, values and labels differ in length"));
    }
    let colour_of = |l: &str| legend.iter().position(|x| x == l);
    if let Some(l) = labels.iter().find(|l| colour_of(l).is_none()) {
        return Err(inconsistent(format!("label {l:?} missing from legend")));
    }
    let (plot_w, plot_h, legend_w) = (720.0, 360.0, 120.0);
    let width = 2.0 * MARGIN + plot_w + legend_w;
    let height = 2.0 * MARGIN + plot_h;
    let lo_id = ids.iter().copied().min().unwrap_or(0) as f64;
    let hi_id = ids.iter().copied().max().unwrap_or(1) as f64;
    let span = if hi_id > lo_id { hi_id - lo_id } else { 1.0 };
    let px = |id: u64| MARGIN + (id as f64 - lo_id) / span * plot_w;
    let py = |v: f64| MARGIN + plot_h - v.clamp(0.0, 100.0) / 100.0 * plot_h;

    let mut doc = Doc::new(
        ChartKind::Nl2Scatter,
        width,
        height,
        "NL2 by entity",
        provenance,
    );
    doc.line(format!(
        r##"<g stroke="#999999"><line x1="{m}" y1="{b}" x2="{r}" y2="{b}"/><line x1="{m}" y1="{t}" x2="{m}" y2="{b}"/></g>"##,
        m = f(MARGIN),
        b = f(MARGIN + plot_h),
        r = f(MARGIN + plot_w),
        t = f(MARGIN)
    ));
    for tick in [0.0, 25.0, 50.0, 75.0, 100.0] {
        doc.line(format!(
            r##"<text class="tick" x="{}" y="{}" font-size="10" text-anchor="end">{}</text>"##,
            f(MARGIN - 4.0),
            f(py(tick) + 3.0),
            tick
        ));
    }
    for ((&id, &v), l) in ids.iter().zip(values).zip(labels) {
        let c = color(colour_of(l).unwrap());
        doc.line(format!(
            r##"<circle class="point" data-id="{id}" data-label="{}" cx="{}" cy="{}" r="2.5" fill="{c}"/>"##,
            escape(l),
            f(px(id)),
            f(py(v))
        ));
        if highlight.contains(&id) {
            doc.line(format!(
                r##"<rect class="highlight" data-id="{id}" x="{}" y="{}" width="8" height="8" fill="none" stroke="#000000"/>"##,
                f(px(id) - 4.0),
                f(py(v) - 4.0)
            ));
        }
    }
    let used: Vec<&String> = legend.iter().filter(|l| labels.contains(l)).collect();
    for (i, l) in used.iter().enumerate() {
        let lx = MARGIN + plot_w + 20.0;
        let ly = MARGIN + 16.0 * i as f64;
        let c = color(colour_of(l).unwrap());
        doc.line(format!(
            r##"<g class="legend-entry"><circle cx="{}" cy="{}" r="4" fill="{c}"/><text x="{}" y="{}" font-size="11">{}</text></g>"##,
            f(lx),
            f(ly),
            f(lx + 8.0),
            f(ly + 4.0),
            escape(l)
        ));
    }
    Ok(doc.finish())
}

/// One polygon per label over the attribute axes.
pub fn render_radial(profile: &RadialProfile, provenance: &str) -> Result<String, ReportError> {
    let a = profile.codes.len();
    if a < 3 {
        return Err(inconsistent("radial charts need at least three attributes"));
    }
    if profile.values.len() != profile.labels.len() || profile.values.iter().any(|v| v.len() != a) {
        return Err(inconsistent(
            "profile shape does not match its labels and codes",
        ));
    }
    let cols = profile.labels.len().clamp(1, 4);
    let rows = profile.labels.len().div_ceil(cols).max(1);
    let cell = 240.0;
    let r = 80.0;
    let mut doc = Doc::new(
        ChartKind::Radial,
        cols as f64 * cell,
        rows as f64 * cell,
        "Label profiles",
        provenance,
    );
    let angle =
        |i: usize| std::f64::consts::TAU * i as f64 / a as f64 - std::f64::consts::FRAC_PI_2;
    for (li, (label, vals)) in profile.labels.iter().zip(&profile.values).enumerate() {
        let cx = cell * (li % cols) as f64 + cell / 2.0;
        let cy = cell * (li / cols) as f64 + cell / 2.0 + 8.0;
        doc.line(format!(
            r##"<g class="radial" data-label="{}">"##,
            escape(label)
        ));
        doc.line(format!(
            r##"<text x="{}" y="{}" font-size="12" text-anchor="middle">{}</text>"##,
            f(cx),
            f(cy - r - 20.0),
            escape(label)
        ));
        for (i, code) in profile.codes.iter().enumerate() {
            let (ex, ey) = (cx + r * angle(i).cos(), cy + r * angle(i).sin());
            doc.line(format!(
                r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#cccccc"/><text x="{}" y="{}" font-size="8" text-anchor="middle">{}</text>"##,
                f(cx),
                f(cy),
                f(ex),
                f(ey),
                f(cx + (r + 10.0) * angle(i).cos()),
                f(cy + (r + 10.0) * angle(i).sin() + 3.0),
                escape(code)
            ));
        }
        let points: Vec<String> = vals
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let rr = r * v.clamp(0.0, 100.0) / 100.0;
                format!(
                    "{},{}",
                    f(cx + rr * angle(i).cos()),
                    f(cy + rr * angle(i).sin())
                )
            })
            .collect();
        doc.line(format!(
            r##"<polygon class="profile" points="{}" fill="{c}" fill-opacity="0.35" stroke="{c}"/>"##,
            points.join(" "),
            c = color(li)
        ));
        doc.line("</g>");
    }
    Ok(doc.finish())
}

/// Tukey box plots side by side, one per series.
pub fn render_boxplot(
    title: &str,
    series: &[(String, BoxplotSummary)],
    provenance: &str,
) -> Result<String, ReportError> {
    if series.is_empty() {
        return Err(inconsistent("no series to plot"));
    }
    let lo = series
        .iter()
        .map(|(_, b)| b.min)
        .fold(f64::INFINITY, f64::min);
    let hi = series
        .iter()
        .map(|(_, b)| b.max)
        .fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() || !hi.is_finite() {
        return Err(inconsistent("non-finite box plot bounds"));
    }
    let span = if hi > lo { hi - lo } else { 1.0 };
    let (slot, plot_h) = (60.0, 300.0);
    let width = 2.0 * MARGIN + slot * series.len() as f64;
    let height = 2.0 * MARGIN + plot_h + 20.0;
    let py = |v: f64| MARGIN + plot_h - (v - lo) / span * plot_h;
    let mut doc = Doc::new(ChartKind::Boxplot, width, height, title, provenance);
    doc.line("<desc>Boxes span the first to third quartile (medians of the lower and upper halves). Whiskers reach the most extreme values within 1.5 IQR of the box; points beyond are drawn as outliers.</desc>");
    for (i, (label, b)) in series.iter().enumerate() {
        let cx = MARGIN + slot * (i as f64 + 0.5);
        let c = color(i);
        doc.line(format!(
            r##"<g class="box" data-label="{}">"##,
            escape(label)
        ));
        doc.line(format!(
            r##"<line class="whisker" x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="#333333"/>"##,
            f(py(b.whisker_low)),
            f(py(b.whisker_high)),
            x = f(cx)
        ));
        doc.line(format!(
            r##"<rect x="{}" y="{}" width="30.00" height="{}" fill="{c}" fill-opacity="0.5" stroke="#333333"/>"##,
            f(cx - 15.0),
            f(py(b.q3)),
            f(py(b.q1) - py(b.q3))
        ));
        doc.line(format!(
            r##"<line class="median" x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="#000000" stroke-width="2"/>"##,
            f(cx - 15.0),
            f(cx + 15.0),
            y = f(py(b.median))
        ));
        for o in &b.outliers {
            doc.line(format!(
                r##"<circle class="outlier" data-id="{}" cx="{}" cy="{}" r="2.5" fill="{c}"/>"##,
                o.entity_id,
                f(cx),
                f(py(o.value))
            ));
        }
        doc.line(format!(
            r##"<text x="{}" y="{}" font-size="11" text-anchor="middle">{}</text>"##,
            f(cx),
            f(MARGIN + plot_h + 16.0),
            escape(label)
        ));
        doc.line("</g>");
    }
    Ok(doc.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::{LinkageKind, Merge};
    use crate::report::boxplot_stats;

    fn chain3() -> MergeTree {
        MergeTree {
            n: 3,
            linkage: LinkageKind::Single,
            merges: vec![
                Merge {
                    left: 0,
                    right: 1,
                    height: 1.0,
                    size: 2,
                },
                Merge {
                    left: 2,
                    right: 3,
                    height: 81.0,
                    size: 3,
                },
            ],
        }
    }

    #[test]
    fn dendrogram_structure() {
        let labels: Vec<String> = ["a", "b", "c<d"].iter().map(|s| s.to_string()).collect();
        let s = render_dendrogram(&chain3(), &labels, Some(10.0), "cut k=2").unwrap();
        assert_eq!(s.matches(r##"class="leaf""##).count(), 3);
        assert_eq!(s.matches(r##"class="junction""##).count(), 2);
        assert!(s.contains("c&lt;d"));
        assert_eq!(
            s,
            render_dendrogram(&chain3(), &labels, Some(10.0), "cut k=2").unwrap()
        );
        assert!(render_dendrogram(&chain3(), &labels[..2], None, "").is_err());
    }

    #[test]
    fn scatter_counts() {
        let legend: Vec<String> = ["Ia", "IIb"].iter().map(|s| s.to_string()).collect();
        let labels = vec![legend[0].clone(), legend[1].clone(), legend[1].clone()];
        let s = render_nl2_scatter(&[1, 2, 3], &[70.0, 60.0, 65.0], &labels, &legend, &[2], "")
            .unwrap();
        assert_eq!(s.matches(r##"class="point""##).count(), 3);
        assert_eq!(s.matches(r##"class="legend-entry""##).count(), 2);
        assert_eq!(s.matches(r##"class="highlight""##).count(), 1);
        assert!(render_nl2_scatter(&[1], &[1.0], &["X".into()], &legend, &[], "").is_err());
    }

    #[test]
    fn boxplot_mentions_rule() {
        let b = boxplot_stats(&[1.0, 2.0, 3.0, 4.0, 100.0]).unwrap();
        let s = render_boxplot("x1", &[("Ia".into(), b)], "").unwrap();
        assert!(s.contains("<desc>") && s.contains("1.5 IQR"));
        assert_eq!(s.matches(r##"class="outlier""##).count(), 1);
    }

    #[test]
    fn kinds_parse() {
        for k in ChartKind::ALL {
            assert_eq!(k.as_str().parse::<ChartKind>().unwrap(), k);
        }
        assert!("pie".parse::<ChartKind>().is_err());
    }
}
