//! Minimal standalone SVG charts.

use crate::error::{CliError, Result};
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SvgKind {
    /// Empirical step CDFs against theoretical curves.
    CdfCompare,
    /// Colored `(β, γ)` cells with the phase boundaries `β+γ=2`, `γ=1`, `β+γ=3`.
    Heatmap,
    /// Log-log scatter with an optional reference line.
    Scaling,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesStyle {
    Empirical,
    Theory,
    /// Heat map cells; `values` holds the color scale input.
    Cells,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub style: SeriesStyle,
    pub points: Vec<(f64, f64)>,
    pub values: Vec<f64>,
}

impl Series {
    #[must_use]
    pub fn empirical(label: &str, points: Vec<(f64, f64)>) -> Self {
        Self { label: label.into(), style: SeriesStyle::Empirical, points, values: Vec::new() }
    }

    #[must_use]
    pub fn theory(label: &str, points: Vec<(f64, f64)>) -> Self {
        Self { label: label.into(), style: SeriesStyle::Theory, points, values: Vec::new() }
    }

    #[must_use]
    pub fn cells(label: &str, points: Vec<(f64, f64)>, values: Vec<f64>) -> Self {
        Self { label: label.into(), style: SeriesStyle::Cells, points, values }
    }

    /// Empirical CDF points of sorted data.
    #[must_use]
    pub fn ecdf(label: &str, sorted: &[f64]) -> Self {
        let r = sorted.len() as f64;
        Self::empirical(label, sorted.iter().enumerate().map(|(i, &x)| (x, (i as f64 + 1.0) / r)).collect())
    }

    /// Samples `f` at `count` points on `[a, b]`.
    #[must_use]
    pub fn curve(label: &str, a: f64, b: f64, count: usize, f: impl Fn(f64) -> f64) -> Self {
        let k = count.max(2);
        Self::theory(
            label,
            (0..k).map(|i| a + (b - a) * i as f64 / (k - 1) as f64).map(|x| (x, f(x))).collect(),
        )
    }
}

const W: f64 = 640.0;
const H: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (H - TOP - BOTTOM)
    }
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn header(out: &mut String, title: &str, frame: &Frame, xlabel: &str, ylabel: &str) {
    let _ = write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">
<title>{title}</title>
<rect width="{W}" height="{H}" fill="white"/>
<g class="axes" stroke="black" fill="none">
<line x1="{LEFT}" y1="{yb}" x2="{xr}" y2="{yb}"/>
<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{yb}"/>
</g>
"#,
        yb = H - BOTTOM,
        xr = W - RIGHT,
    );
    for i in 0..=4 {
        let t = f64::from(i) / 4.0;
        let (x, y) = (frame.x0 + t * (frame.x1 - frame.x0), frame.y0 + t * (frame.y1 - frame.y0));
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            frame.px(x),
            H - BOTTOM + 16.0,
            tick(x),
            LEFT - 6.0,
            frame.py(y) + 4.0,
            tick(y)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{xlabel}</text><text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{ylabel}</text><text x="{:.1}" y="18" text-anchor="middle">{title}</text>"#,
        (LEFT + W - RIGHT) / 2.0,
        H - 12.0,
        (TOP + H - BOTTOM) / 2.0,
        (TOP + H - BOTTOM) / 2.0,
        (LEFT + W - RIGHT) / 2.0
    );
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn legend(out: &mut String, entries: &[(String, &str, bool)]) {
    let _ = writeln!(out, r#"<g class="legend">"#);
    for (i, (label, color, dashed)) in entries.iter().enumerate() {
        let y = TOP + 10.0 + 18.0 * i as f64;
        let x = W - RIGHT + 12.0;
        let dash = if *dashed { r#" stroke-dasharray="6 3""# } else { "" };
        let _ = writeln!(
            out,
            r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{color}" stroke-width="2"{dash}/><text x="{}" y="{}">{}</text>"#,
            x + 22.0,
            x + 28.0,
            y + 4.0,
            escape(label)
        );
    }
    let _ = writeln!(out, "</g>");
}

fn polyline(out: &mut String, frame: &Frame, pts: &[(f64, f64)], color: &str, dashed: bool, class: &str) {
    let mut d = String::new();
    for &(x, y) in pts.iter().filter(|(x, y)| x.is_finite() && y.is_finite()) {
        let _ = write!(d, "{:.2},{:.2} ", frame.px(x), frame.py(y));
    }
    let dash = if dashed { r#" stroke-dasharray="6 3""# } else { "" };
    let _ = writeln!(
        out,
        r#"<polyline class="{class}" fill="none" stroke="{color}" stroke-width="1.5"{dash} points="{}"/>"#,
        d.trim_end()
    );
}

fn step_points(pts: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(2 * pts.len() + 1);
    let mut prev = 0.0;
    for &(x, y) in pts {
        out.push((x, prev));
        out.push((x, y));
        prev = y;
    }
    out
}

fn cdf_compare(series: &[Series], title: &str) -> String {
    let (x0, x1) = bounds(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let frame = Frame { x0, x1, y0: 0.0, y1: 1.0 };
    let mut out = String::new();
    header(&mut out, title, &frame, "x", "CDF");
    let mut entries = Vec::new();
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let dashed = s.style == SeriesStyle::Theory;
        let pts = if dashed { s.points.clone() } else { step_points(&s.points) };
        polyline(&mut out, &frame, &pts, color, dashed, if dashed { "theory" } else { "empirical" });
        entries.push((s.label.clone(), color, dashed));
    }
    legend(&mut out, &entries);
    out.push_str("</svg>\n");
    out
}

fn scaling(series: &[Series], title: &str) -> String {
    let lg = |v: f64| v.log10();
    let (x0, x1) = bounds(series.iter().flat_map(|s| s.points.iter().map(|p| lg(p.0))));
    let (y0, y1) = bounds(series.iter().flat_map(|s| s.points.iter().map(|p| lg(p.1))));
    let frame = Frame { x0, x1, y0, y1 };
    let mut out = String::new();
    header(&mut out, title, &frame, "log10 x", "log10 y");
    let mut entries = Vec::new();
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<(f64, f64)> = s.points.iter().map(|&(x, y)| (lg(x), lg(y))).collect();
        if s.style == SeriesStyle::Theory {
            polyline(&mut out, &frame, &pts, color, true, "theory");
        } else {
            let _ = writeln!(out, r#"<g class="points" fill="{color}">"#);
            for (x, y) in pts.into_iter().filter(|(x, y)| x.is_finite() && y.is_finite()) {
                let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="3.5"/>"#, frame.px(x), frame.py(y));
            }
            out.push_str("</g>\n");
        }
        entries.push((s.label.clone(), color, s.style == SeriesStyle::Theory));
    }
    legend(&mut out, &entries);
    out.push_str("</svg>\n");
    out
}

fn grid_edges(mut v: Vec<f64>) -> Vec<(f64, f64, f64)> {
    v.sort_by(f64::total_cmp);
    v.dedup();
    let half = |i: usize| -> f64 {
        if v.len() == 1 {
            0.25
        } else if i + 1 < v.len() {
            (v[i + 1] - v[i]) / 2.0
        } else {
            (v[i] - v[i - 1]) / 2.0
        }
    };
    (0..v.len())
        .map(|i| {
            let right = half(i);
            let left = if i == 0 { right } else { (v[i] - v[i - 1]) / 2.0 };
            (v[i], v[i] - left, v[i] + right)
        })
        .collect()
}

fn color_scale(t: f64) -> String {
    if !t.is_finite() {
        return "#bbbbbb".into();
    }
    let t = t.clamp(0.0, 1.0);
    let r = (255.0 * t) as u8;
    let b = (255.0 * (1.0 - t)) as u8;
    format!("#{r:02x}40{b:02x}")
}

fn heatmap(series: &[Series], title: &str) -> String {
    let cells: Vec<(f64, f64, f64)> = series
        .iter()
        .filter(|s| s.style == SeriesStyle::Cells)
        .flat_map(|s| s.points.iter().zip(s.values.iter().chain(std::iter::repeat(&f64::NAN))).map(|(p, v)| (p.0, p.1, *v)))
        .collect();
    let xs = grid_edges(cells.iter().map(|c| c.0).collect());
    let ys = grid_edges(cells.iter().map(|c| c.1).collect());
    let frame = Frame {
        x0: xs.first().map_or(0.0, |e| e.1),
        x1: xs.last().map_or(1.0, |e| e.2),
        y0: ys.first().map_or(0.0, |e| e.1),
        y1: ys.last().map_or(1.0, |e| e.2),
    };
    let (v0, v1) = bounds(cells.iter().map(|c| c.2));
    let mut out = String::new();
    header(&mut out, title, &frame, "β", "γ");
    out.push_str("<g class=\"cells\">\n");
    for &(x, y, v) in &cells {
        let ex = xs.iter().find(|e| e.0 == x).expect("cell x on grid");
        let ey = ys.iter().find(|e| e.0 == y).expect("cell y on grid");
        let (px0, px1) = (frame.px(ex.1), frame.px(ex.2));
        let (py0, py1) = (frame.py(ey.2), frame.py(ey.1));
        let _ = writeln!(
            out,
            r#"<rect class="cell" x="{px0:.2}" y="{py0:.2}" width="{:.2}" height="{:.2}" fill="{}"><title>β={x} γ={y}: {v}</title></rect>"#,
            px1 - px0,
            py1 - py0,
            color_scale((v - v0) / (v1 - v0))
        );
    }
    out.push_str("</g>\n");
    // Clip each boundary to the frame by sampling it densely.
    let mut d = String::new();
    let lines: [(&str, Box<dyn Fn(f64) -> f64>); 3] =
        [("β+γ=2", Box::new(|b| 2.0 - b)), ("γ=1", Box::new(|_| 1.0)), ("β+γ=3", Box::new(|b| 3.0 - b))];
    for (_, f) in &lines {
        let mut pen = false;
        for i in 0..=200 {
            let b = frame.x0 + (frame.x1 - frame.x0) * f64::from(i) / 200.0;
            let g = f(b);
            if g >= frame.y0 && g <= frame.y1 {
                let _ = write!(d, "{}{:.2},{:.2} ", if pen { "L" } else { "M" }, frame.px(b), frame.py(g));
                pen = true;
            } else {
                pen = false;
            }
        }
    }
    let _ = writeln!(out, r#"<path class="boundary" fill="none" stroke="black" stroke-width="2" stroke-dasharray="5 3" d="{}"/>"#, d.trim_end());
    let label = series.first().map_or(String::new(), |s| s.label.clone());
    legend(
        &mut out,
        &[
            (format!("{label} low ({})", tick(v0)), "#0040ff", false),
            (format!("{label} high ({})", tick(v1)), "#ff4000", false),
            ("β+γ=2, γ=1, β+γ=3".into(), "black", true),
        ],
    );
    out.push_str("</svg>\n");
    out
}

/// Renders series into an SVG document.
pub fn render_svg(series: &[Series], kind: SvgKind, title: &str) -> Result<String> {
    if series.iter().all(|s| s.points.is_empty()) {
        return Err(CliError::Runtime("empty series".into()));
    }
    let title = escape(title);
    Ok(match kind {
        SvgKind::CdfCompare => cdf_compare(series, &title),
        SvgKind::Heatmap => heatmap(series, &title),
        SvgKind::Scaling => scaling(series, &title),
    })
}

pub fn emit_svg(series: &[Series], kind: SvgKind, title: &str, path: &Path) -> Result<()> {
    let text = render_svg(series, kind, title)?;
    crate::output::write_text(path, &text)
}
