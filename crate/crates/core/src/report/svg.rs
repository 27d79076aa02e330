// SPDX-License-Identifier: Apache-2.0

//! Fixed-layout SVG charts. Output depends only on the input values, so
//! identical inputs give byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::rank::ScatterPoint;
use super::ReportError;
use crate::ambiguity::DisplayHistogram;
use crate::corpus::Category;
use crate::scalar::Scalar;

const FONT: &str = "DejaVu Sans, Arial, sans-serif";

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

fn header(svg: &mut String, width: u32, height: u32) {
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="{FONT}" font-size="12">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>"#
    );
}

/// Tick step giving at most about five integer ticks up to `max`.
fn count_step(max: u64) -> u64 {
    let raw = max.div_ceil(5).max(1);
    let magnitude = 10u64.pow(raw.ilog10());
    [1, 2, 5, 10]
        .into_iter()
        .map(|m| m * magnitude)
        .find(|&s| s >= raw)
        .unwrap_or(raw)
}

pub fn histogram_svg(display: &DisplayHistogram) -> String {
    const W: u32 = 640;
    const H: u32 = 400;
    const LEFT: f64 = 60.0;
    const RIGHT: f64 = 20.0;
    const TOP: f64 = 20.0;
    const BOTTOM: f64 = 110.0;
    let plot_w = f64::from(W) - LEFT - RIGHT;
    let plot_h = f64::from(H) - TOP - BOTTOM;
    let base = TOP + plot_h;

    let mut bars: Vec<(&str, u64)> = display.bins.iter().map(|(l, c)| (l.as_str(), *c)).collect();
    if display.other_count > 0 {
        bars.push((DisplayHistogram::OTHER_LABEL, display.other_count));
    }
    let max = bars.iter().map(|&(_, c)| c).max().unwrap_or(0);
    let step = count_step(max);
    let y_max = (max.div_ceil(step) * step).max(step);
    let y = |v: u64| base - plot_h * v as f64 / y_max as f64;

    let mut svg = String::new();
    header(&mut svg, W, H);
    let _ = writeln!(svg, r#"<g class="axes" stroke="black" stroke-width="1">"#);
    let _ = writeln!(
        svg,
        r#"<line x1="{LEFT:.2}" y1="{TOP:.2}" x2="{LEFT:.2}" y2="{base:.2}"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{LEFT:.2}" y1="{base:.2}" x2="{:.2}" y2="{base:.2}"/>"#,
        LEFT + plot_w
    );
    let _ = writeln!(svg, "</g>");

    let _ = writeln!(svg, r#"<g class="y-ticks" text-anchor="end">"#);
    let mut tick = 0;
    while tick <= y_max {
        let ty = y(tick);
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{ty:.2}" x2="{LEFT:.2}" y2="{ty:.2}" stroke="black"/><text x="{:.2}" y="{:.2}">{tick}</text>"#,
            LEFT - 4.0,
            LEFT - 7.0,
            ty + 4.0
        );
        tick += step;
    }
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">count</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );

    let _ = writeln!(svg, r#"<g class="bars">"#);
    if !bars.is_empty() {
        let slot = plot_w / bars.len() as f64;
        let bar_w = slot * 0.8;
        for (i, &(label, count)) in bars.iter().enumerate() {
            let x = LEFT + slot * i as f64 + (slot - bar_w) / 2.0;
            let top = y(count);
            let fill = if label == DisplayHistogram::OTHER_LABEL {
                "#9e9e9e"
            } else {
                "#4c72b0"
            };
            let cx = x + bar_w / 2.0;
            let ly = base + 12.0;
            let _ = writeln!(
                svg,
                r#"<rect x="{x:.2}" y="{top:.2}" width="{bar_w:.2}" height="{:.2}" fill="{fill}"><title>{}: {count}</title></rect>"#,
                base - top,
                escape(label)
            );
            let _ = writeln!(
                svg,
                r#"<text x="{cx:.2}" y="{ly:.2}" text-anchor="end" transform="rotate(-45 {cx:.2} {ly:.2})">{}</text>"#,
                escape(label)
            );
        }
    }
    let _ = writeln!(svg, "</g>");
    svg.push_str("</svg>\n");
    svg
}

fn category_color(category: Category) -> &'static str {
    match category {
        Category::Recognizable => "#1f77b4",
        Category::Dichotomous => "#ff7f0e",
        Category::Indeterminate => "#2ca02c",
        Category::Abstract => "#d62728",
        Category::AbstractFlat => "#9467bd",
    }
}

pub fn scatter_svg<F: Scalar>(points: &[ScatterPoint<F>]) -> String {
    const W: u32 = 560;
    const H: u32 = 480;
    const LEFT: f64 = 60.0;
    const TOP: f64 = 20.0;
    const SIZE: f64 = 380.0;
    const LEGEND_X: f64 = LEFT + SIZE + 20.0;
    let base = TOP + SIZE;

    let max = points
        .iter()
        .flat_map(|p| [p.h_short.to_f64_lossy(), p.h_long.to_f64_lossy()])
        .filter(|v| v.is_finite())
        .fold(6.0_f64, f64::max)
        .ceil();
    let sx = |v: f64| LEFT + SIZE * v / max;
    let sy = |v: f64| base - SIZE * v / max;

    let mut svg = String::new();
    header(&mut svg, W, H);
    let _ = writeln!(svg, r#"<g class="axes" stroke="black" stroke-width="1">"#);
    let _ = writeln!(
        svg,
        r#"<line x1="{LEFT:.2}" y1="{TOP:.2}" x2="{LEFT:.2}" y2="{base:.2}"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{LEFT:.2}" y1="{base:.2}" x2="{:.2}" y2="{base:.2}"/>"#,
        LEFT + SIZE
    );
    let _ = writeln!(svg, "</g>");

    let _ = writeln!(svg, r#"<g class="ticks">"#);
    for t in 0..=(max as u32) {
        let v = f64::from(t);
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{t}</text><text x="{:.2}" y="{:.2}" text-anchor="end">{t}</text>"#,
            sx(v),
            base + 16.0,
            LEFT - 6.0,
            sy(v) + 4.0
        );
    }
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">H<tspan baseline-shift="sub" font-size="9">0.5</tspan> (bits)</text>"#,
        LEFT + SIZE / 2.0,
        base + 40.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">H<tspan baseline-shift="sub" font-size="9">3</tspan> (bits)</text>"#,
        TOP + SIZE / 2.0,
        TOP + SIZE / 2.0
    );

    let _ = writeln!(svg, r#"<g class="points" fill-opacity="0.8">"#);
    for p in points {
        let _ = writeln!(
            svg,
            r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="{}"><title>{}</title></circle>"#,
            sx(p.h_short.to_f64_lossy()),
            sy(p.h_long.to_f64_lossy()),
            category_color(p.category),
            escape(&p.image_id)
        );
    }
    let _ = writeln!(svg, "</g>");

    let _ = writeln!(svg, r#"<g class="legend">"#);
    for (i, category) in Category::ALL.into_iter().enumerate() {
        let ly = TOP + 10.0 + 20.0 * i as f64;
        let _ = writeln!(
            svg,
            r#"<circle cx="{LEGEND_X:.2}" cy="{ly:.2}" r="5" fill="{}"/><text x="{:.2}" y="{:.2}">{category}</text>"#,
            category_color(category),
            LEGEND_X + 10.0,
            ly + 4.0
        );
    }
    let _ = writeln!(svg, "</g>");
    svg.push_str("</svg>\n");
    svg
}

fn write_file(path: &Path, contents: &str) -> Result<(), ReportError> {
    fs::write(path, contents).map_err(|source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn render_histogram(display: &DisplayHistogram, out: impl AsRef<Path>) -> Result<(), ReportError> {
    write_file(out.as_ref(), &histogram_svg(display))
}

pub fn render_scatter<F: Scalar>(points: &[ScatterPoint<F>], out: impl AsRef<Path>) -> Result<(), ReportError> {
    write_file(out.as_ref(), &scatter_svg(points))
}
