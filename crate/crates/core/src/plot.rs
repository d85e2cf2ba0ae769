//! Standalone SVG emitters: embedding scatter plots and small charts for
//! the theory experiments.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::data::LabelVector;
use crate::embed::Embedding;
use crate::error::{Error, Result};
use crate::theory::OrderSweepRow;

/// Categorical palette; label ids beyond 20 cycle.
const PALETTE: [&str; 20] = [
    "#1f77b4", "#aec7e8", "#ff7f0e", "#ffbb78", "#2ca02c", "#98df8a", "#d62728", "#ff9896",
    "#9467bd", "#c5b0d5", "#8c564b", "#c49c94", "#e377c2", "#f7b6d2", "#7f7f7f", "#c7c7c7",
    "#bcbd22", "#dbdb8d", "#17becf", "#9edae5",
];

const CANVAS: f64 = 800.0;
const MARGIN_FRAC: f64 = 0.05;

pub fn color_for(label: usize) -> &'static str {
    PALETTE[label % PALETTE.len()]
}

/// Writes a scatter plot of a 2D embedding, one circle per point, colored
/// by label when labels are given. Point radius shrinks with sample count
/// so large layouts stay readable and small on disk.
pub fn emit_scatter(
    embedding: &Embedding,
    labels: Option<&LabelVector>,
    path: &Path,
) -> Result<()> {
    if embedding.dim() != 2 {
        return Err(Error::Dimension(format!(
            "scatter plots need 2 output dimensions, embedding has {}",
            embedding.dim()
        )));
    }
    if let Some(l) = labels {
        if l.len() != embedding.n() {
            return Err(Error::LengthMismatch {
                left: l.len(),
                right: embedding.n(),
            });
        }
    }
    let n = embedding.n();

    let (mut min_x, mut max_x) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut min_y, mut max_y) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..n {
        let p = embedding.point(i);
        min_x = min_x.min(p[0]);
        max_x = max_x.max(p[0]);
        min_y = min_y.min(p[1]);
        max_y = max_y.max(p[1]);
    }
    let span_x = (max_x - min_x).max(1e-12);
    let span_y = (max_y - min_y).max(1e-12);
    let pad_x = span_x * MARGIN_FRAC;
    let pad_y = span_y * MARGIN_FRAC;
    min_x -= pad_x;
    max_x += pad_x;
    min_y -= pad_y;
    max_y += pad_y;

    let sx = CANVAS / (max_x - min_x);
    let sy = CANVAS / (max_y - min_y);
    let radius = (240.0 / (n as f64).sqrt()).clamp(0.8, 4.0);

    let mut svg = String::with_capacity(n * 64 + 1024);
    let _ = writeln!(
        svg,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{CANVAS}" height="{CANVAS}" viewBox="0 0 {CANVAS} {CANVAS}">"##
    );
    let _ = writeln!(svg, r##"<rect width="100%" height="100%" fill="white"/>"##);

    for i in 0..n {
        let p = embedding.point(i);
        let cx = (p[0] - min_x) * sx;
        // flip y so larger coordinates render upward
        let cy = CANVAS - (p[1] - min_y) * sy;
        let color = labels.map_or(PALETTE[0], |l| color_for(l.get(i)));
        let _ = writeln!(
            svg,
            r##"<circle cx="{cx:.2}" cy="{cy:.2}" r="{radius:.2}" fill="{color}" fill-opacity="0.8"/>"##
        );
    }

    if let Some(l) = labels {
        let mut ids: Vec<usize> = (0..l.len()).map(|i| l.get(i)).collect();
        ids.sort_unstable();
        ids.dedup();
        for (row, id) in ids.iter().enumerate() {
            let y = 18.0 + 18.0 * row as f64;
            let _ = writeln!(
                svg,
                r##"<rect x="10" y="{:.1}" width="12" height="12" fill="{}"/><text x="27" y="{:.1}" font-size="12" font-family="sans-serif">{}</text>"##,
                y - 10.0,
                color_for(*id),
                y,
                id
            );
        }
    }

    svg.push_str("</svg>\n");
    fs::write(path, svg).map_err(|e| Error::io(path, e))
}

/// Line chart of the ordering-failure probability over the dimension grid,
/// with the complement of the Cantelli bound drawn alongside.
pub fn plot_order_sweep(rows: &[OrderSweepRow], path: &Path) -> Result<()> {
    let (w, h) = (640.0, 420.0);
    let (left, bottom, top) = (60.0, 40.0, 20.0);
    let plot_w = w - left - 20.0;
    let plot_h = h - bottom - top;
    let y_max = rows
        .iter()
        .flat_map(|r| [r.estimate, 1.0 - r.cantelli_bound])
        .fold(0.1_f64, f64::max)
        .min(1.0)
        * 1.1;

    let x_of = |idx: usize| left + plot_w * idx as f64 / (rows.len().max(2) - 1) as f64;
    let y_of = |v: f64| top + plot_h * (1.0 - (v / y_max).min(1.0));

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"##
    );
    let _ = writeln!(svg, r##"<rect width="100%" height="100%" fill="white"/>"##);
    let _ = writeln!(
        svg,
        r##"<line x1="{left}" y1="{top}" x2="{left}" y2="{:.1}" stroke="black"/>"##,
        top + plot_h
    );
    let _ = writeln!(
        svg,
        r##"<line x1="{left}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="black"/>"##,
        top + plot_h,
        left + plot_w,
        top + plot_h
    );

    for (series, color) in [(true, "#d62728"), (false, "#1f77b4")] {
        let pts: Vec<String> = rows
            .iter()
            .enumerate()
            .map(|(idx, r)| {
                let v = if series { r.estimate } else { 1.0 - r.cantelli_bound };
                format!("{:.1},{:.1}", x_of(idx), y_of(v))
            })
            .collect();
        let _ = writeln!(
            svg,
            r##"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"##,
            pts.join(" ")
        );
    }
    for (idx, r) in rows.iter().enumerate() {
        let _ = writeln!(
            svg,
            r##"<circle cx="{:.1}" cy="{:.1}" r="3" fill="#d62728"/>"##,
            x_of(idx),
            y_of(r.estimate)
        );
        let _ = writeln!(
            svg,
            r##"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle" font-family="sans-serif">{}</text>"##,
            x_of(idx),
            top + plot_h + 16.0,
            r.d
        );
    }
    let _ = writeln!(
        svg,
        r##"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="middle" font-family="sans-serif">dimension</text>"##,
        left + plot_w / 2.0,
        h - 6.0
    );
    let _ = writeln!(
        svg,
        r##"<text x="14" y="{:.1}" font-size="12" font-family="sans-serif" transform="rotate(-90 14 {:.1})">P(intra &#8805; inter)</text>"##,
        top + plot_h / 2.0,
        top + plot_h / 2.0
    );
    let _ = writeln!(
        svg,
        r##"<text x="{:.1}" y="{top}" font-size="11" fill="#d62728" font-family="sans-serif">estimate</text>"##,
        left + plot_w - 120.0
    );
    let _ = writeln!(
        svg,
        r##"<text x="{:.1}" y="{:.1}" font-size="11" fill="#1f77b4" font-family="sans-serif">1 - lower bound</text>"##,
        left + plot_w - 120.0,
        top + 14.0
    );
    svg.push_str("</svg>\n");
    fs::write(path, svg).map_err(|e| Error::io(path, e))
}

/// Paired-dot chart: empirical flip rate against its bound per
/// configuration.
pub fn plot_flip_rates(rates_and_bounds: &[(f64, f64)], path: &Path) -> Result<()> {
    let (w, h) = (640.0, 420.0);
    let (left, bottom, top) = (60.0, 40.0, 20.0);
    let plot_w = w - left - 20.0;
    let plot_h = h - bottom - top;
    let y_max = rates_and_bounds
        .iter()
        .flat_map(|&(r, b)| [r, b])
        .fold(0.1_f64, f64::max)
        * 1.15;
    let m = rates_and_bounds.len().max(2);
    let x_of = |idx: usize| left + plot_w * (idx as f64 + 0.5) / m as f64;
    let y_of = |v: f64| top + plot_h * (1.0 - v / y_max);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"##
    );
    let _ = writeln!(svg, r##"<rect width="100%" height="100%" fill="white"/>"##);
    let _ = writeln!(
        svg,
        r##"<line x1="{left}" y1="{top}" x2="{left}" y2="{:.1}" stroke="black"/>"##,
        top + plot_h
    );
    let _ = writeln!(
        svg,
        r##"<line x1="{left}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="black"/>"##,
        top + plot_h,
        left + plot_w,
        top + plot_h
    );
    for (idx, &(rate, bound)) in rates_and_bounds.iter().enumerate() {
        let x = x_of(idx);
        let _ = writeln!(
            svg,
            r##"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="#cccccc"/>"##,
            y_of(rate),
            y_of(bound)
        );
        let _ = writeln!(
            svg,
            r##"<circle cx="{x:.1}" cy="{:.1}" r="4" fill="#d62728"/>"##,
            y_of(rate)
        );
        let _ = writeln!(
            svg,
            r##"<circle cx="{x:.1}" cy="{:.1}" r="4" fill="#1f77b4"/>"##,
            y_of(bound)
        );
        let _ = writeln!(
            svg,
            r##"<text x="{x:.1}" y="{:.1}" font-size="11" text-anchor="middle" font-family="sans-serif">{}</text>"##,
            top + plot_h + 16.0,
            idx
        );
    }
    let _ = writeln!(
        svg,
        r##"<text x="{:.1}" y="{top}" font-size="11" fill="#d62728" font-family="sans-serif">flip rate</text>"##,
        left + plot_w - 110.0
    );
    let _ = writeln!(
        svg,
        r##"<text x="{:.1}" y="{:.1}" font-size="11" fill="#1f77b4" font-family="sans-serif">bound</text>"##,
        left + plot_w - 110.0,
        top + 14.0
    );
    svg.push_str("</svg>\n");
    fs::write(path, svg).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::Stage;
    use crate::matrix::Mat;
    use tempfile::tempdir;

    fn tiny_embedding(n: usize) -> Embedding {
        let coords = Mat::from_fn(n, 2, |i, j| (i as f64) * 0.7 + (j as f64) * 1.3);
        Embedding::from_coords(coords, Stage::Stage1).unwrap()
    }

    #[test]
    fn minimal_render_without_labels() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("plot.svg");
        emit_scatter(&tiny_embedding(3), None, &p).unwrap();
        let body = std::fs::read_to_string(&p).unwrap();
        assert_eq!(body.matches("<circle").count(), 3);
        assert!(!body.contains("<text"));
    }

    #[test]
    fn two_labels_two_legend_entries() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("plot.svg");
        let labels = LabelVector::new(vec![0, 1, 0]).unwrap();
        emit_scatter(&tiny_embedding(3), Some(&labels), &p).unwrap();
        let body = std::fs::read_to_string(&p).unwrap();
        assert_eq!(body.matches("<rect").count(), 1 + 2); // background + legend
        assert!(body.contains(PALETTE[0]) && body.contains(PALETTE[1]));
    }

    #[test]
    fn large_scatter_stays_small() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("big.svg");
        let n = 10_000;
        let coords = Mat::from_fn(n, 2, |i, j| ((i * 31 + j * 17) % 997) as f64);
        let e = Embedding::from_coords(coords, Stage::Stage2).unwrap();
        let labels = LabelVector::new((0..n).map(|i| i % 25).collect()).unwrap();
        emit_scatter(&e, Some(&labels), &p).unwrap();
        let len = std::fs::metadata(&p).unwrap().len();
        assert!(len < 10 * 1024 * 1024, "file is {len} bytes");
    }

    #[test]
    fn wrong_dimension_rejected() {
        let coords = Mat::zeros(4, 3);
        let e = Embedding::from_coords(coords, Stage::Stage1).unwrap();
        let dir = tempdir().unwrap();
        let err = emit_scatter(&e, None, &dir.path().join("x.svg")).unwrap_err();
        assert!(matches!(err, Error::Dimension(_)));
    }
}
