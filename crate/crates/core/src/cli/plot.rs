//! Static SVG charts for soft assignments.

use std::fmt::Write as _;

use crate::graph::TransitionMatrix;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn open_svg(width: f64, height: f64) -> String {
    let mut svg = format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif">"#
    );
    svg.push('\n');
    writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    svg
}

/// Color per node from its class, in order of first appearance.
fn class_colors(classes: Option<&[String]>, n: usize) -> (Vec<&'static str>, Vec<(String, &'static str)>) {
    let Some(classes) = classes else {
        return (vec![PALETTE[0]; n], Vec::new());
    };
    let mut legend: Vec<(String, &'static str)> = Vec::new();
    let colors = classes
        .iter()
        .map(|c| match legend.iter().find(|(name, _)| name == c) {
            Some((_, col)) => *col,
            None => {
                let col = PALETTE[legend.len() % PALETTE.len()];
                legend.push((c.clone(), col));
                col
            }
        })
        .collect();
    (colors, legend)
}

fn legend(svg: &mut String, entries: &[(String, &str)], x: f64, y: f64) {
    for (k, (name, color)) in entries.iter().enumerate() {
        let yy = y + 18.0 * k as f64;
        writeln!(
            svg,
            r#"<rect x="{x:.2}" y="{:.2}" width="12" height="12" fill="{color}"/>"#,
            yy - 10.0
        )
        .unwrap();
        writeln!(
            svg,
            r#"<text x="{:.2}" y="{yy:.2}" font-size="12">{}</text>"#,
            x + 18.0,
            escape(name)
        )
        .unwrap();
    }
}

/// Bars of `values`, sorted ascending, one per label.
pub fn bar_chart(labels: &[String], values: &[f64], classes: Option<&[String]>, title: &str) -> String {
    let n = labels.len();
    let (colors, legend_entries) = class_colors(classes, n);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));

    let (left, top, plot_h, bar_w) = (50.0, 40.0, 300.0, 22.0);
    let width = left + bar_w * n as f64 + 160.0;
    let height = top + plot_h + 60.0;
    let mut svg = open_svg(width, height);
    writeln!(
        svg,
        r#"<text x="{left:.2}" y="24" font-size="16">{}</text>"#,
        escape(title)
    )
    .unwrap();
    for tick in 0..=4 {
        let v = tick as f64 / 4.0;
        let y = top + plot_h * (1.0 - v);
        writeln!(
            svg,
            r##"<line x1="{left:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/>"##,
            left + bar_w * n as f64
        )
        .unwrap();
        writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{v:.2}</text>"#,
            left - 6.0,
            y + 4.0
        )
        .unwrap();
    }
    for (slot, &i) in order.iter().enumerate() {
        let v = values[i].clamp(0.0, 1.0);
        let x = left + bar_w * slot as f64;
        let h = plot_h * v;
        writeln!(
            svg,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{h:.2}" fill="{}"><title>{} {:.4}</title></rect>"#,
            x + 2.0,
            top + plot_h - h,
            bar_w - 4.0,
            colors[i],
            escape(&labels[i]),
            values[i]
        )
        .unwrap();
        writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">{}</text>"#,
            x + bar_w / 2.0,
            top + plot_h + 16.0,
            escape(&labels[i])
        )
        .unwrap();
    }
    legend(&mut svg, &legend_entries, left + bar_w * n as f64 + 20.0, top + 10.0);
    svg.push_str("</svg>\n");
    svg
}

/// Projects rows of a three-column assignment matrix onto a triangle whose
/// corners are the clusters.
pub fn ternary(labels: &[String], s: &TransitionMatrix, classes: Option<&[String]>, title: &str) -> String {
    assert_eq!(s.cols(), 3, "ternary plot needs three clusters");
    let (colors, legend_entries) = class_colors(classes, labels.len());
    let side = 420.0;
    let h = side * 3f64.sqrt() / 2.0;
    let (ox, oy) = (60.0, 60.0 + h);
    // corners: cluster 0 bottom-left, cluster 1 bottom-right, cluster 2 top
    let corners = [(ox, oy), (ox + side, oy), (ox + side / 2.0, oy - h)];
    let mut svg = open_svg(side + 260.0, h + 120.0);
    writeln!(
        svg,
        r#"<text x="{ox:.2}" y="24" font-size="16">{}</text>"#,
        escape(title)
    )
    .unwrap();
    writeln!(
        svg,
        r##"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="none" stroke="#333333"/>"##,
        corners[0].0, corners[0].1, corners[1].0, corners[1].1, corners[2].0, corners[2].1
    )
    .unwrap();
    let offsets = [(-10.0, 18.0, "end"), (10.0, 18.0, "start"), (0.0, -10.0, "middle")];
    for (c, ((x, y), (dx, dy, anchor))) in corners.iter().zip(offsets).enumerate() {
        writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="13" text-anchor="{anchor}">cluster {c}</text>"#,
            x + dx,
            y + dy
        )
        .unwrap();
    }
    for (i, label) in labels.iter().enumerate() {
        let p = s.row(i);
        let x: f64 = (0..3).map(|c| p[c] * corners[c].0).sum();
        let y: f64 = (0..3).map(|c| p[c] * corners[c].1).sum();
        writeln!(
            svg,
            r#"<circle cx="{x:.2}" cy="{y:.2}" r="4" fill="{}" fill-opacity="0.8"><title>{} {:.3} {:.3} {:.3}</title></circle>"#,
            colors[i],
            escape(label),
            p[0],
            p[1],
            p[2]
        )
        .unwrap();
        writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="10">{}</text>"#,
            x + 5.0,
            y - 5.0,
            escape(label)
        )
        .unwrap();
    }
    legend(&mut svg, &legend_entries, ox + side + 40.0, 80.0);
    svg.push_str("</svg>\n");
    svg
}

/// One row per node, one column per cluster, shaded by probability.
pub fn heatmap(labels: &[String], s: &TransitionMatrix, title: &str) -> String {
    let (cell_w, cell_h, left, top) = (40.0, 14.0, 90.0, 50.0);
    let m = s.cols();
    let width = left + cell_w * m as f64 + 40.0;
    let height = top + cell_h * labels.len() as f64 + 20.0;
    let mut svg = open_svg(width, height);
    writeln!(svg, r#"<text x="10" y="20" font-size="14">{}</text>"#, escape(title)).unwrap();
    for c in 0..m {
        writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">{c}</text>"#,
            left + cell_w * (c as f64 + 0.5),
            top - 6.0
        )
        .unwrap();
    }
    for (i, label) in labels.iter().enumerate() {
        let y = top + cell_h * i as f64;
        writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="10" text-anchor="end">{}</text>"#,
            left - 6.0,
            y + cell_h - 3.0,
            escape(label)
        )
        .unwrap();
        for (c, &p) in s.row(i).iter().enumerate() {
            // white at 0, dark blue at 1
            let shade = |full: f64| (255.0 - (255.0 - full) * p.clamp(0.0, 1.0)).round() as u8;
            writeln!(
                svg,
                r#"<rect x="{:.2}" y="{y:.2}" width="{cell_w:.2}" height="{cell_h:.2}" fill="rgb({},{},{})"><title>{} {c} {p:.4}</title></rect>"#,
                left + cell_w * c as f64,
                shade(8.0),
                shade(48.0),
                shade(107.0),
                escape(label)
            )
            .unwrap();
        }
    }
    svg.push_str("</svg>\n");
    svg
}
