//! Row model and output emission: CSV with a fixed header and 17-digit
//! floats (bit-exact round trips), a JSON mirror, a self-contained SVG plot
//! of |T|² versus k, and a companion plotting script for external tooling.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use scatter1d::Side;
use serde::{Deserialize, Serialize};

pub const CSV_HEADER: &str = "k,side,branch,n,re_R,im_R,re_T,im_T,absT2,residual,flags";

/// One branch at one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub k: f64,
    /// "l" or "r".
    pub side: String,
    pub branch: u32,
    pub n: f64,
    #[serde(rename = "re_R")]
    pub re_r: f64,
    #[serde(rename = "im_R")]
    pub im_r: f64,
    #[serde(rename = "re_T")]
    pub re_t: f64,
    #[serde(rename = "im_T")]
    pub im_t: f64,
    #[serde(rename = "absT2")]
    pub abs_t2: f64,
    pub residual: f64,
    /// Semicolon-separated tokens; empty when clean.
    pub flags: String,
}

pub fn side_tag(side: Side) -> &'static str {
    match side {
        Side::Left => "l",
        Side::Right => "r",
    }
}

/// 17 significant digits: enough for bit-exact f64 round trips.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn render_csv(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(64 + rows.len() * 160);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            fmt_f64(r.k),
            r.side,
            r.branch,
            fmt_f64(r.n),
            fmt_f64(r.re_r),
            fmt_f64(r.im_r),
            fmt_f64(r.re_t),
            fmt_f64(r.im_t),
            fmt_f64(r.abs_t2),
            fmt_f64(r.residual),
            r.flags,
        );
    }
    out
}

pub fn parse_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        other => bail!("unexpected CSV header {other:?}"),
    }
    let mut rows = Vec::new();
    for (idx, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 11 {
            bail!(
                "line {}: expected 11 fields, found {}",
                idx + 2,
                fields.len()
            );
        }
        let f = |j: usize| -> Result<f64> {
            fields[j]
                .parse()
                .with_context(|| format!("line {}: field {j}", idx + 2))
        };
        rows.push(SweepRow {
            k: f(0)?,
            side: fields[1].to_string(),
            branch: fields[2]
                .parse()
                .with_context(|| format!("line {}: branch", idx + 2))?,
            n: f(3)?,
            re_r: f(4)?,
            im_r: f(5)?,
            re_t: f(6)?,
            im_t: f(7)?,
            abs_t2: f(8)?,
            residual: f(9)?,
            flags: fields[10].to_string(),
        });
    }
    Ok(rows)
}

#[derive(Serialize)]
struct JsonDoc<'a> {
    rows: &'a [SweepRow],
}

pub fn render_json(rows: &[SweepRow]) -> Result<String> {
    Ok(serde_json::to_string_pretty(&JsonDoc { rows })?)
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

/// Self-contained SVG of |T|² versus k; each (side, branch) gets its own
/// trace so multivalued regions appear as coexisting curves.
pub fn render_plot_svg(rows: &[SweepRow], title: &str) -> String {
    const W: f64 = 900.0;
    const H: f64 = 560.0;
    const ML: f64 = 70.0;
    const MR: f64 = 30.0;
    const MT: f64 = 46.0;
    const MB: f64 = 56.0;

    let finite: Vec<&SweepRow> = rows
        .iter()
        .filter(|r| r.k.is_finite() && r.abs_t2.is_finite())
        .collect();

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
        W / 2.0,
        xml_escape(title)
    );

    if finite.is_empty() {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="14" text-anchor="middle">no data</text>"#,
            W / 2.0,
            H / 2.0
        );
        svg.push_str("</svg>\n");
        return svg;
    }

    let k_min = finite.iter().map(|r| r.k).fold(f64::INFINITY, f64::min);
    let k_max = finite.iter().map(|r| r.k).fold(f64::NEG_INFINITY, f64::max);
    let k_span = (k_max - k_min).max(1e-12);

    // Cap the y axis at a high quantile so singular spikes do not flatten
    // everything else.
    let mut t2: Vec<f64> = finite.iter().map(|r| r.abs_t2).collect();
    t2.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let q98 = t2[((t2.len() - 1) as f64 * 0.98) as usize];
    let y_max = (q98 * 1.25).max(1.3);
    let y_span = y_max;

    let x_of = |k: f64| ML + (k - k_min) / k_span * (W - ML - MR);
    let y_of = |v: f64| H - MB - (v.min(y_max) / y_span) * (H - MT - MB);

    // Axes and ticks.
    let _ = writeln!(
        svg,
        r#"<line x1="{ML}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
        H - MB,
        W - MR,
        H - MB
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{ML}" y1="{MT}" x2="{ML}" y2="{}" stroke="black"/>"#,
        H - MB
    );
    for j in 0..=6 {
        let k = k_min + k_span * j as f64 / 6.0;
        let x = x_of(k);
        let _ = writeln!(
            svg,
            r#"<line x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="black"/>"#,
            H - MB,
            H - MB + 5.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{x}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">{k:.3}</text>"#,
            H - MB + 18.0
        );
        let v = y_span * j as f64 / 6.0;
        let y = y_of(v);
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{y}" x2="{ML}" y2="{y}" stroke="black"/>"#,
            ML - 5.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{v:.2}</text>"#,
            ML - 8.0,
            y + 4.0
        );
    }
    // Reference line |T|² = 1.
    if y_max > 1.0 {
        let y = y_of(1.0);
        let _ = writeln!(
            svg,
            r##"<line x1="{ML}" y1="{y}" x2="{}" y2="{y}" stroke="#bbbbbb" stroke-dasharray="2,4"/>"##,
            W - MR
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="13" text-anchor="middle">k</text>"#,
        (ML + W - MR) / 2.0,
        H - 16.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="20" y="{}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 20 {})">|T|^2</text>"#,
        (MT + H - MB) / 2.0,
        (MT + H - MB) / 2.0
    );

    // Group rows into traces by (side, branch) and break on k gaps.
    let mut keys: Vec<(String, u32)> = finite
        .iter()
        .map(|r| (r.side.clone(), r.branch))
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    keys.sort();

    let mut steps: Vec<f64> = finite.windows(2).map(|w| (w[1].k - w[0].k).abs()).collect();
    steps.retain(|d| *d > 0.0);
    steps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let typical_step = steps.get(steps.len() / 2).copied().unwrap_or(k_span);

    for (idx, (side, branch)) in keys.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let dash = if side == "r" {
            r#" stroke-dasharray="5,3""#
        } else {
            ""
        };
        let mut pts: Vec<(f64, f64)> = finite
            .iter()
            .filter(|r| &r.side == side && r.branch == *branch)
            .map(|r| (r.k, r.abs_t2))
            .collect();
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

        let mut segment: Vec<(f64, f64)> = Vec::new();
        let flush = |seg: &mut Vec<(f64, f64)>, svg: &mut String| {
            if seg.len() >= 2 {
                let path: Vec<String> = seg
                    .iter()
                    .map(|(k, v)| format!("{:.2},{:.2}", x_of(*k), y_of(*v)))
                    .collect();
                let _ = writeln!(
                    svg,
                    r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.2"{dash}/>"#,
                    path.join(" ")
                );
            } else if seg.len() == 1 {
                let (k, v) = seg[0];
                let _ = writeln!(
                    svg,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="1.8" fill="{color}"/>"#,
                    x_of(k),
                    y_of(v)
                );
            }
            seg.clear();
        };
        let mut prev_k: Option<f64> = None;
        for (k, v) in pts {
            if let Some(pk) = prev_k {
                if k - pk > 2.5 * typical_step {
                    flush(&mut segment, &mut svg);
                }
            }
            segment.push((k, v));
            prev_k = Some(k);
        }
        flush(&mut segment, &mut svg);

        // Legend (first ten traces).
        if idx < 10 {
            let lx = W - MR - 170.0;
            let ly = MT + 16.0 * idx as f64;
            let _ = writeln!(
                svg,
                r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"{dash}/>"#,
                lx + 22.0
            );
            let _ = writeln!(
                svg,
                r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11">side {side}, branch {branch}</text>"#,
                lx + 28.0,
                ly + 4.0
            );
        }
    }
    svg.push_str("</svg>\n");
    svg
}

fn xml_escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Companion matplotlib script that re-plots the CSV with external tooling.
pub fn render_plot_script(csv_path: &str) -> String {
    format!(
        r#"#!/usr/bin/env python3
"""Plot |T|^2 vs k from a sweep CSV, one trace per (side, branch)."""
import csv
from collections import defaultdict

import matplotlib.pyplot as plt

traces = defaultdict(list)
with open({csv_path:?}) as fh:
    for row in csv.DictReader(fh):
        traces[(row["side"], int(row["branch"]))].append(
            (float(row["k"]), float(row["absT2"]))
        )

fig, ax = plt.subplots(figsize=(9, 5.5))
for (side, branch), pts in sorted(traces.items()):
    pts.sort()
    ks = [p[0] for p in pts]
    t2 = [p[1] for p in pts]
    style = "-" if side == "l" else "--"
    ax.plot(ks, t2, style, lw=1.2, label=f"side {{side}}, branch {{branch}}")

ax.axhline(1.0, color="0.7", ls=":", lw=0.8)
ax.set_xlabel("k")
ax.set_ylabel("|T|^2")
ax.legend(fontsize=8)
fig.tight_layout()
fig.savefig("sweep_plot.png", dpi=160)
print("wrote sweep_plot.png")
"#
    )
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .with_context(|| format!("creating {}", parent.display()))?;
        }
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
