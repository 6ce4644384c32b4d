//! Minimal self-contained SVG plot: one analytic polyline per strategy,
//! Monte Carlo means with 95% error bars, fixed axes. No scripts, no
//! external assets — the file is a complete picture on its own.

use std::fmt::Write;

use crate::run::ResultRow;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 24.0;
const BOTTOM: f64 = 52.0;

fn color(strategy: &str) -> &'static str {
    match strategy {
        "ra" => "#1f77b4",
        "na" => "#d62728",
        _ => "#555555",
    }
}

fn label(strategy: &str) -> &'static str {
    match strategy {
        "ra" => "random association",
        "na" => "nearest association",
        _ => "other",
    }
}

/// Trim a tick label to a short decimal form.
fn tick_text(v: f64) -> String {
    let text = format!("{v:.3}");
    let text = text.trim_end_matches('0').trim_end_matches('.');
    if text.is_empty() || text == "-" {
        "0".to_string()
    } else {
        text.to_string()
    }
}

pub fn render(rows: &[ResultRow], sweep_param: &str) -> String {
    let xs: Vec<f64> = rows.iter().filter_map(|r| r.sweep_value).collect();
    let (x_min, x_max) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    let span = if x_max > x_min { x_max - x_min } else { 1.0 };
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + (x - x_min) / span * plot_w;
    let py = |p: f64| TOP + (1.0 - p.clamp(0.0, 1.0)) * plot_h;

    let mut out = String::new();
    let _ = write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = write!(
        out,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );

    // Frame and grid.
    let _ = write!(
        out,
        r##"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#333" stroke-width="1"/>"##
    );
    for i in 0..=5 {
        let p = i as f64 / 5.0;
        let y = py(p);
        let _ = write!(
            out,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd" stroke-width="0.5"/><text x="{:.2}" y="{y:.2}" text-anchor="end" dominant-baseline="middle">{}</text>"##,
            LEFT + plot_w,
            LEFT - 8.0,
            tick_text(p)
        );
        let x = x_min + p * span;
        let xp = px(x);
        let _ = write!(
            out,
            r##"<line x1="{xp:.2}" y1="{TOP}" x2="{xp:.2}" y2="{:.2}" stroke="#ddd" stroke-width="0.5"/><text x="{xp:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            TOP + plot_h,
            TOP + plot_h + 18.0,
            tick_text(x)
        );
    }
    let _ = write!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{sweep_param}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 12.0
    );
    let _ = write!(
        out,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">energy coverage probability</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );

    // One polyline and one set of error bars per strategy, in first-seen
    // row order.
    let mut strategies: Vec<&str> = Vec::new();
    for row in rows {
        if !strategies.contains(&row.strategy.as_str()) {
            strategies.push(&row.strategy);
        }
    }
    for (index, strategy) in strategies.iter().enumerate() {
        let series: Vec<&ResultRow> = rows
            .iter()
            .filter(|r| r.strategy == *strategy && r.sweep_value.is_some())
            .collect();
        let stroke = color(strategy);

        let line: Vec<String> = series
            .iter()
            .filter_map(|r| {
                r.analytic_p
                    .map(|p| format!("{:.2},{:.2}", px(r.sweep_value.unwrap()), py(p)))
            })
            .collect();
        if line.len() >= 2 {
            let _ = write!(
                out,
                r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="1.8"/>"#,
                line.join(" ")
            );
        }

        for row in &series {
            let x = px(row.sweep_value.unwrap());
            if let (Some(lo), Some(hi)) = (row.mc_ci_low, row.mc_ci_high) {
                let _ = write!(
                    out,
                    r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="{stroke}" stroke-width="1"/><line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{stroke}" stroke-width="1"/><line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{stroke}" stroke-width="1"/>"#,
                    py(lo),
                    py(hi),
                    x - 4.0,
                    py(lo),
                    x + 4.0,
                    py(lo),
                    x - 4.0,
                    py(hi),
                    x + 4.0,
                    py(hi)
                );
            }
            if let Some(p) = row.mc_p {
                let _ = write!(
                    out,
                    r#"<circle cx="{x:.2}" cy="{:.2}" r="3" fill="{stroke}"/>"#,
                    py(p)
                );
            }
        }

        // Legend entry.
        let ly = TOP + 14.0 + 18.0 * index as f64;
        let _ = write!(
            out,
            r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{stroke}" stroke-width="1.8"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            LEFT + plot_w - 150.0,
            LEFT + plot_w - 122.0,
            LEFT + plot_w - 116.0,
            ly + 4.0,
            label(strategy)
        );
    }

    out.push_str("</svg>");
    out
}
