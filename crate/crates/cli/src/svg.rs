//! SVG figures derived from the results table.
//!
//! Figures are a pure function of parsed table cells: regenerating from the
//! same table yields byte-identical files. Accuracy is plotted on a fixed
//! [0, 1] axis so charts are comparable across runs.

use std::fmt::Write as _;

use kline_core::dataset::SplitStrategy;
use kline_core::imaging::ChartVariant;

use crate::report::ReportCell;

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 320.0;
const MARGIN_LEFT: f64 = 52.0;
const MARGIN_RIGHT: f64 = 16.0;
const MARGIN_TOP: f64 = 34.0;
const MARGIN_BOTTOM: f64 = 42.0;

fn strategy_color(s: SplitStrategy) -> &'static str {
    match s {
        SplitStrategy::Random => "#d62728",
        SplitStrategy::Automatic => "#ff7f0e",
        SplitStrategy::Time => "#1f77b4",
    }
}

fn plot_w() -> f64 {
    WIDTH - MARGIN_LEFT - MARGIN_RIGHT
}

fn plot_h() -> f64 {
    HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
}

fn y_of(accuracy: f64) -> f64 {
    MARGIN_TOP + (1.0 - accuracy) * plot_h()
}

fn header(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="monospace" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="18" text-anchor="middle" font-size="13">{title}</text>"#,
        WIDTH / 2.0
    );
    s
}

fn axes(s: &mut String) {
    // Horizontal gridlines and accuracy labels every 0.25.
    for i in 0..=4 {
        let acc = i as f64 * 0.25;
        let y = y_of(acc);
        let _ = writeln!(
            s,
            r##"<line x1="{MARGIN_LEFT:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#dddddd"/>"##,
            WIDTH - MARGIN_RIGHT
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{acc:.2}</text>"#,
            MARGIN_LEFT - 6.0,
            y + 4.0
        );
    }
    let bottom = HEIGHT - MARGIN_BOTTOM;
    let _ = writeln!(
        s,
        r#"<line x1="{MARGIN_LEFT:.1}" y1="{MARGIN_TOP:.1}" x2="{MARGIN_LEFT:.1}" y2="{bottom:.1}" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<line x1="{MARGIN_LEFT:.1}" y1="{bottom:.1}" x2="{:.1}" y2="{bottom:.1}" stroke="black"/>"#,
        WIDTH - MARGIN_RIGHT
    );
}

/// Accuracy vs. horizon for one chart variant, one polyline per strategy.
pub fn variant_chart(variant: ChartVariant, cells: &[ReportCell]) -> String {
    let mut horizons: Vec<usize> =
        cells.iter().filter(|c| c.variant == variant).map(|c| c.horizon).collect();
    horizons.sort_unstable();
    horizons.dedup();

    let mut s = header(&format!("accuracy vs horizon - {}", variant.name()));
    axes(&mut s);
    let bottom = HEIGHT - MARGIN_BOTTOM;

    // Horizons at equal spacing in data order.
    let x_of = |h: usize| -> f64 {
        let idx = horizons.iter().position(|v| *v == h).unwrap();
        let n = horizons.len().max(2) as f64;
        MARGIN_LEFT + plot_w() * (idx as f64 + 0.5) / n
    };
    for h in &horizons {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{h}</text>"#,
            x_of(*h),
            bottom + 16.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">horizon (trading days)</text>"#,
        MARGIN_LEFT + plot_w() / 2.0,
        bottom + 32.0
    );

    let mut legend_y = MARGIN_TOP + 6.0;
    for strategy in SplitStrategy::ALL {
        let mut points: Vec<(usize, f64)> = cells
            .iter()
            .filter(|c| c.variant == variant && c.strategy == strategy)
            .map(|c| (c.horizon, c.confusion.accuracy()))
            .collect();
        if points.is_empty() {
            continue;
        }
        points.sort_by_key(|(h, _)| *h);
        let color = strategy_color(strategy);
        let path: Vec<String> = points
            .iter()
            .map(|(h, acc)| format!("{:.1},{:.1}", x_of(*h), y_of(*acc)))
            .collect();
        if path.len() > 1 {
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                path.join(" ")
            );
        }
        for (h, acc) in &points {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.1}" cy="{:.1}" r="2.5" fill="{color}"/>"#,
                x_of(*h),
                y_of(*acc)
            );
        }
        let _ = writeln!(
            s,
            r#"<rect x="{:.1}" y="{:.1}" width="10" height="10" fill="{color}"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            WIDTH - MARGIN_RIGHT - 110.0,
            legend_y,
            WIDTH - MARGIN_RIGHT - 96.0,
            legend_y + 9.0,
            strategy.name()
        );
        legend_y += 14.0;
    }
    s.push_str("</svg>\n");
    s
}

/// Split-strategy comparison at one horizon: grouped accuracy bars per
/// variant.
pub fn split_bar_chart(cells: &[ReportCell], horizon: usize) -> String {
    let mut variants: Vec<ChartVariant> = Vec::new();
    let mut strategies: Vec<SplitStrategy> = Vec::new();
    for c in cells.iter().filter(|c| c.horizon == horizon) {
        if !variants.contains(&c.variant) {
            variants.push(c.variant);
        }
        if !strategies.contains(&c.strategy) {
            strategies.push(c.strategy);
        }
    }

    let mut s = header(&format!("split comparison at horizon {horizon}"));
    axes(&mut s);
    let bottom = HEIGHT - MARGIN_BOTTOM;

    let group_w = plot_w() / variants.len().max(1) as f64;
    let bar_w = (group_w * 0.8) / strategies.len().max(1) as f64;
    for (vi, variant) in variants.iter().enumerate() {
        let group_x = MARGIN_LEFT + group_w * vi as f64;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            group_x + group_w / 2.0,
            bottom + 16.0,
            variant.name()
        );
        for (si, strategy) in strategies.iter().enumerate() {
            let Some(cell) = cells
                .iter()
                .find(|c| c.horizon == horizon && c.variant == *variant && c.strategy == *strategy)
            else {
                continue;
            };
            let acc = cell.confusion.accuracy();
            let x = group_x + group_w * 0.1 + bar_w * si as f64;
            let y = y_of(acc);
            let _ = writeln!(
                s,
                r#"<rect x="{x:.1}" y="{y:.1}" width="{:.1}" height="{:.1}" fill="{}"/>"#,
                bar_w - 1.0,
                bottom - y,
                strategy_color(*strategy)
            );
        }
    }
    let mut legend_y = MARGIN_TOP + 6.0;
    for strategy in &strategies {
        let color = strategy_color(*strategy);
        let _ = writeln!(
            s,
            r#"<rect x="{:.1}" y="{:.1}" width="10" height="10" fill="{color}"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            WIDTH - MARGIN_RIGHT - 110.0,
            legend_y,
            WIDTH - MARGIN_RIGHT - 96.0,
            legend_y + 9.0,
            strategy.name()
        );
        legend_y += 14.0;
    }
    s.push_str("</svg>\n");
    s
}
