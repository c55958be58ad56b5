//! Grouped bar charts as standalone SVG text.

use std::fmt::Write;

const PALETTE: [&str; 8] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#9c755f",
];
const HEIGHT: f64 = 320.0;
const MARGIN_LEFT: f64 = 48.0;
const MARGIN_TOP: f64 = 36.0;
const MARGIN_BOTTOM: f64 = 40.0;
const BAR: f64 = 14.0;
const GROUP_GAP: f64 = 18.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// One group per category, one bar per series; values are percentages.
/// Every series must list the same categories in the same order.
pub(crate) fn breakdown_svg(title: &str, series: &[(String, Vec<(String, f64)>)]) -> String {
    let categories: Vec<&str> = series
        .first()
        .map(|(_, v)| v.iter().map(|(c, _)| c.as_str()).collect())
        .unwrap_or_default();
    let group = BAR * series.len() as f64 + GROUP_GAP;
    let plot_w = group * categories.len() as f64;
    let legend_w = 180.0;
    let width = MARGIN_LEFT + plot_w + legend_w;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let y_of = |v: f64| MARGIN_TOP + plot_h * (1.0 - v.clamp(0.0, 100.0) / 100.0);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{HEIGHT:.0}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{MARGIN_LEFT}" y="20" font-size="13">{}</text>"#,
        escape(title)
    );
    for tick in (0..=100).step_by(20) {
        let y = y_of(f64::from(tick));
        let _ = writeln!(
            s,
            r##"<line x1="{MARGIN_LEFT}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" text-anchor="end">{tick}</text>"##,
            MARGIN_LEFT + plot_w,
            MARGIN_LEFT - 6.0,
            y + 4.0
        );
    }
    for (ci, cat) in categories.iter().enumerate() {
        let x0 = MARGIN_LEFT + ci as f64 * group + GROUP_GAP / 2.0;
        for (si, (_, values)) in series.iter().enumerate() {
            let v = values.get(ci).map_or(0.0, |(_, v)| *v);
            let y = y_of(v);
            let _ = writeln!(
                s,
                r#"<rect x="{:.1}" y="{y:.1}" width="{BAR}" height="{:.1}" fill="{}"><title>{v:.1}</title></rect>"#,
                x0 + si as f64 * BAR,
                MARGIN_TOP + plot_h - y,
                PALETTE[si % PALETTE.len()]
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            x0 + BAR * series.len() as f64 / 2.0,
            HEIGHT - MARGIN_BOTTOM + 16.0,
            escape(cat)
        );
    }
    for (si, (name, _)) in series.iter().enumerate() {
        let x = MARGIN_LEFT + plot_w + 16.0;
        let y = MARGIN_TOP + 18.0 * si as f64;
        let _ = writeln!(
            s,
            r#"<rect x="{x:.1}" y="{y:.1}" width="10" height="10" fill="{}"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            PALETTE[si % PALETTE.len()],
            x + 14.0,
            y + 9.0,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    s
}
