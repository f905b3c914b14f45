//! Minimal horizontal bar charts as standalone SVG.

use std::fmt::Write as _;

const ROW: f64 = 24.0;
const LABEL_WIDTH: f64 = 230.0;
const PLOT_WIDTH: f64 = 380.0;
const TOP: f64 = 40.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn bar_chart(title: &str, bars: &[(String, usize)]) -> String {
    let max = bars.iter().map(|(_, v)| *v).max().unwrap_or(0).max(1) as f64;
    let width = LABEL_WIDTH + PLOT_WIDTH + 70.0;
    let height = TOP + ROW * bars.len() as f64 + 20.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ =
        writeln!(s, r#"<text x="{}" y="22" font-size="15" text-anchor="middle">{}</text>"#, width / 2.0, escape(title));
    for (i, (label, value)) in bars.iter().enumerate() {
        let y = TOP + ROW * i as f64;
        let w = PLOT_WIDTH * *value as f64 / max;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            LABEL_WIDTH - 8.0,
            y + 15.0,
            escape(label)
        );
        let _ = writeln!(
            s,
            r##"<rect x="{LABEL_WIDTH}" y="{}" width="{w:.1}" height="{}" fill="#4a7ab5"/>"##,
            y + 3.0,
            ROW - 6.0
        );
        let _ = writeln!(s, r#"<text x="{:.1}" y="{}">{value}</text>"#, LABEL_WIDTH + w + 5.0, y + 15.0);
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scales_to_longest_bar() {
        let svg = bar_chart("A & B", &[("x".into(), 2), ("y".into(), 4)]);
        assert!(svg.contains("A &amp; B"));
        assert!(svg.contains(r#"width="190.0""#));
        assert!(svg.contains(r#"width="380.0""#));
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn empty_chart_is_valid() {
        assert!(bar_chart("none", &[]).starts_with("<svg"));
    }
}
