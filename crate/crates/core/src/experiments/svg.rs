use std::fmt::Write;

use super::BoxStats;

const BOX_SPACING: f64 = 70.0;
const BOX_WIDTH: f64 = 36.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 60.0;
const PLOT_HEIGHT: f64 = 320.0;

/// Box-and-whisker figure with one box per `(H, n)` group and a dashed line
/// at each true `H`. Output depends only on the inputs and uses fixed
/// precision, so identical statistics give identical bytes.
pub fn render_boxplot_svg(stats: &[BoxStats], title: &str) -> String {
    let width = MARGIN_LEFT + MARGIN_RIGHT + BOX_SPACING * stats.len().max(1) as f64;
    let height = MARGIN_TOP + PLOT_HEIGHT + MARGIN_BOTTOM;

    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for b in stats {
        for v in [b.whisker_lo, b.whisker_hi, b.hurst].into_iter().chain(b.outliers.iter().copied()) {
            if v.is_finite() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
    }
    if !lo.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    let pad = if hi > lo { 0.08 * (hi - lo) } else { 0.05 };
    let (lo, hi) = (lo - pad, hi + pad);
    let y_of = |v: f64| MARGIN_TOP + (hi - v) / (hi - lo) * PLOT_HEIGHT;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{width:.0}" height="{height:.0}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        width / 2.0,
        escape(title)
    );

    // axis and ticks
    let x_axis_end = width - MARGIN_RIGHT;
    let _ = writeln!(
        s,
        r#"<line x1="{MARGIN_LEFT:.1}" y1="{MARGIN_TOP:.1}" x2="{MARGIN_LEFT:.1}" y2="{:.1}" stroke="black"/>"#,
        MARGIN_TOP + PLOT_HEIGHT
    );
    for i in 0..=5 {
        let v = lo + (hi - lo) * i as f64 / 5.0;
        let y = y_of(v);
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="{y:.2}" x2="{MARGIN_LEFT:.1}" y2="{y:.2}" stroke="black"/><text x="{:.1}" y="{:.2}" text-anchor="end">{v:.3}</text>"#,
            MARGIN_LEFT - 5.0,
            MARGIN_LEFT - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.1}" transform="rotate(-90 16 {:.1})" text-anchor="middle">sequential scale estimate</text>"#,
        MARGIN_TOP + PLOT_HEIGHT / 2.0,
        MARGIN_TOP + PLOT_HEIGHT / 2.0
    );

    let mut drawn_h: Vec<f64> = Vec::new();
    for b in stats {
        if drawn_h.contains(&b.hurst) {
            continue;
        }
        drawn_h.push(b.hurst);
        let y = y_of(b.hurst);
        let _ = writeln!(
            s,
            r#"<line x1="{MARGIN_LEFT:.1}" y1="{y:.2}" x2="{x_axis_end:.1}" y2="{y:.2}" stroke="red" stroke-dasharray="4 3"/>"#
        );
    }

    for (i, b) in stats.iter().enumerate() {
        let cx = MARGIN_LEFT + BOX_SPACING * (i as f64 + 0.5);
        let (x0, x1) = (cx - BOX_WIDTH / 2.0, cx + BOX_WIDTH / 2.0);
        let (yq1, yq3, ymed) = (y_of(b.q1), y_of(b.q3), y_of(b.median));
        let (ylo, yhi) = (y_of(b.whisker_lo), y_of(b.whisker_hi));
        let _ = writeln!(s, r#"<g class="box" data-hurst="{}" data-n="{}">"#, b.hurst, b.n);
        let _ = writeln!(
            s,
            r#"<line x1="{cx:.2}" y1="{yhi:.2}" x2="{cx:.2}" y2="{yq3:.2}" stroke="black"/><line x1="{cx:.2}" y1="{yq1:.2}" x2="{cx:.2}" y2="{ylo:.2}" stroke="black"/>"#
        );
        for y in [ylo, yhi] {
            let _ = writeln!(
                s,
                r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="black"/>"#,
                cx - BOX_WIDTH / 4.0,
                cx + BOX_WIDTH / 4.0
            );
        }
        let _ = writeln!(
            s,
            r##"<rect x="{x0:.2}" y="{yq3:.2}" width="{BOX_WIDTH:.2}" height="{:.2}" fill="#cfe0f3" stroke="black"/>"##,
            (yq1 - yq3).max(0.0)
        );
        let _ = writeln!(
            s,
            r#"<line x1="{x0:.2}" y1="{ymed:.2}" x2="{x1:.2}" y2="{ymed:.2}" stroke="black" stroke-width="2"/>"#
        );
        for &o in &b.outliers {
            let _ = writeln!(s, r#"<circle cx="{cx:.2}" cy="{:.2}" r="2.5" fill="none" stroke="black"/>"#, y_of(o));
        }
        let label_y = MARGIN_TOP + PLOT_HEIGHT + 18.0;
        let _ = writeln!(s, r#"<text x="{cx:.2}" y="{label_y:.1}" text-anchor="middle">n={}</text>"#, b.n);
        if drawn_h.len() > 1 {
            let _ = writeln!(
                s,
                r#"<text x="{cx:.2}" y="{:.1}" text-anchor="middle" font-size="10">H={}</text>"#,
                label_y + 14.0,
                b.hurst
            );
        }
        s.push_str("</g>\n");
    }
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_well_formed() {
        let stats: Vec<BoxStats> =
            (10..=12).map(|n| BoxStats::from_values(0.1, n, &[0.08, 0.1, 0.11, 0.12, 0.3]).unwrap()).collect();
        let a = render_boxplot_svg(&stats, "H <0.1>");
        let b = render_boxplot_svg(&stats, "H <0.1>");
        assert_eq!(a, b);
        assert!(a.starts_with("<svg"));
        assert!(a.trim_end().ends_with("</svg>"));
        assert_eq!(a.matches("class=\"box\"").count(), 3);
        assert!(a.contains("H &lt;0.1&gt;"));
        assert!(a.contains("<circle"));
    }

    #[test]
    fn degenerate_box_renders() {
        let stats = vec![BoxStats::from_values(0.1, 10, &[0.2]).unwrap()];
        let svg = render_boxplot_svg(&stats, "one");
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
        let empty = render_boxplot_svg(&[], "none");
        assert!(empty.contains("</svg>"));
    }
}
