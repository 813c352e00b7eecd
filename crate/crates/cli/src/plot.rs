//! `plot`: accuracy-over-time SVG per scenario, one polyline per approach.

use std::fmt::Write;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 12] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
    "#393b79", "#637939",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

struct Frame {
    len: usize,
}

impl Frame {
    fn x(&self, index: f64) -> f64 {
        let span = (self.len.max(2) - 1) as f64;
        LEFT + (WIDTH - LEFT - RIGHT) * index / span
    }

    /// Values are clamped to [0, 1].
    fn y(&self, value: f64) -> f64 {
        TOP + (HEIGHT - TOP - BOTTOM) * (1.0 - value.clamp(0.0, 1.0))
    }
}

/// Renders mean accuracy curves; `drift_points` become vertical rules.
pub fn render_svg(title: &str, y_label: &str, curves: &[(String, Vec<f64>)], drift_points: &[usize]) -> String {
    let len = curves.iter().map(|(_, c)| c.len()).max().unwrap_or(0);
    let f = Frame { len };
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{LEFT}" y="18" font-size="14">{}</text>"#, escape(title));

    // axes and y ticks
    let (x0, x1, y0, y1) = (f.x(0.0), f.x((len.max(2) - 1) as f64), f.y(0.0), f.y(1.0));
    let _ = writeln!(svg, r#"<g class="axes" stroke="black">"#);
    let _ = writeln!(svg, r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y0:.2}"/>"#);
    let _ = writeln!(svg, r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x0:.2}" y2="{y1:.2}"/>"#);
    let _ = writeln!(svg, "</g>");
    for tick in 0..=5 {
        let v = tick as f64 / 5.0;
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{v:.1}</text>"#,
            x0 - 6.0,
            f.y(v) + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">target example index (0–{})</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 15.0,
        len.saturating_sub(1)
    );
    let _ = writeln!(
        svg,
        r#"<text transform="translate(16 {:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
        (y0 + y1) / 2.0,
        escape(y_label)
    );

    for &d in drift_points {
        let x = f.x(d as f64);
        let _ = writeln!(
            svg,
            r#"<line class="drift" data-index="{d}" x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{y1:.2}" stroke="gray" stroke-dasharray="4 3"/>"#
        );
    }

    for (i, (name, curve)) in curves.iter().enumerate() {
        let points: Vec<String> = curve
            .iter()
            .enumerate()
            .map(|(t, &v)| format!("{:.2},{:.2}", f.x(t as f64), f.y(v)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline data-approach="{}" fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
            escape(name),
            PALETTE[i % PALETTE.len()],
            points.join(" ")
        );
    }

    let lx = WIDTH - RIGHT + 15.0;
    let _ = writeln!(svg, r#"<g class="legend">"#);
    for (i, (name, _)) in curves.iter().enumerate() {
        let ly = TOP + 10.0 + 18.0 * i as f64;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{}" stroke-width="3"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 20.0,
            PALETTE[i % PALETTE.len()],
            lx + 26.0,
            ly + 4.0,
            escape(name)
        );
    }
    let _ = writeln!(svg, "</g>");
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structure() {
        let curves = vec![
            ("a".to_string(), vec![0.5, 0.6, 0.7]),
            ("b<&>".to_string(), vec![0.4, 0.3, 0.2]),
        ];
        let svg = render_svg("t", "accuracy", &curves, &[]);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches(r#"class="legend""#).count(), 1);
        assert!(svg.contains("b&lt;&amp;&gt;"));
        assert!(!svg.contains(r#"class="drift""#));
    }

    #[test]
    fn drift_rule_position() {
        let curve = vec![0.5; 201];
        let svg = render_svg("t", "accuracy", &[("a".into(), curve)], &[100]);
        let f = Frame { len: 201 };
        assert!(svg.contains(&format!(r#"data-index="100" x1="{:.2}""#, f.x(100.0))));
        // halfway along the plotting area
        assert!((f.x(100.0) - (LEFT + (WIDTH - LEFT - RIGHT) / 2.0)).abs() < 1e-9);
    }

    #[test]
    fn values_are_clamped() {
        let f = Frame { len: 3 };
        assert_eq!(f.y(1.7), f.y(1.0));
        assert_eq!(f.y(-0.2), f.y(0.0));
        let svg = render_svg("t", "accuracy", &[("a".into(), vec![-1.0, 2.0])], &[]);
        let points = svg.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
        for p in points.split(' ') {
            let y: f64 = p.split(',').nth(1).unwrap().parse().unwrap();
            assert!((f.y(1.0)..=f.y(0.0)).contains(&y));
        }
    }
}
