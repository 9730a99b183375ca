//! Self-contained SVG regret plots: log-scaled horizon axis, linear regret
//! axis, one polyline per curve with its 95% band shaded underneath.

use std::fmt::Write as _;

use cab_core::engine::AggregateCurve;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn nice_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let nice = if norm < 1.5 {
        1.0
    } else if norm < 3.0 {
        2.0
    } else if norm < 7.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

pub fn render(curves: &[AggregateCurve], title: &str) -> String {
    let points = curves.iter().flat_map(|c| c.points.iter());
    let (mut x_min, mut x_max, mut y_max) = (f64::MAX, f64::MIN, 0.0f64);
    for p in points {
        let x = (p.checkpoint.max(1) as f64).log10();
        x_min = x_min.min(x);
        x_max = x_max.max(x);
        y_max = y_max.max(p.mean_regret + p.ci_halfwidth);
    }
    if x_max <= x_min {
        x_min -= 0.5;
        x_max += 0.5;
    }
    x_min = x_min.floor();
    x_max = x_max.ceil();
    if y_max <= 0.0 {
        y_max = 1.0;
    }
    let y_step = nice_step(y_max);
    let y_top = (y_max / y_step).ceil() * y_step;
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |t: u64| LEFT + ((t.max(1) as f64).log10() - x_min) / (x_max - x_min) * plot_w;
    let sy = |v: f64| TOP + plot_h - v.max(0.0) / y_top * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="16">{}</text>"#,
        LEFT + plot_w / 2.0,
        escape(title)
    );

    // Axes, grid, ticks.
    let _ = writeln!(svg, r##"<g stroke="#cccccc" stroke-width="1">"##);
    let mut decade = x_min as i32;
    while decade as f64 <= x_max {
        let x = LEFT + (decade as f64 - x_min) / (x_max - x_min) * plot_w;
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}"/>"#,
            TOP + plot_h
        );
        decade += 1;
    }
    let y_ticks = (y_top / y_step).round() as usize;
    for k in 0..=y_ticks {
        let y = sy(k as f64 * y_step);
        let _ = writeln!(
            svg,
            r#"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}"/>"#,
            LEFT + plot_w
        );
    }
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(svg, r##"<g fill="#333333">"##);
    let mut decade = x_min as i32;
    while decade as f64 <= x_max {
        let x = LEFT + (decade as f64 - x_min) / (x_max - x_min) * plot_w;
        let _ = writeln!(
            svg,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">1e{decade}</text>"#,
            TOP + plot_h + 18.0
        );
        decade += 1;
    }
    let decimals = (-y_step.log10().floor()).max(0.0) as usize;
    for k in 0..=y_ticks {
        let v = k as f64 * y_step;
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{v:.decimals$}</text>"#,
            LEFT - 6.0,
            sy(v) + 4.0,
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">horizon n (log scale)</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 16.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">mean pseudo-regret</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(
        svg,
        r##"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#333333"/>"##
    );

    for (i, curve) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut pts = curve.points.clone();
        pts.sort_by_key(|p| p.checkpoint);
        let upper: Vec<String> = pts
            .iter()
            .map(|p| {
                format!(
                    "{:.2},{:.2}",
                    sx(p.checkpoint),
                    sy(p.mean_regret + p.ci_halfwidth)
                )
            })
            .collect();
        let lower: Vec<String> = pts
            .iter()
            .rev()
            .map(|p| {
                format!(
                    "{:.2},{:.2}",
                    sx(p.checkpoint),
                    sy(p.mean_regret - p.ci_halfwidth)
                )
            })
            .collect();
        let _ = writeln!(
            svg,
            r#"<polygon class="band" points="{} {}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#,
            upper.join(" "),
            lower.join(" ")
        );
        let line: Vec<String> = pts
            .iter()
            .map(|p| format!("{:.2},{:.2}", sx(p.checkpoint), sy(p.mean_regret)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline class="curve" points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            line.join(" ")
        );
        let ly = TOP + 10.0 + 20.0 * i as f64;
        let lx = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="3"/>"#,
            lx + 20.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}">{}</text>"#,
            lx + 26.0,
            ly + 4.0,
            escape(&curve.policy)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::output::reference_curve;

    #[test]
    fn one_curve_one_band() {
        let svg = render(
            &[reference_curve("A<B", &[(10.0, 1.0), (1000.0, 3.0)])],
            "t",
        );
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert_eq!(svg.matches("class=\"band\"").count(), 1);
        assert!(svg.contains("A&lt;B"));
        assert!(svg.contains(r#"viewBox="0 0 800 600""#));
        assert!(!svg.contains("href"));
    }

    #[test]
    fn single_point_curve_renders() {
        let svg = render(&[reference_curve("x", &[(100.0, 0.0)])], "t");
        assert!(svg.contains("1e2"));
    }
}
