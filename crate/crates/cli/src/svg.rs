//! Minimal self-contained SVG line charts (log-log) for per-radius estimates.
//!
//! The charts exist to make one distinction visible without tooling: a
//! constant that stabilizes as the radius shrinks versus one that decays to
//! zero (the degenerate fixtures).

use eblab_core::reglab::Estimate;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 140.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// Log-log line chart of per-radius estimates. Vacuous or nonpositive
/// entries are skipped; a series with no plottable points is listed in the
/// legend as vacuous.
pub fn estimate_chart(
    title: &str,
    y_label: &str,
    series: &[(&str, &Vec<(f64, Estimate)>)],
) -> String {
    let mut plottable: Vec<(&str, Vec<(f64, f64)>)> = Vec::new();
    for (name, data) in series {
        let pts: Vec<(f64, f64)> = data
            .iter()
            .filter_map(|(r, e)| match e {
                Estimate::Value(v) if *v > 0.0 && *r > 0.0 => Some((r.log10(), v.log10())),
                _ => None,
            })
            .collect();
        plottable.push((name, pts));
    }

    let all: Vec<(f64, f64)> = plottable
        .iter()
        .flat_map(|(_, p)| p.iter().copied())
        .collect();
    let (x_min, x_max, y_min, y_max) = bounds(&all);

    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let sx = |x: f64| MARGIN_L + (x - x_min) / (x_max - x_min) * plot_w;
    let sy = |y: f64| MARGIN_T + (1.0 - (y - y_min) / (y_max - y_min)) * plot_h;

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    out.push_str(&format!(
        "<text x=\"{}\" y=\"22\" font-family=\"monospace\" font-size=\"14\">{}</text>\n",
        MARGIN_L,
        xml_escape(title)
    ));
    // axes
    out.push_str(&format!(
        "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n",
        MARGIN_L,
        MARGIN_T,
        MARGIN_T + plot_h
    ));
    out.push_str(&format!(
        "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n",
        MARGIN_L,
        MARGIN_T + plot_h,
        MARGIN_L + plot_w
    ));
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"11\">log10 radius: [{:.3}, {:.3}]</text>\n",
        MARGIN_L,
        HEIGHT - 14.0,
        x_min,
        x_max
    ));
    out.push_str(&format!(
        "<text x=\"8\" y=\"{}\" font-family=\"monospace\" font-size=\"11\" \
         transform=\"rotate(-90 8 {0})\">log10 {}: [{:.3}, {:.3}]</text>\n",
        MARGIN_T + plot_h / 2.0,
        xml_escape(y_label),
        y_min,
        y_max
    ));

    for (idx, (name, pts)) in plottable.iter().enumerate() {
        let color = COLORS[idx % COLORS.len()];
        let legend_y = MARGIN_T + 16.0 * idx as f64 + 10.0;
        if pts.is_empty() {
            out.push_str(&format!(
                "<text x=\"{}\" y=\"{legend_y}\" font-family=\"monospace\" font-size=\"11\" \
                 fill=\"{color}\">{} (vacuous)</text>\n",
                MARGIN_L + plot_w + 8.0,
                xml_escape(name)
            ));
            continue;
        }
        let path: Vec<String> = pts
            .iter()
            .map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y)))
            .collect();
        out.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            path.join(" ")
        ));
        for (x, y) in pts {
            out.push_str(&format!(
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>\n",
                sx(*x),
                sy(*y)
            ));
        }
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{legend_y}\" font-family=\"monospace\" font-size=\"11\" \
             fill=\"{color}\">{}</text>\n",
            MARGIN_L + plot_w + 8.0,
            xml_escape(name)
        ));
    }
    out.push_str("</svg>\n");
    out
}

fn bounds(points: &[(f64, f64)]) -> (f64, f64, f64, f64) {
    if points.is_empty() {
        return (-1.0, 1.0, -1.0, 1.0);
    }
    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for &(x, y) in points {
        x_min = x_min.min(x);
        x_max = x_max.max(x);
        y_min = y_min.min(y);
        y_max = y_max.max(y);
    }
    if (x_max - x_min).abs() < 1e-12 {
        x_min -= 0.5;
        x_max += 0.5;
    }
    if (y_max - y_min).abs() < 1e-12 {
        y_min -= 0.5;
        y_max += 0.5;
    }
    (x_min, x_max, y_min, y_max)
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
