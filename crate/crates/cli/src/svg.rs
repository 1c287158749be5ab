//! Minimal native SVG line plots: axes, ticks, one polyline per series, and
//! a legend. No plotting dependency; the output is deterministic.

use crate::report::PlotSpec;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 520.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 30.0;
const MARGIN_TOP: f64 = 50.0;
const MARGIN_BOTTOM: f64 = 60.0;

const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

pub fn render(spec: &PlotSpec) -> String {
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    let (x_min, x_max) = padded_range(&spec.x);
    let mut all_y: Vec<f64> = Vec::new();
    for (_, ys) in &spec.series {
        all_y.extend_from_slice(ys);
    }
    let (y_min, y_max) = padded_range(&all_y);

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let to_px = |x: f64, y: f64| -> (f64, f64) {
        (
            MARGIN_LEFT + (x - x_min) / (x_max - x_min) * plot_w,
            MARGIN_TOP + (1.0 - (y - y_min) / (y_max - y_min)) * plot_h,
        )
    };

    // Frame and ticks.
    svg.push_str(&format!(
        "<rect x=\"{MARGIN_LEFT}\" y=\"{MARGIN_TOP}\" width=\"{plot_w}\" height=\"{plot_h}\" \
         fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n"
    ));
    for i in 0..=5 {
        let fx = x_min + (x_max - x_min) * i as f64 / 5.0;
        let (px, _) = to_px(fx, y_min);
        svg.push_str(&format!(
            "<line x1=\"{px:.2}\" y1=\"{:.2}\" x2=\"{px:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
            MARGIN_TOP + plot_h,
            MARGIN_TOP + plot_h + 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{px:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
            MARGIN_TOP + plot_h + 20.0,
            tick_label(fx)
        ));
        let fy = y_min + (y_max - y_min) * i as f64 / 5.0;
        let (_, py) = to_px(x_min, fy);
        svg.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{py:.2}\" x2=\"{MARGIN_LEFT}\" y2=\"{py:.2}\" stroke=\"black\"/>\n",
            MARGIN_LEFT - 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"end\">{}</text>\n",
            MARGIN_LEFT - 8.0,
            py + 4.0,
            tick_label(fy)
        ));
    }

    // Series.
    for (idx, (label, ys)) in spec.series.iter().enumerate() {
        let color = COLORS[idx % COLORS.len()];
        let points: Vec<String> = spec
            .x
            .iter()
            .zip(ys)
            .map(|(&x, &y)| {
                let (px, py) = to_px(x, y);
                format!("{px:.2},{py:.2}")
            })
            .collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            points.join(" ")
        ));
        let ly = MARGIN_TOP + 16.0 + 18.0 * idx as f64;
        let lx = MARGIN_LEFT + plot_w - 170.0;
        svg.push_str(&format!(
            "<line x1=\"{lx:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
            ly - 4.0,
            lx + 24.0,
            ly - 4.0
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{ly:.2}\" font-size=\"12\">{}</text>\n",
            lx + 30.0,
            escape(label)
        ));
    }

    // Labels and title.
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"24\" font-size=\"15\" text-anchor=\"middle\">{}</text>\n",
        WIDTH / 2.0,
        escape(&spec.title)
    ));
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\">{}</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 16.0,
        escape(&spec.x_label)
    ));
    svg.push_str(&format!(
        "<text x=\"20\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\" \
         transform=\"rotate(-90 20 {:.2})\">{}</text>\n",
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0,
        escape(&spec.y_label)
    ));
    svg.push_str("</svg>\n");
    svg
}

fn padded_range(values: &[f64]) -> (f64, f64) {
    let mut min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !min.is_finite() || !max.is_finite() {
        return (0.0, 1.0);
    }
    if (max - min).abs() < 1e-300 {
        min -= 0.5;
        max += 0.5;
    }
    let pad = 0.05 * (max - min);
    (min - pad, max + pad)
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let magnitude = v.abs();
    if (1e-3..1e4).contains(&magnitude) {
        format!("{v:.4}")
    } else {
        format!("{v:.2e}")
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_well_formed_svg() {
        let spec = PlotSpec {
            title: "test".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            x: vec![0.0, 1.0, 2.0],
            series: vec![("a".into(), vec![0.0, 1.0, 0.5])],
        };
        let svg = render(&spec);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("polyline"));
        // Deterministic output.
        assert_eq!(svg, render(&spec));
    }
}
