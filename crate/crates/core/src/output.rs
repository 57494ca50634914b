//! Text output: CSV documents and simple SVG line charts.
//!
//! Both emitters are pure string builders; the CLI decides where the bytes
//! go. CSV files open with `#` comment lines that record the fully resolved
//! configuration, so any output file can be reproduced from its own header.
//! Floating-point data cells use fixed 6-decimal formatting to keep files
//! byte-stable across runs and platforms.
//!
//! The SVG chart is deliberately minimal — axes, ticks, polylines, legend,
//! and an optional horizontal baseline rule — and is purely presentational.

use crate::experiment::{NormalizedSweep, OptimalSiRow, SweepResult};

/// Incremental CSV document builder.
///
/// Comment lines start with `# `; additional `# series: <label>` markers
/// separate blocks of rows that share one column header.
#[derive(Debug, Default)]
pub struct CsvBuilder {
    out: String,
}

impl CsvBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn comment(&mut self, text: &str) {
        self.out.push_str("# ");
        self.out.push_str(text);
        self.out.push('\n');
    }

    /// Marks the start of a named series block.
    pub fn series(&mut self, label: &str) {
        self.comment(&format!("series: {label}"));
    }

    /// Writes the column header line.
    pub fn columns(&mut self, names: &str) {
        self.out.push_str(names);
        self.out.push('\n');
    }

    /// Rows of an aggregated sweep: `param,mean_total_reward,stderr,reps`.
    pub fn sweep_rows(&mut self, sweep: &SweepResult) {
        for row in &sweep.rows {
            self.out.push_str(&format!(
                "{:.6},{:.6},{:.6},{}\n",
                row.param, row.mean_total_reward, row.stderr, row.reps
            ));
        }
    }

    /// Rows of a normalized sweep: `param,normalized_reward`.
    pub fn normalized_rows(&mut self, sweep: &NormalizedSweep) {
        for row in &sweep.rows {
            self.out
                .push_str(&format!("{:.6},{:.6}\n", row.param, row.normalized));
        }
    }

    /// Rows of an optimal-search-interval curve: `difficulty,optimal_si`.
    pub fn optimal_si_rows(&mut self, rows: &[OptimalSiRow]) {
        for row in rows {
            self.out
                .push_str(&format!("{:.6},{}\n", row.difficulty, row.optimal_si));
        }
    }

    pub fn into_string(self) -> String {
        self.out
    }
}

/// Chart frame: title, axis labels, and an optional horizontal rule (drawn
/// dashed, e.g. at a baseline strategy's mean).
#[derive(Debug, Clone)]
pub struct ChartSpec {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub baseline: Option<f64>,
}

/// One polyline of the chart.
#[derive(Debug, Clone)]
pub struct ChartSeries {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 160.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 55.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

fn escape_xml(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn fmt_tick(v: f64) -> String {
    if v.abs() >= 100.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

/// Renders a self-contained SVG line chart. Needs at least one series and at
/// least two points in every series.
pub fn svg_line_chart(spec: &ChartSpec, series: &[ChartSeries]) -> String {
    assert!(!series.is_empty(), "chart needs at least one series");
    for s in series {
        assert!(s.points.len() >= 2, "series {:?} has fewer than 2 points", s.label);
    }

    let xs = series.iter().flat_map(|s| s.points.iter().map(|p| p.0));
    let ys = series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.1))
        .chain(spec.baseline);
    let (mut x_min, mut x_max) = min_max(xs);
    let (mut y_min, mut y_max) = min_max(ys);
    if x_min == x_max {
        x_min -= 0.5;
        x_max += 0.5;
    }
    if y_min == y_max {
        y_min -= 1.0;
        y_max += 1.0;
    }

    let sx = |x: f64| MARGIN_LEFT + (x - x_min) / (x_max - x_min) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT);
    let sy = |y: f64| MARGIN_TOP + (1.0 - (y - y_min) / (y_max - y_min)) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str(&format!(
        "  <rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));
    svg.push_str(&format!(
        "  <text x=\"{:.2}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"16\">{}</text>\n",
        (MARGIN_LEFT + WIDTH - MARGIN_RIGHT) / 2.0,
        escape_xml(&spec.title)
    ));

    // Grid, ticks, and tick labels.
    for i in 0..=4 {
        let fraction = i as f64 / 4.0;
        let x = x_min + fraction * (x_max - x_min);
        let y = y_min + fraction * (y_max - y_min);
        let px = sx(x);
        let py = sy(y);
        svg.push_str(&format!(
            "  <line x1=\"{px:.2}\" y1=\"{:.2}\" x2=\"{px:.2}\" y2=\"{:.2}\" stroke=\"#dddddd\"/>\n",
            sy(y_min),
            sy(y_max)
        ));
        svg.push_str(&format!(
            "  <line x1=\"{:.2}\" y1=\"{py:.2}\" x2=\"{:.2}\" y2=\"{py:.2}\" stroke=\"#dddddd\"/>\n",
            sx(x_min),
            sx(x_max)
        ));
        svg.push_str(&format!(
            "  <text x=\"{px:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
             font-size=\"11\">{}</text>\n",
            sy(y_min) + 18.0,
            fmt_tick(x)
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" font-family=\"sans-serif\" \
             font-size=\"11\">{}</text>\n",
            sx(x_min) - 6.0,
            py + 4.0,
            fmt_tick(y)
        ));
    }

    // Axes.
    svg.push_str(&format!(
        "  <line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
        sx(x_min),
        sy(y_min),
        sx(x_max),
        sy(y_min)
    ));
    svg.push_str(&format!(
        "  <line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
        sx(x_min),
        sy(y_min),
        sx(x_min),
        sy(y_max)
    ));
    svg.push_str(&format!(
        "  <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"13\">{}</text>\n",
        (MARGIN_LEFT + WIDTH - MARGIN_RIGHT) / 2.0,
        HEIGHT - 12.0,
        escape_xml(&spec.x_label)
    ));
    svg.push_str(&format!(
        "  <text x=\"18\" y=\"{:.2}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"13\" transform=\"rotate(-90 18 {:.2})\">{}</text>\n",
        (MARGIN_TOP + HEIGHT - MARGIN_BOTTOM) / 2.0,
        (MARGIN_TOP + HEIGHT - MARGIN_BOTTOM) / 2.0,
        escape_xml(&spec.y_label)
    ));

    // Optional baseline rule.
    if let Some(baseline) = spec.baseline {
        let py = sy(baseline);
        svg.push_str(&format!(
            "  <line x1=\"{:.2}\" y1=\"{py:.2}\" x2=\"{:.2}\" y2=\"{py:.2}\" stroke=\"#555555\" \
             stroke-dasharray=\"6 4\"/>\n",
            sx(x_min),
            sx(x_max)
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" \
             fill=\"#555555\">baseline {}</text>\n",
            sx(x_min) + 4.0,
            py - 4.0,
            fmt_tick(baseline)
        ));
    }

    // Series polylines and legend.
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let points: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        svg.push_str(&format!(
            "  <polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            points.join(" ")
        ));
        let ly = MARGIN_TOP + 14.0 * i as f64;
        svg.push_str(&format!(
            "  <line x1=\"{:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" stroke=\"{color}\" \
             stroke-width=\"2\"/>\n",
            WIDTH - MARGIN_RIGHT + 10.0,
            WIDTH - MARGIN_RIGHT + 30.0
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
            WIDTH - MARGIN_RIGHT + 36.0,
            ly + 4.0,
            escape_xml(&s.label)
        ));
    }

    svg.push_str("</svg>\n");
    svg
}

fn min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{NormalizedRow, SweepRow};

    fn sample_sweep() -> SweepResult {
        SweepResult {
            rows: vec![
                SweepRow {
                    param: 1.0,
                    mean_total_reward: 1490.25,
                    stderr: 0.851,
                    reps: 1000,
                },
                SweepRow {
                    param: 2.0,
                    mean_total_reward: 1523.5,
                    stderr: 0.9,
                    reps: 1000,
                },
            ],
        }
    }

    #[test]
    fn csv_layout_is_stable() {
        let mut csv = CsvBuilder::new();
        csv.comment("seed: 0");
        csv.columns("param,mean_total_reward,stderr,reps");
        csv.sweep_rows(&sample_sweep());
        assert_eq!(
            csv.into_string(),
            "# seed: 0\n\
             param,mean_total_reward,stderr,reps\n\
             1.000000,1490.250000,0.851000,1000\n\
             2.000000,1523.500000,0.900000,1000\n"
        );
    }

    #[test]
    fn csv_series_blocks_and_other_schemas() {
        let mut csv = CsvBuilder::new();
        csv.columns("param,normalized_reward");
        csv.series("T=10");
        csv.normalized_rows(&NormalizedSweep {
            rows: vec![NormalizedRow {
                param: 1.0,
                normalized: 0.25,
            }],
            degenerate: false,
        });
        csv.series("T=20");
        csv.normalized_rows(&NormalizedSweep {
            rows: vec![NormalizedRow {
                param: 1.0,
                normalized: 1.0,
            }],
            degenerate: false,
        });
        let text = csv.into_string();
        assert_eq!(text.matches("# series:").count(), 2);
        assert!(text.contains("1.000000,0.250000\n"));

        let mut csv = CsvBuilder::new();
        csv.columns("difficulty,optimal_si");
        csv.optimal_si_rows(&[OptimalSiRow {
            difficulty: 0.2,
            optimal_si: 5,
        }]);
        assert!(csv.into_string().ends_with("0.200000,5\n"));
    }

    fn chart_spec(baseline: Option<f64>) -> ChartSpec {
        ChartSpec {
            title: "demo".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            baseline,
        }
    }

    fn line(label: &str, points: Vec<(f64, f64)>) -> ChartSeries {
        ChartSeries {
            label: label.into(),
            points,
        }
    }

    #[test]
    fn svg_is_balanced_and_complete() {
        let svg = svg_line_chart(
            &chart_spec(Some(1500.0)),
            &[
                line("mixed", vec![(1.0, 1400.0), (2.0, 1600.0), (3.0, 1550.0)]),
                line("other", vec![(1.0, 1450.0), (3.0, 1500.0)]),
            ],
        );
        assert!(svg.starts_with("<svg "));
        assert!(svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<svg ").count(), 1);
        assert_eq!(svg.matches("</svg>").count(), 1);
        assert_eq!(svg.matches("<polyline").count(), 2);
        for tag in ["<rect", "<line", "<text"] {
            assert!(svg.contains(tag), "{tag} missing");
        }
        // Every element except the root is a single self-contained line, so
        // line-level checks amount to well-formedness for this generator.
        for line in svg.lines() {
            let line = line.trim();
            let closed = line == "</svg>"
                || line.starts_with("<svg ")
                || line.ends_with("/>")
                || (line.starts_with("<text") && line.ends_with("</text>"));
            assert!(closed, "unbalanced element: {line}");
        }
        assert!(svg.contains("stroke-dasharray"), "baseline rule missing");
        assert!(svg.contains("baseline 1500"));
        assert!(!svg.contains("NaN"));
    }

    #[test]
    fn svg_escapes_labels_and_survives_flat_data() {
        let svg = svg_line_chart(
            &chart_spec(None),
            &[line("a & b <c>", vec![(1.0, 7.0), (2.0, 7.0)])],
        );
        assert!(svg.contains("a &amp; b &lt;c&gt;"));
        assert!(!svg.contains("a & b"));
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
    }
}
