//! Static SVG charts: one trend line chart per metric (one line per
//! subsystem across windows) and per-organization box plots of the
//! affiliation review ratios.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::metrics::{CellMetrics, HomophilyReport};

use super::slug;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 48.0;
const BOTTOM: f64 = 56.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22",
    "#17becf",
];

#[derive(Debug, Clone)]
pub struct ChartOptions {
    /// Organizations to draw box plots for; `None` picks the largest ones.
    pub organizations: Option<Vec<String>>,
    pub top_organizations: usize,
}

impl Default for ChartOptions {
    fn default() -> Self {
        ChartOptions {
            organizations: None,
            top_organizations: 10,
        }
    }
}

/// Five-number summary with 1.5×IQR whiskers. Quartiles interpolate
/// linearly between order statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxStats {
    pub n: usize,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: Vec<f64>,
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn box_stats(values: &[f64]) -> Option<BoxStats> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile(&sorted, 0.25);
    let median = quantile(&sorted, 0.5);
    let q3 = quantile(&sorted, 0.75);
    let iqr = q3 - q1;
    let (low_fence, high_fence) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let inside: Vec<f64> = sorted
        .iter()
        .copied()
        .filter(|v| (low_fence..=high_fence).contains(v))
        .collect();
    Some(BoxStats {
        n: sorted.len(),
        q1,
        median,
        q3,
        whisker_low: inside.first().copied().unwrap_or(q1),
        whisker_high: inside.last().copied().unwrap_or(q3),
        outliers: sorted
            .iter()
            .copied()
            .filter(|v| !(low_fence..=high_fence).contains(v))
            .collect(),
    })
}

/// Upper axis bound and tick step: a 1/2/5 × 10^k step with about five
/// ticks covering `max`.
fn axis(max: f64) -> (f64, f64) {
    if max.is_nan() || max <= 0.0 {
        return (1.0, 0.2);
    }
    let raw = max / 5.0;
    let magnitude = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * magnitude)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * magnitude);
    ((max / step).ceil() * step, step)
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Frame {
    svg: String,
    y_max: f64,
}

impl Frame {
    fn new(title: &str, y_label: &str, y_max_data: f64) -> Self {
        let (y_max, step) = axis(y_max_data);
        let mut svg = String::new();
        let _ = writeln!(
            svg,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">"
        );
        let _ = writeln!(svg, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>",
            WIDTH / 2.0,
            escape(title)
        );
        let mut frame = Frame { svg, y_max };
        let mut tick = 0.0;
        while tick <= y_max + step * 1e-9 {
            let y = frame.y(tick);
            let _ = writeln!(
                frame.svg,
                "<line x1=\"{LEFT:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#e0e0e0\"/>",
                WIDTH - RIGHT
            );
            let _ = writeln!(
                frame.svg,
                "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>",
                LEFT - 6.0,
                y + 4.0,
                trim_number(tick)
            );
            tick += step;
        }
        let _ = writeln!(
            frame.svg,
            "<line x1=\"{LEFT:.2}\" y1=\"{TOP:.2}\" x2=\"{LEFT:.2}\" y2=\"{:.2}\" stroke=\"black\"/>",
            HEIGHT - BOTTOM
        );
        let _ = writeln!(
            frame.svg,
            "<line x1=\"{LEFT:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"black\"/>",
            HEIGHT - BOTTOM,
            WIDTH - RIGHT,
            HEIGHT - BOTTOM
        );
        let _ = writeln!(
            frame.svg,
            "<text transform=\"translate(16 {:.2}) rotate(-90)\" text-anchor=\"middle\">{}</text>",
            TOP + (HEIGHT - TOP - BOTTOM) / 2.0,
            escape(y_label)
        );
        frame
    }

    fn y(&self, value: f64) -> f64 {
        let plot = HEIGHT - TOP - BOTTOM;
        HEIGHT - BOTTOM - value / self.y_max * plot
    }

    fn x_slot(count: usize, idx: usize) -> f64 {
        let plot = WIDTH - LEFT - RIGHT;
        let slot = plot / count.max(1) as f64;
        LEFT + slot * (idx as f64 + 0.5)
    }

    fn x_label(&mut self, x: f64, text: &str) {
        let _ = writeln!(
            self.svg,
            "<text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>",
            HEIGHT - BOTTOM + 18.0,
            escape(text)
        );
    }

    fn finish(mut self) -> String {
        self.svg.push_str("</svg>\n");
        self.svg
    }
}

fn trim_number(v: f64) -> String {
    let s = format!("{v:.2}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn line_chart(report: &HomophilyReport, title: &str, y_label: &str, value: impl Fn(&CellMetrics) -> Option<f64>) -> String {
    let series: Vec<(String, Vec<Option<f64>>)> = report
        .subsystems
        .iter()
        .map(|s| {
            let values = report
                .windows
                .iter()
                .map(|w| report.cell(s, w).and_then(&value))
                .collect();
            (s.to_string(), values)
        })
        .collect();
    let max = series
        .iter()
        .flat_map(|(_, v)| v.iter().flatten())
        .fold(0.0f64, |a, b| a.max(*b));

    let mut frame = Frame::new(title, y_label, max);
    let n = report.windows.len();
    for (idx, w) in report.windows.iter().enumerate() {
        frame.x_label(Frame::x_slot(n, idx), w);
    }

    for (line_no, (name, values)) in series.iter().enumerate() {
        let color = PALETTE[line_no % PALETTE.len()];
        let mut segments: Vec<Vec<(f64, f64)>> = vec![Vec::new()];
        for (idx, v) in values.iter().enumerate() {
            match v {
                Some(v) => segments.last_mut().unwrap().push((Frame::x_slot(n, idx), frame.y(*v))),
                None => segments.push(Vec::new()),
            }
        }
        for seg in segments.iter().filter(|s| s.len() > 1) {
            let points: Vec<String> = seg.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            let _ = writeln!(
                frame.svg,
                "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"/>",
                points.join(" ")
            );
        }
        for (x, y) in segments.iter().flatten() {
            let _ = writeln!(frame.svg, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3\" fill=\"{color}\"/>");
        }
        let ly = TOP + 8.0 + 20.0 * line_no as f64;
        let lx = WIDTH - RIGHT + 16.0;
        let _ = writeln!(
            frame.svg,
            "<line x1=\"{lx:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" stroke=\"{color}\" stroke-width=\"2\"/>",
            lx + 20.0
        );
        let _ = writeln!(
            frame.svg,
            "<text x=\"{:.2}\" y=\"{:.2}\">{}</text>",
            lx + 26.0,
            ly + 4.0,
            escape(name)
        );
    }
    frame.finish()
}

fn box_chart(title: &str, y_label: &str, groups: &[(String, Vec<f64>)]) -> String {
    let max = groups
        .iter()
        .flat_map(|(_, v)| v.iter())
        .fold(0.0f64, |a, b| a.max(*b));
    let mut frame = Frame::new(title, y_label, max);
    let n = groups.len();
    let half = ((WIDTH - LEFT - RIGHT) / n.max(1) as f64 * 0.3).min(30.0);
    for (idx, (label, values)) in groups.iter().enumerate() {
        let x = Frame::x_slot(n, idx);
        frame.x_label(x, label);
        let Some(b) = box_stats(values) else { continue };
        let color = PALETTE[idx % PALETTE.len()];
        let (yq1, ymed, yq3) = (frame.y(b.q1), frame.y(b.median), frame.y(b.q3));
        let (ylo, yhi) = (frame.y(b.whisker_low), frame.y(b.whisker_high));
        let _ = writeln!(
            frame.svg,
            "<line x1=\"{x:.2}\" y1=\"{ylo:.2}\" x2=\"{x:.2}\" y2=\"{yq1:.2}\" stroke=\"black\"/>"
        );
        let _ = writeln!(
            frame.svg,
            "<line x1=\"{x:.2}\" y1=\"{yq3:.2}\" x2=\"{x:.2}\" y2=\"{yhi:.2}\" stroke=\"black\"/>"
        );
        for yw in [ylo, yhi] {
            let _ = writeln!(
                frame.svg,
                "<line x1=\"{:.2}\" y1=\"{yw:.2}\" x2=\"{:.2}\" y2=\"{yw:.2}\" stroke=\"black\"/>",
                x - half / 2.0,
                x + half / 2.0
            );
        }
        let _ = writeln!(
            frame.svg,
            "<rect x=\"{:.2}\" y=\"{yq3:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{color}\" fill-opacity=\"0.35\" stroke=\"black\"/>",
            x - half,
            2.0 * half,
            (yq1 - yq3).max(0.0)
        );
        let _ = writeln!(
            frame.svg,
            "<line x1=\"{:.2}\" y1=\"{ymed:.2}\" x2=\"{:.2}\" y2=\"{ymed:.2}\" stroke=\"black\" stroke-width=\"2\"/>",
            x - half,
            x + half
        );
        for o in &b.outliers {
            let _ = writeln!(
                frame.svg,
                "<circle cx=\"{x:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"none\" stroke=\"black\"/>",
                frame.y(*o)
            );
        }
    }
    frame.finish()
}

fn selected_organizations(report: &HomophilyReport, opts: &ChartOptions) -> Vec<String> {
    if let Some(list) = &opts.organizations {
        return list.clone();
    }
    let mut members: BTreeMap<String, usize> = BTreeMap::new();
    for m in report.cells.iter().filter_map(|c| c.metrics.as_ref()) {
        for (org, stats) in &m.affiliation_ratio {
            *members.entry(org.clone()).or_default() += stats.n;
        }
    }
    let mut ranked: Vec<(String, usize)> = members.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked
        .into_iter()
        .take(opts.top_organizations)
        .map(|(org, _)| org)
        .collect()
}

/// Renders every chart as `(file name, svg text)`. Output is a pure
/// function of the report and options.
pub fn emit_svg_charts(report: &HomophilyReport, opts: &ChartOptions) -> Vec<(String, String)> {
    let mut charts = vec![
        (
            "trend_node_count.svg".to_string(),
            line_chart(report, "Number of nodes", "nodes", |m| Some(m.node_count as f64)),
        ),
        (
            "trend_maintainer_share.svg".to_string(),
            line_chart(report, "Share of maintainers (%)", "%", |m| m.maintainer_share_pct),
        ),
        (
            "trend_maintainer_ratio.svg".to_string(),
            line_chart(report, "Mean maintainer review ratio (%)", "%", |m| m.maintainer_ratio.mean()),
        ),
    ];

    for org in selected_organizations(report, opts) {
        let mut means = Vec::new();
        let mut sds = Vec::new();
        for subsystem in &report.subsystems {
            let stats: Vec<_> = report
                .windows
                .iter()
                .filter_map(|w| report.cell(subsystem, w))
                .filter_map(|m| m.affiliation_ratio.get(&org))
                .collect();
            means.push((
                subsystem.to_string(),
                stats.iter().filter_map(|s| s.mean()).collect(),
            ));
            sds.push((
                subsystem.to_string(),
                stats.iter().filter(|s| !s.degenerate).map(|s| s.sd_pct).collect(),
            ));
        }
        let name = slug(&org);
        charts.push((
            format!("affiliation_{name}_mean.svg"),
            box_chart(&format!("{org}: mean review ratio (%) across windows"), "%", &means),
        ));
        charts.push((
            format!("affiliation_{name}_sd.svg"),
            box_chart(&format!("{org}: sd of review ratios (%) across windows"), "%", &sds),
        ));
    }
    charts
}
