//! Static SVG rendering of EDA and comparison chart data.
//!
//! Output is a pure function of the input: coordinates are printed with fixed
//! precision and nothing time- or environment-dependent is embedded.

use std::fmt::Write;

use crate::eda::{BoxStats, CorrelationMatrix, EdaReport, GroupSummary, HistogramSpec, SectorShare};
use crate::metrics::ComparisonReport;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 70.0;

const PALETTE: [&str; 8] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#9c755f",
];

pub fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

struct Svg {
    body: String,
    width: f64,
    height: f64,
}

impl Svg {
    fn new(title: &str) -> Self {
        Self::sized(title, WIDTH, HEIGHT)
    }

    fn sized(title: &str, width: f64, height: f64) -> Self {
        let mut svg = Svg {
            body: String::new(),
            width,
            height,
        };
        svg.text(width / 2.0, 24.0, "middle", 16.0, title);
        svg
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str) {
        let _ = writeln!(
            self.body,
            r#"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
            w.max(0.0),
            h.max(0.0)
        );
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str) {
        let _ = writeln!(
            self.body,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{stroke}"/>"#
        );
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, size: f64, text: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}" font-size="{size}" font-family="sans-serif">{}</text>"#,
            escape(text)
        );
    }

    fn raw(&mut self, element: String) {
        self.body.push_str(&element);
        self.body.push('\n');
    }

    fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.body,
            w = self.width,
            h = self.height
        )
    }
}

/// Value axis with 5 ticks from 0 to `max`, returning the y mapping.
fn value_axis(svg: &mut Svg, max: f64, label: &str) -> impl Fn(f64) -> f64 {
    let max = if max > 0.0 && max.is_finite() { max } else { 1.0 };
    let plot_h = HEIGHT - TOP - BOTTOM;
    let y_of = move |v: f64| HEIGHT - BOTTOM - v / max * plot_h;
    svg.line(LEFT, TOP, LEFT, HEIGHT - BOTTOM, "black");
    svg.line(LEFT, HEIGHT - BOTTOM, WIDTH - RIGHT, HEIGHT - BOTTOM, "black");
    for i in 0..=5 {
        let v = max * i as f64 / 5.0;
        let y = y_of(v);
        svg.line(LEFT - 4.0, y, LEFT, y, "black");
        svg.text(LEFT - 8.0, y + 4.0, "end", 11.0, &tick_label(v));
    }
    svg.raw(format!(
        r#"<text x="16" y="{:.2}" text-anchor="middle" font-size="12" font-family="sans-serif" transform="rotate(-90 16 {:.2})">{}</text>"#,
        (TOP + HEIGHT - BOTTOM) / 2.0,
        (TOP + HEIGHT - BOTTOM) / 2.0,
        escape(label)
    ));
    y_of
}

fn tick_label(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e12 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

/// Vertical bars with a category label under each bar and its value above.
fn bars(svg: &mut Svg, items: &[(String, Vec<f64>)], series: usize, axis_label: &str, value_fmt: fn(f64) -> String) {
    let max = items.iter().flat_map(|(_, v)| v.iter().copied()).fold(0.0, f64::max);
    let y_of = value_axis(svg, max, axis_label);
    let slot = (WIDTH - LEFT - RIGHT) / items.len().max(1) as f64;
    let bar_w = slot * 0.7 / series as f64;
    for (i, (name, values)) in items.iter().enumerate() {
        let x0 = LEFT + slot * i as f64 + slot * 0.15;
        for (s, &v) in values.iter().enumerate() {
            let x = x0 + bar_w * s as f64;
            let y = y_of(v);
            svg.rect(x, y, bar_w, HEIGHT - BOTTOM - y, PALETTE[(if series > 1 { s } else { i }) % PALETTE.len()]);
            svg.text(x + bar_w / 2.0, y - 4.0, "middle", 10.0, &value_fmt(v));
        }
        svg.text(LEFT + slot * (i as f64 + 0.5), HEIGHT - BOTTOM + 16.0, "middle", 11.0, name);
    }
}

fn legend(svg: &mut Svg, names: &[&str]) {
    for (i, name) in names.iter().enumerate() {
        let y = HEIGHT - 24.0;
        let x = LEFT + 160.0 * i as f64;
        svg.rect(x, y - 10.0, 12.0, 12.0, PALETTE[i % PALETTE.len()]);
        svg.text(x + 18.0, y, "start", 11.0, name);
    }
}

/// Total attempts per threat type.
pub fn attempts_bar(groups: &[GroupSummary]) -> String {
    let mut svg = Svg::new("Number of attempts by threat type");
    let items: Vec<_> = groups
        .iter()
        .map(|g| (g.group_key.clone(), vec![g.attempt_total as f64]))
        .collect();
    bars(&mut svg, &items, 1, "attempts (total)", tick_label);
    svg.finish()
}

pub fn impact_histogram(hist: &HistogramSpec) -> String {
    let mut svg = Svg::new("Distribution of impact level");
    let max = hist.counts.iter().copied().max().unwrap_or(0) as f64;
    let y_of = value_axis(&mut svg, max, "count");
    let n = hist.counts.len().max(1);
    let bin_w = (WIDTH - LEFT - RIGHT) / n as f64;
    for (i, &c) in hist.counts.iter().enumerate() {
        let x = LEFT + bin_w * i as f64;
        let y = y_of(c as f64);
        svg.raw(format!(
            r#"<rect x="{x:.2}" y="{y:.2}" width="{bin_w:.2}" height="{:.2}" fill="{}" stroke="white"/>"#,
            HEIGHT - BOTTOM - y,
            PALETTE[0]
        ));
    }
    for (i, e) in hist.bin_edges.iter().enumerate() {
        svg.text(LEFT + bin_w * i as f64, HEIGHT - BOTTOM + 16.0, "middle", 10.0, &tick_label(*e));
    }
    svg.text((LEFT + WIDTH - RIGHT) / 2.0, HEIGHT - BOTTOM + 36.0, "middle", 12.0, "impact level");
    svg.finish()
}

pub fn sector_pie(shares: &[SectorShare]) -> String {
    let mut svg = Svg::new("Targeted sector share");
    let (cx, cy, r) = (WIDTH / 2.0 - 80.0, HEIGHT / 2.0 + 10.0, 140.0);
    let mut angle = 0.0f64;
    for (i, s) in shares.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if s.proportion >= 1.0 {
            svg.raw(format!(r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="{r:.2}" fill="{color}"/>"#));
        } else if s.proportion > 0.0 {
            let sweep = s.proportion * std::f64::consts::TAU;
            let (x1, y1) = (cx + r * angle.sin(), cy - r * angle.cos());
            let end = angle + sweep;
            let (x2, y2) = (cx + r * end.sin(), cy - r * end.cos());
            let large = u8::from(sweep > std::f64::consts::PI);
            svg.raw(format!(
                r#"<path d="M {cx:.2} {cy:.2} L {x1:.2} {y1:.2} A {r:.2} {r:.2} 0 {large} 1 {x2:.2} {y2:.2} Z" fill="{color}" stroke="white"/>"#
            ));
            angle = end;
        }
        let ly = 80.0 + 22.0 * i as f64;
        svg.rect(WIDTH - 200.0, ly - 10.0, 12.0, 12.0, color);
        svg.text(WIDTH - 182.0, ly, "start", 12.0, &format!("{} ({:.1}%)", s.sector, s.proportion * 100.0));
    }
    svg.finish()
}

pub fn attempts_box_plot(stats: &[BoxStats]) -> String {
    let mut svg = Svg::new("Spread of attempts by threat type");
    let max = stats.iter().map(|b| b.max).fold(0.0, f64::max);
    let y_of = value_axis(&mut svg, max, "attempts");
    let slot = (WIDTH - LEFT - RIGHT) / stats.len().max(1) as f64;
    for (i, b) in stats.iter().enumerate() {
        let cx = LEFT + slot * (i as f64 + 0.5);
        let half = slot * 0.25;
        svg.line(cx, y_of(b.min), cx, y_of(b.q1), "black");
        svg.line(cx, y_of(b.q3), cx, y_of(b.max), "black");
        svg.line(cx - half / 2.0, y_of(b.min), cx + half / 2.0, y_of(b.min), "black");
        svg.line(cx - half / 2.0, y_of(b.max), cx + half / 2.0, y_of(b.max), "black");
        svg.raw(format!(
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}" stroke="black"/>"#,
            cx - half,
            y_of(b.q3),
            2.0 * half,
            y_of(b.q1) - y_of(b.q3),
            PALETTE[i % PALETTE.len()]
        ));
        svg.line(cx - half, y_of(b.median), cx + half, y_of(b.median), "black");
        svg.text(cx, HEIGHT - BOTTOM + 16.0, "middle", 11.0, &b.group_key);
    }
    svg.finish()
}

/// Blue for negative, red for positive coefficients.
fn heat_color(r: f64) -> String {
    let t = r.clamp(-1.0, 1.0);
    let fade = |m: f64| (255.0 - 200.0 * m).round() as u8;
    let (red, green, blue) = if t >= 0.0 {
        (255, fade(t), fade(t))
    } else {
        (fade(-t), fade(-t), 255)
    };
    format!("#{red:02x}{green:02x}{blue:02x}")
}

pub fn correlation_heatmap(corr: &CorrelationMatrix) -> String {
    let n = corr.variable_names.len().max(1);
    let cell = 90.0;
    let left = 130.0;
    let top = 50.0;
    let mut svg = Svg::sized(
        "Correlation heatmap (Pearson)",
        left + cell * n as f64 + 20.0,
        top + cell * n as f64 + 30.0,
    );
    for (i, row) in corr.cells.iter().enumerate() {
        let y = top + cell * i as f64;
        svg.text(left - 8.0, y + cell / 2.0 + 4.0, "end", 11.0, &corr.variable_names[i]);
        for (j, &r) in row.iter().enumerate() {
            let x = left + cell * j as f64;
            svg.raw(format!(
                r#"<rect x="{x:.2}" y="{y:.2}" width="{cell:.2}" height="{cell:.2}" fill="{}" stroke="white"/>"#,
                heat_color(r)
            ));
            svg.text(x + cell / 2.0, y + cell / 2.0 + 4.0, "middle", 12.0, &format!("{r:.3}"));
        }
    }
    for (j, name) in corr.variable_names.iter().enumerate() {
        svg.text(left + cell * (j as f64 + 0.5), top + cell * n as f64 + 18.0, "middle", 11.0, name);
    }
    svg.finish()
}

/// Mean attempts and mean impact side by side per threat type.
pub fn grouped_means(groups: &[GroupSummary]) -> String {
    let mut svg = Svg::new("Mean attempts and impact by threat type");
    let items: Vec<_> = groups
        .iter()
        .map(|g| (g.group_key.clone(), vec![g.attempt_mean, g.impact_mean]))
        .collect();
    bars(&mut svg, &items, 2, "mean", |v| format!("{v:.1}"));
    legend(&mut svg, &["attempt_mean", "impact_mean"]);
    svg.finish()
}

/// Accuracy per model, in report order (best first).
pub fn accuracy_comparison(report: &ComparisonReport) -> String {
    let mut svg = Svg::new("Accuracy comparison");
    let items: Vec<_> = report
        .entries
        .iter()
        .map(|e| (e.name.clone(), vec![e.accuracy]))
        .collect();
    bars(&mut svg, &items, 1, "accuracy", |v| format!("{v:.2}"));
    svg.text(
        WIDTH - RIGHT,
        HEIGHT - 20.0,
        "end",
        12.0,
        &format!("winner: {}", report.winner),
    );
    svg.finish()
}

/// File name and contents for each EDA chart.
pub fn eda_charts(report: &EdaReport) -> Vec<(&'static str, String)> {
    vec![
        ("attempts_by_threat.svg", attempts_bar(&report.group_summaries)),
        ("impact_histogram.svg", impact_histogram(&report.histogram)),
        ("sector_shares.svg", sector_pie(&report.sector_shares)),
        ("attempts_box.svg", attempts_box_plot(&report.box_stats)),
        ("correlation_heatmap.svg", correlation_heatmap(&report.correlation)),
        ("means_by_threat.svg", grouped_means(&report.group_summaries)),
    ]
}
