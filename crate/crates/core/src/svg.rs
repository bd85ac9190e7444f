//! Self-contained SVG charts for the three report figures.

use std::fmt::Write as _;

use crate::profile::{QualityProfile, StarLevel};

const WIDTH: f64 = 900.0;
const LABEL_WIDTH: f64 = 260.0;
const RIGHT_MARGIN: f64 = 90.0;
const TOP: f64 = 60.0;
const ROW: f64 = 22.0;
const BOTTOM: f64 = 60.0;

const LEVEL_COLOURS: [&str; 5] = ["#08306b", "#2171b5", "#6baed6", "#c6dbef", "#f0f0f0"];

pub fn escape_xml(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c if (c as u32) < 0x20 && c != '\t' && c != '\n' => out.push(' '),
            c => out.push(c),
        }
    }
    out
}

struct Canvas {
    body: String,
    height: f64,
}

impl Canvas {
    fn new(rows: usize, title: &str) -> Self {
        let height = TOP + ROW * rows.max(1) as f64 + BOTTOM;
        let mut body = String::new();
        let _ = write!(
            body,
            r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="Helvetica, Arial, sans-serif" font-size="12">
<rect width="100%" height="100%" fill="white"/>
<text x="{x:.1}" y="24" font-size="15" text-anchor="middle">{title}</text>
"#,
            x = WIDTH / 2.0,
            title = escape_xml(title),
        );
        Self { body, height }
    }

    fn row_y(&self, i: usize) -> f64 {
        TOP + ROW * i as f64 + ROW / 2.0
    }

    fn label(&mut self, i: usize, text: &str) {
        let y = self.row_y(i);
        let _ = writeln!(
            self.body,
            r#"<text x="{:.1}" y="{y:.1}" text-anchor="end" dominant-baseline="middle">{}</text>"#,
            LABEL_WIDTH - 8.0,
            escape_xml(text)
        );
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, style: &str) {
        let _ = writeln!(self.body, r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" {style}/>"#);
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, text: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{x:.1}" y="{y:.1}" text-anchor="{anchor}" dominant-baseline="middle">{}</text>"#,
            escape_xml(text)
        );
    }

    /// Horizontal axis with ticks at `ticks`, mapped through `scale`.
    fn x_axis(&mut self, ticks: &[f64], scale: &dyn Fn(f64) -> f64, caption: &str) {
        let y = self.height - BOTTOM + 6.0;
        self.line(LABEL_WIDTH, y, WIDTH - RIGHT_MARGIN, y, r##"stroke="#333""##);
        for &t in ticks {
            let x = scale(t);
            self.line(x, y, x, y + 5.0, r##"stroke="#333""##);
            self.line(x, TOP, x, y, r##"stroke="#e5e5e5""##);
            self.text(x, y + 15.0, "middle", &trim_number(t));
        }
        self.text((LABEL_WIDTH + WIDTH - RIGHT_MARGIN) / 2.0, y + 35.0, "middle", caption);
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

fn trim_number(x: f64) -> String {
    let s = format!("{x:.2}");
    s.trim_end_matches('0').trim_end_matches('.').to_owned()
}

fn nice_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let span = (hi - lo).max(1e-9);
    let raw = span / target.max(1) as f64;
    let magnitude = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * magnitude)
        .find(|&s| s >= raw)
        .unwrap_or(10.0 * magnitude);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn linear(lo: f64, hi: f64) -> impl Fn(f64) -> f64 {
    let span = if hi > lo { hi - lo } else { 1.0 };
    move |v| LABEL_WIDTH + (v - lo) / span * (WIDTH - LABEL_WIDTH - RIGHT_MARGIN)
}

/// One bar per group, segments in star order, FTE printed at the right.
pub fn profiles_chart(rows: &[(String, f64, QualityProfile)], title: &str) -> String {
    let mut c = Canvas::new(rows.len(), title);
    let scale = linear(0.0, 100.0);
    for (i, (name, fte, profile)) in rows.iter().enumerate() {
        c.label(i, name);
        let y = c.row_y(i) - ROW * 0.35;
        let mut start = 0.0;
        for level in StarLevel::ALL {
            let pct = profile[level] * 100.0;
            if pct > 0.0 {
                let (x0, x1) = (scale(start), scale(start + pct));
                let _ = writeln!(
                    c.body,
                    r##"<rect x="{x0:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{}" stroke="#555" stroke-width="0.5"><title>{} {pct:.0}%</title></rect>"##,
                    x1 - x0,
                    ROW * 0.7,
                    LEVEL_COLOURS[level.index()],
                    escape_xml(&level.to_string()),
                );
            }
            start += pct;
        }
        let y_text = c.row_y(i);
        c.text(WIDTH - RIGHT_MARGIN + 8.0, y_text, "start", &format!("{} FTE", trim_number(*fte)));
    }
    for (k, level) in StarLevel::ALL.iter().enumerate() {
        let x = LABEL_WIDTH + k as f64 * 110.0;
        let _ = writeln!(
            c.body,
            r##"<rect x="{x:.1}" y="36" width="12" height="12" fill="{}" stroke="#555" stroke-width="0.5"/>"##,
            LEVEL_COLOURS[k]
        );
        c.text(x + 16.0, 42.0, "start", &level.to_string());
    }
    let ticks = nice_ticks(0.0, 100.0, 5);
    c.x_axis(&ticks, &scale, "percentage of outputs");
    c.finish()
}

/// Dot at the point estimate, whisker across the interval.
///
/// `reference` draws a dashed vertical line (e.g. the overall mean).
pub fn interval_chart(
    rows: &[(String, f64, f64, f64)],
    axis: (f64, f64),
    reference: Option<f64>,
    title: &str,
    caption: &str,
) -> String {
    let mut c = Canvas::new(rows.len(), title);
    let scale = linear(axis.0, axis.1);
    for (i, (name, point, low, high)) in rows.iter().enumerate() {
        c.label(i, name);
        let y = c.row_y(i);
        c.line(scale(*low), y, scale(*high), y, r#"stroke="black" stroke-width="1.5""#);
        for end in [*low, *high] {
            c.line(scale(end), y - 4.0, scale(end), y + 4.0, r#"stroke="black" stroke-width="1.5""#);
        }
        let _ = writeln!(c.body, r##"<circle cx="{:.2}" cy="{y:.2}" r="3.5" fill="#c0392b"/>"##, scale(*point));
    }
    let ticks = nice_ticks(axis.0, axis.1, 8);
    c.x_axis(&ticks, &scale, caption);
    if let Some(r) = reference {
        let x = scale(r);
        let bottom = c.height - BOTTOM + 6.0;
        c.line(x, TOP - 6.0, x, bottom, r##"stroke="#1f77b4" stroke-width="1.2" stroke-dasharray="5,4""##);
        c.text(x, TOP - 14.0, "middle", &format!("overall mean {}", trim_number(r)));
    }
    c.finish()
}
