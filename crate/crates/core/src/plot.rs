//! Minimal SVG line plots of summary curves and envelopes.

use std::fmt::Write;

use crate::envelope::EnvelopeResult;
use crate::error::{Error, Result};
use crate::summaries::SummaryCurve;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: [f64; 4] = [40.0, 20.0, 50.0, 70.0]; // top, right, bottom, left
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Axis labels and title.
#[derive(Clone, Debug, Default)]
pub struct Labels {
    pub title: String,
    pub x: String,
    pub y: String,
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn fit<'a>(curves: impl Iterator<Item = &'a SummaryCurve>) -> Result<Self> {
        let (mut x, mut y) = ((f64::INFINITY, f64::NEG_INFINITY), (f64::INFINITY, f64::NEG_INFINITY));
        for c in curves {
            for (&a, &v) in c.args.iter().zip(&c.values) {
                x = (x.0.min(a), x.1.max(a));
                y = (y.0.min(v), y.1.max(v));
            }
        }
        if !x.0.is_finite() {
            return Err(Error::InvalidInput("nothing to plot".into()));
        }
        let widen = |(lo, hi): (f64, f64)| if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
        Ok(Self {
            x: widen(x),
            y: widen(y),
        })
    }

    fn px(&self, a: f64) -> f64 {
        MARGIN[3] + (a - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - MARGIN[1] - MARGIN[3])
    }

    fn py(&self, v: f64) -> f64 {
        HEIGHT - MARGIN[2] - (v - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - MARGIN[0] - MARGIN[2])
    }

    fn path(&self, args: &[f64], values: &[f64]) -> String {
        let mut d = String::new();
        for (k, (&a, &v)) in args.iter().zip(values).enumerate() {
            let _ = write!(d, "{}{:.2},{:.2}", if k == 0 { "M" } else { " L" }, self.px(a), self.py(v));
        }
        d
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    (0..=4).map(|k| lo + (hi - lo) * k as f64 / 4.0).collect()
}

fn open(svg: &mut String, frame: &Frame, labels: &Labels) {
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (x0, x1) = (MARGIN[3], WIDTH - MARGIN[1]);
    let (y0, y1) = (MARGIN[0], HEIGHT - MARGIN[2]);
    let _ = writeln!(
        svg,
        r#"<path d="M{x0},{y0} L{x0},{y1} L{x1},{y1}" fill="none" stroke="black"/>"#
    );
    for t in ticks(frame.x.0, frame.x.1) {
        let p = frame.px(t);
        let _ = writeln!(
            svg,
            r#"<line x1="{p:.2}" y1="{y1}" x2="{p:.2}" y2="{:.2}" stroke="black"/><text x="{p:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            y1 + 5.0,
            y1 + 18.0,
            tick_label(t)
        );
    }
    for t in ticks(frame.y.0, frame.y.1) {
        let p = frame.py(t);
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{p:.2}" x2="{x0}" y2="{p:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 5.0,
            x0 - 8.0,
            p + 4.0,
            tick_label(t)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(&labels.title)
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 12.0,
        escape(&labels.x)
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(&labels.y)
    );
}

fn tick_label(t: f64) -> String {
    let s = format!("{t:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

/// Overlaid line plot of `curves`, with an optional legend name per curve.
pub fn curves_svg(curves: &[(&SummaryCurve, &str)], labels: &Labels) -> Result<String> {
    let frame = Frame::fit(curves.iter().map(|(c, _)| *c))?;
    let mut svg = String::new();
    open(&mut svg, &frame, labels);
    for (k, (c, name)) in curves.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let _ = writeln!(
            svg,
            r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            frame.path(&c.args, &c.values)
        );
        if !name.is_empty() {
            let y = MARGIN[0] + 14.0 * (k as f64 + 1.0);
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{y:.2}" fill="{color}" text-anchor="end">{}</text>"#,
                WIDTH - MARGIN[1] - 4.0,
                escape(name)
            );
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Shaded envelope with the observed curve; arguments where the observed
/// curve leaves the envelope are marked with red dots.
pub fn envelope_svg(result: &EnvelopeResult, observed: &SummaryCurve, labels: &Labels) -> Result<String> {
    if observed.args != result.lower.args {
        return Err(Error::GridMismatch);
    }
    let frame = Frame::fit([&result.lower, &result.upper, observed].into_iter())?;
    let mut svg = String::new();
    open(&mut svg, &frame, labels);
    let mut band = frame.path(&result.upper.args, &result.upper.values);
    for (&a, &v) in result.lower.args.iter().zip(&result.lower.values).rev() {
        let _ = write!(band, " L{:.2},{:.2}", frame.px(a), frame.py(v));
    }
    let _ = writeln!(svg, r##"<path d="{band} Z" fill="#bbbbbb" stroke="none"/>"##);
    let _ = writeln!(
        svg,
        r#"<path d="{}" fill="none" stroke="black" stroke-width="1.5"/>"#,
        frame.path(&observed.args, &observed.values)
    );
    for (k, out) in result.outside(observed).into_iter().enumerate() {
        if out {
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="red"/>"#,
                frame.px(observed.args[k]),
                frame.py(observed.values[k])
            );
        }
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="end">p = {:.3}</text>"#,
        WIDTH - MARGIN[1] - 4.0,
        MARGIN[0] + 14.0,
        result.p_value
    );
    svg.push_str("</svg>\n");
    Ok(svg)
}
