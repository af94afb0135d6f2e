//! Static SVG chart: candlesticks, wave lines with labels, level lines and
//! signal markers.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::levels_signals::{LevelSet, Signal, SignalDirection};
use crate::market_data::CandleSeries;
use crate::wave_model::PatternMatch;

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 540.0;
const MARGIN_LEFT: f64 = 20.0;
const MARGIN_RIGHT: f64 = 80.0;
const MARGIN_Y: f64 = 30.0;

struct Frame {
    n: usize,
    lo: f64,
    hi: f64,
}

impl Frame {
    fn x(&self, index: f64) -> f64 {
        let plot = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        MARGIN_LEFT + plot * (index + 0.5) / self.n as f64
    }

    fn y(&self, price: f64) -> f64 {
        let plot = HEIGHT - 2.0 * MARGIN_Y;
        MARGIN_Y + plot * (self.hi - price) / (self.hi - self.lo)
    }

    fn slot(&self) -> f64 {
        (WIDTH - MARGIN_LEFT - MARGIN_RIGHT) / self.n as f64
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Renders the chart. Output depends only on the inputs.
pub fn render_chart(
    series: &CandleSeries,
    matches: &[PatternMatch],
    levels: &LevelSet,
    signal: Option<&Signal>,
) -> Result<String> {
    let len = series.len();
    for m in matches {
        for i in m.candle_indices() {
            if i >= len {
                return Err(Error::IndexOutOfRange { index: i, len });
            }
        }
    }
    if let Some(s) = signal {
        if s.issued_at >= len {
            return Err(Error::IndexOutOfRange {
                index: s.issued_at,
                len,
            });
        }
    }

    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for c in series.candles() {
        lo = lo.min(c.low);
        hi = hi.max(c.high);
    }
    for p in levels
        .all_levels()
        .into_iter()
        .chain(levels.targets.iter().map(|t| t.price))
    {
        lo = lo.min(p);
        hi = hi.max(p);
    }
    if let Some(s) = signal {
        for p in [s.entry, s.target, s.backup_level] {
            lo = lo.min(p);
            hi = hi.max(p);
        }
    }
    if !lo.is_finite() {
        lo = 0.0;
        hi = 1.0;
    }
    if hi <= lo {
        hi = lo + 1.0;
    }
    let pad = (hi - lo) * 0.05;
    let f = Frame {
        n: len.max(1),
        lo: lo - pad,
        hi: hi + pad,
    };

    let mut svg = String::new();
    // writing to a String cannot fail
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(
        svg,
        "<style>.up{{fill:#2e7d32;stroke:#2e7d32}}.down{{fill:#c62828;stroke:#c62828}}\
         .wave{{stroke:#1565c0;stroke-width:2;fill:none}}.wave-label{{font:12px sans-serif;fill:#1565c0}}\
         .support{{stroke:#2e7d32;stroke-dasharray:4 3}}.resistance{{stroke:#c62828;stroke-dasharray:4 3}}\
         .target-level{{stroke:#6a1b9a;stroke-dasharray:1 3}}.level-label{{font:11px sans-serif;fill:#444}}\
         .entry-marker{{fill:#ef6c00}}.target-marker{{fill:#6a1b9a}}</style>"
    );
    let _ = writeln!(
        svg,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{MARGIN_LEFT}" y="18" font-family="sans-serif" font-size="14">{} {}</text>"#,
        escape(series.symbol()),
        series.interval()
    );

    let _ = writeln!(svg, r#"<g class="candles">"#);
    let body = (f.slot() * 0.6).max(0.5);
    for (i, c) in series.candles().iter().enumerate() {
        let class = if c.close >= c.open { "up" } else { "down" };
        let x = f.x(i as f64);
        let top = f.y(c.open.max(c.close));
        let bottom = f.y(c.open.min(c.close));
        let _ = writeln!(
            svg,
            r#"<line class="{class}" x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}"/>"#,
            f.y(c.high),
            f.y(c.low)
        );
        let _ = writeln!(
            svg,
            r#"<rect class="{class}" x="{:.2}" y="{top:.2}" width="{body:.2}" height="{:.2}"/>"#,
            x - body / 2.0,
            (bottom - top).max(0.5)
        );
    }
    let _ = writeln!(svg, "</g>");

    for (class, prices) in [
        ("support", &levels.supports),
        ("resistance", &levels.resistances),
    ] {
        for &p in prices {
            level_line(&mut svg, &f, class, p);
        }
    }
    for t in &levels.targets {
        level_line(&mut svg, &f, "target-level", t.price);
    }

    for m in matches {
        let _ = writeln!(svg, r#"<g class="pattern" data-kind="{}">"#, m.kind);
        for w in &m.waves {
            let (x1, y1) = (f.x(w.start.index as f64), f.y(w.start.price));
            let (x2, y2) = (f.x(w.end.index as f64), f.y(w.end.price));
            let _ = writeln!(
                svg,
                r#"<line class="wave" x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}"/>"#
            );
            let dy = if w.end.price >= w.start.price {
                -6.0
            } else {
                14.0
            };
            let _ = writeln!(
                svg,
                r#"<text class="wave-label" x="{x2:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                y2 + dy,
                escape(&w.label)
            );
        }
        let _ = writeln!(svg, "</g>");
    }

    if let Some(s) = signal {
        let x = f.x(s.issued_at as f64);
        let y = f.y(s.entry);
        // triangle pointing in the trade direction
        let d = match s.direction {
            SignalDirection::Buy => format!(
                "M{x:.2},{:.2} L{:.2},{:.2} L{:.2},{:.2} Z",
                y - 8.0,
                x - 6.0,
                y + 4.0,
                x + 6.0,
                y + 4.0
            ),
            SignalDirection::Sell => format!(
                "M{x:.2},{:.2} L{:.2},{:.2} L{:.2},{:.2} Z",
                y + 8.0,
                x - 6.0,
                y - 4.0,
                x + 6.0,
                y - 4.0
            ),
        };
        let _ = writeln!(svg, r#"<path class="entry-marker" d="{d}"/>"#);
        let tx =
            f.x((s.issued_at + s.horizon_n).min(len.saturating_sub(1).max(s.issued_at)) as f64);
        let ty = f.y(s.target);
        let _ = writeln!(
            svg,
            r#"<path class="target-marker" d="M{:.2},{ty:.2} L{tx:.2},{:.2} L{:.2},{ty:.2} L{tx:.2},{:.2} Z"/>"#,
            tx - 6.0,
            ty - 6.0,
            tx + 6.0,
            ty + 6.0
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn level_line(svg: &mut String, f: &Frame, class: &str, price: f64) {
    let y = f.y(price);
    let x2 = WIDTH - MARGIN_RIGHT;
    let _ = writeln!(
        svg,
        r#"<line class="level {class}" x1="{MARGIN_LEFT}" y1="{y:.2}" x2="{x2}" y2="{y:.2}"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<text class="level-label" x="{:.2}" y="{:.2}">{price:.2}</text>"#,
        x2 + 4.0,
        y + 4.0
    );
}
