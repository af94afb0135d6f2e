//! Report prose. Narrators see only the structured payload, never the
//! candles, so every number they can print comes from verified fields.

use std::collections::BTreeMap;
use std::fmt::Write;

use chrono::DateTime;
use serde::Serialize;

use crate::backtester::KindSummary;
use crate::error::Result;
use crate::levels_signals::{LevelSet, Signal};
use crate::market_data::Interval;
use crate::wave_model::{PatternKind, PatternMatch};

use super::Window;

#[derive(Debug, Clone, Serialize)]
pub struct NarrativePayload<'a> {
    pub symbol: &'a str,
    pub interval: Interval,
    pub window: &'a Window,
    pub pattern_count: usize,
    pub selected_pattern: Option<&'a PatternMatch>,
    pub levels: &'a LevelSet,
    pub signal: Option<&'a Signal>,
    pub backtest_source: &'a str,
    pub backtest_summary: &'a BTreeMap<PatternKind, KindSummary>,
}

pub trait Narrator: Send + Sync {
    fn name(&self) -> &str;
    fn narrate(&self, payload: &NarrativePayload<'_>) -> Result<String>;
}

/// Deterministic markdown with fixed sections.
#[derive(Debug, Clone, Copy, Default)]
pub struct TemplateNarrator;

pub fn format_timestamp(ts: i64, interval: Interval) -> String {
    match DateTime::from_timestamp(ts, 0) {
        Some(t) => match interval {
            Interval::Daily => t.format("%Y-%m-%d").to_string(),
            Interval::Hourly => t.format("%Y-%m-%d %H:%M UTC").to_string(),
        },
        None => ts.to_string(),
    }
}

fn price_list(prices: &[f64]) -> String {
    if prices.is_empty() {
        return "none".to_string();
    }
    prices
        .iter()
        .map(|p| format!("{p:.2}"))
        .collect::<Vec<_>>()
        .join(", ")
}

impl Narrator for TemplateNarrator {
    fn name(&self) -> &str {
        "template"
    }

    fn narrate(&self, p: &NarrativePayload<'_>) -> Result<String> {
        let w = p.window;
        let mut out = String::new();
        let _ = writeln!(out, "# {} {} Elliott wave report\n", p.symbol, p.interval);

        let _ = writeln!(out, "## Data\n");
        match (w.first_timestamp, w.last_timestamp, w.last_close) {
            (Some(a), Some(b), Some(close)) => {
                let _ = writeln!(
                    out,
                    "{} {} candles from {} to {}. Last close {:.2}.\n",
                    w.candles,
                    p.interval,
                    format_timestamp(a, p.interval),
                    format_timestamp(b, p.interval),
                    close
                );
            }
            _ => {
                let _ = writeln!(out, "No candles in the requested window.\n");
            }
        }

        let _ = writeln!(out, "## Patterns\n");
        let _ = writeln!(out, "{} patterns matched the wave rules.", p.pattern_count);
        match p.selected_pattern {
            Some(m) => {
                let _ = writeln!(
                    out,
                    "Selected: {} in a {} trend, score {:.2}, candles {} to {}.\n",
                    m.kind.title(),
                    m.direction.as_str(),
                    m.score,
                    m.start_index(),
                    m.end_index()
                );
                for wave in &m.waves {
                    let _ = writeln!(
                        out,
                        "- wave {}: {:.2} to {:.2} (candles {} to {})",
                        wave.label,
                        wave.start.price,
                        wave.end.price,
                        wave.start.index,
                        wave.end.index
                    );
                }
                out.push('\n');
            }
            None => {
                let _ = writeln!(out, "No actionable pattern near the end of the window.\n");
            }
        }

        let _ = writeln!(out, "## Backtest\n");
        let _ = writeln!(out, "Reliability table: {}.", p.backtest_source);
        if p.backtest_summary.is_empty() {
            let _ = writeln!(out, "No past predictions recorded.\n");
        } else {
            out.push('\n');
            for (kind, s) in p.backtest_summary {
                let _ = writeln!(
                    out,
                    "- {}: {} of {} predictions correct ({:.2}%)",
                    kind.title(),
                    s.hits,
                    s.trials,
                    s.hit_rate * 100.0
                );
            }
            out.push('\n');
        }

        let _ = writeln!(out, "## Levels\n");
        let _ = writeln!(out, "- Supports: {}", price_list(&p.levels.supports));
        let _ = writeln!(out, "- Resistances: {}", price_list(&p.levels.resistances));
        if p.levels.targets.is_empty() {
            let _ = writeln!(out, "- Targets: none");
        } else {
            for t in &p.levels.targets {
                let _ = writeln!(out, "- Target {:.2}: {}", t.price, t.basis);
            }
        }
        out.push('\n');

        let _ = writeln!(out, "## Recommendation\n");
        match p.signal {
            Some(s) => {
                let _ = writeln!(
                    out,
                    "{} at {:.2} (candle {}), target {:.2}, horizon {} candles. Pattern: {}.\n",
                    s.direction.as_str().to_uppercase(),
                    s.entry,
                    s.issued_at,
                    s.target,
                    s.horizon_n,
                    s.pattern_kind().title()
                );
                let _ = writeln!(out, "{}\n", s.rationale);
            }
            None => {
                let _ = writeln!(out, "Hold. No confirmed signal; take no action.\n");
            }
        }

        let _ = writeln!(out, "## Backup plan\n");
        match p.signal {
            Some(s) => {
                let _ = writeln!(
                    out,
                    "Backup level {:.2}: if price trades through it before reaching {:.2}, the count is invalid; close the position.",
                    s.backup_level, s.target
                );
            }
            None => {
                let _ = writeln!(out, "No position, so no backup level.");
            }
        }
        Ok(out)
    }
}

/// Runs `narrator`, falling back to the template when it fails. The second
/// value holds any diagnostics.
pub fn render_narrative(
    payload: &NarrativePayload<'_>,
    narrator: &dyn Narrator,
) -> (String, Vec<String>) {
    match narrator.narrate(payload) {
        Ok(text) => (text, Vec::new()),
        Err(e) => {
            let text = TemplateNarrator
                .narrate(payload)
                .expect("template narrator is infallible");
            (
                text,
                vec![format!(
                    "narrator '{}' failed ({e}); used the template narrator",
                    narrator.name()
                )],
            )
        }
    }
}
