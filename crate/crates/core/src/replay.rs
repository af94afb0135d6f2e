//! Step-by-step replay: at each step only the candles seen so far are
//! analysed, and every newly issued signal is logged with its eventual
//! outcome and trade result.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::backtester::{evaluate_prediction, PredictionOutcome};
use crate::error::{Error, Result};
use crate::levels_signals::{signal_at, Signal, SignalConfig, SignalDirection};
use crate::market_data::{CandleSeries, Interval};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TradeStatus {
    TargetHit,
    Stopped,
    Open,
}

/// Position opened at the signal's entry and closed at the first touch of
/// the target or the backup level. A candle touching both counts as stopped.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TradeResult {
    pub status: TradeStatus,
    pub closed_at: Option<usize>,
    /// Target minus entry in the trade direction, per share.
    pub theoretical_profit: f64,
    pub theoretical_return: f64,
    /// Profit per share at the close, when closed.
    pub realized_profit: Option<f64>,
}

pub fn simulate_trade(signal: &Signal, series: &CandleSeries) -> TradeResult {
    let s = signal.direction.sign();
    let theoretical_profit = signal.theoretical_profit();
    let mut status = TradeStatus::Open;
    let mut closed_at = None;
    let mut realized_profit = None;
    for (i, c) in series
        .candles()
        .iter()
        .enumerate()
        .skip(signal.issued_at + 1)
    {
        let (adverse, favourable) = match signal.direction {
            SignalDirection::Buy => (c.low, c.high),
            SignalDirection::Sell => (c.high, c.low),
        };
        if s * (adverse - signal.backup_level) <= 0.0 {
            status = TradeStatus::Stopped;
            closed_at = Some(i);
            realized_profit = Some(s * (signal.backup_level - signal.entry));
            break;
        }
        if s * (favourable - signal.target) >= 0.0 {
            status = TradeStatus::TargetHit;
            closed_at = Some(i);
            realized_profit = Some(theoretical_profit);
            break;
        }
    }
    TradeResult {
        status,
        closed_at,
        theoretical_profit,
        theoretical_return: theoretical_profit / signal.entry,
        realized_profit,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplayEntry {
    /// Index of the last candle visible when the signal was logged.
    pub step: usize,
    pub signal: Signal,
    /// Present once `horizon_n` candles after issuance exist.
    pub outcome: Option<PredictionOutcome>,
    pub trade: TradeResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplayLog {
    pub symbol: String,
    pub interval: Interval,
    pub stride: usize,
    pub entries: Vec<ReplayEntry>,
}

impl ReplayLog {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Candles needed before the first step is analysed.
pub const MIN_REPLAY_PREFIX: usize = 5;

/// Replays `series` in steps of `stride` candles (the last candle is always
/// a step). A signal is logged at the first step that shows it.
pub fn replay(series: &CandleSeries, config: &SignalConfig, stride: usize) -> Result<ReplayLog> {
    if stride == 0 {
        return Err(Error::InvalidConfig("stride must be at least 1".into()));
    }
    let mut steps: Vec<usize> = (MIN_REPLAY_PREFIX - 1..series.len())
        .step_by(stride)
        .collect();
    if let Some(last) = series.len().checked_sub(1) {
        if steps.last() != Some(&last) && last >= MIN_REPLAY_PREFIX - 1 {
            steps.push(last);
        }
    }

    let mut seen: BTreeSet<(usize, Vec<usize>)> = BTreeSet::new();
    let mut entries = Vec::new();
    for &t in &steps {
        let Some(signal) = signal_at(&series.prefix(t + 1), config)? else {
            continue;
        };
        let id = (signal.issued_at, signal.source_pattern.candle_indices());
        if !seen.insert(id) {
            continue;
        }
        let outcome = evaluate_prediction(&signal, series).ok();
        let trade = simulate_trade(&signal, series);
        entries.push(ReplayEntry {
            step: t,
            signal,
            outcome,
            trade,
        });
    }
    Ok(ReplayLog {
        symbol: series.symbol().to_string(),
        interval: series.interval(),
        stride,
        entries,
    })
}
