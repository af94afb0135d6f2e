//! Prediction scoring, tabular reliability learning and contiguous-fold
//! cross-validation.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levels_signals::{
    derive_levels_with, make_signal, related_matches, Signal, SignalConfig, SignalDirection,
};
use crate::market_data::{CandleSeries, Interval};
use crate::pattern_search::{match_order, scan};
use crate::pivots::extract_pivots;
use crate::wave_model::{PatternKind, PatternMatch, Trend};

pub const TABLE_VERSION: u32 = 1;
/// Shortest fold cross-validation will accept.
pub const MIN_FOLD_LEN: usize = 20;
/// Shortest series `train` will accept.
pub const MIN_TRAIN_LEN: usize = 10;
/// Series length below which cross-validation warns.
pub const RECOMMENDED_CV_LEN: usize = 1000;

/// Kinds counted by cross-validation.
pub const CV_KINDS: [PatternKind; 2] =
    [PatternKind::ImpulseIncomplete, PatternKind::ImpulseComplete];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictionOutcome {
    pub signal: Signal,
    pub mean_future_price: f64,
    pub correct: bool,
}

fn is_correct(direction: SignalDirection, entry: f64, mean: f64) -> bool {
    match direction {
        SignalDirection::Buy => mean > entry,
        SignalDirection::Sell => mean < entry,
    }
}

/// Judges `signal` on the mean close of the `horizon_n` candles after it.
pub fn evaluate_prediction(signal: &Signal, series: &CandleSeries) -> Result<PredictionOutcome> {
    let n = signal.horizon_n;
    let available = series.len().saturating_sub(signal.issued_at + 1);
    if available < n {
        return Err(Error::InsufficientFuture {
            issued_at: signal.issued_at,
            needed: n,
            available,
        });
    }
    let closes = &series.candles()[signal.issued_at + 1..=signal.issued_at + n];
    let mean = closes.iter().map(|c| c.close).sum::<f64>() / n as f64;
    Ok(PredictionOutcome {
        signal: signal.clone(),
        mean_future_price: mean,
        correct: is_correct(signal.direction, signal.entry, mean),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreBucket {
    Low,
    Mid,
    High,
}

impl ScoreBucket {
    pub fn of(score: f64) -> Self {
        if score < 0.33 {
            ScoreBucket::Low
        } else if score < 0.67 {
            ScoreBucket::Mid
        } else {
            ScoreBucket::High
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TableKey {
    pub kind: PatternKind,
    pub direction: Trend,
    pub interval: Interval,
    pub bucket: ScoreBucket,
}

impl TableKey {
    pub fn for_pattern(pattern: &PatternMatch, interval: Interval) -> Self {
        Self {
            kind: pattern.kind,
            direction: pattern.direction,
            interval,
            bucket: ScoreBucket::of(pattern.score),
        }
    }

    pub fn for_signal(signal: &Signal, interval: Interval) -> Self {
        Self::for_pattern(&signal.source_pattern, interval)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub trials: u64,
    pub hits: u64,
    pub q_value: f64,
}

impl Default for TableEntry {
    fn default() -> Self {
        Self {
            trials: 0,
            hits: 0,
            q_value: 0.5,
        }
    }
}

/// Learning parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearnParams {
    pub alpha: f64,
    pub epochs: usize,
    pub min_trials: u64,
}

impl Default for LearnParams {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            epochs: 1,
            min_trials: 5,
        }
    }
}

impl LearnParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha {} is outside (0, 1]",
                self.alpha
            )));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be at least 1".into()));
        }
        Ok(())
    }
}

/// Reliability estimates keyed by pattern context.
pub trait Learner {
    fn record(&mut self, key: TableKey, correct: bool, alpha: f64);
    fn estimate(&self, key: &TableKey) -> TableEntry;
}

/// Whether to act on a pattern's signal as issued or against it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Follow,
    Fade,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BacktestTable {
    entries: BTreeMap<TableKey, TableEntry>,
}

#[derive(Serialize, Deserialize)]
struct TableFile {
    version: u32,
    entries: Vec<TableRow>,
}

#[derive(Serialize, Deserialize)]
struct TableRow {
    kind: PatternKind,
    direction: Trend,
    interval: Interval,
    bucket: ScoreBucket,
    trials: u64,
    hits: u64,
    q_value: f64,
}

impl Learner for BacktestTable {
    fn record(&mut self, key: TableKey, correct: bool, alpha: f64) {
        let e = self.entries.entry(key).or_default();
        let reward = if correct { 1.0 } else { 0.0 };
        e.q_value += alpha * (reward - e.q_value);
        e.trials += 1;
        if correct {
            e.hits += 1;
        }
    }

    fn estimate(&self, key: &TableKey) -> TableEntry {
        self.entries.get(key).copied().unwrap_or_default()
    }
}

impl BacktestTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, key: &TableKey) -> Option<&TableEntry> {
        self.entries.get(key)
    }

    /// Current value for `key`, 0.5 when unseen.
    pub fn estimate_of(&self, key: &TableKey) -> f64 {
        self.estimate(key).q_value
    }

    pub fn entries(&self) -> impl Iterator<Item = (&TableKey, &TableEntry)> {
        self.entries.iter()
    }

    /// Fades a context only when it has enough evidence and a value below
    /// `threshold`.
    pub fn decide(&self, key: &TableKey, threshold: f64, min_trials: u64) -> Decision {
        let e = self.estimate(key);
        if e.trials >= min_trials && e.q_value < threshold {
            Decision::Fade
        } else {
            Decision::Follow
        }
    }

    /// Per-kind hit rate over every context.
    pub fn summary(&self) -> BTreeMap<PatternKind, KindSummary> {
        let mut out: BTreeMap<PatternKind, KindSummary> = BTreeMap::new();
        for (k, e) in &self.entries {
            let s = out.entry(k.kind).or_default();
            s.trials += e.trials;
            s.hits += e.hits;
        }
        for s in out.values_mut() {
            s.hit_rate = if s.trials == 0 {
                0.0
            } else {
                s.hits as f64 / s.trials as f64
            };
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        let file = TableFile {
            version: TABLE_VERSION,
            entries: self
                .entries
                .iter()
                .map(|(k, e)| TableRow {
                    kind: k.kind,
                    direction: k.direction,
                    interval: k.interval,
                    bucket: k.bucket,
                    trials: e.trials,
                    hits: e.hits,
                    q_value: e.q_value,
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: TableFile = serde_json::from_str(text)?;
        if file.version != TABLE_VERSION {
            return Err(Error::InvalidConfig(format!(
                "unsupported backtest table version {}",
                file.version
            )));
        }
        let mut entries = BTreeMap::new();
        for r in file.entries {
            if r.hits > r.trials || !(0.0..=1.0).contains(&r.q_value) {
                return Err(Error::InvalidConfig(format!(
                    "corrupt table entry for {}: hits {} trials {} q {}",
                    r.kind, r.hits, r.trials, r.q_value
                )));
            }
            let key = TableKey {
                kind: r.kind,
                direction: r.direction,
                interval: r.interval,
                bucket: r.bucket,
            };
            entries.insert(
                key,
                TableEntry {
                    trials: r.trials,
                    hits: r.hits,
                    q_value: r.q_value,
                },
            );
        }
        Ok(Self { entries })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()? + "\n").map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct KindSummary {
    pub trials: u64,
    pub hits: u64,
    pub hit_rate: f64,
}

/// Signals whose context has at least `min_trials` trials and a value of at
/// least `threshold`, in input order.
pub fn filter_with_table(
    signals: &[Signal],
    table: &BacktestTable,
    interval: Interval,
    threshold: f64,
    min_trials: u64,
) -> Vec<Signal> {
    signals
        .iter()
        .filter(|s| {
            let e = table.estimate(&TableKey::for_signal(s, interval));
            e.trials >= min_trials && e.q_value >= threshold
        })
        .cloned()
        .collect()
}

/// Non-overlapping patterns taken in the order they complete: a pattern is
/// kept unless it overlaps one already kept, so no choice depends on a later
/// pattern.
fn select_in_time_order(matches: &[PatternMatch]) -> Vec<PatternMatch> {
    let mut order: Vec<&PatternMatch> = matches.iter().collect();
    order.sort_by(|a, b| match_order(a, b));
    let mut kept: Vec<PatternMatch> = Vec::new();
    for m in order {
        let overlaps = kept
            .iter()
            .any(|k| m.start_index() < k.end_index() && k.start_index() < m.end_index());
        if !overlaps {
            kept.push(m.clone());
        }
    }
    kept
}

fn signal_for(
    m: &PatternMatch,
    all: &[PatternMatch],
    series: &CandleSeries,
    config: &SignalConfig,
    threshold: f64,
) -> Option<Signal> {
    let current = series.candles()[m.end_index()].close;
    let levels =
        derive_levels_with(&related_matches(all, m), current, &config.search.ratios).ok()?;
    make_signal(
        m,
        series,
        &levels,
        &config.search.ratios,
        config.confirmation(threshold),
    )
}

/// Every resolvable prediction in `series`, in the order the outcomes
/// become known.
///
/// Patterns of each kind are taken in completion order without overlap,
/// whatever `allow_nested` says.
/// Each signal reads candles only up to its issuance; its outcome reads
/// the following `horizon_n` closes.
pub fn historical_outcomes(
    series: &CandleSeries,
    config: &SignalConfig,
) -> Result<Vec<PredictionOutcome>> {
    let threshold = config.threshold_for(series);
    let pivots = extract_pivots(series, threshold)?;
    // dropping nested matches would consult patterns that finish later
    let mut search = config.search.clone();
    search.allow_nested = true;
    let matches = scan(series, &pivots, &search)?;
    let mut outcomes = Vec::new();
    for kind in PatternKind::ALL {
        let of_kind: Vec<PatternMatch> =
            matches.iter().filter(|m| m.kind == kind).cloned().collect();
        for m in select_in_time_order(&of_kind) {
            if let Some(sig) = signal_for(&m, &matches, series, config, threshold) {
                if let Ok(o) = evaluate_prediction(&sig, series) {
                    outcomes.push(o);
                }
            }
        }
    }
    outcomes.sort_by(|a, b| {
        let ra = a.signal.issued_at + a.signal.horizon_n;
        let rb = b.signal.issued_at + b.signal.horizon_n;
        ra.cmp(&rb)
            .then(a.signal.issued_at.cmp(&b.signal.issued_at))
            .then(
                a.signal
                    .source_pattern
                    .kind
                    .cmp(&b.signal.source_pattern.kind),
            )
    });
    Ok(outcomes)
}

/// Learns a table from `series`; see [`train_with_log`].
pub fn train(
    series: &CandleSeries,
    config: &SignalConfig,
    learn: &LearnParams,
) -> Result<BacktestTable> {
    Ok(train_with_log(series, config, learn)?.0)
}

/// Learns a table from `series` and returns the outcomes it was fed.
/// Each epoch replays the outcomes once, so every epoch adds to the trials.
pub fn train_with_log(
    series: &CandleSeries,
    config: &SignalConfig,
    learn: &LearnParams,
) -> Result<(BacktestTable, Vec<PredictionOutcome>)> {
    learn.validate()?;
    if series.len() < MIN_TRAIN_LEN {
        return Err(Error::SeriesTooShort(format!(
            "training needs at least {MIN_TRAIN_LEN} candles, got {}",
            series.len()
        )));
    }
    let outcomes = historical_outcomes(series, config)?;
    let mut table = BacktestTable::new();
    for _ in 0..learn.epochs {
        for o in &outcomes {
            table.record(
                TableKey::for_signal(&o.signal, series.interval()),
                o.correct,
                learn.alpha,
            );
        }
    }
    Ok((table, outcomes))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossValConfig {
    pub folds: usize,
    pub with_backtesting: bool,
    /// Minimum value for a context to be followed.
    pub threshold: f64,
    pub learn: LearnParams,
}

impl Default for CrossValConfig {
    fn default() -> Self {
        Self {
            folds: 5,
            with_backtesting: false,
            threshold: 0.5,
            learn: LearnParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossValRow {
    pub kind: PatternKind,
    /// Evaluated predictions from disjoint patterns.
    pub n: usize,
    pub correct_without: usize,
    pub accuracy_without: f64,
    pub correct_with: Option<usize>,
    pub accuracy_with: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossValReport {
    pub symbol: String,
    pub interval: Interval,
    pub folds: usize,
    pub with_backtesting: bool,
    pub rows: Vec<CrossValRow>,
    pub warnings: Vec<String>,
}

impl CrossValReport {
    pub fn row(&self, kind: PatternKind) -> Option<&CrossValRow> {
        self.rows.iter().find(|r| r.kind == kind)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

impl fmt::Display for CrossValReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "kind, N, acc_without, acc_with")?;
        for r in &self.rows {
            let with = match r.accuracy_with {
                Some(a) => format!("{:.2}%", a * 100.0),
                None => "-".to_string(),
            };
            writeln!(
                f,
                "{}, {}, {:.2}%, {}",
                r.kind.title(),
                r.n,
                r.accuracy_without * 100.0,
                with
            )?;
        }
        Ok(())
    }
}

struct FoldPrediction {
    kind: PatternKind,
    correct_without: bool,
    correct_with: bool,
}

fn fraction(count: usize, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        count as f64 / n as f64
    }
}

fn fold_bounds(len: usize, folds: usize) -> Vec<(usize, usize)> {
    let size = len / folds;
    (0..folds)
        .map(|f| {
            let start = f * size;
            let end = if f + 1 == folds { len } else { start + size };
            (start, end)
        })
        .collect()
}

/// Contiguous-fold evaluation of impulse predictions, optionally adjusted
/// by a learned reliability table.
///
/// Within a fold, disjoint patterns of each kind are taken in the order they
/// complete, as in training.
///
/// The table comes from `history` when given; otherwise each fold uses a
/// table trained on the candles before it. A context the table has enough
/// evidence on and rates below `threshold` is faded (the prediction is
/// reversed); everything else is followed, so both accuracy columns share N.
pub fn cross_validate(
    series: &CandleSeries,
    config: &SignalConfig,
    cv: &CrossValConfig,
    history: Option<&CandleSeries>,
) -> Result<CrossValReport> {
    if cv.folds < 2 {
        return Err(Error::InvalidConfig(format!(
            "need at least 2 folds, got {}",
            cv.folds
        )));
    }
    if !(0.0..=1.0).contains(&cv.threshold) {
        return Err(Error::InvalidConfig(format!(
            "threshold {} is outside [0, 1]",
            cv.threshold
        )));
    }
    cv.learn.validate()?;
    let needed = cv.folds * MIN_FOLD_LEN;
    if series.len() < needed {
        return Err(Error::SeriesTooShort(format!(
            "{} folds need at least {needed} candles, got {}",
            cv.folds,
            series.len()
        )));
    }
    let mut warnings = Vec::new();
    if series.len() < RECOMMENDED_CV_LEN {
        warnings.push(format!(
            "series has {} candles; at least {RECOMMENDED_CV_LEN} are recommended",
            series.len()
        ));
    }

    let kinds: Vec<PatternKind> = CV_KINDS
        .iter()
        .copied()
        .filter(|k| config.search.kinds.contains(k))
        .collect();
    if kinds.is_empty() {
        return Err(Error::InvalidConfig(
            "cross-validation counts impulse 1-2-3-4 and 1-2-3-4-5 patterns; neither was requested"
                .into(),
        ));
    }
    let mut fold_config = config.clone();
    fold_config.search.kinds = kinds.iter().copied().collect();
    fold_config.search.allow_nested = true;

    let shared_table = match (cv.with_backtesting, history) {
        (true, Some(h)) => Some(train(h, config, &cv.learn)?),
        _ => None,
    };

    let bounds = fold_bounds(series.len(), cv.folds);
    let results: Vec<Result<Vec<FoldPrediction>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = bounds
            .iter()
            .map(|&(start, end)| {
                let fold_config = &fold_config;
                let shared_table = shared_table.as_ref();
                scope.spawn(move || {
                    let table = if !cv.with_backtesting {
                        None
                    } else if let Some(t) = shared_table {
                        Some(t.clone())
                    } else {
                        // walk forward: learn only from what precedes the fold
                        let before = series.prefix(start);
                        Some(train(&before, config, &cv.learn).unwrap_or_default())
                    };
                    evaluate_fold(series, start, end, fold_config, cv, table.as_ref())
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("fold worker panicked"))
            .collect()
    });

    let mut rows: Vec<CrossValRow> = kinds
        .iter()
        .map(|&kind| CrossValRow {
            kind,
            n: 0,
            correct_without: 0,
            accuracy_without: 0.0,
            correct_with: cv.with_backtesting.then_some(0),
            accuracy_with: None,
        })
        .collect();
    for fold in results {
        for p in fold? {
            let row = rows
                .iter_mut()
                .find(|r| r.kind == p.kind)
                .expect("kind row");
            row.n += 1;
            row.correct_without += p.correct_without as usize;
            if let Some(c) = row.correct_with.as_mut() {
                *c += p.correct_with as usize;
            }
        }
    }
    for r in &mut rows {
        r.accuracy_without = fraction(r.correct_without, r.n);
        r.accuracy_with = r.correct_with.map(|c| fraction(c, r.n));
    }
    Ok(CrossValReport {
        symbol: series.symbol().to_string(),
        interval: series.interval(),
        folds: cv.folds,
        with_backtesting: cv.with_backtesting,
        rows,
        warnings,
    })
}

fn evaluate_fold(
    series: &CandleSeries,
    start: usize,
    end: usize,
    config: &SignalConfig,
    cv: &CrossValConfig,
    table: Option<&BacktestTable>,
) -> Result<Vec<FoldPrediction>> {
    let fold = series.slice_indices(start, end);
    let threshold = config.threshold_for(&fold);
    let pivots = extract_pivots(&fold, threshold)?;
    let matches = scan(&fold, &pivots, &config.search)?;
    let mut out = Vec::new();
    for kind in CV_KINDS {
        let of_kind: Vec<PatternMatch> =
            matches.iter().filter(|m| m.kind == kind).cloned().collect();
        for m in select_in_time_order(&of_kind) {
            let Some(mut sig) = signal_for(&m, &matches, &fold, config, threshold) else {
                continue;
            };
            let key = TableKey::for_signal(&sig, series.interval());
            // outcomes may run past the fold into later data
            sig.issued_at += start;
            let Ok(outcome) = evaluate_prediction(&sig, series) else {
                continue;
            };
            let correct_with =
                match table.map(|t| t.decide(&key, cv.threshold, cv.learn.min_trials)) {
                    Some(Decision::Fade) => is_correct(
                        sig.direction.opposite(),
                        sig.entry,
                        outcome.mean_future_price,
                    ),
                    _ => outcome.correct,
                };
            out.push(FoldPrediction {
                kind,
                correct_without: outcome.correct,
                correct_with,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{pivots_from_prices, series_from_pivot_prices};
    use crate::wave_model::{match_kind, FibRatios};

    fn signal(direction: SignalDirection, entry: f64, n: usize) -> Signal {
        let m = match_kind(
            PatternKind::ImpulseComplete,
            &pivots_from_prices(&[100.0, 110.0, 104.0, 120.0, 112.0, 126.0]),
            &FibRatios::default(),
        )
        .unwrap()
        .unwrap();
        Signal {
            direction,
            entry,
            target: 0.0,
            backup_level: 0.0,
            horizon_n: n,
            issued_at: 0,
            source_pattern: m,
            rationale: String::new(),
        }
    }

    fn closes(xs: &[f64]) -> CandleSeries {
        let mut b = crate::synthetic::PathBuilder::new(100.0);
        b = b.closes(xs);
        b.build("T", Interval::Daily)
    }

    #[test]
    fn evaluation_examples() {
        let s = closes(&[101.0, 102.0, 103.0]);
        assert!(
            evaluate_prediction(&signal(SignalDirection::Buy, 100.0, 3), &s)
                .unwrap()
                .correct
        );
        let s = closes(&[101.0, 103.0]);
        let o = evaluate_prediction(&signal(SignalDirection::Sell, 100.0, 2), &s).unwrap();
        assert_eq!(o.mean_future_price, 102.0);
        assert!(!o.correct);
        let s = closes(&[99.0, 101.0]);
        assert!(
            !evaluate_prediction(&signal(SignalDirection::Buy, 100.0, 2), &s)
                .unwrap()
                .correct
        );
        assert!(matches!(
            evaluate_prediction(&signal(SignalDirection::Buy, 100.0, 3), &s),
            Err(Error::InsufficientFuture {
                needed: 3,
                available: 2,
                ..
            })
        ));
    }

    #[test]
    fn q_update_and_filter() {
        let sig = signal(SignalDirection::Sell, 100.0, 1);
        let key = TableKey::for_signal(&sig, Interval::Daily);
        let mut t = BacktestTable::new();
        assert_eq!(t.estimate(&key).q_value, 0.5);
        for _ in 0..4 {
            t.record(key, true, 0.5);
        }
        assert_eq!(t.get(&key).unwrap().trials, 4);
        assert!((t.get(&key).unwrap().q_value - (1.0 - 0.5f64.powi(5))).abs() < 1e-12);
        // not enough trials yet
        assert!(
            filter_with_table(std::slice::from_ref(&sig), &t, Interval::Daily, 0.6, 5).is_empty()
        );
        t.record(key, true, 0.5);
        assert_eq!(
            filter_with_table(std::slice::from_ref(&sig), &t, Interval::Daily, 0.6, 5).len(),
            1
        );
        for _ in 0..10 {
            t.record(key, false, 0.5);
        }
        assert!(filter_with_table(&[sig], &t, Interval::Daily, 0.6, 5).is_empty());
        assert_eq!(t.decide(&key, 0.5, 5), Decision::Fade);
    }

    #[test]
    fn table_json_round_trip() {
        let sig = signal(SignalDirection::Sell, 100.0, 1);
        let mut t = BacktestTable::new();
        t.record(TableKey::for_signal(&sig, Interval::Hourly), true, 0.1);
        t.record(TableKey::for_signal(&sig, Interval::Daily), false, 0.1);
        let text = t.to_json().unwrap();
        assert!(text.contains("\"version\": 1"));
        assert_eq!(BacktestTable::from_json(&text).unwrap(), t);
        let bad = text.replace("\"hits\": 1", "\"hits\": 7");
        assert!(BacktestTable::from_json(&bad).is_err());
    }

    #[test]
    fn no_patterns_gives_empty_table() {
        let s = series_from_pivot_prices(&[100.0, 150.0], 40);
        let t = train(&s, &SignalConfig::default(), &LearnParams::default()).unwrap();
        assert!(t.is_empty());
    }

    #[test]
    fn short_series_rejected() {
        let s = closes(&[101.0, 102.0]);
        assert!(matches!(
            train(&s, &SignalConfig::default(), &LearnParams::default()),
            Err(Error::SeriesTooShort(_))
        ));
        let cv = CrossValConfig::default();
        assert!(matches!(
            cross_validate(&s, &SignalConfig::default(), &cv, None),
            Err(Error::SeriesTooShort(_))
        ));
    }

    #[test]
    fn folds_cover_series() {
        assert_eq!(
            fold_bounds(103, 5),
            vec![(0, 20), (20, 40), (40, 60), (60, 80), (80, 103)]
        );
    }
}
