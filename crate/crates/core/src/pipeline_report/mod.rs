//! Six-stage analysis pipeline and its report.
//!
//! DataEngineer loads and slices candles; WaveAnalyst finds pivots and
//! patterns while Backtester prepares the reliability table; TAExpert picks
//! the pattern to act on; Advisor turns it into levels and a signal;
//! ReportWriter renders the narrative and chart.

pub mod chart;
pub mod narrative;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::Serialize;
use serde_json::{json, Value};

use crate::backtester::{
    train, BacktestTable, Decision, KindSummary, LearnParams, TableKey, MIN_TRAIN_LEN,
};
use crate::error::{Error, Result};
use crate::levels_signals::{
    derive_levels_with, make_signal, related_matches, LevelSet, Signal, SignalConfig,
};
use crate::market_data::{load_csv, CandleSeries, Interval};
use crate::pattern_search::latest_actionable;
use crate::pivots::extract_pivots;
use crate::wave_model::{PatternKind, PatternMatch};

pub use chart::render_chart;
pub use narrative::{render_narrative, NarrativePayload, Narrator, TemplateNarrator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Stage {
    DataEngineer,
    WaveAnalyst,
    Backtester,
    TAExpert,
    Advisor,
    ReportWriter,
}

impl Stage {
    pub const ORDER: [Stage; 6] = [
        Stage::DataEngineer,
        Stage::WaveAnalyst,
        Stage::Backtester,
        Stage::TAExpert,
        Stage::Advisor,
        Stage::ReportWriter,
    ];
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageResult {
    pub stage: Stage,
    pub payload: Value,
    /// Wall time; left out of serialized output so reports stay reproducible.
    #[serde(skip)]
    pub elapsed: Duration,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone)]
pub enum DataSource {
    File(PathBuf),
    Series(CandleSeries),
}

#[derive(Debug, Clone)]
pub struct AnalysisRequest {
    pub source: DataSource,
    pub symbol: String,
    pub interval: Interval,
    /// Inclusive window bounds, unix seconds.
    pub from: Option<i64>,
    pub to: Option<i64>,
    pub signal: SignalConfig,
    /// Saved table to use when the file exists.
    pub table: Option<PathBuf>,
    /// Earlier candles to train on when no saved table is available.
    pub history: Option<PathBuf>,
    pub learn: LearnParams,
    /// Minimum table value for a pattern to stay eligible.
    pub threshold: f64,
}

impl AnalysisRequest {
    pub fn new(source: DataSource, symbol: impl Into<String>, interval: Interval) -> Self {
        Self {
            source,
            symbol: symbol.into(),
            interval,
            from: None,
            to: None,
            signal: SignalConfig::default(),
            table: None,
            history: None,
            learn: LearnParams::default(),
            threshold: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Window {
    pub from: Option<i64>,
    pub to: Option<i64>,
    pub candles: usize,
    pub first_timestamp: Option<i64>,
    pub last_timestamp: Option<i64>,
    pub last_close: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub symbol: String,
    pub interval: Interval,
    pub window: Window,
    pub pivot_threshold: f64,
    pub matched_patterns: Vec<PatternMatch>,
    pub selected_pattern: Option<PatternMatch>,
    pub levels: LevelSet,
    pub signal: Option<Signal>,
    pub backtest_source: String,
    pub backtest_summary: BTreeMap<PatternKind, KindSummary>,
    pub narrative: String,
    /// File name of the chart written next to the report.
    pub chart: String,
}

impl AnalysisReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub report: AnalysisReport,
    pub chart_svg: String,
    pub trace: Vec<StageResult>,
}

pub const CHART_FILE: &str = "chart.svg";
pub const REPORT_MD_FILE: &str = "report.md";
pub const REPORT_JSON_FILE: &str = "report.json";
pub const TRACE_FILE: &str = "trace.json";

impl PipelineOutput {
    /// Writes the markdown report, its JSON sidecar, the chart and the stage
    /// trace into `dir`.
    pub fn write_to(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        let io = |path: PathBuf| move |source| Error::Io { path, source };
        std::fs::create_dir_all(dir).map_err(io(dir.to_path_buf()))?;
        let files = [
            (REPORT_MD_FILE, self.report.narrative.clone()),
            (REPORT_JSON_FILE, self.report.to_json()? + "\n"),
            (CHART_FILE, self.chart_svg.clone()),
            (
                TRACE_FILE,
                serde_json::to_string_pretty(&self.trace)? + "\n",
            ),
        ];
        for (name, text) in files {
            let path = dir.join(name);
            std::fs::write(&path, text).map_err(io(path.clone()))?;
        }
        Ok(())
    }
}

fn stage_err(stage: Stage) -> impl FnOnce(Error) -> Error {
    move |e| Error::Stage {
        stage: stage.to_string(),
        source: Box::new(e),
    }
}

struct Timed<T> {
    value: T,
    result: StageResult,
}

/// A stage's output, its trace payload and its diagnostics.
type StageOut<T> = Result<(T, Value, Vec<String>)>;

fn timed<T>(stage: Stage, f: impl FnOnce() -> StageOut<T>) -> Result<Timed<T>> {
    let start = Instant::now();
    let (value, payload, diagnostics) = f().map_err(stage_err(stage))?;
    Ok(Timed {
        value,
        result: StageResult {
            stage,
            payload,
            elapsed: start.elapsed(),
            diagnostics,
        },
    })
}

struct Data {
    full: CandleSeries,
    window: CandleSeries,
    window_start: usize,
}

fn data_engineer(request: &AnalysisRequest) -> StageOut<Data> {
    let full = match &request.source {
        DataSource::File(path) => load_csv(path, &request.symbol, request.interval)?,
        DataSource::Series(s) => s.clone(),
    };
    let from = request.from.unwrap_or(i64::MIN);
    let to = request.to.unwrap_or(i64::MAX);
    let window_start = full.candles().partition_point(|c| c.timestamp < from);
    let window = full.slice(from, to);
    if window.is_empty() {
        return Err(Error::EmptySeries);
    }
    let mut diagnostics = Vec::new();
    if window.len() < full.len() {
        diagnostics.push(format!(
            "window holds {} of {} loaded candles",
            window.len(),
            full.len()
        ));
    }
    let payload = json!({
        "symbol": request.symbol,
        "interval": request.interval,
        "loaded_candles": full.len(),
        "window_candles": window.len(),
        "first_timestamp": window.first_timestamp(),
        "last_timestamp": window.last_timestamp(),
    });
    Ok((
        Data {
            full,
            window,
            window_start,
        },
        payload,
        diagnostics,
    ))
}

struct Waves {
    threshold: f64,
    matches: Vec<PatternMatch>,
}

fn wave_analyst(series: &CandleSeries, config: &SignalConfig) -> StageOut<Waves> {
    let threshold = config.threshold_for(series);
    let pivots = extract_pivots(series, threshold)?;
    let matches = crate::pattern_search::scan(series, &pivots, &config.search)?;
    let mut by_kind: BTreeMap<PatternKind, usize> = BTreeMap::new();
    for m in &matches {
        *by_kind.entry(m.kind).or_default() += 1;
    }
    let payload = json!({
        "pivot_threshold": threshold,
        "pivots": pivots.len(),
        "confirmed_pivots": pivots.confirmed_count(),
        "matches": matches.len(),
        "matches_by_kind": by_kind,
    });
    Ok((Waves { threshold, matches }, payload, Vec::new()))
}

fn backtester_stage(request: &AnalysisRequest, data: &Data) -> StageOut<(BacktestTable, String)> {
    let mut diagnostics = Vec::new();
    let (table, source) = 'found: {
        if let Some(path) = &request.table {
            if path.exists() {
                break 'found (
                    BacktestTable::load(path)?,
                    format!("loaded from {}", path.display()),
                );
            }
            diagnostics.push(format!("table file {} not found", path.display()));
        }
        if let Some(path) = &request.history {
            let history = load_csv(path, &request.symbol, request.interval)?;
            let table = train(&history, &request.signal, &request.learn)?;
            break 'found (
                table,
                format!("trained on {} history candles", history.len()),
            );
        }
        if data.window_start >= MIN_TRAIN_LEN {
            let before = data.full.prefix(data.window_start);
            let table = train(&before, &request.signal, &request.learn)?;
            break 'found (
                table,
                format!("trained on {} candles before the window", before.len()),
            );
        }
        diagnostics.push("no history before the window; reliability table is empty".to_string());
        (BacktestTable::new(), "empty (no history)".to_string())
    };
    let payload = json!({
        "source": source,
        "entries": table.len(),
        "summary": table.summary(),
    });
    Ok(((table, source), payload, diagnostics))
}

fn ta_expert(
    series: &CandleSeries,
    matches: &[PatternMatch],
    table: &BacktestTable,
    request: &AnalysisRequest,
) -> StageOut<Option<PatternMatch>> {
    let mut candidates: Vec<PatternMatch> = matches
        .iter()
        .filter(|m| m.final_pivot().confirmed_at.is_some())
        .cloned()
        .collect();
    let mut rejected = Vec::new();
    let chosen = loop {
        let Some(best) = latest_actionable(&candidates, series) else {
            break None;
        };
        let key = TableKey::for_pattern(&best, series.interval());
        if table.decide(&key, request.threshold, request.learn.min_trials) == Decision::Fade {
            rejected.push(json!({
                "kind": best.kind,
                "candles": best.candle_indices(),
                "q_value": table.estimate_of(&key),
            }));
            candidates.retain(|m| *m != best);
            continue;
        }
        break Some(best);
    };
    let mut diagnostics = Vec::new();
    if !rejected.is_empty() {
        diagnostics.push(format!(
            "{} candidate(s) rejected by the reliability table",
            rejected.len()
        ));
    }
    let payload = json!({
        "selected": chosen.as_ref().map(|m| json!({
            "kind": m.kind,
            "direction": m.direction,
            "score": m.score,
            "candles": m.candle_indices(),
        })),
        "rejected": rejected,
    });
    Ok((chosen, payload, diagnostics))
}

fn advisor(
    series: &CandleSeries,
    matches: &[PatternMatch],
    chosen: Option<&PatternMatch>,
    request: &AnalysisRequest,
    threshold: f64,
) -> StageOut<(LevelSet, Option<Signal>)> {
    let current = series.candles().last().map(|c| c.close).unwrap_or(0.0);
    let ratios = &request.signal.search.ratios;
    let anchor = chosen.or_else(|| matches.last());
    let levels = match anchor {
        Some(a) => derive_levels_with(&related_matches(matches, a), current, ratios)?,
        None => LevelSet::default(),
    };
    let signal = chosen.and_then(|m| {
        make_signal(
            m,
            series,
            &levels,
            ratios,
            request.signal.confirmation(threshold),
        )
    });
    let mut diagnostics = Vec::new();
    if chosen.is_some() && signal.is_none() {
        diagnostics.push("selected pattern has no confirmed reversal yet".to_string());
    }
    let payload = json!({ "levels": levels, "signal": signal });
    Ok(((levels, signal), payload, diagnostics))
}

/// Runs all six stages. A failing stage aborts the run and is named in the
/// error; finding no pattern is not a failure.
pub fn run_pipeline(request: &AnalysisRequest, narrator: &dyn Narrator) -> Result<PipelineOutput> {
    let mut trace = Vec::new();

    let data = timed(Stage::DataEngineer, || data_engineer(request))?;
    trace.push(data.result);
    let data = data.value;
    let series = &data.window;

    let (waves, table) = std::thread::scope(|scope| {
        let waves =
            scope.spawn(|| timed(Stage::WaveAnalyst, || wave_analyst(series, &request.signal)));
        let table = timed(Stage::Backtester, || backtester_stage(request, &data));
        (waves.join().expect("wave analyst panicked"), table)
    });
    let waves = waves?;
    let table = table?;
    trace.push(waves.result);
    trace.push(table.result);
    let Waves { threshold, matches } = waves.value;
    let (table, table_source) = table.value;

    let chosen = timed(Stage::TAExpert, || {
        ta_expert(series, &matches, &table, request)
    })?;
    trace.push(chosen.result);
    let chosen = chosen.value;

    let advice = timed(Stage::Advisor, || {
        advisor(series, &matches, chosen.as_ref(), request, threshold)
    })?;
    trace.push(advice.result);
    let (levels, signal) = advice.value;

    let window = Window {
        from: request.from,
        to: request.to,
        candles: series.len(),
        first_timestamp: series.first_timestamp(),
        last_timestamp: series.last_timestamp(),
        last_close: series.candles().last().map(|c| c.close),
    };
    let summary = table.summary();
    let written = timed(Stage::ReportWriter, || {
        let payload = NarrativePayload {
            symbol: &request.symbol,
            interval: request.interval,
            window: &window,
            pattern_count: matches.len(),
            selected_pattern: chosen.as_ref(),
            levels: &levels,
            signal: signal.as_ref(),
            backtest_source: &table_source,
            backtest_summary: &summary,
        };
        let (narrative, diagnostics) = render_narrative(&payload, narrator);
        let shown: Vec<PatternMatch> = chosen.iter().cloned().collect();
        let svg = render_chart(series, &shown, &levels, signal.as_ref())?;
        let payload = json!({
            "narrator": narrator.name(),
            "narrative_bytes": narrative.len(),
            "chart_bytes": svg.len(),
        });
        Ok(((narrative, svg), payload, diagnostics))
    })?;
    trace.push(written.result);
    let (narrative, chart_svg) = written.value;

    Ok(PipelineOutput {
        report: AnalysisReport {
            symbol: request.symbol.clone(),
            interval: request.interval,
            window,
            pivot_threshold: threshold,
            matched_patterns: matches,
            selected_pattern: chosen,
            levels,
            signal,
            backtest_source: table_source,
            backtest_summary: summary,
            narrative,
            chart: CHART_FILE.to_string(),
        },
        chart_svg,
        trace,
    })
}
