//! Command-line front end: `scan`, `analyze`, `backtest-train`, `crossval`
//! and `replay`.
//!
//! Exit codes are 0 on success, 1 when the analysis itself fails and 2 for
//! usage errors (bad flags, unreadable input path).

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDate};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::backtester::{
    cross_validate, train_with_log, CrossValConfig, LearnParams, RECOMMENDED_CV_LEN,
};
use crate::error::Error;
use crate::levels_signals::SignalConfig;
use crate::market_data::{load_csv, CandleSeries, Interval};
use crate::pattern_search::{matches_to_json, scan, SearchConfig};
use crate::pipeline_report::{run_pipeline, AnalysisRequest, DataSource, TemplateNarrator};
use crate::pivots::extract_pivots;
use crate::replay::replay;
use crate::wave_model::PatternKind;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "elliott",
    version,
    about = "Elliott wave scanning, signals and backtesting"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find wave patterns and print them as JSON.
    Scan(Common),
    /// Run the full pipeline and write report.md, report.json and chart.svg.
    Analyze(AnalyzeArgs),
    /// Learn a reliability table from historical signals.
    BacktestTrain(TrainArgs),
    /// Cross-validate signal accuracy with and without the reliability table.
    Crossval(CrossvalArgs),
    /// Step through the series and log every signal as it appears.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Candle CSV with a timestamp,open,high,low,close,volume header.
    #[arg(long)]
    pub input: PathBuf,
    /// Symbol label; defaults to the input file stem.
    #[arg(long)]
    pub symbol: Option<String>,
    #[arg(long, default_value = "daily", value_parser = parse_interval)]
    pub interval: Interval,
    /// Window start: unix seconds, YYYY-MM-DD or RFC 3339.
    #[arg(long, value_parser = parse_from)]
    pub from: Option<i64>,
    /// Window end (inclusive; a bare date covers the whole day).
    #[arg(long, value_parser = parse_to)]
    pub to: Option<i64>,
    /// Zigzag reversal fraction; defaults to 0.03 daily, 0.01 hourly.
    #[arg(long, value_parser = parse_threshold)]
    pub pivot_threshold: Option<f64>,
    /// Comma-separated pattern kinds, e.g. impulse4,impulse5,diagonal.
    #[arg(long, value_delimiter = ',', value_parser = parse_kind)]
    pub kinds: Vec<PatternKind>,
    /// Output directory; results go to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Accepted for reproducible invocations; every command is deterministic.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct LearnArgs {
    /// Learning rate of the table update.
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1)]
    pub epochs: usize,
    /// Trials a context needs before the table acts on it.
    #[arg(long, default_value_t = 5)]
    pub min_trials: u64,
}

impl LearnArgs {
    fn params(&self) -> LearnParams {
        LearnParams {
            alpha: self.alpha,
            epochs: self.epochs,
            min_trials: self.min_trials,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NarratorChoice {
    Template,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub learn: LearnArgs,
    /// Saved reliability table, used when the file exists.
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Candle CSV to train the table on when no saved table is available.
    #[arg(long)]
    pub history: Option<PathBuf>,
    /// Patterns whose table value falls below this are skipped.
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    #[arg(long, value_enum, default_value = "template")]
    pub narrator: NarratorChoice,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub learn: LearnArgs,
    /// Where to write the table; defaults to table.json under --out.
    #[arg(long)]
    pub table: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CrossvalArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub learn: LearnArgs,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    /// Adds the column that follows or fades predictions by table value.
    #[arg(long)]
    pub with_backtesting: bool,
    /// Candle CSV to train the table on; otherwise each fold learns from
    /// the candles before it.
    #[arg(long)]
    pub history: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    #[command(flatten)]
    pub common: Common,
    /// Candles between analysis steps.
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
}

fn parse_interval(s: &str) -> Result<Interval, String> {
    s.parse()
}

fn parse_kind(s: &str) -> Result<PatternKind, String> {
    s.parse()
}

fn parse_threshold(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is outside (0, 1)"))
    }
}

fn parse_time(s: &str, end_of_day: bool) -> Result<i64, String> {
    if let Ok(ts) = s.parse::<i64>() {
        return Ok(ts);
    }
    if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        let t = if end_of_day {
            d.and_hms_opt(23, 59, 59)
        } else {
            d.and_hms_opt(0, 0, 0)
        };
        return Ok(t.expect("valid time of day").and_utc().timestamp());
    }
    DateTime::parse_from_rfc3339(s)
        .map(|t| t.timestamp())
        .map_err(|_| format!("'{s}' is not unix seconds, YYYY-MM-DD or RFC 3339"))
}

fn parse_from(s: &str) -> Result<i64, String> {
    parse_time(s, false)
}

fn parse_to(s: &str) -> Result<i64, String> {
    parse_time(s, true)
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

type CmdResult = std::result::Result<(), Failure>;

impl Common {
    fn symbol(&self) -> String {
        self.symbol.clone().unwrap_or_else(|| {
            self.input
                .file_stem()
                .map(|s| s.to_string_lossy().to_uppercase())
                .unwrap_or_else(|| "SYM".to_string())
        })
    }

    fn signal_config(&self) -> SignalConfig {
        let mut search = SearchConfig::default();
        if !self.kinds.is_empty() {
            search.kinds = self.kinds.iter().copied().collect::<BTreeSet<_>>();
        }
        SignalConfig {
            pivot_threshold: self.pivot_threshold,
            search,
            ..SignalConfig::default()
        }
    }

    fn check_input(&self) -> CmdResult {
        check_path(&self.input, "--input")
    }

    /// Loads the input and cuts it to the requested window.
    fn load(&self) -> std::result::Result<CandleSeries, Failure> {
        self.check_input()?;
        let series = load_csv(&self.input, &self.symbol(), self.interval)?;
        let window = series.slice(self.from.unwrap_or(i64::MIN), self.to.unwrap_or(i64::MAX));
        if window.is_empty() {
            return Err(Failure::Runtime(Error::EmptySeries));
        }
        Ok(window)
    }
}

fn check_path(path: &Path, flag: &str) -> CmdResult {
    if path.is_file() {
        Ok(())
    } else {
        Err(Failure::Usage(format!(
            "{flag}: no such file {}",
            path.display()
        )))
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `text` to `out/name`, or to stdout when no directory was given.
fn emit(out: Option<&Path>, name: &str, text: &str) -> CmdResult {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(io_err(dir))?;
            let path = dir.join(name);
            std::fs::write(&path, text).map_err(io_err(&path))?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(io_err(Path::new("<stdout>")))?;
        }
    }
    Ok(())
}

fn cmd_scan(args: &Common) -> CmdResult {
    let series = args.load()?;
    let config = args.signal_config();
    let pivots = extract_pivots(&series, config.threshold_for(&series))?;
    let matches = scan(&series, &pivots, &config.search)?;
    emit(
        args.out.as_deref(),
        "matches.json",
        &(matches_to_json(&matches)? + "\n"),
    )
}

fn cmd_analyze(args: &AnalyzeArgs) -> CmdResult {
    let c = &args.common;
    let mut request =
        AnalysisRequest::new(DataSource::File(c.input.clone()), c.symbol(), c.interval);
    request.from = c.from;
    request.to = c.to;
    request.signal = c.signal_config();
    request.table = args.table.clone();
    request.history = args.history.clone();
    request.learn = args.learn.params();
    request.threshold = args.threshold;
    let narrator = match args.narrator {
        NarratorChoice::Template => TemplateNarrator,
    };
    let output = run_pipeline(&request, &narrator)?;
    for stage in &output.trace {
        for d in &stage.diagnostics {
            eprintln!("{}: {d}", stage.stage);
        }
    }
    match &c.out {
        Some(dir) => output.write_to(dir)?,
        None => emit(None, "", &output.report.narrative)?,
    }
    Ok(())
}

fn cmd_train(args: &TrainArgs) -> CmdResult {
    let series = args.common.load()?;
    let (table, outcomes) =
        train_with_log(&series, &args.common.signal_config(), &args.learn.params())?;
    eprintln!("trained on {} resolved signals", outcomes.len());
    for (kind, s) in table.summary() {
        eprintln!(
            "{}: {} trials, {:.2}% hits",
            kind.title(),
            s.trials,
            s.hit_rate * 100.0
        );
    }
    let text = table.to_json()? + "\n";
    match (&args.table, &args.common.out) {
        (Some(path), _) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).map_err(io_err(parent))?;
            }
            std::fs::write(path, text).map_err(io_err(path))?;
            Ok(())
        }
        (None, out) => emit(out.as_deref(), "table.json", &text),
    }
}

fn cmd_crossval(args: &CrossvalArgs) -> CmdResult {
    let c = &args.common;
    let series = c.load()?;
    let history = match &args.history {
        Some(path) => {
            check_path(path, "--history")?;
            Some(load_csv(path, &c.symbol(), c.interval)?)
        }
        None => None,
    };
    let cv = CrossValConfig {
        folds: args.folds,
        with_backtesting: args.with_backtesting,
        threshold: args.threshold,
        learn: args.learn.params(),
    };
    if series.len() < RECOMMENDED_CV_LEN {
        eprintln!(
            "warning: series has {} candles; at least {RECOMMENDED_CV_LEN} are recommended",
            series.len()
        );
    }
    let report = cross_validate(&series, &c.signal_config(), &cv, history.as_ref())?;
    print!("{report}");
    if let Some(dir) = &c.out {
        emit(Some(dir), "crossval.json", &(report.to_json()? + "\n"))?;
    }
    Ok(())
}

fn cmd_replay(args: &ReplayArgs) -> CmdResult {
    let series = args.common.load()?;
    let log = replay(&series, &args.common.signal_config(), args.stride)?;
    emit(
        args.common.out.as_deref(),
        "replay.json",
        &(log.to_json()? + "\n"),
    )
}

/// Parses `args` (program name first) and runs the chosen command.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match &cli.command {
        Command::Scan(a) => cmd_scan(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::BacktestTrain(a) => cmd_train(a),
        Command::Crossval(a) => cmd_crossval(a),
        Command::Replay(a) => cmd_replay(a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}
