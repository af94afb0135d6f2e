//! OHLCV candles, CSV ingestion and calendar resampling.
//!
//! A [`CandleSeries`] is validated once at construction and is immutable
//! afterwards, so it can be shared freely between threads.

use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 6] = ["timestamp", "open", "high", "low", "close", "volume"];

const SECONDS_PER_DAY: i64 = 86_400;

/// Bar spacing of a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interval {
    Hourly,
    Daily,
}

impl Interval {
    pub fn seconds(self) -> i64 {
        match self {
            Interval::Hourly => 3_600,
            Interval::Daily => SECONDS_PER_DAY,
        }
    }

    /// Zigzag reversal fraction used when the caller does not override it.
    pub fn default_pivot_threshold(self) -> f64 {
        match self {
            Interval::Hourly => 0.01,
            Interval::Daily => 0.03,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Interval::Hourly => "hourly",
            Interval::Daily => "daily",
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Interval {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "hourly" | "1h" => Ok(Interval::Hourly),
            "daily" | "1d" => Ok(Interval::Daily),
            other => Err(format!(
                "unknown interval '{other}' (expected hourly or daily)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candle {
    pub timestamp: i64,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    pub volume: f64,
}

impl Candle {
    pub fn new(timestamp: i64, open: f64, high: f64, low: f64, close: f64, volume: f64) -> Self {
        Self {
            timestamp,
            open,
            high,
            low,
            close,
            volume,
        }
    }

    /// Checks the OHLC invariants, returning a short reason on failure.
    pub fn check(&self) -> std::result::Result<(), String> {
        let prices = [self.open, self.high, self.low, self.close];
        if prices.iter().chain([&self.volume]).any(|v| !v.is_finite()) {
            return Err("non-finite value".into());
        }
        if self.low > self.high {
            return Err("low>high".into());
        }
        if prices.iter().any(|&p| p <= 0.0) {
            return Err("non-positive price".into());
        }
        if self.high < self.open.max(self.close) {
            return Err("high<max(open,close)".into());
        }
        if self.low > self.open.min(self.close) {
            return Err("low>min(open,close)".into());
        }
        if self.volume < 0.0 {
            return Err("negative volume".into());
        }
        Ok(())
    }
}

/// An ordered, validated run of candles for one symbol at one interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandleSeries {
    symbol: String,
    interval: Interval,
    candles: Vec<Candle>,
}

impl CandleSeries {
    /// Builds a series, rejecting invalid candles and non-increasing timestamps.
    pub fn new(
        symbol: impl Into<String>,
        interval: Interval,
        candles: Vec<Candle>,
    ) -> Result<Self> {
        for (i, c) in candles.iter().enumerate() {
            c.check()
                .map_err(|reason| Error::InvalidSeries(format!("candle {i}: {reason}")))?;
        }
        if let Some(i) = candles
            .windows(2)
            .position(|w| w[1].timestamp <= w[0].timestamp)
        {
            return Err(Error::InvalidSeries(format!(
                "timestamps not strictly increasing at candle {}",
                i + 1
            )));
        }
        Ok(Self {
            symbol: symbol.into(),
            interval,
            candles,
        })
    }

    pub fn symbol(&self) -> &str {
        &self.symbol
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn candles(&self) -> &[Candle] {
        &self.candles
    }

    pub fn len(&self) -> usize {
        self.candles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candles.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&Candle> {
        self.candles.get(index)
    }

    pub fn closes(&self) -> impl Iterator<Item = f64> + '_ {
        self.candles.iter().map(|c| c.close)
    }

    pub fn first_timestamp(&self) -> Option<i64> {
        self.candles.first().map(|c| c.timestamp)
    }

    pub fn last_timestamp(&self) -> Option<i64> {
        self.candles.last().map(|c| c.timestamp)
    }

    /// Candles with timestamps in `[from, to]`; symbol and interval are kept.
    pub fn slice(&self, from: i64, to: i64) -> CandleSeries {
        let start = self.candles.partition_point(|c| c.timestamp < from);
        let end = self.candles.partition_point(|c| c.timestamp <= to);
        self.slice_indices(start, end.max(start))
    }

    /// Candles at positions `[start, end)`.
    pub fn slice_indices(&self, start: usize, end: usize) -> CandleSeries {
        let end = end.min(self.candles.len());
        let start = start.min(end);
        CandleSeries {
            symbol: self.symbol.clone(),
            interval: self.interval,
            candles: self.candles[start..end].to_vec(),
        }
    }

    /// The first `len` candles: the data visible at index `len - 1`.
    pub fn prefix(&self, len: usize) -> CandleSeries {
        self.slice_indices(0, len)
    }

    /// Aggregates into UTC calendar buckets of the target interval.
    pub fn resample(&self, target: Interval) -> Result<CandleSeries> {
        if target < self.interval {
            return Err(Error::FinerInterval {
                from: self.interval.to_string(),
                to: target.to_string(),
            });
        }
        if target == self.interval {
            return Ok(self.clone());
        }
        let width = target.seconds();
        let mut out: Vec<Candle> = Vec::new();
        let mut current_bucket = None;
        for c in &self.candles {
            let bucket = c.timestamp.div_euclid(width) * width;
            match out.last_mut() {
                Some(agg) if current_bucket == Some(bucket) => {
                    agg.high = agg.high.max(c.high);
                    agg.low = agg.low.min(c.low);
                    agg.close = c.close;
                    agg.volume += c.volume;
                }
                _ => {
                    current_bucket = Some(bucket);
                    out.push(Candle {
                        timestamp: bucket,
                        ..*c
                    });
                }
            }
        }
        CandleSeries::new(self.symbol.clone(), target, out)
    }

    /// Writes the canonical CSV form read by [`load_csv`].
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(writer);
        let io_err = |e: csv::Error| Error::Io {
            path: "<writer>".into(),
            source: e.into(),
        };
        w.write_record(CSV_HEADER).map_err(io_err)?;
        for c in &self.candles {
            w.write_record([
                c.timestamp.to_string(),
                c.open.to_string(),
                c.high.to_string(),
                c.low.to_string(),
                c.close.to_string(),
                c.volume.to_string(),
            ])
            .map_err(io_err)?;
        }
        w.flush().map_err(|e| Error::Io {
            path: "<writer>".into(),
            source: e,
        })
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        self.write_csv(file)
    }
}

/// Loads `timestamp,open,high,low,close,volume` rows from a file.
pub fn load_csv(path: impl AsRef<Path>, symbol: &str, interval: Interval) -> Result<CandleSeries> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file, symbol, interval)
}

/// Parses CSV from any reader. Line numbers in errors count the header as line 1.
pub fn read_csv<R: Read>(reader: R, symbol: &str, interval: Interval) -> Result<CandleSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let headers = rdr.headers().map_err(|e| Error::MalformedRow {
        line: 1,
        reason: e.to_string(),
    })?;
    if headers.is_empty() {
        return Err(Error::EmptyFile);
    }
    if headers.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::MalformedRow {
            line: 1,
            reason: format!("expected header '{}'", CSV_HEADER.join(",")),
        });
    }

    let mut rows: Vec<(u64, Candle)> = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::MalformedRow {
            line: e.position().map_or(0, |p| p.line()),
            reason: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 6 {
            return Err(Error::MalformedRow {
                line,
                reason: format!("expected 6 columns, found {}", record.len()),
            });
        }
        let timestamp: i64 = record[0].parse().map_err(|_| Error::MalformedRow {
            line,
            reason: format!("bad timestamp '{}'", &record[0]),
        })?;
        let mut values = [0.0f64; 5];
        for (slot, (field, name)) in values
            .iter_mut()
            .zip(record.iter().skip(1).zip(CSV_HEADER.iter().skip(1)))
        {
            *slot = field.parse().map_err(|_| Error::MalformedRow {
                line,
                reason: format!("bad {name} '{field}'"),
            })?;
        }
        let [open, high, low, close, volume] = values;
        let candle = Candle::new(timestamp, open, high, low, close, volume);
        candle
            .check()
            .map_err(|reason| Error::InvalidCandle { line, reason })?;
        rows.push((line, candle));
    }
    if rows.is_empty() {
        return Err(Error::EmptyFile);
    }

    rows.sort_by_key(|(_, c)| c.timestamp);
    if let Some(w) = rows
        .windows(2)
        .find(|w| w[0].1.timestamp == w[1].1.timestamp)
    {
        let line = w[0].0.max(w[1].0);
        return Err(Error::DuplicateTimestamp {
            line,
            timestamp: w[1].1.timestamp,
        });
    }

    CandleSeries::new(symbol, interval, rows.into_iter().map(|(_, c)| c).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<CandleSeries> {
        read_csv(text.as_bytes(), "TEST", Interval::Daily)
    }

    #[test]
    fn single_valid_row() {
        let s = parse("timestamp,open,high,low,close,volume\n1,10,12,9,11,100\n").unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.candles()[0], Candle::new(1, 10.0, 12.0, 9.0, 11.0, 100.0));
    }

    #[test]
    fn inverted_bounds_report_line() {
        let err = parse("timestamp,open,high,low,close,volume\n1,10,9,12,11,100\n").unwrap_err();
        assert_eq!(err.to_string(), "low>high at line 2");
    }

    #[test]
    fn duplicate_timestamps_rejected() {
        let err = parse("timestamp,open,high,low,close,volume\n5,10,12,9,11,1\n5,10,12,9,11,1\n")
            .unwrap_err();
        assert!(matches!(
            err,
            Error::DuplicateTimestamp {
                line: 3,
                timestamp: 5
            }
        ));
    }

    #[test]
    fn empty_and_malformed_files() {
        assert!(matches!(
            parse("timestamp,open,high,low,close,volume\n"),
            Err(Error::EmptyFile)
        ));
        assert!(matches!(parse(""), Err(Error::EmptyFile)));
        let err = parse("timestamp,open,high,low,close,volume\n1,10,12,9\n").unwrap_err();
        assert!(matches!(err, Error::MalformedRow { line: 2, .. }));
        let err = parse("timestamp,open,high,low,close,volume\n1,10,12,9,11,1\nx,1,1,1,1,1\n")
            .unwrap_err();
        assert!(matches!(err, Error::MalformedRow { line: 3, .. }));
    }

    #[test]
    fn unsorted_rows_are_sorted() {
        let s = parse("timestamp,open,high,low,close,volume\n20,10,12,9,11,1\n10,10,12,9,11,1\n")
            .unwrap();
        assert_eq!(s.first_timestamp(), Some(10));
        assert_eq!(s.last_timestamp(), Some(20));
    }

    fn sample() -> CandleSeries {
        let candles = (0..5)
            .map(|i| Candle::new(i * 10, 10.0, 11.0, 9.0, 10.5, 1.0))
            .collect();
        CandleSeries::new("S", Interval::Daily, candles).unwrap()
    }

    #[test]
    fn slice_edges() {
        let s = sample();
        assert_eq!(s.slice(0, 40), s);
        assert_eq!(s.slice(20, 20).len(), 1);
        assert!(s.slice(21, 29).is_empty());
        assert!(s.slice(100, 200).is_empty());
        assert_eq!(s.slice(20, 20).symbol(), "S");
    }

    #[test]
    fn resample_aggregates_one_day() {
        let day = 19_000 * SECONDS_PER_DAY;
        let hourly = CandleSeries::new(
            "S",
            Interval::Hourly,
            vec![
                Candle::new(day + 3_600, 10.0, 12.0, 9.0, 11.0, 5.0),
                Candle::new(day + 7_200, 11.0, 15.0, 10.0, 14.0, 7.0),
            ],
        )
        .unwrap();
        let daily = hourly.resample(Interval::Daily).unwrap();
        assert_eq!(daily.len(), 1);
        assert_eq!(
            daily.candles()[0],
            Candle::new(day, 10.0, 15.0, 9.0, 14.0, 12.0)
        );
    }

    #[test]
    fn resample_single_candle_bucket_and_finer_error() {
        let hourly = CandleSeries::new(
            "S",
            Interval::Hourly,
            vec![Candle::new(SECONDS_PER_DAY * 3, 10.0, 12.0, 9.0, 11.0, 5.0)],
        )
        .unwrap();
        let daily = hourly.resample(Interval::Daily).unwrap();
        assert_eq!(daily.candles()[0], hourly.candles()[0]);
        assert!(matches!(
            daily.resample(Interval::Hourly),
            Err(Error::FinerInterval { .. })
        ));
    }

    #[test]
    fn rejects_non_increasing_timestamps() {
        let c = Candle::new(1, 1.0, 1.0, 1.0, 1.0, 0.0);
        assert!(CandleSeries::new("S", Interval::Daily, vec![c, c]).is_err());
    }
}
