//! Support/resistance levels, Fibonacci targets, evaluation horizons and
//! buy/sell signals derived from a chosen pattern.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::market_data::CandleSeries;
use crate::pattern_search::{latest_actionable, scan, SearchConfig};
use crate::pivots::extract_pivots;
use crate::wave_model::{FibRatios, PatternKind, PatternMatch};

/// Relative distance under which two endpoint prices count as one level.
pub const MERGE_TOLERANCE: f64 = 0.001;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Target {
    pub price: f64,
    pub basis: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct LevelSet {
    pub supports: Vec<f64>,
    pub resistances: Vec<f64>,
    pub targets: Vec<Target>,
}

impl LevelSet {
    /// Supports and resistances together, ascending.
    pub fn all_levels(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .supports
            .iter()
            .chain(&self.resistances)
            .copied()
            .collect();
        v.sort_by(f64::total_cmp);
        v
    }
}

/// Levels from every wave endpoint of `matches`, with default ratios for the
/// targets.
pub fn derive_levels(matches: &[PatternMatch], current_price: f64) -> Result<LevelSet> {
    derive_levels_with(matches, current_price, &FibRatios::default())
}

pub fn derive_levels_with(
    matches: &[PatternMatch],
    current_price: f64,
    ratios: &FibRatios,
) -> Result<LevelSet> {
    if matches.is_empty() {
        return Err(Error::EmptyMatches);
    }
    let mut prices: Vec<f64> = matches.iter().flat_map(|m| m.endpoint_prices()).collect();
    prices.sort_by(f64::total_cmp);

    let mut merged = Vec::new();
    let mut cluster: Vec<f64> = Vec::new();
    for p in prices {
        if let Some(&first) = cluster.first() {
            if (p - first).abs() > MERGE_TOLERANCE * first.abs() {
                merged.push(mean(&cluster));
                cluster.clear();
            }
        }
        cluster.push(p);
    }
    if !cluster.is_empty() {
        merged.push(mean(&cluster));
    }

    let by_distance = |a: &f64, b: &f64| {
        (a - current_price)
            .abs()
            .total_cmp(&(b - current_price).abs())
            .then(a.total_cmp(b))
    };
    let (mut supports, mut resistances): (Vec<f64>, Vec<f64>) =
        merged.into_iter().partition(|&p| p <= current_price);
    supports.sort_by(by_distance);
    resistances.sort_by(by_distance);

    let mut targets: Vec<Target> = Vec::new();
    for m in matches {
        if let Ok(price) = project_target(m, ratios) {
            if !targets.iter().any(|t| t.price == price) {
                targets.push(Target {
                    price,
                    basis: target_basis(m.kind).to_string(),
                });
            }
        }
    }
    Ok(LevelSet {
        supports,
        resistances,
        targets,
    })
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn target_basis(kind: PatternKind) -> &'static str {
    match kind {
        PatternKind::ImpulseIncomplete => "projected wave-5 end: wave-4 end plus 1.62 x wave 1",
        PatternKind::ImpulseComplete | PatternKind::FifthWaveExtension => {
            "projected wave-A end: wave-5 end minus wave-5 length"
        }
        PatternKind::EndingDiagonal => "wave-2 end of the diagonal",
        PatternKind::AbcCorrection => "start of wave A",
        PatternKind::FullCycle => "wave-5 peak",
    }
}

/// Fibonacci price target of a pattern.
///
/// Impulses project forward from their last wave; an ending diagonal targets
/// its wave-2 end; an ABC correction targets the start of wave A; a full
/// cycle targets the wave-5 peak.
pub fn project_target(pattern: &PatternMatch, ratios: &FibRatios) -> Result<f64> {
    let s = pattern.direction.sign();
    let w = &pattern.waves;
    match pattern.kind {
        PatternKind::ImpulseIncomplete => {
            Ok(w[3].end.price + s * ratios.fifth_wave_multiple * w[0].price_length())
        }
        PatternKind::ImpulseComplete | PatternKind::FifthWaveExtension => {
            Ok(w[4].end.price - s * w[4].price_length())
        }
        PatternKind::EndingDiagonal => Ok(w[1].end.price),
        PatternKind::AbcCorrection => Ok(w[0].start.price),
        PatternKind::FullCycle => Ok(w[4].end.price),
    }
}

/// Candle count over which a prediction from `pattern` is judged.
pub fn eval_horizon(pattern: &PatternMatch, ratios: &FibRatios) -> usize {
    let n = match pattern.kind {
        PatternKind::ImpulseIncomplete => {
            (ratios.fifth_wave_multiple * pattern.waves[0].duration() as f64).round() as usize
        }
        _ => pattern.waves[pattern.waves.len() - 1].duration(),
    };
    n.max(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SignalDirection {
    Buy,
    Sell,
}

impl SignalDirection {
    pub fn sign(self) -> f64 {
        match self {
            SignalDirection::Buy => 1.0,
            SignalDirection::Sell => -1.0,
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            SignalDirection::Buy => SignalDirection::Sell,
            SignalDirection::Sell => SignalDirection::Buy,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SignalDirection::Buy => "buy",
            SignalDirection::Sell => "sell",
        }
    }
}

impl fmt::Display for SignalDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Trade direction implied by a pattern: finished impulses and diagonals are
/// traded against their trend, unfinished impulses and finished corrections
/// with it.
pub fn signal_direction(pattern: &PatternMatch) -> SignalDirection {
    let with_trend = match pattern.kind {
        PatternKind::ImpulseIncomplete | PatternKind::AbcCorrection | PatternKind::FullCycle => {
            true
        }
        PatternKind::ImpulseComplete
        | PatternKind::FifthWaveExtension
        | PatternKind::EndingDiagonal => false,
    };
    let up = (pattern.direction.sign() > 0.0) == with_trend;
    if up {
        SignalDirection::Buy
    } else {
        SignalDirection::Sell
    }
}

/// When a reversal off the final pivot counts as confirmed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Confirmation {
    /// First close beyond the final pivot by at least this fraction of its price.
    CloseBeyond(f64),
    /// First close beyond the final pivot by any amount.
    AnyClose,
}

impl Confirmation {
    /// Half the pivot threshold.
    pub fn for_threshold(pivot_threshold: f64) -> Self {
        Confirmation::CloseBeyond(0.5 * pivot_threshold)
    }

    fn confirms(self, direction: SignalDirection, pivot_price: f64, close: f64) -> bool {
        let move_ = direction.sign() * (close - pivot_price);
        match self {
            Confirmation::CloseBeyond(f) => move_ >= f * pivot_price,
            Confirmation::AnyClose => move_ > 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    pub direction: SignalDirection,
    pub entry: f64,
    pub target: f64,
    pub backup_level: f64,
    pub horizon_n: usize,
    pub issued_at: usize,
    pub source_pattern: PatternMatch,
    pub rationale: String,
}

impl Signal {
    pub fn pattern_kind(&self) -> PatternKind {
        self.source_pattern.kind
    }

    /// Target minus entry in the trade direction.
    pub fn theoretical_profit(&self) -> f64 {
        self.direction.sign() * (self.target - self.entry)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

impl Serialize for Signal {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("Signal", 8)?;
        st.serialize_field("direction", &self.direction)?;
        st.serialize_field("entry", &self.entry)?;
        st.serialize_field("target", &self.target)?;
        st.serialize_field("backup_level", &self.backup_level)?;
        st.serialize_field("horizon_n", &self.horizon_n)?;
        st.serialize_field("issued_at", &self.issued_at)?;
        st.serialize_field("pattern_kind", &self.source_pattern.kind)?;
        st.serialize_field("rationale", &self.rationale)?;
        st.end()
    }
}

/// Builds the signal for `pattern`, or `None` when the reversal is never
/// confirmed inside the horizon or the prices would not order correctly.
///
/// Only candles up to the confirming one are read.
pub fn make_signal(
    pattern: &PatternMatch,
    series: &CandleSeries,
    levels: &LevelSet,
    ratios: &FibRatios,
    confirmation: Confirmation,
) -> Option<Signal> {
    let last = pattern.final_pivot();
    let confirmed_at = last.confirmed_at?;
    let direction = signal_direction(pattern);
    let horizon_n = eval_horizon(pattern, ratios);
    let k = last.index;
    let start = confirmed_at.max(k + 1);
    let end = (k + horizon_n).min(series.len().checked_sub(1)?);
    let issued_at = (start..=end).find(|&c| {
        let close = series.candles()[c].close;
        confirmation.confirms(direction, last.price, close)
    })?;
    let entry = series.candles()[issued_at].close;
    let target = project_target(pattern, ratios).ok()?;

    // nearest level past the final pivot, on the losing side of the trade
    let s = direction.sign();
    let backup_level = levels
        .all_levels()
        .into_iter()
        .filter(|&p| s * (last.price - p) > 0.0)
        .min_by(|a, b| (a - last.price).abs().total_cmp(&(b - last.price).abs()))
        .unwrap_or(last.price);

    let ordered = s * (target - entry) > 0.0 && s * (entry - backup_level) > 0.0;
    if !ordered {
        return None;
    }

    let mut between: Vec<f64> = levels
        .all_levels()
        .into_iter()
        .filter(|&p| s * (p - entry) > 0.0 && s * (target - p) > 0.0)
        .collect();
    if direction == SignalDirection::Sell {
        between.reverse();
    }
    let rationale = rationale(
        pattern,
        direction,
        entry,
        target,
        backup_level,
        horizon_n,
        issued_at,
        &between,
    );
    Some(Signal {
        direction,
        entry,
        target,
        backup_level,
        horizon_n,
        issued_at,
        source_pattern: pattern.clone(),
        rationale,
    })
}

#[allow(clippy::too_many_arguments)]
fn rationale(
    pattern: &PatternMatch,
    direction: SignalDirection,
    entry: f64,
    target: f64,
    backup: f64,
    horizon_n: usize,
    issued_at: usize,
    between: &[f64],
) -> String {
    let last = pattern.final_pivot();
    let mut text = format!(
        "{} ({} trend, score {:.2}) ended at {:.2} on candle {}; {} confirmed at {:.2} on candle {}; \
         target {:.2} ({}); backup {:.2}; horizon {} candles.",
        pattern.kind.title(),
        pattern.direction.as_str(),
        pattern.score,
        last.price,
        last.index,
        direction,
        entry,
        issued_at,
        target,
        target_basis(pattern.kind),
        backup,
        horizon_n,
    );
    if !between.is_empty() {
        let side = match direction {
            SignalDirection::Buy => "resistance",
            SignalDirection::Sell => "support",
        };
        let list: Vec<String> = between.iter().map(|p| format!("{p:.2}")).collect();
        text.push_str(&format!(
            " Intervening {side} at {} before the target; the target is kept.",
            list.join(", ")
        ));
    }
    text
}

/// Everything needed to go from candles to a signal.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalConfig {
    /// Zigzag threshold; the interval default when absent.
    pub pivot_threshold: Option<f64>,
    pub search: SearchConfig,
    /// Confirmation distance as a fraction of the pivot threshold.
    pub confirmation_fraction: f64,
}

impl Default for SignalConfig {
    fn default() -> Self {
        Self {
            pivot_threshold: None,
            search: SearchConfig::default(),
            confirmation_fraction: 0.5,
        }
    }
}

impl SignalConfig {
    pub fn threshold_for(&self, series: &CandleSeries) -> f64 {
        self.pivot_threshold
            .unwrap_or_else(|| series.interval().default_pivot_threshold())
    }

    pub fn confirmation(&self, pivot_threshold: f64) -> Confirmation {
        Confirmation::CloseBeyond(self.confirmation_fraction * pivot_threshold)
    }
}

/// Matches sharing at least one candle with `chosen` and finishing no later
/// than it; these supply the levels around a signal.
pub fn related_matches(matches: &[PatternMatch], chosen: &PatternMatch) -> Vec<PatternMatch> {
    let mut out: Vec<PatternMatch> = matches
        .iter()
        .filter(|m| {
            m.end_index() <= chosen.end_index()
                && m.end_index() >= chosen.start_index()
                && *m != chosen
        })
        .cloned()
        .collect();
    out.insert(0, chosen.clone());
    out
}

/// Signal for the latest actionable confirmed pattern among `matches`.
pub fn signal_from_matches(
    matches: &[PatternMatch],
    series: &CandleSeries,
    config: &SignalConfig,
    pivot_threshold: f64,
) -> Option<Signal> {
    let confirmed: Vec<PatternMatch> = matches
        .iter()
        .filter(|m| m.final_pivot().confirmed_at.is_some())
        .cloned()
        .collect();
    let chosen = latest_actionable(&confirmed, series)?;
    let current = series.candles().last()?.close;
    let levels = derive_levels_with(
        &related_matches(matches, &chosen),
        current,
        &config.search.ratios,
    )
    .ok()?;
    make_signal(
        &chosen,
        series,
        &levels,
        &config.search.ratios,
        config.confirmation(pivot_threshold),
    )
}

/// Pivots, scan and signal on `series` as it stands.
pub fn signal_at(series: &CandleSeries, config: &SignalConfig) -> Result<Option<Signal>> {
    if series.is_empty() {
        return Ok(None);
    }
    let threshold = config.threshold_for(series);
    let pivots = extract_pivots(series, threshold)?;
    let matches = scan(series, &pivots, &config.search)?;
    Ok(signal_from_matches(&matches, series, config, threshold))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::pivots_from_prices;
    use crate::wave_model::match_kind;

    fn pattern(kind: PatternKind, prices: &[f64]) -> PatternMatch {
        let ratios = FibRatios::default();
        match_kind(kind, &pivots_from_prices(prices), &ratios)
            .unwrap()
            .expect("valid fixture")
    }

    #[test]
    fn levels_of_reference_impulse() {
        let m = pattern(
            PatternKind::ImpulseComplete,
            &[100.0, 110.0, 104.0, 120.0, 112.0, 126.0],
        );
        let l = derive_levels(&[m], 115.0).unwrap();
        assert_eq!(l.supports, vec![112.0, 110.0, 104.0, 100.0]);
        assert_eq!(l.resistances, vec![120.0, 126.0]);
    }

    #[test]
    fn all_supports_when_price_above() {
        let m = pattern(
            PatternKind::ImpulseComplete,
            &[100.0, 110.0, 104.0, 120.0, 112.0, 126.0],
        );
        let l = derive_levels(&[m], 500.0).unwrap();
        assert_eq!(l.supports.len(), 6);
        assert!(l.resistances.is_empty());
    }

    #[test]
    fn near_duplicates_merge_to_mean() {
        let a = pattern(PatternKind::AbcCorrection, &[120.0, 110.0, 116.0, 100.0]);
        let b = pattern(PatternKind::AbcCorrection, &[120.1, 110.05, 116.0, 100.0]);
        let l = derive_levels(&[a, b], 0.0).unwrap();
        assert_eq!(l.resistances.len(), 4);
        assert!(l.resistances.iter().any(|&p| (p - 120.05).abs() < 1e-9));
        assert!(l.resistances.iter().any(|&p| (p - 110.025).abs() < 1e-9));
    }

    #[test]
    fn empty_matches_rejected() {
        assert!(matches!(derive_levels(&[], 1.0), Err(Error::EmptyMatches)));
    }

    #[test]
    fn targets() {
        let r = FibRatios::default();
        let inc = pattern(
            PatternKind::ImpulseIncomplete,
            &[100.0, 110.0, 104.0, 120.0, 112.0],
        );
        assert!((project_target(&inc, &r).unwrap() - 128.2).abs() < 1e-9);
        let done = pattern(
            PatternKind::ImpulseComplete,
            &[100.0, 110.0, 104.0, 120.0, 112.0, 126.0],
        );
        assert!((project_target(&done, &r).unwrap() - 112.0).abs() < 1e-9);
        let cycle = pattern(
            PatternKind::FullCycle,
            &[30.0, 38.0, 33.0, 46.0, 41.0, 50.0, 43.0, 47.0, 39.0],
        );
        assert_eq!(project_target(&cycle, &r).unwrap(), 50.0);
    }

    #[test]
    fn horizons() {
        let r = FibRatios::default();
        let mut inc = pattern(
            PatternKind::ImpulseIncomplete,
            &[100.0, 110.0, 104.0, 120.0, 112.0],
        );
        inc.waves[0].end.index = inc.waves[0].start.index + 10;
        assert_eq!(eval_horizon(&inc, &r), 16);
        let mut done = pattern(
            PatternKind::ImpulseComplete,
            &[100.0, 110.0, 104.0, 120.0, 112.0, 126.0],
        );
        done.waves[4].end.index = done.waves[4].start.index + 7;
        assert_eq!(eval_horizon(&done, &r), 7);
        done.waves[4].end.index = done.waves[4].start.index + 1;
        assert_eq!(eval_horizon(&done, &r), 1);
    }

    #[test]
    fn directions() {
        let inc = pattern(
            PatternKind::ImpulseIncomplete,
            &[100.0, 110.0, 104.0, 120.0, 112.0],
        );
        assert_eq!(signal_direction(&inc), SignalDirection::Buy);
        let done = pattern(
            PatternKind::ImpulseComplete,
            &[100.0, 110.0, 104.0, 120.0, 112.0, 126.0],
        );
        assert_eq!(signal_direction(&done), SignalDirection::Sell);
        let bear = pattern(
            PatternKind::ImpulseComplete,
            &[126.0, 116.0, 122.0, 106.0, 114.0, 100.0],
        );
        assert_eq!(signal_direction(&bear), SignalDirection::Buy);
        let abc = pattern(PatternKind::AbcCorrection, &[120.0, 110.0, 116.0, 100.0]);
        assert_eq!(signal_direction(&abc), SignalDirection::Buy);
    }

    #[test]
    fn no_signal_without_future_data() {
        use crate::synthetic::series_from_pivot_prices;
        // pattern ends on the last candle
        let s = series_from_pivot_prices(&[100.0, 110.0, 104.0, 120.0, 112.0, 126.0], 4);
        let cfg = SignalConfig::default();
        assert_eq!(signal_at(&s, &cfg).unwrap(), None);
    }
}
