//! Exhaustive search for Elliott patterns over a pivot sequence.
//!
//! Candidates are alternating pivot subsequences grown depth-first. Each
//! partial candidate is pruned by the span window and by the necessary
//! conditions of its kind's rules (for an impulse, R1 after three pivots, R4
//! after four, R3 after five), so the full validators only see candidates
//! that can still pass.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market_data::CandleSeries;
use crate::pivots::{Pivot, PivotKind, PivotSequence};
use crate::wave_model::{match_kind, FibRatios, PatternKind, PatternMatch};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub kinds: BTreeSet<PatternKind>,
    /// Longest pattern, in candles from first to last pivot.
    pub max_span: usize,
    pub min_span: usize,
    pub ratios: FibRatios,
    /// Keep matches lying strictly inside a higher-scoring match of the same kind.
    pub allow_nested: bool,
    /// Require every wave to start and end at the extremes of the pivots it
    /// spans, so a wave never skips over a higher high or lower low.
    pub extreme_endpoints: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            kinds: PatternKind::ALL.into_iter().collect(),
            max_span: 250,
            min_span: 4,
            ratios: FibRatios::default(),
            allow_nested: false,
            extreme_endpoints: true,
        }
    }
}

impl SearchConfig {
    pub fn with_kinds(kinds: impl IntoIterator<Item = PatternKind>) -> Self {
        Self {
            kinds: kinds.into_iter().collect(),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_span < 4 {
            return Err(Error::InvalidConfig(format!(
                "min_span {} must be at least 4",
                self.min_span
            )));
        }
        if self.max_span <= self.min_span {
            return Err(Error::InvalidConfig(format!(
                "max_span {} must exceed min_span {}",
                self.max_span, self.min_span
            )));
        }
        Ok(())
    }
}

/// Every pattern of the requested kinds in `pivots`, sorted by end index and
/// then by descending score.
pub fn scan(
    series: &CandleSeries,
    pivots: &PivotSequence,
    config: &SearchConfig,
) -> Result<Vec<PatternMatch>> {
    config.validate()?;
    check_pivots(series, pivots)?;
    let ps = pivots.pivots();

    let mut matches = Vec::new();
    for &kind in &config.kinds {
        let mut found = Vec::new();
        for_each_candidate(ps, kind, config, |candidate| {
            let chosen: Vec<Pivot> = candidate.iter().map(|&i| ps[i]).collect();
            // without extreme endpoints a wave can run the wrong way; such
            // malformed candidates are skipped along with rule failures
            if let Ok(Some(m)) = match_kind(kind, &chosen, &config.ratios) {
                found.push(m);
            }
        });
        if !config.allow_nested {
            found = drop_nested(found);
        }
        matches.extend(found);
    }
    matches.sort_by(match_order);
    Ok(matches)
}

fn check_pivots(series: &CandleSeries, pivots: &PivotSequence) -> Result<()> {
    for p in pivots.pivots() {
        let c = series.get(p.index).ok_or_else(|| {
            Error::PivotMismatch(format!(
                "pivot index {} beyond series length {}",
                p.index,
                series.len()
            ))
        })?;
        let expected = match p.kind {
            PivotKind::High => c.high,
            PivotKind::Low => c.low,
        };
        if expected != p.price || c.timestamp != p.timestamp {
            return Err(Error::PivotMismatch(format!(
                "pivot at {} does not match its candle",
                p.index
            )));
        }
    }
    Ok(())
}

/// Total order used for scan output.
pub fn match_order(a: &PatternMatch, b: &PatternMatch) -> Ordering {
    a.end_index()
        .cmp(&b.end_index())
        .then_with(|| b.score.total_cmp(&a.score))
        .then_with(|| a.kind.cmp(&b.kind))
        .then_with(|| a.candle_indices().cmp(&b.candle_indices()))
}

fn drop_nested(found: Vec<PatternMatch>) -> Vec<PatternMatch> {
    let keep: Vec<bool> = found
        .iter()
        .map(|m| {
            !found.iter().any(|o| {
                o.start_index() <= m.start_index()
                    && o.end_index() >= m.end_index()
                    && o.span() > m.span()
                    && o.score > m.score
            })
        })
        .collect();
    found
        .into_iter()
        .zip(keep)
        .filter_map(|(m, k)| k.then_some(m))
        .collect()
}

/// Necessary conditions on a partial candidate of `kind` (prices so far).
fn prefix_ok(kind: PatternKind, p: &[f64]) -> bool {
    let s = if p[1] > p[0] { 1.0 } else { -1.0 };
    let n = p.len();
    let impulse = |n: usize| match n {
        3 => s * (p[2] - p[0]) > 0.0,
        4 => s * (p[3] - p[1]) > 0.0,
        5 => s * (p[4] - p[1]) > 0.0,
        _ => true,
    };
    match kind {
        PatternKind::ImpulseIncomplete
        | PatternKind::ImpulseComplete
        | PatternKind::FifthWaveExtension => impulse(n),
        PatternKind::EndingDiagonal => {
            let len = |k: usize| (p[k + 1] - p[k]).abs();
            match n {
                4 => len(2) < len(0),
                5 => len(3) < len(1) && s * (p[4] - p[1]) <= 0.0,
                6 => len(4) < len(2),
                _ => true,
            }
        }
        PatternKind::AbcCorrection => n != 3 || s * (p[2] - p[0]) > 0.0,
        PatternKind::FullCycle => match n {
            3..=5 => impulse(n),
            // B must not pass the start of A (A runs from p[5])
            8 => -s * (p[7] - p[5]) > 0.0,
            _ => true,
        },
    }
}

/// Calls `emit` with every alternating pivot-position tuple of the kind's
/// length whose span lies in the window and whose prefixes pass `prefix_ok`.
fn for_each_candidate(
    ps: &[Pivot],
    kind: PatternKind,
    config: &SearchConfig,
    mut emit: impl FnMut(&[usize]),
) {
    let length = kind.pivot_count();
    let mut stack: Vec<usize> = Vec::with_capacity(length);
    let mut prices: Vec<f64> = Vec::with_capacity(length);
    for start in 0..ps.len() {
        stack.clear();
        prices.clear();
        stack.push(start);
        prices.push(ps[start].price);
        grow(ps, kind, config, length, &mut stack, &mut prices, &mut emit);
    }
}

fn grow(
    ps: &[Pivot],
    kind: PatternKind,
    config: &SearchConfig,
    length: usize,
    stack: &mut Vec<usize>,
    prices: &mut Vec<f64>,
    emit: &mut impl FnMut(&[usize]),
) {
    let first = ps[stack[0]].index;
    if stack.len() == length {
        if ps[stack[length - 1]].index - first >= config.min_span {
            emit(stack);
        }
        return;
    }
    let from = *stack.last().expect("seeded");
    let from_pivot = ps[from];
    let rising = from_pivot.kind == PivotKind::Low;
    // furthest price reached by intermediate pivots of the target kind
    let mut intermediate_peak: Option<f64> = None;
    for (j, to) in ps.iter().enumerate().skip(from + 1) {
        if to.index - first > config.max_span {
            break;
        }
        if to.kind == from_pivot.kind {
            if config.extreme_endpoints && beyond(rising, from_pivot.price, to.price) {
                // the wave's start is no longer its extreme
                break;
            }
            continue;
        }
        let is_extreme = intermediate_peak.is_none_or(|peak| !beyond(!rising, to.price, peak));
        if !config.extreme_endpoints || is_extreme {
            stack.push(j);
            prices.push(to.price);
            if prefix_ok(kind, prices) {
                grow(ps, kind, config, length, stack, prices, emit);
            }
            stack.pop();
            prices.pop();
        }
        intermediate_peak = Some(match intermediate_peak {
            Some(peak) if beyond(!rising, peak, to.price) => to.price,
            Some(peak) => peak,
            None => to.price,
        });
    }
}

/// True when `candidate` lies strictly past `reference` on the far side of
/// the wave's start: below it for a rising wave, above it for a falling one.
fn beyond(rising: bool, reference: f64, candidate: f64) -> bool {
    if rising {
        candidate < reference
    } else {
        candidate > reference
    }
}

/// The match whose final pivot is most recent, within the last 10% of the
/// series; ties go to the higher score, then the longer span.
pub fn latest_actionable(matches: &[PatternMatch], series: &CandleSeries) -> Option<PatternMatch> {
    let len = series.len();
    if len == 0 {
        return None;
    }
    let max_age = len / 10;
    matches
        .iter()
        .filter(|m| m.end_index() < len && len - 1 - m.end_index() <= max_age)
        .max_by(|a, b| {
            a.end_index()
                .cmp(&b.end_index())
                .then_with(|| a.score.total_cmp(&b.score))
                .then_with(|| a.span().cmp(&b.span()))
                .then_with(|| match_order(b, a))
        })
        .cloned()
}

/// Greedy non-overlapping selection, best score first. Patterns may touch at
/// a shared endpoint but never share a wave. Output is in scan order.
pub fn select_disjoint(matches: &[PatternMatch]) -> Vec<PatternMatch> {
    let mut order: Vec<&PatternMatch> = matches.iter().collect();
    order.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.end_index().cmp(&b.end_index()))
            .then_with(|| b.span().cmp(&a.span()))
            .then_with(|| match_order(a, b))
    });
    let mut kept: Vec<PatternMatch> = Vec::new();
    for m in order {
        let overlaps = kept
            .iter()
            .any(|k| m.start_index() < k.end_index() && k.start_index() < m.end_index());
        if !overlaps {
            kept.push(m.clone());
        }
    }
    kept.sort_by(match_order);
    kept
}

pub fn matches_to_json(matches: &[PatternMatch]) -> Result<String> {
    Ok(serde_json::to_string_pretty(matches)?)
}
