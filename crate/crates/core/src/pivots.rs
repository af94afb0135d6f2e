//! Zigzag swing extraction.
//!
//! Swing extremes are taken from candle highs and lows. A leg's running
//! extreme becomes a pivot once price reverses from it by at least the
//! threshold fraction; the last running extreme is kept as a provisional
//! (unconfirmed) pivot. Equal extremes resolve to the earliest candle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market_data::CandleSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PivotKind {
    High,
    Low,
}

impl PivotKind {
    pub fn opposite(self) -> Self {
        match self {
            PivotKind::High => PivotKind::Low,
            PivotKind::Low => PivotKind::High,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pivot {
    /// Candle index into the source series.
    pub index: usize,
    pub timestamp: i64,
    pub price: f64,
    pub kind: PivotKind,
    /// Index of the candle whose reversal confirmed this pivot, if any.
    pub confirmed_at: Option<usize>,
}

impl Pivot {
    pub fn is_confirmed(&self) -> bool {
        self.confirmed_at.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PivotSequence {
    pivots: Vec<Pivot>,
    threshold: f64,
}

impl PivotSequence {
    /// Wraps hand-built pivots, checking ordering, alternation and minimum move.
    pub fn new(pivots: Vec<Pivot>, threshold: f64) -> Result<Self> {
        check_threshold(threshold)?;
        for w in pivots.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            if b.index <= a.index {
                return Err(Error::PivotMismatch("pivot indices not increasing".into()));
            }
            if a.kind == b.kind {
                return Err(Error::PivotMismatch(format!(
                    "pivots at {} and {} share a kind",
                    a.index, b.index
                )));
            }
            // relative slack for float noise in the min-move check
            if (b.price - a.price).abs() < threshold * a.price * (1.0 - 1e-12) {
                return Err(Error::PivotMismatch(format!(
                    "move from {} to {} below threshold",
                    a.index, b.index
                )));
            }
        }
        Ok(Self { pivots, threshold })
    }

    pub fn pivots(&self) -> &[Pivot] {
        &self.pivots
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn len(&self) -> usize {
        self.pivots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pivots.is_empty()
    }

    pub fn confirmed_count(&self) -> usize {
        self.pivots.iter().filter(|p| p.is_confirmed()).count()
    }
}

fn check_threshold(threshold: f64) -> Result<()> {
    if threshold > 0.0 && threshold < 1.0 {
        Ok(())
    } else {
        Err(Error::ThresholdOutOfRange(threshold))
    }
}

enum Leg {
    /// No reversal yet; tracks the extremes seen so far.
    Undetermined { max_high: usize, min_low: usize },
    /// Rising from the last Low; `ext` is the running maximum high.
    Up { ext: usize },
    /// Falling from the last High; `ext` is the running minimum low.
    Down { ext: usize },
}

pub fn extract_pivots(series: &CandleSeries, threshold: f64) -> Result<PivotSequence> {
    check_threshold(threshold)?;
    let candles = series.candles();
    if candles.is_empty() {
        return Err(Error::EmptySeries);
    }

    let make = |index: usize, kind: PivotKind, confirmed_at: Option<usize>| {
        let c = &candles[index];
        Pivot {
            index,
            timestamp: c.timestamp,
            price: match kind {
                PivotKind::High => c.high,
                PivotKind::Low => c.low,
            },
            kind,
            confirmed_at,
        }
    };
    // earliest index of the max high / min low over candles[from..=to]
    let argmax_high = |from: usize, to: usize| {
        (from..=to).fold(from, |best, j| {
            if candles[j].high > candles[best].high {
                j
            } else {
                best
            }
        })
    };
    let argmin_low = |from: usize, to: usize| {
        (from..=to).fold(from, |best, j| {
            if candles[j].low < candles[best].low {
                j
            } else {
                best
            }
        })
    };

    let mut pivots = Vec::new();
    let mut leg = Leg::Undetermined {
        max_high: 0,
        min_low: 0,
    };

    for (i, c) in candles.iter().enumerate().skip(1) {
        leg = match leg {
            Leg::Undetermined { max_high, min_low } => {
                let up = c.high >= candles[min_low].low * (1.0 + threshold);
                let down = c.low <= candles[max_high].high * (1.0 - threshold);
                if up && (!down || min_low <= max_high) {
                    pivots.push(make(min_low, PivotKind::Low, Some(i)));
                    Leg::Up {
                        ext: argmax_high(min_low + 1, i),
                    }
                } else if down {
                    pivots.push(make(max_high, PivotKind::High, Some(i)));
                    Leg::Down {
                        ext: argmin_low(max_high + 1, i),
                    }
                } else {
                    Leg::Undetermined {
                        max_high: if c.high > candles[max_high].high {
                            i
                        } else {
                            max_high
                        },
                        min_low: if c.low < candles[min_low].low {
                            i
                        } else {
                            min_low
                        },
                    }
                }
            }
            Leg::Up { ext } => {
                if c.high > candles[ext].high {
                    Leg::Up { ext: i }
                } else if c.low <= candles[ext].high * (1.0 - threshold) {
                    pivots.push(make(ext, PivotKind::High, Some(i)));
                    Leg::Down { ext: i }
                } else {
                    Leg::Up { ext }
                }
            }
            Leg::Down { ext } => {
                if c.low < candles[ext].low {
                    Leg::Down { ext: i }
                } else if c.high >= candles[ext].low * (1.0 + threshold) {
                    pivots.push(make(ext, PivotKind::Low, Some(i)));
                    Leg::Up { ext: i }
                } else {
                    Leg::Down { ext }
                }
            }
        };
    }

    pivots.push(match leg {
        Leg::Undetermined { min_low, .. } => make(min_low, PivotKind::Low, None),
        Leg::Up { ext } => make(ext, PivotKind::High, None),
        Leg::Down { ext } => make(ext, PivotKind::Low, None),
    });

    Ok(PivotSequence { pivots, threshold })
}

/// All strictly increasing position tuples of `length` whose pivot kinds
/// alternate, in lexicographic order. Positions index into `pivots.pivots()`.
///
/// Returns nothing for `length < 2`.
pub fn pivot_subsequences(pivots: &PivotSequence, length: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if length < 2 {
        return out;
    }
    let ps = pivots.pivots();
    let mut stack = Vec::with_capacity(length);
    fn extend(
        ps: &[crate::pivots::Pivot],
        length: usize,
        stack: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if stack.len() == length {
            out.push(stack.clone());
            return;
        }
        let last = *stack.last().expect("stack seeded");
        let remaining = length - stack.len();
        for j in last + 1..ps.len() {
            if ps.len() - j < remaining {
                break;
            }
            if ps[j].kind != ps[last].kind {
                stack.push(j);
                extend(ps, length, stack, out);
                stack.pop();
            }
        }
    }
    for start in 0..ps.len() {
        stack.clear();
        stack.push(start);
        extend(ps, length, &mut stack, &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market_data::{Candle, Interval};

    fn series_from_closes(closes: &[f64]) -> CandleSeries {
        let candles = closes
            .iter()
            .enumerate()
            .map(|(i, &c)| Candle::new(i as i64 * 86_400, c, c, c, c, 1.0))
            .collect();
        CandleSeries::new("T", Interval::Daily, candles).unwrap()
    }

    fn summary(p: &PivotSequence) -> Vec<(PivotKind, f64, bool)> {
        p.pivots()
            .iter()
            .map(|p| (p.kind, p.price, p.is_confirmed()))
            .collect()
    }

    #[test]
    fn monotone_rise_has_low_then_provisional_high() {
        let closes: Vec<f64> = (10..=20).map(f64::from).collect();
        let p = extract_pivots(&series_from_closes(&closes), 0.05).unwrap();
        assert_eq!(
            summary(&p),
            vec![(PivotKind::Low, 10.0, true), (PivotKind::High, 20.0, false)]
        );
    }

    #[test]
    fn hand_traced_zigzag() {
        let p = extract_pivots(&series_from_closes(&[100.0, 110.0, 99.0, 108.0]), 0.05).unwrap();
        assert_eq!(
            summary(&p),
            vec![
                (PivotKind::Low, 100.0, true),
                (PivotKind::High, 110.0, true),
                (PivotKind::Low, 99.0, true),
                (PivotKind::High, 108.0, false),
            ]
        );
        assert_eq!(p.pivots()[1].confirmed_at, Some(2));
    }

    /// Brute-force cross-check of the same example: each reported leg moves
    /// at least 5%, and no candle inside a leg reverses 5% from the leg's
    /// running extreme.
    #[test]
    fn hand_traced_zigzag_brute_force() {
        let closes = [100.0, 110.0, 99.0, 108.0];
        let p = extract_pivots(&series_from_closes(&closes), 0.05).unwrap();
        let idx: Vec<usize> = p.pivots().iter().map(|p| p.index).collect();
        for w in idx.windows(2) {
            let (a, b) = (w[0], w[1]);
            assert!((closes[b] - closes[a]).abs() >= 0.05 * closes[a]);
            let rising = closes[b] > closes[a];
            let mut ext = closes[a];
            for &c in &closes[a + 1..b] {
                if rising {
                    assert!(c > ext * 0.95);
                    ext = ext.max(c);
                } else {
                    assert!(c < ext * 1.05);
                    ext = ext.min(c);
                }
            }
        }
    }

    #[test]
    fn flat_series_single_low() {
        let p = extract_pivots(&series_from_closes(&[50.0; 8]), 0.03).unwrap();
        assert_eq!(summary(&p), vec![(PivotKind::Low, 50.0, false)]);
        assert_eq!(p.pivots()[0].index, 0);
        assert_eq!(p.confirmed_count(), 0);
    }

    #[test]
    fn monotone_fall_starts_with_high() {
        let closes: Vec<f64> = (10..=20).rev().map(f64::from).collect();
        let p = extract_pivots(&series_from_closes(&closes), 0.05).unwrap();
        assert_eq!(
            summary(&p),
            vec![(PivotKind::High, 20.0, true), (PivotKind::Low, 10.0, false)]
        );
    }

    #[test]
    fn ties_resolve_to_earliest() {
        let p = extract_pivots(&series_from_closes(&[100.0, 120.0, 120.0, 100.0]), 0.05).unwrap();
        assert_eq!(p.pivots()[1].index, 1);
    }

    #[test]
    fn errors() {
        let s = series_from_closes(&[1.0, 2.0]);
        assert!(matches!(
            extract_pivots(&s, 0.0),
            Err(Error::ThresholdOutOfRange(_))
        ));
        assert!(matches!(
            extract_pivots(&s, 1.0),
            Err(Error::ThresholdOutOfRange(_))
        ));
        let empty = s.slice_indices(0, 0);
        assert!(matches!(
            extract_pivots(&empty, 0.1),
            Err(Error::EmptySeries)
        ));
    }

    fn alternating(n: usize) -> PivotSequence {
        let pivots = (0..n)
            .map(|i| Pivot {
                index: i,
                timestamp: i as i64,
                price: if i % 2 == 0 { 100.0 } else { 120.0 },
                kind: if i % 2 == 0 {
                    PivotKind::Low
                } else {
                    PivotKind::High
                },
                confirmed_at: Some(i + 1),
            })
            .collect();
        PivotSequence::new(pivots, 0.05).unwrap()
    }

    #[test]
    fn subsequence_counts() {
        assert_eq!(
            pivot_subsequences(&alternating(4), 4),
            vec![vec![0, 1, 2, 3]]
        );
        let six = pivot_subsequences(&alternating(6), 4);
        assert_eq!(six.len(), 6);
        assert!(six.windows(2).all(|w| w[0] < w[1]));
        assert!(pivot_subsequences(&alternating(3), 4).is_empty());
    }

    #[test]
    fn sequence_validation() {
        let mut ps = alternating(3).pivots().to_vec();
        ps[1].kind = PivotKind::Low;
        assert!(PivotSequence::new(ps, 0.05).is_err());
    }
}
