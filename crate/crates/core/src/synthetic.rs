//! Deterministic synthetic candle series for fixtures, examples and tests.
//!
//! Prices move along straight legs between planned turning points, so the
//! zigzag pivots of a built series are exactly the planned points whenever
//! every leg moves more than the pivot threshold.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::market_data::{Candle, CandleSeries, Interval};
use crate::pivots::{Pivot, PivotKind};

/// 2020-01-01T00:00:00Z
pub const EPOCH_2020: i64 = 1_577_836_800;

#[derive(Debug, Clone)]
pub struct PathBuilder {
    closes: Vec<f64>,
    /// Explicit (high, low) for single candles.
    extremes: Vec<Option<(f64, f64)>>,
    wick: f64,
}

impl PathBuilder {
    pub fn new(start_price: f64) -> Self {
        Self {
            closes: vec![start_price],
            extremes: vec![None],
            wick: 0.0,
        }
    }

    /// Extends highs above and lows below the candle body by this fraction.
    pub fn wick(mut self, fraction: f64) -> Self {
        self.wick = fraction;
        self
    }

    pub fn last_price(&self) -> f64 {
        *self.closes.last().expect("path has a start")
    }

    /// Index of the last close so far.
    pub fn last_index(&self) -> usize {
        self.closes.len() - 1
    }

    /// Straight move to `to` over `candles` bars.
    pub fn leg(mut self, to: f64, candles: usize) -> Self {
        let from = self.last_price();
        let n = candles.max(1);
        for k in 1..=n {
            let price = if k == n {
                to
            } else {
                from + (to - from) * k as f64 / n as f64
            };
            self.closes.push(price);
            self.extremes.push(None);
        }
        self
    }

    /// Appends exact closes.
    pub fn closes(mut self, closes: &[f64]) -> Self {
        self.closes.extend_from_slice(closes);
        self.extremes.resize(self.closes.len(), None);
        self
    }

    /// Appends one candle with an explicit range. The range is widened to
    /// cover the open and close if needed.
    pub fn bar(mut self, close: f64, high: f64, low: f64) -> Self {
        self.closes.push(close);
        self.extremes.push(Some((high, low)));
        self
    }

    pub fn build(&self, symbol: &str, interval: Interval) -> CandleSeries {
        let step = interval.seconds();
        let mut candles = Vec::with_capacity(self.closes.len());
        let mut prev = self.closes[0];
        for (i, &close) in self.closes.iter().enumerate() {
            let open = prev;
            let (high, low) = match self.extremes[i] {
                Some((h, l)) => (h.max(open).max(close), l.min(open).min(close)),
                None => (
                    open.max(close) * (1.0 + self.wick),
                    open.min(close) * (1.0 - self.wick),
                ),
            };
            candles.push(Candle::new(
                EPOCH_2020 + i as i64 * step,
                open,
                high,
                low,
                close,
                1_000.0,
            ));
            prev = close;
        }
        CandleSeries::new(symbol, interval, candles).expect("synthetic candles are valid")
    }
}

/// Daily series visiting each price in turn, `candles_per_leg` bars per leg.
pub fn series_from_pivot_prices(prices: &[f64], candles_per_leg: usize) -> CandleSeries {
    let mut b = PathBuilder::new(prices[0]);
    for &p in &prices[1..] {
        b = b.leg(p, candles_per_leg);
    }
    b.build("SYN", Interval::Daily)
}

/// Geometric random walk with occasional trend legs.
pub fn random_walk(seed: u64, len: usize, start_price: f64, volatility: f64) -> CandleSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut closes = Vec::with_capacity(len);
    let mut price = start_price;
    let mut drift = 0.0;
    for i in 0..len {
        if i % 15 == 0 {
            drift = rng.gen_range(-1.0..1.0) * volatility;
        }
        let shock: f64 = rng.gen_range(-1.0..1.0) * volatility;
        price *= 1.0 + drift + shock;
        price = price.max(1.0);
        closes.push(price);
    }
    let mut b = PathBuilder::new(start_price).wick(volatility * 0.2);
    b = b.closes(&closes[1..]);
    b.build("RW", Interval::Daily)
}

/// Shape of one planted five-wave impulse and what follows it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpulseShape {
    /// Wave-1 size as a fraction of the cycle's starting price.
    pub wave1: f64,
    pub wave2_retrace: f64,
    pub wave3_multiple: f64,
    pub wave4_retrace: f64,
    pub wave5_multiple: f64,
    /// Candle counts of waves 1-5.
    pub durations: [usize; 5],
}

impl ImpulseShape {
    /// Textbook proportions: 61.8% and 38.2% retracements, wave 3 at 1.618
    /// and wave 5 at 1.62 times wave 1, wave 5 lasting 1.62 times wave 1.
    pub fn fibonacci() -> Self {
        Self {
            wave1: 0.10,
            wave2_retrace: 0.618,
            wave3_multiple: 1.618,
            wave4_retrace: 0.382,
            wave5_multiple: 1.62,
            durations: [8, 5, 13, 5, 13],
        }
    }

    /// Valid impulse whose ratios miss every Fibonacci target.
    pub fn irregular() -> Self {
        Self {
            wave1: 0.20,
            wave2_retrace: 0.25,
            wave3_multiple: 1.25,
            wave4_retrace: 0.25,
            wave5_multiple: 1.3,
            durations: [8, 5, 13, 5, 13],
        }
    }

    /// Turning prices p0..p5 starting from `start`.
    pub fn prices(&self, start: f64) -> [f64; 6] {
        let w1 = start * self.wave1;
        let p1 = start + w1;
        let p2 = p1 - w1 * self.wave2_retrace;
        let w3 = w1 * self.wave3_multiple;
        let p3 = p2 + w3;
        let p4 = p3 - w3 * self.wave4_retrace;
        let p5 = p4 + w1 * self.wave5_multiple;
        [start, p1, p2, p3, p4, p5]
    }
}

/// How a planted impulse plays out after its turning points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resolution {
    /// Wave 5 follows wave 4, then a wave-A decline as long as wave 5.
    Textbook,
    /// Wave 5 follows, then a brief dip and a rally to a new high.
    FailedReversal,
}

/// Appends one planted cycle (impulse plus its aftermath) to `b`.
/// Returns the builder and the candle index of the wave-5 top.
pub fn plant_cycle(
    b: PathBuilder,
    shape: &ImpulseShape,
    resolution: Resolution,
) -> (PathBuilder, usize) {
    let start = b.last_price();
    let p = shape.prices(start);
    let d = shape.durations;
    let mut b = b;
    for k in 1..6 {
        b = b.leg(p[k], d[k - 1]);
    }
    let top = b.last_index();
    let w5 = p[5] - p[4];
    let b = match resolution {
        Resolution::Textbook => b.leg(p[5] - w5 * 1.05, 6),
        Resolution::FailedReversal => {
            let dip = p[5] * 0.955;
            b.leg(dip, 2)
                .leg(p[5] * 1.06, 5)
                .leg(p[5] * 1.07, 4)
                .leg(p[5] - w5 * 0.4, 4)
        }
    };
    (b, top)
}

/// Series of `cycles` textbook impulses, each followed by a wave-A decline.
/// Every cycle spans 50 daily candles; the series has `50 * cycles + 1`.
pub fn planted_impulses(cycles: usize, start_price: f64) -> CandleSeries {
    let shape = ImpulseShape::fibonacci();
    let mut b = PathBuilder::new(start_price);
    for _ in 0..cycles {
        b = plant_cycle(b, &shape, Resolution::Textbook).0;
    }
    b.build("PLANTED", Interval::Daily)
}

/// Bare pivots at the given prices, three candles apart, each confirmed on
/// the following candle. For exercising validators without a series.
pub fn pivots_from_prices(prices: &[f64]) -> Vec<Pivot> {
    let rising = prices.len() > 1 && prices[1] > prices[0];
    prices
        .iter()
        .enumerate()
        .map(|(i, &price)| {
            let low = (i % 2 == 0) == rising;
            Pivot {
                index: i * 3,
                timestamp: i as i64 * 3,
                price,
                kind: if low { PivotKind::Low } else { PivotKind::High },
                confirmed_at: Some(i * 3 + 1),
            }
        })
        .collect()
}

/// One context of a mixed-reliability series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Context {
    pub shape: ImpulseShape,
    pub cycles: usize,
    /// How many of the cycles resolve the textbook way.
    pub textbook: usize,
}

/// Cycles from several contexts in a seeded random order. Each cycle is a
/// bullish impulse; within a context exactly `textbook` of them are followed
/// by a wave-A decline and the rest by a failed reversal. Every cycle ends
/// back at `start_price`, so no pattern spans two cycles.
pub fn mixed_contexts(seed: u64, contexts: &[Context], start_price: f64) -> CandleSeries {
    use rand::seq::SliceRandom;
    let mut plan: Vec<(ImpulseShape, Resolution)> = Vec::new();
    for c in contexts {
        for k in 0..c.cycles {
            let r = if k < c.textbook {
                Resolution::Textbook
            } else {
                Resolution::FailedReversal
            };
            plan.push((c.shape, r));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    plan.shuffle(&mut rng);
    let mut b = PathBuilder::new(start_price);
    for (shape, r) in &plan {
        b = plant_cycle(b, shape, *r).0;
        let drop = b.last_price() - start_price;
        let candles = (drop / (0.005 * start_price)).ceil().max(1.0) as usize;
        b = b.leg(start_price, candles);
    }
    b.build("MIXED", Interval::Daily)
}

fn legs(prices: &[f64], candles_per_leg: usize) -> PathBuilder {
    let mut b = PathBuilder::new(prices[0]);
    for &p in &prices[1..] {
        b = b.leg(p, candles_per_leg);
    }
    b
}

/// Hourly contracting diagonal 167-187-177-189.4-184.6-192.3 whose top is
/// followed by a single candle closing at 185 and a slide to 175.
pub fn ending_diagonal_scenario() -> CandleSeries {
    legs(&[167.0, 187.0, 177.0, 189.4, 184.6, 192.3], 3)
        .closes(&[185.0])
        .leg(175.0, 6)
        .build("DIAG", Interval::Hourly)
}

/// Daily impulse 120-130-123.82-140-131.91-160 with an extended fifth wave,
/// an A-B-C correction 160-143.8-150-133.8, a candle closing at 140, then a
/// rally to 165.
pub fn extended_fifth_scenario() -> CandleSeries {
    legs(
        &[
            120.0, 130.0, 123.82, 140.0, 131.91, 160.0, 143.8, 150.0, 133.8,
        ],
        5,
    )
    .closes(&[140.0])
    .leg(165.0, 10)
    .build("EXT5", Interval::Daily)
}

/// Daily impulse 28-37.24-31.53-46.47-40.76-50 and correction
/// 50-42.67-46.33-39, then closes at 40 and 42 and a rally to 52.
pub fn full_cycle_scenario() -> CandleSeries {
    legs(
        &[28.0, 37.24, 31.53, 46.47, 40.76, 50.0, 42.67, 46.33, 39.0],
        5,
    )
    .closes(&[40.0, 42.0])
    .leg(52.0, 10)
    .build("CYCLE", Interval::Daily)
}
