//! Elliott wave vocabulary and rule predicates.
//!
//! Structural rules (the impulse rules R1-R4, diagonal contraction and
//! overlap, ABC alternation) are hard constraints with no tolerance.
//! Fibonacci proportions are soft: each pattern carries a score equal to the
//! fraction of its ratio checks that land within `ratio_tolerance` of a
//! Fibonacci target.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::pivots::{Pivot, PivotKind, PivotSequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WaveDirection {
    Up,
    Down,
}

impl WaveDirection {
    fn sign(self) -> f64 {
        match self {
            WaveDirection::Up => 1.0,
            WaveDirection::Down => -1.0,
        }
    }
}

/// Direction of the larger trend a pattern belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trend {
    Bullish,
    Bearish,
}

impl Trend {
    pub fn sign(self) -> f64 {
        match self {
            Trend::Bullish => 1.0,
            Trend::Bearish => -1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Trend::Bullish => "bullish",
            Trend::Bearish => "bearish",
        }
    }

    fn of(direction: WaveDirection) -> Self {
        match direction {
            WaveDirection::Up => Trend::Bullish,
            WaveDirection::Down => Trend::Bearish,
        }
    }

    fn against(direction: WaveDirection) -> Self {
        match direction {
            WaveDirection::Up => Trend::Bearish,
            WaveDirection::Down => Trend::Bullish,
        }
    }
}

/// A single move between two pivots.
#[derive(Debug, Clone, PartialEq)]
pub struct Wave {
    pub label: String,
    pub start: Pivot,
    pub end: Pivot,
}

impl Wave {
    pub fn new(label: impl Into<String>, start: Pivot, end: Pivot) -> Result<Self> {
        if end.index <= start.index || end.price == start.price {
            return Err(Error::ZeroLengthWave {
                start: start.index,
                end: end.index,
            });
        }
        Ok(Self {
            label: label.into(),
            start,
            end,
        })
    }

    /// Absolute price distance travelled.
    pub fn price_length(&self) -> f64 {
        (self.end.price - self.start.price).abs()
    }

    /// Candles between the endpoints.
    pub fn duration(&self) -> usize {
        self.end.index - self.start.index
    }

    pub fn direction(&self) -> WaveDirection {
        if self.end.price > self.start.price {
            WaveDirection::Up
        } else {
            WaveDirection::Down
        }
    }
}

impl Serialize for Wave {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("Wave", 5)?;
        s.serialize_field("label", &self.label)?;
        s.serialize_field("start_index", &self.start.index)?;
        s.serialize_field("start_price", &self.start.price)?;
        s.serialize_field("end_index", &self.end.index)?;
        s.serialize_field("end_price", &self.end.price)?;
        s.end()
    }
}

/// Chains consecutive pivots into labelled waves.
pub fn waves_from_pivots(pivots: &[Pivot], labels: &[&str]) -> Result<Vec<Wave>> {
    if pivots.len() != labels.len() + 1 {
        return Err(Error::WaveCount {
            expected: format!("{} pivots", labels.len() + 1),
            got: pivots.len(),
        });
    }
    pivots
        .windows(2)
        .zip(labels)
        .map(|(w, label)| Wave::new(*label, w[0], w[1]))
        .collect()
}

/// Fibonacci proportions used for projections, extensions and scoring.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FibRatios {
    pub golden: f64,
    pub fifth_wave_multiple: f64,
    pub extension_threshold: f64,
    pub extension_strong: f64,
    pub retracements: [f64; 3],
    pub ratio_tolerance: f64,
}

impl Default for FibRatios {
    fn default() -> Self {
        Self {
            golden: 1.618,
            fifth_wave_multiple: 1.62,
            extension_threshold: 1.618,
            extension_strong: 2.618,
            retracements: [0.382, 0.5, 0.618],
            ratio_tolerance: 0.10,
        }
    }
}

impl FibRatios {
    pub fn with_tolerance(tolerance: f64) -> Result<Self> {
        if !(tolerance > 0.0 && tolerance < 0.5) {
            return Err(Error::InvalidConfig(format!(
                "ratio tolerance {tolerance} outside (0, 0.5)"
            )));
        }
        Ok(Self {
            ratio_tolerance: tolerance,
            ..Self::default()
        })
    }

    pub fn min_retracement(&self) -> f64 {
        self.retracements[0]
    }

    /// True when `measured` is within tolerance of any target.
    pub fn aligned(&self, measured: f64, targets: &[f64]) -> bool {
        targets
            .iter()
            .any(|t| (measured / t - 1.0).abs() <= self.ratio_tolerance)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternKind {
    /// Waves 1-2-3-4, wave 5 still to come.
    ImpulseIncomplete,
    ImpulseComplete,
    FifthWaveExtension,
    EndingDiagonal,
    AbcCorrection,
    /// Impulse followed by an ABC correction.
    FullCycle,
}

impl PatternKind {
    pub const ALL: [PatternKind; 6] = [
        PatternKind::ImpulseIncomplete,
        PatternKind::ImpulseComplete,
        PatternKind::FifthWaveExtension,
        PatternKind::EndingDiagonal,
        PatternKind::AbcCorrection,
        PatternKind::FullCycle,
    ];

    pub fn wave_count(self) -> usize {
        match self {
            PatternKind::ImpulseIncomplete => 4,
            PatternKind::ImpulseComplete
            | PatternKind::FifthWaveExtension
            | PatternKind::EndingDiagonal => 5,
            PatternKind::AbcCorrection => 3,
            PatternKind::FullCycle => 8,
        }
    }

    pub fn pivot_count(self) -> usize {
        self.wave_count() + 1
    }

    pub fn labels(self) -> &'static [&'static str] {
        match self {
            PatternKind::ImpulseIncomplete => &["1", "2", "3", "4"],
            PatternKind::ImpulseComplete
            | PatternKind::FifthWaveExtension
            | PatternKind::EndingDiagonal => &["1", "2", "3", "4", "5"],
            PatternKind::AbcCorrection => &["A", "B", "C"],
            PatternKind::FullCycle => &["1", "2", "3", "4", "5", "A", "B", "C"],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PatternKind::ImpulseIncomplete => "impulse_incomplete",
            PatternKind::ImpulseComplete => "impulse_complete",
            PatternKind::FifthWaveExtension => "fifth_wave_extension",
            PatternKind::EndingDiagonal => "ending_diagonal",
            PatternKind::AbcCorrection => "abc_correction",
            PatternKind::FullCycle => "full_cycle",
        }
    }

    /// Human label used in reports.
    pub fn title(self) -> &'static str {
        match self {
            PatternKind::ImpulseIncomplete => "impulse 1-2-3-4",
            PatternKind::ImpulseComplete => "impulse 1-2-3-4-5",
            PatternKind::FifthWaveExtension => "fifth-wave extension",
            PatternKind::EndingDiagonal => "ending diagonal",
            PatternKind::AbcCorrection => "ABC correction",
            PatternKind::FullCycle => "full cycle",
        }
    }
}

impl fmt::Display for PatternKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PatternKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let kind = match s.trim().to_ascii_lowercase().as_str() {
            "impulse4" | "impulse_incomplete" => PatternKind::ImpulseIncomplete,
            "impulse5" | "impulse_complete" => PatternKind::ImpulseComplete,
            "extension" | "fifth_wave_extension" => PatternKind::FifthWaveExtension,
            "diagonal" | "ending_diagonal" => PatternKind::EndingDiagonal,
            "abc" | "abc_correction" => PatternKind::AbcCorrection,
            "cycle" | "full_cycle" => PatternKind::FullCycle,
            other => return Err(format!("unknown pattern kind '{other}'")),
        };
        Ok(kind)
    }
}

/// A validated pattern. `direction` is the trend the pattern belongs to: for
/// an ABC correction that is the trend being corrected, so a falling A-B-C
/// is `Bullish`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatternMatch {
    pub kind: PatternKind,
    pub direction: Trend,
    pub score: f64,
    pub waves: Vec<Wave>,
    pub ratio_report: BTreeMap<String, f64>,
}

impl PatternMatch {
    pub fn first_pivot(&self) -> &Pivot {
        &self.waves[0].start
    }

    pub fn final_pivot(&self) -> &Pivot {
        &self.waves[self.waves.len() - 1].end
    }

    pub fn start_index(&self) -> usize {
        self.first_pivot().index
    }

    pub fn end_index(&self) -> usize {
        self.final_pivot().index
    }

    pub fn span(&self) -> usize {
        self.end_index() - self.start_index()
    }

    pub fn pivots(&self) -> Vec<Pivot> {
        std::iter::once(self.waves[0].start)
            .chain(self.waves.iter().map(|w| w.end))
            .collect()
    }

    pub fn candle_indices(&self) -> Vec<usize> {
        self.pivots().iter().map(|p| p.index).collect()
    }

    pub fn wave(&self, label: &str) -> Option<&Wave> {
        self.waves.iter().find(|w| w.label == label)
    }

    /// Every wave endpoint price, in order.
    pub fn endpoint_prices(&self) -> Vec<f64> {
        self.pivots().iter().map(|p| p.price).collect()
    }
}

fn check_alternating(waves: &[Wave]) -> Result<()> {
    for (k, w) in waves.windows(2).enumerate() {
        if w[0].end.index != w[1].start.index {
            return Err(Error::MalformedDirections(format!(
                "wave {} does not start where wave {} ends",
                k + 2,
                k + 1
            )));
        }
        if w[0].direction() == w[1].direction() {
            return Err(Error::MalformedDirections(format!(
                "waves {} and {} move the same way",
                k + 1,
                k + 2
            )));
        }
    }
    Ok(())
}

/// Per-rule outcome of the impulse check (bullish wording; bearish mirrored).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ImpulseVerdict {
    /// R1: wave 2 ends beyond the start of wave 1 (retraces less than 100%).
    pub r1_wave2_retrace: bool,
    /// R2: wave 3 is not the shortest actionary wave.
    pub r2_wave3_not_shortest: bool,
    /// R3: wave 4 does not enter wave 1's territory.
    pub r3_no_overlap: bool,
    /// R4: wave 3 ends beyond the end of wave 1.
    pub r4_wave3_beyond_wave1: bool,
}

impl ImpulseVerdict {
    pub fn is_valid(&self) -> bool {
        self.r1_wave2_retrace
            && self.r2_wave3_not_shortest
            && self.r3_no_overlap
            && self.r4_wave3_beyond_wave1
    }

    pub fn failed_rules(&self) -> Vec<&'static str> {
        [
            ("R1", self.r1_wave2_retrace),
            ("R2", self.r2_wave3_not_shortest),
            ("R3", self.r3_no_overlap),
            ("R4", self.r4_wave3_beyond_wave1),
        ]
        .into_iter()
        .filter(|(_, ok)| !ok)
        .map(|(name, _)| name)
        .collect()
    }
}

/// Applies R1-R4 to a 4- or 5-wave impulse candidate. Wave 3 only fails R2
/// when it is strictly shorter than every other actionary wave supplied.
pub fn validate_impulse(waves: &[Wave]) -> Result<ImpulseVerdict> {
    if waves.len() != 4 && waves.len() != 5 {
        return Err(Error::WaveCount {
            expected: "4 or 5".into(),
            got: waves.len(),
        });
    }
    check_alternating(waves)?;
    let s = waves[0].direction().sign();
    let len = |k: usize| waves[k].price_length();
    let w3_shortest = len(2) < len(0) && waves.get(4).is_none_or(|w5| len(2) < w5.price_length());
    Ok(ImpulseVerdict {
        r1_wave2_retrace: s * (waves[1].end.price - waves[0].start.price) > 0.0,
        r2_wave3_not_shortest: !w3_shortest,
        r3_no_overlap: s * (waves[3].end.price - waves[0].end.price) > 0.0,
        r4_wave3_beyond_wave1: s * (waves[2].end.price - waves[0].end.price) > 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AbcVerdict {
    /// B opposes A and C follows A.
    pub alternation: bool,
    /// B retraces less than all of A.
    pub b_within_a: bool,
    /// A moves against the preceding impulse; `None` without one.
    pub opposes_impulse: Option<bool>,
    /// Whole correction retraces between the minimum Fibonacci level and
    /// 100% of the impulse; `None` without one.
    pub retrace_in_range: Option<bool>,
}

impl AbcVerdict {
    pub fn is_valid(&self) -> bool {
        self.alternation
            && self.b_within_a
            && self.opposes_impulse.unwrap_or(true)
            && self.retrace_in_range.unwrap_or(true)
    }
}

/// Fraction of the impulse's total range given back by the correction.
pub fn correction_retracement(waves: &[Wave], impulse: &PatternMatch) -> f64 {
    let first = impulse.first_pivot().price;
    let last = impulse.final_pivot().price;
    let range = (last - first).abs();
    impulse.direction.sign() * (last - waves[2].end.price) / range
}

/// Checks an A-B-C candidate. With a preceding impulse, the total
/// retracement must lie in `[min_retracement * (1 - tolerance), 1.0]`.
pub fn validate_abc(
    waves: &[Wave],
    preceding_impulse: Option<&PatternMatch>,
    ratios: &FibRatios,
) -> Result<AbcVerdict> {
    if waves.len() != 3 {
        return Err(Error::WaveCount {
            expected: "3".into(),
            got: waves.len(),
        });
    }
    let (a, b, c) = (&waves[0], &waves[1], &waves[2]);
    let alternation = b.direction() != a.direction() && c.direction() == a.direction();
    let b_within_a = a.direction().sign() * (b.end.price - a.start.price) > 0.0;
    let (opposes_impulse, retrace_in_range) = match preceding_impulse {
        None => (None, None),
        Some(imp) => {
            let opposes = Trend::of(a.direction()) != imp.direction;
            let r = correction_retracement(waves, imp);
            let lower = ratios.min_retracement() * (1.0 - ratios.ratio_tolerance);
            (Some(opposes), Some(r >= lower && r <= 1.0))
        }
    };
    Ok(AbcVerdict {
        alternation,
        b_within_a,
        opposes_impulse,
        retrace_in_range,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DiagonalVerdict {
    pub wave3_shorter_than_1: bool,
    pub wave5_shorter_than_3: bool,
    pub wave4_shorter_than_2: bool,
    /// Wave 4 ends inside wave 1's territory: the inversion of impulse R3.
    pub wave4_overlaps_wave1: bool,
}

impl DiagonalVerdict {
    pub fn is_valid(&self) -> bool {
        self.wave3_shorter_than_1
            && self.wave5_shorter_than_3
            && self.wave4_shorter_than_2
            && self.wave4_overlaps_wave1
    }
}

pub fn validate_ending_diagonal(waves: &[Wave]) -> Result<DiagonalVerdict> {
    if waves.len() != 5 {
        return Err(Error::WaveCount {
            expected: "5".into(),
            got: waves.len(),
        });
    }
    check_alternating(waves)?;
    let s = waves[0].direction().sign();
    let len = |k: usize| waves[k].price_length();
    Ok(DiagonalVerdict {
        wave3_shorter_than_1: len(2) < len(0),
        wave5_shorter_than_3: len(4) < len(2),
        wave4_shorter_than_2: len(3) < len(1),
        wave4_overlaps_wave1: s * (waves[3].end.price - waves[0].end.price) <= 0.0,
    })
}

/// An actionary wave stretched beyond the extension threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Extension {
    /// 3 or 5.
    pub extended_wave: u8,
    /// Price length of the extended wave over wave 1.
    pub multiple: f64,
    /// True when the multiple reaches the strong (2.618) level.
    pub strong: bool,
    /// Internal five-wave subdivision found on finer pivots.
    pub sub_waves: Option<Vec<Wave>>,
}

/// Finds the extended actionary wave of a five-wave impulse. When both
/// waves 3 and 5 qualify the larger multiple wins (wave 3 on ties).
pub fn detect_extension(
    impulse: &PatternMatch,
    ratios: &FibRatios,
    finer: Option<&PivotSequence>,
) -> Option<Extension> {
    if impulse.waves.len() != 5 {
        return None;
    }
    let w1 = impulse.waves[0].price_length();
    let (wave_no, multiple) = [(3u8, 2usize), (5, 4)]
        .into_iter()
        .map(|(no, k)| (no, impulse.waves[k].price_length() / w1))
        .filter(|&(_, m)| m >= ratios.extension_threshold)
        .fold(None::<(u8, f64)>, |best, cand| match best {
            Some(b) if b.1 >= cand.1 => Some(b),
            _ => Some(cand),
        })?;
    let extended = &impulse.waves[usize::from(wave_no) - 1];
    let sub_waves = finer.and_then(|f| subdivide(extended, f, ratios));
    Some(Extension {
        extended_wave: wave_no,
        multiple,
        strong: multiple >= ratios.extension_strong,
        sub_waves,
    })
}

/// Best-scoring valid five-wave impulse on `finer` pivots spanning `wave`.
fn subdivide(wave: &Wave, finer: &PivotSequence, ratios: &FibRatios) -> Option<Vec<Wave>> {
    let inside: Vec<Pivot> = finer
        .pivots()
        .iter()
        .filter(|p| p.index >= wave.start.index && p.index <= wave.end.index)
        .copied()
        .collect();
    let first = inside.first()?;
    let last = inside.last()?;
    if first.index != wave.start.index
        || last.index != wave.end.index
        || first.kind != pivot_kind_at_start(wave)
    {
        return None;
    }
    let seq = PivotSequence::new(inside.clone(), finer.threshold()).ok()?;
    let mut best: Option<PatternMatch> = None;
    for combo in crate::pivots::pivot_subsequences(&seq, 6) {
        if combo[0] != 0 || combo[5] != inside.len() - 1 {
            continue;
        }
        let ps: Vec<Pivot> = combo.iter().map(|&i| inside[i]).collect();
        if let Ok(Some(m)) = match_kind(PatternKind::ImpulseComplete, &ps, ratios) {
            if best.as_ref().is_none_or(|b| m.score > b.score) {
                best = Some(m);
            }
        }
    }
    best.map(|m| {
        m.waves
            .into_iter()
            .zip(["i", "ii", "iii", "iv", "v"])
            .map(|(mut w, label)| {
                w.label = label.into();
                w
            })
            .collect()
    })
}

fn pivot_kind_at_start(wave: &Wave) -> PivotKind {
    match wave.direction() {
        WaveDirection::Up => PivotKind::Low,
        WaveDirection::Down => PivotKind::High,
    }
}

/// Fibonacci retracement prices of a wave at each retracement ratio.
pub fn retracement_levels(wave: &Wave, ratios: &FibRatios) -> Result<[f64; 3]> {
    let (p0, p1) = (wave.start.price, wave.end.price);
    if p0 == p1 {
        return Err(Error::ZeroLengthWave {
            start: wave.start.index,
            end: wave.end.index,
        });
    }
    Ok(ratios.retracements.map(|r| p1 - r * (p1 - p0)))
}

struct RatioCheck {
    name: String,
    measured: f64,
    aligned: bool,
}

fn impulse_checks(waves: &[Wave], ratios: &FibRatios, prefix: &str) -> Vec<RatioCheck> {
    let len = |k: usize| waves[k].price_length();
    let mut out = vec![
        check(
            prefix,
            "wave2_retracement",
            len(1) / len(0),
            &ratios.retracements,
            ratios,
        ),
        check(
            prefix,
            "wave3_to_wave1",
            len(2) / len(0),
            &[ratios.golden],
            ratios,
        ),
        check(
            prefix,
            "wave4_retracement",
            len(3) / len(2),
            &ratios.retracements,
            ratios,
        ),
    ];
    if waves.len() == 5 {
        out.push(check(
            prefix,
            "wave5_to_wave1",
            len(4) / len(0),
            &[1.0, ratios.fifth_wave_multiple],
            ratios,
        ));
    }
    out
}

fn abc_checks(
    waves: &[Wave],
    preceding: Option<&PatternMatch>,
    ratios: &FibRatios,
    prefix: &str,
) -> Vec<RatioCheck> {
    let len = |k: usize| waves[k].price_length();
    let mut out = vec![
        check(
            prefix,
            "b_retracement",
            len(1) / len(0),
            &ratios.retracements,
            ratios,
        ),
        check(
            prefix,
            "c_to_a",
            len(2) / len(0),
            &[1.0, ratios.golden],
            ratios,
        ),
    ];
    if let Some(imp) = preceding {
        out.push(check(
            prefix,
            "correction_retracement",
            correction_retracement(waves, imp),
            &ratios.retracements,
            ratios,
        ));
    }
    out
}

fn diagonal_checks(waves: &[Wave], ratios: &FibRatios) -> Vec<RatioCheck> {
    let len = |k: usize| waves[k].price_length();
    let inverse_golden = 1.0 / ratios.golden;
    vec![
        check(
            "",
            "wave2_retracement",
            len(1) / len(0),
            &ratios.retracements,
            ratios,
        ),
        check(
            "",
            "wave3_to_wave1",
            len(2) / len(0),
            &[inverse_golden],
            ratios,
        ),
        check(
            "",
            "wave4_retracement",
            len(3) / len(2),
            &ratios.retracements,
            ratios,
        ),
        check(
            "",
            "wave5_to_wave3",
            len(4) / len(2),
            &[inverse_golden],
            ratios,
        ),
    ]
}

fn check(
    prefix: &str,
    name: &str,
    measured: f64,
    targets: &[f64],
    ratios: &FibRatios,
) -> RatioCheck {
    RatioCheck {
        name: format!("{prefix}{name}"),
        measured,
        aligned: ratios.aligned(measured, targets),
    }
}

fn scored(
    kind: PatternKind,
    direction: Trend,
    waves: Vec<Wave>,
    checks: Vec<RatioCheck>,
) -> PatternMatch {
    let aligned = checks.iter().filter(|c| c.aligned).count();
    let score = if checks.is_empty() {
        0.0
    } else {
        aligned as f64 / checks.len() as f64
    };
    PatternMatch {
        kind,
        direction,
        score,
        waves,
        ratio_report: checks.into_iter().map(|c| (c.name, c.measured)).collect(),
    }
}

/// Validates `pivots` as a pattern of `kind` and scores it.
///
/// Returns `Ok(None)` when the structure is well formed but breaks a rule,
/// and an error when the pivot count or direction pattern is malformed.
pub fn match_kind(
    kind: PatternKind,
    pivots: &[Pivot],
    ratios: &FibRatios,
) -> Result<Option<PatternMatch>> {
    let waves = waves_from_pivots(pivots, kind.labels())?;
    let direction = Trend::of(waves[0].direction());
    let found = match kind {
        PatternKind::ImpulseIncomplete | PatternKind::ImpulseComplete => {
            validate_impulse(&waves)?.is_valid().then(|| {
                let checks = impulse_checks(&waves, ratios, "");
                scored(kind, direction, waves, checks)
            })
        }
        PatternKind::FifthWaveExtension => {
            match match_kind(PatternKind::ImpulseComplete, pivots, ratios)? {
                Some(m) => detect_extension(&m, ratios, None)
                    .filter(|e| e.extended_wave == 5)
                    .map(|_| PatternMatch { kind, ..m }),
                None => None,
            }
        }
        PatternKind::EndingDiagonal => validate_ending_diagonal(&waves)?.is_valid().then(|| {
            let checks = diagonal_checks(&waves, ratios);
            scored(kind, direction, waves, checks)
        }),
        PatternKind::AbcCorrection => {
            check_alternating(&waves)?;
            validate_abc(&waves, None, ratios)?.is_valid().then(|| {
                let checks = abc_checks(&waves, None, ratios, "");
                scored(kind, Trend::against(waves[0].direction()), waves, checks)
            })
        }
        PatternKind::FullCycle => {
            let impulse = match match_kind(PatternKind::ImpulseComplete, &pivots[..6], ratios)? {
                Some(m) => m,
                None => return Ok(None),
            };
            let abc_waves = &waves[5..];
            check_alternating(abc_waves)?;
            if !validate_abc(abc_waves, Some(&impulse), ratios)?.is_valid() {
                return Ok(None);
            }
            let mut checks = impulse_checks(&waves[..5], ratios, "");
            checks.extend(abc_checks(abc_waves, Some(&impulse), ratios, "abc_"));
            Some(scored(kind, direction, waves, checks))
        }
    };
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::pivots_from_prices;

    fn waves(prices: &[f64]) -> Vec<Wave> {
        let labels = ["1", "2", "3", "4", "5", "6", "7", "8"];
        waves_from_pivots(&pivots_from_prices(prices), &labels[..prices.len() - 1]).unwrap()
    }

    #[test]
    fn impulse_reference_is_valid() {
        let v = validate_impulse(&waves(&[100.0, 110.0, 104.0, 120.0, 112.0, 126.0])).unwrap();
        assert!(v.is_valid());
        assert!(v.failed_rules().is_empty());
    }

    #[test]
    fn impulse_overlap_fails_r3() {
        let v = validate_impulse(&waves(&[100.0, 110.0, 104.0, 120.0, 108.0, 126.0])).unwrap();
        assert!(!v.is_valid());
        assert_eq!(v.failed_rules(), vec!["R3"]);
    }

    #[test]
    fn impulse_wave3_below_wave1_fails_r4() {
        // wave 4 must still fall from 109, so it lands inside wave 1 as well
        let v = validate_impulse(&waves(&[100.0, 110.0, 104.0, 109.0, 105.0, 108.0])).unwrap();
        assert!(!v.r4_wave3_beyond_wave1);
        assert!(!v.is_valid());
    }

    #[test]
    fn impulse_errors() {
        assert!(matches!(
            validate_impulse(&waves(&[100.0, 110.0, 104.0, 120.0])),
            Err(Error::WaveCount { .. })
        ));
        let mut ws = waves(&[100.0, 110.0, 104.0, 120.0, 112.0]);
        ws[2].end.price = 103.0;
        ws[3].start.price = 103.0;
        assert!(matches!(
            validate_impulse(&ws),
            Err(Error::MalformedDirections(_))
        ));
    }

    #[test]
    fn bearish_impulse_mirrors() {
        let v = validate_impulse(&waves(&[126.0, 116.0, 122.0, 106.0, 114.0, 100.0])).unwrap();
        assert!(v.is_valid());
    }

    #[test]
    fn four_wave_r2_compares_waves_1_and_3() {
        // wave 3 (8) shorter than wave 1 (10)
        let v = validate_impulse(&waves(&[100.0, 110.0, 104.0, 112.0, 111.0])).unwrap();
        assert!(!v.r2_wave3_not_shortest);
        let v = validate_impulse(&waves(&[100.0, 110.0, 104.0, 120.0, 112.0])).unwrap();
        assert!(v.is_valid());
    }

    fn impulse_match() -> PatternMatch {
        match_kind(
            PatternKind::ImpulseComplete,
            &pivots_from_prices(&[100.0, 110.0, 104.0, 120.0, 112.0, 126.0]),
            &FibRatios::default(),
        )
        .unwrap()
        .unwrap()
    }

    #[test]
    fn abc_after_impulse() {
        let imp = impulse_match();
        let mut ps = pivots_from_prices(&[126.0, 114.0, 119.0, 106.0]);
        for p in &mut ps {
            p.index += 20;
        }
        let ws = waves_from_pivots(&ps, &["A", "B", "C"]).unwrap();
        let r = correction_retracement(&ws, &imp);
        assert!((r - 20.0 / 26.0).abs() < 1e-12);
        let v = validate_abc(&ws, Some(&imp), &FibRatios::default()).unwrap();
        assert!(v.is_valid());
    }

    #[test]
    fn abc_b_beyond_a_start_invalid() {
        let ws = waves(&[126.0, 114.0, 127.0, 106.0]);
        assert!(!validate_abc(&ws, None, &FibRatios::default())
            .unwrap()
            .is_valid());
    }

    #[test]
    fn abc_shallow_correction_invalid_with_impulse() {
        let imp = impulse_match();
        // 126 -> 120.8 is 20% of the 26-point impulse
        let ws = waves(&[126.0, 121.0, 123.0, 120.8]);
        let ratios = FibRatios::default();
        assert!(validate_abc(&ws, None, &ratios).unwrap().is_valid());
        let v = validate_abc(&ws, Some(&imp), &ratios).unwrap();
        assert_eq!(v.retrace_in_range, Some(false));
        assert!(!v.is_valid());
    }

    #[test]
    fn abc_wrong_count() {
        assert!(validate_abc(&waves(&[1.0, 2.0, 1.5]), None, &FibRatios::default()).is_err());
    }

    fn extension_of(prices: &[f64]) -> Option<Extension> {
        let m = PatternMatch {
            kind: PatternKind::ImpulseComplete,
            direction: Trend::Bullish,
            score: 0.0,
            waves: waves(prices),
            ratio_report: BTreeMap::new(),
        };
        detect_extension(&m, &FibRatios::default(), None)
    }

    #[test]
    fn extension_thresholds() {
        // wave 3 = 16.2 over wave 1 = 10
        let e = extension_of(&[100.0, 110.0, 104.0, 120.2, 114.0, 120.0]).unwrap();
        assert_eq!(e.extended_wave, 3);
        assert!((e.multiple - 1.62).abs() < 1e-9);
        assert!(extension_of(&[100.0, 110.0, 104.0, 120.0, 112.0, 126.0]).is_none());
        let e = extension_of(&[100.0, 110.0, 104.0, 116.0, 112.0, 139.0]).unwrap();
        assert_eq!(e.extended_wave, 5);
        assert!((e.multiple - 2.7).abs() < 1e-9);
        assert!(e.strong);
    }

    #[test]
    fn extension_subdivision_on_finer_pivots() {
        // main impulse 100,110,104,116,112,139 with wave 5 subdividing
        let prices = [
            100.0, 110.0, 104.0, 116.0, 112.0, 118.0, 115.0, 132.0, 127.0, 139.0,
        ];
        let ps = pivots_from_prices(&prices);
        let finer = PivotSequence::new(ps.clone(), 0.01).unwrap();
        let main = [ps[0], ps[1], ps[2], ps[3], ps[4], ps[9]];
        let m = PatternMatch {
            kind: PatternKind::ImpulseComplete,
            direction: Trend::Bullish,
            score: 0.0,
            waves: waves_from_pivots(&main, &["1", "2", "3", "4", "5"]).unwrap(),
            ratio_report: BTreeMap::new(),
        };
        let e = detect_extension(&m, &FibRatios::default(), Some(&finer)).unwrap();
        let subs = e.sub_waves.unwrap();
        assert_eq!(subs.len(), 5);
        assert_eq!(subs[0].start.price, 112.0);
        assert_eq!(subs[4].end.price, 139.0);
        assert_eq!(subs[2].label, "iii");
    }

    #[test]
    fn diagonal_rules() {
        // lengths 10, 6, 8, 5, 6; wave 4 ends at 107 inside wave 1 (100..110)
        let ws = waves(&[100.0, 110.0, 104.0, 112.0, 107.0, 113.0]);
        assert!(validate_ending_diagonal(&ws).unwrap().is_valid());
        let ws = waves(&[100.0, 110.0, 104.0, 116.0, 111.0, 113.0]);
        let v = validate_ending_diagonal(&ws).unwrap();
        assert!(!v.wave3_shorter_than_1 && !v.is_valid());
        // contracting but wave 4 stays above wave 1's end
        let ws = waves(&[100.0, 110.0, 102.0, 111.0, 110.5, 112.0]);
        let v = validate_ending_diagonal(&ws).unwrap();
        assert!(v.wave3_shorter_than_1 && v.wave5_shorter_than_3 && v.wave4_shorter_than_2);
        assert!(!v.wave4_overlaps_wave1 && !v.is_valid());
    }

    #[test]
    fn retracement_levels_both_directions() {
        let r = FibRatios::default();
        let up = retracement_levels(&waves(&[100.0, 120.0])[0], &r).unwrap();
        let down = retracement_levels(&waves(&[120.0, 100.0])[0], &r).unwrap();
        for (got, want) in up.iter().zip([112.36, 110.0, 107.64]) {
            assert!((got - want).abs() < 1e-9);
        }
        for (got, want) in down.iter().zip([107.64, 110.0, 112.36]) {
            assert!((got - want).abs() < 1e-9);
        }
        let p = pivots_from_prices(&[100.0, 120.0]);
        let flat = Wave {
            label: "1".into(),
            start: p[0],
            end: Pivot {
                price: 100.0,
                ..p[1]
            },
        };
        assert!(retracement_levels(&flat, &r).is_err());
        assert!(Wave::new(
            "1",
            p[0],
            Pivot {
                price: 100.0,
                ..p[1]
            }
        )
        .is_err());
    }

    #[test]
    fn reference_impulse_score() {
        let m = impulse_match();
        // w2 0.6 ~ 0.618, w3/w1 1.6 ~ 1.618, w4 0.5, w5/w1 1.4 misses
        assert_eq!(m.score, 0.75);
        assert_eq!(m.ratio_report["wave3_to_wave1"], 1.6);
        assert_eq!(m.direction, Trend::Bullish);
    }

    #[test]
    fn full_cycle_match() {
        let ps = pivots_from_prices(&[
            100.0, 110.0, 104.0, 120.0, 112.0, 126.0, 114.0, 119.0, 106.0,
        ]);
        let m = match_kind(PatternKind::FullCycle, &ps, &FibRatios::default())
            .unwrap()
            .unwrap();
        assert_eq!(m.waves.len(), 8);
        assert_eq!(m.waves[5].label, "A");
        assert!(m.ratio_report.contains_key("abc_correction_retracement"));
    }

    #[test]
    fn abc_direction_is_corrected_trend() {
        let ps = pivots_from_prices(&[126.0, 114.0, 119.0, 106.0]);
        let m = match_kind(PatternKind::AbcCorrection, &ps, &FibRatios::default())
            .unwrap()
            .unwrap();
        assert_eq!(m.direction, Trend::Bullish);
    }

    #[test]
    fn kind_names_round_trip() {
        for k in PatternKind::ALL {
            assert_eq!(k.as_str().parse::<PatternKind>().unwrap(), k);
            assert_eq!(
                serde_json::to_string(&k).unwrap(),
                format!("\"{}\"", k.as_str())
            );
            assert_eq!(k.labels().len(), k.wave_count());
        }
        assert_eq!(
            "impulse5".parse::<PatternKind>().unwrap(),
            PatternKind::ImpulseComplete
        );
        assert!("triangle".parse::<PatternKind>().is_err());
    }

    #[test]
    fn tolerance_bounds() {
        assert!(FibRatios::with_tolerance(0.0).is_err());
        assert!(FibRatios::with_tolerance(0.5).is_err());
        assert!(FibRatios::with_tolerance(0.2).is_ok());
    }
}
