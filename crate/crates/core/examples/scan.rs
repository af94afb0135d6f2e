//! Scans a textbook impulse and its correction for every pattern kind and
//! shows the rule checks and Fibonacci ratios behind each match.

use elliott::pattern_search::{scan, SearchConfig};
use elliott::pivots::extract_pivots;
use elliott::synthetic::extended_fifth_scenario;
use elliott::wave_model::{detect_extension, validate_impulse, FibRatios, PatternKind};

fn main() -> elliott::Result<()> {
    let series = extended_fifth_scenario();
    let pivots = extract_pivots(&series, 0.03)?;
    let matches = scan(&series, &pivots, &SearchConfig::default())?;
    println!("{} matches on {} candles", matches.len(), series.len());
    for m in &matches {
        println!(
            "{:<22} {:?} score {:.2} candles {:?}",
            m.kind.title(),
            m.direction,
            m.score,
            m.candle_indices()
        );
        for (name, value) in &m.ratio_report {
            println!("    {name} = {value:.3}");
        }
    }

    let impulse = matches
        .iter()
        .find(|m| m.kind == PatternKind::ImpulseComplete)
        .expect("the planted impulse is found");
    let verdict = validate_impulse(&impulse.waves)?;
    println!("impulse rules: {verdict:?}");
    if let Some(ext) = detect_extension(impulse, &FibRatios::default(), None) {
        println!(
            "wave {} extended {:.2}x wave 1",
            ext.extended_wave, ext.multiple
        );
    }
    Ok(())
}
