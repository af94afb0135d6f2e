//! Learns a reliability table from a history where one impulse shape keeps
//! reversing as expected and another mostly fails, then saves and reloads it.

use elliott::backtester::{train_with_log, BacktestTable, LearnParams};
use elliott::levels_signals::SignalConfig;
use elliott::pattern_search::SearchConfig;
use elliott::synthetic::{mixed_contexts, Context, ImpulseShape};
use elliott::wave_model::PatternKind;

fn main() -> elliott::Result<()> {
    let contexts = [
        Context {
            shape: ImpulseShape::fibonacci(),
            cycles: 20,
            textbook: 18,
        },
        Context {
            shape: ImpulseShape::irregular(),
            cycles: 20,
            textbook: 6,
        },
    ];
    let history = mixed_contexts(1, &contexts, 100.0);
    let config = SignalConfig {
        search: SearchConfig::with_kinds([PatternKind::ImpulseComplete]),
        ..SignalConfig::default()
    };
    let (table, outcomes) = train_with_log(&history, &config, &LearnParams::default())?;
    println!(
        "{} candles, {} resolved signals",
        history.len(),
        outcomes.len()
    );
    for (key, entry) in table.entries() {
        println!(
            "{:<20} {:?} {:?} {:?}: {:>2} trials, {:>2} hits, q {:.3}",
            key.kind.title(),
            key.direction,
            key.interval,
            key.bucket,
            entry.trials,
            entry.hits,
            entry.q_value
        );
    }

    let path = std::env::temp_dir().join("elliott-example-table.json");
    table.save(&path)?;
    assert_eq!(BacktestTable::load(&path)?, table);
    println!("saved to {}", path.display());
    Ok(())
}
