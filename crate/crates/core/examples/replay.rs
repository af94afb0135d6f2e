//! Walks a full five-wave cycle and its correction candle by candle,
//! logging each signal as soon as the visible data supports it.

use elliott::levels_signals::SignalConfig;
use elliott::replay::replay;
use elliott::synthetic::full_cycle_scenario;

fn main() -> elliott::Result<()> {
    let series = full_cycle_scenario();
    let log = replay(&series, &SignalConfig::default(), 1)?;
    for e in &log.entries {
        let s = &e.signal;
        println!(
            "step {:>2}: {} {} at {:.2} -> {:.2} (backup {:.2}), {:?}, profit {:.2}/share ({:.1}%)",
            e.step,
            s.direction,
            s.pattern_kind().title(),
            s.entry,
            s.target,
            s.backup_level,
            e.trade.status,
            e.trade.theoretical_profit,
            e.trade.theoretical_return * 100.0
        );
        if let Some(o) = &e.outcome {
            println!(
                "         mean of next {} closes {:.2}, correct: {}",
                s.horizon_n, o.mean_future_price, o.correct
            );
        }
    }
    Ok(())
}
