//! Levels and a trade signal from an ending diagonal on hourly candles.
//! The window stops on the candle that confirms the reversal.

use elliott::levels_signals::{signal_at, SignalConfig};
use elliott::synthetic::ending_diagonal_scenario;

fn main() -> elliott::Result<()> {
    let series = ending_diagonal_scenario().prefix(17);
    let Some(signal) = signal_at(&series, &SignalConfig::default())? else {
        println!("no signal");
        return Ok(());
    };
    println!("{}", signal.rationale);
    println!(
        "{} at {:.2}, target {:.2}, backup {:.2}, profit {:.2} per share",
        signal.direction,
        signal.entry,
        signal.target,
        signal.backup_level,
        signal.theoretical_profit()
    );
    println!("{}", signal.to_json()?);
    Ok(())
}
