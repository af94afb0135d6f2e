//! Five-fold cross-validation, first on planted textbook impulses and then
//! on a mixed series with and without a reliability table.

use elliott::backtester::{cross_validate, CrossValConfig};
use elliott::levels_signals::SignalConfig;
use elliott::synthetic::{mixed_contexts, planted_impulses, Context, ImpulseShape};

fn main() -> elliott::Result<()> {
    let planted = planted_impulses(20, 100.0).prefix(1000);
    let config = SignalConfig::default();
    let report = cross_validate(&planted, &config, &CrossValConfig::default(), None)?;
    println!("planted impulses ({} candles)\n{report}", planted.len());

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
    let history = mixed_contexts(1000, &contexts, 100.0);
    let series = mixed_contexts(0, &contexts, 100.0);
    let cv = CrossValConfig {
        with_backtesting: true,
        ..CrossValConfig::default()
    };
    let report = cross_validate(&series, &config, &cv, Some(&history))?;
    println!("mixed contexts ({} candles)\n{report}", series.len());
    for w in &report.warnings {
        println!("warning: {w}");
    }
    Ok(())
}
