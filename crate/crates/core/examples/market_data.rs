//! Builds a synthetic hourly series, round-trips it through CSV and
//! resamples it to daily candles.
//!
//! `cargo run --example market_data -- [out.csv]` also writes the daily
//! series to the given path for use with the CLI.

use elliott::market_data::{read_csv, Interval};
use elliott::synthetic::PathBuilder;

fn main() -> elliott::Result<()> {
    let hourly = PathBuilder::new(100.0)
        .wick(0.002)
        .leg(112.0, 60)
        .leg(104.0, 40)
        .leg(125.0, 90)
        .build("DEMO", Interval::Hourly);

    let mut buf = Vec::new();
    hourly.write_csv(&mut buf)?;
    let reloaded = read_csv(buf.as_slice(), "DEMO", Interval::Hourly)?;
    assert_eq!(reloaded, hourly);
    println!("hourly candles: {} ({} CSV bytes)", hourly.len(), buf.len());

    let daily = hourly.resample(Interval::Daily)?;
    println!("daily candles: {}", daily.len());
    for c in daily.candles() {
        println!(
            "  {}  o {:>7.2}  h {:>7.2}  l {:>7.2}  c {:>7.2}",
            c.timestamp, c.open, c.high, c.low, c.close
        );
    }

    if let Some(path) = std::env::args().nth(1) {
        daily.save_csv(&path)?;
        println!("wrote {path}");
    }
    Ok(())
}
