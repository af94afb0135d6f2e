//! Zigzag pivots at two thresholds. The last pivot stays provisional until
//! price reverses far enough to confirm it.

use elliott::pivots::extract_pivots;
use elliott::synthetic::random_walk;

fn main() -> elliott::Result<()> {
    let series = random_walk(7, 120, 50.0, 0.02);
    for threshold in [0.03, 0.08] {
        let pivots = extract_pivots(&series, threshold)?;
        println!(
            "threshold {threshold}: {} pivots, {} confirmed",
            pivots.len(),
            pivots.confirmed_count()
        );
        for p in pivots.pivots() {
            let confirmed = match p.confirmed_at {
                Some(c) => format!("confirmed on candle {c}"),
                None => "provisional".to_string(),
            };
            println!(
                "  {:?} {:>7.2} at candle {:>3}  {confirmed}",
                p.kind, p.price, p.index
            );
        }
    }
    Ok(())
}
