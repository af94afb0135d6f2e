//! Runs the six-stage pipeline on an ending diagonal and writes the
//! markdown report, JSON sidecar and SVG chart.
//!
//! `cargo run --example analyze -- [out_dir]`

use elliott::pipeline_report::{run_pipeline, AnalysisRequest, DataSource, TemplateNarrator};
use elliott::synthetic::ending_diagonal_scenario;

fn main() -> elliott::Result<()> {
    let series = ending_diagonal_scenario().prefix(17);
    let interval = series.interval();
    let request = AnalysisRequest::new(DataSource::Series(series), "DIAG", interval);
    let output = run_pipeline(&request, &TemplateNarrator)?;
    for stage in &output.trace {
        println!(
            "{:<13} {:>8.2?} {:?}",
            stage.stage.to_string(),
            stage.elapsed,
            stage.diagnostics
        );
    }
    println!("\n{}", output.report.narrative);

    let dir = std::env::args()
        .nth(1)
        .map(Into::into)
        .unwrap_or_else(|| std::env::temp_dir().join("elliott-example-report"));
    output.write_to(&dir)?;
    println!("wrote report to {}", dir.display());
    Ok(())
}
