pub mod backtester;
pub mod cli;
pub mod error;
pub mod levels_signals;
pub mod market_data;
pub mod pattern_search;
pub mod pipeline_report;
pub mod pivots;
pub mod replay;
pub mod synthetic;
pub mod wave_model;

pub use error::{Error, Result};
