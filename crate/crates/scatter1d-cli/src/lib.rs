//! Library half of the scatter1d CLI: configuration schema, presets, sweep
//! orchestration, and artifact emission. The binary in `main.rs` is a thin
//! argument-parsing layer over these modules.

pub mod config;
pub mod output;
pub mod presets;
pub mod sweep;
