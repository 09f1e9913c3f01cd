//! Front end for the minimal block code: file compression, prefix sweeps
//! with CSV and SVG output, and small measurement commands.

pub mod app;
pub mod experiment;
pub mod plot;

pub use app::run;
