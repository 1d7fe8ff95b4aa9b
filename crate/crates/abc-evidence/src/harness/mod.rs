//! CLI front-end: configuration resolution, experiment drivers, and the
//! CSV/SVG emitters they share.

pub mod config;
pub mod csvfmt;
pub mod experiments;
pub mod svg;

pub use config::{ExperimentConfig, ExperimentKind, RawInputs, resolve};
pub use experiments::run;
