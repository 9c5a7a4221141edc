//! Command-line pipeline around the `mobility-loci` library.
//!
//! `build`, `stationary`, `loci` and `features` each run a prefix of the
//! analysis and write its tables; `report` runs all of them. Every run also
//! writes `manifest.json` with the resolved configuration and input digests.

pub mod config;
pub mod pipeline;
mod table;

pub use config::{Cli, Command, ComponentSelector, DirectionChoice, InputFormat, RunArgs, RunConfig, Stage};
pub use pipeline::{execute, run, write_artifacts, Artifact};
