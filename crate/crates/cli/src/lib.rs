//! Command-line front end, benchmark harness and SVG rendering for
//! `hrcp-core`.

pub mod bench;
pub mod cli;
pub mod method;
pub mod plot;

pub use cli::{cli_main, run_with_output};
