//! Library side of the `dnoise` command-line tool.

pub mod commands;
pub mod schema;

pub use commands::{run, Cli};
