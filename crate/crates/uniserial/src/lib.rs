//! File formats, JSON reports and the command-line front end for
//! `uniserial-core`.

pub mod cli;
pub mod format;
pub mod report;

pub use format::{parse_presentation, serialize_presentation, ParseError};
