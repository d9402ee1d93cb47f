//! Text formats, Graphviz export and the `opacity` command line.

pub mod app;
pub mod dot;
pub mod format;

pub use format::{parse_nts, parse_partition, parse_relation, serialize_nts, FormatError};
