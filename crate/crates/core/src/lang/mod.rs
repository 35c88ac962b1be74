//! Parsers and serializers for the rule language, mode declarations,
//! observation streams and annotation files, plus the batch loader.

pub mod loader;
pub mod parser;
pub mod printer;
#[cfg(test)]
mod proptests;

pub use loader::{build_batches, load_stream, AnnotationRecord, Batch, LoadError};
pub use parser::{parse_facts, parse_modes, parse_rules, ParseError, StreamRecord};
pub use printer::{print_atom, print_fact, print_mode, print_rule, print_rules, print_term};
