//! The textual `.tsc` specification dialect: parsing and serialization.
//!
//! Files are UTF-8 with `#` line comments. Diagnostics print as
//! `file:line:col: severity: message`. Units m, s, m/s, m/s2, kmh, deg
//! and rad are accepted and normalized to SI at parse time.

mod lexer;
mod parser;
mod printer;

pub use parser::{parse_decimal, parse_spec};
pub use printer::{rat_str, serialize_spec};
