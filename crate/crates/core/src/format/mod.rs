//! The `.kb` text format.

mod parser;
mod serialize;

pub use parser::{is_ident_char, parse, Parsed};
pub use serialize::{serialize, HEADER};
