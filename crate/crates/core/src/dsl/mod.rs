//! Textual model syntax: lexer, parser and printer.
//!
//! ```text
//! vars      { temp = 0 +- 0.4 in [0, 30]; }
//! actuators { cool = off; }
//! sensors   { st measures temp +- 0.1; }
//! dynamics  { temp: cool = on -> -1, _ -> 1; }
//!
//! process Ctrl = fix X. read st(x). if x > 10 then Cooling else tick.X;
//! system Ctrl;
//! ```
//!
//! `[pi.P]Q` is a timeout, `pi.P` the persistent prefix, `P | Q` parallel
//! composition and `P\c` restriction. Process names are expanded in place,
//! so a definition may mention recursion variables bound where it is used.

mod lexer;
mod parser;
mod printer;

pub use lexer::{lex, LexError, Spanned, Tok};
pub use parser::{parse, parse_model, Model, ModelError, ParseError, KEYWORDS};
pub use printer::{print_env, print_model, print_process};
