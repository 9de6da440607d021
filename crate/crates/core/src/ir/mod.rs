//! The two-sided intermediate representation: a line-oriented corpus grammar
//! covering managed classes/interfaces, native functions, JNI registration
//! tables, and stub bindings, plus the analysis configuration that travels
//! with a parsed [`types::ProgramDb`].

pub mod config;
pub mod hierarchy;
mod lexer;
mod link;
pub mod parser;
pub mod printer;
pub mod types;
pub mod validate;

pub use link::static_var_types;
