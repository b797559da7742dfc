//! C frontend: preprocessing through an external command, then parsing a C subset.

pub mod ast;
pub mod lexer;
pub mod model;
pub mod parser;
pub mod preprocess;

pub use model::{parse_project, FunctionEntry, SourceModel, Symbol, SymbolKind};
pub use parser::UnsupportedConstruct;
pub use preprocess::{preprocess, ExpandedFile, OriginKind, PreprocessedProject, ProjectSource};
