pub mod annotator;
pub mod cli;
pub mod depgraph;
pub mod error;
pub mod frontend;
pub mod kgstore;
pub mod planner;
pub mod ptrfacts;
pub mod translator;

pub use error::{Error, Result};
