//! Unit-by-unit translation into a continuously compiling Rust project.

pub mod backend;
pub mod pipeline;
pub mod project;
pub mod prompt;
pub mod stub;

pub use backend::{extract_code, Fault, HttpBackend, ReplayBackend, ReplayFixtures, TranslatorBackend};
pub use pipeline::{RepairOutcome, Translator};
pub use project::{placement_for, CompileOutcome, Diagnostic, GeneratedProject};
pub use prompt::{assemble_correction_prompt, assemble_translation_prompt, PromptDocument, PromptKind};
pub use stub::StubBuilder;
